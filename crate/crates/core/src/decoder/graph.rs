use crate::cycle::RiskList;
use crate::layout::{CheckType, CodeLayout};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// Integer distance; weights are quantised so sums are exact.
pub type Dist = i64;

const NO_BLOCK: u32 = u32::MAX;
const NO_NODE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub to: u32,
    pub weight: Dist,
    /// Data block crossed by a spatial edge; `None` for time edges.
    block: u32,
}

impl Edge {
    pub fn block(&self) -> Option<usize> {
        (self.block != NO_BLOCK).then_some(self.block as usize)
    }
}

/// Integer weights of one decoding graph. `unlisted = None` removes edges
/// through unlisted blocks altogether.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeWeights {
    pub listed: Dist,
    pub unlisted: Option<Dist>,
    pub time: Dist,
}

/// Space-time graph of one check type: node `layer * A + ancilla` for every
/// ancilla and every round of that type, plus a single boundary sink.
#[derive(Clone, Debug)]
pub struct DecoderGraph {
    num_nodes: usize,
    boundary: Option<usize>,
    offsets: Vec<usize>,
    adj: Vec<Edge>,
    pub num_ancillas: usize,
    pub layer_rounds: Vec<usize>,
}

impl DecoderGraph {
    /// Generic graph from an undirected edge list; the optional boundary node
    /// is a sink that paths may end at but never pass through.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize, Dist, Option<usize>)], boundary: Option<usize>) -> Self {
        let mut degree = vec![0usize; num_nodes + 1];
        for &(u, v, _, _) in edges {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..num_nodes {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut adj = vec![
            Edge {
                to: 0,
                weight: 0,
                block: NO_BLOCK
            };
            2 * edges.len()
        ];
        for &(u, v, w, b) in edges {
            let block = b.map_or(NO_BLOCK, |b| b as u32);
            adj[fill[u]] = Edge {
                to: v as u32,
                weight: w,
                block,
            };
            fill[u] += 1;
            adj[fill[v]] = Edge {
                to: u as u32,
                weight: w,
                block,
            };
            fill[v] += 1;
        }
        DecoderGraph {
            num_nodes,
            boundary,
            offsets,
            adj,
            num_ancillas: num_nodes,
            layer_rounds: vec![0],
        }
    }

    /// Space-time graph for `kind` with spatial weights chosen by membership
    /// of `(block, round)` in `listed`.
    pub fn space_time(
        layout: &CodeLayout,
        kind: CheckType,
        layer_rounds: &[usize],
        weights: EdgeWeights,
        listed: &RiskList,
    ) -> Self {
        let a = layout.ancillas(kind).len();
        let layers = layer_rounds.len();
        let boundary = a * layers;
        let mut edges = Vec::with_capacity(layers * (layout.num_blocks() + a));
        for (layer, &round) in layer_rounds.iter().enumerate() {
            let base = layer * a;
            for b in 0..layout.num_blocks() {
                let w = if listed.contains(b, round) {
                    Some(weights.listed)
                } else {
                    weights.unlisted
                };
                let Some(w) = w else { continue };
                match *layout.block_checks(kind, b) {
                    [u, v] => edges.push((base + u, base + v, w, Some(b))),
                    [u] => edges.push((base + u, boundary, w, Some(b))),
                    _ => {}
                }
            }
            if layer + 1 < layers {
                for anc in 0..a {
                    edges.push((base + anc, base + a + anc, weights.time, None));
                }
            }
        }
        let mut g = DecoderGraph::from_edges(boundary + 1, &edges, Some(boundary));
        g.num_ancillas = a;
        g.layer_rounds = layer_rounds.to_vec();
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn boundary(&self) -> Option<usize> {
        self.boundary
    }

    pub fn node(&self, layer: usize, ancilla: usize) -> usize {
        layer * self.num_ancillas + ancilla
    }

    pub fn neighbours(&self, u: usize) -> &[Edge] {
        &self.adj[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Single-source shortest paths that stop expanding at distance `cutoff`.
    /// Results land in `scratch`; distances at or beyond the cutoff read as
    /// unreachable.
    pub fn approx_dijkstra_into(&self, source: usize, cutoff: Option<Dist>, scratch: &mut DijkstraScratch) {
        self.search(source, cutoff.unwrap_or(Dist::MAX), Stop::Never, scratch);
    }

    /// Dijkstra from `source` bounded by `limit`, halted early by `stop`.
    /// Returns a radius: every node closer than it is settled with its exact
    /// distance. The boundary node is a sink unless it is the source.
    pub fn search(&self, source: usize, limit: Dist, stop: Stop<'_>, scratch: &mut DijkstraScratch) -> Dist {
        scratch.reset(self.num_nodes);
        scratch.cutoff = limit;
        scratch.set(source, 0, NO_NODE, NO_BLOCK);
        scratch.heap.push(Reverse((0, source as u32)));
        let mut found = 0;
        while let Some(Reverse((d, u))) = scratch.heap.pop() {
            let u = u as usize;
            if d > scratch.dist[u] || scratch.done[u] {
                continue;
            }
            scratch.done[u] = true;
            match stop {
                Stop::Never => {}
                Stop::Target(t) if t == u => return d,
                Stop::Target(_) => {}
                Stop::Marked { marks, count } => {
                    if u != source && marks[u] {
                        found += 1;
                        if found == count {
                            return d;
                        }
                    }
                }
            }
            if Some(u) == self.boundary && u != source {
                continue;
            }
            for e in self.neighbours(u) {
                let v = e.to as usize;
                let nd = d + e.weight;
                if nd < limit && !scratch.done[v] && nd < scratch.dist[v] {
                    scratch.set(v, nd, u as u32, e.block);
                    scratch.heap.push(Reverse((nd, e.to)));
                }
            }
        }
        limit
    }

    pub fn approx_dijkstra(&self, source: usize, cutoff: Option<Dist>) -> ShortestPaths {
        let mut s = DijkstraScratch::default();
        self.approx_dijkstra_into(source, cutoff, &mut s);
        ShortestPaths {
            dist: (0..self.num_nodes).map(|v| s.distance(v)).collect(),
            prev: (0..self.num_nodes)
                .map(|v| {
                    if s.distance(v).is_some() && s.prev[v] != NO_NODE {
                        Some(s.prev[v] as usize)
                    } else {
                        None
                    }
                })
                .collect(),
        }
    }
}

/// Early-exit rule for [`DecoderGraph::search`].
#[derive(Clone, Copy, Debug)]
pub enum Stop<'a> {
    Never,
    /// Stop once this node is settled.
    Target(usize),
    /// Stop once `count` marked nodes other than the source are settled.
    Marked { marks: &'a [bool], count: usize },
}

/// Owned copy of one Dijkstra run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortestPaths {
    pub dist: Vec<Option<Dist>>,
    pub prev: Vec<Option<usize>>,
}

/// Reusable buffers for repeated Dijkstra runs on graphs of similar size.
#[derive(Debug)]
pub struct DijkstraScratch {
    dist: Vec<Dist>,
    prev: Vec<u32>,
    prev_block: Vec<u32>,
    done: Vec<bool>,
    touched: Vec<u32>,
    heap: BinaryHeap<Reverse<(Dist, u32)>>,
    cutoff: Dist,
}

impl Default for DijkstraScratch {
    fn default() -> Self {
        DijkstraScratch {
            dist: Vec::new(),
            prev: Vec::new(),
            prev_block: Vec::new(),
            done: Vec::new(),
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            cutoff: Dist::MAX,
        }
    }
}

impl DijkstraScratch {
    fn reset(&mut self, n: usize) {
        if self.dist.len() != n {
            self.dist = vec![Dist::MAX; n];
            self.prev = vec![NO_NODE; n];
            self.prev_block = vec![NO_BLOCK; n];
            self.done = vec![false; n];
        } else {
            for &v in &self.touched {
                let v = v as usize;
                self.dist[v] = Dist::MAX;
                self.prev[v] = NO_NODE;
                self.prev_block[v] = NO_BLOCK;
                self.done[v] = false;
            }
        }
        self.touched.clear();
        self.heap.clear();
    }

    #[inline]
    fn set(&mut self, v: usize, d: Dist, prev: u32, block: u32) {
        if self.dist[v] == Dist::MAX {
            self.touched.push(v as u32);
        }
        self.dist[v] = d;
        self.prev[v] = prev;
        self.prev_block[v] = block;
    }

    pub fn distance(&self, v: usize) -> Option<Dist> {
        let d = self.dist[v];
        (d < self.cutoff && d != Dist::MAX).then_some(d)
    }

    /// Exact distance of `v` if the last search settled it.
    pub fn settled(&self, v: usize) -> Option<Dist> {
        if self.done.get(v).copied().unwrap_or(false) {
            self.distance(v)
        } else {
            None
        }
    }

    /// Data blocks crossed by the witness path from the source to `v`.
    pub fn path_blocks(&self, mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while self.prev[v] != NO_NODE {
            if self.prev_block[v] != NO_BLOCK {
                out.push(self.prev_block[v] as usize);
            }
            v = self.prev[v] as usize;
        }
        out
    }

    /// Edges on the witness path to `v`, as (from, to) node pairs.
    pub fn path_nodes(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while self.prev[v] != NO_NODE {
            v = self.prev[v] as usize;
            out.push(v);
        }
        out.reverse();
        out
    }
}

/// All-pairs hop distances on the spatial graph of one check type, with the
/// boundary as node `A`. The space-time graph with unit weights is the
/// Cartesian product of this graph with a path, so its distances are the
/// spatial distance plus the layer difference.
#[derive(Clone, Debug)]
pub struct SpatialTable {
    pub num_ancillas: usize,
    dist: Vec<u32>,
    prev: Vec<u32>,
    prev_block: Vec<u32>,
}

impl SpatialTable {
    pub fn build(layout: &CodeLayout, kind: CheckType) -> Self {
        let a = layout.ancillas(kind).len();
        let n = a + 1;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for b in 0..layout.num_blocks() {
            match *layout.block_checks(kind, b) {
                [u, v] => {
                    adj[u].push((v, b));
                    adj[v].push((u, b));
                }
                [u] => {
                    adj[u].push((a, b));
                    adj[a].push((u, b));
                }
                _ => {}
            }
        }
        let mut dist = vec![u32::MAX; n * n];
        let mut prev = vec![NO_NODE; n * n];
        let mut prev_block = vec![NO_BLOCK; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = src * n;
            dist[row + src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                // the boundary ends paths
                if u == a && src != a {
                    continue;
                }
                for &(v, b) in &adj[u] {
                    if dist[row + v] == u32::MAX {
                        dist[row + v] = dist[row + u] + 1;
                        prev[row + v] = u as u32;
                        prev_block[row + v] = b as u32;
                        queue.push_back(v);
                    }
                }
            }
        }
        SpatialTable {
            num_ancillas: a,
            dist,
            prev,
            prev_block,
        }
    }

    pub fn boundary(&self) -> usize {
        self.num_ancillas
    }

    pub fn distance(&self, from: usize, to: usize) -> Option<u32> {
        let d = self.dist[from * (self.num_ancillas + 1) + to];
        (d != u32::MAX).then_some(d)
    }

    /// Blocks on the recorded shortest path between two nodes.
    pub fn path_blocks(&self, from: usize, mut to: usize) -> Vec<usize> {
        let row = from * (self.num_ancillas + 1);
        let mut out = Vec::new();
        while to != from {
            out.push(self.prev_block[row + to] as usize);
            to = self.prev[row + to] as usize;
        }
        out
    }
}
