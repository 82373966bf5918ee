use super::graph::{DecoderGraph, DijkstraScratch, Dist, Stop};
use super::matching::{PairBound, PairOracle, NEAREST};

const UNKNOWN: Dist = -1;
const UNREACHABLE: Dist = Dist::MAX;

/// Event distances on a space-time graph, computed on demand. Each event
/// starts with a search that settles its nearest few events; the radius of
/// that search bounds every distance it did not reach.
pub struct LazyDistances<'a> {
    graph: &'a DecoderGraph,
    scratch: &'a mut DijkstraScratch,
    nodes: Vec<usize>,
    marks: Vec<bool>,
    limit: Dist,
    radius: Vec<Dist>,
    pair: Vec<Dist>,
    boundary: Vec<Option<Dist>>,
}

impl<'a> LazyDistances<'a> {
    pub fn new(graph: &'a DecoderGraph, nodes: Vec<usize>, cutoff: Option<Dist>, scratch: &'a mut DijkstraScratch) -> Self {
        let m = nodes.len();
        let limit = cutoff.unwrap_or(Dist::MAX);
        let mut marks = vec![false; graph.num_nodes()];
        for &v in &nodes {
            marks[v] = true;
        }
        let boundary = match graph.boundary() {
            Some(sink) => {
                graph.search(sink, limit, Stop::Never, scratch);
                nodes.iter().map(|&v| scratch.settled(v)).collect()
            }
            None => vec![None; m],
        };
        let mut lazy = LazyDistances {
            graph,
            scratch,
            nodes,
            marks,
            limit,
            radius: vec![0; m],
            pair: vec![UNKNOWN; m * m],
            boundary,
        };
        for i in 0..m {
            lazy.explore(i, limit, NEAREST);
        }
        lazy
    }

    fn explore(&mut self, i: usize, limit: Dist, count: usize) {
        let stop = Stop::Marked {
            marks: &self.marks,
            count,
        };
        let r = self.graph.search(self.nodes[i], limit, stop, self.scratch);
        self.radius[i] = r;
        let m = self.nodes.len();
        for j in 0..m {
            if self.pair[i * m + j] != UNKNOWN {
                continue;
            }
            let d = match self.scratch.settled(self.nodes[j]) {
                Some(d) => d,
                None if r >= self.limit => UNREACHABLE,
                None => continue,
            };
            self.pair[i * m + j] = d;
            self.pair[j * m + i] = d;
        }
    }
}

impl PairOracle for LazyDistances<'_> {
    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn boundary(&self, i: usize) -> Option<Dist> {
        self.boundary[i]
    }

    fn pair(&self, i: usize, j: usize) -> PairBound {
        match self.pair[i * self.nodes.len() + j] {
            UNKNOWN => {
                let lb = self.radius[i].max(self.radius[j]);
                if lb >= self.limit {
                    PairBound::Exact(None)
                } else {
                    PairBound::AtLeast(lb)
                }
            }
            UNREACHABLE => PairBound::Exact(None),
            d => PairBound::Exact(Some(d)),
        }
    }

    fn refine(&mut self, i: usize, j: usize) {
        let e = if self.radius[i] <= self.radius[j] { i } else { j };
        let far = |b: Option<Dist>| b.unwrap_or(self.limit);
        let need = far(self.boundary[i]).saturating_add(far(self.boundary[j])).saturating_add(1);
        let limit = need.max(self.radius[e].saturating_mul(2)).min(self.limit);
        self.explore(e, limit, usize::MAX);
    }
}
