use super::blossom::{solve, Solution};
use super::graph::Dist;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("no finite perfect matching: event {0} can reach neither a partner nor the boundary")]
    Infeasible(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partner {
    Event(usize),
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMatching {
    pub partner: Vec<Partner>,
    pub total: Dist,
}

/// Stand-in for an unreachable boundary; larger than any sum of real distances.
const FAR: Dist = 1 << 40;

/// Candidate partners kept per event before pricing.
pub const NEAREST: usize = 8;

/// What is known about the distance between two events.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairBound {
    /// The distance, or `None` when the pair cannot be joined.
    Exact(Option<Dist>),
    /// Not computed yet, but no smaller than this.
    AtLeast(Dist),
}

/// Source of event distances for [`match_events_with`]. Distances may start
/// out as lower bounds and be sharpened on demand.
pub trait PairOracle {
    fn len(&self) -> usize;
    fn boundary(&self, i: usize) -> Option<Dist>;
    fn pair(&self, i: usize, j: usize) -> PairBound;
    /// Learns enough about `(i, j)` that it becomes exact, or that its lower
    /// bound exceeds `boundary(i) + boundary(j)`.
    fn refine(&mut self, i: usize, j: usize);
}

struct Dense<'a> {
    pair: &'a [Option<Dist>],
    boundary: &'a [Option<Dist>],
}

impl PairOracle for Dense<'_> {
    fn len(&self) -> usize {
        self.boundary.len()
    }
    fn boundary(&self, i: usize) -> Option<Dist> {
        self.boundary[i]
    }
    fn pair(&self, i: usize, j: usize) -> PairBound {
        PairBound::Exact(self.pair[i * self.boundary.len() + j])
    }
    fn refine(&mut self, _: usize, _: usize) {}
}

/// Minimum-weight perfect matching of events where each event may instead
/// pair with its own boundary copy (copies pair among themselves for free).
///
/// Solved as a maximum-weight matching with edge weight
/// `b(i) + b(j) - d(i, j)`: every matched pair saves that much over sending
/// both events to the boundary. Only non-negative edges matter, and the
/// problem splits into independent connected components.
///
/// Among matchings of equal total weight the one with more event pairs wins:
/// gains are scaled by `m + 1` and every pair earns one extra unit, which can
/// never outweigh a real difference in gain.
pub fn min_weight_boundary_matching(
    pair: &[Option<Dist>],
    boundary: &[Option<Dist>],
) -> Result<BoundaryMatching, MatchingError> {
    debug_assert_eq!(pair.len(), boundary.len() * boundary.len());
    match_events_with(&mut Dense { pair, boundary })
}

/// [`min_weight_boundary_matching`] over an oracle.
///
/// The solver first sees only each event's nearest candidates. Every omitted
/// edge is then priced against the dual solution; violators are added and the
/// problem re-solved until the duals certify the full edge set. A pair known
/// only by a lower bound is priced at its best possible gain and refined when
/// even that could violate the duals.
pub fn match_events_with<O: PairOracle>(oracle: &mut O) -> Result<BoundaryMatching, MatchingError> {
    let m = oracle.len();
    let scale = m as Dist + 1;
    let b: Vec<Dist> = (0..m).map(|i| oracle.boundary(i).unwrap_or(FAR)).collect();
    let mut edges: Vec<(usize, usize, Dist)> = Vec::new();
    let mut unknown: Vec<(usize, usize)> = Vec::new();

    // Sorts pairs into candidate edges and pairs still worth refining.
    let classify = |oracle: &O,
                    pairs: &mut dyn Iterator<Item = (usize, usize)>,
                    edges: &mut Vec<(usize, usize, Dist)>,
                    unknown: &mut Vec<(usize, usize)>| {
        for (i, j) in pairs {
            match oracle.pair(i, j) {
                PairBound::Exact(Some(d)) if b[i] + b[j] - d >= 0 => {
                    edges.push((i, j, (b[i] + b[j] - d) * scale + 1));
                }
                PairBound::AtLeast(lb) if b[i] + b[j] - lb >= 0 => unknown.push((i, j)),
                _ => {}
            }
        }
    };
    let mut all = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j)));
    classify(oracle, &mut all, &mut edges, &mut unknown);

    let mut active = vec![false; edges.len()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (k, &(i, j, _)) in edges.iter().enumerate() {
        incident[i].push(k);
        incident[j].push(k);
    }
    for list in &mut incident {
        list.sort_by_key(|&k| (std::cmp::Reverse(edges[k].2), k));
        for &k in list.iter().take(NEAREST) {
            active[k] = true;
        }
    }

    let partner = loop {
        let (partner, solutions) = solve_components(m, &edges, &active);
        let duals: Vec<Dist> = (0..m)
            .map(|i| {
                let (c, l) = solutions.place[i];
                solutions.parts[c].vertex_dual(l)
            })
            .collect();
        let violated = |i: usize, j: usize, w: Dist| {
            if duals[i] + duals[j] >= 2 * w {
                return false;
            }
            let (ci, li) = solutions.place[i];
            let (cj, lj) = solutions.place[j];
            ci != cj || solutions.parts[ci].violated(li, lj, w)
        };
        loop {
            let mut refined = false;
            for &(i, j) in &unknown {
                let PairBound::AtLeast(lb) = oracle.pair(i, j) else {
                    continue;
                };
                if violated(i, j, (b[i] + b[j] - lb) * scale + 1) {
                    oracle.refine(i, j);
                    refined = true;
                }
            }
            if !refined {
                break;
            }
            let pending = std::mem::take(&mut unknown);
            classify(oracle, &mut pending.into_iter(), &mut edges, &mut unknown);
            active.resize(edges.len(), false);
        }
        let mut changed = false;
        for (k, &(i, j, w)) in edges.iter().enumerate() {
            if !active[k] && violated(i, j, w) {
                active[k] = true;
                changed = true;
            }
        }
        if !changed {
            break partner;
        }
    };

    let mut total = 0;
    for i in 0..m {
        match partner[i] {
            Partner::Boundary => total += oracle.boundary(i).ok_or(MatchingError::Infeasible(i))?,
            Partner::Event(j) if i < j => match oracle.pair(i, j) {
                PairBound::Exact(Some(d)) => total += d,
                _ => unreachable!("matched pairs are exact and finite"),
            },
            Partner::Event(_) => {}
        }
    }
    Ok(BoundaryMatching { partner, total })
}

struct ComponentSolutions {
    /// Component and local index of every event.
    place: Vec<(usize, usize)>,
    parts: Vec<Solution>,
}

fn solve_components(m: usize, edges: &[(usize, usize, Dist)], active: &[bool]) -> (Vec<Partner>, ComponentSolutions) {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let live = || edges.iter().zip(active).filter(|e| *e.1).map(|e| *e.0);
    for (i, j, _) in live() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut component = vec![usize::MAX; m];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut place = vec![(0, 0); m];
    for i in 0..m {
        let r = find(&mut parent, i);
        if component[r] == usize::MAX {
            component[r] = members.len();
            members.push(Vec::new());
        }
        let c = component[r];
        place[i] = (c, members[c].len());
        members[c].push(i);
    }
    let mut local_edges: Vec<Vec<(usize, usize, Dist)>> = vec![Vec::new(); members.len()];
    for (i, j, w) in live() {
        let (c, li) = place[i];
        local_edges[c].push((li, place[j].1, w));
    }
    let mut partner = vec![Partner::Boundary; m];
    let parts: Vec<Solution> = members
        .iter()
        .zip(&local_edges)
        .map(|(group, es)| {
            let sol = solve(group.len(), es);
            for (li, mj) in sol.mate.iter().enumerate() {
                if let Some(lj) = *mj {
                    partner[group[li]] = Partner::Event(group[lj]);
                }
            }
            sol
        })
        .collect();
    (partner, ComponentSolutions { place, parts })
}

/// Exhaustive search over all matchings with boundary copies. Exponential;
/// meant as a reference for small instances.
pub fn brute_force_boundary_matching(pair: &[Option<Dist>], boundary: &[Option<Dist>]) -> Option<BoundaryMatching> {
    let m = boundary.len();
    fn go(
        i: usize,
        m: usize,
        pair: &[Option<Dist>],
        boundary: &[Option<Dist>],
        cur: &mut Vec<Partner>,
        used: &mut Vec<bool>,
        acc: Dist,
        best: &mut Option<BoundaryMatching>,
    ) {
        if i == m {
            if best.as_ref().is_none_or(|b| acc < b.total) {
                *best = Some(BoundaryMatching {
                    partner: cur.clone(),
                    total: acc,
                });
            }
            return;
        }
        if used[i] {
            return go(i + 1, m, pair, boundary, cur, used, acc, best);
        }
        used[i] = true;
        if let Some(d) = boundary[i] {
            cur[i] = Partner::Boundary;
            go(i + 1, m, pair, boundary, cur, used, acc + d, best);
        }
        for j in i + 1..m {
            if used[j] {
                continue;
            }
            if let Some(d) = pair[i * m + j] {
                used[j] = true;
                cur[i] = Partner::Event(j);
                cur[j] = Partner::Event(i);
                go(i + 1, m, pair, boundary, cur, used, acc + d, best);
                used[j] = false;
            }
        }
        used[i] = false;
    }
    let mut best = None;
    go(0, m, pair, boundary, &mut vec![Partner::Boundary; m], &mut vec![false; m], 0, &mut best);
    best
}

/// Pairs events greedily by increasing cost; a baseline for comparisons.
pub fn greedy_boundary_matching(pair: &[Option<Dist>], boundary: &[Option<Dist>]) -> Option<BoundaryMatching> {
    let m = boundary.len();
    let mut options: Vec<(Dist, usize, Option<usize>)> = Vec::new();
    for i in 0..m {
        if let Some(d) = boundary[i] {
            options.push((d, i, None));
        }
        for j in i + 1..m {
            if let Some(d) = pair[i * m + j] {
                options.push((d, i, Some(j)));
            }
        }
    }
    options.sort();
    let mut partner = vec![None; m];
    let mut total = 0;
    for (d, i, j) in options {
        match j {
            None if partner[i].is_none() => {
                partner[i] = Some(Partner::Boundary);
                total += d;
            }
            Some(j) if partner[i].is_none() && partner[j].is_none() => {
                partner[i] = Some(Partner::Event(j));
                partner[j] = Some(Partner::Event(i));
                total += d;
            }
            _ => {}
        }
    }
    let partner: Option<Vec<Partner>> = partner.into_iter().collect();
    partner.map(|partner| BoundaryMatching { partner, total })
}
