//! Exhaustive enumeration of perfect matchings and the loop structure of
//! `M ⊖ M0`. This is the ground truth the analytic modules are checked
//! against, so everything here is deliberately naive.

use crate::error::{Error, Result};
use crate::honeycomb::{EdgeId, EdgeType, HomologyClass, TorusGraph, VertexId};
use crate::table::WindingTable;

/// Default refusal threshold on the vertex count for exhaustive search.
pub const DEFAULT_VERTEX_CAP: usize = 96;

/// A perfect matching, stored as the sorted list of its edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    dims: (usize, usize),
    edges: Vec<EdgeId>,
}

impl Matching {
    /// Validates that `edges` covers every vertex of `g` exactly once.
    pub fn from_edges(g: &TorusGraph, mut edges: Vec<EdgeId>) -> Result<Self> {
        let mut covered = vec![false; g.vertex_count()];
        for &e in &edges {
            if e.0 >= g.edge_count() {
                return Err(Error::InvalidArgument(format!("edge {} out of range", e.0)));
            }
            let edge = g.edge(e);
            for v in [edge.white, edge.black] {
                if std::mem::replace(&mut covered[v.0], true) {
                    return Err(Error::InvalidArgument(format!("vertex {} covered twice", v.0)));
                }
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidArgument(format!("vertex {v} is not covered")));
        }
        edges.sort_unstable();
        Ok(Matching { dims: (g.m(), g.n()), edges })
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn belongs_to(&self, g: &TorusGraph) -> bool {
        self.dims == (g.m(), g.n())
    }

    pub fn is_perfect(&self, g: &TorusGraph) -> bool {
        self.belongs_to(g) && Matching::from_edges(g, self.edges.clone()).is_ok()
    }

    pub fn type_counts(&self, g: &TorusGraph) -> EdgeTypeCounts {
        let mut c = [0usize; 3];
        for &e in &self.edges {
            c[g.edge(e).kind as usize] += 1;
        }
        EdgeTypeCounts { n_i: c[0], n_ii: c[1], n_iii: c[2] }
    }

    /// Matched edge at each white vertex (indexed by vertex id).
    fn mates(&self, g: &TorusGraph, white_side: bool) -> Vec<EdgeId> {
        let mut mate = vec![EdgeId(usize::MAX); g.vertex_count()];
        for &e in &self.edges {
            let edge = g.edge(e);
            let v = if white_side { edge.white } else { edge.black };
            mate[v.0] = e;
        }
        mate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeTypeCounts {
    pub n_i: usize,
    pub n_ii: usize,
    pub n_iii: usize,
}

impl EdgeTypeCounts {
    pub fn as_array(&self) -> [usize; 3] {
        [self.n_i, self.n_ii, self.n_iii]
    }

    pub fn total(&self) -> usize {
        self.n_i + self.n_ii + self.n_iii
    }

    pub fn get(&self, t: EdgeType) -> usize {
        self.as_array()[t as usize]
    }
}

#[derive(Clone, Copy)]
struct Frame {
    vertex: usize,
    next: u8,
    active: bool,
}

/// Depth-first stream of all perfect matchings. At each step the lowest
/// uncovered vertex is matched along its type I, II, III edge in turn, so
/// the output order is deterministic.
pub struct MatchingIter<'g> {
    g: &'g TorusGraph,
    covered: Vec<bool>,
    chosen: Vec<EdgeId>,
    stack: Vec<Frame>,
    finished: bool,
}

impl<'g> MatchingIter<'g> {
    fn new(g: &'g TorusGraph) -> Self {
        MatchingIter {
            g,
            covered: vec![false; g.vertex_count()],
            chosen: Vec::with_capacity(g.vertex_count() / 2),
            stack: vec![Frame { vertex: 0, next: 0, active: false }],
            finished: false,
        }
    }
}

impl Iterator for MatchingIter<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.finished {
            return None;
        }
        while let Some(top) = self.stack.last_mut() {
            if top.active {
                let e = self.chosen.pop().expect("active frame without an edge");
                let edge = self.g.edge(e);
                self.covered[edge.white.0] = false;
                self.covered[edge.black.0] = false;
                top.active = false;
            }
            let v = VertexId(top.vertex);
            let incident = self.g.incident(v);
            let mut picked = None;
            while (top.next as usize) < 3 {
                let e = incident[top.next as usize];
                top.next += 1;
                if !self.covered[self.g.opposite(e, v).0] {
                    picked = Some(e);
                    break;
                }
            }
            let Some(e) = picked else {
                self.stack.pop();
                continue;
            };
            top.active = true;
            let start = top.vertex;
            let edge = self.g.edge(e);
            self.covered[edge.white.0] = true;
            self.covered[edge.black.0] = true;
            self.chosen.push(e);

            match (start + 1..self.covered.len()).find(|&u| !self.covered[u]) {
                Some(u) => self.stack.push(Frame { vertex: u, next: 0, active: false }),
                None => {
                    let mut edges = self.chosen.clone();
                    edges.sort_unstable();
                    return Some(Matching { dims: (self.g.m(), self.g.n()), edges });
                }
            }
        }
        self.finished = true;
        None
    }
}

/// All perfect matchings of `g`, refusing graphs above the default cap.
pub fn enumerate_matchings(g: &TorusGraph) -> Result<MatchingIter<'_>> {
    enumerate_matchings_with_cap(g, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_matchings_with_cap(g: &TorusGraph, cap: usize) -> Result<MatchingIter<'_>> {
    if g.vertex_count() > cap {
        return Err(Error::EnumerationCap { vertices: g.vertex_count(), cap });
    }
    Ok(MatchingIter::new(g))
}

/// An alternating cycle of `M ⊖ M0`. Steps are `(edge, +1)` for an `M` edge
/// walked white to black and `(edge, -1)` for an `M0` edge walked back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    pub steps: Vec<(EdgeId, i64)>,
    pub homology: HomologyClass,
}

impl Loop {
    fn class_of(g: &TorusGraph, steps: &[(EdgeId, i64)]) -> HomologyClass {
        steps.iter().fold(HomologyClass::ZERO, |acc, &(e, d)| acc + g.edge(e).offset.scale(d))
    }

    /// Same loop started `k` steps later.
    pub fn rotated(&self, g: &TorusGraph, k: usize) -> Loop {
        let mut steps = self.steps.clone();
        let len = steps.len().max(1);
        steps.rotate_left(k % len);
        let homology = Loop::class_of(g, &steps);
        Loop { steps, homology }
    }

    pub fn vertex_count(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopDecomposition {
    pub doubled_edges: Vec<EdgeId>,
    pub loops: Vec<Loop>,
}

/// Superimposes `m` on the reference `m0`.
pub fn superimpose(g: &TorusGraph, m: &Matching, m0: &Matching) -> Result<LoopDecomposition> {
    if !m.belongs_to(g) || !m0.belongs_to(g) {
        return Err(Error::MismatchedGraphs);
    }
    let white_mate = m.mates(g, true);
    let black_mate0 = m0.mates(g, false);
    let mut seen = vec![false; g.vertex_count()];
    let mut doubled_edges = Vec::new();
    let mut loops = Vec::new();

    for &e in m.edges() {
        let start = g.edge(e).white;
        if seen[start.0] {
            continue;
        }
        if m0.contains(e) {
            seen[start.0] = true;
            seen[g.edge(e).black.0] = true;
            doubled_edges.push(e);
            continue;
        }
        let mut steps = Vec::new();
        let mut w = start;
        loop {
            seen[w.0] = true;
            let e = white_mate[w.0];
            let b = g.edge(e).black;
            seen[b.0] = true;
            let back = black_mate0[b.0];
            steps.push((e, 1));
            steps.push((back, -1));
            w = g.edge(back).white;
            if w == start {
                break;
            }
        }
        let homology = Loop::class_of(g, &steps);
        loops.push(Loop { steps, homology });
    }
    Ok(LoopDecomposition { doubled_edges, loops })
}

/// Winding number `(k, l)` as the total homology class of the loops.
pub fn winding_by_loops(dec: &LoopDecomposition) -> HomologyClass {
    dec.loops.iter().fold(HomologyClass::ZERO, |acc, l| acc + l.homology)
}

/// Winding number from edge-type counts:
/// `k = (N_I - 2mn/3) / 2m`, `l = (N_II - N_III) / 2n`.
///
/// Panics if either division is inexact, which can only happen if the graph
/// conventions are inconsistent.
pub fn winding_by_counts(m: &Matching, g: &TorusGraph) -> Result<HomologyClass> {
    if !m.belongs_to(g) {
        return Err(Error::MismatchedGraphs);
    }
    if g.n() % 3 != 0 {
        return Err(Error::NotMultipleOfThree { n: g.n() });
    }
    let c = m.type_counts(g);
    let (mm, nn) = (g.m() as i64, g.n() as i64);
    let dk = c.n_i as i64 - 2 * mm * nn / 3;
    let dl = c.n_ii as i64 - c.n_iii as i64;
    assert!(dk % (2 * mm) == 0, "N_I - 2mn/3 = {dk} is not divisible by 2m = {}", 2 * mm);
    assert!(dl % (2 * nn) == 0, "N_II - N_III = {dl} is not divisible by 2n = {}", 2 * nn);
    Ok(HomologyClass::new(dk / (2 * mm), dl / (2 * nn)))
}

/// Histogram of winding numbers over all perfect matchings.
pub fn brute_winding_table(g: &TorusGraph) -> Result<WindingTable> {
    brute_winding_table_with_cap(g, DEFAULT_VERTEX_CAP)
}

pub fn brute_winding_table_with_cap(g: &TorusGraph, cap: usize) -> Result<WindingTable> {
    if g.n() % 3 != 0 {
        return Err(Error::NotMultipleOfThree { n: g.n() });
    }
    let mut table = WindingTable::new(g.m(), g.n());
    for m in enumerate_matchings_with_cap(g, cap)? {
        let w = winding_by_counts(&m, g)?;
        table.add(w.h, w.v, 1u32);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn count(m: usize, n: usize) -> usize {
        let g = TorusGraph::build(m, n).unwrap();
        enumerate_matchings(&g).unwrap().count()
    }

    #[test]
    fn matching_counts_small_tori() {
        assert_eq!(count(1, 1), 5);
        assert_eq!(count(1, 2), 9);
        assert_eq!(count(2, 1), 17);
        assert_eq!(count(1, 3), 20);
        assert_eq!(count(2, 2), 33);
        assert_eq!(count(2, 3), 116);
        assert_eq!(count(3, 3), 860);
        assert_eq!(count(1, 6), 324);
    }

    #[test]
    fn matchings_are_perfect_distinct_and_ordered() {
        let g = TorusGraph::build(2, 3).unwrap();
        let all: Vec<Matching> = enumerate_matchings(&g).unwrap().collect();
        let again: Vec<Matching> = enumerate_matchings(&g).unwrap().collect();
        assert_eq!(all, again);
        assert!(all.iter().all(|m| m.is_perfect(&g) && m.len() == 12));
        let unique: HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
    }

    #[test]
    fn cap_is_enforced() {
        let g = TorusGraph::build(5, 6).unwrap();
        assert_eq!(
            enumerate_matchings(&g).err(),
            Some(Error::EnumerationCap { vertices: 120, cap: 96 })
        );
        let g = TorusGraph::build(1, 3).unwrap();
        assert!(enumerate_matchings_with_cap(&g, 8).is_err());
        assert!(enumerate_matchings_with_cap(&g, 12).is_ok());
    }

    #[test]
    fn self_superposition_is_all_doubled() {
        let g = TorusGraph::build(2, 6).unwrap();
        let m0 = g.reference_matching().unwrap();
        let dec = superimpose(&g, &m0, &m0).unwrap();
        assert!(dec.loops.is_empty());
        assert_eq!(dec.doubled_edges.len(), 24);
        assert_eq!(winding_by_loops(&dec), HomologyClass::ZERO);
        assert_eq!(winding_by_counts(&m0, &g).unwrap(), HomologyClass::ZERO);
    }

    #[test]
    fn mismatched_graphs_rejected() {
        let g1 = TorusGraph::build(1, 3).unwrap();
        let g2 = TorusGraph::build(2, 3).unwrap();
        let a = g1.reference_matching().unwrap();
        let b = g2.reference_matching().unwrap();
        assert_eq!(superimpose(&g2, &a, &b), Err(Error::MismatchedGraphs));
    }

    #[test]
    fn decomposition_partitions_vertices() {
        let g = TorusGraph::build(1, 3).unwrap();
        let m0 = g.reference_matching().unwrap();
        for m in enumerate_matchings(&g).unwrap() {
            let dec = superimpose(&g, &m, &m0).unwrap();
            let on_loops: usize = dec.loops.iter().map(Loop::vertex_count).sum();
            assert_eq!(on_loops + 2 * dec.doubled_edges.len(), 12);
            for l in &dec.loops {
                for k in 0..l.steps.len() {
                    assert_eq!(l.rotated(&g, k).homology, l.homology);
                }
            }
        }
    }

    #[test]
    fn both_winding_routes_agree() {
        for (m, n) in [(1, 3), (2, 3), (1, 6), (3, 3)] {
            let g = TorusGraph::build(m, n).unwrap();
            let m0 = g.reference_matching().unwrap();
            for mm in enumerate_matchings(&g).unwrap() {
                let dec = superimpose(&g, &mm, &m0).unwrap();
                assert_eq!(winding_by_loops(&dec), winding_by_counts(&mm, &g).unwrap());
            }
        }
    }

    #[test]
    fn single_wrapping_loop_has_class_one_zero() {
        let g = TorusGraph::build(2, 3).unwrap();
        let m0 = g.reference_matching().unwrap();
        let found = enumerate_matchings(&g).unwrap().any(|mm| {
            let dec = superimpose(&g, &mm, &m0).unwrap();
            dec.loops.len() == 1 && winding_by_loops(&dec) == HomologyClass::new(1, 0)
        });
        assert!(found);
    }

    #[test]
    fn all_type_one_matching_has_maximal_k() {
        let g = TorusGraph::build(2, 3).unwrap();
        let rungs: Vec<EdgeId> = (0..g.edge_count())
            .map(EdgeId)
            .filter(|&e| g.edge(e).kind == EdgeType::I)
            .collect();
        let mm = Matching::from_edges(&g, rungs).unwrap();
        assert_eq!(winding_by_counts(&mm, &g).unwrap(), HomologyClass::new(2, 0));
    }

    #[test]
    fn brute_table_small() {
        let g = TorusGraph::build(1, 3).unwrap();
        let t = brute_winding_table(&g).unwrap();
        let expect = [((-1, -1), 1u32), ((-1, 0), 2), ((-1, 1), 1), ((0, 0), 9), ((1, 0), 6), ((2, 0), 1)];
        assert_eq!(t.len(), expect.len());
        for ((k, l), c) in expect {
            assert_eq!(t.get(k, l), c, "C({k},{l})");
        }
        assert_eq!(t.total(), 20);
        assert!(t.is_reflection_symmetric());

        let t = brute_winding_table(&TorusGraph::build(2, 6).unwrap()).unwrap();
        assert_eq!(t.total(), 7248);
        assert_eq!(t.get(0, 0), 3177);
        assert!(t.is_reflection_symmetric());
        assert!(t.within_support_bounds());
    }
}
