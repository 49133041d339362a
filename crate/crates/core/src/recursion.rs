//! Decompositions of graphs whose complement splits into a few matchings.
//!
//! With `E(ḡ) = E_1 ∪ ... ∪ E_ℓ`, the graph `g + E_1` is first decomposed into
//! `K_{2r+2}` copies (its complement has `ℓ-1` matchings). Each copy induces a
//! `(2r+2)`-clique minus part of `E_1` in `g`, which the base construction
//! handles; weights multiply along the way.

use std::collections::{BTreeSet, HashMap};

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Matching, Vertex};
use crate::kminusm::{base_pattern, decompose_clique_minus_matching, pattern_order};
use crate::rational::Rational;
use crate::weighting::CliqueWeighting;

/// Ordered, pairwise edge-disjoint matchings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingPartition {
    parts: Vec<Matching>,
}

impl MatchingPartition {
    pub fn new(parts: Vec<Matching>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, p) in parts.iter().enumerate() {
            for &e in p.edges() {
                if !seen.insert(e) {
                    return Err(Error::InvalidPartition(format!("edge {e} appears twice (again in part {i})")));
                }
            }
        }
        Ok(MatchingPartition { parts })
    }

    pub fn parts(&self) -> &[Matching] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn edges(&self) -> BTreeSet<Edge> {
        self.parts.iter().flat_map(|p| p.edges().iter().copied()).collect()
    }

    /// Errors unless the union of the parts is exactly `target`.
    pub fn check_covers(&self, target: &[Edge]) -> Result<()> {
        let have = self.edges();
        let want: BTreeSet<Edge> = target.iter().copied().collect();
        if let Some(e) = want.difference(&have).next() {
            return Err(Error::InvalidPartition(format!("edge {e} is not covered")));
        }
        if let Some(e) = have.difference(&want).next() {
            return Err(Error::InvalidPartition(format!("edge {e} is not in the target set")));
        }
        Ok(())
    }
}

/// Smallest host on which the recursion runs with `parts` matchings.
pub fn required_order(r: usize, parts: usize) -> usize {
    let l = parts.max(1) as u32;
    (1usize << l) * r + (1usize << (l + 1)) - 2
}

/// Exact fractional `K_r`-decomposition of `g`, given a partition of its
/// complement into matchings.
pub fn decompose_sparse_complement(g: &Graph, r: usize, partition: &MatchingPartition) -> Result<CliqueWeighting> {
    if r < 3 {
        return Err(Error::precondition(format!("clique order {r} < 3")));
    }
    let required = required_order(r, partition.len());
    if g.n() < required {
        return Err(Error::HostTooSmall {
            required,
            actual: g.n(),
        });
    }
    for p in partition.parts() {
        p.check_within(g.n())?;
    }
    partition.check_covers(&g.non_edges())?;
    recurse(g, r, partition.parts())
}

fn recurse(g: &Graph, r: usize, parts: &[Matching]) -> Result<CliqueWeighting> {
    match parts {
        [] => decompose_clique_minus_matching(r, g.n(), &Matching::empty()),
        [only] => decompose_clique_minus_matching(r, g.n(), only),
        [first, rest @ ..] => {
            let outer_r = 2 * r + 2;
            let lifted = g.with_edges_added(first.edges().iter().copied())?;
            let outer = recurse(&lifted, outer_r, rest)?;
            assert_eq!(outer.r(), outer_r, "outer level must use (2r+2)-cliques");

            // Local pattern per copy: the covered pairs first, then the rest.
            let locals: Vec<(Vec<Vertex>, usize, &Rational)> = outer
                .iter()
                .map(|(s, w)| {
                    let inside = first.restrict(|v| s.contains(v));
                    (pattern_order(s.vertices(), &inside), inside.len(), w)
                })
                .collect();
            let sizes: BTreeSet<usize> = locals.iter().map(|l| l.1).collect();
            let mut base: HashMap<usize, CliqueWeighting> = HashMap::new();
            for m in sizes {
                base.insert(m, base_pattern(r, m)?);
            }
            let combined = locals
                .par_iter()
                .fold(
                    || CliqueWeighting::new(r),
                    |mut acc, (order, m, w)| {
                        acc.add_scaled(&base[m], w, |x| order[x]);
                        acc
                    },
                )
                .reduce(
                    || CliqueWeighting::new(r),
                    |mut a, b| {
                        a.add_scaled(&b, &Rational::one(), |x| x);
                        a
                    },
                );
            Ok(combined)
        }
    }
}

/// Five matchings covering the complement of `M_r` (pair `i` is `{2i, 2i+1}`,
/// 0-based): part 4 takes the intra-pair edges; the link between pairs `i`
/// and `i+1` goes to parts 0/1 or 2/3 alternately, straight edges
/// (`a-a`, `b-b`) in the first and crossed edges in the second.
pub fn partition_m_complement(r: usize) -> MatchingPartition {
    let mut parts: Vec<Vec<Edge>> = vec![Vec::new(); 5];
    for i in 0..r {
        parts[4].push(Edge::new(2 * i, 2 * i + 1));
    }
    for i in 0..r.saturating_sub(1) {
        let (a, b, c, d) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
        let base = if i % 2 == 0 { 0 } else { 2 };
        parts[base].extend([Edge::new(a, c), Edge::new(b, d)]);
        parts[base + 1].extend([Edge::new(a, d), Edge::new(b, c)]);
    }
    let parts = parts
        .into_iter()
        .map(|p| Matching::new(p).expect("link edges of alternate pairs are disjoint"))
        .collect();
    MatchingPartition::new(parts).expect("parts are disjoint")
}

/// The edges of the cycle `0-1-...-(n-1)-0`, coloured alternately.
pub fn partition_cycle_complement(n: usize) -> Result<MatchingPartition> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::precondition(format!("cycle length {n} must be even and at least 4")));
    }
    let mut parts = vec![Vec::new(), Vec::new()];
    for i in 0..n {
        parts[i % 2].push(Edge::new(i, (i + 1) % n));
    }
    MatchingPartition::new(parts.into_iter().map(Matching::new).collect::<Result<_>>()?)
}

/// Splits the edges of `h` into two matchings when `h` is a disjoint union
/// of paths and even cycles; `None` otherwise.
pub fn partition_two_matchings(h: &Graph) -> Option<MatchingPartition> {
    let n = h.n();
    if (0..n).any(|v| h.degree(v) > 2) {
        return None;
    }
    let mut used = BTreeSet::new();
    let mut parts = [Vec::new(), Vec::new()];
    let mut visited = vec![false; n];
    // paths first, from an endpoint, then whatever is left is a cycle
    let starts: Vec<Vertex> = (0..n)
        .filter(|&v| h.degree(v) == 1)
        .chain((0..n).filter(|&v| h.degree(v) == 2))
        .collect();
    for s in starts {
        if visited[s] {
            continue;
        }
        let mut prev = None;
        let mut cur = s;
        let mut color = 0;
        loop {
            visited[cur] = true;
            let next = h.neighbors(cur).find(|&x| Some(x) != prev && !used.contains(&Edge::new(cur, x)));
            let Some(next) = next else { break };
            let e = Edge::new(cur, next);
            used.insert(e);
            parts[color].push(e);
            color ^= 1;
            prev = Some(cur);
            cur = next;
            if cur == s {
                if color == 1 {
                    return None;
                }
                break;
            }
        }
    }
    let [a, b] = parts;
    MatchingPartition::new(vec![Matching::new(a).ok()?, Matching::new(b).ok()?]).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighting::{unit_target, verify_weighting};
    use proptest::prelude::*;

    fn assert_partition_of(p: &MatchingPartition, target: &[Edge]) {
        p.check_covers(target).unwrap();
        let total: usize = p.parts().iter().map(Matching::len).sum();
        assert_eq!(total, target.len());
        for part in p.parts() {
            let mut seen = BTreeSet::new();
            for e in part.edges() {
                assert!(seen.insert(e.u()) && seen.insert(e.v()), "not a matching");
            }
        }
    }

    #[test]
    fn single_part_matches_base_construction() {
        let mm = Matching::new(vec![Edge::new(0, 5), Edge::new(2, 7)]).unwrap();
        let g = Graph::complete(8).with_edges_removed(mm.edges().iter().copied());
        let p = MatchingPartition::new(vec![mm.clone()]).unwrap();
        let a = decompose_sparse_complement(&g, 3, &p).unwrap();
        let b = decompose_clique_minus_matching(3, 8, &mm).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_matchings_on_eighteen_vertices() {
        assert_eq!(required_order(3, 2), 18);
        let e1 = Matching::new((0..9).map(|i| Edge::new(2 * i, 2 * i + 1)).collect()).unwrap();
        let e2 = Matching::new((0..8).map(|i| Edge::new(2 * i + 1, 2 * i + 2)).collect()).unwrap();
        let g = Graph::complete(18).with_edges_removed(e1.edges().iter().chain(e2.edges()).copied());
        let p = MatchingPartition::new(vec![e1, e2]).unwrap();
        let w = decompose_sparse_complement(&g, 3, &p).unwrap();
        let rep = verify_weighting(&g, &w, unit_target);
        assert!(rep.pass, "{:?}", rep.violations.first());
        assert!(w.min_weight().unwrap() > &Rational::from_integer(0.into()));
    }

    #[test]
    fn host_below_bound_rejected() {
        let e1 = Matching::new(vec![Edge::new(0, 1)]).unwrap();
        let e2 = Matching::new(vec![Edge::new(1, 2)]).unwrap();
        let g = Graph::complete(17).with_edges_removed([Edge::new(0, 1), Edge::new(1, 2)]);
        let p = MatchingPartition::new(vec![e1, e2]).unwrap();
        assert!(matches!(
            decompose_sparse_complement(&g, 3, &p),
            Err(Error::HostTooSmall { required: 18, actual: 17 })
        ));
    }

    #[test]
    fn partition_must_cover_complement_exactly() {
        let g = Graph::complete(8).with_edges_removed([Edge::new(0, 1), Edge::new(2, 3)]);
        let short = MatchingPartition::new(vec![Matching::new(vec![Edge::new(0, 1)]).unwrap()]).unwrap();
        assert!(matches!(decompose_sparse_complement(&g, 3, &short), Err(Error::InvalidPartition(_))));
        let extra = MatchingPartition::new(vec![
            Matching::new(vec![Edge::new(0, 1), Edge::new(2, 3), Edge::new(4, 5)]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(decompose_sparse_complement(&g, 3, &extra), Err(Error::InvalidPartition(_))));
        let dup = MatchingPartition::new(vec![
            Matching::new(vec![Edge::new(0, 1)]).unwrap(),
            Matching::new(vec![Edge::new(0, 1)]).unwrap(),
        ]);
        assert!(dup.is_err());
    }

    #[test]
    fn m_complement_small_cases() {
        for (r, edges) in [(3, 11), (4, 16)] {
            let p = partition_m_complement(r);
            assert_eq!(p.len(), 5);
            let target = Graph::m_graph(r).non_edges();
            assert_eq!(target.len(), edges);
            assert_partition_of(&p, &target);
            assert_eq!(p.parts()[4].len(), r);
        }
    }

    #[test]
    fn cycle_partition() {
        let p = partition_cycle_complement(4).unwrap();
        assert_eq!(p.parts().iter().map(Matching::len).collect::<Vec<_>>(), vec![2, 2]);
        assert!(partition_cycle_complement(5).is_err());
        assert!(partition_cycle_complement(2).is_err());
    }

    #[test]
    fn two_matching_split() {
        for n in [4, 6, 10] {
            let c = Graph::cycle(n).unwrap();
            let p = partition_two_matchings(&c).unwrap();
            assert_partition_of(&p, &c.edges());
        }
        assert!(partition_two_matchings(&Graph::cycle(5).unwrap()).is_none());
        let paths = Graph::new(9, [(0, 1), (1, 2), (2, 3), (5, 6), (6, 7)]).unwrap();
        assert_partition_of(&partition_two_matchings(&paths).unwrap(), &paths.edges());
        let mixed = Graph::new(9, [(0, 1), (1, 2), (2, 3), (3, 0), (5, 6), (6, 7), (7, 8)]).unwrap();
        assert_partition_of(&partition_two_matchings(&mixed).unwrap(), &mixed.edges());
        let claw = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(partition_two_matchings(&claw).is_none());
    }

    proptest! {
        #[test]
        fn m_complement_always_partitions(r in 1usize..=40) {
            let p = partition_m_complement(r);
            assert_partition_of(&p, &Graph::m_graph(r).non_edges());
            prop_assert_eq!(p.parts()[4].len(), r);
        }

        #[test]
        fn cycle_always_partitions(half in 2usize..=100) {
            let n = 2 * half;
            let p = partition_cycle_complement(n).unwrap();
            assert_partition_of(&p, &Graph::cycle(n).unwrap().edges());
            prop_assert!(p.parts().iter().all(|m| m.len() == n / 2));
        }
    }
}
