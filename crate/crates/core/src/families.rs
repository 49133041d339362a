//! Symmetric random families of near-complete induced subgraphs.
//!
//! Both families split the host into groups of four vertices, pick some
//! groups uniformly and take two vertices from each. In the `W` family the
//! pair is any 2-subset of the group; in the `M` family one of three
//! pairings of the group is chosen first and then one of its two pairs.
//! Either way an intra-group edge is picked with probability `1/6` given its
//! group, and two vertices in different groups with probability `1/4`.
//! Intra-group edges are then deleted independently to bring their
//! marginal down to the cross-group value.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Matching, Vertex};
use crate::kminusm::decompose_clique_minus_matching;
use crate::lp::{lp_feasible, LpOutcome};
use crate::rational::{binom, binom_q, from_usize, ratio, Rational};
use crate::recursion::{decompose_sparse_complement, partition_two_matchings, required_order};
use crate::rng::StreamRng;
use crate::weighting::{unit_target, CliqueWeighting};

/// Default cap on the number of members an enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    W,
    M,
}

/// Pairs offered inside a group of four (by position) for each `M` variant.
const M_PAIRINGS: [[[usize; 2]; 2]; 3] = [[[0, 1], [2, 3]], [[0, 2], [1, 3]], [[0, 3], [1, 2]]];
const ALL_PAIRS: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// One drawn subgraph: the induced subgraph on `vertices` minus `deleted`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyMember {
    /// Sorted host vertices.
    pub vertices: Vec<Vertex>,
    /// Host edges removed by the marginal adjustment.
    pub deleted: Vec<Edge>,
    /// Which pairing was used (`M` family only).
    pub variant: Option<usize>,
}

impl FamilyMember {
    /// The member relabelled onto `0..vertices.len()`.
    pub fn local_graph(&self, host: &Graph) -> Graph {
        let g = host.induced(&self.vertices);
        let pos = |v: Vertex| self.vertices.binary_search(&v).expect("deleted edge inside member");
        g.with_edges_removed(self.deleted.iter().map(|e| e.map(pos)))
    }

    pub fn contains_edge(&self, host: &Graph, e: Edge) -> bool {
        host.contains_edge(e)
            && self.vertices.binary_search(&e.u()).is_ok()
            && self.vertices.binary_search(&e.v()).is_ok()
            && self.deleted.binary_search(&e).is_err()
    }
}

/// Exact distribution over [`FamilyMember`]s of a host graph.
#[derive(Clone, Debug)]
pub struct FamilyDistribution {
    host: Graph,
    kind: FamilyKind,
    groups: Vec<[Vertex; 4]>,
    chosen: usize,
    group_of: Vec<Option<usize>>,
    /// Keep-probabilities below one for deletable edges.
    keep: BTreeMap<Edge, Rational>,
}

impl FamilyDistribution {
    /// Unadjusted family: choose `chosen` of the groups uniformly, then a pair
    /// in each according to `kind`. No size bounds are imposed here.
    pub fn raw(host: &Graph, kind: FamilyKind, groups: Vec<[Vertex; 4]>, chosen: usize) -> Result<Self> {
        if chosen > groups.len() {
            return Err(Error::precondition(format!(
                "cannot choose {chosen} of {} groups",
                groups.len()
            )));
        }
        let mut group_of = vec![None; host.n()];
        for (j, g) in groups.iter().enumerate() {
            for &v in g {
                if v >= host.n() {
                    return Err(Error::VertexOutOfRange { vertex: v, n: host.n() });
                }
                if group_of[v].replace(j).is_some() {
                    return Err(Error::InvalidPartition(format!("vertex {v} is in two groups")));
                }
            }
        }
        Ok(FamilyDistribution {
            host: host.clone(),
            kind,
            groups,
            chosen,
            group_of,
            keep: BTreeMap::new(),
        })
    }

    pub fn host(&self) -> &Graph {
        &self.host
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn groups(&self) -> &[[Vertex; 4]] {
        &self.groups
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }

    pub fn keep_probability(&self, e: Edge) -> Rational {
        self.keep.get(&e).cloned().unwrap_or_else(Rational::one)
    }

    fn same_group(&self, e: Edge) -> Option<usize> {
        match (self.group_of[e.u()], self.group_of[e.v()]) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    /// Probability that a host edge lies in the drawn member, before deletions.
    pub fn base_marginal(&self, e: Edge) -> Rational {
        if !self.host.contains_edge(e) {
            return Rational::zero();
        }
        let (g, c) = (self.groups.len(), self.chosen);
        if self.same_group(e).is_some() {
            from_usize(c) / from_usize(6 * g)
        } else if self.group_of[e.u()].is_none() || self.group_of[e.v()].is_none() {
            Rational::zero()
        } else {
            binom_q(c, 2) / (binom_q(g, 2) * from_usize(4))
        }
    }

    /// Exact probability that `e` is an edge of the drawn member.
    pub fn marginal(&self, e: Edge) -> Rational {
        self.base_marginal(e) * self.keep_probability(e)
    }

    /// Upper bound on the number of (member, probability) pairs.
    pub fn support_size(&self) -> u128 {
        let per_group: u128 = match self.kind {
            FamilyKind::W => 6,
            FamilyKind::M => 2,
        };
        let variants: u128 = match self.kind {
            FamilyKind::W => 1,
            FamilyKind::M => 3,
        };
        let mut total = crate::rational::binom_u128(self.groups.len(), self.chosen).saturating_mul(variants);
        for _ in 0..self.chosen {
            total = total.saturating_mul(per_group);
            if !self.keep.is_empty() {
                total = total.saturating_mul(2);
            }
        }
        total
    }

    fn pair_options(&self, variant: Option<usize>) -> &'static [[usize; 2]] {
        match variant {
            None => &ALL_PAIRS,
            Some(i) => &M_PAIRINGS[i],
        }
    }

    fn variants(&self) -> Vec<Option<usize>> {
        match self.kind {
            FamilyKind::W => vec![None],
            FamilyKind::M => vec![Some(0), Some(1), Some(2)],
        }
    }

    /// Draws one member.
    pub fn sample(&self, rng: &mut StreamRng) -> Result<FamilyMember> {
        let variant = match self.kind {
            FamilyKind::W => None,
            FamilyKind::M => Some(rng.index(3)),
        };
        let options = self.pair_options(variant);
        let mut vertices = Vec::with_capacity(2 * self.chosen);
        for j in rng.subset(self.groups.len(), self.chosen) {
            let [a, b] = options[rng.index(options.len())];
            vertices.extend([self.groups[j][a], self.groups[j][b]]);
        }
        vertices.sort_unstable();
        let mut deleted = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &vertices[i + 1..] {
                let e = Edge::new(u, v);
                if let Some(k) = self.keep.get(&e) {
                    if self.host.contains_edge(e) && !rng.bernoulli_q(k)? {
                        deleted.push(e);
                    }
                }
            }
        }
        Ok(FamilyMember {
            vertices,
            deleted,
            variant,
        })
    }

    /// Every member with its exact probability.
    pub fn enumerate(&self, budget: u128) -> Result<Vec<(FamilyMember, Rational)>> {
        let requested = self.support_size();
        if requested > budget {
            return Err(Error::BudgetExceeded {
                what: "family members",
                requested,
                budget,
            });
        }
        let variants = self.variants();
        let mut out = Vec::new();
        for variant in variants.iter().copied() {
            let options = self.pair_options(variant);
            let base_p = Rational::one()
                / (from_usize(variants.len())
                    * Rational::from_integer(binom(self.groups.len(), self.chosen))
                    * Rational::from_integer(num_bigint::BigInt::from(options.len()).pow(self.chosen as u32)));
            for subset in crate::combin::Combinations::new(self.groups.len(), self.chosen) {
                let mut pick = vec![0usize; self.chosen];
                loop {
                    let mut vertices: Vec<Vertex> = subset
                        .iter()
                        .zip(&pick)
                        .flat_map(|(&j, &o)| options[o].map(|x| self.groups[j][x]))
                        .collect();
                    vertices.sort_unstable();
                    self.push_deletions(&vertices, variant, &base_p, &mut out)?;
                    if !advance(&mut pick, options.len()) {
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    fn push_deletions(
        &self,
        vertices: &[Vertex],
        variant: Option<usize>,
        p: &Rational,
        out: &mut Vec<(FamilyMember, Rational)>,
    ) -> Result<()> {
        let mut optional: Vec<(Edge, Rational)> = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &vertices[i + 1..] {
                let e = Edge::new(u, v);
                if let Some(k) = self.keep.get(&e) {
                    if self.host.contains_edge(e) {
                        optional.push((e, k.clone()));
                    }
                }
            }
        }
        if optional.len() >= 64 {
            return Err(Error::precondition("too many deletable edges in one member"));
        }
        for mask in 0u64..(1u64 << optional.len()) {
            let mut q = p.clone();
            let mut deleted = Vec::new();
            for (bit, (e, k)) in optional.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    q *= Rational::one() - k;
                    deleted.push(*e);
                } else {
                    q *= k;
                }
            }
            if q.is_zero() {
                continue;
            }
            out.push((
                FamilyMember {
                    vertices: vertices.to_vec(),
                    deleted,
                    variant,
                },
                q,
            ));
        }
        Ok(())
    }

    /// Structural membership test: the member arises from this family's
    /// construction and has the shape its decomposition lemma needs.
    pub fn contains(&self, member: &FamilyMember) -> bool {
        if member.vertices.len() != 2 * self.chosen || member.vertices.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        if self.kind == FamilyKind::M && member.variant.is_none_or(|i| i > 2) {
            return false;
        }
        let mut per_group: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in &member.vertices {
            let Some(j) = self.group_of.get(v).copied().flatten() else {
                return false;
            };
            let pos = self.groups[j].iter().position(|&x| x == v).expect("group membership");
            per_group.entry(j).or_default().push(pos);
        }
        let options = self.pair_options(member.variant);
        for pos in per_group.values() {
            let mut pos = pos.clone();
            pos.sort_unstable();
            if pos.len() != 2 || !options.iter().any(|o| o[..] == pos[..]) {
                return false;
            }
        }
        for e in &member.deleted {
            let inside = member.vertices.binary_search(&e.u()).is_ok() && member.vertices.binary_search(&e.v()).is_ok();
            if !inside || !self.host.contains_edge(*e) || !self.keep.contains_key(e) {
                return false;
            }
        }
        let g = member.local_graph(&self.host);
        match member.variant {
            None => g.n() < 2 || g.min_degree() + 2 >= g.n(),
            Some(0) => g.spanning_w_classes().is_some(),
            Some(_) => g.contains_spanning_cycle_complement(),
        }
    }
}

/// Odometer step over `0..base` digits; false once it wraps around.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Groups `{4j, .., 4j+3}`.
pub fn consecutive_groups(count: usize) -> Vec<[Vertex; 4]> {
    (0..count).map(|j| [4 * j, 4 * j + 1, 4 * j + 2, 4 * j + 3]).collect()
}

/// Independent deletion of each edge of `deletable` with probability
/// `1 - target / marginal(e)`, making every marginal equal to `target`.
pub fn equalize_marginals(
    d: &FamilyDistribution,
    deletable: &BTreeSet<Edge>,
    target: &Rational,
) -> Result<FamilyDistribution> {
    let mut out = d.clone();
    for e in d.host.edges() {
        let m = d.marginal(e);
        if deletable.contains(&e) {
            if m < *target {
                return Err(Error::MarginalBelowTarget {
                    edge: e,
                    marginal: m,
                    target: target.clone(),
                });
            }
            if d.same_group(e).is_none() {
                return Err(Error::precondition(format!(
                    "edge {e} joins two groups; deleting it may leave the family"
                )));
            }
            let k = target / &m * d.keep_probability(e);
            if k.is_one() {
                out.keep.remove(&e);
            } else {
                out.keep.insert(e, k);
            }
        } else if m != *target {
            return Err(Error::precondition(format!(
                "edge {e} is not deletable and has marginal {m}, not {target}"
            )));
        }
    }
    for e in deletable {
        if !d.host.contains_edge(*e) {
            return Err(Error::precondition(format!("deletable edge {e} is not in the host")));
        }
    }
    Ok(out)
}

fn intra_group_edges(d: &FamilyDistribution) -> BTreeSet<Edge> {
    d.host.edges().into_iter().filter(|&e| d.same_group(e).is_some()).collect()
}

/// Cross-group marginal `C(r+1, 2) / (4 C(k, 2))` of the `W` family.
pub fn w_target(r: usize, k: usize) -> Rational {
    binom_q(r + 1, 2) / (from_usize(4) * binom_q(k, 2))
}

/// Cross-group marginal `C(2k, 2) / (4 C(ell, 2))` of the `M` family.
pub fn m_target(k: usize, ell: usize) -> Rational {
    binom_q(2 * k, 2) / (from_usize(4) * binom_q(ell, 2))
}

/// `⌈(3r+2)/2⌉`.
pub fn m_family_k(r: usize) -> usize {
    (3 * r + 3) / 2
}

/// Family of `(2r+2)`-vertex subgraphs of a host containing a spanning
/// `W_k`, adjusted so every host edge has marginal [`w_target`].
pub fn w_family(host: &Graph, r: usize) -> Result<FamilyDistribution> {
    if r < 3 {
        return Err(Error::precondition(format!("clique order {r} < 3")));
    }
    if host.n() % 4 != 0 {
        return Err(Error::precondition(format!("{} vertices is not a multiple of 4", host.n())));
    }
    let k = host.n() / 4;
    if 2 * k < 3 * r + 2 {
        return Err(Error::BelowBound(format!("k = {k} < (3r+2)/2 = {}/2", 3 * r + 2)));
    }
    let groups = host
        .spanning_w_classes()
        .ok_or_else(|| Error::precondition("host does not contain a spanning W_k"))?;
    let raw = FamilyDistribution::raw(host, FamilyKind::W, groups, r + 1)?;
    let deletable = intra_group_edges(&raw);
    equalize_marginals(&raw, &deletable, &w_target(r, k))
}

/// Family of `4k`-vertex subgraphs of a host containing `M_{2 ell}` in its
/// standard labelling (pair `i` is `{2i, 2i+1}`), adjusted so every host
/// edge has marginal [`m_target`].
pub fn m_family(host: &Graph, r: usize) -> Result<FamilyDistribution> {
    if r < 3 {
        return Err(Error::precondition(format!("clique order {r} < 3")));
    }
    if host.n() % 4 != 0 {
        return Err(Error::precondition(format!("{} vertices is not a multiple of 4", host.n())));
    }
    let ell = host.n() / 4;
    if 2 * ell < 9 * r + 8 {
        return Err(Error::BelowBound(format!("ell = {ell} < (9r+8)/2 = {}/2", 9 * r + 8)));
    }
    if !host.contains_spanning(&Graph::m_graph(2 * ell)) {
        return Err(Error::precondition("host does not contain M_2ell in the standard labelling"));
    }
    let k = m_family_k(r);
    let raw = FamilyDistribution::raw(host, FamilyKind::M, consecutive_groups(ell), 2 * k)?;
    let deletable = intra_group_edges(&raw);
    equalize_marginals(&raw, &deletable, &m_target(k, ell))
}

/// `Σ_M p_M 1{e ∈ M}` over an enumerated support.
pub fn enumerated_marginals(host: &Graph, members: &[(FamilyMember, Rational)]) -> BTreeMap<Edge, Rational> {
    let mut out: BTreeMap<Edge, Rational> = host.edges().into_iter().map(|e| (e, Rational::zero())).collect();
    for (m, p) in members {
        for (i, &u) in m.vertices.iter().enumerate() {
            for &v in &m.vertices[i + 1..] {
                let e = Edge::new(u, v);
                if m.contains_edge(host, e) {
                    *out.get_mut(&e).expect("host edge") += p;
                }
            }
        }
    }
    out
}

/// A member decomposer maps a member (on local labels) to an exact
/// fractional `K_r`-decomposition of it.
pub type MemberDecomposer<'a> = dyn Fn(&Graph, usize) -> Result<CliqueWeighting> + Sync + 'a;

/// `w_K = (1/c) Σ_M p_M w_{M,K}` where every host edge has marginal `c`.
pub fn compose_members(
    host: &Graph,
    r: usize,
    members: &[(FamilyMember, Rational)],
    decomposer: &MemberDecomposer<'_>,
) -> Result<CliqueWeighting> {
    let marginals = enumerated_marginals(host, members);
    let mut values = marginals.values();
    let c = values
        .next()
        .cloned()
        .ok_or_else(|| Error::precondition("host has no edges"))?;
    if c.is_zero() {
        return Err(Error::precondition("edge marginal is zero"));
    }
    if let Some((e, m)) = marginals.iter().find(|(_, m)| **m != c) {
        return Err(Error::precondition(format!("edge {e} has marginal {m}, others {c}")));
    }
    let locals: Vec<Graph> = members.iter().map(|(m, _)| m.local_graph(host)).collect();
    let mut seen = std::collections::HashSet::new();
    let distinct: Vec<&Graph> = locals.iter().filter(|g| seen.insert(*g)).collect();
    let solved: Vec<(&Graph, CliqueWeighting)> = distinct
        .par_iter()
        .map(|g| {
            decomposer(g, r)
                .map(|w| (*g, w))
                .map_err(|e| Error::MemberDecomposition(Box::new(e)))
        })
        .collect::<Result<_>>()?;
    let cache: HashMap<&Graph, &CliqueWeighting> = solved.iter().map(|(g, w)| (*g, w)).collect();
    let inv_c = Rational::one() / c;
    let combined = members
        .par_iter()
        .zip(locals.par_iter())
        .fold(
            || CliqueWeighting::new(r),
            |mut acc, ((m, p), g)| {
                acc.add_scaled(cache[g], &(p * &inv_c), |x| m.vertices[x]);
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

/// Enumerates `d` and composes the member decompositions.
pub fn decompose_via_family(
    d: &FamilyDistribution,
    r: usize,
    decomposer: &MemberDecomposer<'_>,
) -> Result<CliqueWeighting> {
    let members = d.enumerate(DEFAULT_ENUMERATION_BUDGET)?;
    compose_members(&d.host, r, &members, decomposer)
}

/// Members whose complement is a matching.
pub fn minus_matching_member(g: &Graph, r: usize) -> Result<CliqueWeighting> {
    let m = Matching::new(g.non_edges())?;
    decompose_clique_minus_matching(r, g.n(), &m)
}

/// Members decomposed by the exact LP oracle.
pub fn lp_member(g: &Graph, r: usize) -> Result<CliqueWeighting> {
    match lp_feasible(g, r, unit_target)? {
        LpOutcome::Feasible(w) => Ok(w),
        LpOutcome::Infeasible(_) => Err(Error::Infeasible(format!(
            "member on {} vertices has no fractional K_{r}-decomposition",
            g.n()
        ))),
    }
}

/// Picks a construction from the member's shape: complement a matching,
/// complement two matchings, or a spanning `W_k`.
pub fn structured_member(g: &Graph, r: usize) -> Result<CliqueWeighting> {
    let comp = g.complement();
    if let Ok(m) = Matching::new(comp.edges()) {
        if g.n() >= 2 * r + 2 {
            return decompose_clique_minus_matching(r, g.n(), &m);
        }
    }
    if let Some(p) = partition_two_matchings(&comp) {
        if g.n() >= required_order(r, p.len()) {
            return decompose_sparse_complement(g, r, &p);
        }
    }
    if g.spanning_w_classes().is_some() {
        let d = w_family(g, r)?;
        return decompose_via_family(&d, r, &minus_matching_member);
    }
    Err(Error::precondition(format!(
        "no structured decomposition applies to this {}-vertex member",
        g.n()
    )))
}

/// `(intra, cross)` pre-adjustment marginals of a family with `groups` groups of which `chosen` are picked.
pub fn closed_form_marginals(groups: usize, chosen: usize) -> (Rational, Rational) {
    (
        from_usize(chosen) / from_usize(6 * groups),
        binom_q(chosen, 2) / (binom_q(groups, 2) * from_usize(4)),
    )
}

/// Probability of each `M` variant.
pub fn m_variant_probability() -> Rational {
    ratio(1, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::one_factorization;
    use crate::rational::ratio;
    use crate::weighting::verify_weighting;

    fn check_exact_law(d: &FamilyDistribution) {
        let members = d.enumerate(DEFAULT_ENUMERATION_BUDGET).unwrap();
        let total = members.iter().fold(Rational::zero(), |a, (_, p)| a + p);
        assert_eq!(total, Rational::one());
        assert!(members.iter().all(|(m, p)| *p > Rational::zero() && d.contains(m)));
        let emp = enumerated_marginals(d.host(), &members);
        for (e, p) in emp {
            assert_eq!(p, d.marginal(e), "edge {e}");
        }
    }

    #[test]
    fn w_toy_marginals_exact() {
        for k in 2..=4 {
            for chosen in 1..=k {
                let host = Graph::complete(4 * k);
                let d = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(k), chosen).unwrap();
                check_exact_law(&d);
            }
        }
        let host = Graph::w_graph(3);
        let d = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(3), 2).unwrap();
        check_exact_law(&d);
    }

    #[test]
    fn m_toy_marginals_exact() {
        for ell in 2..=6 {
            for chosen in [2, 4, 6].into_iter().filter(|&c| c <= ell) {
                for host in [Graph::complete(4 * ell), Graph::m_graph(2 * ell)] {
                    let d = FamilyDistribution::raw(&host, FamilyKind::M, consecutive_groups(ell), chosen).unwrap();
                    check_exact_law(&d);
                }
            }
        }
    }

    #[test]
    fn adjusted_toy_marginals_exact() {
        // chosen = 3 of k = 6 gives intra 1/12 >= cross 1/20
        let host = Graph::complete(24);
        let raw = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(6), 3).unwrap();
        let (intra, cross) = closed_form_marginals(6, 3);
        assert_eq!((intra.clone(), cross.clone()), (ratio(1, 12), ratio(1, 20)));
        let d = equalize_marginals(&raw, &intra_group_edges(&raw), &cross).unwrap();
        assert_eq!(d.keep_probability(Edge::new(0, 1)), ratio(3, 5));
        check_exact_law(&d);
        let host = Graph::complete(24);
        let raw = FamilyDistribution::raw(&host, FamilyKind::M, consecutive_groups(6), 2).unwrap();
        let (intra, cross) = closed_form_marginals(6, 2);
        let d = equalize_marginals(&raw, &intra_group_edges(&raw), &cross).unwrap();
        assert!(intra > cross);
        check_exact_law(&d);
    }

    #[test]
    fn w_family_full_scale_parameters() {
        let (intra, cross) = closed_form_marginals(6, 4);
        assert_eq!(cross, ratio(1, 10));
        assert_eq!(intra, ratio(1, 9));
        assert_eq!(w_target(3, 6), ratio(1, 10));
        let d = w_family(&Graph::complete(24), 3).unwrap();
        assert_eq!(d.keep_probability(Edge::new(0, 1)), ratio(9, 10));
        assert_eq!(d.marginal(Edge::new(0, 1)), ratio(1, 10));
        assert_eq!(d.marginal(Edge::new(0, 4)), ratio(1, 10));
        // k = 5 is below (3r+2)/2 = 5.5; the intra marginal would be 2/15 < 3/20
        let (intra5, cross5) = closed_form_marginals(5, 4);
        assert_eq!((intra5.clone(), cross5.clone()), (ratio(2, 15), ratio(3, 20)));
        assert!(intra5 < cross5);
        assert!(matches!(w_family(&Graph::complete(20), 3), Err(Error::BelowBound(_))));
    }

    #[test]
    fn w_family_samples_are_members() {
        let d = w_family(&Graph::complete(24), 3).unwrap();
        let mut rng = StreamRng::new(11, 0);
        for _ in 0..500 {
            let m = d.sample(&mut rng).unwrap();
            assert_eq!(m.vertices.len(), 8);
            assert!(d.contains(&m));
            let g = m.local_graph(d.host());
            assert!(g.min_degree() + 2 >= g.n());
        }
    }

    #[test]
    fn m_family_full_scale_parameters() {
        assert_eq!(m_family_k(3), 6);
        assert_eq!(m_target(6, 18), ratio(11, 102));
        let (intra, cross) = closed_form_marginals(18, 12);
        assert_eq!(intra, ratio(1, 9));
        assert_eq!(cross, ratio(11, 102));
        assert!(intra >= cross);
        assert_eq!(m_variant_probability() * from_usize(3), Rational::one());
        let host = Graph::m_graph(36);
        let d = m_family(&host, 3).unwrap();
        assert!(d.support_size() > DEFAULT_ENUMERATION_BUDGET);
        let mut rng = StreamRng::new(5, 0);
        let mut seen = [0usize; 3];
        for _ in 0..300 {
            let m = d.sample(&mut rng).unwrap();
            seen[m.variant.unwrap()] += 1;
            assert!(d.contains(&m));
        }
        assert!(seen.iter().all(|&s| s > 0));
        assert!(matches!(m_family(&Graph::m_graph(34), 3), Err(Error::BelowBound(_))));
    }

    #[test]
    fn equalize_is_identity_at_target() {
        let host = Graph::complete(16);
        let raw = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(4), 3).unwrap();
        let (intra, cross) = closed_form_marginals(4, 3);
        assert_eq!(intra, cross);
        let d = equalize_marginals(&raw, &intra_group_edges(&raw), &cross).unwrap();
        assert!(d.keep.is_empty());
        let bad = equalize_marginals(&raw, &intra_group_edges(&raw), &(cross * from_usize(2)));
        assert!(matches!(bad, Err(Error::MarginalBelowTarget { .. })));
    }

    #[test]
    fn one_factor_deletions_compose() {
        // K_8 minus each perfect matching of a one-factorization, p = 1/7:
        // every edge has marginal 6/7
        let host = Graph::complete(8);
        let members: Vec<(FamilyMember, Rational)> = one_factorization(8)
            .unwrap()
            .into_iter()
            .map(|f| {
                (
                    FamilyMember {
                        vertices: (0..8).collect(),
                        deleted: f.edges().to_vec(),
                        variant: None,
                    },
                    ratio(1, 7),
                )
            })
            .collect();
        let w = compose_members(&host, 3, &members, &minus_matching_member).unwrap();
        assert!(verify_weighting(&host, &w, unit_target).pass);
    }

    #[test]
    fn single_member_reduces_to_decomposer() {
        let host = Graph::complete(8).with_edges_removed([Edge::new(0, 1)]);
        let members = vec![(
            FamilyMember {
                vertices: (0..8).collect(),
                deleted: vec![],
                variant: None,
            },
            Rational::one(),
        )];
        let w = compose_members(&host, 3, &members, &minus_matching_member).unwrap();
        assert_eq!(w, minus_matching_member(&host, 3).unwrap());
    }

    #[test]
    fn toy_w_family_with_lp_members() {
        // k = 4 groups, 3 chosen: intra and cross marginals are both 1/8;
        // members are octahedra on W_4 and K_6 on K_16
        for host in [Graph::w_graph(4), Graph::complete(16)] {
            let d = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(4), 3).unwrap();
            let w = decompose_via_family(&d, 3, &lp_member).unwrap();
            assert!(verify_weighting(&host, &w, unit_target).pass);
        }
        // K_6 minus two disjoint edges has no fractional triangle decomposition
        let host = Graph::w_graph(4).with_edges_added([Edge::new(0, 1)]).unwrap();
        let d = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(4), 3).unwrap();
        assert!(matches!(
            decompose_via_family(&d, 3, &lp_member),
            Err(Error::MemberDecomposition(_))
        ));
    }

    #[test]
    fn failing_member_is_reported() {
        let host = Graph::complete(16);
        let d = FamilyDistribution::raw(&host, FamilyKind::W, consecutive_groups(4), 3).unwrap();
        let err = decompose_via_family(&d, 3, &minus_matching_member).unwrap_err();
        assert!(matches!(err, Error::MemberDecomposition(_)));
    }

    #[test]
    fn enumeration_budget() {
        let d = w_family(&Graph::complete(24), 3).unwrap();
        assert!(matches!(d.enumerate(1000), Err(Error::BudgetExceeded { .. })));
    }
}
