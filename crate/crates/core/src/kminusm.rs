//! Fractional `K_r`-decompositions of `K_k - M` for a matching `M`.
//!
//! On `2r+2` vertices the cliques are grouped by how many of their vertices
//! are covered by `M` (their *type*). Spreading a type's total weight evenly
//! over the type class makes every edge sum depend only on how many of its
//! endpoints are covered, so three scalar equations suffice. Larger `k` is
//! reduced to `2r+2` by weighting every `(2r+2)`-subset uniformly.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::combin::Combinations;
use crate::error::{Error, Result};
use crate::graph::{Clique, Edge, Graph, Matching, Vertex};
use crate::rational::{binom, binom_q, from_usize, pow2, Rational};
use crate::weighting::CliqueWeighting;

/// `K_k` with the matching `matching` removed; the clique order is `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingRemovedInstance {
    pub r: usize,
    pub k: usize,
    pub matching: Matching,
}

impl MatchingRemovedInstance {
    pub fn new(r: usize, k: usize, matching: Matching) -> Result<Self> {
        if r < 3 {
            return Err(Error::precondition(format!("clique order {r} < 3")));
        }
        if k < 2 * r + 2 {
            return Err(Error::HostTooSmall {
                required: 2 * r + 2,
                actual: k,
            });
        }
        matching.check_within(k)?;
        Ok(MatchingRemovedInstance { r, k, matching })
    }

    pub fn graph(&self) -> Graph {
        Graph::complete(self.k).with_edges_removed(self.matching.edges().iter().copied())
    }
}

/// `(|E_0|, |E_1|, |E_2|)` for `K_{2r+2}` minus an `m`-matching, where `E_i`
/// holds the edges with `i` endpoints covered by the matching.
pub fn edge_type_counts(r: usize, m: usize) -> Result<[BigInt; 3]> {
    if m > r + 1 {
        return Err(Error::MatchingSize { m, r: r + 1 });
    }
    let free = 2 * r + 2 - 2 * m;
    Ok([
        BigInt::from(free * free.saturating_sub(1) / 2),
        BigInt::from(2 * m * free),
        BigInt::from(2 * m * (2 * m).saturating_sub(2) / 2),
    ])
}

/// Number of `r`-cliques of `K_{2r+2} - M` (`|M| = m`) with exactly `l`
/// vertices covered by `M`.
pub fn type_class_size(r: usize, m: usize, l: usize) -> BigInt {
    if l > m || l > r {
        return BigInt::zero();
    }
    binom(m, l) * pow2(l) * binom(2 * r + 2 - 2 * m, r - l)
}

/// Edges of a type-`l` clique in `E_2`, `E_1`, `E_0` (in that order).
fn type_column(r: usize, l: usize) -> [Rational; 3] {
    let (l, r) = (from_usize(l), from_usize(r));
    let one = Rational::one();
    let two = from_usize(2);
    [
        &l * (&l - &one) / &two,
        &l * (&r - &l),
        (&r - &l) * (&r - &l - &one) / &two,
    ]
}

/// Three clique types and their total weights `(x, y, z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeWeights {
    pub r: usize,
    pub m: usize,
    pub types: [usize; 3],
    pub values: [Rational; 3],
}

impl TypeWeights {
    pub fn x(&self) -> &Rational {
        &self.values[0]
    }

    pub fn y(&self) -> &Rational {
        &self.values[1]
    }

    pub fn z(&self) -> &Rational {
        &self.values[2]
    }

    /// Column `i` counts the `E_2`, `E_1`, `E_0` edges of a type `types[i]` clique.
    pub fn system_matrix(&self) -> [[Rational; 3]; 3] {
        let cols = self.types.map(|t| type_column(self.r, t));
        std::array::from_fn(|row| std::array::from_fn(|col| cols[col][row].clone()))
    }

    /// `(|E_2|, |E_1|, |E_0|)`.
    pub fn rhs(&self) -> [Rational; 3] {
        let [e0, e1, e2] = edge_type_counts(self.r, self.m).expect("validated at construction");
        [e2, e1, e0].map(Rational::from_integer)
    }

    /// `A * (x, y, z) - rhs`; identically zero for a valid solution.
    pub fn residual(&self) -> [Rational; 3] {
        let a = self.system_matrix();
        let b = self.rhs();
        std::array::from_fn(|row| {
            let lhs = (0..3).fold(Rational::zero(), |acc, col| acc + &a[row][col] * &self.values[col]);
            lhs - &b[row]
        })
    }

    /// Total weight per clique type; coinciding types are merged.
    pub fn per_type(&self) -> BTreeMap<usize, Rational> {
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        for (t, v) in self.types.iter().zip(&self.values) {
            *out.entry(*t).or_insert_with(Rational::zero) += v;
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }
}

/// Closed-form solution of the type system for `1 <= m <= r`.
pub fn closed_form_type_weights(r: usize, m: usize) -> Result<TypeWeights> {
    if r < 3 {
        return Err(Error::precondition(format!("clique order {r} < 3")));
    }
    if m < 1 || m > r {
        return Err(Error::MatchingSize { m, r });
    }
    let rq = from_usize(r);
    let kq = from_usize(m);
    let one = Rational::one();
    let two = from_usize(2);
    let r_r1 = &rq * (&rq - &one);
    if 2 * m >= r + 2 {
        let d = &rq + &two - &kq;
        let rk = &rq - &kq;
        let x = &two * (&rq + &one - &kq)
            * (&two * &rk * &rk + &kq * &rq + from_usize(5) * &rq - from_usize(4) * &kq + &two)
            / (&r_r1 * &d);
        let y = &two * &kq * (from_usize(3) * &rq - &two * &kq + &two) / &r_r1;
        let z = &two * &kq * (&kq - &one) / (&r_r1 * &d);
        Ok(TypeWeights {
            r,
            m,
            types: [m, m - 1, 2 * m - r - 2],
            values: [x, y, z],
        })
    } else {
        let x = from_usize(4) * (&rq + &one - &kq) / (&rq - &one);
        let y = from_usize(4) * &kq / (&rq - &one);
        let z = &two * (&rq + &one - &kq) / &r_r1;
        Ok(TypeWeights {
            r,
            m,
            types: [m, m - 1, 0],
            values: [x, y, z],
        })
    }
}

/// Per-clique weight by type for `K_k - M` with `|M| = m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassWeights {
    pub r: usize,
    pub k: usize,
    pub m: usize,
    pub per_type: BTreeMap<usize, Rational>,
}

impl ClassWeights {
    pub fn weight(&self, l: usize) -> Rational {
        self.per_type.get(&l).cloned().unwrap_or_else(Rational::zero)
    }

    /// Expands the class weights over the actual cliques of `K_k - matching`.
    pub fn materialize(&self, matching: &Matching) -> Result<CliqueWeighting> {
        if matching.len() != self.m {
            return Err(Error::precondition(format!(
                "matching has {} edges, class weights were built for {}",
                matching.len(),
                self.m
            )));
        }
        let g = Graph::complete(self.k).with_edges_removed(matching.edges().iter().copied());
        let covered: Vec<bool> = (0..self.k).map(|v| matching.covers(v)).collect();
        let mut w = CliqueWeighting::new(self.r);
        for c in g.enumerate_cliques(self.r)? {
            let l = c.vertices().iter().filter(|&&v| covered[v]).count();
            w.add(c, self.weight(l));
        }
        Ok(w)
    }
}

/// Class weights on exactly `2r+2` vertices.
fn base_class_weights(r: usize, m: usize) -> Result<ClassWeights> {
    let k = 2 * r + 2;
    let mut per_type = BTreeMap::new();
    if m == 0 {
        // every edge of K_{2r+2} lies in C(2r, r-2) cliques
        per_type.insert(0, Rational::one() / binom_q(2 * r, r - 2));
    } else if m == r + 1 {
        // both endpoints of an edge are in different pairs; pick r-2 of the
        // other r-1 pairs and one vertex from each
        let per_edge = from_usize(r - 1) * Rational::from_integer(pow2(r - 2));
        per_type.insert(r, Rational::one() / per_edge);
    } else if m <= r {
        let tw = closed_form_type_weights(r, m)?;
        for (t, total) in tw.per_type() {
            let size = type_class_size(r, m, t);
            debug_assert!(size > BigInt::zero(), "empty clique type {t}");
            per_type.insert(t, total / Rational::from_integer(size));
        }
    } else {
        return Err(Error::MatchingSize { m, r: r + 1 });
    }
    Ok(ClassWeights { r, k, m, per_type })
}

/// Type-compressed decomposition of `K_k - M` for any `k >= 2r+2`.
///
/// A type-`l` clique `K` lies in many `(2r+2)`-subsets `S`; each `S` is
/// classified by how many of `K`'s partners it contains (`a`), how many
/// whole untouched matching edges (`b`), single endpoints of untouched
/// matching edges (`c`) and uncovered vertices (`d`). Inside `S` the clique
/// has type `a` and the sub-matching has `a + b` edges.
pub fn class_weights(r: usize, k: usize, m: usize) -> Result<ClassWeights> {
    if r < 3 {
        return Err(Error::precondition(format!("clique order {r} < 3")));
    }
    if k < 2 * r + 2 {
        return Err(Error::HostTooSmall {
            required: 2 * r + 2,
            actual: k,
        });
    }
    if 2 * m > k {
        return Err(Error::InvalidMatching(format!("{m} disjoint edges do not fit on {k} vertices")));
    }
    if k == 2 * r + 2 {
        return base_class_weights(r, m);
    }
    let extra = r + 2;
    let uncovered = k - 2 * m;
    let scale = Rational::one() / binom_q(k - 2, 2 * r);
    let mut base_cache: HashMap<usize, ClassWeights> = HashMap::new();
    let mut per_type = BTreeMap::new();
    for l in 0..=m.min(r) {
        if r - l > uncovered {
            continue;
        }
        let free = uncovered - (r - l);
        let mut acc = Rational::zero();
        for a in 0..=l.min(extra) {
            for b in 0..=(m - l).min((extra - a) / 2) {
                for c in 0..=(m - l - b).min(extra - a - 2 * b) {
                    let d = extra - a - 2 * b - c;
                    if d > free {
                        continue;
                    }
                    let count = binom(l, a) * binom(m - l, b) * binom(m - l - b, c) * pow2(c) * binom(free, d);
                    if count.is_zero() {
                        continue;
                    }
                    let sub_m = a + b;
                    if !base_cache.contains_key(&sub_m) {
                        base_cache.insert(sub_m, base_class_weights(r, sub_m)?);
                    }
                    let w = base_cache[&sub_m].weight(a);
                    acc += Rational::from_integer(count) * w;
                }
            }
        }
        let w = acc * &scale;
        if !w.is_zero() {
            per_type.insert(l, w);
        }
    }
    Ok(ClassWeights { r, k, m, per_type })
}

/// Exact fractional `K_r`-decomposition of `K_k - matching`, materialised per clique.
///
/// For `k > 2r+2` every `(2r+2)`-subset receives weight `1 / C(k-2, 2r)` and
/// is decomposed on its own; see [`class_weights`] for the compressed form.
pub fn decompose_clique_minus_matching(r: usize, k: usize, matching: &Matching) -> Result<CliqueWeighting> {
    let inst = MatchingRemovedInstance::new(r, k, matching.clone())?;
    let base_n = 2 * r + 2;
    if k == base_n {
        return base_class_weights(r, inst.matching.len())?.materialize(&inst.matching);
    }
    let scale = Rational::one() / binom_q(k - 2, 2 * r);
    let mut cache: HashMap<Matching, CliqueWeighting> = HashMap::new();
    let mut out = CliqueWeighting::new(r);
    for subset in Combinations::new(k, base_n) {
        let mut local_of = vec![usize::MAX; k];
        for (i, &v) in subset.iter().enumerate() {
            local_of[v] = i;
        }
        let local = Matching::new(
            inst.matching
                .restrict(|v| local_of[v] != usize::MAX)
                .edges()
                .iter()
                .map(|e| e.map(|v| local_of[v]))
                .collect(),
        )?;
        if !cache.contains_key(&local) {
            let w = base_class_weights(r, local.len())?.materialize(&local)?;
            cache.insert(local.clone(), w);
        }
        out.add_scaled(&cache[&local], &scale, |x: Vertex| subset[x]);
    }
    Ok(out)
}

/// Decomposition of `K_{2r+2}` minus the matching `{0-1, 2-3, ...}` of size `m`.
pub fn base_pattern(r: usize, m: usize) -> Result<CliqueWeighting> {
    base_class_weights(r, m)?.materialize(&prefix_matching(m))
}

/// Vertex order under which [`base_pattern`] lands on `vertices` with the
/// matching `inside` (all of whose edges lie in `vertices`) removed.
pub fn pattern_order(vertices: &[Vertex], inside: &Matching) -> Vec<Vertex> {
    let mut order = Vec::with_capacity(vertices.len());
    for e in inside.edges() {
        order.extend(e.endpoints());
    }
    order.extend(vertices.iter().copied().filter(|&v| !inside.covers(v)));
    order
}

pub(crate) fn prefix_matching(m: usize) -> Matching {
    Matching::new((0..m).map(|i| Edge::new(2 * i, 2 * i + 1)).collect()).expect("disjoint pairs")
}

/// Matching from vertex pairs.
pub fn matching_from_pairs(pairs: &[(Vertex, Vertex)]) -> Result<Matching> {
    Matching::new(pairs.iter().map(|&(a, b)| Edge::try_new(a, b)).collect::<Result<Vec<_>>>()?)
}

/// Cliques of `K_{2r+2} - M` grouped by type, largest first; handy for audits.
pub fn cliques_by_type(r: usize, matching: &Matching) -> Result<BTreeMap<usize, Vec<Clique>>> {
    let inst = MatchingRemovedInstance::new(r, 2 * r + 2, matching.clone())?;
    let mut out: BTreeMap<usize, Vec<Clique>> = BTreeMap::new();
    for c in inst.graph().enumerate_cliques(r)? {
        let l = c.vertices().iter().filter(|&&v| matching.covers(v)).count();
        out.entry(l).or_default().push(c);
    }
    Ok(out)
}
