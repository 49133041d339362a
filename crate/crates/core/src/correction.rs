//! Exact edge-target shaping on `K_{2r+2}` and the lift from an approximate
//! `(2r+2)`-clique weighting to an exact fractional `K_r`-decomposition.
//!
//! Split `E(K_{2r+2})` into `2r+1` perfect matchings and sort each by target.
//! Weighting `K_{2r+2}` minus each prefix of each sorted matching by the gap
//! between consecutive targets gives every edge exactly its target.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Matching, Vertex};
use crate::kminusm::{base_pattern, pattern_order};
use crate::rational::{from_usize, Rational};
use crate::weighting::CliqueWeighting;

/// Lower end `1 - 1/(2r+1)` of the admissible target range.
pub fn slab_low(r: usize) -> Rational {
    Rational::one() - Rational::one() / from_usize(2 * r + 1)
}

/// Target values on every edge of `K_{2r+2}`, each in `[1 - 1/(2r+1), 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTarget {
    r: usize,
    values: BTreeMap<Edge, Rational>,
}

impl EdgeTarget {
    pub fn new(r: usize, values: BTreeMap<Edge, Rational>) -> Result<Self> {
        if r < 1 {
            return Err(Error::precondition("clique order must be positive"));
        }
        let n = 2 * r + 2;
        let low = slab_low(r);
        for u in 0..n {
            for v in u + 1..n {
                let e = Edge::new(u, v);
                let Some(x) = values.get(&e) else {
                    return Err(Error::precondition(format!("no target for edge {e}")));
                };
                if *x < low || *x > Rational::one() {
                    return Err(Error::TargetOutOfRange {
                        edge: e,
                        value: x.clone(),
                        low: low.clone(),
                    });
                }
            }
        }
        if let Some(e) = values.keys().find(|e| e.v() >= n) {
            return Err(Error::VertexOutOfRange { vertex: e.v(), n });
        }
        Ok(EdgeTarget { r, values })
    }

    pub fn constant(r: usize, value: Rational) -> Result<Self> {
        let n = 2 * r + 2;
        let values = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v)))
            .map(|e| (e, value.clone()))
            .collect();
        EdgeTarget::new(r, values)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, e: Edge) -> &Rational {
        &self.values[&e]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Edge, &Rational)> {
        self.values.iter()
    }
}

/// `2r+1` disjoint perfect matchings covering `E(K_{2r+2})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneFactorization {
    pub matchings: Vec<Matching>,
}

/// Circle method: hub `2r+1`; matching `i` pairs the hub with `i` and
/// `i-j` with `i+j` (mod `2r+1`) for `j = 1..=r`.
pub fn one_factorize(r: usize) -> OneFactorization {
    assert!(r >= 1, "need at least 4 vertices");
    let q = 2 * r + 1;
    let matchings = (0..q)
        .map(|i| {
            let mut edges = vec![Edge::new(i, q)];
            for j in 1..=r {
                edges.push(Edge::new((i + q - j) % q, (i + j) % q));
            }
            Matching::new(edges).expect("circle method yields a perfect matching")
        })
        .collect();
    OneFactorization { matchings }
}

/// One-factorization of `K_n` for even `n >= 4`.
pub fn one_factorization(n: usize) -> Result<Vec<Matching>> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::precondition(format!("K_{n} has no one-factorization here")));
    }
    Ok(one_factorize(n / 2 - 1).matchings)
}

/// Weights on matching prefixes for a given target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixWeights {
    /// Each matching sorted by target, ties by edge order.
    pub sorted: Vec<Vec<Edge>>,
    /// `prefix[i][j]` weights the first `j+1` edges of matching `i`.
    pub prefix: Vec<Vec<Rational>>,
    /// Weight of the empty matching.
    pub empty: Rational,
}

impl PrefixWeights {
    pub fn new(f: &EdgeTarget) -> Result<Self> {
        let one = Rational::one();
        let mut sorted = Vec::new();
        let mut prefix = Vec::new();
        let mut empty = one.clone();
        for m in one_factorize(f.r()).matchings {
            let mut edges = m.edges().to_vec();
            edges.sort_by(|a, b| f.get(*a).cmp(f.get(*b)).then(a.cmp(b)));
            let vals: Vec<&Rational> = edges.iter().map(|&e| f.get(e)).collect();
            let mut w: Vec<Rational> = vals.windows(2).map(|p| p[1] - p[0]).collect();
            w.push(&one - vals[vals.len() - 1]);
            empty -= &one - vals[0];
            sorted.push(edges);
            prefix.push(w);
        }
        if empty.is_negative() {
            return Err(Error::precondition(format!("empty-matching weight {empty} is negative")));
        }
        Ok(PrefixWeights { sorted, prefix, empty })
    }

    /// Positive-weight matchings with their weights.
    pub fn support(&self) -> Vec<(Matching, &Rational)> {
        let mut out = Vec::new();
        if self.empty.is_positive() {
            out.push((Matching::empty(), &self.empty));
        }
        for (edges, ws) in self.sorted.iter().zip(&self.prefix) {
            for (j, w) in ws.iter().enumerate() {
                if w.is_positive() {
                    out.push((Matching::new(edges[..=j].to_vec()).expect("sub-matching"), w));
                }
            }
        }
        out
    }
}

/// Non-negative `K_r` weights on `K_{2r+2}` with edge sums exactly `f`.
pub fn shape_weights(r: usize, f: &EdgeTarget) -> Result<CliqueWeighting> {
    if f.r() != r {
        return Err(Error::precondition(format!("target built for r = {}, asked for {r}", f.r())));
    }
    let pw = PrefixWeights::new(f)?;
    let all: Vec<Vertex> = (0..2 * r + 2).collect();
    let mut patterns: HashMap<usize, CliqueWeighting> = HashMap::new();
    let mut out = CliqueWeighting::new(r);
    for (m, w) in pw.support() {
        if !patterns.contains_key(&m.len()) {
            patterns.insert(m.len(), base_pattern(r, m.len())?);
        }
        let order = pattern_order(&all, &m);
        out.add_scaled(&patterns[&m.len()], w, |x| order[x]);
    }
    Ok(out)
}

/// Exact fractional `K_r`-decomposition of `g` from `(2r+2)`-clique weights
/// whose edge sums all lie in `[1 - 1/(2r+1), 1]`.
pub fn lift_to_exact(g: &Graph, w22: &CliqueWeighting, r: usize) -> Result<CliqueWeighting> {
    if r < 3 {
        return Err(Error::precondition(format!("clique order {r} < 3")));
    }
    if w22.r() != 2 * r + 2 {
        return Err(Error::CliqueOrder { r: w22.r(), n: 2 * r + 2 });
    }
    if let Some((k, _)) = w22.iter().find(|(k, w)| w.is_negative() || !g.is_clique(k.vertices())) {
        return Err(Error::precondition(format!("{k} is not a clique of the graph or has negative weight")));
    }
    let sums = w22.edge_sums();
    let low = slab_low(r);
    let one = Rational::one();
    let mut inv_z: BTreeMap<Edge, Rational> = BTreeMap::new();
    let scale = &one + &one / from_usize(2 * r);
    for e in g.edges() {
        let s = sums.get(&e).cloned().unwrap_or_else(Rational::zero);
        if s < low || s > one {
            let residual = if s < low { &s - &low } else { &s - &one };
            return Err(Error::SlabViolated {
                edge: e,
                sum: s,
                low,
                residual,
            });
        }
        inv_z.insert(e, Rational::one() / (&scale * s));
    }
    let positive: Vec<_> = w22.iter().filter(|(_, w)| w.is_positive()).collect();
    let locals: Vec<(Vec<Vertex>, Rational, CliqueWeighting)> = positive
        .par_iter()
        .map(|(k, w)| {
            let vs = k.vertices();
            let values = vs
                .iter()
                .enumerate()
                .flat_map(|(i, &u)| {
                    vs.iter()
                        .enumerate()
                        .skip(i + 1)
                        .map(move |(j, &v)| (Edge::new(i, j), Edge::new(u, v)))
                })
                .map(|(local, host)| (local, inv_z[&host].clone()))
                .collect();
            let f = EdgeTarget::new(r, values)?;
            Ok((vs.to_vec(), &scale * *w, shape_weights(r, &f)?))
        })
        .collect::<Result<_>>()?;
    let combined = locals
        .par_iter()
        .fold(
            || CliqueWeighting::new(r),
            |mut acc, (vs, w, local)| {
                acc.add_scaled(local, w, |x| vs[x]);
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
