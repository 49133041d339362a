//! Clique weightings and the exact certificate verifier.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::graph::{Clique, Edge, Graph, Vertex};
use crate::rational::{to_fraction_string, Rational};

/// Non-negative weights on `r`-cliques. Zero weights are not stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CliqueWeighting {
    r: usize,
    weights: BTreeMap<Clique, Rational>,
}

impl CliqueWeighting {
    pub fn new(r: usize) -> Self {
        CliqueWeighting {
            r,
            weights: BTreeMap::new(),
        }
    }

    /// A single clique with weight one.
    pub fn unit(clique: Clique) -> Self {
        let mut w = CliqueWeighting::new(clique.order());
        w.add(clique, Rational::one());
        w
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, k: &Clique) -> Rational {
        self.weights.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Clique, &Rational)> {
        self.weights.iter()
    }

    /// Adds `w` to the weight of `k`. Panics if `k` has the wrong order.
    pub fn add(&mut self, k: Clique, w: Rational) {
        assert_eq!(k.order(), self.r, "clique order mismatch");
        if w.is_zero() {
            return;
        }
        match self.weights.entry(k) {
            Entry::Vacant(v) => {
                v.insert(w);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += w;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Accumulates `factor * other`, relabelling `other`'s vertices through `relabel`.
    pub fn add_scaled(&mut self, other: &CliqueWeighting, factor: &Rational, relabel: impl Fn(Vertex) -> Vertex) {
        if factor.is_zero() {
            return;
        }
        for (k, w) in other.iter() {
            self.add(k.map(&relabel), w * factor);
        }
    }

    pub fn scaled(&self, factor: &Rational) -> CliqueWeighting {
        let mut out = CliqueWeighting::new(self.r);
        out.add_scaled(self, factor, |x| x);
        out
    }

    pub fn relabelled(&self, relabel: impl Fn(Vertex) -> Vertex) -> CliqueWeighting {
        let mut out = CliqueWeighting::new(self.r);
        out.add_scaled(self, &Rational::one(), relabel);
        out
    }

    /// Weight over every edge touched by some clique.
    pub fn edge_sums(&self) -> BTreeMap<Edge, Rational> {
        let mut sums: BTreeMap<Edge, Rational> = BTreeMap::new();
        for (k, w) in &self.weights {
            for e in k.edges() {
                *sums.entry(e).or_insert_with(Rational::zero) += w;
            }
        }
        sums
    }

    pub fn total(&self) -> Rational {
        self.weights.values().fold(Rational::zero(), |acc, w| acc + w)
    }

    pub fn min_weight(&self) -> Option<&Rational> {
        self.weights.values().min()
    }
}

impl FromIterator<(Clique, Rational)> for CliqueWeighting {
    /// Panics on an empty iterator; use [`CliqueWeighting::new`] for that.
    fn from_iter<I: IntoIterator<Item = (Clique, Rational)>>(iter: I) -> Self {
        let mut it = iter.into_iter().peekable();
        let r = it.peek().expect("non-empty weighting").0.order();
        let mut w = CliqueWeighting::new(r);
        for (k, x) in it {
            w.add(k, x);
        }
        w
    }
}

/// One edge whose weight differs from its target.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct EdgeResidual {
    pub edge: Edge,
    #[serde(serialize_with = "ser_q")]
    pub expected: Rational,
    #[serde(serialize_with = "ser_q")]
    pub actual: Rational,
    /// `expected - actual`.
    #[serde(serialize_with = "ser_q")]
    pub residual: Rational,
}

fn ser_q<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_fraction_string(q))
}

/// Outcome of [`verify_weighting`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub edges_checked: usize,
    pub violations: Vec<EdgeResidual>,
    /// Cliques carrying a negative weight.
    pub negative: Vec<Clique>,
    /// Keys that are not `r`-cliques of the graph.
    pub invalid_cliques: Vec<Clique>,
}

/// Checks exactly that every edge of `g` has weight `target(e)` and that all
/// weights are non-negative cliques of `g`.
pub fn verify_weighting(g: &Graph, w: &CliqueWeighting, target: impl Fn(Edge) -> Rational) -> VerificationReport {
    let mut report = VerificationReport::default();
    let mut sums: BTreeMap<Edge, Rational> = BTreeMap::new();
    for (k, x) in w.iter() {
        let valid = k.order() == w.r()
            && k.vertices().last().is_none_or(|&v| v < g.n())
            && g.is_clique(k.vertices());
        if !valid {
            report.invalid_cliques.push(k.clone());
        }
        if x.is_negative() {
            report.negative.push(k.clone());
        }
        for e in k.edges() {
            *sums.entry(e).or_insert_with(Rational::zero) += x;
        }
    }
    for e in g.edges() {
        report.edges_checked += 1;
        let expected = target(e);
        let actual = sums.remove(&e).unwrap_or_else(Rational::zero);
        if actual != expected {
            report.violations.push(EdgeResidual {
                edge: e,
                residual: &expected - &actual,
                expected,
                actual,
            });
        }
    }
    report.pass = report.violations.is_empty() && report.negative.is_empty() && report.invalid_cliques.is_empty();
    report
}

pub fn unit_target(_: Edge) -> Rational {
    Rational::one()
}
