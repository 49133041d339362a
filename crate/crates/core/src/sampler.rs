//! Staged random selection of `2r`-vertex subgraphs containing `M_r`.
//!
//! Stage `i` sets aside `2m` fresh vertices in two halves. The first half is
//! forced to contain every unconsidered non-neighbour of the previous pair,
//! so pairs two or more stages apart are always fully joined. Two vertices
//! are then drawn from the stage: a given pair inside one half with
//! probability `1/m²`, across the halves with probability `1/m³`.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};
use crate::rational::{from_usize, Rational};
use crate::recursion::{partition_m_complement, MatchingPartition};
use crate::rng::StreamRng;
use crate::Matching;

/// Samples per RNG stream.
pub const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerParams {
    pub r: usize,
    pub m: usize,
}

impl SamplerParams {
    /// Checks `|g| = 2rm` with `m >= 2` and `δ(g) >= |g| - m/2`.
    pub fn for_graph(g: &Graph, r: usize) -> Result<Self> {
        if r < 1 {
            return Err(Error::precondition("pattern order must be positive"));
        }
        let n = g.n();
        if n == 0 || n % (2 * r) != 0 {
            return Err(Error::precondition(format!("{n} vertices is not a positive multiple of 2r = {}", 2 * r)));
        }
        let m = n / (2 * r);
        if m < 2 {
            return Err(Error::precondition(format!("block size m = {m} < 2")));
        }
        let delta = g.min_degree();
        if 2 * delta < 2 * n - m {
            return Err(Error::BelowBound(format!(
                "minimum degree {delta} < n - m/2 = {n} - {m}/2"
            )));
        }
        Ok(SamplerParams { r, m })
    }

    pub fn n(&self) -> usize {
        2 * self.r * self.m
    }
}

/// Exact probability of one particular pair under the stage pair law.
pub fn pair_probability(m: usize, same_half: bool) -> Rational {
    let mq = from_usize(m);
    if same_half {
        Rational::from_integer(1.into()) / (&mq * &mq)
    } else {
        Rational::from_integer(1.into()) / (&mq * &mq * &mq)
    }
}

/// Everything drawn during one run of the process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleTrace {
    /// `(A_{i,1}, A_{i,2})` per stage.
    pub halves: Vec<[Vec<Vertex>; 2]>,
    /// Forced part `B_i` of each first half.
    pub forced: Vec<Vec<Vertex>>,
    /// `(a_i, b_i)` per stage.
    pub pairs: Vec<[Vertex; 2]>,
}

impl SampleTrace {
    /// `a_1, b_1, ..., a_r, b_r`.
    pub fn ordered_vertices(&self) -> Vec<Vertex> {
        self.pairs.iter().flatten().copied().collect()
    }

    /// `g` restricted to the chosen vertices, pair `i` on local ids `2i, 2i+1`.
    pub fn local_graph(&self, g: &Graph) -> Graph {
        g.induced(&self.ordered_vertices())
    }

    /// Pairs at least two stages apart are completely joined in `g`.
    pub fn contains_m_pattern(&self, g: &Graph) -> bool {
        let r = self.pairs.len();
        (0..r).all(|i| {
            (i + 2..r).all(|j| self.pairs[i].iter().all(|&x| self.pairs[j].iter().all(|&y| g.has_edge(x, y))))
        })
    }

    /// The complement of the member split into at most five matchings, on local ids.
    pub fn member_partition(&self, g: &Graph) -> Result<MatchingPartition> {
        let local = self.local_graph(g);
        let pattern = partition_m_complement(self.pairs.len());
        let missing: std::collections::BTreeSet<Edge> = local.non_edges().into_iter().collect();
        let covered = pattern.edges();
        if let Some(e) = missing.iter().find(|e| !covered.contains(e)) {
            return Err(Error::InvalidPartition(format!("missing edge {e} is outside the M_r pattern")));
        }
        let parts = pattern
            .parts()
            .iter()
            .map(|p| Matching::new(p.edges().iter().copied().filter(|e| missing.contains(e)).collect()))
            .collect::<Result<Vec<_>>>()?;
        MatchingPartition::new(parts)
    }

    /// Checks the stage invariants against `g`.
    pub fn check(&self, g: &Graph, m: usize) -> Result<()> {
        let mut seen = vec![false; g.n()];
        for (i, [h1, h2]) in self.halves.iter().enumerate() {
            if h1.len() != m || h2.len() != m {
                return Err(Error::precondition(format!("stage {i} halves are not of size {m}")));
            }
            for &v in h1.iter().chain(h2) {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::precondition(format!("vertex {v} considered twice")));
                }
            }
            if !self.forced[i].iter().all(|v| h1.contains(v)) || self.forced[i].len() > m {
                return Err(Error::precondition(format!("forced set of stage {i} escapes its first half")));
            }
            let [a, b] = self.pairs[i];
            if a == b || !h1.iter().chain(h2).any(|&x| x == a) || !h1.iter().chain(h2).any(|&x| x == b) {
                return Err(Error::precondition(format!("pair of stage {i} is not drawn from that stage")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::precondition("some vertex was never considered"));
        }
        Ok(())
    }
}

/// Unconsidered vertices with O(1) removal.
struct Pool {
    items: Vec<Vertex>,
    pos: Vec<usize>,
}

impl Pool {
    fn full(n: usize) -> Self {
        Pool {
            items: (0..n).collect(),
            pos: (0..n).collect(),
        }
    }

    fn contains(&self, v: Vertex) -> bool {
        self.pos[v] != usize::MAX
    }

    fn remove(&mut self, v: Vertex) {
        let i = self.pos[v];
        let last = *self.items.last().expect("non-empty pool");
        self.items.swap_remove(i);
        if last != v {
            self.pos[last] = i;
        }
        self.pos[v] = usize::MAX;
    }

    fn draw(&mut self, rng: &mut StreamRng) -> Vertex {
        let v = self.items[rng.index(self.items.len())];
        self.remove(v);
        v
    }
}

fn run_process(g: &Graph, p: SamplerParams, rng: &mut StreamRng) -> SampleTrace {
    let SamplerParams { r, m } = p;
    let mut pool = Pool::full(g.n());
    let mut trace = SampleTrace {
        halves: Vec::with_capacity(r),
        forced: Vec::with_capacity(r),
        pairs: Vec::with_capacity(r),
    };
    for i in 0..r {
        let mut forced = Vec::new();
        if i > 0 {
            for x in trace.pairs[i - 1] {
                for y in g.non_neighbors(x) {
                    if pool.contains(y) {
                        pool.remove(y);
                        forced.push(y);
                    }
                }
            }
        }
        debug_assert!(forced.len() <= m, "degree bound keeps the forced set within one half");
        let mut h1 = forced.clone();
        while h1.len() < m {
            h1.push(pool.draw(rng));
        }
        let h2: Vec<Vertex> = (0..m).map(|_| pool.draw(rng)).collect();
        let pair = if rng.bernoulli(m as u64 - 1, m as u64) {
            let half = if rng.index(2) == 0 { &h1 } else { &h2 };
            let x = rng.index(m);
            let mut y = rng.index(m - 1);
            if y >= x {
                y += 1;
            }
            [half[x], half[y]]
        } else {
            [h1[rng.index(m)], h2[rng.index(m)]]
        };
        trace.pairs.push(pair);
        trace.halves.push([h1, h2]);
        trace.forced.push(forced);
    }
    trace
}

/// One run of the process on `g` with pattern order `r`.
pub fn sample_subgraph(g: &Graph, r: usize, seed: u64) -> Result<SampleTrace> {
    let p = SamplerParams::for_graph(g, r)?;
    let mut rng = StreamRng::new(seed, 0);
    Ok(run_process(g, p, &mut rng))
}

/// Runs `n_samples` samples split into [`CHUNK`]-sized streams, folding each
/// trace into an accumulator; results do not depend on the thread count.
pub fn fold_samples<A, F, M>(g: &Graph, p: SamplerParams, n_samples: usize, seed: u64, init: impl Fn() -> A + Sync, step: F, merge: M) -> A
where
    A: Send,
    F: Fn(&mut A, &SampleTrace) + Sync,
    M: Fn(A, A) -> A + Sync,
{
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = StreamRng::new(seed, c as u64);
            let mut acc = init();
            let count = CHUNK.min(n_samples - c * CHUNK);
            for _ in 0..count {
                let t = run_process(g, p, &mut rng);
                step(&mut acc, &t);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// Hits and occurrences of one conditioning event, with per-sample moments
/// for a ratio-estimator standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CaseTally {
    pub hits: u64,
    pub occurrences: u64,
    sum_hh: f64,
    sum_oo: f64,
    sum_ho: f64,
}

impl CaseTally {
    fn record(&mut self, hits: u64, occ: u64) {
        self.hits += hits;
        self.occurrences += occ;
        let (h, o) = (hits as f64, occ as f64);
        self.sum_hh += h * h;
        self.sum_oo += o * o;
        self.sum_ho += h * o;
    }

    fn merge(&mut self, o: &CaseTally) {
        self.hits += o.hits;
        self.occurrences += o.occurrences;
        self.sum_hh += o.sum_hh;
        self.sum_oo += o.sum_oo;
        self.sum_ho += o.sum_ho;
    }

    pub fn rate(&self) -> f64 {
        if self.occurrences == 0 {
            0.0
        } else {
            self.hits as f64 / self.occurrences as f64
        }
    }

    /// Standard error of [`Self::rate`] treating samples as the independent units.
    pub fn standard_error(&self) -> f64 {
        if self.occurrences == 0 {
            return 0.0;
        }
        let r = self.rate();
        let o = self.occurrences as f64;
        let resid = self.sum_hh - 2.0 * r * self.sum_ho + r * r * self.sum_oo;
        resid.max(0.0).sqrt() / o
    }
}

/// Where the endpoints of an edge were first considered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeCase {
    DifferentStages = 0,
    SameHalf = 1,
    CrossHalf = 2,
}

/// Monte Carlo edge-inclusion frequencies.
#[derive(Clone, Debug)]
pub struct MarginalEstimates {
    pub params: SamplerParams,
    pub samples: u64,
    pub hits: BTreeMap<Edge, u64>,
    pub cases: [CaseTally; 3],
    /// Samples whose trace failed a structural check.
    pub structural_failures: u64,
}

impl MarginalEstimates {
    pub fn frequency(&self, e: Edge) -> f64 {
        *self.hits.get(&e).unwrap_or(&0) as f64 / self.samples as f64
    }

    /// `m² p̂`.
    pub fn scaled(&self, e: Edge) -> f64 {
        let m = self.params.m as f64;
        m * m * self.frequency(e)
    }

    /// `m² sqrt(p̂(1-p̂)/N)`.
    pub fn standard_error(&self, e: Edge) -> f64 {
        let p = self.frequency(e);
        let m = self.params.m as f64;
        m * m * (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// Three standard errors.
    pub fn half_width(&self, e: Edge) -> f64 {
        3.0 * self.standard_error(e)
    }

    pub fn case(&self, c: EdgeCase) -> &CaseTally {
        &self.cases[c as usize]
    }
}

#[derive(Clone)]
struct Acc {
    hits: Vec<u64>,
    cases: [CaseTally; 3],
    samples: u64,
    failures: u64,
}

/// Estimates `P(e ∈ M)` for every edge from `n_samples` runs.
pub fn estimate_edge_marginals(g: &Graph, r: usize, n_samples: usize, seed: u64) -> Result<MarginalEstimates> {
    if n_samples == 0 {
        return Err(Error::precondition("need at least one sample"));
    }
    let p = SamplerParams::for_graph(g, r)?;
    let n = g.n();
    let index = |u: usize, v: usize| u * n + v;
    let total_edges = g.num_edges() as u64;
    let acc = fold_samples(
        g,
        p,
        n_samples,
        seed,
        || Acc {
            hits: vec![0; n * n],
            cases: [CaseTally::default(); 3],
            samples: 0,
            failures: 0,
        },
        |acc, t| {
            acc.samples += 1;
            if !t.contains_m_pattern(g) {
                acc.failures += 1;
            }
            let mut occ = [0u64; 3];
            let mut hit = [0u64; 3];
            for [h1, h2] in &t.halves {
                for h in [h1, h2] {
                    for (i, &x) in h.iter().enumerate() {
                        for &y in &h[i + 1..] {
                            if g.has_edge(x, y) {
                                occ[1] += 1;
                            }
                        }
                    }
                }
                for &x in h1 {
                    for &y in h2 {
                        if g.has_edge(x, y) {
                            occ[2] += 1;
                        }
                    }
                }
            }
            occ[0] = total_edges - occ[1] - occ[2];
            let vs = t.ordered_vertices();
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let (x, y) = (vs[i], vs[j]);
                    if !g.has_edge(x, y) {
                        continue;
                    }
                    let (u, v) = (x.min(y), x.max(y));
                    acc.hits[index(u, v)] += 1;
                    let case = if i / 2 != j / 2 {
                        0
                    } else {
                        let [h1, _] = &t.halves[i / 2];
                        if h1.contains(&x) == h1.contains(&y) {
                            1
                        } else {
                            2
                        }
                    };
                    hit[case] += 1;
                }
            }
            for c in 0..3 {
                acc.cases[c].record(hit[c], occ[c]);
            }
        },
        |mut a, b| {
            for (x, y) in a.hits.iter_mut().zip(&b.hits) {
                *x += y;
            }
            for c in 0..3 {
                a.cases[c].merge(&b.cases[c]);
            }
            a.samples += b.samples;
            a.failures += b.failures;
            a
        },
    );
    let hits = g
        .edges()
        .into_iter()
        .map(|e| (e, acc.hits[index(e.u(), e.v())]))
        .collect();
    Ok(MarginalEstimates {
        params: p,
        samples: acc.samples,
        hits,
        cases: acc.cases,
        structural_failures: acc.failures,
    })
}

/// `1 - (m-1)/(2rm-1)`: the exact value of `m² P(e ∈ M)` on a complete host,
/// where the stage partition is uniform.
pub fn complete_host_scaled_marginal(r: usize, m: usize) -> Rational {
    Rational::from_integer(1.into()) - from_usize(m - 1) / from_usize(2 * r * m - 1)
}

/// Empirical weights on sampled members: each occurrence counts `m²/N`.
/// An approximation only; nothing here guarantees the slab bounds.
#[derive(Clone, Debug)]
pub struct SampledWeighting {
    pub params: SamplerParams,
    pub samples: u64,
    /// Sorted member vertex sets with occurrence counts.
    pub members: BTreeMap<Vec<Vertex>, u64>,
    pub approximate: bool,
    /// Samples whose complement did not fit the five-matching pattern.
    pub partition_failures: u64,
}

impl SampledWeighting {
    pub fn weight(&self, count: u64) -> Rational {
        let m = from_usize(self.params.m);
        Rational::from_integer(count.into()) * &m * &m / Rational::from_integer(self.samples.into())
    }

    /// Exact edge sums of the empirical weighting.
    pub fn edge_sums(&self, g: &Graph) -> BTreeMap<Edge, Rational> {
        let mut counts: BTreeMap<Edge, u64> = g.edges().into_iter().map(|e| (e, 0)).collect();
        for (vs, c) in &self.members {
            for (i, &u) in vs.iter().enumerate() {
                for &v in &vs[i + 1..] {
                    if let Some(x) = counts.get_mut(&Edge::new(u, v)) {
                        *x += c;
                    }
                }
            }
        }
        counts.into_iter().map(|(e, c)| (e, self.weight(c))).collect()
    }

    /// Mean of [`Self::edge_sums`]; handy for dashboards.
    pub fn mean_edge_sum(&self, g: &Graph) -> Rational {
        let sums = self.edge_sums(g);
        if sums.is_empty() {
            return Rational::zero();
        }
        let total = sums.values().fold(Rational::zero(), |a, x| a + x);
        total / from_usize(sums.len())
    }
}

pub fn approx_weighting_via_sampler(g: &Graph, r_pattern: usize, n_samples: usize, seed: u64) -> Result<SampledWeighting> {
    if n_samples == 0 {
        return Err(Error::precondition("need at least one sample"));
    }
    let p = SamplerParams::for_graph(g, r_pattern)?;
    let (members, failures) = fold_samples(
        g,
        p,
        n_samples,
        seed,
        || (BTreeMap::<Vec<Vertex>, u64>::new(), 0u64),
        |(map, fails), t| {
            if t.member_partition(g).is_err() {
                *fails += 1;
            }
            let mut vs = t.ordered_vertices();
            vs.sort_unstable();
            *map.entry(vs).or_insert(0) += 1;
        },
        |(mut a, fa), (b, fb)| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            (a, fa + fb)
        },
    );
    Ok(SampledWeighting {
        params: p,
        samples: n_samples as u64,
        members,
        approximate: true,
        partition_failures: failures,
    })
}
