//! Degree gate, optional blow-up, approximate `(2r+2)`-weighting, exact lift
//! and projection, as one deterministic run.

use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::correction::{lift_to_exact, slab_low};
use crate::error::{Error, Result};
use crate::graph::{BlowUp, Clique, Graph, Matching};
use crate::lp::{lp_approx_weighting_with, LpConfig};
use crate::rational::{ceil_to_usize, from_usize, ratio, to_f64, to_fraction_string, Rational};
use crate::recursion::{decompose_sparse_complement, partition_two_matchings, required_order, MatchingPartition};
use crate::sampler::{approx_weighting_via_sampler, SamplerParams};
use crate::weighting::{unit_target, verify_weighting, CliqueWeighting, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateBound {
    /// `δ >= (1 - 1/(100r)) n`.
    Main,
    /// `δ >= (1 - 1/(128r+252)) n`.
    Weakened,
}

impl GateBound {
    pub fn threshold(self, r: usize) -> Rational {
        let d = match self {
            GateBound::Main => 100 * r,
            GateBound::Weakened => 128 * r + 252,
        };
        Rational::one() - ratio(1, d as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateReport {
    pub bound: GateBound,
    pub min_degree: usize,
    #[serde(serialize_with = "ser_q")]
    pub required: Rational,
    /// `δ - required`; negative on failure.
    #[serde(serialize_with = "ser_q")]
    pub margin: Rational,
    pub pass: bool,
}

fn ser_q<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_fraction_string(q))
}

pub fn degree_gate(g: &Graph, r: usize, bound: GateBound) -> GateReport {
    let required = bound.threshold(r) * from_usize(g.n());
    let min_degree = g.min_degree();
    let margin = from_usize(min_degree) - &required;
    GateReport {
        bound,
        min_degree,
        pass: !margin.is_negative(),
        required,
        margin,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exact output, verified.
    LpApproxExact,
    /// Sampler statistics only.
    PaperFaithfulValidate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GatePolicy {
    Report,
    Enforce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowUpFactor {
    None,
    Fixed(usize),
    /// Tries the host first, then the default factor capped by the vertex budget.
    Auto,
}

/// `4 ⌈(18r+26)/2⌉`.
pub fn default_blow_up_factor(r: usize) -> usize {
    4 * ceil_to_usize(&ratio(18 * r as i64 + 26, 2))
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub r: usize,
    pub mode: Mode,
    pub blow_up: BlowUpFactor,
    pub gate: GatePolicy,
    pub bound: GateBound,
    pub lp: LpConfig,
    /// Cap on blown-up vertex counts.
    pub max_vertices: usize,
    pub samples: usize,
    pub seed: u64,
    /// Order of the sampled `M`-pattern in validate mode; defaults to `r`.
    pub pattern_r: Option<usize>,
}

impl PipelineConfig {
    pub fn exact(r: usize) -> Self {
        PipelineConfig {
            r,
            mode: Mode::LpApproxExact,
            blow_up: BlowUpFactor::Auto,
            gate: GatePolicy::Report,
            bound: GateBound::Main,
            lp: LpConfig::default(),
            max_vertices: 64,
            samples: 100_000,
            seed: 0,
            pattern_r: None,
        }
    }

    pub fn validate(r: usize) -> Self {
        PipelineConfig {
            mode: Mode::PaperFaithfulValidate,
            ..PipelineConfig::exact(r)
        }
    }
}

/// How the exact weighting was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// LP slab weighting on `(2r+2)`-cliques, then the exact lift.
    LpSlabLift,
    /// Complement split into at most two matchings, then the matching recursion.
    MatchingRecursion,
}

impl Route {
    pub fn lemma_path(self) -> &'static [&'static str] {
        match self {
            Route::LpSlabLift => &["lp-approx-weighting", "correction/shape-weights", "lift-to-exact"],
            Route::MatchingRecursion => &["matching-partition", "matching-recursion", "clique-minus-matching"],
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lemma_path().join(" > "))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub name: &'static str,
    pub detail: String,
}

/// Empirical slab compliance of a sampled weighting.
#[derive(Clone, Debug, Serialize)]
pub struct SlabStatistics {
    pub approximate: bool,
    pub pattern_r: usize,
    pub m: usize,
    pub samples: u64,
    pub slab_low: f64,
    pub min_edge_sum: f64,
    pub max_edge_sum: f64,
    pub mean_edge_sum: f64,
    pub edges: usize,
    pub edges_in_slab: usize,
    pub partition_failures: u64,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub gate: GateReport,
    pub steps: Vec<Step>,
    /// Present in exact mode.
    pub weighting: Option<CliqueWeighting>,
    pub route: Option<Route>,
    pub blow_up: Option<usize>,
    pub verification: Option<VerificationReport>,
    /// Present in validate mode.
    pub slab: Option<SlabStatistics>,
}

impl PipelineOutput {
    /// Construction path behind the weight of `k`, or `None` if `k` carries no weight.
    pub fn provenance(&self, k: &Clique) -> Option<Vec<&'static str>> {
        let w = self.weighting.as_ref()?;
        if w.get(k).is_positive() {
            let mut path = self.route?.lemma_path().to_vec();
            if self.blow_up.is_some() {
                path.push("blow-up-projection");
            }
            Some(path)
        } else {
            None
        }
    }

    pub fn is_verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.pass)
    }
}

/// Pushes a weighting of `b.graph` down to the original graph: each clique
/// gets `1/t²` times the total weight of its preimages.
pub fn project_weighting(b: &BlowUp, w: &CliqueWeighting) -> Result<CliqueWeighting> {
    let t = from_usize(b.factor);
    let scale = Rational::one() / (&t * &t);
    let mut out = CliqueWeighting::new(w.r());
    for (k, x) in w.iter() {
        let image = Clique::try_new(k.vertices().iter().map(|&v| b.project(v)).collect())?;
        if image.order() != w.r() {
            return Err(Error::precondition(format!("{k} projects onto fewer than {} vertices", w.r())));
        }
        out.add(image, x * &scale);
    }
    Ok(out)
}

fn complement_partition(g: &Graph) -> Option<MatchingPartition> {
    let h = g.complement();
    if (0..h.n()).all(|v| h.degree(v) <= 1) {
        let parts = if h.num_edges() == 0 {
            vec![]
        } else {
            vec![Matching::new(h.edges()).ok()?]
        };
        return MatchingPartition::new(parts).ok();
    }
    partition_two_matchings(&h)
}

fn exact_on(g: &Graph, cfg: &PipelineConfig, steps: &mut Vec<Step>) -> Result<(CliqueWeighting, Route)> {
    let r = cfg.r;
    let lp = lp_approx_weighting_with(g, r, &cfg.lp).and_then(|w22| {
        steps.push(Step {
            name: "lp-approx-weighting",
            detail: format!("{} positive ({}-clique) weights on {} vertices", w22.len(), 2 * r + 2, g.n()),
        });
        lift_to_exact(g, &w22, r)
    });
    let lp_err = match lp {
        Ok(w) => {
            steps.push(Step {
                name: "lift-to-exact",
                detail: format!("{} positive {r}-clique weights", w.len()),
            });
            return Ok((w, Route::LpSlabLift));
        }
        Err(e @ (Error::Infeasible(_) | Error::BudgetExceeded { .. })) => e,
        Err(e) => return Err(e),
    };
    steps.push(Step {
        name: "lp-approx-weighting",
        detail: format!("unavailable: {lp_err}"),
    });
    let Some(partition) = complement_partition(g) else {
        return Err(lp_err);
    };
    let need = required_order(r, partition.len());
    if g.n() < need {
        steps.push(Step {
            name: "matching-recursion",
            detail: format!("complement splits into {} matchings but {} vertices < {need}", partition.len(), g.n()),
        });
        return Err(lp_err);
    }
    let w = decompose_sparse_complement(g, r, &partition)?;
    steps.push(Step {
        name: "matching-recursion",
        detail: format!("complement in {} matching(s); {} positive weights", partition.len(), w.len()),
    });
    Ok((w, Route::MatchingRecursion))
}

pub fn run_pipeline(g: &Graph, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    if cfg.r < 3 {
        return Err(Error::precondition(format!("clique order {} < 3", cfg.r)));
    }
    let gate = degree_gate(g, cfg.r, cfg.bound);
    let mut steps = vec![Step {
        name: "degree-gate",
        detail: format!(
            "min degree {} vs required {} (margin {}): {}",
            gate.min_degree,
            to_fraction_string(&gate.required),
            to_fraction_string(&gate.margin),
            if gate.pass { "pass" } else { "fail" }
        ),
    }];
    if !gate.pass && cfg.gate == GatePolicy::Enforce {
        return Err(Error::GateFailed {
            min_degree: gate.min_degree,
            required: gate.required,
            margin: gate.margin,
        });
    }
    let mut out = PipelineOutput {
        gate,
        steps: vec![],
        weighting: None,
        route: None,
        blow_up: None,
        verification: None,
        slab: None,
    };
    match cfg.mode {
        Mode::PaperFaithfulValidate => {
            out.slab = Some(validate(g, cfg, &mut steps)?);
        }
        Mode::LpApproxExact => {
            let (w, route, t) = match cfg.blow_up {
                BlowUpFactor::None => {
                    let (w, route) = exact_on(g, cfg, &mut steps)?;
                    (w, route, None)
                }
                BlowUpFactor::Fixed(t) => {
                    let (w, route) = exact_blown_up(g, cfg, t, &mut steps)?;
                    (w, route, Some(t))
                }
                BlowUpFactor::Auto => match exact_on(g, cfg, &mut steps) {
                    Ok((w, route)) => (w, route, None),
                    Err(e @ (Error::Infeasible(_) | Error::BudgetExceeded { .. })) => {
                        let t = default_blow_up_factor(cfg.r).min(cfg.max_vertices / g.n().max(1));
                        if t < 2 {
                            return Err(e);
                        }
                        let (w, route) = exact_blown_up(g, cfg, t, &mut steps)?;
                        (w, route, Some(t))
                    }
                    Err(e) => return Err(e),
                },
            };
            let report = verify_weighting(g, &w, unit_target);
            steps.push(Step {
                name: "verify",
                detail: format!("{} edges, {} violations", report.edges_checked, report.violations.len()),
            });
            if !report.pass {
                return Err(Error::VerificationFailed {
                    violations: report.violations.len() + report.negative.len() + report.invalid_cliques.len(),
                });
            }
            out.weighting = Some(w);
            out.route = Some(route);
            out.blow_up = t;
            out.verification = Some(report);
        }
    }
    out.steps = steps;
    Ok(out)
}

fn exact_blown_up(g: &Graph, cfg: &PipelineConfig, t: usize, steps: &mut Vec<Step>) -> Result<(CliqueWeighting, Route)> {
    let size = g.n() as u128 * t as u128;
    if size > cfg.max_vertices as u128 {
        return Err(Error::BudgetExceeded {
            what: "blown-up vertex count",
            requested: size,
            budget: cfg.max_vertices as u128,
        });
    }
    let b = g.blow_up(t)?;
    steps.push(Step {
        name: "blow-up",
        detail: format!("factor {t}: {} vertices", b.graph.n()),
    });
    let (w, route) = exact_on(&b.graph, cfg, steps)?;
    let projected = project_weighting(&b, &w)?;
    steps.push(Step {
        name: "blow-up-projection",
        detail: format!("1/{} push-down onto {} cliques", t * t, projected.len()),
    });
    Ok((projected, route))
}

fn validate(g: &Graph, cfg: &PipelineConfig, steps: &mut Vec<Step>) -> Result<SlabStatistics> {
    let pr = cfg.pattern_r.unwrap_or(cfg.r);
    let params = SamplerParams::for_graph(g, pr)?;
    let sw = approx_weighting_via_sampler(g, pr, cfg.samples, cfg.seed)?;
    let sums = sw.edge_sums(g);
    let low = slab_low(cfg.r);
    let one = Rational::one();
    let vals: Vec<f64> = sums.values().map(to_f64).collect();
    let in_slab = sums.values().filter(|s| **s >= low && **s <= one).count();
    let stats = SlabStatistics {
        approximate: true,
        pattern_r: pr,
        m: params.m,
        samples: sw.samples,
        slab_low: to_f64(&low),
        min_edge_sum: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max_edge_sum: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_edge_sum: vals.iter().sum::<f64>() / vals.len().max(1) as f64,
        edges: vals.len(),
        edges_in_slab: in_slab,
        partition_failures: sw.partition_failures,
    };
    steps.push(Step {
        name: "sampler",
        detail: format!(
            "{} samples of M_{pr}, m = {}: {}/{} edges in the slab (approximate)",
            stats.samples, stats.m, stats.edges_in_slab, stats.edges
        ),
    });
    Ok(stats)
}
