use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use fracdecomp::correction::{lift_to_exact, shape_weights, EdgeTarget};
use fracdecomp::families::{self, FamilyDistribution, FamilyKind};
use fracdecomp::io;
use fracdecomp::kminusm::{class_weights, decompose_clique_minus_matching, MatchingRemovedInstance};
use fracdecomp::lp::{lp_feasible_with, LpConfig, LpOutcome};
use fracdecomp::pipeline::{run_pipeline, BlowUpFactor, GateBound, GatePolicy, Mode, PipelineConfig};
use fracdecomp::rational::{to_fraction_string, Rational};
use fracdecomp::recursion::decompose_sparse_complement;
use fracdecomp::sampler::{estimate_edge_marginals, fold_samples, EdgeCase, SamplerParams};
use fracdecomp::weighting::unit_target;
use fracdecomp::{verify_weighting, CliqueWeighting, Edge, Error, Graph, VerificationReport};

use crate::report::{residuals_of, InputDigest, Residual, Verdict};
use crate::{BoundArg, Command, FamilyArg, ModeArg};

const RESIDUAL_LIMIT: usize = 20;

pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// Verdict and whether the failure is a usage or input problem.
    pub fn classify(&self) -> (Verdict, bool) {
        match self {
            CliError::Usage(_) => (Verdict::Error, true),
            CliError::Core(e) => match e {
                Error::Infeasible(_) => (Verdict::Infeasible, false),
                Error::GateFailed { .. }
                | Error::VerificationFailed { .. }
                | Error::SlabViolated { .. }
                | Error::MarginalBelowTarget { .. }
                | Error::BudgetExceeded { .. } => (Verdict::Fail, false),
                Error::MemberDecomposition(_) => (Verdict::Error, false),
                _ => (Verdict::Error, true),
            },
        }
    }
}

pub struct Outcome {
    pub verdict: Verdict,
    pub artifact: Option<String>,
    pub residuals: Vec<Residual>,
    pub details: Value,
    pub seed: Option<u64>,
}

type Res = Result<Outcome, CliError>;

fn read(path: &Path, digest: &mut InputDigest) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    digest.add("file", text.as_bytes());
    Ok(text)
}

fn in_file<T>(path: &Path, r: fracdecomp::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, digest: &mut InputDigest) -> Result<Graph, CliError> {
    let text = read(path, digest)?;
    in_file(path, io::parse_graph(&text))
}

fn load_weighting(path: &Path, digest: &mut InputDigest) -> Result<CliqueWeighting, CliError> {
    let text = read(path, digest)?;
    in_file(path, io::parse_weighting(&text))
}

fn load_targets(path: &Path, digest: &mut InputDigest) -> Result<BTreeMap<Edge, Rational>, CliError> {
    let text = read(path, digest)?;
    in_file(path, io::parse_targets(&text))
}

fn target_fn(t: Option<BTreeMap<Edge, Rational>>) -> impl Fn(Edge) -> Rational {
    move |e| t.as_ref().and_then(|m| m.get(&e).cloned()).unwrap_or_else(|| unit_target(e))
}

fn verification_details(v: &VerificationReport) -> Value {
    json!({
        "edges_checked": v.edges_checked,
        "violations": v.violations.len(),
        "negative": v.negative.len(),
        "invalid_cliques": v.invalid_cliques.len(),
    })
}

/// Weighting artifact plus the verdict of re-verifying it against `g`.
fn verified(g: &Graph, w: &CliqueWeighting, target: impl Fn(Edge) -> Rational, mut details: Value) -> Outcome {
    let v = verify_weighting(g, w, target);
    details["verification"] = verification_details(&v);
    details["cliques"] = json!(w.len());
    Outcome {
        verdict: if v.pass { Verdict::Pass } else { Verdict::Fail },
        artifact: Some(io::write_weighting(w)),
        residuals: residuals_of(&v, RESIDUAL_LIMIT),
        details,
        seed: None,
    }
}

pub fn run(cmd: &Command, digest: &mut InputDigest) -> Res {
    match cmd {
        Command::Verify { graph, weights, target } => {
            let g = load_graph(graph, digest)?;
            let w = load_weighting(weights, digest)?;
            let t = target.as_deref().map(|p| load_targets(p, digest)).transpose()?;
            let mut out = verified(&g, &w, target_fn(t), json!({ "r": w.r() }));
            out.artifact = None;
            Ok(out)
        }
        Command::DecomposeKminusm { r, k, matching, compressed } => {
            let m = io::parse_matching(matching).map_err(|e| CliError::Usage(format!("--matching: {e}")))?;
            let inst = MatchingRemovedInstance::new(*r, *k, m.clone())?;
            let w = decompose_clique_minus_matching(*r, *k, &m)?;
            let mut out = verified(&inst.graph(), &w, unit_target, json!({ "r": r, "k": k, "matching_size": m.len() }));
            if *compressed {
                let cw = class_weights(*r, *k, m.len())?;
                let per_type: BTreeMap<String, String> = cw
                    .per_type
                    .iter()
                    .map(|(l, x)| (l.to_string(), to_fraction_string(x)))
                    .collect();
                let doc = json!({ "r": r, "k": k, "matching": io::write_matching(&m), "per_type": per_type });
                out.artifact = Some(serde_json::to_string_pretty(&doc).expect("json") + "\n");
            }
            Ok(out)
        }
        Command::DecomposeSparse { r, graph, partition } => {
            let g = load_graph(graph, digest)?;
            let text = read(partition, digest)?;
            let p = in_file(partition, io::parse_partition(&text))?;
            let w = decompose_sparse_complement(&g, *r, &p)?;
            Ok(verified(&g, &w, unit_target, json!({ "r": r, "matchings": p.len() })))
        }
        Command::FamilyMarginals {
            kind,
            r,
            k,
            ell,
            chosen,
            enumerate,
            budget,
        } => family_marginals(*kind, *r, *k, *ell, *chosen, *enumerate, *budget),
        Command::Correct { r, targets } => {
            let t = load_targets(targets, digest)?;
            let f = EdgeTarget::new(*r, t.clone())?;
            let w = shape_weights(*r, &f)?;
            let g = Graph::complete(2 * r + 2);
            Ok(verified(&g, &w, target_fn(Some(t)), json!({ "r": r })))
        }
        Command::Lift { r, graph, weights } => {
            let g = load_graph(graph, digest)?;
            let w22 = load_weighting(weights, digest)?;
            let w = lift_to_exact(&g, &w22, *r)?;
            Ok(verified(&g, &w, unit_target, json!({ "r": r, "input_cliques": w22.len() })))
        }
        Command::Sample {
            graph,
            r,
            n_samples,
            seed,
            marginals,
        } => {
            let g = load_graph(graph, digest)?;
            if *marginals {
                sample_marginals(&g, *r, *n_samples, *seed)
            } else {
                sample_traces(&g, *r, *n_samples, *seed)
            }
        }
        Command::LpCheck {
            graph,
            r,
            target,
            max_variables,
        } => {
            let g = load_graph(graph, digest)?;
            let t = target.as_deref().map(|p| load_targets(p, digest)).transpose()?;
            let tf = target_fn(t);
            let cfg = LpConfig {
                max_variables: *max_variables,
            };
            match lp_feasible_with(&g, *r, &tf, &cfg)? {
                LpOutcome::Feasible(w) => Ok(verified(&g, &w, &tf, json!({ "r": r, "lp": "feasible" }))),
                LpOutcome::Infeasible(c) => {
                    let valid = c.check(&g, &tf);
                    let objective = c.objective(&g, &tf);
                    let doc = io::certificate_to_value(&c);
                    Ok(Outcome {
                        verdict: if valid { Verdict::Infeasible } else { Verdict::Error },
                        artifact: Some(serde_json::to_string_pretty(&doc).expect("json") + "\n"),
                        residuals: vec![Residual::message(format!(
                            "no fractional K_{r}-decomposition; certificate objective {}",
                            to_fraction_string(&objective)
                        ))],
                        details: json!({ "r": r, "lp": "infeasible", "certificate_valid": valid }),
                        seed: None,
                    })
                }
            }
        }
        Command::Decompose {
            graph,
            r,
            mode,
            blow_up,
            enforce_gate,
            bound,
            max_vertices,
            max_variables,
            n_samples,
            seed,
            pattern_r,
        } => {
            let g = load_graph(graph, digest)?;
            let blow = match blow_up.as_str() {
                "auto" => BlowUpFactor::Auto,
                "none" | "1" => BlowUpFactor::None,
                s => match s.parse::<usize>() {
                    Ok(t) if t >= 1 => BlowUpFactor::Fixed(t),
                    _ => return Err(CliError::Usage(format!("--blow-up {s:?}: expected a positive integer, auto or none"))),
                },
            };
            let mut cfg = match mode {
                ModeArg::Exact => PipelineConfig::exact(*r),
                ModeArg::Validate => PipelineConfig::validate(*r),
            };
            cfg.blow_up = blow;
            cfg.gate = if *enforce_gate { GatePolicy::Enforce } else { GatePolicy::Report };
            cfg.bound = match bound {
                BoundArg::Main => GateBound::Main,
                BoundArg::Weakened => GateBound::Weakened,
            };
            cfg.max_vertices = *max_vertices;
            cfg.lp = LpConfig {
                max_variables: *max_variables,
            };
            cfg.samples = *n_samples;
            cfg.seed = *seed;
            cfg.pattern_r = *pattern_r;
            decompose(&g, &cfg)
        }
    }
}

fn decompose(g: &Graph, cfg: &PipelineConfig) -> Res {
    let out = run_pipeline(g, cfg)?;
    let mut details = json!({
        "r": cfg.r,
        "mode": cfg.mode,
        "gate": out.gate,
        "steps": out.steps,
    });
    match cfg.mode {
        Mode::LpApproxExact => {
            let w = out.weighting.as_ref().expect("exact mode yields a weighting");
            let route = out.route.expect("exact mode records its route");
            details["route"] = json!(route.lemma_path());
            details["blow_up"] = json!(out.blow_up);
            let mut o = verified(g, w, unit_target, details);
            let mut path = route.lemma_path().to_vec();
            if out.blow_up.is_some() {
                path.push("blow-up-projection");
            }
            o.artifact = Some(io::write_weighting_with(w, &[("provenance", json!(path))]));
            Ok(o)
        }
        Mode::PaperFaithfulValidate => {
            let s = out.slab.expect("validate mode yields statistics");
            let in_slab = s.edges_in_slab == s.edges;
            let residuals = if in_slab {
                vec![]
            } else {
                vec![Residual::message(format!(
                    "{} of {} edges have empirical sums outside the slab",
                    s.edges - s.edges_in_slab,
                    s.edges
                ))]
            };
            let artifact = serde_json::to_string_pretty(&s).expect("json") + "\n";
            details["slab"] = json!(s);
            Ok(Outcome {
                verdict: if in_slab { Verdict::Pass } else { Verdict::Fail },
                artifact: Some(artifact),
                residuals,
                details,
                seed: Some(cfg.seed),
            })
        }
    }
}

fn q(x: &Rational) -> String {
    to_fraction_string(x)
}

#[allow(clippy::too_many_arguments)]
fn family_marginals(
    kind: FamilyArg,
    r: usize,
    k: Option<usize>,
    ell: Option<usize>,
    chosen: Option<usize>,
    enumerate: bool,
    budget: u128,
) -> Res {
    let (fk, groups) = match kind {
        FamilyArg::W => (FamilyKind::W, k.ok_or_else(|| CliError::Usage("--k is required for --kind w".into()))?),
        FamilyArg::M => (FamilyKind::M, ell.ok_or_else(|| CliError::Usage("--ell is required for --kind m".into()))?),
    };
    let host = Graph::complete(4 * groups);
    let (d, target): (FamilyDistribution, Option<Rational>) = match chosen {
        Some(c) => (FamilyDistribution::raw(&host, fk, families::consecutive_groups(groups), c)?, None),
        None => match fk {
            FamilyKind::W => (families::w_family(&host, r)?, Some(families::w_target(r, groups))),
            FamilyKind::M => (
                families::m_family(&host, r)?,
                Some(families::m_target(families::m_family_k(r), groups)),
            ),
        },
    };
    let classes = [("intra", Edge::new(0, 1)), ("cross", Edge::new(0, 4))];
    let enumerated = if enumerate {
        let support = d.enumerate(budget)?;
        Some(families::enumerated_marginals(&host, &support))
    } else {
        None
    };
    let mut residuals = Vec::new();
    if let Some(em) = &enumerated {
        for e in host.edges() {
            let closed = d.marginal(e);
            if em[&e] != closed {
                residuals.push(Residual {
                    edge: Some(e.endpoints()),
                    expected: Some(q(&closed)),
                    actual: Some(q(&em[&e])),
                    residual: Some(q(&(&closed - &em[&e]))),
                    message: format!("enumerated marginal of {e} differs from the closed form"),
                });
            }
        }
    }
    let (intra, cross) = (d.base_marginal(classes[0].1), d.base_marginal(classes[1].1));
    if target.is_some() && intra < cross {
        residuals.push(Residual::message(format!("intra marginal {} < cross marginal {}", q(&intra), q(&cross))));
    }
    let mut table = String::from("class,base_marginal,keep_probability,marginal,target,enumerated\n");
    let mut rows = Vec::new();
    for (name, e) in classes {
        let em = enumerated.as_ref().map(|m| q(&m[&e])).unwrap_or_default();
        let t = target.as_ref().map(q).unwrap_or_default();
        table.push_str(&format!(
            "{name},{},{},{},{t},{em}\n",
            q(&d.base_marginal(e)),
            q(&d.keep_probability(e)),
            q(&d.marginal(e))
        ));
        rows.push(json!({ "class": name, "marginal": q(&d.marginal(e)) }));
    }
    Ok(Outcome {
        verdict: if residuals.is_empty() { Verdict::Pass } else { Verdict::Fail },
        artifact: Some(table),
        residuals,
        details: json!({
            "kind": format!("{fk:?}"),
            "r": r,
            "groups": groups,
            "chosen": d.chosen(),
            "adjusted": target.is_some(),
            "enumerated": enumerate,
            "classes": rows,
        }),
        seed: None,
    })
}

fn sample_marginals(g: &Graph, r: usize, n: usize, seed: u64) -> Res {
    let est = estimate_edge_marginals(g, r, n, seed)?;
    let mut csv = String::from("u,v,estimate,halfwidth\n");
    for &e in est.hits.keys() {
        csv.push_str(&format!("{},{},{},{}\n", e.u(), e.v(), est.scaled(e), est.half_width(e)));
    }
    let case = |c: EdgeCase| {
        let t = est.case(c);
        json!({ "hits": t.hits, "occurrences": t.occurrences, "rate": t.rate(), "standard_error": t.standard_error() })
    };
    Ok(Outcome {
        verdict: if est.structural_failures == 0 { Verdict::Pass } else { Verdict::Fail },
        artifact: Some(csv),
        residuals: if est.structural_failures == 0 {
            vec![]
        } else {
            vec![Residual::message(format!("{} samples lack a spanning M_{r}", est.structural_failures))]
        },
        details: json!({
            "approximate": true,
            "r": r,
            "m": est.params.m,
            "samples": est.samples,
            "scale": "m^2",
            "conditional": {
                "different_stages": case(EdgeCase::DifferentStages),
                "same_half": case(EdgeCase::SameHalf),
                "cross_half": case(EdgeCase::CrossHalf),
            },
        }),
        seed: Some(seed),
    })
}

fn sample_traces(g: &Graph, r: usize, n: usize, seed: u64) -> Res {
    if n == 0 {
        return Err(CliError::Usage("--n-samples must be positive".into()));
    }
    let p = SamplerParams::for_graph(g, r)?;
    let rows = fold_samples(
        g,
        p,
        n,
        seed,
        Vec::new,
        |acc: &mut Vec<(Vec<usize>, bool)>, t| acc.push((t.ordered_vertices(), t.contains_m_pattern(g))),
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let mut csv = String::from("sample,vertices\n");
    let mut failures = 0;
    for (i, (vs, ok)) in rows.iter().enumerate() {
        failures += usize::from(!ok);
        let list: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!("{i},{}\n", list.join(" ")));
    }
    Ok(Outcome {
        verdict: if failures == 0 { Verdict::Pass } else { Verdict::Fail },
        artifact: Some(csv),
        residuals: if failures == 0 {
            vec![]
        } else {
            vec![Residual::message(format!("{failures} samples lack a spanning M_{r}"))]
        },
        details: json!({ "approximate": true, "r": r, "m": p.m, "samples": n }),
        seed: Some(seed),
    })
}
