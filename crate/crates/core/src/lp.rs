//! Exact rational LP feasibility for fractional decompositions.
//!
//! Phase-one simplex on a dense tableau with Bland's rule. Artificial columns
//! are kept to the end so that an infeasible run can read a Farkas
//! certificate straight off their reduced costs.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Clique, Edge, Graph};
use crate::rational::{from_usize, to_f64, to_fraction_string, Rational};
use crate::weighting::CliqueWeighting;

/// Default cap on the number of LP variables.
pub const DEFAULT_MAX_VARIABLES: usize = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct LpConfig {
    pub max_variables: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            max_variables: DEFAULT_MAX_VARIABLES,
        }
    }
}

/// Edge multipliers `y` with `Σ_{e∈K} y_e <= 0` for every clique `K` and
/// `Σ_e y_e target(e) > 0`; no non-negative weighting can then exist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FarkasCertificate {
    pub r: usize,
    #[serde(serialize_with = "ser_multipliers")]
    pub multipliers: BTreeMap<Edge, Rational>,
}

fn ser_multipliers<S: serde::Serializer>(m: &BTreeMap<Edge, Rational>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for (e, y) in m {
        seq.serialize_element(&(e, to_fraction_string(y)))?;
    }
    seq.end()
}

impl FarkasCertificate {
    pub fn y(&self, e: Edge) -> Rational {
        self.multipliers.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Σ_e y_e target(e)`.
    pub fn objective(&self, g: &Graph, target: impl Fn(Edge) -> Rational) -> Rational {
        g.edges()
            .into_iter()
            .fold(Rational::zero(), |acc, e| acc + self.y(e) * target(e))
    }

    /// Checks both defining inequalities exactly.
    pub fn check(&self, g: &Graph, target: impl Fn(Edge) -> Rational) -> bool {
        if self.multipliers.keys().any(|e| !g.contains_edge(*e)) {
            return false;
        }
        if !self.objective(g, target).is_positive() {
            return false;
        }
        let cliques = if self.r <= g.n() {
            g.enumerate_cliques(self.r).unwrap_or_default()
        } else {
            Vec::new()
        };
        cliques
            .iter()
            .all(|k| !k.edges().fold(Rational::zero(), |acc, e| acc + self.y(e)).is_positive())
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Feasible(CliqueWeighting),
    Infeasible(FarkasCertificate),
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

enum PhaseOne {
    Feasible(Vec<Rational>),
    /// Dual multipliers per (original-sign) row.
    Infeasible(Vec<Rational>),
}

const BLAND_AFTER: usize = 32;

/// Finds `x >= 0` with `A x = b`; `columns[j]` lists the nonzeros of column `j`.
///
/// A floating-point simplex proposes a basis; the basic solution or the
/// dual of that basis is then checked in exact arithmetic. If neither check
/// passes the exact tableau simplex decides.
fn phase_one(rows: usize, columns: &[Vec<(usize, Rational)>], b: &[Rational]) -> PhaseOne {
    if let Some(basis) = float_basis(rows, columns, b) {
        if let Some(out) = certify_basis(rows, columns, b, &basis) {
            return out;
        }
    }
    exact_phase_one(rows, columns, b)
}

const EPS: f64 = 1e-9;

fn float_basis(rows: usize, columns: &[Vec<(usize, Rational)>], b: &[Rational]) -> Option<Vec<usize>> {
    let n = columns.len();
    let width = n + rows;
    let sign: Vec<f64> = b.iter().map(|x| if x.is_negative() { -1.0 } else { 1.0 }).collect();
    let mut t = vec![vec![0.0f64; width]; rows];
    let mut rhs: Vec<f64> = b.iter().map(|x| to_f64(&x.abs())).collect();
    for (j, col) in columns.iter().enumerate() {
        for (i, a) in col {
            t[*i][j] = sign[*i] * to_f64(a);
        }
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    let mut basis: Vec<usize> = (n..width).collect();
    let mut cost = vec![0.0f64; width];
    for row in &t {
        for j in 0..n {
            cost[j] -= row[j];
        }
    }
    let mut degenerate = 0usize;
    for _ in 0..50 * (rows + width) {
        let enter = if degenerate < BLAND_AFTER {
            let mut best: Option<usize> = None;
            for j in 0..width {
                if cost[j] < -EPS && best.is_none_or(|b| cost[j] < cost[b]) {
                    best = Some(j);
                }
            }
            best
        } else {
            (0..width).find(|&j| cost[j] < -EPS)
        };
        let Some(enter) = enter else {
            return Some(basis);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            if t[i][enter] > EPS {
                let ratio = rhs[i] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (p, _) = leave?;
        let piv = t[p][enter];
        for x in t[p].iter_mut() {
            *x /= piv;
        }
        rhs[p] /= piv;
        let prow: Vec<(usize, f64)> = (0..width).filter(|&j| t[p][j] != 0.0).map(|j| (j, t[p][j])).collect();
        let prhs = rhs[p];
        for i in 0..rows {
            if i == p || t[i][enter] == 0.0 {
                continue;
            }
            let f = t[i][enter];
            for &(j, a) in &prow {
                t[i][j] -= f * a;
            }
            t[i][enter] = 0.0;
            rhs[i] -= f * prhs;
            if rhs[i].abs() < EPS {
                rhs[i] = 0.0;
            }
        }
        let f = cost[enter];
        for &(j, a) in &prow {
            cost[j] -= f * a;
        }
        cost[enter] = 0.0;
        degenerate = if prhs.abs() < EPS { degenerate + 1 } else { 0 };
        basis[p] = enter;
    }
    None
}

/// Solves `m z = v` exactly; `None` if `m` is singular.
fn solve(mut m: Vec<Vec<Rational>>, mut v: Vec<Rational>) -> Option<Vec<Rational>> {
    let size = v.len();
    for c in 0..size {
        let p = (c..size).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        v.swap(c, p);
        let piv = m[c][c].clone();
        let prow: Vec<(usize, Rational)> = (c..size)
            .filter(|&j| !m[c][j].is_zero())
            .map(|j| (j, &m[c][j] / &piv))
            .collect();
        let pv = &v[c] / &piv;
        for i in 0..size {
            if i == c || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for (j, a) in &prow {
                m[i][*j] -= &f * a;
            }
            v[i] -= &f * &pv;
        }
        for (j, a) in prow {
            m[c][j] = a;
        }
        v[c] = pv;
    }
    Some(v)
}

fn certify_basis(rows: usize, columns: &[Vec<(usize, Rational)>], b: &[Rational], basis: &[usize]) -> Option<PhaseOne> {
    let n = columns.len();
    let sign: Vec<bool> = b.iter().map(|x| x.is_negative()).collect();
    let adjusted = |i: usize, a: &Rational| if sign[i] { -a.clone() } else { a.clone() };
    let mut bm = vec![vec![Rational::zero(); rows]; rows];
    for (k, &col) in basis.iter().enumerate() {
        if col < n {
            for (i, a) in &columns[col] {
                bm[*i][k] = adjusted(*i, a);
            }
        } else {
            bm[col - n][k] = Rational::one();
        }
    }
    let abs_b: Vec<Rational> = b.iter().map(|x| x.abs()).collect();
    let xb = solve(bm.clone(), abs_b.clone())?;
    if xb.iter().zip(basis).all(|(x, &col)| !x.is_negative() && (col < n || x.is_zero())) {
        let mut x = vec![Rational::zero(); n];
        for (v, &col) in xb.into_iter().zip(basis) {
            if col < n {
                x[col] = v;
            }
        }
        return Some(PhaseOne::Feasible(x));
    }
    let bt: Vec<Vec<Rational>> = (0..rows).map(|k| (0..rows).map(|i| bm[i][k].clone()).collect()).collect();
    let cb: Vec<Rational> = basis
        .iter()
        .map(|&col| if col >= n { Rational::one() } else { Rational::zero() })
        .collect();
    let y = solve(bt, cb)?;
    let dot_b = y.iter().zip(&abs_b).fold(Rational::zero(), |acc, (y, b)| acc + y * b);
    if !dot_b.is_positive() {
        return None;
    }
    let dual_ok = columns.iter().all(|col| {
        let s = col.iter().fold(Rational::zero(), |acc, (i, a)| acc + &y[*i] * adjusted(*i, a));
        !s.is_positive()
    });
    if !dual_ok {
        return None;
    }
    Some(PhaseOne::Infeasible(
        y.into_iter().zip(&sign).map(|(v, &neg)| if neg { -v } else { v }).collect(),
    ))
}

/// Exact phase one on the full tableau.
fn exact_phase_one(rows: usize, columns: &[Vec<(usize, Rational)>], b: &[Rational]) -> PhaseOne {
    let n = columns.len();
    let width = n + rows;
    let sign: Vec<bool> = b.iter().map(|x| x.is_negative()).collect();
    let mut t: Vec<Vec<Rational>> = vec![vec![Rational::zero(); width]; rows];
    let mut rhs: Vec<Rational> = b.iter().map(|x| x.abs()).collect();
    for (j, col) in columns.iter().enumerate() {
        for (i, a) in col {
            t[*i][j] = if sign[*i] { -a.clone() } else { a.clone() };
        }
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[n + i] = Rational::one();
    }
    let mut basis: Vec<usize> = (n..width).collect();
    // reduced costs of the phase-one objective Σ artificials
    let mut cost: Vec<Rational> = vec![Rational::zero(); width];
    for row in &t {
        for j in 0..n {
            if !row[j].is_zero() {
                cost[j] -= &row[j];
            }
        }
    }
    let mut objective: Rational = rhs.iter().fold(Rational::zero(), |a, x| a + x);

    // Dantzig pricing, with Bland's rule once degenerate pivots pile up.
    let mut degenerate = 0usize;
    loop {
        let enter = if degenerate < BLAND_AFTER {
            let mut best: Option<usize> = None;
            for j in 0..width {
                if cost[j].is_negative() && best.is_none_or(|b| cost[j] < cost[b]) {
                    best = Some(j);
                }
            }
            best
        } else {
            (0..width).find(|&j| cost[j].is_negative())
        };
        let Some(enter) = enter else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &rhs[i] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (p, _) = leave.expect("phase one is bounded below by zero");
        let piv = t[p][enter].clone();
        if !piv.is_one() {
            for x in t[p].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
            rhs[p] /= &piv;
        }
        let support: Vec<usize> = (0..width).filter(|&j| !t[p][j].is_zero()).collect();
        let prow: Vec<(usize, Rational)> = support.iter().map(|&j| (j, t[p][j].clone())).collect();
        let prhs = rhs[p].clone();
        for i in 0..rows {
            if i == p || t[i][enter].is_zero() {
                continue;
            }
            let f = t[i][enter].clone();
            for (j, a) in &prow {
                t[i][*j] -= &f * a;
            }
            if !prhs.is_zero() {
                rhs[i] -= &f * &prhs;
            }
        }
        let f = cost[enter].clone();
        for (j, a) in &prow {
            cost[*j] -= &f * a;
        }
        if prhs.is_zero() {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        objective += &f * &prhs;
        basis[p] = enter;
    }

    if objective.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = rhs[i].clone();
            }
        }
        PhaseOne::Feasible(x)
    } else {
        let y = (0..rows)
            .map(|i| {
                let yi = Rational::one() - &cost[n + i];
                if sign[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        PhaseOne::Infeasible(y)
    }
}

fn clique_columns(edges: &[Edge], cliques: &[Clique]) -> Vec<Vec<(usize, Rational)>> {
    let row: BTreeMap<Edge, usize> = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    cliques
        .iter()
        .map(|k| k.edges().map(|e| (row[&e], Rational::one())).collect())
        .collect()
}

fn cliques_within_budget(g: &Graph, r: usize, config: &LpConfig) -> Result<Vec<Clique>> {
    if r < 2 {
        return Err(Error::CliqueOrder { r, n: g.n() });
    }
    if r > g.n() {
        return Ok(Vec::new());
    }
    let cliques = g.enumerate_cliques(r)?;
    if cliques.len() > config.max_variables {
        return Err(Error::BudgetExceeded {
            what: "LP variables",
            requested: cliques.len() as u128,
            budget: config.max_variables as u128,
        });
    }
    Ok(cliques)
}

/// Decides whether `g` has non-negative `K_r` weights with edge sums `target`.
pub fn lp_feasible(g: &Graph, r: usize, target: impl Fn(Edge) -> Rational) -> Result<LpOutcome> {
    lp_feasible_with(g, r, target, &LpConfig::default())
}

pub fn lp_feasible_with(
    g: &Graph,
    r: usize,
    target: impl Fn(Edge) -> Rational,
    config: &LpConfig,
) -> Result<LpOutcome> {
    let cliques = cliques_within_budget(g, r, config)?;
    let edges = g.edges();
    let b: Vec<Rational> = edges.iter().map(|&e| target(e)).collect();
    let columns = clique_columns(&edges, &cliques);
    Ok(match phase_one(edges.len(), &columns, &b) {
        PhaseOne::Feasible(x) => {
            let mut w = CliqueWeighting::new(r);
            for (k, v) in cliques.into_iter().zip(x) {
                w.add(k, v);
            }
            LpOutcome::Feasible(w)
        }
        PhaseOne::Infeasible(y) => LpOutcome::Infeasible(FarkasCertificate {
            r,
            multipliers: edges.into_iter().zip(y).filter(|(_, y)| !y.is_zero()).collect(),
        }),
    })
}

/// `(2r+2)`-clique weights with every edge sum in `[1 - 1/(2r+1), 1]`.
///
/// Each edge gets slack `s_e` and its complement `t_e`:
/// `Σ_{K∋e} x_K + s_e = 1` and `s_e + t_e = 1/(2r+1)`.
pub fn lp_approx_weighting(g: &Graph, r: usize) -> Result<CliqueWeighting> {
    lp_approx_weighting_with(g, r, &LpConfig::default())
}

pub fn lp_approx_weighting_with(g: &Graph, r: usize, config: &LpConfig) -> Result<CliqueWeighting> {
    let order = 2 * r + 2;
    let cliques = cliques_within_budget(g, order, config)?;
    let edges = g.edges();
    let mut covered = vec![false; edges.len()];
    let row: BTreeMap<Edge, usize> = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    for k in &cliques {
        for e in k.edges() {
            covered[row[&e]] = true;
        }
    }
    if let Some(i) = covered.iter().position(|c| !c) {
        return Err(Error::Infeasible(format!(
            "edge {} lies in no {order}-clique, so no slab weighting exists",
            edges[i]
        )));
    }
    let m = edges.len();
    let mut columns = clique_columns(&edges, &cliques);
    for i in 0..m {
        columns.push(vec![(i, Rational::one()), (m + i, Rational::one())]);
    }
    for i in 0..m {
        columns.push(vec![(m + i, Rational::one())]);
    }
    let gap = Rational::one() / from_usize(2 * r + 1);
    let b: Vec<Rational> = (0..2 * m)
        .map(|i| if i < m { Rational::one() } else { gap.clone() })
        .collect();
    match phase_one(2 * m, &columns, &b) {
        PhaseOne::Feasible(x) => {
            let mut w = CliqueWeighting::new(order);
            for (k, v) in cliques.into_iter().zip(x) {
                w.add(k, v);
            }
            Ok(w)
        }
        PhaseOne::Infeasible(_) => Err(Error::Infeasible(format!(
            "no {order}-clique weighting has every edge sum in [1 - 1/{}, 1]",
            2 * r + 1
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::slab_low;
    use crate::kminusm::decompose_clique_minus_matching;
    use crate::rational::ratio;
    use crate::weighting::{unit_target, verify_weighting};
    use crate::Matching;

    fn feasible(g: &Graph, r: usize) -> CliqueWeighting {
        match lp_feasible(g, r, unit_target).unwrap() {
            LpOutcome::Feasible(w) => w,
            LpOutcome::Infeasible(c) => panic!("unexpected certificate {c:?}"),
        }
    }

    #[test]
    fn k5_triangles() {
        let g = Graph::complete(5);
        let w = feasible(&g, 3);
        assert!(verify_weighting(&g, &w, unit_target).pass);
    }

    #[test]
    fn star_is_infeasible_with_certificate() {
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        match lp_feasible(&g, 3, unit_target).unwrap() {
            LpOutcome::Infeasible(c) => {
                assert!(c.check(&g, unit_target));
                assert!(c.objective(&g, unit_target).is_positive());
            }
            LpOutcome::Feasible(_) => panic!("star has no triangles"),
        }
    }

    #[test]
    fn k4_minus_edge_triangles_infeasible() {
        // the two triangles share edge 1-2, which would get weight 2
        let g = Graph::complete(4).with_edges_removed([Edge::new(0, 3)]);
        match lp_feasible(&g, 3, unit_target).unwrap() {
            LpOutcome::Infeasible(c) => assert!(c.check(&g, unit_target)),
            LpOutcome::Feasible(w) => panic!("{w:?}"),
        }
    }

    #[test]
    fn negative_and_fractional_targets() {
        let g = Graph::complete(5);
        let half = |_e: Edge| ratio(1, 2);
        let LpOutcome::Feasible(w) = lp_feasible(&g, 3, half).unwrap() else {
            panic!()
        };
        assert!(verify_weighting(&g, &w, half).pass);
        let neg = |e: Edge| if e == Edge::new(0, 1) { ratio(-1, 1) } else { Rational::one() };
        match lp_feasible(&g, 3, neg).unwrap() {
            LpOutcome::Infeasible(c) => assert!(c.check(&g, neg)),
            LpOutcome::Feasible(_) => panic!("negative target"),
        }
    }

    #[test]
    fn agrees_with_minus_matching_construction() {
        let mm = Matching::new(vec![Edge::new(0, 1), Edge::new(2, 3)]).unwrap();
        let g = Graph::complete(8).with_edges_removed(mm.edges().iter().copied());
        let w = feasible(&g, 3);
        assert!(verify_weighting(&g, &w, unit_target).pass);
        let c = decompose_clique_minus_matching(3, 8, &mm).unwrap();
        assert!(verify_weighting(&g, &c, unit_target).pass);
    }

    #[test]
    fn deterministic() {
        let g = Graph::complete(7).with_edges_removed([Edge::new(0, 1)]);
        let a = lp_feasible(&g, 3, unit_target).unwrap();
        let b = lp_feasible(&g, 3, unit_target).unwrap();
        match (a, b) {
            (LpOutcome::Feasible(x), LpOutcome::Feasible(y)) => assert_eq!(x, y),
            (LpOutcome::Infeasible(x), LpOutcome::Infeasible(y)) => assert_eq!(x, y),
            _ => panic!("verdicts differ"),
        }
    }

    #[test]
    fn budget_enforced() {
        let cfg = LpConfig { max_variables: 5 };
        assert!(matches!(
            lp_feasible_with(&Graph::complete(6), 3, unit_target, &cfg),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn slab_on_full_clique() {
        let g = Graph::complete(8);
        let w = lp_approx_weighting(&g, 3).unwrap();
        let low = slab_low(3);
        for s in w.edge_sums().values() {
            assert!(*s >= low && *s <= Rational::one());
        }
    }

    #[test]
    fn slab_fails_on_uncovered_edge() {
        let g = Graph::complete(8).with_edges_removed([Edge::new(0, 1)]);
        let err = lp_approx_weighting(&g, 3).unwrap_err();
        assert!(matches!(err, Error::Infeasible(ref m) if m.contains("0-2")), "{err}");
    }

    fn verdict(p: &PhaseOne) -> bool {
        matches!(p, PhaseOne::Feasible(_))
    }

    #[test]
    fn guided_and_exact_agree() {
        let hosts = [
            (Graph::complete(5), 3),
            (Graph::complete(7), 3),
            (Graph::complete(6).with_edges_removed([Edge::new(0, 1)]), 3),
            (Graph::complete(6).with_edges_removed([Edge::new(0, 1), Edge::new(2, 3)]), 3),
            (Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap(), 3),
            (Graph::complete(9).with_edges_removed([Edge::new(0, 1)]), 4),
        ];
        for (g, r) in hosts {
            let edges = g.edges();
            let cols = clique_columns(&edges, &g.enumerate_cliques(r).unwrap());
            let b = vec![Rational::one(); edges.len()];
            let exact = exact_phase_one(edges.len(), &cols, &b);
            let guided = phase_one(edges.len(), &cols, &b);
            assert_eq!(verdict(&exact), verdict(&guided), "{g:?}");
            if let PhaseOne::Infeasible(y) = &exact {
                let c = FarkasCertificate {
                    r,
                    multipliers: edges.iter().copied().zip(y.iter().cloned()).collect(),
                };
                assert!(c.check(&g, unit_target));
            }
        }
    }

    #[test]
    fn certify_rejects_a_bad_basis() {
        // all-artificial basis on a feasible system certifies neither verdict
        let g = Graph::complete(5);
        let edges = g.edges();
        let cols = clique_columns(&edges, &g.enumerate_cliques(3).unwrap());
        let b = vec![Rational::one(); edges.len()];
        let basis: Vec<usize> = (cols.len()..cols.len() + edges.len()).collect();
        assert!(certify_basis(edges.len(), &cols, &b, &basis).is_none());
    }

    #[test]
    fn slab_on_k12() {
        let g = Graph::complete(12);
        let w = lp_approx_weighting(&g, 3).unwrap();
        let low = slab_low(3);
        assert_eq!(w.edge_sums().len(), 66);
        for s in w.edge_sums().values() {
            assert!(*s >= low && *s <= Rational::one());
        }
    }
}
