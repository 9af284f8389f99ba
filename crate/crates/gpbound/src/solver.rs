//! Interior-point solver for the log-transformed programs.
//!
//! The pipeline: affine equalities are eliminated exactly (each one is solved
//! for one log-variable), the objective coefficients are normalized by their
//! largest log-coefficient so that rescaling the objective rescales the
//! result bit-for-bit, a phase-1 slack minimization finds a strictly feasible
//! point (or certifies that none exists), and a log-barrier method with
//! damped Newton steps and backtracking line search drives the duality gap
//! below tolerance. All sums of exponentials are evaluated max-shifted.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::gp::LogConvexProgram;

/// Margin by which the phase-1 slack must clear zero before a program counts
/// as feasible. Anything closer to the boundary (including slightly positive
/// slack) is treated as infeasible: a bound certified from a point that may
/// violate the constraints is worthless, while discarding a program whose
/// interior is thinner than 1e-9 in log space costs nothing of value.
pub const INFEASIBILITY_THRESHOLD: f64 = 1e-9;

/// Strictly feasible early-exit margin for phase 1.
const PHASE1_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct SolverSettings {
    /// Relative duality-gap target.
    pub tolerance: f64,
    /// Newton-step budget (phase 1 and the main phase each get this many).
    pub max_iterations: usize,
    /// Factor by which the barrier parameter grows between centerings.
    pub barrier_decrease: f64,
    /// Optional absolute duality-gap target, checked on top of the relative
    /// one. Used when the caller knows the scale the value will be used at.
    pub target_absolute_gap: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-9,
            // generous: iterations are cheap on these small programs, and
            // badly pinched feasible sets can send the starting objective a
            // hundred orders of magnitude above the optimum, with the
            // barrier walking it down roughly one decade per outer round
            max_iterations: 2000,
            barrier_decrease: 10.0,
            target_absolute_gap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// One outer barrier iteration, in original (unnormalized) units.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub outer: usize,
    pub newton_steps: usize,
    pub objective: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: SolverStatus,
    /// Optimal objective in original GP units (`+inf` when infeasible).
    pub value: f64,
    /// Ordinary (positive) coordinates of the final point, one per GP
    /// variable; empty when infeasible.
    pub point: Vec<f64>,
    pub log_point: Vec<f64>,
    pub kkt_residual: f64,
    /// Newton steps spent (both phases).
    pub iterations: usize,
    /// Certified absolute bound on `value - optimum` when `Optimal`.
    pub certified_gap: f64,
    pub trace: Vec<TraceEntry>,
    /// Final barrier parameter in normalized units; lets a caller resume.
    pub barrier_t: f64,
}

impl Solution {
    fn infeasible() -> Self {
        Solution {
            status: SolverStatus::Infeasible,
            value: f64::INFINITY,
            point: Vec::new(),
            log_point: Vec::new(),
            kkt_residual: f64::INFINITY,
            iterations: 0,
            certified_gap: f64::INFINITY,
            trace: Vec::new(),
            barrier_t: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Smallest achieved maximum of the log-sum-exp rows.
    pub slack: f64,
    /// A feasible log-space point (full coordinates) when one was found.
    pub point: Option<Vec<f64>>,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// equality elimination

#[derive(Clone, Debug)]
struct Term {
    b: f64,
    a: Vec<(usize, f64)>,
}

impl Term {
    fn log_at(&self, w: &DVector<f64>) -> f64 {
        let mut v = self.b;
        for &(i, c) in &self.a {
            v += c * w[i];
        }
        v
    }
}

#[derive(Clone, Debug)]
enum VarMap {
    Free(usize),
    Affine { terms: Vec<(usize, f64)>, offset: f64 },
}

struct Reduced {
    dim: usize,
    map: Vec<VarMap>,
    /// objective terms with log-coefficients shifted down by `scale_log`
    objective: Vec<Term>,
    scale_log: f64,
    rows: Vec<Vec<Term>>,
}

impl Reduced {
    fn full_log_point(&self, w: &DVector<f64>) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match m {
                VarMap::Free(r) => w[*r],
                VarMap::Affine { terms, offset } => {
                    let mut v = *offset;
                    for &(r, c) in terms {
                        v += c * w[r];
                    }
                    v
                }
            })
            .collect()
    }

    fn reduced_from_full(&self, y: &[f64]) -> DVector<f64> {
        let mut w = DVector::zeros(self.dim);
        for (full, m) in self.map.iter().enumerate() {
            if let VarMap::Free(r) = m {
                w[*r] = y[full];
            }
        }
        w
    }
}

struct Inconsistent;

fn build_reduced(lcp: &LogConvexProgram) -> Result<Reduced, Inconsistent> {
    let n = lcp.num_vars;
    // eliminated[v] = Some((expansion over still-free full vars, offset))
    type Expansion = (Vec<(usize, f64)>, f64);
    let mut eliminated: Vec<Option<Expansion>> = vec![None; n];

    for (coeffs, rhs) in &lcp.equalities {
        let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
        let mut r = *rhs;
        for &(v, c) in coeffs {
            match &eliminated[v] {
                None => *acc.entry(v).or_insert(0.0) += c,
                Some((terms, offset)) => {
                    r -= c * offset;
                    for &(v2, c2) in terms {
                        *acc.entry(v2).or_insert(0.0) += c * c2;
                    }
                }
            }
        }
        let max_c = acc.values().fold(0.0f64, |m, &c| m.max(c.abs()));
        acc.retain(|_, c| c.abs() > 1e-12 * max_c);
        if acc.is_empty() {
            if r.abs() > 1e-9 {
                return Err(Inconsistent);
            }
            continue;
        }
        // pivot: largest |coefficient|, ties to the smallest variable index
        let (&pivot, &pc) = acc
            .iter()
            .max_by(|a, b| {
                a.1.abs()
                    .partial_cmp(&b.1.abs())
                    .unwrap()
                    .then(b.0.cmp(a.0))
            })
            .unwrap();
        let expansion: Vec<(usize, f64)> = acc
            .iter()
            .filter(|&(&v, _)| v != pivot)
            .map(|(&v, &c)| (v, -c / pc))
            .collect();
        let offset = r / pc;
        // substitute the pivot out of earlier eliminations
        for (terms, off) in eliminated.iter_mut().flatten() {
            if let Some(pos) = terms.iter().position(|&(v, _)| v == pivot) {
                let (_, c) = terms.remove(pos);
                *off += c * offset;
                for &(v2, c2) in &expansion {
                    match terms.iter_mut().find(|(v, _)| *v == v2) {
                        Some((_, c0)) => *c0 += c * c2,
                        None => terms.push((v2, c * c2)),
                    }
                }
                terms.retain(|&(_, c)| c != 0.0);
            }
        }
        eliminated[pivot] = Some((expansion, offset));
    }

    let mut map = Vec::with_capacity(n);
    let mut reduced_ids = vec![usize::MAX; n];
    let mut dim = 0;
    for v in 0..n {
        if eliminated[v].is_none() {
            reduced_ids[v] = dim;
            dim += 1;
        }
    }
    for v in 0..n {
        match &eliminated[v] {
            None => map.push(VarMap::Free(reduced_ids[v])),
            Some((terms, offset)) => map.push(VarMap::Affine {
                terms: terms
                    .iter()
                    .map(|&(v2, c)| (reduced_ids[v2], c))
                    .collect(),
                offset: *offset,
            }),
        }
    }

    let reduce_term = |t: &crate::gp::LogTerm| -> Term {
        let mut b = t.log_coeff;
        let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
        for &(v, e) in &t.linear {
            match &map[v] {
                VarMap::Free(r) => *acc.entry(*r).or_insert(0.0) += e,
                VarMap::Affine { terms, offset } => {
                    b += e * offset;
                    for &(r, c) in terms {
                        *acc.entry(r).or_insert(0.0) += e * c;
                    }
                }
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Term {
            b,
            a: acc.into_iter().collect(),
        }
    };

    let mut objective: Vec<Term> = lcp.objective.iter().map(reduce_term).collect();
    let scale_log = objective
        .iter()
        .map(|t| t.b)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale_log = if scale_log.is_finite() { scale_log } else { 0.0 };
    for t in &mut objective {
        t.b -= scale_log;
    }
    let rows = lcp
        .inequalities
        .iter()
        .map(|row| row.iter().map(reduce_term).collect())
        .collect();

    Ok(Reduced {
        dim,
        map,
        objective,
        scale_log,
        rows,
    })
}

// ---------------------------------------------------------------------------
// smooth machinery

struct Problem<'a> {
    dim: usize,
    /// linear objective part (phase 1 uses this for the slack variable)
    lin: &'a [(usize, f64)],
    exp_terms: &'a [Term],
    rows: &'a [Vec<Term>],
}

fn row_logsumexp(row: &[Term], w: &DVector<f64>) -> f64 {
    let mut mx = f64::NEG_INFINITY;
    for t in row {
        mx = mx.max(t.log_at(w));
    }
    let mut s = 0.0;
    for t in row {
        s += (t.log_at(w) - mx).exp();
    }
    mx + s.ln()
}

fn max_slack(rows: &[Vec<Term>], w: &DVector<f64>) -> f64 {
    rows.iter()
        .map(|r| row_logsumexp(r, w))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Normalized objective value (sum of exponentials plus the linear part).
fn objective_value(p: &Problem, w: &DVector<f64>) -> f64 {
    let mut f = 0.0;
    for t in p.exp_terms {
        f += t.log_at(w).exp();
    }
    for &(i, c) in p.lin {
        f += c * w[i];
    }
    f
}

/// Barrier value `t*obj - sum ln(-g_r)`; `None` outside the domain or on
/// overflow, which the line search treats as `+inf`.
fn barrier_value(p: &Problem, w: &DVector<f64>, t: f64) -> Option<f64> {
    let f = objective_value(p, w);
    if !f.is_finite() {
        return None;
    }
    let mut phi = t * f;
    for row in p.rows {
        let g = row_logsumexp(row, w);
        if g >= 0.0 {
            return None;
        }
        phi -= (-g).ln();
    }
    if phi.is_finite() {
        Some(phi)
    } else {
        None
    }
}

struct Derivatives {
    phi: f64,
    obj: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    grad_obj_norm: f64,
}

fn derivatives(p: &Problem, w: &DVector<f64>, t: f64) -> Option<Derivatives> {
    let dim = p.dim;
    let mut grad = DVector::zeros(dim);
    let mut grad_obj = DVector::zeros(dim);
    let mut hess = DMatrix::zeros(dim, dim);
    let mut obj = 0.0;

    for term in p.exp_terms {
        let e = term.log_at(w).exp();
        if !e.is_finite() {
            return None;
        }
        obj += e;
        for &(i, ai) in &term.a {
            grad_obj[i] += e * ai;
            for &(j, aj) in &term.a {
                hess[(i, j)] += t * e * ai * aj;
            }
        }
    }
    for &(i, c) in p.lin {
        grad_obj[i] += c;
        obj += c * w[i];
    }
    grad.axpy(t, &grad_obj, 1.0);

    let mut phi = t * obj;
    let mut h = DVector::zeros(dim);
    for row in p.rows {
        let mut mx = f64::NEG_INFINITY;
        for term in row {
            mx = mx.max(term.log_at(w));
        }
        let mut total = 0.0;
        let weights: Vec<f64> = row
            .iter()
            .map(|term| {
                let e = (term.log_at(w) - mx).exp();
                total += e;
                e
            })
            .collect();
        let g = mx + total.ln();
        if g >= 0.0 {
            return None;
        }
        phi -= (-g).ln();
        let inv = 1.0 / (-g);

        h.fill(0.0);
        for (term, wgt) in row.iter().zip(&weights) {
            let sigma = wgt / total;
            for &(i, ai) in &term.a {
                h[i] += sigma * ai;
                for &(j, aj) in &term.a {
                    hess[(i, j)] += inv * sigma * ai * aj;
                }
            }
        }
        grad.axpy(inv, &h, 1.0);
        // remaining rank-one part: (1/g^2 - 1/(-g)) h h^T restricted to the
        // row's support
        let coef = 1.0 / (g * g) - inv;
        let mut touched: Vec<usize> = Vec::new();
        for term in row {
            for &(i, _) in &term.a {
                if !touched.contains(&i) {
                    touched.push(i);
                }
            }
        }
        for &i in &touched {
            for &j in &touched {
                hess[(i, j)] += coef * h[i] * h[j];
            }
        }
    }
    if !phi.is_finite() {
        return None;
    }
    Some(Derivatives {
        phi,
        obj,
        grad,
        hess,
        grad_obj_norm: grad_obj.norm(),
    })
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let dim = grad.len();
    let scale = hess.diagonal().sum().abs() / dim.max(1) as f64 + 1.0;
    let mut ridge = 0.0;
    loop {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for i in 0..dim {
                h[(i, i)] += ridge;
            }
        }
        if let Some(chol) = nalgebra::linalg::Cholesky::new(h) {
            return chol.solve(&(-grad));
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
        if ridge > 1e12 * scale {
            // steepest descent as a last resort
            return -grad / (1.0 + grad.norm());
        }
    }
}

struct CenterOutcome {
    steps: usize,
    obj: f64,
}

/// Damped Newton minimization of the barrier at fixed `t`. `w` must be
/// strictly feasible on entry and stays so.
fn center(p: &Problem, w: &mut DVector<f64>, t: f64, budget: usize) -> CenterOutcome {
    let mut steps = 0;
    let mut last_obj = objective_value(p, w);
    while steps < budget {
        let d = match derivatives(p, w, t) {
            Some(d) => d,
            None => break,
        };
        last_obj = d.obj;
        // absolute part keeps low-t centerings honest; the t-scaled part
        // acknowledges that phi values of size t*obj limit line-search
        // resolution at high t
        let ctol = 1e-10 * (1.0 + p.rows.len() as f64) + 1e-13 * (t * d.obj).abs();
        let dir = newton_direction(&d.hess, &d.grad);
        let dec2 = (-d.grad.dot(&dir)).max(0.0);
        if dec2 / 2.0 <= ctol {
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-18 {
            let cand = &*w + &dir * step;
            if let Some(phi) = barrier_value(p, &cand, t) {
                if phi <= d.phi - 0.25 * step * dec2 {
                    *w = cand;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        steps += 1;
        if !moved {
            break;
        }
    }
    CenterOutcome {
        steps,
        obj: last_obj,
    }
}

// ---------------------------------------------------------------------------
// phase 1

struct Phase1 {
    feasible: bool,
    slack: f64,
    w: DVector<f64>,
    iterations: usize,
}

fn phase1(red: &Reduced, settings: &SolverSettings, w0: &DVector<f64>) -> Phase1 {
    let m = red.rows.len();
    let slack0 = max_slack(&red.rows, w0);
    if slack0 <= -PHASE1_MARGIN {
        return Phase1 {
            feasible: true,
            slack: slack0,
            w: w0.clone(),
            iterations: 0,
        };
    }

    // augment with the slack variable s: rows become g_r(w) - s <= 0
    let dim = red.dim + 1;
    let rows: Vec<Vec<Term>> = red
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    let mut a = t.a.clone();
                    a.push((red.dim, -1.0));
                    Term { b: t.b, a }
                })
                .collect()
        })
        .collect();
    let lin = [(red.dim, 1.0)];
    let p = Problem {
        dim,
        lin: &lin,
        exp_terms: &[],
        rows: &rows,
    };

    let mut x = DVector::zeros(dim);
    for i in 0..red.dim {
        x[i] = w0[i];
    }
    x[red.dim] = slack0 + 1.0;

    let mut best_slack = slack0;
    let mut best_w = w0.clone();
    let mut iterations = 0;
    let mu = settings.barrier_decrease.max(1.5);
    let mut t = 1.0 / (1.0 + x[red.dim].abs());

    loop {
        let out = center(&p, &mut x, t, settings.max_iterations.saturating_sub(iterations));
        iterations += out.steps;
        let w_part = DVector::from_fn(red.dim, |i, _| x[i]);
        let cur = max_slack(&red.rows, &w_part);
        if cur < best_slack {
            best_slack = cur;
            best_w = w_part;
        }
        if best_slack <= -PHASE1_MARGIN {
            break;
        }
        let gap = m as f64 / t;
        if gap <= 0.3 * INFEASIBILITY_THRESHOLD || iterations >= settings.max_iterations {
            break;
        }
        t *= mu;
    }

    Phase1 {
        feasible: best_slack <= -INFEASIBILITY_THRESHOLD,
        slack: best_slack,
        w: best_w,
        iterations,
    }
}

/// Decides whether the log-sum-exp constraint system has a point with every
/// row below `-`[`INFEASIBILITY_THRESHOLD`], returning such a strictly
/// feasible point when it does.
pub fn phase1_feasibility(
    lcp: &LogConvexProgram,
    settings: &SolverSettings,
) -> FeasibilityReport {
    let red = match build_reduced(lcp) {
        Ok(r) => r,
        Err(Inconsistent) => {
            return FeasibilityReport {
                feasible: false,
                slack: f64::INFINITY,
                point: None,
                iterations: 0,
            }
        }
    };
    let w0 = start_point(&red, lcp);
    if red.rows.is_empty() {
        return FeasibilityReport {
            feasible: true,
            slack: f64::NEG_INFINITY,
            point: Some(red.full_log_point(&w0)),
            iterations: 0,
        };
    }
    let p1 = phase1(&red, settings, &w0);
    FeasibilityReport {
        feasible: p1.feasible,
        slack: p1.slack,
        point: p1.feasible.then(|| red.full_log_point(&p1.w)),
        iterations: p1.iterations,
    }
}

fn start_point(red: &Reduced, lcp: &LogConvexProgram) -> DVector<f64> {
    match &lcp.start_hint {
        Some(y) if y.len() == lcp.num_vars && y.iter().all(|v| v.is_finite()) => {
            red.reduced_from_full(y)
        }
        _ => DVector::zeros(red.dim),
    }
}

// ---------------------------------------------------------------------------
// main solve

pub fn solve(lcp: &LogConvexProgram, settings: &SolverSettings) -> Solution {
    solve_inner(lcp, settings, None)
}

/// Resumes from a previous solution's point and barrier parameter; useful to
/// tighten `target_absolute_gap` without paying for the early centerings
/// again.
pub fn solve_warm(
    lcp: &LogConvexProgram,
    settings: &SolverSettings,
    log_point: &[f64],
    barrier_t: f64,
) -> Solution {
    solve_inner(lcp, settings, Some((log_point, barrier_t)))
}

fn solve_inner(
    lcp: &LogConvexProgram,
    settings: &SolverSettings,
    warm: Option<(&[f64], f64)>,
) -> Solution {
    let red = match build_reduced(lcp) {
        Ok(r) => r,
        Err(Inconsistent) => return Solution::infeasible(),
    };
    let tol = settings.tolerance.max(1e-15);
    let m = red.rows.len();
    let mut iterations = 0;

    let mut w = match warm {
        Some((y, _)) if y.len() == lcp.num_vars => red.reduced_from_full(y),
        _ => start_point(&red, lcp),
    };

    // find a strictly feasible point (warm starts and interior hints pass
    // through); a set whose interior phase 1 cannot penetrate deeper than
    // the threshold is reported infeasible rather than risking an invalid
    // bound from a boundary point
    if m > 0 {
        let slack = max_slack(&red.rows, &w);
        if slack.is_nan() || slack >= 0.0 {
            let p1 = phase1(&red, settings, &w);
            iterations += p1.iterations;
            if !p1.feasible {
                let mut sol = Solution::infeasible();
                sol.iterations = iterations;
                return sol;
            }
            w = p1.w;
        }
    }

    let scale = red.scale_log;
    let rescale = |v: f64| -> f64 {
        if v > 0.0 {
            (scale + v.ln()).exp()
        } else {
            0.0
        }
    };

    if red.objective.is_empty() {
        // pure feasibility problem: the optimum value is 0
        let y = red.full_log_point(&w);
        return Solution {
            status: SolverStatus::Optimal,
            value: 0.0,
            point: y.iter().map(|v| v.exp()).collect(),
            log_point: y,
            kkt_residual: 0.0,
            iterations,
            certified_gap: 0.0,
            trace: Vec::new(),
            barrier_t: 0.0,
        };
    }

    let p = Problem {
        dim: red.dim,
        lin: &[],
        exp_terms: &red.objective,
        rows: &red.rows,
    };

    if m == 0 {
        return newton_minimize(&red, &p, w, settings, tol, iterations);
    }

    let mu = settings.barrier_decrease.max(1.5);
    let f0 = objective_value(&p, &w);
    let mut t = match warm {
        Some((_, prior_t)) if prior_t > 0.0 => prior_t,
        _ => m as f64 / (1.0 + f0.abs()),
    };

    let mut trace = Vec::new();
    let mut status = SolverStatus::MaxIterations;
    let mut outer = 0;
    let mut obj;
    loop {
        outer += 1;
        let budget = settings.max_iterations.saturating_sub(iterations);
        let out = center(&p, &mut w, t, budget);
        iterations += out.steps;
        obj = out.obj;
        let gap = m as f64 / t;
        trace.push(TraceEntry {
            outer,
            newton_steps: out.steps,
            objective: rescale(obj),
            gap: rescale(gap),
        });
        let ok_rel = gap <= tol * (1.0 + obj.abs());
        let ok_abs = settings
            .target_absolute_gap
            .is_none_or(|a| rescale(gap) <= a);
        if ok_rel && ok_abs {
            status = SolverStatus::Optimal;
            break;
        }
        if iterations >= settings.max_iterations {
            break;
        }
        t *= mu;
    }

    let gap = m as f64 / t;
    let kkt = match derivatives(&p, &w, t) {
        Some(d) => {
            let stat = (d.grad.norm() / t) / (1.0 + d.grad_obj_norm);
            stat.max(gap / (1.0 + d.obj.abs()))
        }
        None => f64::INFINITY,
    };
    let y = red.full_log_point(&w);
    Solution {
        status,
        value: rescale(obj),
        point: y.iter().map(|v| v.exp()).collect(),
        log_point: y,
        kkt_residual: kkt,
        iterations,
        certified_gap: rescale(gap),
        trace,
        barrier_t: t,
    }
}

/// Unconstrained case: plain damped Newton on the normalized objective.
fn newton_minimize(
    red: &Reduced,
    p: &Problem,
    mut w: DVector<f64>,
    settings: &SolverSettings,
    tol: f64,
    mut iterations: usize,
) -> Solution {
    let scale = red.scale_log;
    let rescale = |v: f64| -> f64 {
        if v > 0.0 {
            (scale + v.ln()).exp()
        } else {
            0.0
        }
    };
    let mut status = SolverStatus::MaxIterations;
    let mut trace = Vec::new();
    let mut obj = objective_value(p, &w);
    let mut dec2 = f64::INFINITY;
    let mut outer = 0;
    while iterations < settings.max_iterations {
        let d = match derivatives(p, &w, 1.0) {
            Some(d) => d,
            None => break,
        };
        obj = d.obj;
        let dir = newton_direction(&d.hess, &d.grad);
        dec2 = (-d.grad.dot(&dir)).max(0.0);
        outer += 1;
        trace.push(TraceEntry {
            outer,
            newton_steps: 1,
            objective: rescale(obj),
            gap: rescale(2.0 * dec2),
        });
        let ok_rel = dec2 <= 0.5 * tol * (1.0 + obj.abs());
        let ok_abs = settings
            .target_absolute_gap
            .is_none_or(|a| rescale(2.0 * dec2) <= a);
        if ok_rel && ok_abs {
            status = SolverStatus::Optimal;
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-18 {
            let cand = &w + &dir * step;
            if let Some(phi) = barrier_value(p, &cand, 1.0) {
                if phi <= d.phi - 0.25 * step * dec2 {
                    w = cand;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        if !moved {
            // flat to machine precision
            status = SolverStatus::Optimal;
            break;
        }
    }
    let kkt = match derivatives(p, &w, 1.0) {
        Some(d) => dec2.sqrt() / (1.0 + d.grad_obj_norm),
        None => f64::INFINITY,
    };
    let y = red.full_log_point(&w);
    Solution {
        status,
        value: rescale(obj),
        point: y.iter().map(|v| v.exp()).collect(),
        log_point: y,
        kkt_residual: kkt,
        iterations,
        certified_gap: rescale(2.0 * dec2),
        trace,
        barrier_t: 0.0,
    }
}
