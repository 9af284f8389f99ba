//! Lower-bound drivers.
//!
//! [`lower_bound`] certifies `f(x) >= bound` for every real `x`;
//! [`ball_lower_bound`] does the same on the region `sum_i x_i^{2d} <= M`.
//! Both recognize the support patterns that admit closed-form answers (no
//! non-square terms, or a single non-square term next to a unit diagonal)
//! and fall back to the interior-point solver otherwise. Any feasible point
//! of the underlying program certifies a bound, so even an unconverged solve
//! yields a valid (just looser) answer; it is reported through
//! [`BoundError::Unconverged`] with the bound attached.

use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::gp::{
    build_ball_gp, build_unconstrained_gp, log_transform, GeometricProgram, GpBuildError,
    LogConvexProgram, VarRole,
};
use crate::poly::Polynomial;
use crate::solver::{self, Solution, SolverSettings, SolverStatus};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    /// The relaxation is infeasible and certifies nothing; the polynomial is
    /// unbounded below or simply out of this method's reach.
    NegInf,
}

impl BoundValue {
    pub fn as_f64(self) -> f64 {
        match self {
            BoundValue::Finite(v) => v,
            BoundValue::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, BoundValue::Finite(_))
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Finite(v) => write!(f, "{}", v),
            BoundValue::NegInf => write!(f, "-inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundKind {
    Unconstrained,
    Ball { m: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Determined by inspecting the support (includes structural
    /// infeasibility, where no program needs to be solved).
    ClosedForm,
    GpSolver,
}

#[derive(Clone, Debug)]
pub struct Bound {
    pub value: BoundValue,
    pub kind: BoundKind,
    pub provenance: Provenance,
    /// Multiplier such that `bound + lambda * (sum x_i^{2d} - M)` is a valid
    /// global affine minorant; only produced for ball bounds.
    pub lambda_star: Option<f64>,
    pub solver: Option<Solution>,
}

impl Bound {
    pub fn to_json(&self) -> serde_json::Value {
        let value = match self.value {
            BoundValue::Finite(v) => json!(v),
            BoundValue::NegInf => json!("neg_inf"),
        };
        let (kind, m) = match self.kind {
            BoundKind::Unconstrained => ("unconstrained", None),
            BoundKind::Ball { m } => ("ball", Some(m)),
        };
        let provenance = match self.provenance {
            Provenance::ClosedForm => "closed_form",
            Provenance::GpSolver => "gp_solver",
        };
        let solver = self.solver.as_ref().map(|s| {
            json!({
                "status": s.status,
                "objective": s.value,
                "iterations": s.iterations,
                "certified_gap": s.certified_gap,
                "kkt_residual": s.kkt_residual,
            })
        });
        json!({
            "bound": value,
            "kind": kind,
            "M": m,
            "provenance": provenance,
            "lambda_star": self.lambda_star,
            "solver": solver,
        })
    }
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("ball volume parameter must be positive and finite, got {m}")]
    InvalidBall { m: f64 },
    #[error("solver stopped before reaching tolerance; the attached bound is valid but loose")]
    Unconverged { bound: Box<Bound> },
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub settings: SolverSettings,
    /// Use the closed forms when the support allows it (default). Disable to
    /// force the solver, e.g. to cross-validate the two paths.
    pub prefer_closed_form: bool,
    /// Accept the first converged solve instead of re-solving until the
    /// certified gap is small relative to the bound itself. The refinement
    /// matters when the bound comes out many orders of magnitude smaller
    /// than the program's optimum (large `M`).
    pub fast: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            settings: SolverSettings::default(),
            prefer_closed_form: true,
            fast: false,
        }
    }
}

/// Certified lower bound for `p` over all of `R^n`.
pub fn lower_bound(p: &Polynomial) -> Result<Bound, BoundError> {
    lower_bound_with(p, &BoundOptions::default())
}

pub fn lower_bound_with(p: &Polynomial, options: &BoundOptions) -> Result<Bound, BoundError> {
    if options.prefer_closed_form {
        if let Some(b) = closed_form_bound(p, None) {
            return Ok(b);
        }
    }
    let s = p.support_sets();
    let gp = match build_unconstrained_gp(&s, p.degree()) {
        Ok(gp) => gp,
        Err(_) => {
            // a negative or missing-but-needed diagonal coefficient: nothing
            // to solve, the relaxation cannot certify any bound
            return Ok(Bound {
                value: BoundValue::NegInf,
                kind: BoundKind::Unconstrained,
                provenance: Provenance::ClosedForm,
                lambda_star: None,
                solver: None,
            });
        }
    };
    let lcp = log_transform(&gp);
    let offset = s.constant;
    let sol = solve_to_target(&lcp, options, offset);
    finish(sol, offset, BoundKind::Unconstrained, None)
}

/// Certified lower bound for `p` over `sum_i x_i^{2d} <= M`.
pub fn ball_lower_bound(p: &Polynomial, m: f64) -> Result<Bound, BoundError> {
    ball_lower_bound_with(p, m, &BoundOptions::default())
}

pub fn ball_lower_bound_with(
    p: &Polynomial,
    m: f64,
    options: &BoundOptions,
) -> Result<Bound, BoundError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(BoundError::InvalidBall { m });
    }
    if options.prefer_closed_form {
        if let Some(b) = closed_form_bound(p, Some(m)) {
            return Ok(b);
        }
    }
    let (gp, _) = ball_program(p, m)?;
    let s = p.support_sets();
    let dmax = s.diagonal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let offset = s.constant + m * dmax;
    let lcp = log_transform(&gp);
    let sol = solve_to_target(&lcp, options, offset);
    let lambda = capacity_value(&gp, &sol, 0).map(|u0| (u0 - dmax).max(0.0));
    finish(sol, offset, BoundKind::Ball { m }, lambda)
}

/// The capacity program for the ball bound, with the variable permutation
/// (old index -> new index) that sorts the diagonal in non-increasing order.
pub fn ball_program(
    p: &Polynomial,
    m: f64,
) -> Result<(GeometricProgram, Vec<usize>), BoundError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(BoundError::InvalidBall { m });
    }
    let s = p.support_sets();
    let n = p.num_vars();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        s.diagonal[b]
            .partial_cmp(&s.diagonal[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut perm = vec![0; n];
    for (k, &old) in order.iter().enumerate() {
        perm[old] = k;
    }
    let sorted;
    let view = if order.iter().enumerate().all(|(k, &o)| k == o) {
        &s
    } else {
        sorted = p
            .permute_variables(&perm)
            .expect("permutation built from sort is valid")
            .support_sets();
        &sorted
    };
    let gp = build_ball_gp(view, p.degree(), m).map_err(|e| match e {
        GpBuildError::InvalidBall { m } => BoundError::InvalidBall { m },
        GpBuildError::DiagonalNotSorted => unreachable!("diagonal was sorted above"),
    })?;
    Ok((gp, perm))
}

fn capacity_value(gp: &GeometricProgram, sol: &Solution, var: usize) -> Option<f64> {
    let idx = gp
        .variables
        .iter()
        .position(|v| matches!(v.role, VarRole::Capacity { var: u } if u == var))?;
    sol.point.get(idx).copied()
}

/// Re-solve (warm) until the certified gap is small on the scale of the
/// resulting bound, not just on the scale of the program optimum.
fn solve_to_target(lcp: &LogConvexProgram, options: &BoundOptions, offset: f64) -> Solution {
    let mut sol = solver::solve(lcp, &options.settings);
    if options.fast {
        return sol;
    }
    for _ in 0..3 {
        if sol.status != SolverStatus::Optimal {
            break;
        }
        let bound = offset - sol.value;
        let need = 0.25 * options.settings.tolerance.max(1e-15) * (1.0 + bound.abs());
        if sol.certified_gap <= need {
            break;
        }
        let mut tighter = options.settings.clone();
        tighter.target_absolute_gap = Some(need);
        let spent = sol.iterations;
        sol = solver::solve_warm(lcp, &tighter, &sol.log_point, sol.barrier_t);
        sol.iterations += spent;
    }
    sol
}

fn finish(
    sol: Solution,
    offset: f64,
    kind: BoundKind,
    lambda: Option<f64>,
) -> Result<Bound, BoundError> {
    match sol.status {
        SolverStatus::Optimal => Ok(Bound {
            value: BoundValue::Finite(offset - sol.value),
            kind,
            provenance: Provenance::GpSolver,
            lambda_star: lambda,
            solver: Some(sol),
        }),
        SolverStatus::Infeasible => Ok(Bound {
            value: BoundValue::NegInf,
            kind,
            provenance: Provenance::GpSolver,
            lambda_star: None,
            solver: Some(sol),
        }),
        SolverStatus::MaxIterations => {
            // the iterate is feasible, so offset - value is still certified
            let value = if sol.value.is_finite() {
                BoundValue::Finite(offset - sol.value)
            } else {
                BoundValue::NegInf
            };
            Err(BoundError::Unconverged {
                bound: Box::new(Bound {
                    value,
                    kind,
                    provenance: Provenance::GpSolver,
                    lambda_star: lambda,
                    solver: Some(sol),
                }),
            })
        }
    }
}

/// Closed-form bound when the support admits one:
/// no non-square terms at all, or exactly one non-square term with every
/// diagonal coefficient equal to 1. Returns `None` otherwise.
pub fn closed_form_bound(p: &Polynomial, ball: Option<f64>) -> Option<Bound> {
    if let Some(m) = ball {
        if !(m > 0.0 && m.is_finite()) {
            return None;
        }
    }
    let s = p.support_sets();
    let f0 = s.constant;
    let kind = match ball {
        Some(m) => BoundKind::Ball { m },
        None => BoundKind::Unconstrained,
    };
    let done = |value: BoundValue, lambda: Option<f64>| {
        Some(Bound {
            value,
            kind,
            provenance: Provenance::ClosedForm,
            lambda_star: lambda,
            solver: None,
        })
    };

    if s.non_squares.is_empty() {
        let dmin = s.min_diagonal();
        return match ball {
            None if dmin >= 0.0 => done(BoundValue::Finite(f0), None),
            None => done(BoundValue::NegInf, None),
            Some(_) if dmin >= 0.0 => done(BoundValue::Finite(f0), Some(0.0)),
            Some(m) => done(BoundValue::Finite(f0 + m * dmin), Some(-dmin)),
        };
    }
    if s.non_squares.len() != 1 || s.diagonal.iter().any(|&d| d != 1.0) {
        return None;
    }

    let alpha = s.non_squares.iter().next().unwrap();
    let f_alpha = s.coefficient(alpha);
    let adeg = alpha.total_degree() as f64;
    let full = p.degree() as f64;
    // ln of alpha^alpha = prod_i alpha_i^{alpha_i}
    let ln_alpha_pow: f64 = alpha
        .iter()
        .filter(|&&e| e > 0)
        .map(|&e| f64::from(e) * f64::from(e).ln())
        .sum();
    let ln_dom = full * (f_alpha.abs().ln() - full.ln()) + ln_alpha_pow;

    if adeg == full {
        // the term only appears through the product equality; the bound is
        // f(0) when the weights fit under the capacities and -inf otherwise
        match ball {
            None => {
                // exact boundary test; the solver resolves the same sign
                // through its phase-1 slack, which equals ln_dom / |alpha|
                if ln_dom <= 0.0 {
                    done(BoundValue::Finite(f0), None)
                } else {
                    done(BoundValue::NegInf, None)
                }
            }
            Some(m) => {
                let growth = (ln_dom / full).exp();
                if growth <= 1.0 {
                    done(BoundValue::Finite(f0), Some(0.0))
                } else {
                    done(BoundValue::Finite(f0 - m * (growth - 1.0)), Some(growth - 1.0))
                }
            }
        }
    } else {
        let gap = full - adeg;
        let t = (ln_dom / gap).exp();
        match ball {
            None => done(BoundValue::Finite(f0 - gap * t), None),
            Some(m) => {
                let m_threshold = adeg * t;
                if m >= m_threshold {
                    done(BoundValue::Finite(f0 - gap * t), Some(0.0))
                } else {
                    let pulled =
                        f_alpha.abs() * ((adeg * (m / adeg).ln() + ln_alpha_pow) / full).exp();
                    let lambda = (m_threshold / m).powf(gap / full) - 1.0;
                    done(BoundValue::Finite(f0 + m - pulled), Some(lambda))
                }
            }
        }
    }
}

/// `p + lambda * (sum_i x_i^{2d} - M)`: the ball constraint folded into the
/// objective. Its unconstrained bound is a valid ball bound for any
/// `lambda >= 0`.
pub fn lagrangian(p: &Polynomial, lambda: f64, m: f64) -> Polynomial {
    assert!(
        lambda >= 0.0 && lambda.is_finite(),
        "multiplier must be nonnegative and finite"
    );
    assert!(m > 0.0 && m.is_finite(), "ball parameter must be positive");
    let n = p.num_vars();
    let mut terms: Vec<(Vec<u32>, f64)> = p
        .terms()
        .map(|(e, c)| (e.as_slice().to_vec(), c))
        .collect();
    terms.push((vec![0; n], -lambda * m));
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = p.degree();
        terms.push((e, lambda));
    }
    Polynomial::new(n, p.degree(), terms).expect("shifting by the ball constraint keeps validity")
}
