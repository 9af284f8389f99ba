//! Geometric programs whose optima certify polynomial lower bounds.
//!
//! For a polynomial `f` with working degree `2d`, write `f_a` for the
//! coefficient of `x^a`, `D` for the set of non-square support terms and
//! `f_{2d,i}` for the diagonal coefficients. The *unconstrained* program has
//! one positive weight variable `z[a]_i` for every `a` in `D` and every
//! variable `i` occurring in `a`, and asks the weights to split the diagonal
//! capacity so that every non-square term is dominated:
//!
//! ```text
//! minimize    sum over a in D, |a| < 2d of
//!                 (2d - |a|) * [ (|f_a|/2d)^{2d} * prod_i a_i^{a_i} ]^{1/(2d-|a|)}
//!                            * prod_i z[a]_i^{-a_i/(2d-|a|)}
//! subject to  sum_a z[a]_i <= f_{2d,i}                    for each variable i
//!             (2d/|f_a|)^{2d} * prod_i (z[a]_i/a_i)^{a_i} = 1   for |a| = 2d
//! ```
//!
//! Its optimal value `rho` gives the bound `f(0) - rho`. The *ball* variant
//! replaces the fixed capacities by variables `u_i` tied together so that
//! `u_i = f_{2d,i} + lambda` for a common shift `lambda >= 0`, and charges
//! `M * u_1` for working on the region `sum_i x_i^{2d} <= M`; it requires the
//! diagonal sorted in descending order and is always feasible.

use serde_json::json;
use thiserror::Error;

use crate::poly::{Exponent, SupportSets};

/// A monomial `c * prod v^e` of a geometric program, `c > 0`. The coefficient
/// is kept in log form so that large degrees cannot overflow.
#[derive(Clone, Debug)]
pub struct GpMonomial {
    pub log_coeff: f64,
    /// sparse exponents: (variable index, real exponent)
    pub exponents: Vec<(usize, f64)>,
}

impl GpMonomial {
    pub fn coefficient(&self) -> f64 {
        self.log_coeff.exp()
    }

    /// Value at a point given in ordinary (positive) coordinates.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        let mut log = self.log_coeff;
        for &(v, e) in &self.exponents {
            log += e * point[v].ln();
        }
        log.exp()
    }
}

/// What a GP variable stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarRole {
    /// Weight `z[a]_i`: the share of variable `i`'s capacity allocated to
    /// the support term with exponent vector `a`.
    Weight { alpha: Exponent, var: usize },
    /// Capacity `u_i` of variable `i` in the ball program.
    Capacity { var: usize },
}

#[derive(Clone, Debug)]
pub struct GpVariable {
    pub name: String,
    pub role: VarRole,
}

/// A posynomial geometric program in standard form:
/// minimize a posynomial subject to posynomial constraints `<= 1` and
/// monomial constraints `= 1`.
#[derive(Clone, Debug)]
pub struct GeometricProgram {
    pub variables: Vec<GpVariable>,
    pub objective: Vec<GpMonomial>,
    pub inequalities: Vec<Vec<GpMonomial>>,
    pub equalities: Vec<GpMonomial>,
    /// A point (ordinary coordinates) from which the solver can start.
    pub start_hint: Option<Vec<f64>>,
}

impl GeometricProgram {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.iter().map(|m| m.evaluate(point)).sum()
    }

    /// Worst constraint violation at a point: max over posynomial rows of
    /// `row(v) - 1` and over monomial rows of `|row(v) - 1|` (negative when
    /// strictly feasible).
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for row in &self.inequalities {
            let v: f64 = row.iter().map(|m| m.evaluate(point)).sum();
            worst = worst.max(v - 1.0);
        }
        for eq in &self.equalities {
            worst = worst.max((eq.evaluate(point) - 1.0).abs());
        }
        worst
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mono = |m: &GpMonomial| {
            json!({
                "coeff": m.coefficient(),
                "log_coeff": m.log_coeff,
                "exponents": m.exponents.iter()
                    .map(|&(v, e)| (self.variables[v].name.clone(), serde_json::Value::from(e)))
                    .collect::<serde_json::Map<String, serde_json::Value>>(),
            })
        };
        json!({
            "variables": self.variables.iter().map(|v| v.name.clone()).collect::<Vec<_>>(),
            "objective": self.objective.iter().map(mono).collect::<Vec<_>>(),
            "inequalities": self.inequalities.iter()
                .map(|row| row.iter().map(mono).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "equalities": self.equalities.iter().map(mono).collect::<Vec<_>>(),
        })
    }
}

/// Why the unconstrained program is infeasible without solving anything.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum PreInfeasible {
    #[error("diagonal coefficient of x{var}^2d is negative ({coeff}); no bound exists")]
    NegativeDiagonal { var: usize, coeff: f64 },
    #[error("x{var} has zero diagonal coefficient but appears in a non-square term")]
    ZeroDiagonalUsed { var: usize },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GpBuildError {
    #[error("ball level M must be positive and finite, got {m}")]
    InvalidBall { m: f64 },
    #[error("ball program needs the diagonal sorted in descending order")]
    DiagonalNotSorted,
}

struct Blocks {
    variables: Vec<GpVariable>,
    /// per non-square term: (exponent, [(var i, gp index)])
    blocks: Vec<(Exponent, Vec<(usize, usize)>)>,
}

fn weight_blocks(s: &SupportSets) -> Blocks {
    let mut variables = Vec::new();
    let mut blocks = Vec::new();
    for alpha in &s.non_squares {
        let mut entries = Vec::new();
        for (i, &e) in alpha.iter().enumerate() {
            if e > 0 {
                let idx = variables.len();
                let exps: Vec<String> = alpha.iter().map(|v| v.to_string()).collect();
                variables.push(GpVariable {
                    name: format!("z[{}]_{}", exps.join(","), i),
                    role: VarRole::Weight {
                        alpha: alpha.clone(),
                        var: i,
                    },
                });
                entries.push((i, idx));
            }
        }
        blocks.push((alpha.clone(), entries));
    }
    Blocks { variables, blocks }
}

/// `ln[(|f_a|/2d)^{2d} * prod a_i^{a_i}]`, the log of the domination constant.
fn log_domination_constant(coeff: f64, alpha: &Exponent, degree: u32) -> f64 {
    let mut log = degree as f64 * (coeff.abs().ln() - (degree as f64).ln());
    for &e in alpha.iter() {
        if e > 0 {
            log += e as f64 * (e as f64).ln();
        }
    }
    log
}

fn objective_terms(s: &SupportSets, degree: u32, blocks: &Blocks) -> Vec<GpMonomial> {
    let mut terms = Vec::new();
    for (alpha, entries) in &blocks.blocks {
        let total = alpha.total_degree();
        if total >= degree {
            continue;
        }
        debug_assert!(s.low_non_squares.contains(alpha));
        let gap = (degree - total) as f64;
        let log_coeff =
            gap.ln() + log_domination_constant(s.coefficient(alpha), alpha, degree) / gap;
        let exponents = entries
            .iter()
            .map(|&(i, idx)| (idx, -(alpha[i] as f64) / gap))
            .collect();
        terms.push(GpMonomial {
            log_coeff,
            exponents,
        });
    }
    terms
}

fn equality_rows(s: &SupportSets, degree: u32, blocks: &Blocks) -> Vec<GpMonomial> {
    let mut rows = Vec::new();
    for (alpha, entries) in &blocks.blocks {
        if alpha.total_degree() != degree {
            continue;
        }
        let log_coeff = -log_domination_constant(s.coefficient(alpha), alpha, degree);
        let exponents = entries
            .iter()
            .map(|&(i, idx)| (idx, alpha[i] as f64))
            .collect();
        rows.push(GpMonomial {
            log_coeff,
            exponents,
        });
    }
    rows
}

fn weight_start(s: &SupportSets, degree: u32, blocks: &Blocks) -> Vec<f64> {
    let count = blocks.blocks.len();
    let mut start = vec![1.0; blocks.variables.len()];
    for (alpha, entries) in &blocks.blocks {
        for &(i, idx) in entries {
            start[idx] = if alpha.total_degree() == degree {
                // satisfies the corresponding equality row exactly
                alpha[i] as f64 * s.coefficient(alpha).abs() / degree as f64
            } else if s.diagonal[i] > 0.0 {
                s.diagonal[i] / (count + 1) as f64
            } else {
                1.0
            };
        }
    }
    start
}

/// Builds the capacity-splitting program for the bound on all of R^n.
///
/// Fails fast when no choice of weights can work: a negative diagonal
/// coefficient, or a zero one for a variable that a non-square term uses.
pub fn build_unconstrained_gp(
    s: &SupportSets,
    degree: u32,
) -> Result<GeometricProgram, PreInfeasible> {
    let n = s.num_vars();
    for i in 0..n {
        if s.diagonal[i] < 0.0 {
            return Err(PreInfeasible::NegativeDiagonal {
                var: i,
                coeff: s.diagonal[i],
            });
        }
    }
    for i in 0..n {
        let used = s.non_squares.iter().any(|a| a[i] > 0);
        if used && s.diagonal[i] == 0.0 {
            return Err(PreInfeasible::ZeroDiagonalUsed { var: i });
        }
    }

    let blocks = weight_blocks(s);
    let objective = objective_terms(s, degree, &blocks);
    let equalities = equality_rows(s, degree, &blocks);

    let mut inequalities = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for (alpha, entries) in &blocks.blocks {
            for &(vi, idx) in entries {
                if vi == i {
                    debug_assert!(alpha[i] > 0);
                    row.push(GpMonomial {
                        log_coeff: -s.diagonal[i].ln(),
                        exponents: vec![(idx, 1.0)],
                    });
                }
            }
        }
        if !row.is_empty() {
            inequalities.push(row);
        }
    }

    let start_hint = Some(weight_start(s, degree, &blocks));
    Ok(GeometricProgram {
        variables: blocks.variables,
        objective,
        inequalities,
        equalities,
        start_hint,
    })
}

/// Builds the ball-region program. The diagonal must already be sorted in
/// descending order (permute the polynomial first); `m` is the ball level.
///
/// Compared to the unconstrained program the capacities become variables
/// `u_i`, the objective gains the charge `m * u_0`, and three families of
/// rows appear: the weight rows `sum_a z[a]_i / u_i <= 1`, the anchor
/// `f_{2d,0} / u_0 <= 1` (only when `f_{2d,0} > 0`), and the chain rows
/// `u_i/u_{i-1} + (f_{2d,i-1} - f_{2d,i})/u_{i-1} <= 1` whose constant part
/// is dropped when the two diagonal entries coincide. This program is
/// feasible for every polynomial.
pub fn build_ball_gp(
    s: &SupportSets,
    degree: u32,
    m: f64,
) -> Result<GeometricProgram, GpBuildError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(GpBuildError::InvalidBall { m });
    }
    let n = s.num_vars();
    if s.diagonal.windows(2).any(|w| w[0] < w[1]) {
        return Err(GpBuildError::DiagonalNotSorted);
    }

    let blocks = weight_blocks(s);
    let num_weights = blocks.variables.len();
    let mut variables = blocks.variables.clone();
    for i in 0..n {
        variables.push(GpVariable {
            name: format!("u{}", i),
            role: VarRole::Capacity { var: i },
        });
    }
    let u = |i: usize| num_weights + i;

    let mut objective = vec![GpMonomial {
        log_coeff: m.ln(),
        exponents: vec![(u(0), 1.0)],
    }];
    objective.extend(objective_terms(s, degree, &blocks));

    let equalities = equality_rows(s, degree, &blocks);

    let mut inequalities = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for (_, entries) in &blocks.blocks {
            for &(vi, idx) in entries {
                if vi == i {
                    row.push(GpMonomial {
                        log_coeff: 0.0,
                        exponents: vec![(idx, 1.0), (u(i), -1.0)],
                    });
                }
            }
        }
        if !row.is_empty() {
            inequalities.push(row);
        }
    }
    if s.diagonal[0] > 0.0 {
        inequalities.push(vec![GpMonomial {
            log_coeff: s.diagonal[0].ln(),
            exponents: vec![(u(0), -1.0)],
        }]);
    }
    for i in 1..n {
        let mut row = vec![GpMonomial {
            log_coeff: 0.0,
            exponents: vec![(u(i), 1.0), (u(i - 1), -1.0)],
        }];
        let diff = s.diagonal[i - 1] - s.diagonal[i];
        if diff > 0.0 {
            row.push(GpMonomial {
                log_coeff: diff.ln(),
                exponents: vec![(u(i - 1), -1.0)],
            });
        }
        inequalities.push(row);
    }

    // Strictly interior start: stagger the capacity shifts so the chain rows
    // hold strictly, then raise the common shift clear of the weight sums.
    let weights = weight_start(s, degree, &blocks);
    let eps = 0.5;
    let mut sums = vec![0.0; n];
    for (_, entries) in &blocks.blocks {
        for &(i, idx) in entries {
            sums[i] += weights[idx];
        }
    }
    let mut shift = 1.0 + (-s.diagonal[n - 1]).max(0.0);
    for (su, d) in sums.iter().zip(&s.diagonal) {
        shift = shift.max(1.0 + su - d);
    }
    let mut start = weights;
    for i in 0..n {
        start.push(s.diagonal[i] + shift + (n - 1 - i) as f64 * eps);
    }

    Ok(GeometricProgram {
        variables,
        objective,
        inequalities,
        equalities,
        start_hint: Some(start),
    })
}

/// One exponential term `exp(log_coeff + linear . y)` of the log-space model.
#[derive(Clone, Debug)]
pub struct LogTerm {
    pub log_coeff: f64,
    pub linear: Vec<(usize, f64)>,
}

/// Image of a [`GeometricProgram`] under `v = exp(y)`: minimize a sum of
/// exponentials subject to log-sum-exp rows `<= 0` and affine equalities.
#[derive(Clone, Debug)]
pub struct LogConvexProgram {
    pub num_vars: usize,
    pub var_names: Vec<String>,
    pub objective: Vec<LogTerm>,
    pub inequalities: Vec<Vec<LogTerm>>,
    /// `coeffs . y = rhs`
    pub equalities: Vec<(Vec<(usize, f64)>, f64)>,
    pub start_hint: Option<Vec<f64>>,
}

impl LogConvexProgram {
    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|t| {
                let mut log = t.log_coeff;
                for &(v, e) in &t.linear {
                    log += e * y[v];
                }
                log.exp()
            })
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let term = |t: &LogTerm| {
            json!({
                "log_coeff": t.log_coeff,
                "linear": t.linear.iter()
                    .map(|&(v, e)| (self.var_names[v].clone(), serde_json::Value::from(e)))
                    .collect::<serde_json::Map<String, serde_json::Value>>(),
            })
        };
        json!({
            "variables": self.var_names,
            "objective": self.objective.iter().map(term).collect::<Vec<_>>(),
            "inequalities": self.inequalities.iter()
                .map(|row| row.iter().map(term).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "equalities": self.equalities.iter()
                .map(|(coeffs, rhs)| json!({
                    "coeffs": coeffs.iter()
                        .map(|&(v, e)| (self.var_names[v].clone(), serde_json::Value::from(e)))
                        .collect::<serde_json::Map<String, serde_json::Value>>(),
                    "rhs": rhs,
                }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Log transform: each monomial `c * prod v^e` becomes the exponential term
/// `exp(ln c + e . y)`; a monomial equality becomes the affine row
/// `e . y = -ln c`.
pub fn log_transform(gp: &GeometricProgram) -> LogConvexProgram {
    let term = |m: &GpMonomial| LogTerm {
        log_coeff: m.log_coeff,
        linear: m.exponents.clone(),
    };
    LogConvexProgram {
        num_vars: gp.variables.len(),
        var_names: gp.variables.iter().map(|v| v.name.clone()).collect(),
        objective: gp.objective.iter().map(term).collect(),
        inequalities: gp
            .inequalities
            .iter()
            .map(|row| row.iter().map(term).collect())
            .collect(),
        equalities: gp
            .equalities
            .iter()
            .map(|m| (m.exponents.clone(), -m.log_coeff))
            .collect(),
        start_hint: gp
            .start_hint
            .as_ref()
            .map(|p| p.iter().map(|v| v.ln()).collect()),
    }
}
