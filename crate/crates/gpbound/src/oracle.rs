//! Independent checks on computed bounds: randomized sampling over the
//! region, exact minimization in one and two variables, and a sweep over
//! shifted-polynomial multipliers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::bounds::{lagrangian, lower_bound, BoundError, BoundValue};
use crate::poly::Polynomial;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("ball volume parameter must be positive and finite, got {m}")]
    InvalidBall { m: f64 },
    #[error("exact minimization implemented for 1 or 2 variables, got {n}")]
    UnsupportedDimension { n: usize },
    #[error("multiplier grid must be nonempty")]
    EmptyGrid,
    #[error("multipliers must be nonnegative and finite, got {lambda}")]
    BadMultiplier { lambda: f64 },
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub point: Vec<f64>,
    pub value: f64,
    /// `bound - value`; positive means the claimed bound is broken.
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct ViolationReport {
    /// Accepted sample points (inside the region).
    pub samples: usize,
    /// Draws taken, including rejected ones.
    pub attempts: usize,
    pub violations: Vec<Violation>,
    /// Smallest value seen, seeded with the value at the origin.
    pub min_observed: f64,
}

impl ViolationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "samples": self.samples,
            "attempts": self.attempts,
            "min_observed": self.min_observed,
            "violations": self.violations.iter().map(|v| json!({
                "point": v.point,
                "value": v.value,
                "margin": v.margin,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Draws `samples` uniform points from the region `sum_i x_i^{2d} <= M`
/// (rejection from the bounding box) and reports every point whose value
/// undercuts `bound` beyond numerical slack.
pub fn sample_ball_check(
    p: &Polynomial,
    m: f64,
    bound: f64,
    samples: usize,
    seed: u64,
) -> Result<ViolationReport, OracleError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(OracleError::InvalidBall { m });
    }
    let n = p.num_vars();
    let degree = p.degree() as i32;
    let radius = m.powf(1.0 / p.degree() as f64);
    let slack = 1e-9 * (1.0 + bound.abs());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = ViolationReport {
        samples: 0,
        attempts: 0,
        violations: Vec::new(),
        min_observed: p.constant_term(),
    };
    let max_attempts = samples.saturating_mul(1000).max(1000);
    let mut point = vec![0.0; n];
    while report.samples < samples && report.attempts < max_attempts {
        report.attempts += 1;
        let mut mass = 0.0;
        for x in point.iter_mut() {
            *x = rng.gen_range(-radius..=radius);
            mass += x.powi(degree);
        }
        if mass > m {
            continue;
        }
        report.samples += 1;
        let value = p.evaluate(&point).expect("point has the right length");
        if value < report.min_observed {
            report.min_observed = value;
        }
        if bound - value > slack {
            report.violations.push(Violation {
                point: point.clone(),
                value,
                margin: bound - value,
            });
        }
    }
    Ok(report)
}

/// Exact minimum of `p`, globally (`ball = None`) or over
/// `sum_i x_i^{2d} <= M`. One variable is handled by root isolation on the
/// derivative; two variables by dense grid search with local refinement.
pub fn exact_minimum(p: &Polynomial, ball: Option<f64>) -> Result<f64, OracleError> {
    if let Some(m) = ball {
        if !(m > 0.0 && m.is_finite()) {
            return Err(OracleError::InvalidBall { m });
        }
    }
    match p.num_vars() {
        1 => Ok(exact_minimum_1d(p, ball)),
        2 => Ok(exact_minimum_2d(p, ball)),
        n => Err(OracleError::UnsupportedDimension { n }),
    }
}

fn dense_coeffs(p: &Polynomial) -> Vec<f64> {
    let mut c = vec![0.0; p.degree() as usize + 1];
    for (e, v) in p.terms() {
        c[e[0] as usize] = v;
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn exact_minimum_1d(p: &Polynomial, ball: Option<f64>) -> f64 {
    let c = dense_coeffs(p);
    let deriv: Vec<f64> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect();
    let lead = c.iter().rposition(|&a| a != 0.0);

    let (lo, hi) = match ball {
        Some(m) => {
            let r = m.powf(1.0 / p.degree() as f64);
            (-r, r)
        }
        None => {
            match lead {
                None | Some(0) => return c.first().copied().unwrap_or(0.0),
                Some(k) if k % 2 == 1 || c[k] < 0.0 => return f64::NEG_INFINITY,
                Some(k) => {
                    // Cauchy bound on the roots of the derivative
                    let r = 1.0
                        + deriv[..k]
                            .iter()
                            .map(|a| (a / deriv[k - 1]).abs())
                            .fold(0.0, f64::max);
                    (-r, r)
                }
            }
        }
    };

    let mut best = f64::INFINITY;
    let mut consider = |x: f64| {
        let v = horner(&c, x);
        if v < best {
            best = v;
        }
    };
    consider(lo);
    consider(hi);
    // bracket the derivative's sign changes on a fine grid, then bisect
    let steps = 8192;
    let mut prev_x = lo;
    let mut prev_d = horner(&deriv, lo);
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let d = horner(&deriv, x);
        if d == 0.0 {
            consider(x);
        } else if prev_d * d < 0.0 {
            let (mut a, mut b) = (prev_x, x);
            let mut da = prev_d;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let dm = horner(&deriv, mid);
                if dm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if da * dm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    da = dm;
                }
            }
            consider(0.5 * (a + b));
        }
        prev_x = x;
        prev_d = d;
    }
    best
}

fn exact_minimum_2d(p: &Polynomial, ball: Option<f64>) -> f64 {
    match ball {
        Some(m) => {
            let r = m.powf(1.0 / p.degree() as f64);
            boxed_minimum_2d(p, r, Some(m))
        }
        None => {
            // heuristic: search expanding boxes; reliable when the minimizer
            // is not extremely far out
            let mut best = f64::INFINITY;
            for half in [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0] {
                best = best.min(boxed_minimum_2d(p, half, None));
            }
            best
        }
    }
}

fn boxed_minimum_2d(p: &Polynomial, half: f64, mask: Option<f64>) -> f64 {
    let degree = p.degree() as i32;
    let inside = |x: f64, y: f64| match mask {
        Some(m) => x.powi(degree) + y.powi(degree) <= m,
        None => true,
    };
    let mut best = f64::INFINITY;
    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();
    let coarse = 240;
    for i in 0..=coarse {
        let x = -half + 2.0 * half * i as f64 / coarse as f64;
        for j in 0..=coarse {
            let y = -half + 2.0 * half * j as f64 / coarse as f64;
            if !inside(x, y) {
                continue;
            }
            let v = p.evaluate(&[x, y]).expect("two variables");
            best = best.min(v);
            seeds.push((v, x, y));
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    seeds.truncate(6);
    for &(_, sx, sy) in &seeds {
        let (mut cx, mut cy) = (sx, sy);
        let mut span = 2.0 * half / coarse as f64;
        for _ in 0..52 {
            let local = 8;
            let mut improved = (cx, cy);
            let mut local_best = f64::INFINITY;
            for i in -local..=local {
                let x = cx + span * i as f64 / local as f64;
                for j in -local..=local {
                    let y = cy + span * j as f64 / local as f64;
                    if !inside(x, y) {
                        continue;
                    }
                    let v = p.evaluate(&[x, y]).expect("two variables");
                    if v < local_best {
                        local_best = v;
                        improved = (x, y);
                    }
                }
            }
            if local_best < best {
                best = local_best;
            }
            cx = improved.0;
            cy = improved.1;
            span *= 0.6;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub lambda: f64,
    pub value: BoundValue,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub best_lambda: f64,
    pub best_value: BoundValue,
}

impl SweepResult {
    pub fn to_json(&self) -> serde_json::Value {
        let val = |v: &BoundValue| match v {
            BoundValue::Finite(x) => json!(x),
            BoundValue::NegInf => json!("neg_inf"),
        };
        json!({
            "entries": self.entries.iter().map(|e| json!({
                "lambda": e.lambda,
                "value": val(&e.value),
            })).collect::<Vec<_>>(),
            "best_lambda": self.best_lambda,
            "best_value": val(&self.best_value),
        })
    }
}

/// Evaluates the global bound of `p + lambda (sum x_i^{2d} - M)` on a grid
/// of multipliers. Every entry is a valid ball bound; the best one shows how
/// close the grid gets to the direct ball bound.
pub fn lambda_sweep(p: &Polynomial, m: f64, grid: &[f64]) -> Result<SweepResult, OracleError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(OracleError::InvalidBall { m });
    }
    if grid.is_empty() {
        return Err(OracleError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(OracleError::BadMultiplier { lambda: bad });
    }
    let mut entries = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let shifted = lagrangian(p, lambda, m);
        let value = match lower_bound(&shifted) {
            Ok(b) => b.value,
            Err(BoundError::Unconverged { bound }) => bound.value,
            Err(BoundError::InvalidBall { .. }) => unreachable!("global bound takes no ball"),
        };
        entries.push(SweepEntry { lambda, value });
    }
    let mut best = &entries[0];
    for e in &entries[1..] {
        if e.value.as_f64() > best.value.as_f64() {
            best = e;
        }
    }
    let (best_lambda, best_value) = (best.lambda, best.value);
    Ok(SweepResult {
        entries,
        best_lambda,
        best_value,
    })
}
