//! Timing harness: one cell = a batch of seeded random instances at a fixed
//! shape, each solved on a ball with a randomly drawn volume.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::bounds::{ball_lower_bound, BoundError, BoundValue};
use crate::instance::{random_instance, splitmix64, DiagonalKind, InstanceError, InstanceSpec};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least one instance")]
    EmptyCell,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub index: usize,
    pub seed: u64,
    pub m: f64,
    pub bound: f64,
    pub lambda_star: Option<f64>,
    pub status: &'static str,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub n: usize,
    pub degree: u32,
    pub omega_size: usize,
    pub count: usize,
    pub avg_seconds: f64,
    pub max_seconds: f64,
    pub outcomes: Vec<InstanceOutcome>,
}

impl CellResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.n,
            "two_d": self.degree,
            "omega_size": self.omega_size,
            "count": self.count,
            "avg_seconds": self.avg_seconds,
            "max_seconds": self.max_seconds,
            "instances": self.outcomes.iter().map(|o| json!({
                "index": o.index,
                "seed": o.seed,
                "M": o.m,
                "bound": if o.bound.is_finite() { json!(o.bound) } else { json!("neg_inf") },
                "lambda_star": o.lambda_star,
                "status": o.status,
                "seconds": o.seconds,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Generates `count` unit-diagonal instances of the given shape and times
/// the ball bound on each, with the ball volume drawn uniformly from
/// `1..=100000`. Results are deterministic in `root_seed` regardless of
/// `jobs`; only the timings vary.
pub fn run_cell(
    n: usize,
    degree: u32,
    omega_size: Option<usize>,
    count: usize,
    root_seed: u64,
    jobs: usize,
) -> Result<CellResult, BenchError> {
    if count == 0 {
        return Err(BenchError::EmptyCell);
    }
    let omega = omega_size.unwrap_or(n);
    let work = |index: usize| -> Result<InstanceOutcome, BenchError> {
        let seed = splitmix64(root_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let spec = InstanceSpec {
            n,
            degree,
            omega_size: omega,
            coeff_min: -10,
            coeff_max: 10,
            diagonal: DiagonalKind::Unit,
            seed,
        };
        let p = random_instance(&spec)?;
        let m = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0xB5AD_4ECE_DA1C_E2A9))
            .gen_range(1..=100_000u32) as f64;
        let start = Instant::now();
        let result = ball_lower_bound(&p, m);
        let seconds = start.elapsed().as_secs_f64();
        let (bound, lambda_star, status) = match result {
            Ok(b) => {
                let status = match b.value {
                    BoundValue::Finite(_) => "optimal",
                    BoundValue::NegInf => "neg_inf",
                };
                (b.value.as_f64(), b.lambda_star, status)
            }
            Err(BoundError::Unconverged { bound }) => {
                (bound.value.as_f64(), bound.lambda_star, "unconverged")
            }
            Err(BoundError::InvalidBall { .. }) => unreachable!("volume drawn positive"),
        };
        Ok(InstanceOutcome {
            index,
            seed,
            m,
            bound,
            lambda_star,
            status,
            seconds,
        })
    };

    let outcomes: Result<Vec<_>, BenchError> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("worker pool");
        pool.install(|| (0..count).into_par_iter().map(work).collect())
    } else {
        (0..count).map(work).collect()
    };
    let outcomes = outcomes?;

    let total: f64 = outcomes.iter().map(|o| o.seconds).sum();
    let max_seconds = outcomes.iter().map(|o| o.seconds).fold(0.0, f64::max);
    Ok(CellResult {
        n,
        degree,
        omega_size: omega,
        count,
        avg_seconds: total / count as f64,
        max_seconds,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_is_deterministic_and_solved() {
        let a = run_cell(3, 4, Some(4), 3, 17, 1).unwrap();
        assert_eq!(a.outcomes.len(), 3);
        for o in &a.outcomes {
            assert_eq!(o.status, "optimal", "instance {} -> {}", o.index, o.bound);
            assert!(o.bound.is_finite());
            assert!((1.0..=100_000.0).contains(&o.m));
        }
        let b = run_cell(3, 4, Some(4), 3, 17, 1).unwrap();
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.bound, y.bound);
            assert_eq!(x.m, y.m);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let seq = run_cell(3, 6, Some(5), 4, 23, 1).unwrap();
        let par = run_cell(3, 6, Some(5), 4, 23, 2).unwrap();
        for (x, y) in seq.outcomes.iter().zip(&par.outcomes) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.bound, y.bound);
        }
    }

    #[test]
    fn empty_cell_rejected() {
        assert!(matches!(run_cell(2, 4, None, 0, 1, 1), Err(BenchError::EmptyCell)));
    }

    #[test]
    fn json_includes_summary_and_instances() {
        let cell = run_cell(2, 4, Some(3), 2, 5, 1).unwrap();
        let j = cell.to_json();
        assert_eq!(j["count"], json!(2));
        assert_eq!(j["instances"].as_array().unwrap().len(), 2);
        assert!(j["avg_seconds"].as_f64().unwrap() >= 0.0);
    }
}
