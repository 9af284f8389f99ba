//! Seeded random test instances: a diagonal plus a uniformly drawn sparse
//! support with integer coefficients.

use std::collections::BTreeSet;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::poly::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalKind {
    /// Every `x_i^{2d}` gets coefficient 1.
    Unit,
    /// Integer coefficients drawn from `1..=10`.
    RandomPositive,
    /// No diagonal terms at all.
    Absent,
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub n: usize,
    pub degree: u32,
    /// Number of off-diagonal, non-constant terms.
    pub omega_size: usize,
    pub coeff_min: i64,
    pub coeff_max: i64,
    pub diagonal: DiagonalKind,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("need at least one variable")]
    ZeroVariables,
    #[error("degree must be a positive even number, got {degree}")]
    BadDegree { degree: u32 },
    #[error("requested {requested} terms but only {available} monomials exist")]
    TooManyTerms { requested: usize, available: u128 },
    #[error("coefficient range [{min}, {max}] has no nonzero integer")]
    BadCoeffRange { min: i64, max: i64 },
}

/// SplitMix64 step; used to spread one root seed into independent
/// per-instance seeds.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Monomials of degree between 1 and `degree` in `n` variables, minus the
/// `n` diagonal terms; saturates at `u128::MAX`.
pub fn available_monomials(n: usize, degree: u32) -> u128 {
    // C(n + degree, n) counts degree <= `degree` monomials incl. the constant
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        let num = degree as u128 + i;
        c = match c.checked_mul(num) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    c.saturating_sub(1 + n as u128)
}

fn is_diagonal(exp: &[u32], degree: u32) -> bool {
    exp.iter().filter(|&&e| e > 0).count() == 1 && exp.contains(&degree)
}

fn enumerate_all(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, var: usize, left: u32, degree: u32) {
        if var == cur.len() {
            let total: u32 = cur.iter().sum();
            if total >= 1 && !is_diagonal(cur, degree) {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur[var] = e;
            rec(out, cur, var + 1, left - e, degree);
        }
        cur[var] = 0;
    }
    rec(&mut out, &mut cur, 0, degree, degree);
    out
}

/// A uniformly random composition of `total` into `n` nonnegative parts.
fn random_composition(rng: &mut ChaCha8Rng, total: u32, n: usize) -> Vec<u32> {
    if n == 1 {
        return vec![total];
    }
    let slots = total as usize + n - 1;
    let mut bars: Vec<usize> = rand::seq::index::sample(rng, slots, n - 1).into_vec();
    bars.sort_unstable();
    let mut parts = Vec::with_capacity(n);
    let mut prev = 0usize;
    for &b in &bars {
        parts.push((b - prev) as u32);
        prev = b + 1;
    }
    parts.push((slots - prev) as u32);
    parts
}

pub fn random_instance(spec: &InstanceSpec) -> Result<Polynomial, InstanceError> {
    if spec.n == 0 {
        return Err(InstanceError::ZeroVariables);
    }
    if spec.degree == 0 || !spec.degree.is_multiple_of(2) {
        return Err(InstanceError::BadDegree {
            degree: spec.degree,
        });
    }
    let has_nonzero = (spec.coeff_min..=spec.coeff_max).any(|c| c != 0);
    if spec.coeff_min > spec.coeff_max || !has_nonzero {
        return Err(InstanceError::BadCoeffRange {
            min: spec.coeff_min,
            max: spec.coeff_max,
        });
    }
    let available = available_monomials(spec.n, spec.degree);
    if spec.omega_size as u128 > available {
        return Err(InstanceError::TooManyTerms {
            requested: spec.omega_size,
            available,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coeff = |rng: &mut ChaCha8Rng| -> f64 {
        loop {
            let c = rng.gen_range(spec.coeff_min..=spec.coeff_max);
            if c != 0 {
                return c as f64;
            }
        }
    };

    let exponents: Vec<Vec<u32>> = if (spec.omega_size as u128).saturating_mul(20) >= available {
        // dense request: enumerate and shuffle rather than reject forever
        let mut all = enumerate_all(spec.n, spec.degree);
        all.shuffle(&mut rng);
        all.truncate(spec.omega_size);
        all
    } else {
        // degree drawn proportionally to the number of monomials of that
        // degree, then a uniform composition
        let weights: Vec<f64> = (1..=spec.degree)
            .map(|t| {
                (1..spec.n as u64)
                    .map(|i| (t as f64 + i as f64) / i as f64)
                    .product::<f64>()
            })
            .collect();
        let by_degree = WeightedIndex::new(&weights).expect("positive weights");
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(spec.omega_size);
        while out.len() < spec.omega_size {
            let t = 1 + by_degree.sample(&mut rng) as u32;
            let e = random_composition(&mut rng, t, spec.n);
            if is_diagonal(&e, spec.degree) || !seen.insert(e.clone()) {
                continue;
            }
            out.push(e);
        }
        out
    };

    let mut terms: Vec<(Vec<u32>, f64)> = Vec::with_capacity(spec.omega_size + spec.n);
    for e in exponents {
        let c = coeff(&mut rng);
        terms.push((e, c));
    }
    match spec.diagonal {
        DiagonalKind::Absent => {}
        DiagonalKind::Unit => {
            for i in 0..spec.n {
                let mut e = vec![0u32; spec.n];
                e[i] = spec.degree;
                terms.push((e, 1.0));
            }
        }
        DiagonalKind::RandomPositive => {
            for i in 0..spec.n {
                let mut e = vec![0u32; spec.n];
                e[i] = spec.degree;
                terms.push((e, rng.gen_range(1..=10) as f64));
            }
        }
    }
    Ok(Polynomial::new(spec.n, spec.degree, terms).expect("generated terms are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64) -> InstanceSpec {
        InstanceSpec {
            n: 4,
            degree: 6,
            omega_size: 8,
            coeff_min: -10,
            coeff_max: 10,
            diagonal: DiagonalKind::Unit,
            seed,
        }
    }

    #[test]
    fn splitmix_reference_value() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_instance(&spec(5)).unwrap();
        let b = random_instance(&spec(5)).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        let c = random_instance(&spec(6)).unwrap();
        assert_ne!(a.to_string(), c.to_string());
    }

    #[test]
    fn shape_matches_spec() {
        let p = random_instance(&spec(1)).unwrap();
        assert_eq!(p.num_vars(), 4);
        assert_eq!(p.degree(), 6);
        assert_eq!(p.num_terms(), 8 + 4);
        let s = p.support_sets();
        assert!(s.diagonal.iter().all(|&d| d == 1.0));
        for (e, c) in p.terms() {
            assert!(e.total_degree() <= 6);
            assert!(c != 0.0 && (-10.0..=10.0).contains(&c));
        }
    }

    #[test]
    fn diagonal_kinds() {
        let mut s = spec(9);
        s.diagonal = DiagonalKind::Absent;
        let p = random_instance(&s).unwrap();
        assert_eq!(p.num_terms(), 8);
        assert!(p.support_sets().diagonal.iter().all(|&d| d == 0.0));

        s.diagonal = DiagonalKind::RandomPositive;
        let q = random_instance(&s).unwrap();
        for &d in &q.support_sets().diagonal {
            assert!((1.0..=10.0).contains(&d) && d.fract() == 0.0);
        }
    }

    #[test]
    fn dense_request_enumerates() {
        // n=2, degree 4: 12 admissible monomials
        assert_eq!(available_monomials(2, 4), 12);
        let s = InstanceSpec {
            n: 2,
            degree: 4,
            omega_size: 12,
            coeff_min: 1,
            coeff_max: 3,
            diagonal: DiagonalKind::Absent,
            seed: 3,
        };
        let p = random_instance(&s).unwrap();
        assert_eq!(p.num_terms(), 12);
        let over = InstanceSpec {
            omega_size: 13,
            ..s
        };
        assert!(matches!(
            random_instance(&over),
            Err(InstanceError::TooManyTerms { available: 12, .. })
        ));
    }

    #[test]
    fn big_spaces_do_not_overflow() {
        assert_eq!(available_monomials(20, 20), 137_846_528_820 - 21);
        assert_eq!(available_monomials(200, 100), u128::MAX);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = spec(1);
        s.degree = 5;
        assert!(matches!(
            random_instance(&s),
            Err(InstanceError::BadDegree { degree: 5 })
        ));
        let mut s = spec(1);
        s.coeff_min = 0;
        s.coeff_max = 0;
        assert!(matches!(
            random_instance(&s),
            Err(InstanceError::BadCoeffRange { .. })
        ));
        let mut s = spec(1);
        s.n = 0;
        assert!(matches!(
            random_instance(&s),
            Err(InstanceError::ZeroVariables)
        ));
    }
}
