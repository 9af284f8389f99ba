//! Sparse multivariate polynomials with an even working degree.
//!
//! A [`Polynomial`] stores its terms in canonical form: merged, sorted in
//! graded lexicographic order, with zero coefficients dropped. Every
//! polynomial carries a working degree `2d` (an even upper bound on the total
//! degree of its terms); the monomials `x_i^{2d}` are the *diagonal* of the
//! polynomial and play a special role when building bound programs, so the
//! support classification below singles them out.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exponent vector of a monomial, ordered graded-lexicographically
/// (total degree first, then lexicographic on components).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(components: Vec<u32>) -> Self {
        Exponent(components)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// True for the zero vector (the constant monomial).
    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// If this is `degree * e_i` for some variable `i`, returns `i`.
    pub fn diagonal_index(&self, degree: u32) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if e != degree || found.is_some() {
                return None;
            }
            found = Some(i);
        }
        found
    }

    pub fn iter(&self) -> impl Iterator<Item = &u32> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for Exponent {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A monomial `c * x^alpha` is a square iff `c > 0` and every exponent is even.
pub fn is_square_monomial(coeff: f64, exponent: &[u32]) -> bool {
    coeff > 0.0 && exponent.iter().all(|&e| e % 2 == 0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("a polynomial needs at least one variable")]
    ZeroVariables,
    #[error("working degree {degree} is not a positive even integer")]
    DegreeNotEven { degree: u32 },
    #[error("term of total degree {term_degree} exceeds working degree {degree}")]
    DegreeTooSmall { degree: u32, term_degree: u64 },
    #[error("exponent vector has length {got}, expected {expected}")]
    WrongExponentLength { expected: usize, got: usize },
    #[error("coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("permutation is not a bijection on 0..{n}")]
    BadPermutation { n: usize },
}

/// Sparse polynomial in `num_vars` variables with working degree `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    num_vars: usize,
    degree: u32,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    /// Builds a polynomial in canonical form. Duplicate exponent vectors are
    /// merged by summing their coefficients; exact-zero coefficients are
    /// dropped after merging.
    pub fn new(
        num_vars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, PolyError> {
        if num_vars == 0 {
            return Err(PolyError::ZeroVariables);
        }
        if degree == 0 || !degree.is_multiple_of(2) {
            return Err(PolyError::DegreeNotEven { degree });
        }
        let mut map: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (exp, coeff) in terms {
            if exp.len() != num_vars {
                return Err(PolyError::WrongExponentLength {
                    expected: num_vars,
                    got: exp.len(),
                });
            }
            if !coeff.is_finite() {
                return Err(PolyError::NonFiniteCoefficient);
            }
            let total: u64 = exp.iter().map(|&e| e as u64).sum();
            if total > degree as u64 {
                return Err(PolyError::DegreeTooSmall {
                    degree,
                    term_degree: total,
                });
            }
            *map.entry(Exponent::new(exp)).or_insert(0.0) += coeff;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Polynomial {
            num_vars,
            degree,
            terms: map,
        })
    }

    pub fn zero(num_vars: usize) -> Self {
        Polynomial {
            num_vars: num_vars.max(1),
            degree: 2,
            terms: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// The even working degree (the `2d` of the diagonal monomials).
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest total degree among stored terms; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coefficient(&self, exponent: &[u32]) -> f64 {
        self.terms
            .get(&Exponent::new(exponent.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.terms
            .get(&Exponent::new(vec![0; self.num_vars]))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let mut acc = 0.0;
        for (exp, coeff) in &self.terms {
            let mut term = coeff * 1.0;
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    term *= x[i].powi(e as i32);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Renames variables: variable `i` of `self` becomes variable `perm[i]`
    /// of the result, so `result.evaluate(y) == self.evaluate(x)` whenever
    /// `y[perm[i]] == x[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Result<Self, PolyError> {
        let n = self.num_vars;
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(PolyError::BadPermutation { n });
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(PolyError::BadPermutation { n });
            }
            seen[p] = true;
        }
        let mut terms = BTreeMap::new();
        for (exp, &coeff) in &self.terms {
            let mut new_exp = vec![0u32; n];
            for (i, &e) in exp.iter().enumerate() {
                new_exp[perm[i]] = e;
            }
            terms.insert(Exponent::new(new_exp), coeff);
        }
        Ok(Polynomial {
            num_vars: n,
            degree: self.degree,
            terms,
        })
    }

    /// Classifies the support for building the bound programs.
    pub fn support_sets(&self) -> SupportSets {
        let mut support = BTreeSet::new();
        let mut non_squares = BTreeSet::new();
        let mut low_non_squares = BTreeSet::new();
        let mut coeffs = BTreeMap::new();
        let mut diagonal = vec![0.0; self.num_vars];
        let mut constant = 0.0;
        for (exp, &coeff) in &self.terms {
            if exp.is_constant() {
                constant = coeff;
                continue;
            }
            if let Some(i) = exp.diagonal_index(self.degree) {
                diagonal[i] = coeff;
                continue;
            }
            support.insert(exp.clone());
            coeffs.insert(exp.clone(), coeff);
            if !is_square_monomial(coeff, exp.as_slice()) {
                non_squares.insert(exp.clone());
                if exp.total_degree() < self.degree {
                    low_non_squares.insert(exp.clone());
                }
            }
        }
        SupportSets {
            support,
            non_squares,
            low_non_squares,
            diagonal,
            constant,
            coeffs,
        }
    }
}

/// Support classification of a polynomial relative to its working degree.
///
/// `support` holds the exponent vectors of all non-constant, non-diagonal
/// terms. `non_squares` is the subset whose monomials are not squares (these
/// are the terms that can pull the polynomial down and need to be dominated);
/// `low_non_squares` restricts that to total degree strictly below the
/// working degree. `diagonal[i]` is the coefficient of `x_i^{2d}` (0 when the
/// term is absent) and `constant` is the constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSets {
    pub support: BTreeSet<Exponent>,
    pub non_squares: BTreeSet<Exponent>,
    pub low_non_squares: BTreeSet<Exponent>,
    pub diagonal: Vec<f64>,
    pub constant: f64,
    coeffs: BTreeMap<Exponent, f64>,
}

impl SupportSets {
    pub fn num_vars(&self) -> usize {
        self.diagonal.len()
    }

    /// Coefficient of a support term (0 for anything outside `support`).
    pub fn coefficient(&self, exponent: &Exponent) -> f64 {
        self.coeffs.get(exponent).copied().unwrap_or(0.0)
    }

    pub fn min_diagonal(&self) -> f64 {
        self.diagonal.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn format_coeff(c: f64) -> String {
    if c == c.trunc() && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{}", c)
    }
}

impl fmt::Display for Polynomial {
    /// Prints terms in descending graded-lex order, e.g.
    /// `x0^6 + 3*x0^4 - 9*x0^2`. The output parses back to the same
    /// polynomial (given the same working-degree hint).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exp, &coeff) in self.terms.iter().rev() {
            let mag = coeff.abs();
            if first {
                if coeff < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if coeff < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if exp.is_constant() || mag != 1.0 {
                factors.push(format_coeff(mag));
            }
            for (i, &e) in exp.iter().enumerate() {
                if e == 1 {
                    factors.push(format!("x{}", i));
                } else if e > 1 {
                    factors.push(format!("x{}^{}", i, e));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: f64,
    exp: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    n: usize,
    two_d: u32,
    terms: Vec<TermRepr>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = PolyRepr {
            n: self.num_vars,
            two_d: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| TermRepr {
                    coeff: c,
                    exp: e.as_slice().to_vec(),
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        Polynomial::new(
            repr.n,
            repr.two_d,
            repr.terms.into_iter().map(|t| (t.exp, t.coeff)),
        )
        .map_err(D::Error::custom)
    }
}
