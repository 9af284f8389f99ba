//! Shared fixtures for the integration suites: a handful of polynomials with
//! independently known lower bounds, plus comparison helpers.

#![allow(dead_code)]

use gpbound::parse::parse_polynomial;
use gpbound::poly::Polynomial;

/// `x^6 + 3x^4 - 9x^2`. Global bound -2*3^(3/2); ball bound M - 9 M^(1/3)
/// for M below 3^(3/2), saturating at the global value after that.
pub fn univariate_sextic() -> Polynomial {
    parse_polynomial("x^6 + 3x^4 - 9x^2", None, None).unwrap()
}

pub const UNIVARIATE_SEXTIC_GLOBAL: f64 = -10.392304845413264; // -2 * 3^(3/2)

pub fn univariate_sextic_ball(m: f64) -> f64 {
    let sat = 3.0f64.powf(1.5);
    if m < sat {
        m - 9.0 * m.powf(1.0 / 3.0)
    } else {
        UNIVARIATE_SEXTIC_GLOBAL
    }
}

/// `x^4 - 8x^3 + 8x^2 + 1`. Global bound -431; on the unit ball the bound is
/// -6 with multiplier 5.
pub fn quartic_with_cubic() -> Polynomial {
    parse_polynomial("x^4 - 8x^3 + 8x^2 + 1", None, None).unwrap()
}

/// `x0^4 + x1^4 - 6 x0^3 x1`. The mixed term dominates both diagonals, so the
/// global bound degenerates to -inf while ball bounds stay finite:
/// M * (1 - 3^(7/4) / 2) for every M.
pub fn cross_quartic() -> Polynomial {
    parse_polynomial("x0^4 + x1^4 - 6x0^3*x1", None, None).unwrap()
}

pub fn cross_quartic_ball(m: f64) -> f64 {
    m * (1.0 - 3.0f64.powf(1.75) / 2.0)
}

/// Dense four-variable sextic with 29 off-diagonal terms and unit diagonal.
pub fn dense_sextic() -> Polynomial {
    parse_polynomial(
        "w^6 + x^6 + y^6 + z^6 \
         + 7w^4*y - 10w^3*x*y + 5w*x^3*y - 3w^3*y^2 - 3w^2*x*y^2 + 9w*x*y^3 \
         - 10x*y^4 + 7w^4*z + w*x^3*z - 5x*y*z^3 - 5z^5 \
         + 8w^4 + 8w^2*x^2 - 4w*x^3 - w^3*y + 2w*x^2*y + 3w^2*y^2 - w*x*y^2 \
         + w*y^3 + 7w^2*x*z - 3y^3*z + w^2*z^2 + 2y^2*z^2 \
         - 2w^3 + 8x^3 - 5w^2*y + 8x^2*z + 3x*z - 3z + 5",
        None,
        None,
    )
    .unwrap()
}

pub const DENSE_SEXTIC_GLOBAL: f64 = -9_580_211.794;
pub const DENSE_SEXTIC_BALL: [(f64, f64); 3] =
    [(1.0, -39.022), (10.0, -213.631), (100.0, -1_215.730)];

/// Four-variable sextic with weighted diagonal (8, 6, 4, 2).
pub fn weighted_sextic() -> Polynomial {
    parse_polynomial(
        "8w^6 + 6x^6 + 4y^6 + 2z^6 - 3w^3*x^2 + 8w^2*x*y*z - 9x*z^4 + 2w^2*x*z - 3x*z^2",
        None,
        None,
    )
    .unwrap()
}

pub const WEIGHTED_SEXTIC_BALL: [(f64, f64); 4] = [
    (1.0, -6.605),
    (10.0, -27.151),
    (100.0, -73.458),
    (1000.0, -74.971),
];

/// Three-variable polynomial treated at degree 8 with no diagonal at all, so
/// only ball bounds are finite.
pub fn zero_diagonal_octic() -> Polynomial {
    parse_polynomial(
        "-7x^3*y^4 + 13x^2*y^5 + 5y^4*z + 18x*z^4 - 5z^2",
        Some(3),
        Some(8),
    )
    .unwrap()
}

pub const ZERO_DIAGONAL_OCTIC_BALL: [(f64, f64); 3] =
    [(1.0, -23.4559), (10.0, -117.9727), (100.0, -736.0259)];

/// Four variables at degree 40, again without any diagonal.
pub fn degree_forty() -> Polynomial {
    parse_polynomial(
        "-9w^12*x^9*y^12*z^5 + 19w^8*x^2*y*z^20 - 3w^11*x^6*y^9*z^4 \
         - 3w^13*x^14*z - 18w^4*x^12*y^3",
        Some(4),
        Some(40),
    )
    .unwrap()
}

pub const DEGREE_FORTY_BALL: [(f64, f64); 3] =
    [(1.0, -20.0645), (10.0, -106.4946), (100.0, -584.027)];

/// Twenty variables at degree 20: full unit diagonal plus seven long mixed
/// monomials.
pub fn twenty_variable() -> Polynomial {
    let mut src = String::new();
    for i in 0..20 {
        if i > 0 {
            src.push_str(" + ");
        }
        src.push_str(&format!("x{i}^20"));
    }
    src.push_str(
        " + x2^6*x3^3*x5*x7*x8^3*x9*x10*x11^2*x12 \
         - 17x1*x2*x3*x6*x7*x9^2*x10*x12^4*x14^4*x16*x18*x19 \
         + 19x4^6*x5^4*x6^2*x9*x12*x17^2*x18*x19^2 \
         - 10x0*x1^5*x2*x8^3*x12*x15*x17*x18^2*x19^4 \
         - 11x0^2*x2*x4^3*x5*x6*x12^4*x15^4*x16*x17 \
         + 15x1^2*x5^3*x6*x8*x9*x14^2*x15^4*x18^2*x19^2 \
         + 2x1*x2^2*x4^3*x6*x10*x11^2*x13*x15*x17*x18*x19^3",
    );
    parse_polynomial(&src, Some(20), Some(20)).unwrap()
}

pub const TWENTY_VARIABLE_GLOBAL: f64 = -84_853_211_002.07;
pub const TWENTY_VARIABLE_BALL: [(f64, f64); 3] = [
    (10.0, -41.6538),
    (100.0, -340.6339),
    (1000.0, -2_774.217),
];

/// |got - want| <= rel * max(1, |want|), reported with context on failure.
pub fn check_rel(label: &str, got: f64, want: f64, rel: f64) -> Result<(), String> {
    let tol = rel * want.abs().max(1.0);
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!(
            "{label}: got {got:.9}, want {want:.9} (tolerance {tol:.3e}, off by {:.3e})",
            (got - want).abs()
        ))
    }
}
