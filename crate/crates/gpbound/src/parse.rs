//! Text parser for polynomial expressions.
//!
//! Two variable naming styles are accepted (but not mixed): indexed names
//! `x0, x1, ...` and single letters drawn from `w, x, y, z`. Letters are
//! assigned indices in the order `w < x < y < z` restricted to the letters
//! that actually appear, so `x*y^2 + z` reads as variables 0, 1, 2.
//!
//! Grammar, informally:
//!
//! ```text
//! poly   := [sign] term { sign term }
//! term   := factor { ["*"] factor }      (juxtaposition multiplies)
//! factor := number | variable ["^" integer]
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::poly::{PolyError, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("parse error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("{0}")]
    Hint(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    /// `x` with an explicit index, e.g. `x12`.
    Indexed(usize),
    /// bare letter from {w, x, y, z}
    Letter(char),
    Caret,
    Star,
    Plus,
    Minus,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // scientific suffix, careful not to eat a variable letter:
                // only consume e/E when followed by digits or a signed digit run
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("invalid number `{}`", text)))?;
                out.push((start, Tok::Num(v)));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                i += 1;
                let mut digits = String::new();
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    digits.push(bytes[i] as char);
                    i += 1;
                }
                if !digits.is_empty() {
                    if c != 'x' {
                        return Err(syntax(
                            start,
                            format!("indexed variables must be written x<k>, got `{}{}`", c, digits),
                        ));
                    }
                    let idx: usize = digits
                        .parse()
                        .map_err(|_| syntax(start, "variable index out of range"))?;
                    out.push((start, Tok::Indexed(idx)));
                } else {
                    if !matches!(c, 'w' | 'x' | 'y' | 'z') {
                        return Err(syntax(
                            start,
                            format!("unknown variable `{}` (use w,x,y,z or x0..xN)", c),
                        ));
                    }
                    out.push((start, Tok::Letter(c)));
                }
            }
            _ => return Err(syntax(i, format!("unexpected character `{}`", c))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum VarRef {
    Indexed(usize),
    Letter(char),
}

struct RawTerm {
    coeff: f64,
    exps: BTreeMap<VarRef, u32>,
}

/// Parses an expression into a polynomial.
///
/// `n_hint` fixes the variable count (it must cover every variable used);
/// `degree_hint` fixes the even working degree. Without hints the variable
/// count is inferred from the variables that appear and the working degree is
/// the smallest even integer covering the total degree (at least 2).
pub fn parse_polynomial(
    src: &str,
    n_hint: Option<usize>,
    degree_hint: Option<u32>,
) -> Result<Polynomial, ParseError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(syntax(0, "empty expression"));
    }

    let mut terms: Vec<RawTerm> = Vec::new();
    let mut pos = 0usize;
    let end = src.len();

    while pos < toks.len() {
        // sign
        let mut sign = 1.0;
        loop {
            match toks.get(pos) {
                Some((_, Tok::Plus)) => pos += 1,
                Some((_, Tok::Minus)) => {
                    sign = -sign;
                    pos += 1;
                }
                _ => break,
            }
        }
        let mut coeff = sign;
        let mut exps: BTreeMap<VarRef, u32> = BTreeMap::new();
        let mut saw_factor = false;
        loop {
            match toks.get(pos) {
                Some(&(_, Tok::Num(v))) => {
                    coeff *= v;
                    pos += 1;
                    saw_factor = true;
                }
                Some(&(p, ref t @ (Tok::Indexed(_) | Tok::Letter(_)))) => {
                    let var = match t {
                        Tok::Indexed(k) => VarRef::Indexed(*k),
                        Tok::Letter(c) => VarRef::Letter(*c),
                        _ => unreachable!(),
                    };
                    pos += 1;
                    let mut e = 1u32;
                    if let Some((_, Tok::Caret)) = toks.get(pos) {
                        pos += 1;
                        match toks.get(pos) {
                            Some(&(ep, Tok::Num(v))) => {
                                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                                    return Err(syntax(
                                        ep,
                                        "exponent must be a nonnegative integer",
                                    ));
                                }
                                e = v as u32;
                                pos += 1;
                            }
                            other => {
                                let p = other.map(|&(p, _)| p).unwrap_or(end);
                                return Err(syntax(p, "expected integer exponent after `^`"));
                            }
                        }
                    }
                    *exps.entry(var).or_insert(0) += e;
                    let _ = p;
                    saw_factor = true;
                }
                Some((_, Tok::Star)) => {
                    if !saw_factor {
                        let p = toks[pos].0;
                        return Err(syntax(p, "`*` without a preceding factor"));
                    }
                    pos += 1;
                    // must be followed by a factor
                    match toks.get(pos) {
                        Some((_, Tok::Num(_) | Tok::Indexed(_) | Tok::Letter(_))) => {}
                        other => {
                            let p = other.map(|&(p, _)| p).unwrap_or(end);
                            return Err(syntax(p, "expected factor after `*`"));
                        }
                    }
                }
                Some((_, Tok::Plus | Tok::Minus)) | None => break,
                Some(&(p, Tok::Caret)) => {
                    return Err(syntax(p, "`^` must follow a variable"));
                }
            }
        }
        if !saw_factor {
            let p = toks.get(pos).map(|&(p, _)| p).unwrap_or(end);
            return Err(syntax(p, "expected a term"));
        }
        terms.push(RawTerm { coeff, exps });
    }

    // resolve variable naming
    let mut letters: Vec<char> = Vec::new();
    let mut max_index: Option<usize> = None;
    let mut style_mixed = false;
    for t in &terms {
        for var in t.exps.keys() {
            match *var {
                VarRef::Indexed(k) => {
                    max_index = Some(max_index.map_or(k, |m: usize| m.max(k)));
                    if !letters.is_empty() {
                        style_mixed = true;
                    }
                }
                VarRef::Letter(c) => {
                    if max_index.is_some() {
                        style_mixed = true;
                    }
                    if !letters.contains(&c) {
                        letters.push(c);
                    }
                }
            }
        }
    }
    if style_mixed {
        return Err(ParseError::Hint(
            "cannot mix single-letter variables with indexed x<k> names".into(),
        ));
    }
    letters.sort_unstable(); // w < x < y < z in ASCII
    let inferred_n = match max_index {
        Some(m) => m + 1,
        None => letters.len(),
    };
    let n = match n_hint {
        Some(h) => {
            if h < inferred_n.max(1) {
                return Err(ParseError::Hint(format!(
                    "n = {} is too small for an expression using {} variables",
                    h, inferred_n
                )));
            }
            h
        }
        None => inferred_n.max(1),
    };

    let index_of = |var: &VarRef| -> usize {
        match *var {
            VarRef::Indexed(k) => k,
            VarRef::Letter(c) => letters.iter().position(|&l| l == c).unwrap(),
        }
    };

    let mut poly_terms: Vec<(Vec<u32>, f64)> = Vec::new();
    let mut max_total: u64 = 0;
    for t in &terms {
        let mut exp = vec![0u32; n];
        for (var, &e) in &t.exps {
            exp[index_of(var)] += e;
        }
        max_total = max_total.max(exp.iter().map(|&e| e as u64).sum());
        poly_terms.push((exp, t.coeff));
    }

    let degree = match degree_hint {
        Some(d) => {
            if d == 0 || d % 2 != 0 {
                return Err(ParseError::Hint(format!(
                    "working degree hint {} is not a positive even integer",
                    d
                )));
            }
            if (d as u64) < max_total {
                return Err(ParseError::Hint(format!(
                    "working degree hint {} is below the total degree {}",
                    d, max_total
                )));
            }
            d
        }
        None => {
            let d = max_total.max(2);
            (d + d % 2) as u32
        }
    };

    Ok(Polynomial::new(n, degree, poly_terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_letters() {
        let p = parse_polynomial("x^6 + 3*x^4 - 9*x^2", None, None).unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(p.degree(), 6);
        assert_eq!(p.coefficient(&[6]), 1.0);
        assert_eq!(p.coefficient(&[4]), 3.0);
        assert_eq!(p.coefficient(&[2]), -9.0);
    }

    #[test]
    fn indexed_names_match_letters() {
        let a = parse_polynomial("x0^6 + 3*x0^4 - 9*x0^2", None, None).unwrap();
        let b = parse_polynomial("x^6 + 3*x^4 - 9*x^2", None, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn letter_ordering_is_wxyz() {
        let p = parse_polynomial("w*x^2 + y^3*z", None, None).unwrap();
        assert_eq!(p.num_vars(), 4);
        assert_eq!(p.coefficient(&[1, 2, 0, 0]), 1.0);
        assert_eq!(p.coefficient(&[0, 0, 3, 1]), 1.0);
        // subset of letters compacts
        let q = parse_polynomial("y^2 - z", None, None).unwrap();
        assert_eq!(q.num_vars(), 2);
        assert_eq!(q.coefficient(&[2, 0]), 1.0);
        assert_eq!(q.coefficient(&[0, 1]), -1.0);
    }

    #[test]
    fn degree_hint_round_up_and_validation() {
        // total degree 7 rounds up to 8 without a hint
        let p = parse_polynomial("-7*x^3*y^4 + 5*z", None, None).unwrap();
        assert_eq!(p.degree(), 8);
        let q = parse_polynomial("-7*x^3*y^4 + 5*z", None, Some(10)).unwrap();
        assert_eq!(q.degree(), 10);
        assert!(matches!(
            parse_polynomial("x^4", None, Some(2)),
            Err(ParseError::Hint(_))
        ));
        assert!(matches!(
            parse_polynomial("x^4", None, Some(5)),
            Err(ParseError::Hint(_))
        ));
    }

    #[test]
    fn constant_and_zero() {
        let z = parse_polynomial("0", None, None).unwrap();
        assert_eq!(z.num_terms(), 0);
        assert_eq!(z.num_vars(), 1);
        let c = parse_polynomial("5", Some(3), None).unwrap();
        assert_eq!(c.num_vars(), 3);
        assert_eq!(c.constant_term(), 5.0);
    }

    #[test]
    fn implicit_multiplication_and_merging() {
        let p = parse_polynomial("3x^2y - 2*x*x*y", None, None).unwrap();
        assert_eq!(p.coefficient(&[2, 1]), 1.0);
        let q = parse_polynomial("2 3 x", None, None).unwrap(); // 2*3*x
        assert_eq!(q.coefficient(&[1]), 6.0);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_polynomial("x^", None, None) {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected syntax error, got {:?}", other),
        }
        match parse_polynomial("x + ?", None, None) {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {:?}", other),
        }
        assert!(parse_polynomial("", None, None).is_err());
        assert!(parse_polynomial("x2 + y", None, None).is_err()); // mixed styles
        assert!(parse_polynomial("q^2", None, None).is_err()); // unknown letter
    }

    #[test]
    fn n_hint_extends_and_validates() {
        let p = parse_polynomial("x0^2", Some(3), None).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert!(matches!(
            parse_polynomial("x0 + x5", Some(3), None),
            Err(ParseError::Hint(_))
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let p = parse_polynomial("-7*x0^3*x1^4 + 13*x0^2*x1^5 + 5*x1^4*x2 + 18*x0*x2^4 - 5*x2^2", None, Some(8))
            .unwrap();
        let text = format!("{}", p);
        let q = parse_polynomial(&text, Some(p.num_vars()), Some(p.degree())).unwrap();
        assert_eq!(p, q);
    }
}
