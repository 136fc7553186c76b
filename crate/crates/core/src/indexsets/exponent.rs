use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for comparing floating exponents.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Complex exponent `z` of a term `rho^{iz}`.
///
/// Exponents built from rational data stay exact, so that collisions between
/// shifted copies are detected without rounding; anything else is a float.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum Exponent {
    Exact { re: Rational64, im: Rational64 },
    Approx { re: f64, im: f64 },
}

impl Exponent {
    pub fn exact(re: Rational64, im: Rational64) -> Self {
        Exponent::Exact { re, im }
    }

    /// Purely imaginary integer exponent `-j i`.
    pub fn neg_imag(j: i64) -> Self {
        Exponent::Exact { re: Rational64::zero(), im: Rational64::from_integer(-j) }
    }

    /// Float exponent, promoted to an exact one when both parts are
    /// representable with a small denominator.
    pub fn from_f64(re: f64, im: f64) -> Self {
        match (small_rational(re), small_rational(im)) {
            (Some(r), Some(i)) => Exponent::Exact { re: r, im: i },
            _ => Exponent::Approx { re, im },
        }
    }

    pub fn re(&self) -> f64 {
        match self {
            Exponent::Exact { re, .. } => re.to_f64().unwrap_or(f64::NAN),
            Exponent::Approx { re, .. } => *re,
        }
    }

    pub fn im(&self) -> f64 {
        match self {
            Exponent::Exact { im, .. } => im.to_f64().unwrap_or(f64::NAN),
            Exponent::Approx { im, .. } => *im,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }

    /// `z - j i`.
    pub fn shift_down(&self, j: i64) -> Self {
        match *self {
            Exponent::Exact { re, im } => Exponent::Exact { re, im: im - Rational64::from_integer(j) },
            Exponent::Approx { re, im } => Exponent::Approx { re, im: im - j as f64 },
        }
    }

    /// Equality: exact for two rational exponents, within
    /// [`EXPONENT_TOL`] otherwise.
    pub fn same(&self, other: &Exponent) -> bool {
        match (self, other) {
            (Exponent::Exact { re: a, im: b }, Exponent::Exact { re: c, im: d }) => a == c && b == d,
            _ => (self.re() - other.re()).abs() <= EXPONENT_TOL && (self.im() - other.im()).abs() <= EXPONENT_TOL,
        }
    }

    /// Canonical order: decreasing imaginary part, then increasing real part.
    pub fn order(&self, other: &Exponent) -> Ordering {
        if self.same(other) {
            return Ordering::Equal;
        }
        let by_im = match (self, other) {
            (Exponent::Exact { im: a, .. }, Exponent::Exact { im: b, .. }) => b.cmp(a),
            _ => other.im().partial_cmp(&self.im()).unwrap_or(Ordering::Equal),
        };
        if by_im != Ordering::Equal && (self.im() - other.im()).abs() > EXPONENT_TOL {
            return by_im;
        }
        match (self, other) {
            (Exponent::Exact { re: a, .. }, Exponent::Exact { re: b, .. }) if a != b => a.cmp(b),
            _ => self.re().partial_cmp(&other.re()).unwrap_or(Ordering::Equal),
        }
    }

    pub fn parse_part(s: &str) -> Result<PartValue> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in '{s}'")))?;
            let d: i64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in '{s}'")))?;
            if d == 0 {
                return Err(Error::Parse(format!("zero denominator in '{s}'")));
            }
            return Ok(PartValue::Exact(Rational64::new(n, d)));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(PartValue::Exact(r));
        }
        s.parse::<f64>()
            .map(PartValue::Float)
            .map_err(|_| Error::Parse(format!("cannot parse '{s}' as a number")))
    }

    pub fn from_parts(re: PartValue, im: PartValue) -> Self {
        match (re, im) {
            (PartValue::Exact(r), PartValue::Exact(i)) => Exponent::Exact { re: r, im: i },
            (r, i) => Exponent::Approx { re: r.to_f64(), im: i.to_f64() },
        }
    }
}

/// One parsed component of an exponent.
#[derive(Clone, Copy, Debug)]
pub enum PartValue {
    Exact(Rational64),
    Float(f64),
}

impl PartValue {
    fn to_f64(self) -> f64 {
        match self {
            PartValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            PartValue::Float(x) => x,
        }
    }
}

/// Plain decimal literal such as `-0.25` or `3`, read exactly.
fn parse_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || int.len() + frac.len() > 17 {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let r = Rational64::new(digits, den);
    Some(if neg { -r } else { r })
}

fn small_rational(x: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    for den in [1i64, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 50, 100, 1000] {
        let n = x * den as f64;
        if n.abs() < 1e12 && n == n.round() {
            return Some(Rational64::new(n as i64, den));
        }
    }
    None
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |r: &Rational64| {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        };
        match self {
            Exponent::Exact { re, im } => write!(f, "{},{}", part(re), part(im)),
            Exponent::Approx { re, im } => write!(f, "{re:?},{im:?}"),
        }
    }
}
