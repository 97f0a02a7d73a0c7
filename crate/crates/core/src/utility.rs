//! Parametric utility families, their derivatives, and pointwise Arrow-Pratt measures.
//!
//! Every family is increasing and strictly concave on its valid domain, so absolute risk
//! aversion `-U''/U'` is strictly positive there. Relative risk aversion is wealth times
//! absolute risk aversion and is only defined for positive wealth.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::roots::{bisect, MAX_BISECTION_STEPS};

/// Relative tolerance on `|U(w) - target|` accepted by [`UtilitySpec::invert`].
pub const INVERSION_TOLERANCE: f64 = 1e-12;

const MAX_BRACKET_STEPS: usize = 2200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilitySpec {
    /// `U(W) = W - bW^2`, valid for `W < 1/(2b)`.
    Quadratic { b: f64 },
    /// `U(W) = ln(W + a)`.
    Log { a: f64 },
    /// `U(W) = (W + a)^c` with `0 < c < 1`.
    Power { a: f64, c: f64 },
    /// `U(W) = -(W + a)^(-c)`.
    NegPower { a: f64, c: f64 },
    /// `U(W) = sqrt(W)`.
    Sqrt,
    /// `U(W) = -exp(-c (W + a))`.
    Exponential { a: f64, c: f64 },
}

/// Utility value and its first two derivatives at one wealth level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub first_derivative: f64,
    pub second_derivative: f64,
}

/// Internal representation; `Sqrt` is the power family with `a = 0, c = 1/2`.
#[derive(Debug, Clone, Copy)]
enum Shape {
    Quadratic(f64),
    Log(f64),
    Power(f64, f64),
    NegPower(f64, f64),
    Exponential(f64, f64),
}

impl UtilitySpec {
    pub fn quadratic(b: f64) -> Result<Self> {
        Self::Quadratic { b }.validated()
    }

    pub fn log(a: f64) -> Result<Self> {
        Self::Log { a }.validated()
    }

    pub fn power(a: f64, c: f64) -> Result<Self> {
        Self::Power { a, c }.validated()
    }

    pub fn neg_power(a: f64, c: f64) -> Result<Self> {
        Self::NegPower { a, c }.validated()
    }

    pub fn exponential(a: f64, c: f64) -> Result<Self> {
        Self::Exponential { a, c }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter constraints of the family.
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        let ok = match *self {
            UtilitySpec::Quadratic { b } => finite(b) && b > 0.0,
            UtilitySpec::Log { a } => finite(a) && a >= 0.0,
            UtilitySpec::Power { a, c } => finite(a) && finite(c) && a > 0.0 && c > 0.0 && c < 1.0,
            UtilitySpec::NegPower { a, c } => finite(a) && finite(c) && a > 0.0 && c > 0.0,
            UtilitySpec::Sqrt => true,
            UtilitySpec::Exponential { a, c } => finite(a) && finite(c) && a >= 0.0 && c > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid utility parameters: {self}")))
        }
    }

    fn shape(&self) -> Shape {
        match *self {
            UtilitySpec::Quadratic { b } => Shape::Quadratic(b),
            UtilitySpec::Log { a } => Shape::Log(a),
            UtilitySpec::Power { a, c } => Shape::Power(a, c),
            UtilitySpec::NegPower { a, c } => Shape::NegPower(a, c),
            UtilitySpec::Sqrt => Shape::Power(0.0, 0.5),
            UtilitySpec::Exponential { a, c } => Shape::Exponential(a, c),
        }
    }

    /// Open interval of wealth on which the family is increasing and concave.
    pub fn domain(&self) -> (f64, f64) {
        match self.shape() {
            Shape::Quadratic(b) => (f64::NEG_INFINITY, 1.0 / (2.0 * b)),
            Shape::Log(a) | Shape::Power(a, _) | Shape::NegPower(a, _) => (-a, f64::INFINITY),
            Shape::Exponential(..) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn in_domain(&self, w: f64) -> bool {
        let (lo, hi) = self.domain();
        w.is_finite() && w > lo && w < hi
    }

    fn check_domain(&self, w: f64) -> Result<()> {
        self.validate()?;
        if self.in_domain(w) {
            Ok(())
        } else {
            let (lo, hi) = self.domain();
            Err(Error::Domain(format!(
                "wealth {w} outside the domain ({lo}, {hi}) of {self}"
            )))
        }
    }

    /// Returns `(U(w), U'(w), U''(w))`.
    pub fn evaluate(&self, w: f64) -> Result<Evaluation> {
        self.check_domain(w)?;
        Ok(self.evaluate_unchecked(w))
    }

    fn evaluate_unchecked(&self, w: f64) -> Evaluation {
        let (value, first_derivative, second_derivative) = match self.shape() {
            Shape::Quadratic(b) => (w - b * w * w, 1.0 - 2.0 * b * w, -2.0 * b),
            Shape::Log(a) => {
                let x = w + a;
                (x.ln(), 1.0 / x, -1.0 / (x * x))
            }
            Shape::Power(a, c) => {
                let x = w + a;
                let v = x.powf(c);
                (v, c * v / x, c * (c - 1.0) * v / (x * x))
            }
            Shape::NegPower(a, c) => {
                let x = w + a;
                let v = x.powf(-c);
                (-v, c * v / x, -c * (c + 1.0) * v / (x * x))
            }
            Shape::Exponential(a, c) => {
                let e = (-c * (w + a)).exp();
                (-e, c * e, -c * c * e)
            }
        };
        Evaluation {
            value,
            first_derivative,
            second_derivative,
        }
    }

    /// Utility value only.
    pub fn value(&self, w: f64) -> Result<f64> {
        self.check_domain(w)?;
        Ok(self.evaluate_unchecked(w).value)
    }

    pub(crate) fn marginal(&self, w: f64) -> f64 {
        self.evaluate_unchecked(w).first_derivative
    }

    /// Absolute risk aversion `-U''(w)/U'(w)`, in inverse wealth units.
    ///
    /// Uses the reduced per-family form of the ratio, so CARA utilities return exactly `c`
    /// at every wealth level.
    pub fn ara(&self, w: f64) -> Result<f64> {
        self.check_domain(w)?;
        Ok(match self.shape() {
            Shape::Quadratic(b) => 2.0 * b / (1.0 - 2.0 * b * w),
            Shape::Log(a) => 1.0 / (w + a),
            Shape::Power(a, c) => (1.0 - c) / (w + a),
            Shape::NegPower(a, c) => (1.0 + c) / (w + a),
            Shape::Exponential(_, c) => c,
        })
    }

    /// Relative risk aversion `w * ara(w)`; requires `w > 0`.
    pub fn rra(&self, w: f64) -> Result<f64> {
        let ara = self.ara(w)?;
        if w <= 0.0 {
            return Err(Error::Domain(format!(
                "relative risk aversion needs positive wealth, got {w}"
            )));
        }
        Ok(w * ara)
    }

    /// Supremum and infimum of `U` over the valid domain (both open).
    fn range(&self) -> (f64, f64) {
        match self.shape() {
            Shape::Quadratic(b) => (f64::NEG_INFINITY, 1.0 / (4.0 * b)),
            Shape::Log(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Shape::Power(..) => (0.0, f64::INFINITY),
            Shape::NegPower(..) | Shape::Exponential(..) => (f64::NEG_INFINITY, 0.0),
        }
    }

    /// Inverts the strictly increasing utility: finds `w` with `U(w) = target`.
    ///
    /// The bracket is grown geometrically away from the finite end of the domain (or from the
    /// origin for the exponential family) and then bisected.
    pub fn invert(&self, target: f64) -> Result<f64> {
        self.validate()?;
        let (inf, sup) = self.range();
        if !target.is_finite() || target <= inf || target >= sup {
            return Err(Error::Range(format!(
                "utility value {target} outside the range ({inf}, {sup}) of {self}"
            )));
        }
        let u = |w: f64| self.evaluate_unchecked(w).value - target;
        let (lo, hi) = self.domain();
        let (left, right) = if lo.is_finite() {
            bracket_from_boundary(|d| u(lo + d), BoundarySide::Lower)
                .map(|(d0, d1)| (lo + d0, lo + d1))
        } else if hi.is_finite() {
            bracket_from_boundary(|d| u(hi - d), BoundarySide::Upper)
                .map(|(d0, d1)| (hi - d1, hi - d0))
        } else {
            bracket_unbounded(u)
        }
        .ok_or_else(|| {
            Error::Range(format!("could not bracket utility value {target} for {self}"))
        })?;

        let (w, _) = bisect(u, left, right, MAX_BISECTION_STEPS)?;
        let residual = u(w).abs();
        if residual > INVERSION_TOLERANCE * (1.0 + target.abs()) {
            return Err(Error::Convergence(format!(
                "inversion of {self} at {target} left residual {residual:e}"
            )));
        }
        Ok(w)
    }
}

#[derive(Clone, Copy)]
enum BoundarySide {
    Lower,
    Upper,
}

/// Searches distances `d` from a finite domain boundary. Returns `(d_near, d_far)` with the
/// sign change of `f` inside.
fn bracket_from_boundary<F: Fn(f64) -> f64>(f: F, side: BoundarySide) -> Option<(f64, f64)> {
    // Moving away from the lower boundary increases U; from the upper boundary it decreases U.
    let near_sign_wanted = match side {
        BoundarySide::Lower => -1.0,
        BoundarySide::Upper => 1.0,
    };
    let mut d = 1.0_f64;
    let f1 = f(d);
    if f1 == 0.0 {
        return Some((d, d));
    }
    if f1.signum() == near_sign_wanted {
        // Point at d = 1 is on the "near" side; grow outward.
        for _ in 0..MAX_BRACKET_STEPS {
            let next = d * 2.0;
            if !next.is_finite() {
                return None;
            }
            let fv = f(next);
            if fv.is_nan() {
                return None;
            }
            if fv.signum() != near_sign_wanted {
                return Some((d, next));
            }
            d = next;
        }
    } else {
        // Shrink toward the boundary.
        for _ in 0..MAX_BRACKET_STEPS {
            let next = d * 0.5;
            if next == 0.0 {
                return None;
            }
            let fv = f(next);
            if fv.is_nan() {
                return None;
            }
            if fv == 0.0 || fv.signum() == near_sign_wanted {
                return Some((next, d));
            }
            d = next;
        }
    }
    None
}

fn bracket_unbounded<F: Fn(f64) -> f64>(f: F) -> Option<(f64, f64)> {
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Some((0.0, 0.0));
    }
    let direction = if f0 < 0.0 { 1.0 } else { -1.0 };
    let mut prev = 0.0;
    let mut step = 1.0_f64;
    for _ in 0..MAX_BRACKET_STEPS {
        let x = direction * step;
        if !x.is_finite() {
            return None;
        }
        let fv = f(x);
        if fv.is_nan() {
            return None;
        }
        if fv == 0.0 || fv.signum() != f0.signum() {
            return Some(if direction > 0.0 { (prev, x) } else { (x, prev) });
        }
        prev = x;
        step *= 2.0;
    }
    None
}

impl fmt::Display for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            UtilitySpec::Quadratic { b } => write!(f, "quadratic:b={b}"),
            UtilitySpec::Log { a } => write!(f, "log:a={a}"),
            UtilitySpec::Power { a, c } => write!(f, "power:a={a},c={c}"),
            UtilitySpec::NegPower { a, c } => write!(f, "negpower:a={a},c={c}"),
            UtilitySpec::Sqrt => write!(f, "sqrt"),
            UtilitySpec::Exponential { a, c } => write!(f, "exp:a={a},c={c}"),
        }
    }
}

/// Parses `name` or `name:key=value,key=value`.
pub(crate) fn parse_params(text: &str) -> Result<(String, Vec<(String, f64)>)> {
    let text = text.trim();
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (text, None),
    };
    let mut params = Vec::new();
    if let Some(rest) = rest {
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in '{text}'")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad number '{value}' in '{text}'")))?;
            params.push((key.trim().to_ascii_lowercase(), value));
        }
    }
    Ok((name.to_ascii_lowercase(), params))
}

pub(crate) struct ParamSet {
    source: String,
    params: Vec<(String, f64)>,
}

impl ParamSet {
    pub(crate) fn new(source: &str, params: Vec<(String, f64)>) -> Self {
        Self {
            source: source.to_string(),
            params,
        }
    }

    pub(crate) fn get(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.params.iter().find(|(k, _)| k == key) {
            Some((_, v)) => Ok(*v),
            None => default.ok_or_else(|| {
                Error::Config(format!("missing parameter '{key}' in '{}'", self.source))
            }),
        }
    }

    pub(crate) fn only(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "unknown parameter '{k}' in '{}'",
                    self.source
                )));
            }
        }
        Ok(())
    }
}

impl FromStr for UtilitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = parse_params(s)?;
        let p = ParamSet::new(s, params);
        let spec = match name.as_str() {
            "quadratic" | "quad" => {
                p.only(&["b"])?;
                UtilitySpec::Quadratic { b: p.get("b", None)? }
            }
            "log" => {
                p.only(&["a"])?;
                UtilitySpec::Log { a: p.get("a", Some(0.0))? }
            }
            "power" => {
                p.only(&["a", "c"])?;
                UtilitySpec::Power {
                    a: p.get("a", None)?,
                    c: p.get("c", None)?,
                }
            }
            "negpower" => {
                p.only(&["a", "c"])?;
                UtilitySpec::NegPower {
                    a: p.get("a", None)?,
                    c: p.get("c", None)?,
                }
            }
            "sqrt" => {
                p.only(&[])?;
                UtilitySpec::Sqrt
            }
            "exp" | "exponential" => {
                p.only(&["a", "c"])?;
                UtilitySpec::Exponential {
                    a: p.get("a", Some(0.0))?,
                    c: p.get("c", None)?,
                }
            }
            other => return Err(Error::Config(format!("unknown utility family '{other}'"))),
        };
        spec.validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}
