//! Two-asset allocation between a risky return `R` and a risk-free rate `R_f`.
//!
//! Starting wealth is normalised to one, so final wealth is `W1 = (1 + R_f) + w_s (R - R_f)`
//! and `w_s` is the fraction of wealth held in the risky asset. Leverage (`w_s > 1`) and short
//! positions (`w_s < 0`) are allowed.
//!
//! The closed forms come from a second-order expansion of expected utility in `w_s`; only the
//! quadratic one is exact. [`weight_numeric`] maximises expected utility directly on a discrete
//! return lottery and serves as the reference for all of them.

use std::fmt;
use std::str::FromStr;

use crate::date::YearMonth;
use crate::error::{Error, Result};
use crate::estimation::MomentSeries;
use crate::lottery::DiscreteLottery;
use crate::roots::{bisect, MAX_BISECTION_STEPS};
use crate::utility::{parse_params, ParamSet, UtilitySpec};

/// Default search interval for the numeric optimiser, before domain feasibility is applied.
pub const DEFAULT_WEIGHT_BRACKET: (f64, f64) = (-20.0, 20.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub mu: f64,
    pub sigma: f64,
    pub rf: f64,
}

impl MarketParams {
    pub fn new(mu: f64, sigma: f64, rf: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && rf.is_finite()) || sigma < 0.0 || rf <= -1.0 {
            return Err(Error::Validation(format!(
                "market params need finite mu, sigma >= 0 and rf > -1, got ({mu}, {sigma}, {rf})"
            )));
        }
        Ok(Self { mu, sigma, rf })
    }

    /// `E[(R - R_f)^2] = mu^2 + sigma^2 - 2 mu R_f + R_f^2`.
    pub fn excess_second_moment(&self) -> f64 {
        self.mu * self.mu + self.sigma * self.sigma - 2.0 * self.mu * self.rf + self.rf * self.rf
    }

    fn checked_denominator(&self) -> Result<f64> {
        let d = self.excess_second_moment();
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::Degenerate(format!(
                "risky asset is riskless and earns the risk-free rate ({self:?})"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightResult {
    pub w_s: f64,
    pub family: UtilitySpec,
}

/// Utility families with a closed-form weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily {
    Quadratic { b: f64 },
    Log,
    Sqrt,
    /// `-exp(-2W)`
    Exponential,
}

impl WeightFamily {
    pub fn utility(&self) -> UtilitySpec {
        match *self {
            WeightFamily::Quadratic { b } => UtilitySpec::Quadratic { b },
            WeightFamily::Log => UtilitySpec::Log { a: 0.0 },
            WeightFamily::Sqrt => UtilitySpec::Sqrt,
            WeightFamily::Exponential => UtilitySpec::Exponential { a: 0.0, c: 2.0 },
        }
    }

    pub fn weight(&self, p: &MarketParams) -> Result<WeightResult> {
        match *self {
            WeightFamily::Quadratic { b } => weight_quadratic(b, p),
            WeightFamily::Log => weight_log(p),
            WeightFamily::Sqrt => weight_sqrt(p),
            WeightFamily::Exponential => weight_exponential(p),
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Quadratic { b } => write!(f, "quadratic:b={b}"),
            WeightFamily::Log => f.write_str("log"),
            WeightFamily::Sqrt => f.write_str("sqrt"),
            WeightFamily::Exponential => f.write_str("exp"),
        }
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = parse_params(s)?;
        let p = ParamSet::new(s, params);
        let fixed = |key: &str, value: f64, wanted: f64| -> Result<()> {
            if value == wanted {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "closed-form weight for '{name}' needs {key}={wanted}, got '{s}'"
                )))
            }
        };
        match name.as_str() {
            "quadratic" | "quad" => {
                p.only(&["b"])?;
                let b = p.get("b", None)?;
                if !(b.is_finite() && b > 0.0) {
                    return Err(Error::Config(format!("quadratic b must be > 0, got '{s}'")));
                }
                Ok(WeightFamily::Quadratic { b })
            }
            "log" => {
                p.only(&["a"])?;
                fixed("a", p.get("a", Some(0.0))?, 0.0)?;
                Ok(WeightFamily::Log)
            }
            "sqrt" => {
                p.only(&[])?;
                Ok(WeightFamily::Sqrt)
            }
            "exp" | "exponential" => {
                p.only(&["a", "c"])?;
                fixed("a", p.get("a", Some(0.0))?, 0.0)?;
                fixed("c", p.get("c", Some(2.0))?, 2.0)?;
                Ok(WeightFamily::Exponential)
            }
            other => Err(Error::Config(format!(
                "no closed-form weight for family '{other}' (use quadratic:b=<b>, log, sqrt or exp)"
            ))),
        }
    }
}

/// Splits a comma-separated family list, keeping `key=value` parameters with their family:
/// `quadratic:b=0.2,log,exp:a=0,c=2` gives three entries.
pub fn parse_family_list(text: &str) -> Result<Vec<WeightFamily>> {
    let mut groups: Vec<String> = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match groups.last_mut() {
            Some(last) if token.contains('=') && !token.contains(':') => {
                last.push(',');
                last.push_str(token);
            }
            _ => groups.push(token.to_string()),
        }
    }
    groups.iter().map(|g| g.parse()).collect()
}

/// `[(mu - rf) - 2b(1 + rf)(mu - rf)] / (2b D)`.
pub fn weight_quadratic(b: f64, p: &MarketParams) -> Result<WeightResult> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("quadratic b must be > 0, got {b}")));
    }
    let d = p.checked_denominator()?;
    let excess = p.mu - p.rf;
    let w_s = (excess - 2.0 * b * (1.0 + p.rf) * excess) / (2.0 * b * d);
    Ok(WeightResult {
        w_s,
        family: UtilitySpec::Quadratic { b },
    })
}

/// `(1 + rf)(mu - rf) / D`.
pub fn weight_log(p: &MarketParams) -> Result<WeightResult> {
    let d = p.checked_denominator()?;
    Ok(WeightResult {
        w_s: (1.0 + p.rf) * (p.mu - p.rf) / d,
        family: WeightFamily::Log.utility(),
    })
}

/// Twice the log weight.
pub fn weight_sqrt(p: &MarketParams) -> Result<WeightResult> {
    Ok(WeightResult {
        w_s: 2.0 * weight_log(p)?.w_s,
        family: UtilitySpec::Sqrt,
    })
}

/// The log weight divided by `2(1 + rf)`, for `U(W) = -exp(-2W)`.
pub fn weight_exponential(p: &MarketParams) -> Result<WeightResult> {
    Ok(WeightResult {
        w_s: weight_log(p)?.w_s / (2.0 * (1.0 + p.rf)),
        family: WeightFamily::Exponential.utility(),
    })
}

/// Open or closed limits on `w_s`; open ends come from the utility domain.
#[derive(Debug, Clone, Copy)]
struct Limit {
    value: f64,
    open: bool,
}

fn feasible_interval(
    u: &UtilitySpec,
    gross_rf: f64,
    excess: &[f64],
    bracket: (f64, f64),
) -> Result<(Limit, Limit)> {
    let (lo_w, hi_w) = u.domain();
    let mut left = Limit {
        value: bracket.0,
        open: false,
    };
    let mut right = Limit {
        value: bracket.1,
        open: false,
    };
    for &d in excess {
        if d == 0.0 {
            if !(gross_rf > lo_w && gross_rf < hi_w) {
                return Err(Error::Domain(format!(
                    "risk-free wealth {gross_rf} outside the domain of {u}"
                )));
            }
            continue;
        }
        let a = (lo_w - gross_rf) / d;
        let b = (hi_w - gross_rf) / d;
        let (min, max) = if d > 0.0 { (a, b) } else { (b, a) };
        if min.is_finite() && min >= left.value {
            left = Limit { value: min, open: true };
        }
        if max.is_finite() && max <= right.value {
            right = Limit { value: max, open: true };
        }
    }
    if left.value >= right.value {
        return Err(Error::Domain(format!(
            "no weight in [{}, {}] keeps every outcome inside the domain of {u}",
            bracket.0, bracket.1
        )));
    }
    Ok((left, right))
}

/// Moves an open limit inward until final wealth at every outcome lies inside the domain.
fn evaluation_point<F: Fn(f64) -> bool>(limit: Limit, toward: f64, feasible: F) -> Option<f64> {
    if !limit.open {
        return Some(limit.value);
    }
    let span = toward - limit.value;
    let mut frac = 1e-12;
    while frac < 0.5 {
        let x = limit.value + span * frac;
        if feasible(x) {
            return Some(x);
        }
        frac *= 16.0;
    }
    None
}

/// Numerically maximises `sum_i p_i U((1 + rf) + w_s (r_i - rf))` over `w_s`.
///
/// Solves the stationarity condition `E[U'(W1)(R - R_f)] = 0`, whose left side is strictly
/// decreasing in `w_s`, by bisection on the default bracket intersected with the set of weights
/// that keep every outcome inside the utility's domain.
pub fn weight_numeric(u: &UtilitySpec, ret_lottery: &DiscreteLottery, rf: f64) -> Result<WeightResult> {
    weight_numeric_in(u, ret_lottery, rf, DEFAULT_WEIGHT_BRACKET)
}

pub fn weight_numeric_in(
    u: &UtilitySpec,
    ret_lottery: &DiscreteLottery,
    rf: f64,
    bracket: (f64, f64),
) -> Result<WeightResult> {
    u.validate()?;
    if !(rf.is_finite() && rf > -1.0) {
        return Err(Error::Validation(format!("risk-free rate must be > -1, got {rf}")));
    }
    let gross_rf = 1.0 + rf;
    let excess: Vec<f64> = ret_lottery.outcomes().iter().map(|r| r - rf).collect();
    let probs = ret_lottery.probabilities();
    let (left, right) = feasible_interval(u, gross_rf, &excess, bracket)?;

    let feasible = |w: f64| excess.iter().all(|d| u.in_domain(gross_rf + w * d));
    let foc = |w: f64| -> f64 {
        excess
            .iter()
            .zip(probs)
            .map(|(d, p)| p * u.marginal(gross_rf + w * d) * d)
            .sum()
    };

    let no_interior = || {
        Error::NoInteriorOptimum(format!(
            "first-order condition for {u} does not change sign on ({}, {})",
            left.value, right.value
        ))
    };
    let a = evaluation_point(left, right.value, feasible).ok_or_else(no_interior)?;
    let b = evaluation_point(right, left.value, feasible).ok_or_else(no_interior)?;
    let (ga, gb) = (foc(a), foc(b));
    if ga == 0.0 {
        return Ok(WeightResult { w_s: a, family: *u });
    }
    if gb == 0.0 {
        return Ok(WeightResult { w_s: b, family: *u });
    }
    if !(ga > 0.0 && gb < 0.0) {
        return Err(no_interior());
    }
    let (w_s, _) = bisect(foc, a, b, MAX_BISECTION_STEPS)?;
    Ok(WeightResult { w_s, family: *u })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatedWeight {
    pub date: YearMonth,
    pub family: WeightFamily,
    pub w_s: f64,
}

/// Closed-form weight at every date of `moments`, paired with the per-period risk-free rate
/// for the same date.
pub fn weight_series(
    family: WeightFamily,
    moments: &MomentSeries,
    rf_series: &[(YearMonth, f64)],
) -> Result<Vec<DatedWeight>> {
    moments
        .entries
        .iter()
        .map(|e| {
            let rf = rf_series
                .binary_search_by(|r| r.0.cmp(&e.date))
                .map(|i| rf_series[i].1)
                .map_err(|_| Error::Alignment(format!("no risk-free rate for {}", e.date)))?;
            let p = MarketParams::new(e.mu, e.sigma, rf)?;
            let w = family
                .weight(&p)
                .map_err(|err| match err {
                    Error::Degenerate(m) => Error::Degenerate(format!("{}: {m}", e.date)),
                    other => other,
                })?;
            Ok(DatedWeight {
                date: e.date,
                family,
                w_s: w.w_s,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{MomentEntry, Scheme};
    use crate::lottery::Moments;

    fn params() -> MarketParams {
        MarketParams::new(0.01, 0.04, 0.002).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let p = params();
        let q = weight_quadratic(0.2, &p).unwrap().w_s;
        assert!((q - 0.0047936 / 0.0006656).abs() < 1e-12);
        assert!((q - 7.2019).abs() < 1e-4);
        let l = weight_log(&p).unwrap().w_s;
        assert!((l - 1.002 * 0.008 / 0.001664).abs() < 1e-12);
        assert!((l - 4.8173).abs() < 1e-4);
        assert!((weight_sqrt(&p).unwrap().w_s - 9.6346).abs() < 1e-4);
        assert!((weight_exponential(&p).unwrap().w_s - 2.4038).abs() < 1e-4);
        assert!(weight_quadratic(0.3, &p).unwrap().w_s < q);
    }

    #[test]
    fn exponential_matches_printed_form() {
        let p = params();
        let printed = (p.mu - p.rf) / (2.0 * p.excess_second_moment());
        let w = weight_exponential(&p).unwrap().w_s;
        assert!((w - printed).abs() <= 4.0 * f64::EPSILON * printed.abs());
        let p0 = MarketParams::new(0.01, 0.04, 0.0).unwrap();
        assert_eq!(weight_exponential(&p0).unwrap().w_s, weight_log(&p0).unwrap().w_s / 2.0);
    }

    #[test]
    fn zero_excess_gives_zero_weight() {
        let p = MarketParams::new(0.003, 0.05, 0.003).unwrap();
        for f in [
            WeightFamily::Quadratic { b: 0.2 },
            WeightFamily::Log,
            WeightFamily::Sqrt,
            WeightFamily::Exponential,
        ] {
            assert_eq!(f.weight(&p).unwrap().w_s, 0.0);
        }
    }

    #[test]
    fn degenerate_market() {
        let p = MarketParams::new(0.003, 0.0, 0.003).unwrap();
        assert!(matches!(weight_log(&p), Err(Error::Degenerate(_))));
        assert!(matches!(weight_quadratic(0.2, &p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn log_weight_vanishes_for_large_sigma() {
        let w = weight_log(&MarketParams::new(0.01, 1e6, 0.002).unwrap()).unwrap().w_s;
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn numeric_matches_quadratic() {
        let p = params();
        let lot = DiscreteLottery::two_point(Moments::new(p.mu, p.sigma).unwrap()).unwrap();
        let m = lot.moments();
        let exact = weight_quadratic(0.2, &MarketParams::new(m.mu, m.sigma, p.rf).unwrap())
            .unwrap()
            .w_s;
        let num = weight_numeric(&UtilitySpec::quadratic(0.2).unwrap(), &lot, p.rf)
            .unwrap()
            .w_s;
        assert!((exact - num).abs() < 1e-8, "{exact} vs {num}");
    }

    #[test]
    fn numeric_zero_when_no_excess_return() {
        let lot = DiscreteLottery::from_pairs(&[(0.05, 0.5), (-0.03, 0.5)]).unwrap();
        let w = weight_numeric(&UtilitySpec::log(0.0).unwrap(), &lot, 0.01).unwrap();
        assert!(w.w_s.abs() < 1e-10);
    }

    #[test]
    fn numeric_log_two_point_closed_form() {
        // For a fair coin on excess returns e +- s, the log optimum is (1 + rf) e / (s^2 - e^2).
        let (rf, e, s) = (0.002, 0.008, 0.04);
        let lot = DiscreteLottery::from_pairs(&[(rf + e + s, 0.5), (rf + e - s, 0.5)]).unwrap();
        let w = weight_numeric(&UtilitySpec::log(0.0).unwrap(), &lot, rf).unwrap().w_s;
        let expected = (1.0 + rf) * e / (s * s - e * e);
        assert!((w - expected).abs() < 1e-10, "{w} vs {expected}");
    }

    #[test]
    fn numeric_respects_domain() {
        // Log wealth reaches zero at w_s = 2 on the losing outcome; the optimum is 4/9.
        let lot = DiscreteLottery::from_pairs(&[(0.9, 0.5), (-0.5, 0.5)]).unwrap();
        let w = weight_numeric(&UtilitySpec::log(0.0).unwrap(), &lot, 0.0).unwrap().w_s;
        assert!((w - 4.0 / 9.0).abs() < 1e-10, "{w}");
        // Optimum beyond the bracket: no interior solution.
        let lot = DiscreteLottery::from_pairs(&[(0.1, 0.5), (0.099, 0.5)]).unwrap();
        assert!(matches!(
            weight_numeric(&UtilitySpec::exponential(0.0, 2.0).unwrap(), &lot, 0.0),
            Err(Error::NoInteriorOptimum(_))
        ));
    }

    #[test]
    fn numeric_empty_feasible_set() {
        // Quadratic b = 1 has domain W < 0.5 but riskless wealth is 1.
        let lot = DiscreteLottery::from_pairs(&[(0.1, 0.5), (-0.1, 0.5)]).unwrap();
        assert!(matches!(
            weight_numeric(&UtilitySpec::quadratic(1.0).unwrap(), &lot, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn family_parsing() {
        let fams = parse_family_list("quadratic:b=0.2,log,sqrt,exp:a=0,c=2").unwrap();
        assert_eq!(
            fams,
            vec![
                WeightFamily::Quadratic { b: 0.2 },
                WeightFamily::Log,
                WeightFamily::Sqrt,
                WeightFamily::Exponential
            ]
        );
        assert!("exp:c=3".parse::<WeightFamily>().is_err());
        assert!("power:a=1,c=0.5".parse::<WeightFamily>().is_err());
        assert!("quadratic:b=0".parse::<WeightFamily>().is_err());
        assert_eq!(WeightFamily::Quadratic { b: 0.3 }.to_string(), "quadratic:b=0.3");
    }

    #[test]
    fn series_examples() {
        let start = YearMonth::new(2012, 1).unwrap();
        let dates: Vec<YearMonth> = start.range(12).collect();
        let moments = MomentSeries {
            scheme: Scheme::Rolling { window: 60 },
            entries: dates
                .iter()
                .map(|&date| MomentEntry {
                    date,
                    mu: 0.01,
                    sigma: 0.04,
                })
                .collect(),
        };
        let rf: Vec<(YearMonth, f64)> = dates.iter().map(|&d| (d, 0.002)).collect();
        let log = weight_series(WeightFamily::Log, &moments, &rf).unwrap();
        let sqrt = weight_series(WeightFamily::Sqrt, &moments, &rf).unwrap();
        assert!(log.iter().all(|w| w.w_s == log[0].w_s));
        for (l, s) in log.iter().zip(&sqrt) {
            assert_eq!(s.w_s, 2.0 * l.w_s);
        }
        assert!(matches!(
            weight_series(WeightFamily::Log, &moments, &rf[1..]),
            Err(Error::Alignment(_))
        ));
    }
}
