//! Moment estimation over market return series and extraction of market-level ARA/RRA.
//!
//! Per-period return moments come from either an expanding window (all data up to each date)
//! or a trailing window of fixed length. Each moment pair is combined with that period's gross
//! risk-free return to give relative risk aversion, and dividing by market capitalisation gives
//! absolute risk aversion.

use std::fmt;
use std::str::FromStr;

use crate::date::YearMonth;
use crate::error::{Error, Result};
use crate::lottery::rra_from_relative_ce;

/// Minimum number of observations for expanding estimation unless configured otherwise.
pub const DEFAULT_MIN_OBS: usize = 24;

/// Dead-band on the correlation used by [`classify_trend`] unless configured otherwise.
pub const DEFAULT_TAU: f64 = 0.2;

pub const DEFAULT_PERIODS_PER_YEAR: u32 = 12;

/// One period of market data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketRecord {
    pub date: YearMonth,
    /// Simple per-period return as a fraction.
    pub ret: f64,
    /// Market capitalisation in the file's wealth units.
    pub market_cap: f64,
    /// Annualised risk-free yield as a fraction.
    pub rf_annual: f64,
}

impl MarketRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.ret.is_finite() && self.ret > -1.0) {
            return Err(Error::Validation(format!(
                "{}: return {} must be > -1",
                self.date, self.ret
            )));
        }
        if !(self.market_cap.is_finite() && self.market_cap > 0.0) {
            return Err(Error::Validation(format!(
                "{}: market cap {} must be > 0",
                self.date, self.market_cap
            )));
        }
        if !(self.rf_annual.is_finite() && self.rf_annual > -1.0) {
            return Err(Error::Validation(format!(
                "{}: risk-free yield {} must be > -1",
                self.date, self.rf_annual
            )));
        }
        Ok(())
    }
}

/// Dated returns extracted from market records.
pub fn returns_of(records: &[MarketRecord]) -> Vec<(YearMonth, f64)> {
    records.iter().map(|r| (r.date, r.ret)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// All observations up to and including each date, starting once `min_obs` are available.
    Expanding { min_obs: usize },
    /// The `window` most recent observations ending at each date.
    Rolling { window: usize },
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Expanding {
            min_obs: DEFAULT_MIN_OBS,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Expanding { min_obs } => write!(f, "expanding:{min_obs}"),
            Scheme::Rolling { window } => write!(f, "rolling:{window}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected expanding:<min_obs> or rolling:<M>, got '{s}'"));
        let (kind, n) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n < 2 {
            return Err(Error::Config(format!("scheme '{s}' needs a count of at least 2")));
        }
        match kind.trim() {
            "expanding" => Ok(Scheme::Expanding { min_obs: n }),
            "rolling" => Ok(Scheme::Rolling { window: n }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEntry {
    pub date: YearMonth,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub scheme: Scheme,
    pub entries: Vec<MomentEntry>,
}

/// How an annual yield becomes a per-period rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Compounding {
    /// `(1 + y)^(1/n) - 1`
    #[default]
    Geometric,
    /// `y / n`
    Simple,
}

impl FromStr for Compounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "geometric" => Ok(Compounding::Geometric),
            "simple" => Ok(Compounding::Simple),
            other => Err(Error::Config(format!(
                "rf compounding must be geometric or simple, got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Compounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compounding::Geometric => "geometric",
            Compounding::Simple => "simple",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateConvention {
    pub compounding: Compounding,
    pub periods_per_year: u32,
}

impl Default for RateConvention {
    fn default() -> Self {
        Self {
            compounding: Compounding::Geometric,
            periods_per_year: DEFAULT_PERIODS_PER_YEAR,
        }
    }
}

impl RateConvention {
    pub fn per_period(&self, rf_annual: f64) -> f64 {
        let n = f64::from(self.periods_per_year);
        match self.compounding {
            Compounding::Geometric => (1.0 + rf_annual).powf(1.0 / n) - 1.0,
            Compounding::Simple => rf_annual / n,
        }
    }

    /// Inverse of [`RateConvention::per_period`].
    pub fn annualize(&self, rf_per_period: f64) -> f64 {
        let n = f64::from(self.periods_per_year);
        match self.compounding {
            Compounding::Geometric => (1.0 + rf_per_period).powf(n) - 1.0,
            Compounding::Simple => rf_per_period * n,
        }
    }
}

/// Mean and `(n - 1)`-denominator standard deviation, two-pass.
pub fn sample_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    (mu, (ss / (n - 1.0)).sqrt())
}

fn check_increasing(returns: &[(YearMonth, f64)]) -> Result<()> {
    for w in returns.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Validation(format!(
                "dates must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(())
}

fn values(returns: &[(YearMonth, f64)]) -> Vec<f64> {
    returns.iter().map(|r| r.1).collect()
}

fn entry(date: YearMonth, window: &[f64]) -> MomentEntry {
    let (mu, sigma) = sample_moments(window);
    MomentEntry { date, mu, sigma }
}

pub fn expanding_moments(returns: &[(YearMonth, f64)], min_obs: usize) -> Result<MomentSeries> {
    if min_obs < 2 {
        return Err(Error::Config(format!("min_obs must be >= 2, got {min_obs}")));
    }
    if returns.len() < min_obs {
        return Err(Error::InsufficientData(format!(
            "expanding estimation needs {min_obs} observations, got {}",
            returns.len()
        )));
    }
    check_increasing(returns)?;
    let xs = values(returns);
    let entries = (min_obs..=xs.len())
        .map(|end| entry(returns[end - 1].0, &xs[..end]))
        .collect();
    Ok(MomentSeries {
        scheme: Scheme::Expanding { min_obs },
        entries,
    })
}

pub fn rolling_moments(returns: &[(YearMonth, f64)], window: usize) -> Result<MomentSeries> {
    if window < 2 {
        return Err(Error::Config(format!("window must be >= 2, got {window}")));
    }
    if returns.len() < window {
        return Err(Error::InsufficientData(format!(
            "rolling window {window} needs at least {window} observations, got {}",
            returns.len()
        )));
    }
    check_increasing(returns)?;
    let xs = values(returns);
    let entries = xs
        .windows(window)
        .enumerate()
        .map(|(start, w)| entry(returns[start + window - 1].0, w))
        .collect();
    Ok(MomentSeries {
        scheme: Scheme::Rolling { window },
        entries,
    })
}

pub fn estimate_moments(returns: &[(YearMonth, f64)], scheme: Scheme) -> Result<MomentSeries> {
    match scheme {
        Scheme::Expanding { min_obs } => expanding_moments(returns, min_obs),
        Scheme::Rolling { window } => rolling_moments(returns, window),
    }
}

/// Market-level wealth, ARA and RRA for one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskAversionPoint {
    pub date: YearMonth,
    pub wealth: f64,
    /// `rra / wealth`, in inverse wealth units.
    pub ara: f64,
    pub rra: f64,
}

impl RiskAversionPoint {
    pub fn new(date: YearMonth, wealth: f64, rra: f64) -> Self {
        Self {
            date,
            wealth,
            ara: rra / wealth,
            rra,
        }
    }
}

/// Looks up the market record for every moment date; dates must match exactly.
pub(crate) fn align<'a>(
    moments: &MomentSeries,
    market: &'a [MarketRecord],
) -> Result<Vec<&'a MarketRecord>> {
    moments
        .entries
        .iter()
        .map(|e| {
            market
                .binary_search_by(|r| r.date.cmp(&e.date))
                .map(|i| &market[i])
                .map_err(|_| Error::Alignment(format!("no market record for {}", e.date)))
        })
        .collect()
}

/// Applies the relative-CE formula per period, with `z~ = 1 + per-period rf`.
pub fn risk_aversion_series(
    moments: &MomentSeries,
    market: &[MarketRecord],
    rates: RateConvention,
) -> Result<Vec<RiskAversionPoint>> {
    let records = align(moments, market)?;
    moments
        .entries
        .iter()
        .zip(records)
        .map(|(e, rec)| {
            let z_tilde = 1.0 + rates.per_period(rec.rf_annual);
            let rra = rra_from_relative_ce(e.mu, e.sigma, z_tilde)
                .map_err(|err| Error::Degenerate(format!("{}: {err}", e.date)))?;
            Ok(RiskAversionPoint::new(e.date, rec.market_cap, rra))
        })
        .collect()
}

/// Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs at least 2 points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    Constant,
    Increasing,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Decreasing => "Decreasing",
            Trend::Constant => "Constant",
            Trend::Increasing => "Increasing",
        })
    }
}

impl FromStr for Trend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Decreasing" => Ok(Trend::Decreasing),
            "Constant" => Ok(Trend::Constant),
            "Increasing" => Ok(Trend::Increasing),
            other => Err(Error::Validation(format!("unknown trend label '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendClassification {
    pub trend: Trend,
    pub corr: f64,
}

/// Labels the slope of `measure` in `wealth` by correlation sign, with a dead-band of `tau`.
pub fn classify_trend(wealth: &[f64], measure: &[f64], tau: f64) -> Result<TrendClassification> {
    let corr = pearson_correlation(wealth, measure)?;
    let trend = if corr < -tau {
        Trend::Decreasing
    } else if corr > tau {
        Trend::Increasing
    } else {
        Trend::Constant
    };
    Ok(TrendClassification { trend, corr })
}

/// Correlations of `measure` with `wealth` restricted to `wealth <= cut` and `wealth > cut`.
pub fn split_rra_at(cut: f64, wealth: &[f64], measure: &[f64]) -> Result<(f64, f64)> {
    if wealth.len() != measure.len() {
        return Err(Error::Validation("split inputs differ in length".into()));
    }
    type Points = Vec<(f64, f64)>;
    let (below, above): (Points, Points) = wealth
        .iter()
        .copied()
        .zip(measure.iter().copied())
        .partition(|(w, _)| *w <= cut);
    let side = |pts: &[(f64, f64)], name: &str| -> Result<f64> {
        if pts.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "{} points {name} the wealth cut {cut}; need at least 2",
                pts.len()
            )));
        }
        let (w, m): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        pearson_correlation(&w, &m)
    };
    Ok((side(&below, "at or below")?, side(&above, "above")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dated(xs: &[f64]) -> Vec<(YearMonth, f64)> {
        let start = YearMonth::new(2000, 1).unwrap();
        start.range(xs.len()).zip(xs.iter().copied()).collect()
    }

    #[test]
    fn constant_returns_have_zero_sigma() {
        let s = expanding_moments(&dated(&[0.004; 30]), 24).unwrap();
        assert_eq!(s.entries.len(), 7);
        for e in &s.entries {
            assert!((e.mu - 0.004).abs() < 1e-17);
            assert!(e.sigma < 1e-17);
        }
    }

    #[test]
    fn two_point_expanding() {
        let s = expanding_moments(&dated(&[0.01, 0.03]), 2).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert!((s.entries[0].mu - 0.02).abs() < 1e-17);
        assert!((s.entries[0].sigma - 0.0002f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn expanding_final_equals_full_window() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.003).collect();
        let d = dated(&xs);
        let e = expanding_moments(&d, 24).unwrap();
        let r = rolling_moments(&d, 50).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(e.entries.last().unwrap(), &r.entries[0]);
        assert_eq!(e.entries.len(), 50 - 24 + 1);
    }

    #[test]
    fn rolling_counts_and_values() {
        let xs: Vec<f64> = (0..61).map(|i| if i % 2 == 0 { 0.02 } else { -0.02 }).collect();
        assert_eq!(rolling_moments(&dated(&xs), 60).unwrap().entries.len(), 2);
        let r = rolling_moments(&dated(&xs[..4]), 4).unwrap();
        assert!(r.entries[0].mu.abs() < 1e-18);
        assert!((r.entries[0].sigma - (4.0 * 0.0004f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((r.entries[0].sigma - 0.023094).abs() < 1e-6);
        assert_eq!(r.entries[0].date, YearMonth::new(2000, 4).unwrap());
    }

    #[test]
    fn insufficient_data() {
        let d = dated(&[0.01; 5]);
        assert!(matches!(expanding_moments(&d, 6), Err(Error::InsufficientData(_))));
        assert!(matches!(rolling_moments(&d, 6), Err(Error::InsufficientData(_))));
        assert!(rolling_moments(&d, 1).is_err());
    }

    #[test]
    fn unordered_dates_rejected() {
        let mut d = dated(&[0.01, 0.02, 0.03]);
        d.swap(0, 1);
        assert!(matches!(rolling_moments(&d, 2), Err(Error::Validation(_))));
    }

    #[test]
    fn rate_conventions() {
        let g = RateConvention::default();
        let annual = 1.002f64.powi(12) - 1.0;
        assert!((g.per_period(annual) - 0.002).abs() < 1e-15);
        assert!((g.annualize(g.per_period(0.035)) - 0.035).abs() < 1e-15);
        let s = RateConvention {
            compounding: Compounding::Simple,
            periods_per_year: 12,
        };
        assert!((s.per_period(0.024) - 0.002).abs() < 1e-17);
    }

    fn one_period(mu: f64, sigma: f64, cap: f64, rf_annual: f64) -> (MomentSeries, Vec<MarketRecord>) {
        let date = YearMonth::new(2015, 6).unwrap();
        let m = MomentSeries {
            scheme: Scheme::Rolling { window: 60 },
            entries: vec![MomentEntry { date, mu, sigma }],
        };
        let rec = MarketRecord {
            date,
            ret: 0.0,
            market_cap: cap,
            rf_annual,
        };
        (m, vec![rec])
    }

    #[test]
    fn risk_aversion_example() {
        let annual = 1.002f64.powi(12) - 1.0;
        let (m, market) = one_period(0.008, 0.04, 30.0, annual);
        let p = risk_aversion_series(&m, &market, RateConvention::default()).unwrap()[0];
        assert!((p.rra - 7.2115).abs() < 1e-4);
        assert!((p.ara - 0.24038).abs() < 1e-5);
        assert_eq!(p.ara, p.rra / p.wealth);

        let (m2, market2) = one_period(0.008, 0.04, 60.0, annual);
        let q = risk_aversion_series(&m2, &market2, RateConvention::default()).unwrap()[0];
        assert_eq!(q.rra, p.rra);
        assert!((q.ara - p.ara / 2.0).abs() <= f64::EPSILON * p.ara);
    }

    #[test]
    fn risk_aversion_errors() {
        let (m, market) = one_period(0.0, 0.0, 30.0, 0.02);
        assert!(matches!(
            risk_aversion_series(&m, &market, RateConvention::default()),
            Err(Error::Degenerate(_))
        ));
        let (m, mut market) = one_period(0.01, 0.04, 30.0, 0.02);
        market[0].date = YearMonth::new(2015, 7).unwrap();
        assert!(matches!(
            risk_aversion_series(&m, &market, RateConvention::default()),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &y).unwrap() + 1.0).abs() < 1e-15);
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        assert!(matches!(
            pearson_correlation(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn trend_labels() {
        let w: Vec<f64> = (0..20).map(|i| 10.0 + i as f64).collect();
        let up: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let c = classify_trend(&w, &up, 0.2).unwrap();
        assert_eq!(c.trend, Trend::Increasing);
        let down: Vec<f64> = w.iter().map(|x| 1.0 / x).collect();
        assert_eq!(classify_trend(&w, &down, 0.2).unwrap().trend, Trend::Decreasing);
        // alternating wiggle is orthogonal to the linear trend in wealth
        let flat: Vec<f64> = (0..20)
            .map(|i| 1.0 + if (i / 2) % 2 == 0 { 1e-9 } else { -1e-9 })
            .collect();
        let c = classify_trend(&w, &flat, 0.2).unwrap();
        assert!(c.corr.abs() < 0.2, "{}", c.corr);
        assert_eq!(c.trend, Trend::Constant);
    }

    #[test]
    fn split_examples() {
        let w: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let up: Vec<f64> = w.iter().map(|x| x * x).collect();
        let (a, b) = split_rra_at(9.5, &w, &up).unwrap();
        assert!(a > 0.95 && b > 0.95);
        let tent: Vec<f64> = w.iter().map(|x| if *x <= 10.0 { *x } else { 20.0 - x }).collect();
        let (a, b) = split_rra_at(10.0, &w, &tent).unwrap();
        assert!(a > 0.0 && b < 0.0);
        assert!(matches!(
            split_rra_at(18.5, &w, &up),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn scheme_text() {
        assert_eq!("rolling:60".parse::<Scheme>().unwrap(), Scheme::Rolling { window: 60 });
        assert_eq!(
            "expanding:24".parse::<Scheme>().unwrap(),
            Scheme::Expanding { min_obs: 24 }
        );
        assert!("rolling:1".parse::<Scheme>().is_err());
        assert!("window:5".parse::<Scheme>().is_err());
        assert_eq!(Scheme::Rolling { window: 120 }.to_string(), "rolling:120");
    }
}
