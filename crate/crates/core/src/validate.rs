//! Self-contained validation suites run by the `validate` command.
//!
//! Each suite checks an identity, an oracle agreement, or a convergence property on synthetic
//! data and reports pass/fail with a one-line detail.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::date::YearMonth;
use crate::error::{Error, Result};
use crate::estimation::{
    classify_trend, estimate_moments, expanding_moments, pearson_correlation, returns_of,
    risk_aversion_series, rolling_moments, split_rra_at, Scheme, Trend, DEFAULT_TAU,
};
use crate::lottery::{
    approx_premium_fair, exact_risk_premium, rra_from_relative_ce, DiscreteLottery,
};
use crate::portfolio::{
    weight_exponential, weight_log, weight_numeric, weight_quadratic, weight_sqrt, MarketParams,
};
use crate::synthetic::{
    antithetic_returns, horizon_lottery, log_agent_market, regime_market, LogAgentConfig,
    RegimeConfig,
};
use crate::utility::UtilitySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToleranceProfile {
    #[default]
    Default,
    /// Oracle tolerances tightened tenfold.
    Strict,
}

impl FromStr for ToleranceProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "default" => Ok(ToleranceProfile::Default),
            "strict" => Ok(ToleranceProfile::Strict),
            other => Err(Error::Config(format!("profile must be default or strict, got '{other}'"))),
        }
    }
}

impl fmt::Display for ToleranceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToleranceProfile::Default => "default",
            ToleranceProfile::Strict => "strict",
        })
    }
}

/// Numeric thresholds used by the suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Closed-form vs numeric quadratic weight.
    pub quadratic_oracle: f64,
    /// Relative deviation of recovered RRA from 1.
    pub rra_recovery: f64,
    /// Relative wealth error of `invert(U(w))`.
    pub inversion: f64,
    /// Relative error of the fair-lottery premium for the +-100 coin at wealth 1000.
    pub taylor_relative: f64,
}

impl ToleranceProfile {
    pub fn tolerances(&self) -> Tolerances {
        let base = Tolerances {
            quadratic_oracle: 1e-8,
            rra_recovery: 0.10,
            inversion: 1e-10,
            taylor_relative: 0.003,
        };
        match self {
            ToleranceProfile::Default => base,
            ToleranceProfile::Strict => Tolerances {
                quadratic_oracle: base.quadratic_oracle / 10.0,
                inversion: base.inversion / 10.0,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

fn report(name: &'static str, outcome: Result<(bool, String)>) -> SuiteReport {
    match outcome {
        Ok((passed, detail)) => SuiteReport { name, passed, detail },
        Err(e) => SuiteReport {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Signature of an RRA extractor from `(mu, sigma, z_tilde)`.
pub type RraExtractor = fn(f64, f64, f64) -> Result<f64>;

pub fn run_all(profile: ToleranceProfile) -> Vec<SuiteReport> {
    let tol = profile.tolerances();
    vec![
        taylor_accuracy(&tol),
        rra_recovery(&tol, rra_from_relative_ce),
        cara_iara(),
        portfolio_identities(),
        oracle_equivalence(&tol),
        estimator_contracts(),
        regime_split(),
        inversion_round_trip(&tol),
    ]
}

/// Exact vs second-order premium for the log agent; halving-ratio of the remainder on a
/// skewed fair lottery.
pub fn taylor_accuracy(tol: &Tolerances) -> SuiteReport {
    report("taylor_accuracy", (|| {
        let log = UtilitySpec::log(0.0)?;
        let w0 = 1000.0;
        let coin = DiscreteLottery::from_pairs(&[(100.0, 0.5), (-100.0, 0.5)])?;
        let exact = exact_risk_premium(&log, w0, &coin)?;
        let approx = approx_premium_fair(&log, w0, 100.0)?;
        let rel = (exact - approx).abs() / exact;

        let skewed = DiscreteLottery::from_pairs(&[(200.0, 1.0 / 3.0), (-100.0, 2.0 / 3.0)])?;
        let err = |t: f64| -> Result<f64> {
            let lot = skewed.scaled(t);
            let m = lot.moments();
            Ok((exact_risk_premium(&log, w0, &lot)? - approx_premium_fair(&log, w0, m.sigma)?).abs())
        };
        let mut ratios = Vec::new();
        let mut t = 1.0;
        for _ in 0..3 {
            ratios.push(err(t)? / err(t / 2.0)?);
            t /= 2.0;
        }
        let ratios_ok = ratios.iter().all(|r| (4.0..=16.0).contains(r));
        Ok((
            rel < tol.taylor_relative && ratios_ok,
            format!(
                "exact {exact:.6} vs approx {approx:.6} (rel {rel:.2e}); skewed halving ratios {}",
                ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
            ),
        ))
    })())
}

/// Synthetic log-agent market: recovered RRA within tolerance of 1 and no wealth trend.
pub fn rra_recovery(tol: &Tolerances, extractor: RraExtractor) -> SuiteReport {
    report("rra_recovery", (|| {
        let mut worst: f64 = 0.0;
        let mut details = Vec::new();
        let mut all_constant = true;
        for scheme in [Scheme::Rolling { window: 60 }, Scheme::Expanding { min_obs: 24 }] {
            let cfg = LogAgentConfig {
                scheme,
                ..LogAgentConfig::default()
            };
            let ds = log_agent_market(&cfg)?;
            let moments = estimate_moments(&returns_of(&ds.records), scheme)?;
            let mut wealth = Vec::new();
            let mut rra = Vec::new();
            for (e, rec) in moments.entries.iter().zip(&ds.records[ds.records.len() - moments.entries.len()..]) {
                let z_tilde = 1.0 + cfg.rates.per_period(rec.rf_annual);
                let lambda = extractor(e.mu, e.sigma, z_tilde)?;
                worst = worst.max((lambda - 1.0).abs());
                wealth.push(rec.market_cap);
                rra.push(lambda);
            }
            let c = classify_trend(&wealth, &rra, DEFAULT_TAU)?;
            all_constant &= c.trend == Trend::Constant;
            details.push(format!("{scheme}: corr {:+.3} {}", c.corr, c.trend));
        }
        Ok((
            worst <= tol.rra_recovery && all_constant,
            format!("max |rra - 1| = {worst:.4}; {}", details.join("; ")),
        ))
    })())
}

/// CARA premium independent of wealth; quadratic ARA increasing; log ARA decreasing.
pub fn cara_iara() -> SuiteReport {
    report("cara_iara", (|| {
        let cara = UtilitySpec::exponential(0.0, 0.001)?;
        let reference = approx_premium_fair(&cara, 1000.0, 100.0)?;
        let mut cara_ok = true;
        for w0 in [-500.0, 0.0, 1.0, 250.0, 1e3, 1e5, 1e8] {
            cara_ok &= approx_premium_fair(&cara, w0, 100.0)? == reference;
        }
        let quad = UtilitySpec::quadratic(0.2)?;
        let grid: Vec<f64> = (0..=200).map(|i| -5.0 + 7.49 * i as f64 / 200.0).collect();
        let q: Vec<f64> = grid.iter().map(|&w| quad.ara(w)).collect::<Result<_>>()?;
        let iara = q.windows(2).all(|w| w[1] > w[0]);
        let log = UtilitySpec::log(0.0)?;
        let l: Vec<f64> = grid
            .iter()
            .map(|w| log.ara(w + 6.0))
            .collect::<Result<_>>()?;
        let dara = l.windows(2).all(|w| w[1] < w[0]);
        Ok((
            cara_ok && iara && dara,
            format!("CARA premium {reference} wealth-independent: {cara_ok}; quadratic IARA: {iara}; log DARA: {dara}"),
        ))
    })())
}

/// Random valid market parameters with a strictly positive excess second moment.
pub fn random_market_params(rng: &mut impl Rng) -> MarketParams {
    loop {
        let mu = rng.random_range(-0.05..0.05);
        let sigma = rng.random_range(0.0..0.2);
        let rf = rng.random_range(-0.01..0.02);
        if let Ok(p) = MarketParams::new(mu, sigma, rf) {
            if p.excess_second_moment() > 0.0 {
                return p;
            }
        }
    }
}

/// Distance in units in the last place.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_sign_negative() != b.is_sign_negative() {
        return ulp_distance(a.abs(), 0.0) + ulp_distance(b.abs(), 0.0);
    }
    a.abs().to_bits().abs_diff(b.abs().to_bits())
}

pub fn portfolio_identities() -> SuiteReport {
    report("portfolio_identities", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst_sqrt = 0;
        let mut worst_exp = 0;
        for _ in 0..10_000 {
            let p = random_market_params(&mut rng);
            let log = weight_log(&p)?.w_s;
            worst_sqrt = worst_sqrt.max(ulp_distance(weight_sqrt(&p)?.w_s, 2.0 * log));
            worst_exp = worst_exp.max(ulp_distance(
                weight_exponential(&p)?.w_s,
                log / (2.0 * (1.0 + p.rf)),
            ));
        }
        Ok((
            worst_sqrt <= 1 && worst_exp <= 1,
            format!("10000 draws: max ulp sqrt/log {worst_sqrt}, exp/log {worst_exp}"),
        ))
    })())
}

/// Draws a two-point return lottery whose quadratic optimum is interior, returning
/// `(b, rf, lottery, closed_form_weight)`.
pub fn random_interior_quadratic_case(rng: &mut impl Rng) -> (f64, f64, DiscreteLottery, f64) {
    loop {
        let b = rng.random_range(0.05..0.45);
        let rf = rng.random_range(0.0..0.01);
        let p = rng.random_range(0.1..0.9);
        let r1 = rng.random_range(-0.3..0.3);
        let r2 = rng.random_range(-0.3..0.3);
        let Ok(lot) = DiscreteLottery::from_pairs(&[(r1, p), (r2, 1.0 - p)]) else {
            continue;
        };
        let m = lot.moments();
        let Ok(params) = MarketParams::new(m.mu, m.sigma, rf) else {
            continue;
        };
        let Ok(w) = weight_quadratic(b, &params) else {
            continue;
        };
        let w = w.w_s;
        let cap = 1.0 / (2.0 * b);
        let interior = w.abs() < 19.0
            && [r1, r2]
                .iter()
                .all(|r| 1.0 + rf + w * (r - rf) < cap * (1.0 - 1e-3));
        if interior {
            return (b, rf, lot, w);
        }
    }
}

/// Numeric expected-utility optimum against the closed forms.
pub fn oracle_equivalence(tol: &Tolerances) -> SuiteReport {
    report("oracle_equivalence", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let (b, rf, lot, closed) = random_interior_quadratic_case(&mut rng);
            let num = weight_numeric(&UtilitySpec::quadratic(b)?, &lot, rf)?.w_s;
            worst = worst.max((num - closed).abs());
        }
        let quad_ok = worst <= tol.quadratic_oracle;

        let gaps = log_oracle_gaps(5)?;
        let monotone = gaps.windows(2).all(|g| g[1] < g[0]);
        Ok((
            quad_ok && monotone,
            format!(
                "quadratic max |closed - numeric| {worst:.2e}; log gaps {}",
                gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(" > ")
            ),
        ))
    })())
}

/// `|weight_log - weight_numeric(log)|` on a horizon-scaled lottery for `steps + 1` scales
/// `1, 1/2, ..., 2^-steps`.
pub fn log_oracle_gaps(steps: usize) -> Result<Vec<f64>> {
    let log = UtilitySpec::log(0.0)?;
    let (rf, excess, spread) = (0.002, 0.008, 0.04);
    (0..=steps)
        .map(|k| {
            let t = 0.5f64.powi(k as i32);
            let lot = horizon_lottery(rf, excess, spread, t)?;
            let m = lot.moments();
            let closed = weight_log(&MarketParams::new(m.mu, m.sigma, rf)?)?.w_s;
            let num = weight_numeric(&log, &lot, rf)?.w_s;
            Ok((closed - num).abs())
        })
        .collect()
}

pub fn estimator_contracts() -> SuiteReport {
    report("estimator_contracts", (|| {
        let n = 372;
        let start = YearMonth::new(1991, 1)?;
        let returns: Vec<(YearMonth, f64)> = start
            .range(n)
            .zip(antithetic_returns(n, 0.006, 0.045, 5))
            .collect();
        let mut counts = Vec::new();
        let mut ok = true;
        for m in [60, 120, 180] {
            let len = rolling_moments(&returns, m)?.entries.len();
            ok &= len == n - m + 1;
            counts.push(format!("M={m}: {len}"));
        }
        let full = rolling_moments(&returns, n)?;
        let expanding = expanding_moments(&returns, 24)?;
        let same = full.entries.len() == 1 && expanding.entries.last() == full.entries.first();
        ok &= same && expanding.entries.len() == n - 24 + 1;
        Ok((ok, format!("N={n}; {}; rolling(N) == expanding final: {same}", counts.join(", "))))
    })())
}

pub fn regime_split() -> SuiteReport {
    report("regime_split", (|| {
        let cfg = RegimeConfig::default();
        let ds = regime_market(&cfg)?;
        let moments = estimate_moments(&returns_of(&ds.records), cfg.scheme)?;
        let points = risk_aversion_series(&moments, &ds.records, cfg.rates)?;
        let wealth: Vec<f64> = points.iter().map(|p| p.wealth).collect();
        let rra: Vec<f64> = points.iter().map(|p| p.rra).collect();
        let (below, above) = split_rra_at(cfg.cut, &wealth, &rra)?;
        let full = pearson_correlation(&wealth, &rra)?;
        Ok((
            below >= 0.85 && full < 0.0,
            format!("corr below cut {below:+.3}, above {above:+.3}, full {full:+.3}"),
        ))
    })())
}

pub fn inversion_round_trip(tol: &Tolerances) -> SuiteReport {
    report("inversion_round_trip", (|| {
        let specs = [
            UtilitySpec::quadratic(0.2)?,
            UtilitySpec::log(0.0)?,
            UtilitySpec::log(3.0)?,
            UtilitySpec::power(1.0, 0.5)?,
            UtilitySpec::neg_power(1.0, 2.0)?,
            UtilitySpec::Sqrt,
            UtilitySpec::exponential(0.0, 2.0)?,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut worst: f64 = 0.0;
        for u in specs {
            let (lo, hi) = u.domain();
            let lo = if lo.is_finite() { lo } else { -10.0 };
            let hi = if hi.is_finite() { lo + 0.9 * (hi - lo) } else { lo + 100.0 };
            for _ in 0..200 {
                let w = rng.random_range(lo + 0.01..hi);
                let back = u.invert(u.value(w)?)?;
                worst = worst.max((back - w).abs() / w.abs().max(1.0));
            }
        }
        Ok((worst <= tol.inversion, format!("max relative wealth error {worst:.2e}")))
    })())
}

/// `rra_from_relative_ce` with the sign of the premium flipped, for mutation checks.
pub fn mis_signed_rra(mu: f64, sigma: f64, z_tilde: f64) -> Result<f64> {
    rra_from_relative_ce(mu, sigma, z_tilde).map(|l| -l)
}
