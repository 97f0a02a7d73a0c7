//! Seeded synthetic market fixtures with known risk attitudes.
//!
//! The generators write the risk-free yield column so that a chosen agent's certainty
//! equivalent (or a chosen RRA path) is what the extraction pipeline will see. They are used
//! by the `validate` command, the examples, and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::date::YearMonth;
use crate::data_io::MarketDataset;
use crate::error::{Error, Result};
use crate::estimation::{estimate_moments, MarketRecord, RateConvention, Scheme};
use crate::lottery::{exact_ce, DiscreteLottery, Moments};
use crate::utility::UtilitySpec;

/// Yield used for periods before the first moment estimate.
const BURN_IN_YIELD: f64 = 0.03;

/// Returns `mu + sigma z` in antithetic pairs (`z`, `-z`), so window means stay close to `mu`.
pub fn antithetic_returns(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z: f64 = rng.sample(StandardNormal);
        out.push(mu + sigma * z);
        if out.len() < n {
            out.push(mu - sigma * z);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LogAgentConfig {
    pub start: YearMonth,
    pub periods: usize,
    pub mu: f64,
    pub sigma: f64,
    /// Market caps are drawn independently and uniformly from this interval.
    pub cap_range: (f64, f64),
    pub scheme: Scheme,
    pub rates: RateConvention,
    pub seed: u64,
}

impl Default for LogAgentConfig {
    fn default() -> Self {
        Self {
            start: YearMonth::new(1991, 1).expect("valid month"),
            periods: 360,
            mu: 0.004,
            sigma: 0.04,
            cap_range: (10.0, 40.0),
            scheme: Scheme::Rolling { window: 60 },
            rates: RateConvention::default(),
            seed: 7,
        }
    }
}

/// Market priced by a log-utility agent: each period's gross risk-free return equals the
/// agent's exact certainty equivalent (per unit wealth) of a fair coin on the estimated return
/// moments. Relative risk aversion is 1 at every wealth level.
pub fn log_agent_market(cfg: &LogAgentConfig) -> Result<MarketDataset> {
    let log = UtilitySpec::log(0.0)?;
    let returns = antithetic_returns(cfg.periods, cfg.mu, cfg.sigma, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9));
    let caps: Vec<f64> = (0..cfg.periods)
        .map(|_| rng.random_range(cfg.cap_range.0..cfg.cap_range.1))
        .collect();
    build_market(cfg.start, &returns, &caps, cfg.scheme, cfg.rates, "log_agent", |m| {
        let lottery = DiscreteLottery::two_point(Moments::new(m.mu, m.sigma)?)?;
        exact_ce(&log, 1.0, &lottery)
    })
}

#[derive(Debug, Clone)]
pub struct RegimeConfig {
    pub start: YearMonth,
    pub periods: usize,
    pub mu: f64,
    pub sigma: f64,
    pub scheme: Scheme,
    pub rates: RateConvention,
    /// Market cap at the start and at the end of the sample.
    pub cap_start: f64,
    pub cap_end: f64,
    /// Wealth at which relative risk aversion drops.
    pub cut: f64,
    /// RRA at `cap_start`, rising linearly to `rra_at_cut` by the cut.
    pub rra_start: f64,
    pub rra_at_cut: f64,
    /// RRA level once wealth exceeds the cut.
    pub rra_after: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            start: YearMonth::new(1991, 1).expect("valid month"),
            periods: 252,
            mu: 0.008,
            sigma: 0.045,
            scheme: Scheme::Expanding { min_obs: 120 },
            rates: RateConvention::default(),
            cap_start: 14.0,
            cap_end: 34.0,
            cut: 27.0,
            rra_start: 1.0,
            rra_at_cut: 4.0,
            rra_after: 0.5,
            noise: 0.1,
            seed: 11,
        }
    }
}

/// Market whose relative risk aversion rises with wealth up to `cut` and then falls to a
/// lower level, so the below-cut correlation is strongly positive while the whole-sample
/// correlation is negative.
pub fn regime_market(cfg: &RegimeConfig) -> Result<MarketDataset> {
    if cfg.periods < 2 {
        return Err(Error::InsufficientData("regime fixture needs at least 2 periods".into()));
    }
    let returns = antithetic_returns(cfg.periods, cfg.mu, cfg.sigma, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let growth = (cfg.cap_end / cfg.cap_start).ln() / (cfg.periods - 1) as f64;
    let caps: Vec<f64> = (0..cfg.periods)
        .map(|i| cfg.cap_start * (growth * i as f64).exp())
        .collect();
    let noise: Vec<f64> = (0..cfg.periods)
        .map(|_| cfg.noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let slope = (cfg.rra_at_cut - cfg.rra_start) / (cfg.cut - cfg.cap_start);
    let target = |i: usize| {
        let base = if caps[i] <= cfg.cut {
            cfg.rra_start + slope * (caps[i] - cfg.cap_start)
        } else {
            cfg.rra_after
        };
        base + noise[i]
    };
    let index_of = |d: YearMonth| {
        cfg.start
            .range(cfg.periods)
            .position(|x| x == d)
            .expect("date generated from the same calendar")
    };
    build_market(cfg.start, &returns, &caps, cfg.scheme, cfg.rates, "regime", |m| {
        let lambda = target(index_of(m.date));
        Ok(1.0 + m.mu - 0.5 * lambda * (m.mu * m.mu + m.sigma * m.sigma))
    })
}

/// Assembles records, choosing each estimated period's yield from its gross certainty
/// equivalent `z_tilde(entry)`.
fn build_market<F>(
    start: YearMonth,
    returns: &[f64],
    caps: &[f64],
    scheme: Scheme,
    rates: RateConvention,
    name: &str,
    z_tilde: F,
) -> Result<MarketDataset>
where
    F: Fn(&crate::estimation::MomentEntry) -> Result<f64>,
{
    let dates: Vec<YearMonth> = start.range(returns.len()).collect();
    let dated: Vec<(YearMonth, f64)> = dates.iter().copied().zip(returns.iter().copied()).collect();
    let moments = estimate_moments(&dated, scheme)?;
    let mut yields = vec![BURN_IN_YIELD; returns.len()];
    let offset = returns.len() - moments.entries.len();
    for (k, e) in moments.entries.iter().enumerate() {
        yields[offset + k] = rates.annualize(z_tilde(e)? - 1.0);
    }
    let records = dates
        .iter()
        .zip(returns)
        .zip(caps)
        .zip(&yields)
        .map(|(((&date, &ret), &market_cap), &rf_annual)| MarketRecord {
            date,
            ret,
            market_cap,
            rf_annual,
        })
        .collect();
    MarketDataset::new(name, records)
}

/// Fair-coin return lottery `rf + t^2 e +- t s`: the excess mean shrinks like `t^2` and the
/// spread like `t`, the way per-period moments scale with the period length.
pub fn horizon_lottery(rf: f64, excess_mean: f64, spread: f64, t: f64) -> Result<DiscreteLottery> {
    let centre = rf + t * t * excess_mean;
    DiscreteLottery::from_pairs(&[(centre + t * spread, 0.5), (centre - t * spread, 0.5)])
}
