//! Discrete lotteries, exact certainty equivalents, and second-order risk-premium formulas.
//!
//! The approximations here expand both sides of `E[U(w0 + Z)] = U(z0)` to second order around
//! `w0` and drop the squared-premium term on the certainty side. For a lottery with mean `mu`
//! and standard deviation `sigma` that gives
//!
//! ```text
//! premium ~= r(w0) (mu^2 + sigma^2) / 2
//! r(w0)   ~= 2 (w0 + mu - z0) / (mu^2 + sigma^2)
//! ```
//!
//! and, for relative returns `R = Z / w0` with gross certainty equivalent `z~`,
//!
//! ```text
//! lambda(w0) ~= 2 (1 + mu_R - z~) / (mu_R^2 + sigma_R^2)
//! ```

use crate::error::{Error, Result};
use crate::utility::UtilitySpec;

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// Finite set of outcomes with probabilities.
///
/// Outcomes are wealth increments `Z` when used with a base wealth, or dimensionless return
/// fractions `R` when used as a return lottery.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLottery {
    outcomes: Vec<f64>,
    probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mu: f64,
    pub sigma: f64,
}

impl Moments {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Validation(format!(
                "moments need finite mu and sigma >= 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Self { mu, sigma })
    }

    /// `mu^2 + sigma^2`, the raw second moment.
    pub fn second_moment(&self) -> f64 {
        self.mu * self.mu + self.sigma * self.sigma
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mu: self.mu * factor,
            sigma: self.sigma * factor.abs(),
        }
    }
}

impl DiscreteLottery {
    pub fn new(outcomes: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != probabilities.len() {
            return Err(Error::Validation(format!(
                "lottery needs equal, nonzero numbers of outcomes and probabilities (got {} and {})",
                outcomes.len(),
                probabilities.len()
            )));
        }
        if let Some(x) = outcomes.iter().find(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("non-finite outcome {x}")));
        }
        if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Validation(format!("invalid probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            outcomes,
            probabilities,
        })
    }

    /// Lottery over `pairs` of `(outcome, probability)`.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
    }

    pub fn certain(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn equally_likely(outcomes: Vec<f64>) -> Result<Self> {
        let n = outcomes.len();
        Self::new(outcomes, vec![1.0 / n as f64; n])
    }

    /// Fair-coin lottery `mu +- sigma`, whose population moments are `(mu, sigma)`.
    pub fn two_point(m: Moments) -> Result<Self> {
        Self::new(vec![m.mu - m.sigma, m.mu + m.sigma], vec![0.5, 0.5])
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.outcomes
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }

    /// Same probabilities, outcomes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            outcomes: self.outcomes.iter().map(|x| x * factor).collect(),
            probabilities: self.probabilities.clone(),
        }
    }

    /// Population mean and standard deviation.
    pub fn moments(&self) -> Moments {
        let mu: f64 = self.iter().map(|(x, p)| p * x).sum();
        let var: f64 = self
            .iter()
            .map(|(x, p)| {
                let d = x - mu;
                p * d * d
            })
            .sum();
        Moments {
            mu,
            sigma: var.sqrt(),
        }
    }
}

/// Expected utility of final wealth `w0 + Z`.
pub fn expected_utility(u: &UtilitySpec, w0: f64, lot: &DiscreteLottery) -> Result<f64> {
    lot.iter()
        .map(|(x, p)| u.value(w0 + x).map(|v| p * v))
        .sum()
}

/// Certainty equivalent of `w0 + Z`, in final-wealth units.
pub fn exact_ce(u: &UtilitySpec, w0: f64, lot: &DiscreteLottery) -> Result<f64> {
    u.invert(expected_utility(u, w0, lot)?)
}

/// `w0 + mu_Z - z0`.
pub fn exact_risk_premium(u: &UtilitySpec, w0: f64, lot: &DiscreteLottery) -> Result<f64> {
    let z0 = exact_ce(u, w0, lot)?;
    Ok(w0 + lot.moments().mu - z0)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("standard deviation must be >= 0, got {sigma}")))
    }
}

/// Fair-lottery premium `r(w0) sigma^2 / 2`.
pub fn approx_premium_fair(u: &UtilitySpec, w0: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(0.5 * u.ara(w0)? * (sigma * sigma))
}

/// Non-fair premium `r(w0) (mu^2 + sigma^2) / 2`.
pub fn approx_premium_nonfair(u: &UtilitySpec, w0: f64, m: Moments) -> Result<f64> {
    check_sigma(m.sigma)?;
    Ok(0.5 * u.ara(w0)? * (m.mu * m.mu + m.sigma * m.sigma))
}

/// Absolute risk aversion implied by an observed certainty equivalent `z0`.
pub fn ara_from_ce(w0: f64, mu: f64, sigma: f64, z0: f64) -> Result<f64> {
    let denom = mu * mu + sigma * sigma;
    if denom == 0.0 {
        return Err(Error::Degenerate(
            "riskless zero-mean lottery carries no curvature information".into(),
        ));
    }
    Ok(2.0 * (w0 + mu - z0) / denom)
}

/// Relative premium `r(w0) w0 (mu_R^2 + sigma_R^2) / 2` as a fraction of wealth.
pub fn relative_premium(u: &UtilitySpec, w0: f64, m: Moments) -> Result<f64> {
    check_sigma(m.sigma)?;
    if w0 <= 0.0 {
        return Err(Error::Domain(format!("relative premium needs w0 > 0, got {w0}")));
    }
    Ok(0.5 * u.ara(w0)? * w0 * (m.mu * m.mu + m.sigma * m.sigma))
}

/// Relative risk aversion implied by a gross relative certainty equivalent `z_tilde`
/// (roughly `1 + r_f`).
///
/// Negative values are returned as-is when `z_tilde > 1 + mu`.
pub fn rra_from_relative_ce(mu: f64, sigma: f64, z_tilde: f64) -> Result<f64> {
    let denom = mu * mu + sigma * sigma;
    if denom == 0.0 {
        return Err(Error::Degenerate(
            "riskless zero-mean return lottery carries no curvature information".into(),
        ));
    }
    Ok(2.0 * (1.0 + mu - z_tilde) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn coin(x: f64) -> DiscreteLottery {
        DiscreteLottery::from_pairs(&[(x, 0.5), (-x, 0.5)]).unwrap()
    }

    #[test]
    fn lottery_invariants() {
        assert!(DiscreteLottery::new(vec![], vec![]).is_err());
        assert!(DiscreteLottery::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteLottery::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteLottery::new(vec![1.0, 2.0], vec![-0.5, 1.5]).is_err());
        assert!(DiscreteLottery::new(vec![1.0, 2.0], vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn moments_examples() {
        let m = coin(100.0).moments();
        assert_eq!((m.mu, m.sigma), (0.0, 100.0));
        let m = DiscreteLottery::certain(7.5).unwrap().moments();
        assert_eq!((m.mu, m.sigma), (7.5, 0.0));
        let m = DiscreteLottery::from_pairs(&[(10.0, 0.5), (-4.0, 0.5)])
            .unwrap()
            .moments();
        assert!(close(m.mu, 3.0, 1e-15) && close(m.sigma, 7.0, 1e-14));
    }

    #[test]
    fn exact_ce_examples() {
        let log = UtilitySpec::log(0.0).unwrap();
        let ce = exact_ce(&log, 1000.0, &coin(100.0)).unwrap();
        assert!(close(ce, (900.0f64 * 1100.0).sqrt(), 1e-10));
        assert!(close(ce, 994.9874, 1e-4));

        let riskless = DiscreteLottery::certain(0.0).unwrap();
        for u in [log, UtilitySpec::Sqrt, UtilitySpec::quadratic(0.0001).unwrap()] {
            assert!(close(exact_ce(&u, 500.0, &riskless).unwrap(), 500.0, 1e-10));
            assert!(close(exact_risk_premium(&u, 500.0, &riskless).unwrap(), 0.0, 1e-10));
        }

        let cara = UtilitySpec::exponential(0.0, 0.001).unwrap();
        let ce = exact_ce(&cara, 1000.0, &coin(100.0)).unwrap();
        let expected = 1000.0 - (0.1f64).cosh().ln() / 0.001;
        assert!(close(ce, expected, 1e-9));
        assert!(close(ce, 995.0083, 1e-4));
    }

    #[test]
    fn exact_premium_examples() {
        let log = UtilitySpec::log(0.0).unwrap();
        let p = exact_risk_premium(&log, 1000.0, &coin(100.0)).unwrap();
        assert!(close(p, 5.0126, 1e-4));
        let cara = UtilitySpec::exponential(0.0, 0.001).unwrap();
        let p = exact_risk_premium(&cara, 1000.0, &coin(100.0)).unwrap();
        assert!(close(p, 4.9917, 1e-4));
    }

    #[test]
    fn exact_ce_domain_error() {
        let log = UtilitySpec::log(0.0).unwrap();
        assert!(matches!(
            exact_ce(&log, 50.0, &coin(100.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn approximation_examples() {
        let log = UtilitySpec::log(0.0).unwrap();
        assert!(close(approx_premium_fair(&log, 1000.0, 100.0).unwrap(), 5.0, 1e-12));
        assert_eq!(approx_premium_fair(&log, 1000.0, 0.0).unwrap(), 0.0);
        let cara = UtilitySpec::exponential(0.0, 0.001).unwrap();
        for w0 in [-50.0, 10.0, 1000.0, 1e7] {
            assert!(close(approx_premium_fair(&cara, w0, 100.0).unwrap(), 5.0, 1e-12));
        }
        let m = Moments::new(10.0, 100.0).unwrap();
        assert!(close(approx_premium_nonfair(&log, 1000.0, m).unwrap(), 5.05, 1e-12));
        let q = UtilitySpec::quadratic(0.0001).unwrap();
        assert!(close(approx_premium_nonfair(&q, 1000.0, m).unwrap(), 1.2625, 1e-12));
        assert!(approx_premium_fair(&log, 1000.0, -1.0).is_err());
    }

    #[test]
    fn nonfair_reduces_to_fair_bitwise() {
        let u = UtilitySpec::power(2.0, 0.3).unwrap();
        for sigma in [0.0, 1e-3, 0.37, 12.5, 999.0] {
            let fair = approx_premium_fair(&u, 11.0, sigma).unwrap();
            let nonfair = approx_premium_nonfair(&u, 11.0, Moments::new(0.0, sigma).unwrap()).unwrap();
            assert_eq!(fair.to_bits(), nonfair.to_bits());
        }
    }

    #[test]
    fn ara_from_ce_examples() {
        let r = ara_from_ce(1000.0, 0.0, 100.0, 994.9874).unwrap();
        assert!(close(r, 0.0010025, 1e-7));
        assert_eq!(ara_from_ce(1000.0, 10.0, 100.0, 1010.0).unwrap(), 0.0);
        let r = ara_from_ce(1000.0, 10.0, 100.0, 1004.95).unwrap();
        assert!(close(r, 0.001, 1e-12));
        assert!(matches!(
            ara_from_ce(1000.0, 0.0, 0.0, 1000.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn relative_premium_examples() {
        let m = Moments::new(0.01, 0.04).unwrap();
        let log = UtilitySpec::log(0.0).unwrap();
        for w0 in [1.0, 30.0, 1e4] {
            assert!(close(relative_premium(&log, w0, m).unwrap(), 0.00085, 1e-15));
            assert!(close(
                relative_premium(&UtilitySpec::Sqrt, w0, m).unwrap(),
                0.000425,
                1e-15
            ));
        }
        assert_eq!(
            relative_premium(&log, 5.0, Moments::new(0.0, 0.0).unwrap()).unwrap(),
            0.0
        );
        assert!(relative_premium(&log, 0.0, m).is_err());
    }

    #[test]
    fn rra_from_relative_ce_examples() {
        let l = rra_from_relative_ce(0.008, 0.04, 1.002).unwrap();
        assert!(close(l, 2.0 * 0.006 / 0.001664, 1e-12));
        assert!(close(l, 7.2115, 1e-4));
        assert_eq!(rra_from_relative_ce(0.008, 0.04, 1.008).unwrap(), 0.0);
        assert!(rra_from_relative_ce(0.008, 0.04, 1.02).unwrap() < 0.0);
        assert!(matches!(
            rra_from_relative_ce(0.0, 0.0, 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rra_round_trip_recovers_log_utility() {
        // Small-sigma return lottery: a log agent's gross CE reproduces lambda close to 1.
        let log = UtilitySpec::log(0.0).unwrap();
        for sigma in [0.04, 0.02, 0.01] {
            let lot = DiscreteLottery::two_point(Moments::new(0.0, sigma).unwrap()).unwrap();
            let z_tilde = exact_ce(&log, 1.0, &lot).unwrap() / 1.0;
            let m = lot.moments();
            let lambda = rra_from_relative_ce(m.mu, m.sigma, z_tilde).unwrap();
            assert!((lambda - 1.0).abs() < sigma, "sigma {sigma}: lambda {lambda}");
        }
    }

    #[test]
    fn relative_and_absolute_premia_agree() {
        let u = UtilitySpec::neg_power(0.5, 1.3).unwrap();
        let w0 = 42.0;
        let m = Moments::new(0.007, 0.05).unwrap();
        let rel = relative_premium(&u, w0, m).unwrap() * w0;
        let abs = approx_premium_nonfair(&u, w0, m.scaled(w0)).unwrap();
        assert!((rel - abs).abs() <= 4.0 * f64::EPSILON * abs);
    }

    /// Symmetric lotteries have no third-moment term, so the remainder of the fair-lottery
    /// formula is fourth order: for log utility it equals `w0 (x^4/8 + x^6/16 + ...)` with
    /// `x = s/w0`, making the halving ratio `16 (1 + x^2/2 + ...) / (1 + x^2/8 + ...)`.
    #[test]
    fn symmetric_coin_remainder_is_fourth_order() {
        let log = UtilitySpec::log(0.0).unwrap();
        let w0 = 1000.0;
        let err = |s: f64| {
            exact_risk_premium(&log, w0, &coin(s)).unwrap() - approx_premium_fair(&log, w0, s).unwrap()
        };
        let analytic = |s: f64| {
            let x = s / w0;
            w0 * (1.0 - (1.0 - x * x).sqrt()) - 0.5 * w0 * x * x
        };
        for s in [100.0, 50.0, 25.0] {
            assert!((err(s) - analytic(s)).abs() < 1e-9);
        }
        let ratio = err(100.0) / err(50.0);
        assert!((ratio - 16.0604).abs() < 1e-3, "ratio {ratio}");
    }
}
