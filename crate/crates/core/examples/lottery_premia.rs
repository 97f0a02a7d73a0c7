//! Exact certainty equivalents and risk premia next to their second-order approximations,
//! for a fair and a non-fair lottery.

use arrow_pratt::lottery::{
    approx_premium_fair, approx_premium_nonfair, ara_from_ce, exact_ce, exact_risk_premium,
};
use arrow_pratt::{DiscreteLottery, UtilitySpec};

fn main() -> arrow_pratt::Result<()> {
    let w0 = 1000.0;
    let log = UtilitySpec::log(0.0)?;
    let cara = UtilitySpec::exponential(0.0, 0.001)?;

    let fair = DiscreteLottery::from_pairs(&[(100.0, 0.5), (-100.0, 0.5)])?;
    let skewed = DiscreteLottery::from_pairs(&[(150.0, 0.5), (-50.0, 0.5)])?;

    for (name, u) in [("log", &log), ("exp:c=0.001", &cara)] {
        let ce = exact_ce(u, w0, &fair)?;
        let exact = exact_risk_premium(u, w0, &fair)?;
        let approx = approx_premium_fair(u, w0, 100.0)?;
        println!("{name:<12} fair coin:   ce {ce:.4}  premium {exact:.4}  approx {approx:.4}");

        let m = skewed.moments();
        let exact = exact_risk_premium(u, w0, &skewed)?;
        let approx = approx_premium_nonfair(u, w0, m)?;
        let ce = exact_ce(u, w0, &skewed)?;
        let implied = ara_from_ce(w0, m.mu, m.sigma, ce)?;
        println!(
            "{name:<12} skewed coin: ce {ce:.4}  premium {exact:.4}  approx {approx:.4}  implied ara {implied:.6} (true {:.6})",
            u.ara(w0)?
        );
    }
    Ok(())
}
