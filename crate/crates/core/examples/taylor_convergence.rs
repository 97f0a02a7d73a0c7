//! How the second-order premium error shrinks as lottery outcomes are halved.

use arrow_pratt::lottery::{approx_premium_nonfair, exact_risk_premium};
use arrow_pratt::{DiscreteLottery, UtilitySpec};

fn main() -> arrow_pratt::Result<()> {
    let log = UtilitySpec::log(0.0)?;
    let w0 = 1000.0;
    let base = [(200.0, 1.0 / 3.0), (-100.0, 2.0 / 3.0)];
    let base = DiscreteLottery::from_pairs(&base)?;

    println!("{:>8} {:>14} {:>14} {:>12} {:>8}", "scale", "exact", "approx", "abs error", "ratio");
    let mut previous: Option<f64> = None;
    for k in 0..8 {
        let t = 0.5f64.powi(k);
        let lot = base.scaled(t);
        let exact = exact_risk_premium(&log, w0, &lot)?;
        let approx = approx_premium_nonfair(&log, w0, lot.moments())?;
        let err = (exact - approx).abs();
        let ratio = previous.map_or(String::from("-"), |p| format!("{:.3}", p / err));
        println!("{t:>8.5} {exact:>14.8} {approx:>14.8} {err:>12.3e} {ratio:>8}");
        previous = Some(err);
    }
    Ok(())
}
