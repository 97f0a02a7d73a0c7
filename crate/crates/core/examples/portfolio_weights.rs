//! Closed-form risky-asset weights per utility family, checked against the numeric optimum
//! of the first-order condition on a two-point return lottery.

use arrow_pratt::lottery::Moments;
use arrow_pratt::portfolio::{weight_numeric, MarketParams, WeightFamily};
use arrow_pratt::DiscreteLottery;

fn main() -> arrow_pratt::Result<()> {
    let rf = 0.002;
    let returns = DiscreteLottery::two_point(Moments::new(0.008, 0.045)?)?;
    let m = returns.moments();
    let p = MarketParams::new(m.mu, m.sigma, rf)?;

    println!("{:<16} {:>12} {:>12}", "family", "closed form", "numeric");
    for family in [
        WeightFamily::Quadratic { b: 0.2 },
        WeightFamily::Log,
        WeightFamily::Sqrt,
        WeightFamily::Exponential,
    ] {
        let closed = family.weight(&p)?.w_s;
        let numeric = match weight_numeric(&family.utility(), &returns, rf) {
            Ok(w) => format!("{:>12.6}", w.w_s),
            Err(e) => format!("  ({})", e.code()),
        };
        println!("{:<16} {closed:>12.6} {numeric}", family.to_string());
    }
    Ok(())
}
