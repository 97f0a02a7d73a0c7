//! Full extraction pipeline on a market priced by a log-utility agent: the recovered relative
//! risk aversion should sit near 1 with no trend in wealth.

use arrow_pratt::estimation::{classify_trend, estimate_moments, returns_of, risk_aversion_series};
use arrow_pratt::synthetic::{log_agent_market, LogAgentConfig};

fn main() -> arrow_pratt::Result<()> {
    let cfg = LogAgentConfig::default();
    let ds = log_agent_market(&cfg)?;
    let moments = estimate_moments(&returns_of(&ds.records), cfg.scheme)?;
    let points = risk_aversion_series(&moments, &ds.records, cfg.rates)?;

    for p in points.iter().step_by(30) {
        println!("{}  wealth {:>7.3}  ara {:.5}  rra {:.4}", p.date, p.wealth, p.ara, p.rra);
    }
    let wealth: Vec<f64> = points.iter().map(|p| p.wealth).collect();
    let rra: Vec<f64> = points.iter().map(|p| p.rra).collect();
    let ara: Vec<f64> = points.iter().map(|p| p.ara).collect();
    let worst = rra.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    println!("max |rra - 1| = {worst:.4}");
    println!("rra vs wealth: {:?}", classify_trend(&wealth, &rra, 0.2)?);
    println!("ara vs wealth: {:?}", classify_trend(&wealth, &ara, 0.2)?);
    Ok(())
}
