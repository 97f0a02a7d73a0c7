//! A market whose relative risk aversion rises with wealth up to a level and then drops:
//! the correlation below the cut is strongly positive while the whole sample looks negative.

use arrow_pratt::estimation::{
    estimate_moments, pearson_correlation, returns_of, risk_aversion_series, split_rra_at,
};
use arrow_pratt::synthetic::{regime_market, RegimeConfig};

fn main() -> arrow_pratt::Result<()> {
    let cfg = RegimeConfig::default();
    let ds = regime_market(&cfg)?;
    let moments = estimate_moments(&returns_of(&ds.records), cfg.scheme)?;
    let points = risk_aversion_series(&moments, &ds.records, cfg.rates)?;
    let wealth: Vec<f64> = points.iter().map(|p| p.wealth).collect();
    let rra: Vec<f64> = points.iter().map(|p| p.rra).collect();

    let (below, above) = split_rra_at(cfg.cut, &wealth, &rra)?;
    println!("periods: {}", points.len());
    println!("corr(rra, wealth) at or below {}: {below:+.3}", cfg.cut);
    println!("corr(rra, wealth) above {}:       {above:+.3}", cfg.cut);
    println!("corr(rra, wealth) full sample:    {:+.3}", pearson_correlation(&wealth, &rra)?);
    Ok(())
}
