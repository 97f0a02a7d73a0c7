//! Arrow-Pratt measures across the utility families at a few wealth levels.

use arrow_pratt::UtilitySpec;

fn main() -> arrow_pratt::Result<()> {
    let families = [
        UtilitySpec::quadratic(0.001)?,
        UtilitySpec::log(0.0)?,
        UtilitySpec::Sqrt,
        UtilitySpec::power(1.0, 0.3)?,
        UtilitySpec::neg_power(1.0, 2.0)?,
        UtilitySpec::exponential(0.0, 0.01)?,
    ];
    println!("{:<22} {:>8} {:>14} {:>14}", "family", "wealth", "ara", "rra");
    for u in &families {
        for w in [50.0, 200.0, 400.0] {
            if !u.in_domain(w) {
                continue;
            }
            println!("{:<22} {:>8} {:>14.6e} {:>14.6}", u.to_string(), w, u.ara(w)?, u.rra(w)?);
        }
    }
    Ok(())
}
