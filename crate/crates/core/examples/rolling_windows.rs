//! Expanding and rolling moment estimates on one return series.

use arrow_pratt::estimation::{estimate_moments, Scheme};
use arrow_pratt::synthetic::antithetic_returns;
use arrow_pratt::YearMonth;

fn main() -> arrow_pratt::Result<()> {
    let start = YearMonth::new(1990, 1)?;
    let returns: Vec<_> = start.range(372).zip(antithetic_returns(372, 0.006, 0.045, 5)).collect();

    for scheme in [
        Scheme::Expanding { min_obs: 24 },
        Scheme::Rolling { window: 60 },
        Scheme::Rolling { window: 120 },
        Scheme::Rolling { window: 180 },
    ] {
        let series = estimate_moments(&returns, scheme)?;
        let first = &series.entries[0];
        let last = series.entries.last().expect("nonempty");
        println!(
            "{:<14} {:>4} entries  {} mu {:+.5} sigma {:.5}  ...  {} mu {:+.5} sigma {:.5}",
            scheme.to_string(),
            series.entries.len(),
            first.date,
            first.mu,
            first.sigma,
            last.date,
            last.mu,
            last.sigma
        );
    }
    Ok(())
}
