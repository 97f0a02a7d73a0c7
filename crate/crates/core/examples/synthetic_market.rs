//! Writes the synthetic fixtures as market CSV files for trying the command-line tool:
//!
//! ```text
//! cargo run --example synthetic_market -- data
//! cargo run -- extract --input data/log_agent.csv --scheme rolling:60 --out out
//! cargo run -- portfolio --input data/regime.csv --families quadratic:b=0.2,log,sqrt,exp --out out
//! ```

use std::path::PathBuf;

use arrow_pratt::data_io::write_market_csv;
use arrow_pratt::synthetic::{log_agent_market, regime_market, LogAgentConfig, RegimeConfig};

fn main() -> arrow_pratt::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    for ds in [
        log_agent_market(&LogAgentConfig::default())?,
        regime_market(&RegimeConfig::default())?,
    ] {
        let path = dir.join(format!("{}.csv", ds.index_name));
        write_market_csv(&ds, &path)?;
        println!("wrote {} ({} months)", path.display(), ds.records.len());
    }
    Ok(())
}
