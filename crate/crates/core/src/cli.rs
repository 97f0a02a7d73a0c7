//! Batch front end: `extract`, `portfolio` and `validate`.
//!
//! Settings resolve as command-line flags over an optional TOML config file over built-in
//! defaults. Output tables are computed in full before anything is written, then moved into
//! place by rename, so a failing run leaves no partial tables behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::data_io::{
    apply_exclusions, load_market_csv, temp_path, DiagnosticRow, Format, MarketDataset, PlotAxis,
    ResultTable, SchemaConfig, WeightRow,
};
use crate::date::MonthRange;
use crate::error::{Error, Result};
use crate::estimation::{
    classify_trend, estimate_moments, returns_of, risk_aversion_series, Compounding,
    RateConvention, RiskAversionPoint, Scheme, Trend, DEFAULT_PERIODS_PER_YEAR, DEFAULT_TAU,
};
use crate::portfolio::{parse_family_list, weight_series, WeightFamily};
use crate::validate::{run_all, SuiteReport, ToleranceProfile};

const DEFAULT_FAMILIES: &str = "quadratic:b=0.2,log";

#[derive(Debug, Parser)]
#[command(name = "arrow-pratt", version, about = "Market risk-aversion extraction and utility-based portfolio weights")]
pub struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate return moments and write ARA/RRA series with trend diagnostics.
    Extract(RunArgs),
    /// Write closed-form risky-asset weights per date and utility family.
    Portfolio(RunArgs),
    /// Run the synthetic validation suites.
    Validate(ValidateArgs),
}

#[derive(Debug, Default, Clone, Args)]
pub struct RunArgs {
    /// Market CSV file (repeatable, one index per file).
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    /// `expanding:<min_obs>` or `rolling:<M>`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Inclusive `YYYY-MM..YYYY-MM` range to drop before estimation (repeatable).
    #[arg(long = "exclude")]
    pub exclude: Vec<String>,
    /// `geometric` or `simple` conversion of annual yields.
    #[arg(long = "rf-compounding")]
    pub rf_compounding: Option<String>,
    #[arg(long = "periods-per-year")]
    pub periods_per_year: Option<u32>,
    /// Correlation dead-band for trend labels.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Wealth level at which to split the RRA correlation.
    #[arg(long = "split-at")]
    pub split_at: Option<f64>,
    /// Comma-separated weight families, e.g. `quadratic:b=0.2,log,sqrt,exp`.
    #[arg(long)]
    pub families: Option<String>,
    /// Presentation clamp `lo,hi` for emitted weights.
    #[arg(long, allow_hyphen_values = true)]
    pub clamp: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Input returns and yields are in percent.
    #[arg(long)]
    pub percent: bool,
}

#[derive(Debug, Default, Clone, Args)]
pub struct ValidateArgs {
    /// `default` or `strict` (oracle tolerances tightened 10x).
    #[arg(long)]
    pub profile: Option<String>,
}

/// Config-file form of [`RunArgs`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub exclude: Vec<String>,
    pub scheme: Option<String>,
    pub rf_compounding: Option<String>,
    pub periods_per_year: Option<u32>,
    pub tau: Option<f64>,
    pub split_at: Option<f64>,
    pub families: Option<Vec<String>>,
    pub clamp: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub percent: Option<bool>,
    pub profile: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub exclusions: Vec<MonthRange>,
    pub scheme: Scheme,
    pub rates: RateConvention,
    pub tau: f64,
    pub split_at: Option<f64>,
    pub families: Vec<WeightFamily>,
    pub clamp: Option<(f64, f64)>,
    pub out: PathBuf,
    pub format: Format,
    pub schema: SchemaConfig,
}

fn parse_clamp(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("clamp must be 'lo,hi', got '{text}'"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, file: &FileConfig) -> Result<Self> {
        let inputs = if args.inputs.is_empty() {
            file.inputs.clone()
        } else {
            args.inputs.clone()
        };
        let exclude = if args.exclude.is_empty() {
            &file.exclude
        } else {
            &args.exclude
        };
        let exclusions = exclude
            .iter()
            .map(|s| s.parse().map_err(|e: Error| Error::Config(e.to_string())))
            .collect::<Result<Vec<MonthRange>>>()?;
        let scheme = match args.scheme.as_ref().or(file.scheme.as_ref()) {
            Some(s) => s.parse()?,
            None => Scheme::default(),
        };
        let compounding = match args.rf_compounding.as_ref().or(file.rf_compounding.as_ref()) {
            Some(s) => s.parse()?,
            None => Compounding::default(),
        };
        let periods_per_year = args
            .periods_per_year
            .or(file.periods_per_year)
            .unwrap_or(DEFAULT_PERIODS_PER_YEAR);
        let families = match (&args.families, &file.families) {
            (Some(list), _) => parse_family_list(list)?,
            (None, Some(list)) => list.iter().map(|f| f.parse()).collect::<Result<_>>()?,
            (None, None) => parse_family_list(DEFAULT_FAMILIES)?,
        };
        let clamp = match (&args.clamp, file.clamp) {
            (Some(text), _) => Some(parse_clamp(text)?),
            (None, Some([lo, hi])) => Some(parse_clamp(&format!("{lo},{hi}"))?),
            (None, None) => None,
        };
        let format = match args.format.as_ref().or(file.format.as_ref()) {
            Some(s) => s.parse()?,
            None => Format::default(),
        };
        let cfg = RunConfig {
            inputs,
            exclusions,
            scheme,
            rates: RateConvention {
                compounding,
                periods_per_year,
            },
            tau: args.tau.or(file.tau).unwrap_or(DEFAULT_TAU),
            split_at: args.split_at.or(file.split_at),
            families,
            clamp,
            out: args
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
            format,
            schema: SchemaConfig {
                percent: args.percent || file.percent.unwrap_or(false),
                ..SchemaConfig::default()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Config("at least one --input is required".into()));
        }
        if !(self.tau >= 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in [0, 1), got {}", self.tau)));
        }
        if self.rates.periods_per_year == 0 {
            return Err(Error::Config("periods per year must be positive".into()));
        }
        if let Some(cut) = self.split_at {
            if !cut.is_finite() {
                return Err(Error::Config(format!("split wealth must be finite, got {cut}")));
            }
        }
        Ok(())
    }
}

fn load_dataset(path: &Path, cfg: &RunConfig) -> Result<(MarketDataset, usize)> {
    let ds = load_market_csv(path, &cfg.schema)?.with_exclusions(cfg.exclusions.clone());
    Ok(apply_exclusions(&ds))
}

/// Correlation row; a constant measure is labelled `Constant` with a missing correlation.
fn diagnostic(series: String, wealth: &[f64], measure: &[f64], tau: f64) -> Result<DiagnosticRow> {
    match classify_trend(wealth, measure, tau) {
        Ok(c) => Ok(DiagnosticRow {
            series,
            corr: Some(c.corr),
            label: c.trend,
            tau,
        }),
        Err(Error::Degenerate(_)) if measure.windows(2).all(|w| w[0] == w[1]) => Ok(DiagnosticRow {
            series,
            corr: None,
            label: Trend::Constant,
            tau,
        }),
        Err(e) => Err(e),
    }
}

fn diagnostics(points: &[RiskAversionPoint], cfg: &RunConfig) -> Result<Vec<DiagnosticRow>> {
    let wealth: Vec<f64> = points.iter().map(|p| p.wealth).collect();
    let ara: Vec<f64> = points.iter().map(|p| p.ara).collect();
    let rra: Vec<f64> = points.iter().map(|p| p.rra).collect();
    let mut rows = vec![
        diagnostic("ara_vs_wealth".into(), &wealth, &ara, cfg.tau)?,
        diagnostic("rra_vs_wealth".into(), &wealth, &rra, cfg.tau)?,
    ];
    if let Some(cut) = cfg.split_at {
        let (below, above): (Vec<&RiskAversionPoint>, Vec<&RiskAversionPoint>) = points.iter().partition(|p| p.wealth <= cut);
        for (name, side) in [("rra_vs_wealth_below_split", below), ("rra_vs_wealth_above_split", above)] {
            if side.len() < 2 {
                return Err(Error::InsufficientData(format!(
                    "{} points on one side of the wealth split {cut}; need at least 2",
                    side.len()
                )));
            }
            let w: Vec<f64> = side.iter().map(|p| p.wealth).collect();
            let r: Vec<f64> = side.iter().map(|p| p.rra).collect();
            rows.push(diagnostic(name.into(), &w, &r, cfg.tau)?);
        }
    }
    Ok(rows)
}

/// Writes every table to a temporary sibling first, then renames them all into place.
fn write_all(tables: &[(PathBuf, ResultTable)], format: Format) -> Result<()> {
    let mut staged = Vec::with_capacity(tables.len());
    for (path, table) in tables {
        let tmp = temp_path(path);
        if let Err(e) = fs::write(&tmp, table.render(format)) {
            for t in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(Error::Io(format!("{}: {e}", tmp.display())));
        }
        staged.push(tmp);
    }
    for ((path, _), tmp) in tables.iter().zip(&staged) {
        fs::rename(tmp, path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn output_path(cfg: &RunConfig, index: &str, what: &str) -> PathBuf {
    cfg.out.join(format!("{index}_{what}.{}", cfg.format.extension()))
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))
}

fn line(out: &mut dyn Write, text: String) -> Result<()> {
    writeln!(out, "{text}").map_err(Error::from)
}

/// Paths written by a successful run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
}

pub fn cmd_extract(cfg: &RunConfig, out: &mut dyn Write) -> Result<RunSummary> {
    let mut tables = Vec::new();
    let mut messages = Vec::new();
    for input in &cfg.inputs {
        let (ds, removed) = load_dataset(input, cfg)?;
        let name = ds.index_name.clone();
        let moments = estimate_moments(&returns_of(&ds.records), cfg.scheme)?;
        let points = risk_aversion_series(&moments, &ds.records, cfg.rates)?;
        let diag = diagnostics(&points, cfg)?;

        if removed > 0 {
            messages.push(format!("{name} excluded {removed} records"));
        }
        let negative = points.iter().filter(|p| p.rra < 0.0).count();
        if negative > 0 {
            messages.push(format!("{name} WARN negative rra in {negative} periods"));
        }
        for d in &diag {
            let corr = d.corr.map_or("NA".to_string(), |c| format!("{c:.4}"));
            messages.push(format!("{name} {} corr={corr} {}", d.series, d.label));
        }

        let ra = ResultTable::RiskAversion(points);
        tables.push((output_path(cfg, &name, "moments"), ResultTable::Moments(moments.entries)));
        tables.push((output_path(cfg, &name, "risk_aversion"), ra.emit_plot_data(PlotAxis::Date)?));
        tables.push((
            output_path(cfg, &name, "risk_aversion_by_wealth"),
            ra.emit_plot_data(PlotAxis::WealthSorted)?,
        ));
        tables.push((output_path(cfg, &name, "diagnostics"), ResultTable::Diagnostics(diag)));
    }
    ensure_out_dir(cfg)?;
    write_all(&tables, cfg.format)?;
    for m in messages {
        line(out, m)?;
    }
    Ok(RunSummary {
        written: tables.into_iter().map(|(p, _)| p).collect(),
    })
}

pub fn cmd_portfolio(cfg: &RunConfig, out: &mut dyn Write) -> Result<RunSummary> {
    if cfg.families.is_empty() {
        return Err(Error::Config("at least one weight family is required".into()));
    }
    let mut tables = Vec::new();
    let mut messages = Vec::new();
    for input in &cfg.inputs {
        let (ds, _) = load_dataset(input, cfg)?;
        let name = ds.index_name.clone();
        let moments = estimate_moments(&returns_of(&ds.records), cfg.scheme)?;
        let rf: Vec<_> = ds
            .records
            .iter()
            .map(|r| (r.date, cfg.rates.per_period(r.rf_annual)))
            .collect();
        let series = cfg
            .families
            .iter()
            .map(|&f| weight_series(f, &moments, &rf))
            .collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        for k in 0..moments.entries.len() {
            for s in &series {
                let w = s[k];
                let (w_s, w_s_raw) = match cfg.clamp {
                    Some((lo, hi)) => (w.w_s.clamp(lo, hi), Some(w.w_s)),
                    None => (w.w_s, None),
                };
                rows.push(WeightRow {
                    date: w.date,
                    family: w.family.to_string(),
                    w_s,
                    w_s_raw,
                });
            }
        }
        for (family, s) in cfg.families.iter().zip(&series) {
            let mean = s.iter().map(|w| w.w_s).sum::<f64>() / s.len() as f64;
            messages.push(format!("{name} {family} mean_w_s={mean:.4}"));
        }
        tables.push((output_path(cfg, &name, "weights"), ResultTable::Weights(rows)));
    }
    ensure_out_dir(cfg)?;
    write_all(&tables, cfg.format)?;
    for m in messages {
        line(out, m)?;
    }
    Ok(RunSummary {
        written: tables.into_iter().map(|(p, _)| p).collect(),
    })
}

/// Runs every suite and prints one line per suite; returns the reports.
pub fn cmd_validate(profile: ToleranceProfile, out: &mut dyn Write) -> Result<Vec<SuiteReport>> {
    let reports = run_all(profile);
    for r in &reports {
        line(out, r.to_string())?;
    }
    Ok(reports)
}

/// Dispatches a parsed command line and returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Extract(args) => {
            cmd_extract(&RunConfig::resolve(args, &file)?, out)?;
            Ok(0)
        }
        Command::Portfolio(args) => {
            cmd_portfolio(&RunConfig::resolve(args, &file)?, out)?;
            Ok(0)
        }
        Command::Validate(args) => {
            let profile = match args.profile.as_ref().or(file.profile.as_ref()) {
                Some(p) => p.parse()?,
                None => ToleranceProfile::Default,
            };
            let failed = cmd_validate(profile, out)?.iter().filter(|r| !r.passed).count();
            Ok(failed.min(100) as i32)
        }
    }
}
