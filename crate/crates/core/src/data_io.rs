//! Market CSV ingestion, exclusion windows, and result-table serialisation.
//!
//! Input files carry one index each, with header `date,return,market_cap,rf_annual`, dates as
//! `YYYY-MM`, and optional `#` comment lines. Output tables have a fixed column order per kind
//! and write every number with 17 significant digits so a write/read cycle is exact.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::date::{MonthRange, YearMonth};
use crate::error::{Error, Result};
use crate::estimation::{MarketRecord, MomentEntry, RiskAversionPoint, Trend};

const RISK_AVERSION_COMMENT: &str = "# ara in inverse market_cap units; rra dimensionless";

/// Column names and unit handling for market CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    pub date_col: String,
    pub return_col: String,
    pub market_cap_col: String,
    pub rf_col: String,
    /// Returns and yields are stored in percent and get divided by 100.
    pub percent: bool,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self {
            date_col: "date".into(),
            return_col: "return".into(),
            market_cap_col: "market_cap".into(),
            rf_col: "rf_annual".into(),
            percent: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketDataset {
    pub index_name: String,
    /// Sorted by date, no duplicates.
    pub records: Vec<MarketRecord>,
    pub exclusions: Vec<MonthRange>,
}

impl MarketDataset {
    pub fn new(index_name: impl Into<String>, mut records: Vec<MarketRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.date);
        for w in records.windows(2) {
            if w[0].date == w[1].date {
                return Err(Error::Validation(format!("duplicate date {}", w[0].date)));
            }
        }
        for r in &records {
            r.validate()?;
        }
        Ok(Self {
            index_name: index_name.into(),
            records,
            exclusions: Vec::new(),
        })
    }

    pub fn with_exclusions(mut self, exclusions: Vec<MonthRange>) -> Self {
        self.exclusions = exclusions;
        self
    }
}

pub fn load_market_csv(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<MarketDataset> {
    let path = path.as_ref();
    let file = fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "index".into());
    parse_market_csv(file, name, schema)
}

pub fn parse_market_csv<R: Read>(reader: R, index_name: String, schema: &SchemaConfig) -> Result<MarketDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column '{name}'")))
    };
    let cols = [
        column(&schema.date_col)?,
        column(&schema.return_col)?,
        column(&schema.market_cap_col)?,
        column(&schema.rf_col)?,
    ];
    let scale = if schema.percent { 0.01 } else { 1.0 };

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = |i: usize, name: &str| -> Result<&str> {
            match row.get(cols[i]) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    message: format!("missing value for '{name}'"),
                }),
            }
        };
        let number = |i: usize, name: &str| -> Result<f64> {
            let text = cell(i, name)?;
            text.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("'{text}' is not a number in column '{name}'"),
            })
        };
        let date_text = cell(0, &schema.date_col)?;
        let date = YearMonth::from_str(date_text).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let record = MarketRecord {
            date,
            ret: number(1, &schema.return_col)? * scale,
            market_cap: number(2, &schema.market_cap_col)?,
            rf_annual: number(3, &schema.rf_col)? * scale,
        };
        record
            .validate()
            .map_err(|e| Error::Validation(format!("line {line}: {e}")))?;
        records.push(record);
    }
    MarketDataset::new(index_name, records)
}

/// Removes records inside any exclusion range; returns the filtered dataset and how many
/// records were dropped.
pub fn apply_exclusions(ds: &MarketDataset) -> (MarketDataset, usize) {
    let records: Vec<MarketRecord> = ds
        .records
        .iter()
        .filter(|r| !ds.exclusions.iter().any(|x| x.contains(r.date)))
        .copied()
        .collect();
    let removed = ds.records.len() - records.len();
    (
        MarketDataset {
            index_name: ds.index_name.clone(),
            records,
            exclusions: ds.exclusions.clone(),
        },
        removed,
    )
}

/// Renders records in the default input schema (decimal units).
pub fn render_market_csv(ds: &MarketDataset) -> String {
    let mut out = String::from("date,return,market_cap,rf_annual\n");
    for r in &ds.records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.date,
            format_number(r.ret),
            format_number(r.market_cap),
            format_number(r.rf_annual)
        ));
    }
    out
}

pub fn write_market_csv(ds: &MarketDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_market_csv(ds)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Moments,
    RiskAversion,
    Weights,
    Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub date: YearMonth,
    pub family: String,
    pub w_s: f64,
    /// Unclamped weight, present when a presentation clamp was applied.
    pub w_s_raw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub series: String,
    /// `None` when the correlation is undefined (constant input).
    pub corr: Option<f64>,
    pub label: Trend,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResultTable {
    Moments(Vec<MomentEntry>),
    RiskAversion(Vec<RiskAversionPoint>),
    Weights(Vec<WeightRow>),
    Diagnostics(Vec<DiagnosticRow>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format must be csv or json, got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    Date,
    WealthSorted,
}

/// `%.17g`: 17 significant digits, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialisation")
}

impl ResultTable {
    pub fn kind(&self) -> TableKind {
        match self {
            ResultTable::Moments(_) => TableKind::Moments,
            ResultTable::RiskAversion(_) => TableKind::RiskAversion,
            ResultTable::Weights(_) => TableKind::Weights,
            ResultTable::Diagnostics(_) => TableKind::Diagnostics,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ResultTable::Moments(r) => r.len(),
            ResultTable::RiskAversion(r) => r.len(),
            ResultTable::Weights(r) => r.len(),
            ResultTable::Diagnostics(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column names in output order.
    pub fn columns(&self) -> Vec<&'static str> {
        match self {
            ResultTable::Moments(_) => vec!["date", "mu", "sigma"],
            ResultTable::RiskAversion(_) => vec!["date", "wealth", "ara", "rra"],
            ResultTable::Weights(rows) => {
                if rows.iter().any(|r| r.w_s_raw.is_some()) {
                    vec!["date", "family", "w_s", "w_s_raw"]
                } else {
                    vec!["date", "family", "w_s"]
                }
            }
            ResultTable::Diagnostics(_) => vec!["series", "corr", "label", "tau"],
        }
    }

    /// Cells per row: `(text, is_string)`; `None` text marks a missing value.
    fn cells(&self) -> Vec<Vec<(Option<String>, bool)>> {
        let num = |x: f64| (Some(format_number(x)), false);
        let opt = |x: Option<f64>| (x.map(format_number), false);
        let text = |s: String| (Some(s), true);
        match self {
            ResultTable::Moments(rows) => rows
                .iter()
                .map(|r| vec![text(r.date.to_string()), num(r.mu), num(r.sigma)])
                .collect(),
            ResultTable::RiskAversion(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        text(r.date.to_string()),
                        num(r.wealth),
                        num(r.ara),
                        num(r.rra),
                    ]
                })
                .collect(),
            ResultTable::Weights(rows) => {
                let with_raw = rows.iter().any(|r| r.w_s_raw.is_some());
                rows.iter()
                    .map(|r| {
                        let mut v = vec![text(r.date.to_string()), text(r.family.clone()), num(r.w_s)];
                        if with_raw {
                            v.push(opt(r.w_s_raw));
                        }
                        v
                    })
                    .collect()
            }
            ResultTable::Diagnostics(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        text(r.series.clone()),
                        opt(r.corr),
                        text(r.label.to_string()),
                        num(r.tau),
                    ]
                })
                .collect(),
        }
    }

    fn comment(&self) -> Option<&'static str> {
        match self {
            ResultTable::RiskAversion(_) => Some(RISK_AVERSION_COMMENT),
            _ => None,
        }
    }

    /// Serialises the table; output is LF-terminated and byte-deterministic.
    pub fn render(&self, format: Format) -> String {
        let columns = self.columns();
        let rows = self.cells();
        let mut out = String::new();
        match format {
            Format::Csv => {
                if let Some(c) = self.comment() {
                    out.push_str(c);
                    out.push('\n');
                }
                out.push_str(&columns.join(","));
                out.push('\n');
                for row in rows {
                    let line: Vec<String> = row
                        .into_iter()
                        .map(|(cell, is_text)| match cell {
                            Some(s) if is_text && s.contains([',', '"', '\n']) => {
                                format!("\"{}\"", s.replace('"', "\"\""))
                            }
                            Some(s) => s,
                            None => "NA".into(),
                        })
                        .collect();
                    out.push_str(&line.join(","));
                    out.push('\n');
                }
            }
            Format::Json => {
                out.push('[');
                for (i, row) in rows.into_iter().enumerate() {
                    out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
                    let fields: Vec<String> = columns
                        .iter()
                        .zip(row)
                        .map(|(col, (cell, is_text))| {
                            let value = match cell {
                                Some(s) if is_text => json_str(&s),
                                Some(s) => s,
                                None => "null".into(),
                            };
                            format!("{}: {value}", json_str(col))
                        })
                        .collect();
                    out.push_str(&fields.join(", "));
                    out.push('}');
                }
                out.push_str(if out.len() > 1 { "\n]\n" } else { "]\n" });
            }
        }
        out
    }

    /// Parses a table previously produced by [`ResultTable::render`].
    pub fn parse(kind: TableKind, format: Format, text: &str) -> Result<Self> {
        let rows = match format {
            Format::Csv => parse_csv_rows(text)?,
            Format::Json => parse_json_rows(text)?,
        };
        let get = |row: &Vec<(String, Option<String>)>, col: &str| -> Result<Option<String>> {
            row.iter()
                .find(|(c, _)| c == col)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Schema(format!("missing column '{col}'")))
        };
        let req = |row: &Vec<(String, Option<String>)>, col: &str| -> Result<String> {
            get(row, col)?.ok_or_else(|| Error::Schema(format!("missing value in column '{col}'")))
        };
        let num = |row: &Vec<(String, Option<String>)>, col: &str| -> Result<f64> {
            let s = req(row, col)?;
            s.parse()
                .map_err(|_| Error::Schema(format!("'{s}' is not a number in '{col}'")))
        };
        let opt_num = |row: &Vec<(String, Option<String>)>, col: &str| -> Result<Option<f64>> {
            match row.iter().find(|(c, _)| c == col) {
                None | Some((_, None)) => Ok(None),
                Some((_, Some(s))) => s
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Schema(format!("'{s}' is not a number in '{col}'"))),
            }
        };
        let date = |row: &Vec<(String, Option<String>)>| -> Result<YearMonth> { req(row, "date")?.parse() };
        Ok(match kind {
            TableKind::Moments => ResultTable::Moments(
                rows.iter()
                    .map(|r| {
                        Ok(MomentEntry {
                            date: date(r)?,
                            mu: num(r, "mu")?,
                            sigma: num(r, "sigma")?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            TableKind::RiskAversion => ResultTable::RiskAversion(
                rows.iter()
                    .map(|r| {
                        Ok(RiskAversionPoint {
                            date: date(r)?,
                            wealth: num(r, "wealth")?,
                            ara: num(r, "ara")?,
                            rra: num(r, "rra")?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            TableKind::Weights => ResultTable::Weights(
                rows.iter()
                    .map(|r| {
                        Ok(WeightRow {
                            date: date(r)?,
                            family: req(r, "family")?,
                            w_s: num(r, "w_s")?,
                            w_s_raw: opt_num(r, "w_s_raw")?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            TableKind::Diagnostics => ResultTable::Diagnostics(
                rows.iter()
                    .map(|r| {
                        Ok(DiagnosticRow {
                            series: req(r, "series")?,
                            corr: opt_num(r, "corr")?,
                            label: req(r, "label")?.parse()?,
                            tau: num(r, "tau")?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// Reorders rows along the requested axis (stable).
    pub fn emit_plot_data(&self, axis: PlotAxis) -> Result<ResultTable> {
        let mut t = self.clone();
        match (&mut t, axis) {
            (ResultTable::Moments(rows), PlotAxis::Date) => rows.sort_by_key(|r| r.date),
            (ResultTable::RiskAversion(rows), PlotAxis::Date) => rows.sort_by_key(|r| r.date),
            (ResultTable::Weights(rows), PlotAxis::Date) => rows.sort_by_key(|r| r.date),
            (ResultTable::RiskAversion(rows), PlotAxis::WealthSorted) => {
                rows.sort_by(|a, b| a.wealth.total_cmp(&b.wealth))
            }
            (table, axis) => {
                return Err(Error::Schema(format!(
                    "{:?} table has no {axis:?} axis",
                    table.kind()
                )))
            }
        }
        Ok(t)
    }
}

type RawRow = Vec<(String, Option<String>)>;

fn parse_csv_rows(text: &str) -> Result<Vec<RawRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            Ok(headers
                .iter()
                .cloned()
                .zip(rec.iter().map(|v| (v != "NA").then(|| v.to_string())))
                .collect())
        })
        .collect()
}

fn parse_json_rows(text: &str) -> Result<Vec<RawRow>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Schema("expected a JSON array of rows".into()))?;
    rows.iter()
        .map(|row| {
            let obj = row
                .as_object()
                .ok_or_else(|| Error::Schema("expected JSON row objects".into()))?;
            Ok(obj
                .iter()
                .map(|(k, v)| {
                    let cell = match v {
                        Value::Null => None,
                        Value::String(s) => Some(s.clone()),
                        other => Some(other.to_string()),
                    };
                    (k.clone(), cell)
                })
                .collect())
        })
        .collect()
}

/// Writes the table through a temporary file and an atomic rename.
pub fn write_table(t: &ResultTable, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let tmp = temp_path(path);
    fs::write(&tmp, t.render(format))
        .map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn temp_path(path: &Path) -> std::path::PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

pub fn read_table(path: impl AsRef<Path>, kind: TableKind, format: Format) -> Result<ResultTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ResultTable::parse(kind, format, &text)
}
