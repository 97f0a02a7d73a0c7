use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arrow_pratt::data_io::{read_table, write_market_csv, Format, TableKind};
use arrow_pratt::synthetic::{log_agent_market, regime_market, LogAgentConfig, RegimeConfig};
use arrow_pratt::ResultTable;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arrow-pratt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(dir: &Path) -> PathBuf {
    let path = dir.join("log_agent.csv");
    write_market_csv(&log_agent_market(&LogAgentConfig::default()).unwrap(), &path).unwrap();
    path
}

fn assert_one_line_error(o: &Output, code: &str, status: i32) {
    let err = stderr(o);
    assert_eq!(o.status.code(), Some(status), "{err}");
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("ERROR {code}: ")), "{err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extract_rolling_window_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let out = dir.path().join("out");
    let o = run(&["extract", "--input", s(&input), "--scheme", "rolling:60", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ra = read_table(out.join("log_agent_risk_aversion.csv"), TableKind::RiskAversion, Format::Csv).unwrap();
    assert_eq!(ra.len(), 360 - 59);
    let moments = read_table(out.join("log_agent_moments.csv"), TableKind::Moments, Format::Csv).unwrap();
    assert_eq!(moments.len(), 301);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("log_agent rra_vs_wealth"), "{stdout}");
    assert!(out.join("log_agent_risk_aversion_by_wealth.csv").exists());
    assert!(out.join("log_agent_diagnostics.csv").exists());
}

#[test]
fn wealth_sorted_output_is_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let out = dir.path().join("out");
    assert!(run(&["extract", "--input", s(&input), "--out", s(&out)]).status.success());
    let t = read_table(out.join("log_agent_risk_aversion_by_wealth.csv"), TableKind::RiskAversion, Format::Csv).unwrap();
    let ResultTable::RiskAversion(rows) = t else { unreachable!() };
    assert!(rows.windows(2).all(|w| w[0].wealth <= w[1].wealth));
}

#[test]
fn portfolio_sqrt_doubles_log() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let out = dir.path().join("out");
    let o = run(&["portfolio", "--input", s(&input), "--families", "log,sqrt", "--format", "json", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(out.join("log_agent_weights.json"), TableKind::Weights, Format::Json).unwrap();
    let ResultTable::Weights(rows) = t else { unreachable!() };
    assert_eq!(rows.len(), 2 * (360 - 23));
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].date, pair[1].date);
        assert_eq!(pair[0].family, "log");
        assert_eq!(pair[1].family, "sqrt");
        assert_eq!(pair[1].w_s, 2.0 * pair[0].w_s);
    }
}

#[test]
fn clamp_keeps_raw_weight() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let out = dir.path().join("out");
    let o = run(&["portfolio", "--input", s(&input), "--families", "log", "--clamp", "-0.5,0.5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ResultTable::Weights(rows) = read_table(out.join("log_agent_weights.csv"), TableKind::Weights, Format::Csv).unwrap() else {
        unreachable!()
    };
    assert!(rows.iter().any(|r| r.w_s_raw.unwrap().abs() > 0.5));
    for r in rows {
        let raw = r.w_s_raw.unwrap();
        assert_eq!(r.w_s, raw.clamp(-0.5, 0.5));
    }
}

#[test]
fn exclusions_are_reported_and_removed() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let out = dir.path().join("out");
    let o = run(&["extract", "--input", s(&input), "--exclude", "2000-01..2000-12", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("excluded 12 records"));
    let m = read_table(out.join("log_agent_moments.csv"), TableKind::Moments, Format::Csv).unwrap();
    assert_eq!(m.len(), 348 - 23);
}

#[test]
fn split_rows_in_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("regime.csv");
    write_market_csv(&regime_market(&RegimeConfig::default()).unwrap(), &input).unwrap();
    let out = dir.path().join("out");
    let o = run(&["extract", "--input", s(&input), "--scheme", "expanding:120", "--split-at", "27", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ResultTable::Diagnostics(rows) = read_table(out.join("regime_diagnostics.csv"), TableKind::Diagnostics, Format::Csv).unwrap() else {
        unreachable!()
    };
    let names: Vec<&str> = rows.iter().map(|r| r.series.as_str()).collect();
    assert_eq!(
        names,
        ["ara_vs_wealth", "rra_vs_wealth", "rra_vs_wealth_below_split", "rra_vs_wealth_above_split"]
    );
    assert!(rows[2].corr.unwrap() >= 0.85);
    assert!(rows[1].corr.unwrap() < 0.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!("inputs = [{:?}]\nscheme = \"rolling:60\"\nout = {:?}\n", s(&input), s(&out)),
    )
    .unwrap();
    assert!(run(&["--config", s(&cfg), "extract"]).status.success());
    let m = read_table(out.join("log_agent_moments.csv"), TableKind::Moments, Format::Csv).unwrap();
    assert_eq!(m.len(), 301);
    assert!(run(&["--config", s(&cfg), "extract", "--scheme", "rolling:120"]).status.success());
    let m = read_table(out.join("log_agent_moments.csv"), TableKind::Moments, Format::Csv).unwrap();
    assert_eq!(m.len(), 241);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "windw = 3\n").unwrap();
    assert_one_line_error(&run(&["--config", s(&cfg), "extract"]), "config", 1);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_one_line_error(&run(&["extract", "--input", "/nonexistent/x.csv", "--out", s(&out)]), "io", 1);
    assert_one_line_error(&run(&["extract", "--out", s(&out)]), "config", 1);
    assert_one_line_error(&run(&["extract", "--bogus"]), "config", 1);

    let input = fixture(dir.path());
    assert_one_line_error(&run(&["extract", "--input", s(&input), "--tau", "1.5"]), "config", 1);
    assert_one_line_error(&run(&["extract", "--input", s(&input), "--scheme", "rolling:1"]), "config", 1);

    let no_cap = dir.path().join("no_cap.csv");
    fs::write(&no_cap, "date,return,rf_annual\n2000-01,0.01,0.02\n").unwrap();
    assert_one_line_error(&run(&["extract", "--input", s(&no_cap)]), "schema", 1);

    let bad_number = dir.path().join("bad.csv");
    fs::write(&bad_number, "date,return,market_cap,rf_annual\n2000-01,x,1,0.02\n").unwrap();
    let o = run(&["extract", "--input", s(&bad_number)]);
    assert_one_line_error(&o, "parse", 1);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let short = dir.path().join("short.csv");
    fs::write(&short, "date,return,market_cap,rf_annual\n2000-01,0.01,1,0.02\n2000-02,0.02,1,0.02\n").unwrap();
    assert_one_line_error(&run(&["extract", "--input", s(&short)]), "insufficient_data", 1);
}

#[test]
fn degenerate_moments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    let mut text = String::from("date,return,market_cap,rf_annual\n");
    for m in 1..=12 {
        text.push_str(&format!("2000-{m:02},0,10,0.02\n"));
    }
    fs::write(&flat, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["extract", "--input", s(&flat), "--scheme", "expanding:4", "--out", s(&out)]);
    assert_one_line_error(&o, "degenerate", 2);
}

#[test]
fn failed_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let good = fixture(dir.path());
    let short = dir.path().join("short.csv");
    fs::write(&short, "date,return,market_cap,rf_annual\n2000-01,0.01,1,0.02\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["extract", "--input", s(&good), "--input", s(&short), "--out", s(&out)]);
    assert!(!o.status.success());
    let leftovers = fs::read_dir(&out).map(|d| d.count()).unwrap_or(0);
    assert_eq!(leftovers, 0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        for cmd in ["extract", "portfolio"] {
            let o = run(&[cmd, "--input", s(&input), "--families", "quadratic:b=0.2,log,sqrt,exp", "--out", s(&out)]);
            assert!(o.status.success(), "{}", stderr(&o));
        }
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 5);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn validate_reports_each_suite() {
    let o = run(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 8);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
    assert!(run(&["validate", "--profile", "strict"]).status.success());
    assert_one_line_error(&run(&["validate", "--profile", "lax"]), "config", 1);
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("extract"));
}
