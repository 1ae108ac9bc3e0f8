//! Batch runs: JSON configuration in, CSV rows, a JSON summary and plot
//! columns out.
//!
//! Output is a pure function of the configuration. Rows are ordered by case
//! id, floats are written in shortest round-trip form and the summary holds no
//! timestamps, so identical configurations give byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calculus::{KernelSide, LfiBackend};
use crate::error::{Error, Result};
use crate::expr::CertGrid;
use crate::harness::{sweep, CaseRow, SkippedCase, SweepGrid, TheoremId};

pub const CSV_HEADER: &str =
    "case_id,theorem,alpha,s,q,a,b,fn_text,backend,lhs,mid,rhs,slack_left,slack_right,residual,pass,note";

fn default_theorems() -> Vec<TheoremId> {
    TheoremId::ALL.to_vec()
}

fn default_seed() -> u64 {
    CertGrid::default().seed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Slack below `-verify` (or residual above it) is a violation.
    pub verify: f64,
    /// Largest convexity defect a certificate tolerates.
    pub certify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            verify: 1e-9,
            certify: CertGrid::default().tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    #[serde(default)]
    pub q_grid: Vec<f64>,
    pub intervals: Vec<[f64; 2]>,
    pub functions: Vec<String>,
    #[serde(default = "default_theorems")]
    pub theorems: Vec<TheoremId>,
    #[serde(default)]
    pub backend: LfiBackend,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Output directory; the command line may override it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Seed for the random triples of the convexity certificates.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub inject_violation: bool,
    /// Average the integrals anchored at both interval ends.
    #[serde(default)]
    pub symmetrize_kernel: bool,
    /// Admit functions that take negative values.
    #[serde(default)]
    pub nonneg_waiver: bool,
}

impl RunConfig {
    /// Parse and validate; diagnostics name the offending line or field.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, empty) in [
            ("alpha_grid", self.alpha_grid.is_empty()),
            ("s_grid", self.s_grid.is_empty()),
            ("intervals", self.intervals.is_empty()),
            ("functions", self.functions.is_empty()),
            ("theorems", self.theorems.is_empty()),
        ] {
            if empty {
                return bad(format!("field `{name}` must not be empty"));
            }
        }
        if self
            .theorems
            .iter()
            .any(|t| matches!(t, TheoremId::Thm32 | TheoremId::Thm33))
            && self.q_grid.is_empty()
        {
            return bad("field `q_grid` must not be empty when thm32 or thm33 is selected".into());
        }
        if let Some(i) = self.alpha_grid.iter().position(|&a| !(a > 0.0 && a <= 1.0)) {
            return bad(format!("alpha_grid[{i}] = {} is outside (0, 1]", self.alpha_grid[i]));
        }
        if let Some(i) = self.s_grid.iter().position(|&s| !(s > 0.0 && s <= 1.0)) {
            return bad(format!("s_grid[{i}] = {} is outside (0, 1]", self.s_grid[i]));
        }
        if let Some(i) = self.q_grid.iter().position(|&q| !(q >= 1.0 && q.is_finite())) {
            return bad(format!("q_grid[{i}] = {} is below 1", self.q_grid[i]));
        }
        if let Some(i) = self
            .intervals
            .iter()
            .position(|&[a, b]| !(a >= 0.0 && b > a && b.is_finite()))
        {
            let [a, b] = self.intervals[i];
            return bad(format!("intervals[{i}] = [{a}, {b}] does not satisfy 0 <= a < b"));
        }
        if !(self.tolerances.verify > 0.0 && self.tolerances.certify > 0.0) {
            return bad("tolerances must be positive".into());
        }
        self.backend.validate()
    }

    pub fn to_grid(&self) -> SweepGrid {
        let mut backend = self.backend.clone();
        if self.symmetrize_kernel {
            backend.kernel = KernelSide::Symmetric;
        }
        SweepGrid {
            theorems: self.theorems.clone(),
            alphas: self.alpha_grid.clone(),
            s_values: self.s_grid.clone(),
            q_values: self.q_grid.clone(),
            intervals: self.intervals.iter().map(|&[a, b]| (a, b)).collect(),
            functions: self.functions.clone(),
            backend,
            tol: self.tolerances.verify,
            cert: CertGrid {
                seed: self.seed,
                tol: self.tolerances.certify,
                require_nonneg: !self.nonneg_waiver,
                ..CertGrid::default()
            },
            waive_certification: false,
            inject_violation: self.inject_violation,
        }
    }
}

/// One CSV line. Absent values are written as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case_id: String,
    pub theorem: TheoremId,
    pub alpha: f64,
    pub s: f64,
    pub q: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub fn_text: String,
    pub backend: String,
    pub lhs: Option<f64>,
    pub mid: Option<f64>,
    pub rhs: Option<f64>,
    pub slack_left: Option<f64>,
    pub slack_right: Option<f64>,
    pub residual: Option<f64>,
    pub pass: bool,
    pub note: String,
}

impl ReportRow {
    /// Smallest slack or minus the residual; `None` for error rows.
    pub fn margin(&self) -> Option<f64> {
        if let Some(r) = self.residual {
            return Some(-r);
        }
        [self.slack_left, self.slack_right]
            .into_iter()
            .flatten()
            .reduce(f64::min)
    }
}

impl From<&CaseRow> for ReportRow {
    fn from(c: &CaseRow) -> Self {
        let mut row = ReportRow {
            case_id: c.case_id.clone(),
            theorem: c.theorem,
            alpha: c.alpha,
            s: c.s,
            q: c.q,
            a: c.a,
            b: c.b,
            fn_text: c.fn_text.clone(),
            backend: c.backend.clone(),
            lhs: None,
            mid: None,
            rhs: None,
            slack_left: None,
            slack_right: None,
            residual: None,
            pass: false,
            note: String::new(),
        };
        match &c.result {
            Ok(r) => {
                row.lhs = Some(r.lhs);
                row.mid = r.mid;
                row.rhs = Some(r.rhs);
                row.slack_left = r.slack_left;
                row.slack_right = r.slack_right;
                row.residual = r.residual;
                row.pass = r.pass;
                row.note = r.notes.join("; ");
            }
            Err(e) => row.note = format!("error: {e}"),
        }
        row
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER.split(','))
        .and_then(|_| rows.iter().try_for_each(|r| out.serialize(r)))
        .and_then(|_| out.flush().map_err(csv::Error::from))
        .map_err(|e| Error::Io(e.to_string()))
}

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<Vec<ReportRow>, _>>()
        .map_err(|e| Error::Io(e.to_string()))
}

pub fn emit_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    write_csv(rows, fs::File::create(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremSummary {
    pub cases: usize,
    pub passed: usize,
    pub violations: usize,
    pub errors: usize,
    pub skipped: usize,
    pub min_slack: Option<f64>,
    pub worst_case: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedEntry {
    pub case_id: String,
    pub theorem: TheoremId,
    pub alpha: f64,
    pub s: f64,
    pub q: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub fn_text: String,
    pub reason: String,
}

impl From<&SkippedCase> for SkippedEntry {
    fn from(c: &SkippedCase) -> Self {
        SkippedEntry {
            case_id: c.case_id.clone(),
            theorem: c.theorem,
            alpha: c.alpha,
            s: c.s,
            q: c.q,
            a: c.a,
            b: c.b,
            fn_text: c.fn_text.clone(),
            reason: c.reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub cases: usize,
    pub passed: usize,
    /// Rows with `pass = false`, errors included.
    pub violations: usize,
    pub errors: usize,
    pub worst_case: Option<String>,
    pub per_theorem: BTreeMap<TheoremId, TheoremSummary>,
    pub skipped: Vec<SkippedEntry>,
    pub config: RunConfig,
}

fn worst<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> Option<(&'a ReportRow, f64)> {
    rows.filter_map(|r| Some((r, r.margin()?)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

impl Summary {
    pub fn new(rows: &[ReportRow], skipped: &[SkippedCase], config: &RunConfig) -> Self {
        let mut per_theorem = BTreeMap::new();
        for &t in &config.theorems {
            let of = || rows.iter().filter(move |r| r.theorem == t);
            let w = worst(of());
            per_theorem.insert(
                t,
                TheoremSummary {
                    cases: of().count(),
                    passed: of().filter(|r| r.pass).count(),
                    violations: of().filter(|r| !r.pass).count(),
                    errors: of().filter(|r| r.lhs.is_none()).count(),
                    skipped: skipped.iter().filter(|c| c.theorem == t).count(),
                    min_slack: w.map(|w| w.1),
                    worst_case: w.map(|w| w.0.case_id.clone()),
                },
            );
        }
        Summary {
            tool: "fhh",
            version: env!("CARGO_PKG_VERSION"),
            cases: rows.len(),
            passed: rows.iter().filter(|r| r.pass).count(),
            violations: rows.iter().filter(|r| !r.pass).count(),
            errors: rows.iter().filter(|r| r.lhs.is_none()).count(),
            worst_case: worst(rows.iter()).map(|w| w.0.case_id.clone()),
            per_theorem,
            skipped: skipped.iter().map(SkippedEntry::from).collect(),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

pub fn emit_json_summary(summary: &Summary, path: &Path) -> Result<()> {
    Ok(fs::write(path, summary.to_json()?)?)
}

/// `alpha s slack` columns for one theorem, one row per evaluated case.
pub fn plot_columns(rows: &[ReportRow], theorem: TheoremId) -> String {
    let mut out = String::from("# alpha s slack\n");
    for r in rows.iter().filter(|r| r.theorem == theorem) {
        if let Some(m) = r.margin() {
            out.push_str(&format!("{} {} {}\n", r.alpha, r.s, m));
        }
    }
    out
}

/// Write `plot_<theorem>.dat` into `dir` for every theorem present in `rows`.
pub fn emit_plot_columns(rows: &[ReportRow], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut theorems: Vec<TheoremId> = rows.iter().map(|r| r.theorem).collect();
    theorems.sort();
    theorems.dedup();
    theorems
        .into_iter()
        .map(|t| {
            let path = dir.join(format!("plot_{t}.dat"));
            fs::write(&path, plot_columns(rows, t))?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

impl Evaluation {
    /// 0 when every row passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.violations == 0 {
            0
        } else {
            2
        }
    }
}

/// Run the sweep of a configuration without touching the file system.
pub fn evaluate(config: &RunConfig) -> Result<Evaluation> {
    config.validate()?;
    let out = sweep(&config.to_grid())?;
    let rows: Vec<ReportRow> = out.rows.iter().map(ReportRow::from).collect();
    let summary = Summary::new(&rows, &out.skipped, config);
    Ok(Evaluation { rows, summary })
}

/// Evaluate and write `report.csv`, `summary.json` and `plot_*.dat` into
/// `out_dir` (or the configured output directory).
pub fn run_config(config: &RunConfig, out_dir: Option<&Path>) -> Result<Evaluation> {
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .ok_or_else(|| Error::Config("no output directory: set `output` or pass one explicitly".into()))?;
    let eval = evaluate(config)?;
    fs::create_dir_all(&dir)?;
    emit_csv(&eval.rows, &dir.join("report.csv"))?;
    emit_json_summary(&eval.summary, &dir.join("summary.json"))?;
    emit_plot_columns(&eval.rows, &dir)?;
    Ok(eval)
}

pub fn run(config_path: &Path, out_dir: Option<&Path>) -> Result<Evaluation> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    run_config(&RunConfig::from_json(&text)?, out_dir)
}

/// Process exit status: 0 all pass, 2 violations, 1 configuration or runtime
/// error.
pub fn exit_code(result: &Result<Evaluation>) -> i32 {
    result.as_ref().map_or(1, Evaluation::exit_code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::classify;

    const MINIMAL: &str = r#"{
        "alpha_grid": [1.0],
        "s_grid": [1.0],
        "intervals": [[0, 1]],
        "functions": ["x^2"],
        "theorems": ["thm31"]
    }"#;

    fn csv_bytes(rows: &[ReportRow]) -> Vec<u8> {
        let mut v = Vec::new();
        write_csv(rows, &mut v).unwrap();
        v
    }

    #[test]
    fn minimal_config_gives_one_passing_row() {
        let e = evaluate(&RunConfig::from_json(MINIMAL).unwrap()).unwrap();
        assert_eq!(e.rows.len(), 1);
        assert!(e.rows[0].pass);
        assert_eq!(e.exit_code(), 0);
    }

    #[test]
    fn injected_violation_exits_with_two() {
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.inject_violation = true;
        c.functions = vec!["x".into()];
        assert_eq!(evaluate(&c).unwrap().exit_code(), 2);
    }

    #[test]
    fn missing_field_is_diagnosed() {
        let text = MINIMAL.replace(r#""functions": ["x^2"],"#, "");
        let e = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(e.contains("functions") && e.contains("line"), "{e}");
        let e = RunConfig::from_json(&MINIMAL.replace("s_grid", "sgrid"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("sgrid"), "{e}");
        let e = RunConfig::from_json(&MINIMAL.replace("[0, 1]", "[1, 0]"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("intervals[0]"), "{e}");
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(String::from_utf8(csv_bytes(&[])).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.theorems = TheoremId::ALL.to_vec();
        c.q_grid = vec![1.0, 2.0];
        c.alpha_grid = vec![0.5, 1.0];
        c.functions = vec![
            "x^2".into(),
            "1 + x^(a)".into(),
            "x^(s*a)".into(),
            "abs(x - 0.5)".into(),
        ];
        let e = evaluate(&c).unwrap();
        let back = read_csv(csv_bytes(&e.rows).as_slice()).unwrap();
        assert_eq!(back.len(), e.rows.len());
        for (x, y) in e.rows.iter().zip(&back) {
            assert_eq!(x.case_id, y.case_id);
            assert_eq!(x.slack_left.map(f64::to_bits), y.slack_left.map(f64::to_bits));
            assert_eq!(x.slack_right.map(f64::to_bits), y.slack_right.map(f64::to_bits));
            assert_eq!(x.residual.map(f64::to_bits), y.residual.map(f64::to_bits));
            assert_eq!(x.pass, y.pass);
            if y.lhs.is_some() {
                assert_eq!(
                    classify(y.slack_left, y.slack_right, y.residual, c.tolerances.verify),
                    y.pass
                );
            }
        }
    }

    #[test]
    fn output_is_deterministic() {
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.alpha_grid = vec![0.3, 0.7, 1.0];
        c.s_grid = vec![0.5, 1.0];
        c.theorems = TheoremId::ALL.to_vec();
        c.q_grid = vec![1.0, 3.0];
        c.functions = crate::harness::default_families();
        let (x, y) = (evaluate(&c).unwrap(), evaluate(&c).unwrap());
        assert_eq!(csv_bytes(&x.rows), csv_bytes(&y.rows));
        assert_eq!(x.summary.to_json().unwrap(), y.summary.to_json().unwrap());
        assert_eq!(x.summary.violations, x.rows.iter().filter(|r| !r.pass).count());
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig::from_json(MINIMAL).unwrap();
        let e = run_config(&c, Some(dir.path())).unwrap();
        assert_eq!(e.exit_code(), 0);
        let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 2);
        assert!(dir.path().join("summary.json").exists());
        assert!(dir.path().join("plot_thm31.dat").exists());
        assert!(run_config(&c, None).is_err());
    }
}
