use rayon::prelude::*;

use super::{verify, TheoremCase, TheoremId, VerificationResult};
use crate::calculus::LfiBackend;
use crate::error::{Error, Result};
use crate::expr::{CertGrid, FunctionHandle};

/// Test functions that are generalized s-convex in the second sense on any
/// `[a, b] ⊂ [0, ∞)` for every `alpha` and `s`.
pub fn default_families() -> Vec<String> {
    [
        "x^(s*a)",
        "1",
        "1 + x^(s*a)",
        "x^(a)",
        "(x - 0.5)^(s*a)",
        "2*x^(a) + 0.5*(x - 1)^(s*a)",
    ]
    .map(String::from)
    .to_vec()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub theorems: Vec<TheoremId>,
    pub alphas: Vec<f64>,
    pub s_values: Vec<f64>,
    /// Used by thm32 (values >= 1) and thm33 (values > 1).
    pub q_values: Vec<f64>,
    pub intervals: Vec<(f64, f64)>,
    pub functions: Vec<String>,
    pub backend: LfiBackend,
    pub tol: f64,
    pub cert: CertGrid,
    pub waive_certification: bool,
    pub inject_violation: bool,
}

impl SweepGrid {
    /// All four theorems over the default families with the operational
    /// backend.
    pub fn new(alphas: Vec<f64>, s_values: Vec<f64>, q_values: Vec<f64>, intervals: Vec<(f64, f64)>) -> Self {
        SweepGrid {
            theorems: TheoremId::ALL.to_vec(),
            alphas,
            s_values,
            q_values,
            intervals,
            functions: default_families(),
            backend: LfiBackend::operational(),
            tol: 1e-9,
            cert: CertGrid::default(),
            waive_certification: false,
            inject_violation: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let empty = [
            ("theorems", self.theorems.is_empty()),
            ("alpha grid", self.alphas.is_empty()),
            ("s grid", self.s_values.is_empty()),
            ("intervals", self.intervals.is_empty()),
            ("functions", self.functions.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|e| e.1) {
            return Err(Error::Config(format!("{name} must not be empty")));
        }
        if self.theorems.iter().any(|t| t.uses_q()) && self.q_values.is_empty() {
            return Err(Error::Config("q grid must not be empty for thm32/thm33".into()));
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::Config(format!("alpha {a} outside (0, 1]")));
        }
        if let Some(s) = self.s_values.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::Config(format!("s {s} outside (0, 1]")));
        }
        if let Some(q) = self.q_values.iter().find(|&&q| !(q >= 1.0 && q.is_finite())) {
            return Err(Error::Config(format!("q {q} is below 1")));
        }
        if let Some(i) = self
            .intervals
            .iter()
            .find(|i| !(i.0 >= 0.0 && i.1 > i.0 && i.1.is_finite()))
        {
            return Err(Error::Config(format!(
                "interval [{}, {}] does not satisfy 0 <= a < b",
                i.0, i.1
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        self.backend.validate()
    }

    fn q_for(&self, t: TheoremId) -> Vec<Option<f64>> {
        match t {
            TheoremId::Thm32 => self.q_values.iter().map(|&q| Some(q)).collect(),
            TheoremId::Thm33 => self.q_values.iter().filter(|&&q| q > 1.0).map(|&q| Some(q)).collect(),
            _ => vec![None],
        }
    }
}

/// Parameters of one sweep case, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
struct Planned {
    case_id: String,
    theorem: TheoremId,
    alpha: f64,
    s: f64,
    q: Option<f64>,
    a: f64,
    b: f64,
    fn_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow {
    pub case_id: String,
    pub theorem: TheoremId,
    pub alpha: f64,
    pub s: f64,
    pub q: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub fn_text: String,
    pub backend: String,
    /// Evaluation errors are kept per row and never abort the sweep.
    pub result: std::result::Result<VerificationResult, String>,
}

impl CaseRow {
    pub fn pass(&self) -> bool {
        self.result.as_ref().is_ok_and(|r| r.pass)
    }
}

/// A case left out because a hypothesis failed certification.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCase {
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

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Ordered by case id.
    pub rows: Vec<CaseRow>,
    pub skipped: Vec<SkippedCase>,
}

impl SweepOutcome {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass()).count()
    }
}

fn enumerate(grid: &SweepGrid) -> Vec<Planned> {
    let mut out = Vec::new();
    for &theorem in &grid.theorems {
        for &alpha in &grid.alphas {
            for &s in &grid.s_values {
                for q in grid.q_for(theorem) {
                    for &(a, b) in &grid.intervals {
                        for f in &grid.functions {
                            out.push(Planned {
                                case_id: String::new(),
                                theorem,
                                alpha,
                                s,
                                q,
                                a,
                                b,
                                fn_text: f.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    let width = out.len().to_string().len().max(4);
    for (i, c) in out.iter_mut().enumerate() {
        c.case_id = format!("c{:0width$}", i + 1);
    }
    out
}

enum Evaluated {
    Row(std::result::Result<VerificationResult, String>),
    Skipped(String),
}

fn evaluate(grid: &SweepGrid, plan: &Planned) -> Evaluated {
    let case = FunctionHandle::parse(&plan.fn_text, plan.alpha, plan.s).map(|f| TheoremCase {
        theorem: plan.theorem,
        alpha: plan.alpha,
        s: plan.s,
        q: plan.q,
        a: plan.a,
        b: plan.b,
        f,
        backend: grid.backend.clone(),
        tol: grid.tol,
        cert: grid.cert.clone(),
        waive_certification: grid.waive_certification,
        inject_violation: grid.inject_violation,
    });
    match case.and_then(|c| verify(&c)) {
        Ok(r) => Evaluated::Row(Ok(r)),
        Err(Error::Rejected(reason)) => Evaluated::Skipped(reason),
        Err(e) => Evaluated::Row(Err(e.to_string())),
    }
}

/// Evaluate every case of the grid in parallel. The result does not depend on
/// scheduling: rows and skipped cases come back in case-id order.
pub fn sweep(grid: &SweepGrid) -> Result<SweepOutcome> {
    grid.validate()?;
    let planned = enumerate(grid);
    let evaluated: Vec<Evaluated> = planned.par_iter().map(|s| evaluate(grid, s)).collect();
    let mut out = SweepOutcome {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for (plan, e) in planned.into_iter().zip(evaluated) {
        match e {
            Evaluated::Row(result) => out.rows.push(CaseRow {
                case_id: plan.case_id,
                theorem: plan.theorem,
                alpha: plan.alpha,
                s: plan.s,
                q: plan.q,
                a: plan.a,
                b: plan.b,
                fn_text: plan.fn_text,
                backend: grid.backend.label().to_string(),
                result,
            }),
            Evaluated::Skipped(reason) => out.skipped.push(SkippedCase {
                case_id: plan.case_id,
                theorem: plan.theorem,
                alpha: plan.alpha,
                s: plan.s,
                q: plan.q,
                a: plan.a,
                b: plan.b,
                fn_text: plan.fn_text,
                reason,
            }),
        }
    }
    Ok(out)
}

/// The case closest to violating one slack column.
#[derive(Debug, Clone, PartialEq)]
pub struct Sharpness {
    pub column: &'static str,
    pub case_id: String,
    pub slack: f64,
}

/// Minimum of each slack column (`slack_left`, `slack_right`, `-residual`)
/// over the grid restricted to one theorem.
pub fn sharpness_probe(theorem: TheoremId, grid: &SweepGrid) -> Result<Vec<Sharpness>> {
    let grid = SweepGrid {
        theorems: vec![theorem],
        ..grid.clone()
    };
    let out = sweep(&grid)?;
    type Column = (&'static str, fn(&VerificationResult) -> Option<f64>);
    let columns: [Column; 3] = [
        ("slack_left", |r| r.slack_left),
        ("slack_right", |r| r.slack_right),
        ("residual", |r| r.residual.map(|v| -v)),
    ];
    let mut found = Vec::new();
    for (column, get) in columns {
        let best = out
            .rows
            .iter()
            .filter_map(|row| Some((row, get(row.result.as_ref().ok()?)?)))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((row, slack)) = best {
            found.push(Sharpness {
                column,
                case_id: row.case_id.clone(),
                slack,
            });
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical() -> SweepGrid {
        SweepGrid::new(vec![1.0], vec![0.5, 1.0], vec![1.0, 2.0], vec![(0.0, 1.0), (1.0, 3.0)])
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let mut g = classical();
        g.functions.clear();
        assert!(matches!(sweep(&g), Err(Error::Config(_))));
    }

    #[test]
    fn classical_family_has_no_violations() {
        let out = sweep(&classical()).unwrap();
        assert!(!out.rows.is_empty());
        let bad: Vec<_> = out.rows.iter().filter(|r| !r.pass()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn injected_violations_are_reported() {
        let g = SweepGrid {
            inject_violation: true,
            ..classical()
        };
        assert!(sweep(&g).unwrap().violations() >= 1);
    }

    #[test]
    fn case_ids_are_ordered_and_stable() {
        let a = sweep(&classical()).unwrap();
        let b = sweep(&classical()).unwrap();
        assert_eq!(a, b);
        let ids: Vec<_> = a.rows.iter().map(|r| r.case_id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn right_side_of_the_chain_is_sharp_for_the_power() {
        let mut g = classical();
        g.s_values = vec![0.25, 0.5, 0.75, 1.0];
        g.functions = vec!["x^s".into()];
        g.intervals = vec![(0.0, 1.0)];
        let p = sharpness_probe(TheoremId::Thm31, &g).unwrap();
        let right = p.iter().find(|s| s.column == "slack_right").unwrap();
        assert!(right.slack.abs() <= 1e-9, "{p:?}");
    }

    #[test]
    fn left_side_is_sharp_for_constants() {
        let mut g = classical();
        g.s_values = vec![1.0];
        g.functions = vec!["2".into()];
        let p = sharpness_probe(TheoremId::Thm31, &g).unwrap();
        let left = p.iter().find(|s| s.column == "slack_left").unwrap();
        assert!(left.slack.abs() <= 1e-15, "{p:?}");
    }

    #[test]
    fn linear_function_has_zero_defect() {
        let mut g = classical();
        g.s_values = vec![1.0];
        g.q_values = vec![1.0];
        g.functions = vec!["x".into()];
        let out = sweep(&SweepGrid {
            theorems: vec![TheoremId::Thm32],
            ..g
        })
        .unwrap();
        for r in &out.rows {
            let v = r.result.as_ref().unwrap();
            assert!(v.lhs.abs() < 1e-15 && v.slack_right.unwrap() >= 0.0);
        }
    }
}
