//! The acceptance suite: ten checks with fixed tolerances and time budgets,
//! runnable from the library, the command line and the test suite.
//!
//! A criterion listed in [`KNOWN_FAILURES`] is one the realized integral
//! cannot meet; it is still evaluated and reported as failing.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{abs_moment, check_hoelder, lfi, moment, LfiBackend, MomentKey};
use crate::error::Result;
use crate::expr::{certify_gks1, certify_gks2, CertGrid, FunctionHandle};
use crate::fractal::FractalNumber;
use crate::harness::{
    default_families, k_constant, sweep, verify_lemma31, verify_thm31, verify_thm32, verify_thm33, SweepGrid,
    TheoremCase, TheoremId,
};
use crate::report::{evaluate, write_csv, RunConfig};
use crate::special::{gamma, parse_reference_table};

const GAMMA_TABLE: &str = include_str!("../data/gamma_reference.txt");

/// Criteria expected to fail, with the reason.
pub const KNOWN_FAILURES: [(&str, &str); 1] = [(
    "5b",
    "the trapezoid identity does not hold for alpha < 1 under the realized integral (both backends agree)",
)];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn known_failure(&self) -> Option<&'static str> {
        KNOWN_FAILURES.iter().find(|k| k.0 == self.id).map(|k| k.1)
    }

    pub fn line(&self) -> String {
        let verdict = match (self.pass, self.known_failure()) {
            (true, _) => "PASS".to_string(),
            (false, None) => "FAIL".to_string(),
            (false, Some(why)) => format!("FAIL (known: {why})"),
        };
        format!(
            "criterion {:<3} {:<34} {verdict}  [{:.2}s] {}",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(&str, &str, Check); 11] = [
    ("1", "gamma core", gamma_core),
    ("2", "fractal algebra", fractal_algebra),
    ("3", "moment law", moment_law),
    ("4", "classical chain", classical_chain),
    ("5a", "trapezoid identity, alpha = 1", identity_classical),
    ("5b", "trapezoid identity, alpha = 0.5", identity_fractional),
    ("6", "q >= 1 bound constant", bound_constant),
    ("7", "q > 1 bound", midpoint_bound),
    ("8", "Hölder inequality", hoelder),
    ("9", "fractional sweep", fractional_sweep),
    ("10", "certifiers", certifiers),
];

pub fn run_criterion(index: usize) -> CriterionResult {
    let (id, title, check) = CRITERIA[index];
    let start = Instant::now();
    let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        title,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (0..CRITERIA.len()).map(run_criterion).collect()
}

fn within(budget: f64, start: Instant) -> (bool, f64) {
    let t = start.elapsed().as_secs_f64();
    (t < budget, t)
}

fn gamma_core() -> Result<(bool, String)> {
    let start = Instant::now();
    let table = parse_reference_table(GAMMA_TABLE)?;
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 1.5, 2.0, 5.0, 6.0, 10.3] {
        let want = table
            .iter()
            .find(|r| r.0 == x)
            .map(|r| r.1)
            .expect("fixture covers the point");
        worst = worst.max(((gamma(x)? - want) / want).abs());
    }
    let mut recur: f64 = 0.0;
    for i in 1..=490 {
        let x = i as f64 / 10.0;
        recur = recur.max(((gamma(x + 1.0)? - x * gamma(x)?) / gamma(x + 1.0)?).abs());
    }
    let (fast, t) = within(1.0, start);
    Ok((
        worst <= 1e-12 && recur <= 1e-12 && fast,
        format!("max rel err {worst:.1e}, recurrence {recur:.1e}, {t:.3}s"),
    ))
}

fn fractal_algebra() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for n in 0..10_000 {
        let alpha = [0.3, 0.5, 0.7, 1.0][n % 4];
        // dyadic bases keep sums and products exact
        let mut draw = || FractalNumber::new(rng.gen_range(-8000..=8000) as f64 / 8.0, alpha);
        let (x, y, z) = (draw()?, draw()?, draw()?);
        let zero = FractalNumber::zero(alpha)?;
        let one = FractalNumber::one(alpha)?;
        let ok = x.f_add(&y)? == y.f_add(&x)?
            && x.f_mul(&y)? == y.f_mul(&x)?
            && x.f_add(&y)?.f_add(&z)? == x.f_add(&y.f_add(&z)?)?
            && x.f_mul(&y)?.f_mul(&z)? == x.f_mul(&y.f_mul(&z)?)?
            && x.f_add(&zero)? == x
            && x.f_mul(&one)? == x
            && x.f_add(&x.f_neg())?.base() == 0.0
            && x.f_mul(&y.f_add(&z)?)? == x.f_mul(&y)?.f_add(&x.f_mul(&z)?)?;
        failures += usize::from(!ok);
    }
    Ok((failures == 0, format!("{failures} of 10000 triples fail")))
}

fn moment_law() -> Result<(bool, String)> {
    let start = Instant::now();
    let q = LfiBackend::quadrature();
    let mut worst: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.7, 0.9, 1.0] {
        for kappa in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
            let f = FunctionHandle::parse(&format!("x^({kappa})"), alpha, 1.0)?;
            let want = moment(MomentKey::new(kappa, alpha)?);
            worst = worst.max(((lfi(&f, 0.0, 1.0, alpha, &q)? - want) / want).abs());
        }
    }
    let (fast, t) = within(5.0, start);
    Ok((worst <= 1e-8 && fast, format!("max rel err {worst:.1e}, {t:.2}s")))
}

fn classical_chain() -> Result<(bool, String)> {
    let mut min_slack = f64::INFINITY;
    let mut equality_gap: f64 = 0.0;
    let mut cases = 0;
    for s in [0.25, 0.5, 0.75, 1.0] {
        let mut fs = vec!["x^s", "2", "2 + x^s"];
        if s == 1.0 {
            fs.push("x^2");
        }
        for (a, b) in [(0.0, 1.0), (1.0, 3.0)] {
            for f in &fs {
                let r = verify_thm31(&TheoremCase::new(TheoremId::Thm31, f, 1.0, s, None, a, b)?)?;
                min_slack = min_slack.min(r.margin());
                cases += 1;
                if *f == "x^s" && a == 0.0 {
                    equality_gap = equality_gap.max(r.slack_right.unwrap_or(f64::NAN).abs());
                }
            }
        }
    }
    Ok((
        min_slack >= -1e-9 && equality_gap <= 1e-9,
        format!("{cases} cases, min slack {min_slack:.2e}, equality-case right slack {equality_gap:.1e}"),
    ))
}

fn max_residual(fs: &[&str], alpha: f64, intervals: &[(f64, f64)], backends: &[LfiBackend]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in fs {
        for &(a, b) in intervals {
            for be in backends {
                let case = TheoremCase::new(TheoremId::Lemma31, f, alpha, 1.0, None, a, b)?.with_backend(be.clone());
                worst = worst.max(verify_lemma31(&case)?.residual.unwrap_or(f64::NAN));
            }
        }
    }
    Ok(worst)
}

fn identity_classical() -> Result<(bool, String)> {
    let r = max_residual(
        &["x^2", "x^3", "2*x^2 - x"],
        1.0,
        &[(0.0, 1.0), (1.0, 2.0)],
        &[LfiBackend::operational(), LfiBackend::quadrature()],
    )?;
    Ok((r <= 1e-9, format!("max residual {r:.1e}")))
}

fn identity_fractional() -> Result<(bool, String)> {
    let r = max_residual(
        &["x^(a)", "x^(3*a) + x^(a)", "(x - 0.5)^(2*a)", "x^(2*a)"],
        0.5,
        &[(0.0, 1.0), (1.0, 2.0)],
        &[LfiBackend::operational()],
    )?;
    Ok((r <= 1e-10, format!("max residual {r:.3e}")))
}

fn bound_constant() -> Result<(bool, String)> {
    let k11 = k_constant(1.0, 1.0);
    // ∫ t^(1/2) |1 - 2t| dt from the piecewise antiderivative
    let anti = |t: f64| 2.0 / 3.0 * t.powf(1.5) - 0.8 * t.powf(2.5);
    let exact = 2.0 * anti(0.5) - anti(0.0) - anti(1.0);
    let k = k_constant(1.0, 0.5);
    let weighted = abs_moment(0.5, 1.0, &LfiBackend::operational())?;
    let r = verify_thm32(&TheoremCase::new(
        TheoremId::Thm32,
        "x^2",
        1.0,
        1.0,
        Some(1.0),
        0.0,
        1.0,
    )?)?;
    let ok = (k11 - 0.25).abs() <= 1e-12
        && (k - exact).abs() <= 1e-10
        && (weighted - exact).abs() <= 1e-10
        && (r.lhs - 1.0 / 6.0).abs() <= 1e-12
        && (r.rhs - 0.25).abs() <= 1e-12
        && r.pass;
    Ok((
        ok,
        format!(
            "K(1,1) = {k11}, K(1,0.5) = {k:.12} vs {exact:.12}, defect {:.6} <= bound {:.6}",
            r.lhs, r.rhs
        ),
    ))
}

fn midpoint_bound() -> Result<(bool, String)> {
    let mut grid = SweepGrid::new(
        vec![1.0],
        vec![0.5, 1.0],
        vec![1.5, 2.0, 4.0],
        vec![(0.0, 1.0), (1.0, 3.0)],
    );
    grid.theorems = vec![TheoremId::Thm33];
    grid.functions = default_families();
    grid.functions.extend(["x^2", "x^3"].map(String::from));
    let out = sweep(&grid)?;
    let min_slack = out
        .rows
        .iter()
        .map(|r| r.result.as_ref().map_or(f64::NEG_INFINITY, |v| v.margin()))
        .fold(f64::INFINITY, f64::min);
    let worked = verify_thm33(&TheoremCase::new(
        TheoremId::Thm33,
        "x^2",
        1.0,
        1.0,
        Some(2.0),
        0.0,
        1.0,
    )?)?;
    Ok((
        min_slack >= -1e-9 && (worked.rhs - 0.33034).abs() <= 1e-4,
        format!(
            "{} cases ({} skipped), min slack {min_slack:.2e}, worked bound {:.6}",
            out.rows.len(),
            out.skipped.len(),
            worked.rhs
        ),
    ))
}

/// A random non-negative combination of shifted powers.
fn random_poly(rng: &mut ChaCha8Rng) -> String {
    let atoms = [
        "x^(a)",
        "x^(2*a)",
        "x^(3*a)",
        "(x - {c})^(a)",
        "({c} - x)^(2*a)",
        "x",
        "1",
    ];
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| {
            let atom =
                atoms[rng.gen_range(0..atoms.len())].replace("{c}", &format!("{}", rng.gen_range(1..8) as f64 / 4.0));
            format!("{} * {atom}", rng.gen_range(1..=12) as f64 / 4.0)
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn hoelder() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pairs: Vec<(String, String)> = (0..100)
        .map(|_| (random_poly(&mut rng), random_poly(&mut rng)))
        .collect();
    let mut min_slack = f64::INFINITY;
    let mut count = 0;
    for alpha in [0.5, 1.0] {
        for p in [1.5, 2.0, 3.0] {
            let q = p / (p - 1.0);
            for (f, g) in &pairs {
                let fh = FunctionHandle::parse(f, alpha, 1.0)?;
                let gh = FunctionHandle::parse(g, alpha, 1.0)?;
                let c = check_hoelder(&fh, &gh, 0.0, 2.0, alpha, p, q, &LfiBackend::operational())?;
                min_slack = min_slack.min(c.value);
                count += 1;
            }
        }
    }
    Ok((
        min_slack >= -1e-10,
        format!("{count} checks, min slack {min_slack:.2e}"),
    ))
}

fn fractional_config(inject: bool) -> RunConfig {
    RunConfig {
        alpha_grid: vec![0.3, 0.5, 0.7, 0.9],
        s_grid: vec![0.25, 0.5, 0.75],
        q_grid: vec![1.0, 2.0],
        intervals: vec![[0.0, 1.0], [1.0, 3.0]],
        functions: default_families(),
        theorems: TheoremId::ALL.to_vec(),
        backend: LfiBackend::operational(),
        tolerances: Default::default(),
        output: None,
        seed: CertGrid::default().seed,
        inject_violation: inject,
        symmetrize_kernel: false,
        nonneg_waiver: false,
    }
}

fn fractional_sweep() -> Result<(bool, String)> {
    let start = Instant::now();
    let first = evaluate(&fractional_config(false))?;
    let (fast, t) = within(30.0, start);
    let second = evaluate(&fractional_config(false))?;
    let bytes = |rows: &[crate::report::ReportRow]| -> Result<Vec<u8>> {
        let mut v = Vec::new();
        write_csv(rows, &mut v)?;
        Ok(v)
    };
    let same = bytes(&first.rows)? == bytes(&second.rows)? && first.summary.to_json()? == second.summary.to_json()?;
    let injected = evaluate(&fractional_config(true))?;
    let ok = fast && same && injected.exit_code() == 2;
    Ok((
        ok,
        format!(
            "{} rows in {t:.1}s, {} findings, {} skipped, deterministic {same}, injected exit {}",
            first.rows.len(),
            first.summary.violations,
            first.summary.skipped.len(),
            injected.exit_code()
        ),
    ))
}

fn certifiers() -> Result<(bool, String)> {
    let grid = CertGrid::default();
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for (alpha, s) in [(0.5, 0.5), (1.0, 1.0), (0.7, 0.4), (0.3, 0.9)] {
        let p = alpha * s;
        let f = move |x: f64| x.powf(p);
        for r in [
            certify_gks2(f, alpha, s, (0.0, 2.0), &grid)?,
            certify_gks1(f, alpha, s, (0.0, 2.0), &grid)?,
        ] {
            ok &= r.certified && r.max_violation <= 1e-10;
            worst = worst.max(r.max_violation);
        }
    }
    // at alpha = 1 the first-sense weights make a constant an equality case,
    // so the refutation is shown where the violation is strictly positive
    let neg2 = certify_gks2(|_| -1.0, 0.5, 0.5, (0.0, 2.0), &grid)?;
    let neg1 = certify_gks1(|_| -1.0, 0.5, 0.5, (0.0, 2.0), &grid)?;
    ok &= !neg2.certified && !neg1.certified && neg2.max_violation > 0.0 && neg1.max_violation > 0.0;
    Ok((
        ok,
        format!(
            "power max violation {worst:.1e}; f = -1 violations {:.3} (second sense), {:.3} (first sense)",
            neg2.max_violation, neg1.max_violation
        ),
    ))
}
