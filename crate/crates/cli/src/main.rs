use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fractal_hh::calculus::{abs_moment, moment, KernelSide, LfiBackend, MomentKey};
use fractal_hh::expr::{certify_gks1, certify_gks2, CertGrid, FunctionHandle};
use fractal_hh::harness::{k_constant, verify, CaseRow, TheoremCase, TheoremId};
use fractal_hh::report::{self, ReportRow};
use fractal_hh::{selftest, Result};

#[derive(Parser)]
#[command(
    name = "fhh",
    version,
    about = "Hermite-Hadamard checks for generalized s-convex functions on fractal sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    /// Term-wise closed forms and series
    Op,
    /// Singular-kernel Gauss quadrature
    Quad,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    #[value(name = "1")]
    First,
    #[value(name = "2")]
    Second,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one inequality and print its report row as CSV.
    Verify {
        /// 31, l31, 32 or 33 (the long names thm31, lemma31, ... work too)
        #[arg(long)]
        thm: TheoremId,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum, default_value = "op")]
        backend: Backend,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Evaluate even when the convexity certificate fails.
        #[arg(long)]
        waive_certification: bool,
        /// Average the left and right kernels.
        #[arg(long)]
        symmetrize_kernel: bool,
        /// Accept functions that take negative values.
        #[arg(long)]
        nonneg_waiver: bool,
    },
    /// Run a configured sweep and write report.csv, summary.json and plot_*.dat.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test membership in a generalized s-convexity class.
    Certify {
        #[arg(long, value_enum)]
        sense: SenseArg,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long)]
        nonneg_waiver: bool,
    },
    /// Print moment, absolute moment and bound constant tables.
    Moments {
        #[arg(long, value_delimiter = ',', required = true)]
        alpha_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        kappa_grid: Vec<f64>,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Selftest,
}

fn backend(choice: Backend, symmetric: bool) -> LfiBackend {
    let be = match choice {
        Backend::Op => LfiBackend::operational(),
        Backend::Quad => LfiBackend::quadrature(),
    };
    if symmetric {
        be.with_kernel(KernelSide::Symmetric)
    } else {
        be
    }
}

fn run(cli: Cli) -> Result<u8> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Verify {
            thm,
            alpha,
            s,
            q,
            a,
            b,
            f,
            backend: choice,
            tol,
            waive_certification,
            symmetrize_kernel,
            nonneg_waiver,
        } => {
            let mut case = TheoremCase::new(thm, &f, alpha, s, q, a, b)?
                .with_backend(backend(choice, symmetrize_kernel))
                .with_tol(tol);
            case.waive_certification = waive_certification;
            case.cert.require_nonneg = !nonneg_waiver;
            let result = verify(&case)?;
            let pass = result.pass;
            let row = ReportRow::from(&CaseRow {
                case_id: "c0".into(),
                theorem: thm,
                alpha,
                s,
                q: case.q,
                a,
                b,
                fn_text: f,
                backend: case.backend.label().into(),
                result: Ok(result),
            });
            report::write_csv(&[row], &mut stdout)?;
            Ok(if pass { 0 } else { 2 })
        }
        Command::Sweep { config, out } => {
            let eval = report::run(&config, out.as_deref())?;
            let s = &eval.summary;
            writeln!(
                stdout,
                "{} cases, {} passed, {} violations, {} errors, {} skipped",
                s.cases,
                s.passed,
                s.violations,
                s.errors,
                s.skipped.len()
            )?;
            Ok(eval.exit_code() as u8)
        }
        Command::Certify {
            sense,
            f,
            alpha,
            s,
            a,
            b,
            seed,
            nonneg_waiver,
        } => {
            let h = FunctionHandle::parse(&f, alpha, s)?;
            let grid = CertGrid {
                seed,
                require_nonneg: !nonneg_waiver,
                ..CertGrid::default()
            };
            let g = |x: f64| h.value(x);
            let rep = match sense {
                SenseArg::First => certify_gks1(g, alpha, s, (a, b), &grid)?,
                SenseArg::Second => certify_gks2(g, alpha, s, (a, b), &grid)?,
            };
            let (u, v, l) = rep.worst;
            writeln!(
                stdout,
                "certified={} max_violation={:e} worst=(u={u}, v={v}, lambda={l}) min_value={} samples={}",
                rep.certified, rep.max_violation, rep.min_value, rep.samples
            )?;
            if let Some(reason) = &rep.reason {
                writeln!(stdout, "reason: {reason}")?;
            }
            Ok(if rep.certified { 0 } else { 2 })
        }
        Command::Moments { alpha_grid, kappa_grid } => {
            let op = LfiBackend::operational();
            writeln!(stdout, "alpha kappa moment abs_moment K")?;
            for &alpha in &alpha_grid {
                for &kappa in &kappa_grid {
                    let m = moment(MomentKey::new(kappa, alpha)?);
                    let am = abs_moment(kappa, alpha, &op)?;
                    // K is indexed by s = kappa / alpha, defined for s in (0, 1]
                    let s = kappa / alpha;
                    let k = if s > 0.0 && s <= 1.0 {
                        k_constant(alpha, s).to_string()
                    } else {
                        "nan".into()
                    };
                    writeln!(stdout, "{alpha} {kappa} {m} {am} {k}")?;
                }
            }
            Ok(0)
        }
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                writeln!(stdout, "{}", r.line())?;
            }
            let unexpected = results
                .iter()
                .filter(|r| !r.pass && r.known_failure().is_none())
                .count();
            writeln!(
                stdout,
                "{}/{} criteria pass, {unexpected} unexpected failures",
                results.iter().filter(|r| r.pass).count(),
                results.len()
            )?;
            Ok(if unexpected == 0 { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share exit status 1 with other configuration errors; 2 means violations
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fhh: {e}");
            ExitCode::from(1)
        }
    }
}
