//! Verification of the Hermite–Hadamard-type inequalities for generalized
//! s-convex functions.
//!
//! A [`TheoremCase`] fixes the parameters, the test function and the integral
//! backend. Each `verify_*` function computes the quantities of one statement
//! and returns them with slacks and a pass flag. A case whose hypotheses fail
//! certification is rejected with [`Error::Rejected`] rather than evaluated.

mod sweep;

pub use sweep::{default_families, sharpness_probe, sweep, CaseRow, Sharpness, SkippedCase, SweepGrid, SweepOutcome};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{abs_moment, lfd_numeric, lfi, lfi_poly, lfi_quadrature, KernelSide, LfiBackend, Realization};
use crate::error::{Error, Result};
use crate::expr::{
    certify_gks2, estimate_holder, CertGrid, FractalPoly, FunctionHandle, Support, SymbolicExponent, Term,
};
use crate::fractal::signed_pow;
use crate::special::{gamma_pos, gamma_ratio_pos};

/// Bounds scale by this factor in injected-violation mode.
pub const INJECTION_FACTOR: f64 = 0.9;

const HOLDER_POINTS: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    /// Midpoint / mean / endpoint chain.
    Thm31,
    /// Trapezoid identity.
    Lemma31,
    /// Trapezoid bound for `q >= 1`.
    Thm32,
    /// Trapezoid bound for `q > 1` through the midpoint.
    Thm33,
}

impl TheoremId {
    pub const ALL: [TheoremId; 4] = [TheoremId::Thm31, TheoremId::Lemma31, TheoremId::Thm32, TheoremId::Thm33];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Thm31 => "thm31",
            TheoremId::Lemma31 => "lemma31",
            TheoremId::Thm32 => "thm32",
            TheoremId::Thm33 => "thm33",
        }
    }

    fn uses_q(self) -> bool {
        matches!(self, TheoremId::Thm32 | TheoremId::Thm33)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    /// Accepts the canonical names and the short forms `31`, `l31`, `32`, `33`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm31" | "31" => Ok(TheoremId::Thm31),
            "lemma31" | "l31" => Ok(TheoremId::Lemma31),
            "thm32" | "32" => Ok(TheoremId::Thm32),
            "thm33" | "33" => Ok(TheoremId::Thm33),
            other => Err(Error::Config(format!("unknown theorem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TheoremCase {
    pub theorem: TheoremId,
    pub alpha: f64,
    pub s: f64,
    /// Required by `thm32` (`q >= 1`) and `thm33` (`q > 1`), ignored otherwise.
    pub q: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub f: FunctionHandle,
    pub backend: LfiBackend,
    pub tol: f64,
    pub cert: CertGrid,
    /// Skip the convexity certificate and evaluate anyway.
    pub waive_certification: bool,
    /// Scale the bound by [`INJECTION_FACTOR`] to exercise violation reporting.
    pub inject_violation: bool,
}

impl TheoremCase {
    /// A case with the operational backend, tolerance 1e-9 and the default
    /// certification grid.
    pub fn new(theorem: TheoremId, f: &str, alpha: f64, s: f64, q: Option<f64>, a: f64, b: f64) -> Result<Self> {
        Ok(TheoremCase {
            theorem,
            alpha,
            s,
            q,
            a,
            b,
            f: FunctionHandle::parse(f, alpha, s)?,
            backend: LfiBackend::operational(),
            tol: 1e-9,
            cert: CertGrid::default(),
            waive_certification: false,
            inject_violation: false,
        })
    }

    pub fn with_backend(mut self, backend: LfiBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return cfg(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return cfg(format!("s must lie in (0, 1], got {}", self.s));
        }
        if !(self.a >= 0.0 && self.b > self.a && self.b.is_finite()) {
            return cfg(format!("need 0 <= a < b, got [{}, {}]", self.a, self.b));
        }
        if !(self.tol > 0.0) {
            return cfg(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.f.alpha() != self.alpha || self.f.s() != self.s {
            return cfg(format!(
                "function was built for alpha = {}, s = {} but the case has alpha = {}, s = {}",
                self.f.alpha(),
                self.f.s(),
                self.alpha,
                self.s
            ));
        }
        match (self.theorem, self.q) {
            (TheoremId::Thm32, Some(q)) if q >= 1.0 && q.is_finite() => {}
            (TheoremId::Thm33, Some(q)) if q > 1.0 && q.is_finite() => {}
            (TheoremId::Thm32, q) => return cfg(format!("thm32 needs q >= 1, got {q:?}")),
            (TheoremId::Thm33, q) => return cfg(format!("thm33 needs q > 1, got {q:?}")),
            _ => {}
        }
        self.backend.validate()
    }

    fn q(&self) -> f64 {
        self.q.unwrap_or(1.0)
    }

    fn width(&self) -> f64 {
        (self.b - self.a).powf(self.alpha)
    }

    fn bound_scale(&self, notes: &mut Vec<String>) -> f64 {
        if self.inject_violation {
            notes.push(format!("injected violation: bound scaled by {INJECTION_FACTOR}"));
            INJECTION_FACTOR
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub theorem: TheoremId,
    /// Left member: midpoint bound (thm31), identity side 1 (lemma31) or
    /// trapezoid defect (thm32/33).
    pub lhs: f64,
    /// Normalized integral (thm31) or the q = 1 proof-text bound (thm32).
    pub mid: Option<f64>,
    /// Right member: endpoint bound, identity side 2 or the theorem bound.
    pub rhs: f64,
    pub slack_left: Option<f64>,
    pub slack_right: Option<f64>,
    pub residual: Option<f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationResult {
    /// Smallest slack, or minus the residual; negative means the claim fails
    /// by that much.
    pub fn margin(&self) -> f64 {
        match self.residual {
            Some(r) => -r,
            None => [self.slack_left, self.slack_right]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// `pass` rule shared with report re-classification: every present slack is
/// at least `-tol` and any residual is at most `tol`. NaN fails.
pub fn classify(slack_left: Option<f64>, slack_right: Option<f64>, residual: Option<f64>, tol: f64) -> bool {
    let slack_ok = |s: Option<f64>| s.is_none_or(|v| v >= -tol);
    slack_ok(slack_left) && slack_ok(slack_right) && residual.is_none_or(|r| r <= tol)
}

/// `Gamma(1+s alpha) / Gamma(1+(s+1) alpha)`, the endpoint constant of the
/// chain and the integral of `t^(alpha s)` over `[0, 1]`.
pub fn endpoint_constant(alpha: f64, s: f64) -> f64 {
    gamma_ratio_pos(1.0 + s * alpha, 1.0 + (s + 1.0) * alpha)
}

/// Closed form of the integral of `t^(alpha s) |1 - 2t|^alpha` over `[0, 1]`
/// used in the `q >= 1` trapezoid bound.
pub fn k_constant(alpha: f64, s: f64) -> f64 {
    let mixed = gamma_pos(1.0 + alpha) * gamma_ratio_pos(1.0 + s * alpha, 1.0 + (s + 2.0) * alpha);
    endpoint_constant(alpha, s) + mixed * (0.5f64.powf(alpha * s) - 2f64.powf(alpha))
}

fn ensure_holder(case: &TheoremCase) -> Result<()> {
    let c = estimate_holder(|x| case.f.value(x), case.alpha, (case.a, case.b), HOLDER_POINTS)?;
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::Rejected(format!(
            "'{}' is not Hölder of order {} on the grid",
            case.f.text(),
            case.alpha
        )))
    }
}

fn certify<F: Fn(f64) -> f64 + Sync>(case: &TheoremCase, what: &str, g: F, notes: &mut Vec<String>) -> Result<()> {
    if case.waive_certification {
        notes.push("certification waived".into());
        return Ok(());
    }
    let r = certify_gks2(g, case.alpha, case.s, (case.a, case.b), &case.cert)?;
    match r.reason {
        None => Ok(()),
        Some(reason) => Err(Error::Rejected(format!("{what} is not generalized s-convex: {reason}"))),
    }
}

/// Fractional derivative of the case function: exact for polynomial handles,
/// a difference quotient at `alpha = 1` otherwise.
enum Derivative<'a> {
    Exact(FractalPoly),
    Numeric(&'a FunctionHandle),
}

impl<'a> Derivative<'a> {
    fn of(case: &'a TheoremCase) -> Result<Self> {
        match case.f.poly() {
            Some(p) => Ok(Derivative::Exact(p.lfd_exact()?)),
            None if case.alpha == 1.0 => Ok(Derivative::Numeric(&case.f)),
            None => Err(Error::BackendCapability(format!(
                "'{}' has no polynomial form, and its derivative of order {} is not computable",
                case.f.text(),
                case.alpha
            ))),
        }
    }

    fn at(&self, x: f64, notes: &mut Vec<String>) -> f64 {
        match self {
            Derivative::Exact(d) => d.eval(x),
            Derivative::Numeric(f) => match lfd_numeric(|y| f.value(y), x, 1.0) {
                Ok(n) => {
                    if !n.converged {
                        notes.push(format!(
                            "numeric derivative did not settle at x = {x} (spread {:e})",
                            n.spread
                        ));
                    }
                    n.forward
                }
                Err(e) => {
                    notes.push(format!("numeric derivative failed at x = {x}: {e}"));
                    f64::NAN
                }
            },
        }
    }

    fn value(&self, x: f64) -> f64 {
        match self {
            Derivative::Exact(d) => d.eval(x),
            Derivative::Numeric(f) => lfd_numeric(|y| f.value(y), x, 1.0).map_or(f64::NAN, |n| n.forward),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Derivative::Exact(d) => d.breakpoints(),
            Derivative::Numeric(f) => f.breakpoints(),
        }
    }
}

/// `Gamma(1+alpha)/(b-a)^alpha · I[f]`.
fn normalized_mean(case: &TheoremCase) -> Result<f64> {
    Ok(gamma_pos(1.0 + case.alpha) * lfi(&case.f, case.a, case.b, case.alpha, &case.backend)? / case.width())
}

/// `|(f(a) + f(b))/2^alpha - Gamma(1+alpha)/(b-a)^alpha · I[f]|`.
fn trapezoid_defect(case: &TheoremCase) -> Result<f64> {
    let ends = (case.f.value(case.a) + case.f.value(case.b)) / 2f64.powf(case.alpha);
    Ok((ends - normalized_mean(case)?).abs())
}

fn finish(
    case: &TheoremCase,
    lhs: f64,
    mid: Option<f64>,
    rhs: f64,
    slacks: (Option<f64>, Option<f64>),
    residual: Option<f64>,
    notes: Vec<String>,
) -> VerificationResult {
    VerificationResult {
        theorem: case.theorem,
        lhs,
        mid,
        rhs,
        slack_left: slacks.0,
        slack_right: slacks.1,
        residual,
        pass: classify(slacks.0, slacks.1, residual, case.tol),
        notes,
    }
}

/// Midpoint bound ≤ normalized integral ≤ endpoint bound.
pub fn verify_thm31(case: &TheoremCase) -> Result<VerificationResult> {
    case.validate()?;
    let mut notes = Vec::new();
    ensure_holder(case)?;
    certify(case, "f", |x| case.f.value(x), &mut notes)?;
    let (alpha, s) = (case.alpha, case.s);
    let m = 0.5 * (case.a + case.b);
    let lhs = 2f64.powf((s - 1.0) * alpha) / gamma_pos(1.0 + alpha) * case.f.value(m);
    let mid = lfi(&case.f, case.a, case.b, alpha, &case.backend)? / case.width();
    let rhs =
        case.bound_scale(&mut notes) * endpoint_constant(alpha, s) * (case.f.value(case.a) + case.f.value(case.b));
    Ok(finish(
        case,
        lhs,
        Some(mid),
        rhs,
        (Some(mid - lhs), Some(rhs - mid)),
        None,
        notes,
    ))
}

/// `x ↦ sign(x - m) |x - m|^alpha` with `m` the midpoint of `[a, b]`.
fn signed_kernel(alpha: f64, s: f64, m: f64) -> FractalPoly {
    let half = |coeff, support| Term {
        coeff,
        shift: m,
        exponent: SymbolicExponent { j: 0.0, k: 1.0, l: 0.0 },
        support,
    };
    if alpha == 1.0 {
        return FractalPoly::new(alpha, s, vec![half(1.0, Support::Full)]);
    }
    FractalPoly::new(alpha, s, vec![half(1.0, Support::RightOf), half(-1.0, Support::LeftOf)])
}

/// Integral over `t ∈ [0, 1]` of `sign(1-2t)|1-2t|^alpha · f^(alpha)(ta + (1-t)b)`.
///
/// Computed in `x = ta + (1-t)b`, where the kernel anchored at `t = 1` becomes
/// the one anchored at `x = a` and `1 - 2t = (2x - a - b)/(b - a)`; this keeps
/// evaluations near the kernel end free of cancellation.
fn signed_kernel_integral(case: &TheoremCase, d: &Derivative, notes: &mut Vec<String>) -> Result<f64> {
    let (a, b, alpha) = (case.a, case.b, case.alpha);
    let (h, m) = (b - a, 0.5 * (a + b));
    let kernel = match case.backend.kernel {
        KernelSide::Right => KernelSide::Left,
        KernelSide::Left => KernelSide::Right,
        KernelSide::Symmetric => KernelSide::Symmetric,
    };
    let backend = case.backend.clone().with_kernel(kernel);
    let scale = (2.0 / h).powf(alpha) / h.powf(alpha);
    if let (Derivative::Exact(dp), Realization::Operational) = (d, backend.realization) {
        if let Some(prod) = signed_kernel(alpha, case.s, m).mul(dp) {
            return Ok(scale * lfi_poly(&prod, a, b, alpha, &backend)?);
        }
        notes.push("kernel product leaves the polynomial basis; side 2 integrated by quadrature".into());
    }
    let mut brk = d.breakpoints();
    brk.push(m);
    let quad = LfiBackend {
        realization: Realization::SingularQuadrature,
        ..backend
    };
    Ok(scale * lfi_quadrature(|x| signed_pow(x - m, alpha) * d.value(x), &brk, a, b, alpha, &quad)?)
}

/// Trapezoid identity with the halved endpoint average:
/// `(f(a)+f(b))/2 - Gamma(1+alpha)/(b-a)^alpha I[f]` against
/// `(b-a)^alpha/2 · I_t[sign(1-2t)|1-2t|^alpha f^(alpha)(ta + (1-t)b)]`.
///
/// The variant with `2^alpha` in place of both factors 2 is evaluated as well
/// and its residual recorded in the notes; the two agree at `alpha = 1`.
pub fn verify_lemma31(case: &TheoremCase) -> Result<VerificationResult> {
    case.validate()?;
    let mut notes = Vec::new();
    let d = Derivative::of(case)?;
    let alpha = case.alpha;
    let mean = normalized_mean(case)?;
    let ends = case.f.value(case.a) + case.f.value(case.b);
    let kernel = signed_kernel_integral(case, &d, &mut notes)?;
    let side1 = ends / 2.0 - mean;
    let side2 = case.bound_scale(&mut notes) * case.width() / 2.0 * kernel;
    let p = 2f64.powf(alpha);
    let alt = (ends / p - mean - case.width() / p * kernel).abs();
    notes.push(format!("2^alpha form residual {alt:e}"));
    Ok(finish(
        case,
        side1,
        None,
        side2,
        (None, None),
        Some((side1 - side2).abs()),
        notes,
    ))
}

/// Trapezoid bound for `q >= 1`.
pub fn verify_thm32(case: &TheoremCase) -> Result<VerificationResult> {
    case.validate()?;
    let mut notes = Vec::new();
    let d = Derivative::of(case)?;
    let (alpha, s, q) = (case.alpha, case.s, case.q());
    ensure_holder(case)?;
    certify(case, "|f^(alpha)|^q", |x| d.value(x).abs().powf(q), &mut notes)?;
    let da = d.at(case.a, &mut notes).abs();
    let db = d.at(case.b, &mut notes).abs();
    let defect = trapezoid_defect(case)?;
    let k = k_constant(alpha, s);
    let g = gamma_ratio_pos(1.0 + alpha, 1.0 + 2.0 * alpha);
    let front = case.width() / 2f64.powf(alpha);
    if k < 0.0 {
        notes.push(format!("K = {k} is negative; the bound is undefined"));
    }
    let bound = case.bound_scale(&mut notes)
        * front
        * g.powf((q - 1.0) / q)
        * k.powf(1.0 / q)
        * (da.powf(q) + db.powf(q)).powf(1.0 / q);
    let proof_text = front * g * k * (da.powf(q) + db);
    notes.push(format!("proof-text bound slack {:e}", proof_text - defect));
    match abs_moment(s * alpha, alpha, &case.backend) {
        Ok(m) => notes.push(format!(
            "K = {k}; weighted |1-2t| integral = {m}; relative gap {:e}",
            (k - m).abs() / m.abs()
        )),
        Err(e) => notes.push(format!("K cross-check failed: {e}")),
    }
    Ok(finish(
        case,
        defect,
        Some(proof_text),
        bound,
        (None, Some(bound - defect)),
        None,
        notes,
    ))
}

/// Factors of the `q > 1` bound: the Hölder-conjugate moment and the
/// half-interval endpoint constant, both raised to their exponents.
pub fn thm33_factors(alpha: f64, s: f64, q: f64) -> (f64, f64) {
    let p = q / (q - 1.0);
    let two = 2f64.powf(alpha);
    let first = (gamma_ratio_pos(1.0 + p * alpha, 1.0 + (p + 1.0) * alpha) / two).powf((q - 1.0) / q);
    let second = (endpoint_constant(alpha, s) / two).powf(1.0 / q);
    (first, second)
}

/// Trapezoid bound for `q > 1` using the midpoint derivative.
pub fn verify_thm33(case: &TheoremCase) -> Result<VerificationResult> {
    case.validate()?;
    let mut notes = Vec::new();
    let d = Derivative::of(case)?;
    let (alpha, s, q) = (case.alpha, case.s, case.q());
    ensure_holder(case)?;
    certify(case, "|f^(alpha)|^q", |x| d.value(x).abs().powf(q), &mut notes)?;
    let m = 0.5 * (case.a + case.b);
    let [da, dm, db] = [case.a, m, case.b].map(|x| d.at(x, &mut notes).abs().powf(q));
    let defect = trapezoid_defect(case)?;
    let (first, second) = thm33_factors(alpha, s, q);
    let braces = (da + dm).powf(1.0 / q) + (dm + db).powf(1.0 / q);
    let bound = case.bound_scale(&mut notes) * case.width() / 2f64.powf(alpha) * first * second * braces;
    Ok(finish(
        case,
        defect,
        None,
        bound,
        (None, Some(bound - defect)),
        None,
        notes,
    ))
}

pub fn verify(case: &TheoremCase) -> Result<VerificationResult> {
    match case.theorem {
        TheoremId::Thm31 => verify_thm31(case),
        TheoremId::Lemma31 => verify_lemma31(case),
        TheoremId::Thm32 => verify_thm32(case),
        TheoremId::Thm33 => verify_thm33(case),
    }
}
