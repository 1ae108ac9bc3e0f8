//! Numerical checks of the operator identities: substitution, the
//! Newton–Leibniz formula, integration by parts and the Hölder inequality.
//!
//! Each check returns the measured residual or slack together with a note
//! when the operational backend could not represent an integrand and the
//! value was computed by quadrature instead.

use super::{lfi, lfi_poly, lfi_quadrature, LfiBackend, Realization};
use crate::error::{domain, Error, Result};
use crate::expr::{FractalPoly, FunctionHandle};

#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    pub value: f64,
    pub fallback: Option<String>,
}

impl Checked {
    fn direct(value: f64) -> Self {
        Checked { value, fallback: None }
    }
}

fn quad_backend(backend: &LfiBackend) -> LfiBackend {
    LfiBackend {
        realization: Realization::SingularQuadrature,
        ..backend.clone()
    }
}

fn poly_breaks(ps: &[&FractalPoly]) -> Vec<f64> {
    let mut out: Vec<f64> = ps.iter().flat_map(|p| p.breakpoints()).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Integral of a product of polynomials: closed form when the product is a
/// polynomial and the backend is operational, quadrature otherwise.
fn lfi_product(
    f: &FractalPoly,
    g: &FractalPoly,
    a: f64,
    b: f64,
    alpha: f64,
    backend: &LfiBackend,
    notes: &mut Vec<String>,
) -> Result<f64> {
    if backend.realization == Realization::Operational {
        if let Some(fg) = f.mul(g) {
            return lfi_poly(&fg, a, b, alpha, backend);
        }
        notes.push(format!(
            "product ({f}) * ({g}) leaves the polynomial basis; integrated by quadrature"
        ));
    }
    lfi_quadrature(
        |x| f.eval(x) * g.eval(x),
        &poly_breaks(&[f, g]),
        a,
        b,
        alpha,
        &quad_backend(backend),
    )
}

/// `|I[f, g(a)..g(b)] - I[|d|^alpha f∘g, a..b]|` for the affine map
/// `g(t) = c + d t`.
pub fn check_substitution(
    f: &FunctionHandle,
    c: f64,
    d: f64,
    a: f64,
    b: f64,
    alpha: f64,
    backend: &LfiBackend,
) -> Result<Checked> {
    if d == 0.0 || !d.is_finite() || !c.is_finite() {
        return Err(domain(format!(
            "substitution needs an affine map with d != 0, got c = {c}, d = {d}"
        )));
    }
    let (ga, gb) = (c + d * a, c + d * b);
    let (lo, hi) = (ga.min(gb), ga.max(gb));
    let direct = lfi(f, lo, hi, alpha, backend)?;
    let scale = d.abs().powf(alpha);
    let composed = match (backend.realization, f.poly()) {
        (Realization::Operational, Some(p)) => lfi_poly(&p.compose_affine(d, c)?.scale(scale), a, b, alpha, backend)?,
        (Realization::Operational, None) => {
            return Err(Error::BackendCapability(format!(
                "'{}' has no polynomial form",
                f.text()
            )))
        }
        (Realization::SingularQuadrature, _) => {
            let brk: Vec<f64> = f.breakpoints().iter().map(|&m| (m - c) / d).collect();
            lfi_quadrature(|t| scale * f.value(c + d * t), &brk, a, b, alpha, backend)?
        }
    };
    Ok(Checked::direct((direct - composed).abs()))
}

/// `|I[D g] - (g(b) - g(a))|` with the exact derivative of `g`.
pub fn check_newton_leibniz(g: &FractalPoly, a: f64, b: f64, backend: &LfiBackend) -> Result<Checked> {
    let alpha = g.alpha();
    let dg = g.lfd_exact()?;
    let integral = match backend.realization {
        Realization::Operational => lfi_poly(&dg, a, b, alpha, backend)?,
        Realization::SingularQuadrature => lfi_quadrature(|x| dg.eval(x), &dg.breakpoints(), a, b, alpha, backend)?,
    };
    Ok(Checked::direct((integral - (g.eval(b) - g.eval(a))).abs()))
}

/// `|I[f D g] - [f g]_a^b + I[D f g]|`.
pub fn check_parts(f: &FractalPoly, g: &FractalPoly, a: f64, b: f64, backend: &LfiBackend) -> Result<Checked> {
    let alpha = f.alpha();
    let (df, dg) = (f.lfd_exact()?, g.lfd_exact()?);
    let mut notes = Vec::new();
    let i1 = lfi_product(f, &dg, a, b, alpha, backend, &mut notes)?;
    let i2 = lfi_product(&df, g, a, b, alpha, backend, &mut notes)?;
    let boundary = f.eval(b) * g.eval(b) - f.eval(a) * g.eval(a);
    Ok(Checked {
        value: (i1 - boundary + i2).abs(),
        fallback: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// Slack `I[|f|^p]^(1/p) I[|g|^q]^(1/q) - I[|f g|]` of the Hölder inequality.
#[allow(clippy::too_many_arguments)]
pub fn check_hoelder(
    f: &FunctionHandle,
    g: &FunctionHandle,
    a: f64,
    b: f64,
    alpha: f64,
    p: f64,
    q: f64,
    backend: &LfiBackend,
) -> Result<Checked> {
    if !(p > 1.0 && q > 1.0 && (1.0 / p + 1.0 / q - 1.0).abs() <= 1e-12) {
        return Err(Error::Config(format!(
            "Hölder exponents need p, q > 1 and 1/p + 1/q = 1, got p = {p}, q = {q}"
        )));
    }
    if backend.realization == Realization::Operational {
        let polys = f
            .poly()
            .zip(g.poly())
            .and_then(|(fp, gp)| Some((fp.mul(gp)?.abs_value()?, fp.abs_pow(p)?, gp.abs_pow(q)?)));
        if let Some((fg, fp, gq)) = polys {
            let lhs = lfi_poly(&fg, a, b, alpha, backend)?;
            let rhs =
                lfi_poly(&fp, a, b, alpha, backend)?.powf(1.0 / p) * lfi_poly(&gq, a, b, alpha, backend)?.powf(1.0 / q);
            return Ok(Checked::direct(rhs - lhs));
        }
    }
    // one breakpoint set for all three integrals keeps the discrete inequality exact
    let mut brk = f.breakpoints();
    brk.extend(g.breakpoints());
    brk.sort_by(f64::total_cmp);
    brk.dedup();
    let qb = quad_backend(backend);
    let lhs = lfi_quadrature(|x| (f.value(x) * g.value(x)).abs(), &brk, a, b, alpha, &qb)?;
    let fp = lfi_quadrature(|x| f.value(x).abs().powf(p), &brk, a, b, alpha, &qb)?;
    let gq = lfi_quadrature(|x| g.value(x).abs().powf(q), &brk, a, b, alpha, &qb)?;
    let fallback = (backend.realization == Realization::Operational)
        .then(|| "Hölder integrands leave the polynomial basis; integrated by quadrature".to_string());
    Ok(Checked {
        value: fp.powf(1.0 / p) * gq.powf(1.0 / q) - lhs,
        fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{lower_to_poly, parse, Lowered};

    fn poly(t: &str, alpha: f64) -> FractalPoly {
        match lower_to_poly(&parse(t).unwrap(), alpha, 1.0) {
            Lowered::Poly(p) => p,
            Lowered::NotPolynomial => panic!("{t}"),
        }
    }

    fn h(t: &str, alpha: f64) -> FunctionHandle {
        FunctionHandle::parse(t, alpha, 1.0).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let op = LfiBackend::operational();
        assert_eq!(
            check_substitution(&h("x^2", 0.5), 0.0, 1.0, 0.0, 1.0, 0.5, &op)
                .unwrap()
                .value,
            0.0
        );
        for be in [LfiBackend::operational(), LfiBackend::quadrature()] {
            for (c, d) in [(1.0, 2.0), (3.0, -1.5), (0.5, 0.25)] {
                let r = check_substitution(&h("x^2", 1.0), c, d, 0.0, 1.0, 1.0, &be).unwrap();
                assert!(r.value <= 1e-10, "c={c} d={d}: {r:?}");
            }
        }
        // reflection of a polynomial symmetric about the midpoint of [1, 3]
        let r = check_substitution(&h("(x-2)^2 + 1", 0.5), 4.0, -1.0, 1.0, 3.0, 0.5, &op).unwrap();
        assert!(r.value <= 1e-12, "{r:?}");
    }

    #[test]
    fn newton_leibniz_examples() {
        let op = LfiBackend::operational();
        for alpha in [0.3, 0.5, 0.8, 1.0] {
            assert!(check_newton_leibniz(&poly("x^a", alpha), 0.0, 1.0, &op).unwrap().value <= 1e-12);
        }
        assert!(check_newton_leibniz(&poly("x^3", 1.0), 1.0, 2.0, &op).unwrap().value <= 1e-10);
        assert_eq!(check_newton_leibniz(&poly("4", 0.5), 0.0, 1.0, &op).unwrap().value, 0.0);
    }

    #[test]
    fn parts_examples() {
        for be in [LfiBackend::operational(), LfiBackend::quadrature()] {
            let r = check_parts(&poly("x", 1.0), &poly("x^2", 1.0), 0.0, 1.0, &be).unwrap();
            assert!(r.value <= 1e-10, "{r:?}");
        }
        let g = poly("x^(2*a)", 0.5);
        let parts = check_parts(&poly("1", 0.5), &g, 0.0, 1.0, &LfiBackend::operational()).unwrap();
        let nl = check_newton_leibniz(&g, 0.0, 1.0, &LfiBackend::operational()).unwrap();
        assert!((parts.value - nl.value).abs() < 1e-14);
    }

    #[test]
    fn hoelder_examples() {
        for be in [LfiBackend::operational(), LfiBackend::quadrature()] {
            let r = check_hoelder(&h("x", 1.0), &h("1 - x", 1.0), 0.0, 1.0, 1.0, 2.0, 2.0, &be).unwrap();
            assert!((r.value - 1.0 / 6.0).abs() < 1e-10, "{r:?}");
        }
        let r = check_hoelder(
            &h("x^a", 0.5),
            &h("x^a", 0.5),
            0.0,
            1.0,
            0.5,
            2.0,
            2.0,
            &LfiBackend::operational(),
        )
        .unwrap();
        assert!(r.fallback.is_none());
        assert!(
            r.value >= -1e-12 && r.value.abs() < 1e-12,
            "Cauchy–Schwarz equality case: {r:?}"
        );
        assert!(matches!(
            check_hoelder(
                &h("x", 1.0),
                &h("x", 1.0),
                0.0,
                1.0,
                1.0,
                2.0,
                3.0,
                &LfiBackend::quadrature()
            ),
            Err(Error::Config(_))
        ));
    }
}
