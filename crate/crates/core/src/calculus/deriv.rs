//! Local fractional derivative.
//!
//! Polynomial handles use the termwise power rule. Everything else goes
//! through the defining difference quotient
//! `Gamma(1+alpha) (f(x0 + h) - f(x0)) / h^alpha` on `h = 2^-m`,
//! extrapolated by Richardson with error exponents `j - alpha`.
//!
//! For a smooth `f` and `alpha < 1` the quotient tends to 0 at every point
//! where `f` is differentiable; that is the honest limit of the raw
//! definition and differs from the power rule, which is why the two paths
//! are reported separately.

use crate::error::{domain, Result};
use crate::expr::FunctionHandle;
use crate::special::gamma_pos;

const M_FIRST: i32 = 4;
const M_LAST: i32 = 40;
const WINDOW: usize = 6;
const CONVERGENCE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct NumericLfd {
    /// Extrapolated limit of the forward quotient.
    pub forward: f64,
    /// Same for `h -> -h`; `None` when `x0 - h` leaves the domain.
    pub backward: Option<f64>,
    pub converged: bool,
    /// Difference between the last two extrapolants.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LfdValue {
    pub value: f64,
    pub exact: bool,
    pub numeric: Option<NumericLfd>,
}

fn extrapolate(ds: &[f64], exps: &[f64]) -> f64 {
    let mut t = ds.to_vec();
    for &p in exps {
        let f = 2f64.powf(p);
        for i in 0..t.len() - 1 {
            t[i] = (f * t[i + 1] - t[i]) / (f - 1.0);
        }
        t.pop();
    }
    t[0]
}

fn one_sided<F: Fn(f64) -> f64>(f: &F, x0: f64, alpha: f64, sign: f64) -> (f64, bool, f64) {
    let g = gamma_pos(1.0 + alpha);
    let f0 = f(x0);
    let ds: Vec<f64> = (M_FIRST..=M_LAST)
        .map(|m| {
            let h = 2f64.powi(-m);
            g * sign * (f(x0 + sign * h) - f0) / h.powf(alpha)
        })
        .collect();
    let exps: Vec<f64> = (1..)
        .map(|j| j as f64 - alpha)
        .filter(|&p| p > 0.0)
        .take(WINDOW - 1)
        .collect();
    let mut prev: Option<f64> = None;
    let mut last = (f64::NAN, f64::INFINITY);
    for w in ds.windows(WINDOW) {
        let e = extrapolate(w, &exps);
        if let Some(p) = prev {
            let spread = (e - p).abs();
            if spread < CONVERGENCE_TOL * e.abs().max(1.0) {
                return (e, true, spread);
            }
            last = (e, spread);
        }
        prev = Some(e);
    }
    (last.0, false, last.1)
}

/// Difference-quotient derivative of order `alpha` at `x0 >= 0`.
pub fn lfd_numeric<F: Fn(f64) -> f64>(f: F, x0: f64, alpha: f64) -> Result<NumericLfd> {
    if !(x0 >= 0.0 && x0.is_finite()) {
        return Err(domain(format!(
            "derivative point must be finite and non-negative, got {x0}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let (forward, fconv, fspread) = one_sided(&f, x0, alpha, 1.0);
    let backward = (x0 >= 2f64.powi(-M_FIRST)).then(|| one_sided(&f, x0, alpha, -1.0));
    let converged = fconv && backward.is_none_or(|b| b.1);
    Ok(NumericLfd {
        forward,
        backward: backward.map(|b| b.0),
        converged,
        spread: fspread.max(backward.map_or(0.0, |b| b.2)),
    })
}

/// Derivative of order `f.alpha()` at `x0`: exact when the handle has a
/// polynomial form, numeric otherwise.
pub fn lfd(f: &FunctionHandle, x0: f64) -> Result<LfdValue> {
    if !(x0 >= 0.0) {
        return Err(domain(format!("derivative point must be non-negative, got {x0}")));
    }
    match f.poly() {
        Some(p) => Ok(LfdValue {
            value: p.lfd_exact()?.eval(x0),
            exact: true,
            numeric: None,
        }),
        None => {
            let n = lfd_numeric(|x| f.value(x), x0, f.alpha())?;
            Ok(LfdValue {
                value: n.forward,
                exact: false,
                numeric: Some(n),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_derivative_of_square() {
        let n = lfd_numeric(|x| x * x, 3.0, 1.0).unwrap();
        assert!(n.converged);
        assert!((n.forward - 6.0).abs() < 1e-9, "{n:?}");
        assert!((n.backward.unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn power_at_origin_has_constant_quotient() {
        let alpha = 0.5;
        let n = lfd_numeric(|x: f64| x.powf(alpha), 0.0, alpha).unwrap();
        assert!((n.forward - gamma_pos(1.5)).abs() < 1e-12);
        assert_eq!(n.backward, None);
    }

    #[test]
    fn smooth_function_has_vanishing_fractional_quotient() {
        let n = lfd_numeric(|x| x * x, 1.0, 0.5).unwrap();
        assert!(n.converged);
        assert!(n.forward.abs() < 1e-6, "{n:?}");
    }

    #[test]
    fn handle_examples() {
        let f = FunctionHandle::parse("x^2", 1.0, 1.0).unwrap();
        let d = lfd(&f, 3.0).unwrap();
        assert!(d.exact && (d.value - 6.0).abs() < 1e-14);
        let f = FunctionHandle::parse("x^a", 0.5, 1.0).unwrap();
        assert!((lfd(&f, 1.0).unwrap().value - 0.886226925452758).abs() < 1e-14);
        let f = FunctionHandle::parse("x^(2*a)", 0.3, 1.0).unwrap();
        let want = gamma_pos(1.6) / gamma_pos(1.3) * 2f64.powf(0.3);
        assert!((lfd(&f, 2.0).unwrap().value - want).abs() < 1e-13);
        let f = FunctionHandle::parse("abs(x - 1)", 1.0, 1.0).unwrap();
        let d = lfd(&f, 2.0).unwrap();
        assert!(!d.exact && (d.value - 1.0).abs() < 1e-9);
    }
}
