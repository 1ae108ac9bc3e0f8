//! Closed forms and convergent series for the unit functional applied to a
//! single shifted power.
//!
//! With `M(k) = Gamma(1+k)/Gamma(1+k+alpha)`, the unit functional satisfies
//! `L[u^k] = M(k)` and `L[(u - nu)_+^k] = (1-nu)^(k+alpha) M(k)` for
//! `0 <= nu < 1`. The other placements of the anchor are expanded into series
//! whose terms decay at least geometrically; the tail after the last term is
//! bounded by `|t_N| r / (1 - r)` with `r` the ratio bound.

use crate::error::{Error, Result};
use crate::special::{beta_pos, gamma_pos, gamma_ratio_pos};

#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesCfg {
    pub max_terms: usize,
    pub rel_tol: f64,
}

pub(crate) fn moment_unchecked(kappa: f64, alpha: f64) -> f64 {
    gamma_ratio_pos(1.0 + kappa, 1.0 + kappa + alpha)
}

/// Sum `t_0 + t_1 + ...` where `next(n, t_n)` yields `t_{n+1}` and
/// `|t_{n+1}| <= r |t_n|` holds once `n >= from`.
fn geometric_sum(
    first: f64,
    r: f64,
    from: usize,
    cfg: SeriesCfg,
    mut next: impl FnMut(usize, f64) -> f64,
) -> Result<f64> {
    let mut sum = first;
    let mut t = first;
    let mut n = 0;
    loop {
        if t == 0.0 && n >= from {
            return Ok(sum);
        }
        let bound = t.abs() * r / (1.0 - r);
        if n >= from && bound <= cfg.rel_tol * sum.abs() {
            return Ok(sum);
        }
        if n >= cfg.max_terms {
            return Err(Error::SeriesNotConverged {
                terms: n,
                tail_bound: bound,
            });
        }
        t = next(n, t);
        sum += t;
        n += 1;
    }
}

/// `L[(u - nu)^n]` for a non-negative integer `n`, any `nu`.
pub(crate) fn full_int(nu: f64, n: usize, alpha: f64) -> f64 {
    let mut binom = 1.0;
    let mut m = moment_unchecked(0.0, alpha);
    let mut sum = 0.0;
    for j in 0..=n {
        sum += binom * (-nu).powi((n - j) as i32) * m;
        binom = binom * (n - j) as f64 / (j + 1) as f64;
        m = m * (j + 1) as f64 / (j as f64 + 1.0 + alpha);
    }
    sum
}

fn as_small_int(k: f64) -> Option<usize> {
    (k.fract() == 0.0 && (0.0..=64.0).contains(&k)).then_some(k as usize)
}

/// `L[(u - nu)_+^kappa]`.
pub(crate) fn right_of(nu: f64, kappa: f64, alpha: f64, cfg: SeriesCfg) -> Result<f64> {
    if nu >= 1.0 {
        return Ok(0.0);
    }
    if nu >= 0.0 {
        return Ok((1.0 - nu).powf(kappa + alpha) * moment_unchecked(kappa, alpha));
    }
    if let Some(n) = as_small_int(kappa) {
        return Ok(full_int(nu, n, alpha));
    }
    let d = -nu;
    let g = gamma_pos(alpha);
    if d >= 1.0 {
        // (u + d)^k = (1+d)^k (1 - (1-u)/(1+d))^k, integrated termwise against (1-u)^(alpha-1)
        let r = 1.0 / (1.0 + d);
        let from = kappa.max(0.0).ceil() as usize + 1;
        let s = geometric_sum(1.0 / alpha, r, from, cfg, |n, t| {
            let n = n as f64;
            -t * (kappa - n) / (n + 1.0) * r * (n + alpha) / (n + 1.0 + alpha)
        })?;
        Ok((1.0 + d).powf(kappa) * s / g)
    } else {
        // integral over [-d, 1] of the shifted variable minus the piece over [-d, 0]
        let r = d / (1.0 + d);
        let whole = (1.0 + d).powf(kappa + alpha) * moment_unchecked(kappa, alpha);
        let first = d.powf(kappa + 1.0) / (kappa + 1.0);
        let s = geometric_sum(first, r, 0, cfg, |m, t| {
            let m = m as f64;
            t * (m + 1.0 - alpha) / (m + 1.0) * r * (kappa + m + 1.0) / (kappa + m + 2.0)
        })?;
        Ok(whole - (1.0 + d).powf(alpha - 1.0) * s / g)
    }
}

/// `L[(nu - u)_+^kappa]`.
pub(crate) fn left_of(nu: f64, kappa: f64, alpha: f64, cfg: SeriesCfg) -> Result<f64> {
    if nu <= 0.0 {
        return Ok(0.0);
    }
    let g = gamma_pos(alpha);
    if nu == 1.0 {
        return Ok(1.0 / (g * (kappa + alpha)));
    }
    if nu > 1.0 {
        if let Some(n) = as_small_int(kappa) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            return Ok(sign * full_int(nu, n, alpha));
        }
        // (nu - u)^k = nu^k (1 - u/nu)^k with L[u^n] = M(n)
        let r = 1.0 / nu;
        let from = kappa.max(0.0).ceil() as usize + 1;
        let s = geometric_sum(moment_unchecked(0.0, alpha), r, from, cfg, |n, t| {
            let n = n as f64;
            -t * (kappa - n) / (n + 1.0) * r * (n + 1.0) / (n + 1.0 + alpha)
        })?;
        return Ok(nu.powf(kappa) * s);
    }
    // 0 < nu < 1: expand (1-u)^(alpha-1) = sum (1-alpha)_m/m! u^m on [0, nu]
    let first = nu.powf(kappa + 1.0) * beta_pos(1.0, kappa + 1.0);
    let s = geometric_sum(first, nu, 0, cfg, |m, t| {
        let m = m as f64;
        t * (m + 1.0 - alpha) / (m + 1.0) * nu * (m + 1.0) / (m + kappa + 2.0)
    })?;
    Ok(s / g)
}
