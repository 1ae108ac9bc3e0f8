//! Numerical membership tests for generalized s-convexity on fractal sets.
//!
//! `f` is in the second sense class when
//! `f(l1 u + l2 v) <= l1^(alpha s) f(u) + l2^(alpha s) f(v)` for all
//! `u, v` in the domain and `l1 + l2 = 1`; in the first sense the weights
//! satisfy `l1^s + l2^s = 1` instead. A certificate is a dense deterministic
//! grid plus seeded random triples with no violation above the tolerance.
//! It is evidence, not proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertGrid {
    /// Grid points per axis for `u` and `v`.
    pub n_uv: usize,
    pub n_lambda: usize,
    pub n_random: usize,
    pub seed: u64,
    pub tol: f64,
    /// Reject functions that take a negative value at a sample point.
    pub require_nonneg: bool,
}

impl Default for CertGrid {
    fn default() -> Self {
        CertGrid {
            n_uv: 64,
            n_lambda: 33,
            n_random: 256,
            seed: 0x5eed,
            tol: 1e-10,
            require_nonneg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub sense: Sense,
    pub certified: bool,
    /// Largest `lhs - rhs` seen; negative when every sample has slack.
    pub max_violation: f64,
    /// `(u, v, l1)` at the largest violation.
    pub worst: (f64, f64, f64),
    pub min_value: f64,
    pub samples: usize,
    pub reason: Option<String>,
}

#[derive(Clone, Copy)]
struct Worst {
    violation: f64,
    at: (f64, f64, f64),
    min_value: f64,
}

impl Worst {
    const NONE: Worst = Worst {
        violation: f64::NEG_INFINITY,
        at: (f64::NAN, f64::NAN, f64::NAN),
        min_value: f64::INFINITY,
    };

    fn merge(self, o: Worst) -> Worst {
        let mut w = if o.violation > self.violation { o } else { self };
        w.min_value = self.min_value.min(o.min_value);
        w
    }
}

fn weights(sense: Sense, t: f64, s: f64) -> (f64, f64) {
    match sense {
        Sense::Second => (t, 1.0 - t),
        Sense::First => (t.powf(1.0 / s), (1.0 - t).powf(1.0 / s)),
    }
}

fn sample<F: Fn(f64) -> f64>(f: &F, sense: Sense, alpha: f64, s: f64, u: f64, v: f64, t: f64) -> Worst {
    let (l1, l2) = weights(sense, t, s);
    let p = alpha * s;
    let fu = f(u);
    let fv = f(v);
    let lhs = f(l1 * u + l2 * v);
    // a point with weight zero takes no part in the combination
    let part = |l: f64, fx: f64| if l == 0.0 { 0.0 } else { l.powf(p) * fx };
    let rhs = part(l1, fu) + part(l2, fv);
    let violation = if rhs == f64::INFINITY {
        f64::NEG_INFINITY
    } else if lhs.is_nan() || rhs.is_nan() {
        f64::INFINITY
    } else {
        lhs - rhs
    };
    Worst {
        violation,
        at: (u, v, l1),
        min_value: fu.min(fv).min(lhs),
    }
}

fn certify<F>(f: F, sense: Sense, alpha: f64, s: f64, dom: (f64, f64), grid: &CertGrid) -> Result<CertReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (lo, hi) = dom;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(domain(format!(
            "certification domain must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0 && s > 0.0 && s <= 1.0) {
        return Err(domain(format!("need alpha, s in (0, 1], got alpha = {alpha}, s = {s}")));
    }
    if grid.n_uv < 2 || grid.n_lambda < 2 {
        return Err(domain("certification grid needs at least two points per axis"));
    }
    let node = |i: usize, n: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let lam = |j: usize| j as f64 / (grid.n_lambda - 1) as f64;

    let grid_worst = (0..grid.n_uv)
        .into_par_iter()
        .map(|i| {
            let u = node(i, grid.n_uv);
            let mut w = Worst::NONE;
            for k in 0..grid.n_uv {
                let v = node(k, grid.n_uv);
                for j in 0..grid.n_lambda {
                    w = w.merge(sample(&f, sense, alpha, s, u, v, lam(j)));
                }
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Worst::NONE, Worst::merge);

    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let random_worst = (0..grid.n_random).fold(Worst::NONE, |w, _| {
        let u = rng.gen_range(lo..=hi);
        let v = rng.gen_range(lo..=hi);
        let t = rng.gen_range(0.0..=1.0);
        w.merge(sample(&f, sense, alpha, s, u, v, t))
    });
    let w = grid_worst.merge(random_worst);

    let mut reason = None;
    if grid.require_nonneg && w.min_value < 0.0 {
        reason = Some(format!(
            "function takes the negative value {} on the domain",
            w.min_value
        ));
    } else if w.violation > grid.tol {
        let (u, v, l1) = w.at;
        reason = Some(format!(
            "convexity inequality fails by {:e} at u = {u}, v = {v}, l1 = {l1}",
            w.violation
        ));
    }
    Ok(CertReport {
        sense,
        certified: reason.is_none(),
        max_violation: w.violation,
        worst: w.at,
        min_value: w.min_value,
        samples: grid.n_uv * grid.n_uv * grid.n_lambda + grid.n_random,
        reason,
    })
}

/// Check membership in the second-sense class on `dom`.
pub fn certify_gks2<F>(f: F, alpha: f64, s: f64, dom: (f64, f64), grid: &CertGrid) -> Result<CertReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    certify(f, Sense::Second, alpha, s, dom, grid)
}

/// Check membership in the first-sense class on `dom`.
pub fn certify_gks1<F>(f: F, alpha: f64, s: f64, dom: (f64, f64), grid: &CertGrid) -> Result<CertReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    certify(f, Sense::First, alpha, s, dom, grid)
}

/// Empirical local fractional Hölder constant
/// `max |f(x) - f(y)| / |x - y|^alpha` over an `n`-point grid on `dom`.
pub fn estimate_holder<F: Fn(f64) -> f64>(f: F, alpha: f64, dom: (f64, f64), n: usize) -> Result<f64> {
    let (lo, hi) = dom;
    if n < 2 || !(hi > lo) {
        return Err(domain("Hölder estimate needs n >= 2 and a non-empty interval"));
    }
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max((fs[i] - fs[j]).abs() / (xs[j] - xs[i]).powf(alpha));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_at_the_threshold_is_certified() {
        let (alpha, s) = (0.5, 0.5);
        let p = alpha * s;
        let r = certify_gks2(|x: f64| x.powf(p), alpha, s, (0.0, 1.0), &CertGrid::default()).unwrap();
        assert!(r.certified, "{r:?}");
    }

    #[test]
    fn constants_are_in_the_class() {
        let r = certify_gks2(|_| 1.0, 0.5, 0.5, (0.0, 1.0), &CertGrid::default()).unwrap();
        assert!(r.certified);
    }

    #[test]
    fn negative_values_are_rejected_unless_waived() {
        let f = |x: f64| x - 0.5;
        let r = certify_gks2(f, 1.0, 1.0, (0.0, 1.0), &CertGrid::default()).unwrap();
        assert!(!r.certified);
        let waived = CertGrid {
            require_nonneg: false,
            ..CertGrid::default()
        };
        assert!(certify_gks2(f, 1.0, 1.0, (0.0, 1.0), &waived).unwrap().certified);
    }

    #[test]
    fn concave_bump_is_not_convex() {
        let r = certify_gks2(
            |x: f64| (1.0 - (2.0 * x - 1.0).powi(2)).max(0.0),
            1.0,
            1.0,
            (0.0, 1.0),
            &CertGrid::default(),
        )
        .unwrap();
        assert!(!r.certified);
        assert!(r.max_violation > 0.1);
    }

    #[test]
    fn singular_endpoint_with_zero_weight_is_not_a_violation() {
        // convex and decreasing with a pole at 0
        let r = certify_gks2(|x: f64| x.powf(-0.5), 1.0, 0.5, (0.0, 1.0), &CertGrid::default()).unwrap();
        assert!(r.certified, "{r:?}");
    }

    #[test]
    fn first_sense_weights_sum_to_one_in_power() {
        let (l1, l2) = weights(Sense::First, 0.3, 0.5);
        assert!((l1.powf(0.5) + l2.powf(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn holder_of_power() {
        let c = estimate_holder(|x: f64| x.powf(0.5), 0.5, (0.0, 1.0), 101).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let g = CertGrid::default();
        let a = certify_gks1(|x: f64| x * x, 0.7, 0.4, (0.0, 2.0), &g).unwrap();
        let b = certify_gks1(|x: f64| x * x, 0.7, 0.4, (0.0, 2.0), &g).unwrap();
        assert_eq!(a, b);
    }
}
