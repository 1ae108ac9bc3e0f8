//! Singular-kernel quadrature for the unit functional
//! `L[g] = 1/Gamma(alpha) ∫_0^1 (1-u)^(alpha-1) g(u) du`.
//!
//! The substitution `1 - u = w^gamma` turns the kernel into `w^(gamma alpha - 1)`,
//! which is constant for the default `gamma = 1/alpha`. The remaining
//! integral is split at the images of the integrand's breakpoints, and each
//! panel is covered by Gauss–Legendre pieces graded geometrically toward both
//! ends so that algebraic endpoint behaviour of `g` is resolved.

use crate::special::gamma_pos;

/// Ratio between consecutive graded pieces. With 20-point Gauss–Legendre a
/// piece `[r x, x]` integrates `x^beta` to about 1e-14 relative.
const GRADING_RATIO: f64 = 0.15;
const MAX_ORDER: usize = 20;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

pub(crate) struct Rule {
    nodes: Vec<(f64, f64)>,
    levels: usize,
}

impl Rule {
    /// Split a node budget per panel into a Gauss order and a number of
    /// graded levels on each side of the panel midpoint.
    pub(crate) fn new(nodes_per_panel: usize) -> Self {
        let order = MAX_ORDER.min(nodes_per_panel / 2).max(2);
        let levels = (nodes_per_panel / (2 * order)).max(1);
        Rule {
            nodes: gauss_legendre(order),
            levels,
        }
    }

    fn piece<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, f: &mut F) -> f64 {
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        r * self.nodes.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>()
    }

    /// Integral over the interval spanned by `end` and `inner`, graded
    /// toward `end`.
    fn graded<F: FnMut(f64) -> f64>(&self, end: f64, inner: f64, f: &mut F) -> f64 {
        let mut total = 0.0;
        let mut prev = inner;
        for k in 1..=self.levels {
            let p = end + (inner - end) * GRADING_RATIO.powi(k as i32);
            if p == end || p == prev {
                break;
            }
            total += self.piece(p.min(prev), p.max(prev), f);
            prev = p;
        }
        // innermost piece in y with x = end + d y^2, which softens x^beta to y^(2 beta + 1)
        let d = prev - end;
        if d == 0.0 {
            return total;
        }
        let (nodes, r) = (&self.nodes, 0.5);
        total
            + r * nodes
                .iter()
                .map(|&(x, w)| {
                    let y = r * (x + 1.0);
                    let at = end + d * y * y;
                    // a node that rounds onto the end covers less than one ulp
                    if at == end {
                        0.0
                    } else {
                        w * 2.0 * d.abs() * y * f(at)
                    }
                })
                .sum::<f64>()
    }

    /// Integral over [lo, hi], graded toward both ends.
    pub(crate) fn panel<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, f: &mut F) -> f64 {
        let mid = 0.5 * (lo + hi);
        self.graded(lo, mid, f) + self.graded(hi, mid, f)
    }
}

/// `L[g]`, where the closure receives the distance `v = 1 - u` to the kernel
/// end so that callers can evaluate near it without cancellation. `breaks`
/// are breakpoints of `g` in the `u` variable; those outside (0, 1) are
/// ignored.
pub(crate) fn unit_functional<G: Fn(f64) -> f64>(g: G, breaks: &[f64], alpha: f64, gamma: f64, rule: &Rule) -> f64 {
    // panel edges in w = (1 - u)^(1/gamma), ascending
    let mut edges: Vec<f64> = breaks
        .iter()
        .filter(|&&u| u > 0.0 && u < 1.0)
        .map(|&u| (1.0 - u).powf(1.0 / gamma))
        .collect();
    edges.push(0.0);
    edges.push(1.0);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let p = gamma * alpha - 1.0;
    let mut integrand = |w: f64| {
        let weight = if p == 0.0 { 1.0 } else { w.powf(p) };
        weight * g(w.powf(gamma))
    };
    let total: f64 = edges.windows(2).map(|e| rule.panel(e[0], e[1], &mut integrand)).sum();
    gamma * total / gamma_pos(alpha)
}
