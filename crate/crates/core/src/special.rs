//! Gamma, log-Gamma, Beta and Gamma ratios on the positive real axis.
//!
//! Every constant that appears in the inequalities of this crate is a ratio
//! of Gamma values at arguments `1 + k·alpha`, so the arguments are always
//! positive. There is no reflection formula: non-positive arguments are a
//! domain error.
//!
//! The evaluation is a Lanczos approximation (g = 10.900511, 11 terms)
//! applied on [1, 2] after reduction with the recurrence, whose accuracy is checked against a 20-digit reference table in
//! `data/gamma_reference.txt`.

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 10.900511;

#[allow(clippy::excessive_precision)]
const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

/// 2·sqrt(e/pi)
#[allow(clippy::excessive_precision)]
const TWO_SQRT_E_OVER_PI: f64 = 1.8603827342052657173362492472666631120594218414085755;

/// Arguments up to this value are reduced to [1, 2] before the Lanczos sum.
const REDUCTION_LIMIT: f64 = 160.0;

/// Largest integer gap for which [`gamma_ratio`] uses the exact recurrence.
const RECURRENCE_LIMIT: f64 = 64.0;

/// A validated argument of the Gamma function: finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GammaArg(f64);

impl GammaArg {
    pub fn new(x: f64) -> Result<Self> {
        if x.is_finite() && x > 0.0 {
            Ok(GammaArg(x))
        } else {
            Err(domain(format!("Gamma argument must be finite and positive, got {x}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0))
}

/// Gamma for x >= 0.5 without argument checks.
fn gamma_large(x: f64) -> f64 {
    let base = (x - 0.5 + LANCZOS_G) / std::f64::consts::E;
    // split the power so that x up to ~171 does not overflow early
    let half = base.powf(0.5 * (x - 0.5));
    lanczos_sum(x) * TWO_SQRT_E_OVER_PI * half * half
}

fn ln_gamma_large(x: f64) -> f64 {
    let base = (x - 0.5 + LANCZOS_G) / std::f64::consts::E;
    (lanczos_sum(x) * TWO_SQRT_E_OVER_PI).ln() + (x - 0.5) * base.ln()
}

pub(crate) fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x.fract() == 0.0 && x <= 171.0 {
        // (n-1)! is exact in f64 up to 22!
        return (1..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        gamma_large(x + 1.0) / x
    } else if x <= REDUCTION_LIMIT {
        // Lanczos is most accurate on [1, 2]; walk down with the recurrence
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.0 {
            y -= 1.0;
            prod *= y;
        }
        prod * gamma_large(y)
    } else {
        gamma_large(x)
    }
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if (0.5..=REDUCTION_LIMIT).contains(&x) {
        return gamma_pos(x).ln();
    }
    if x < 0.5 {
        ln_gamma_large(x + 1.0) - x.ln()
    } else {
        ln_gamma_large(x)
    }
}

pub(crate) fn gamma_ratio_pos(p: f64, q: f64) -> f64 {
    let gap = q - p;
    if gap.fract() == 0.0 && gap.abs() <= RECURRENCE_LIMIT {
        // Gamma(p)/Gamma(p+n) = 1 / (p (p+1) ... (p+n-1))
        let n = gap.abs() as usize;
        let lo = p.min(q);
        let prod = (0..n).fold(1.0, |acc, i| acc * (lo + i as f64));
        return if gap >= 0.0 { 1.0 / prod } else { prod };
    }
    if p < 170.0 && q < 170.0 {
        let direct = gamma_pos(p) / gamma_pos(q);
        if direct.is_finite() && direct > 0.0 {
            return direct;
        }
    }
    (ln_gamma_pos(p) - ln_gamma_pos(q)).exp()
}

/// Gamma(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    GammaArg::new(x).map(|a| gamma_pos(a.value()))
}

/// ln Gamma(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    GammaArg::new(x).map(|a| ln_gamma_pos(a.value()))
}

/// Gamma(p) / Gamma(q).
///
/// Integer gaps up to 64 go through the recurrence `Gamma(x+1) = x Gamma(x)`
/// so that e.g. `gamma_ratio(1.5, 2.5)` is `1/1.5` to the last bit. Other
/// ratios use the quotient of Lanczos values while both are representable and
/// fall back to the difference of logarithms otherwise.
pub fn gamma_ratio(p: f64, q: f64) -> Result<f64> {
    let p = GammaArg::new(p)?.value();
    let q = GammaArg::new(q)?.value();
    Ok(gamma_ratio_pos(p, q))
}

/// Euler Beta function B(p, q) = Gamma(p) Gamma(q) / Gamma(p + q).
pub fn beta(p: f64, q: f64) -> Result<f64> {
    let p = GammaArg::new(p)?.value();
    let q = GammaArg::new(q)?.value();
    Ok(beta_pos(p, q))
}

pub(crate) fn beta_pos(p: f64, q: f64) -> f64 {
    let s = p + q;
    if s < 170.0 {
        // product of the two smaller factors first keeps beta(p,q) == beta(q,p)
        (gamma_pos(p) * gamma_pos(q)) / gamma_pos(s)
    } else {
        (ln_gamma_pos(p) + ln_gamma_pos(q) - ln_gamma_pos(s)).exp()
    }
}

/// Parse a reference table: one `x value` pair per line, `#` starts a comment.
pub fn parse_reference_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |c: Option<&str>| -> Result<f64> {
            c.and_then(|c| c.parse::<f64>().ok()).ok_or_else(|| {
                crate::Error::Config(format!("reference table line {}: expected two numbers", lineno + 1))
            })
        };
        let x = parse(cols.next())?;
        let g = parse(cols.next())?;
        rows.push((x, g));
    }
    Ok(rows)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // reference values keep their mpmath digits
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn small_integers_and_half() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert!(rel(gamma(6.0).unwrap(), 120.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
    }

    #[test]
    fn log_gamma_examples() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        // ln(10!)
        assert!(rel(log_gamma(11.0).unwrap(), 15.104412573075516) < 1e-14);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(gamma_ratio(1.5, 2.5).unwrap(), 1.0 / 1.5);
        assert_eq!(gamma_ratio(2.0, 3.0).unwrap(), 0.5);
        // mpmath: Gamma(1.25)/Gamma(1.75)
        assert!(rel(gamma_ratio(1.25, 1.75).unwrap(), 0.98622503972954629744) < 1e-13);
    }

    #[test]
    fn beta_examples() {
        assert!(rel(beta(1.0, 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(beta(2.0, 1.0).unwrap(), 0.5) < 1e-14);
        assert!(rel(beta(0.5, 0.5).unwrap(), std::f64::consts::PI) < 1e-13);
    }

    #[test]
    fn rejects_non_positive() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(gamma(x).is_err());
            assert!(log_gamma(x).is_err());
        }
        assert!(gamma_ratio(1.0, 0.0).is_err());
        assert!(beta(-0.5, 1.0).is_err());
    }

    #[test]
    fn recurrence_grid() {
        for i in 1..=200 {
            let x = i as f64 / 10.0;
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(rel(rhs, lhs) <= 1e-12, "x = {x}");
            let r = gamma_ratio(x, x + 0.37).unwrap() * gamma(x + 0.37).unwrap();
            assert!(rel(r, gamma(x).unwrap()) <= 1e-11, "x = {x}");
        }
    }

    #[test]
    fn exp_log_gamma_matches_gamma() {
        for i in 1..=300 {
            let x = i as f64 / 6.0;
            let g = gamma(x).unwrap();
            assert!(rel(log_gamma(x).unwrap().exp(), g) < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn reference_table_parses_comments() {
        let rows = parse_reference_table("# header\n1 1\n\n0.5 1.77  # trailing\n").unwrap();
        assert_eq!(rows, vec![(1.0, 1.0), (0.5, 1.77)]);
        assert!(parse_reference_table("1\n").is_err());
    }
}
