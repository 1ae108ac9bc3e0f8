//! Test-function layer.
//!
//! Functions are written in a small expression language over the variable
//! `x`, lowered when possible to a [`FractalPoly`] (a finite sum of shifted
//! and possibly truncated powers) and wrapped in a [`FunctionHandle`] that
//! binds the parameters `alpha` (spelled `a`) and `s`.
//!
//! ```text
//! expr       := term (('+' | '-') term)*
//! term       := unary ('*' unary)*
//! unary      := ['-'] factor
//! factor     := atom ['^' exponent]
//! exponent   := '(' param_expr ')' | number | 'a' | 's'
//! atom       := 'x' | number | '(' expr ')' | 'abs' '(' expr ')'
//! param_expr := arithmetic over numbers, 'a' and 's' with + - * / and parentheses
//! ```

mod certify;
mod parse;
mod poly;

use std::fmt;

pub use certify::{certify_gks1, certify_gks2, estimate_holder, CertGrid, CertReport, Sense};
pub use parse::parse;
pub use poly::{lower_to_poly, FractalPoly, Lowered, Support, SymbolicExponent, Term};

use crate::error::{domain, Result};

/// Arithmetic over the symbolic parameters; appears only in exponents.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamExpr {
    Num(f64),
    Alpha,
    S,
    Neg(Box<ParamExpr>),
    Add(Box<ParamExpr>, Box<ParamExpr>),
    Sub(Box<ParamExpr>, Box<ParamExpr>),
    Mul(Box<ParamExpr>, Box<ParamExpr>),
    Div(Box<ParamExpr>, Box<ParamExpr>),
}

impl ParamExpr {
    pub fn eval(&self, alpha: f64, s: f64) -> f64 {
        match self {
            ParamExpr::Num(v) => *v,
            ParamExpr::Alpha => alpha,
            ParamExpr::S => s,
            ParamExpr::Neg(e) => -e.eval(alpha, s),
            ParamExpr::Add(l, r) => l.eval(alpha, s) + r.eval(alpha, s),
            ParamExpr::Sub(l, r) => l.eval(alpha, s) - r.eval(alpha, s),
            ParamExpr::Mul(l, r) => l.eval(alpha, s) * r.eval(alpha, s),
            ParamExpr::Div(l, r) => l.eval(alpha, s) / r.eval(alpha, s),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ParamExpr::Add(..) | ParamExpr::Sub(..) => 1,
            ParamExpr::Mul(..) | ParamExpr::Div(..) => 2,
            ParamExpr::Neg(_) => 3,
            _ => 4,
        }
    }
}

/// Parsed test function.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    X,
    Num(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Pow(Box<Expr>, ParamExpr),
}

impl Expr {
    /// Pointwise value with parameters bound. Powers of a negative base with
    /// a non-integer exponent are 0 (truncated-power convention).
    pub fn eval(&self, x: f64, alpha: f64, s: f64) -> f64 {
        match self {
            Expr::X => x,
            Expr::Num(v) => *v,
            Expr::Neg(e) => -e.eval(x, alpha, s),
            Expr::Add(l, r) => l.eval(x, alpha, s) + r.eval(x, alpha, s),
            Expr::Sub(l, r) => l.eval(x, alpha, s) - r.eval(x, alpha, s),
            Expr::Mul(l, r) => l.eval(x, alpha, s) * r.eval(x, alpha, s),
            Expr::Abs(e) => e.eval(x, alpha, s).abs(),
            Expr::Pow(b, p) => tpow(b.eval(x, alpha, s), p.eval(alpha, s)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Abscissae where the expression may have a kink or a support boundary:
    /// roots of affine bases under `abs` and under non-integer powers.
    pub fn breakpoints(&self, alpha: f64, s: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(alpha, s, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, alpha: f64, s: f64, out: &mut Vec<f64>) {
        match self {
            Expr::X | Expr::Num(_) => {}
            Expr::Neg(e) => e.collect_breakpoints(alpha, s, out),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => {
                l.collect_breakpoints(alpha, s, out);
                r.collect_breakpoints(alpha, s, out);
            }
            Expr::Abs(e) | Expr::Pow(e, _) => {
                if let Lowered::Poly(p) = lower_to_poly(e, alpha, s) {
                    if let Some((c0, c1)) = p.as_affine() {
                        if c1 != 0.0 {
                            out.push(-c0 / c1);
                        }
                    }
                    out.extend(p.terms().iter().map(|t| t.shift).filter(|&m| m != 0.0));
                }
                e.collect_breakpoints(alpha, s, out);
            }
        }
    }
}

/// `base^p` with integer powers computed exactly and non-integer powers of
/// negative bases mapped to 0.
pub(crate) fn tpow(base: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if p.fract() == 0.0 && p.abs() < 1024.0 {
        return base.powi(p as i32);
    }
    if base >= 0.0 {
        base.powf(p)
    } else {
        0.0
    }
}

fn fmt_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v < 0.0 {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &ParamExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            ParamExpr::Num(v) => fmt_num(f, *v),
            ParamExpr::Alpha => write!(f, "a"),
            ParamExpr::S => write!(f, "s"),
            ParamExpr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, 4)
            }
            ParamExpr::Add(l, r) | ParamExpr::Sub(l, r) => {
                child(f, l, 1)?;
                write!(f, " {} ", if matches!(self, ParamExpr::Add(..)) { "+" } else { "-" })?;
                child(f, r, 2)
            }
            ParamExpr::Mul(l, r) | ParamExpr::Div(l, r) => {
                child(f, l, 2)?;
                write!(f, " {} ", if matches!(self, ParamExpr::Mul(..)) { "*" } else { "/" })?;
                child(f, r, 3)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::X => write!(f, "x"),
            Expr::Num(v) => fmt_num(f, *v),
            Expr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, 4)
            }
            Expr::Add(l, r) => {
                child(f, l, 1)?;
                write!(f, " + ")?;
                child(f, r, 2)
            }
            Expr::Sub(l, r) => {
                child(f, l, 1)?;
                write!(f, " - ")?;
                child(f, r, 2)
            }
            Expr::Mul(l, r) => {
                child(f, l, 2)?;
                write!(f, " * ")?;
                child(f, r, 3)
            }
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Pow(b, p) => {
                child(f, b, 5)?;
                write!(f, "^({p})")
            }
        }
    }
}

/// A test function with its parameters bound.
///
/// Parsed functions keep their syntax tree, which defines pointwise values;
/// the polynomial lowering, when it exists, is what the closed-form backend
/// integrates. Handles built from a polynomial (derivatives, compositions)
/// carry no syntax tree.
#[derive(Debug, Clone)]
pub struct FunctionHandle {
    text: String,
    ast: Option<Expr>,
    alpha: f64,
    s: f64,
    poly: Option<FractalPoly>,
}

impl FunctionHandle {
    pub fn parse(text: &str, alpha: f64, s: f64) -> Result<Self> {
        let ast = parse(text)?;
        Ok(Self::from_ast(text.to_string(), ast, alpha, s))
    }

    pub fn from_ast(text: String, ast: Expr, alpha: f64, s: f64) -> Self {
        let poly = match lower_to_poly(&ast, alpha, s) {
            Lowered::Poly(p) => Some(p),
            Lowered::NotPolynomial => None,
        };
        FunctionHandle {
            text,
            ast: Some(ast),
            alpha,
            s,
            poly,
        }
    }

    pub fn from_poly(poly: FractalPoly) -> Self {
        FunctionHandle {
            text: poly.to_string(),
            ast: None,
            alpha: poly.alpha(),
            s: poly.s(),
            poly: Some(poly),
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn ast(&self) -> Option<&Expr> {
        self.ast.as_ref()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn poly(&self) -> Option<&FractalPoly> {
        self.poly.as_ref()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("functions are defined on [0, inf), got x = {x}")));
        }
        Ok(self.value(x))
    }

    /// Pointwise value without the domain check.
    pub fn value(&self, x: f64) -> f64 {
        match (&self.ast, &self.poly) {
            (Some(ast), _) => ast.eval(x, self.alpha, self.s),
            (None, Some(p)) => p.eval(x),
            (None, None) => unreachable!("handle without representation"),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match (&self.ast, &self.poly) {
            (_, Some(p)) => p.breakpoints(),
            (Some(ast), None) => ast.breakpoints(self.alpha, self.s),
            (None, None) => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn handle(t: &str, alpha: f64, s: f64) -> FunctionHandle {
        FunctionHandle::parse(t, alpha, s).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((handle("x^(s*a)", 0.5, 0.5).eval(16.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(handle("3", 0.5, 0.5).eval(123.0).unwrap(), 3.0);
        assert_eq!(handle("(x-1)^(2*a)", 0.3, 0.5).eval(0.5).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_negative_x() {
        assert!(handle("x", 0.5, 0.5).eval(-1.0).is_err());
        assert!(handle("x", 0.5, 0.5).eval(f64::NAN).is_err());
    }

    #[test]
    fn poly_and_ast_agree_on_default_families() {
        for text in [
            "x^(s*a)",
            "2*x^a - x^(2*a)",
            "(x-0.5)^(2*a) + 3",
            "(1-x)^(a)",
            "(2*x+1)^(s)",
        ] {
            let h = handle(text, 0.6, 0.7);
            let p = h.poly().expect(text);
            for i in 0..=400 {
                let x = i as f64 / 100.0;
                let want = h.ast().unwrap().eval(x, 0.6, 0.7);
                assert!((p.eval(x) - want).abs() <= 1e-12 * (1.0 + want.abs()), "{text} at {x}");
            }
        }
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "x^(s*a)",
            "-(x + 1) * 2 - 3",
            "abs(1 - 2 * x)^(a)",
            "x - (x - x)",
            "-(-x)",
            "x^(-a / (2 - s))",
        ] {
            let ast = parse(text).unwrap();
            assert_eq!(parse(&ast.to_string()).unwrap(), ast, "{text} -> {ast}");
        }
    }

    #[test]
    fn breakpoints_of_abs_and_truncated_powers() {
        let h = handle("abs(1-2*x)^a", 0.5, 0.5);
        assert!(h.poly().is_none());
        assert_eq!(h.breakpoints(), vec![0.5]);
        assert_eq!(handle("(x-0.25)^(a)", 0.5, 0.5).breakpoints(), vec![0.25]);
    }
}
