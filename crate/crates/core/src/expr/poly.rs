use std::fmt;

use super::{tpow, Expr, ParamExpr};
use crate::error::{domain, Result};
use crate::special::gamma_ratio;

/// Exponent `j + k·alpha + l·alpha·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolicExponent {
    pub j: f64,
    pub k: f64,
    pub l: f64,
}

impl SymbolicExponent {
    pub const ZERO: SymbolicExponent = SymbolicExponent { j: 0.0, k: 0.0, l: 0.0 };

    pub fn constant(j: f64) -> Self {
        SymbolicExponent { j, k: 0.0, l: 0.0 }
    }

    pub fn value(&self, alpha: f64, s: f64) -> f64 {
        self.j + self.k * alpha + self.l * alpha * s
    }

    fn add(self, o: Self) -> Self {
        SymbolicExponent {
            j: self.j + o.j,
            k: self.k + o.k,
            l: self.l + o.l,
        }
    }
}

/// Linear form over the monomials `alpha^i s^j` with `i, j <= 1`, used to keep
/// exponents symbolic through lowering.
#[derive(Debug, Clone, Copy)]
struct Lin([[f64; 2]; 2]);

impl Lin {
    fn konst(c: f64) -> Self {
        Lin([[c, 0.0], [0.0, 0.0]])
    }

    fn from(e: SymbolicExponent) -> Self {
        Lin([[e.j, 0.0], [e.k, e.l]])
    }

    fn to_exponent(self) -> Option<SymbolicExponent> {
        let [[c, s], [a, as_]] = self.0;
        (s == 0.0).then_some(SymbolicExponent { j: c, k: a, l: as_ })
    }

    fn is_const(&self) -> bool {
        self.0[0][1] == 0.0 && self.0[1][0] == 0.0 && self.0[1][1] == 0.0
    }

    fn zip(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(self.0[i][j], o.0[i][j]);
            }
        }
        Lin(out)
    }

    fn mul(self, o: Self) -> Option<Self> {
        let mut out = [[0.0; 2]; 2];
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..2 {
                    for j2 in 0..2 {
                        let c = self.0[i1][j1] * o.0[i2][j2];
                        if c == 0.0 {
                            continue;
                        }
                        if i1 + i2 > 1 || j1 + j2 > 1 {
                            return None;
                        }
                        out[i1 + i2][j1 + j2] += c;
                    }
                }
            }
        }
        Some(Lin(out))
    }

    fn of(p: &ParamExpr) -> Option<Lin> {
        Some(match p {
            ParamExpr::Num(v) => Lin::konst(*v),
            ParamExpr::Alpha => Lin([[0.0, 0.0], [1.0, 0.0]]),
            ParamExpr::S => Lin([[0.0, 1.0], [0.0, 0.0]]),
            ParamExpr::Neg(e) => Lin::of(e)?.zip(Lin::konst(0.0), |a, _| -a),
            ParamExpr::Add(l, r) => Lin::of(l)?.zip(Lin::of(r)?, |a, b| a + b),
            ParamExpr::Sub(l, r) => Lin::of(l)?.zip(Lin::of(r)?, |a, b| a - b),
            ParamExpr::Mul(l, r) => Lin::of(l)?.mul(Lin::of(r)?)?,
            ParamExpr::Div(l, r) => {
                let d = Lin::of(r)?;
                if !d.is_const() || d.0[0][0] == 0.0 {
                    return None;
                }
                let c = d.0[0][0];
                Lin::of(l)?.zip(d, |a, _| a / c)
            }
        })
    }
}

/// Where a term is switched on.
///
/// `RightOf` is the truncated power `(x - shift)_+^kappa`, `LeftOf` is
/// `(shift - x)_+^kappa`. `Full` is the plain power; for a non-integer
/// exponent it is only produced when `shift <= 0`, so that the base is
/// non-negative on the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Full,
    RightOf,
    LeftOf,
}

/// `coeff · (x - shift)^exponent` on its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub shift: f64,
    pub exponent: SymbolicExponent,
    pub support: Support,
}

fn is_int(k: f64) -> bool {
    k.fract() == 0.0 && k.abs() < 1024.0
}

impl Term {
    fn constant(c: f64) -> Self {
        Term {
            coeff: c,
            shift: 0.0,
            exponent: SymbolicExponent::ZERO,
            support: Support::Full,
        }
    }

    pub fn kappa(&self, alpha: f64, s: f64) -> f64 {
        self.exponent.value(alpha, s)
    }

    /// Value of the power without the coefficient.
    pub fn basis(&self, x: f64, kappa: f64) -> f64 {
        match self.support {
            Support::Full => tpow(x - self.shift, kappa),
            Support::RightOf if x >= self.shift => tpow(x - self.shift, kappa),
            Support::LeftOf if x <= self.shift => tpow(self.shift - x, kappa),
            _ => 0.0,
        }
    }
}

/// Finite sum of shifted, possibly truncated powers with bound parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalPoly {
    alpha: f64,
    s: f64,
    terms: Vec<Term>,
}

/// Outcome of [`lower_to_poly`].
#[derive(Debug, Clone, PartialEq)]
pub enum Lowered {
    Poly(FractalPoly),
    NotPolynomial,
}

/// Lower an expression to a [`FractalPoly`] when its structure allows it.
///
/// Affine bases raised to a non-integer power become truncated powers,
/// integer powers are expanded exactly and `abs` is accepted only where the
/// sign of its argument is fixed on the domain.
pub fn lower_to_poly(e: &Expr, alpha: f64, s: f64) -> Lowered {
    match lower(e, alpha, s) {
        Some(p) if p.is_valid() => Lowered::Poly(p),
        _ => Lowered::NotPolynomial,
    }
}

fn lower(e: &Expr, alpha: f64, s: f64) -> Option<FractalPoly> {
    let p = match e {
        Expr::X => FractalPoly::new(
            alpha,
            s,
            vec![Term {
                coeff: 1.0,
                shift: 0.0,
                exponent: SymbolicExponent::constant(1.0),
                support: Support::Full,
            }],
        ),
        Expr::Num(c) => FractalPoly::constant(alpha, s, *c),
        Expr::Neg(e) => lower(e, alpha, s)?.scale(-1.0),
        Expr::Add(l, r) => lower(l, alpha, s)?.add(&lower(r, alpha, s)?),
        Expr::Sub(l, r) => lower(l, alpha, s)?.add(&lower(r, alpha, s)?.scale(-1.0)),
        Expr::Mul(l, r) => lower(l, alpha, s)?.mul(&lower(r, alpha, s)?)?,
        Expr::Abs(e) => lower(e, alpha, s)?.abs_value()?,
        Expr::Pow(b, p) => {
            let base = lower(b, alpha, s)?;
            base.pow(Lin::of(p), p.eval(alpha, s))?
        }
    };
    Some(p)
}

impl FractalPoly {
    pub fn new(alpha: f64, s: f64, terms: Vec<Term>) -> Self {
        let mut p = FractalPoly { alpha, s, terms };
        p.simplify();
        p
    }

    pub fn constant(alpha: f64, s: f64, c: f64) -> Self {
        Self::new(alpha, s, vec![Term::constant(c)])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn kappa(&self, t: &Term) -> f64 {
        t.kappa(self.alpha, self.s)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.basis(x, self.kappa(t))).sum()
    }

    /// Every exponent keeps the power locally integrable and every
    /// coefficient is finite.
    fn is_valid(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.coeff.is_finite() && t.shift.is_finite() && self.kappa(t) > -1.0)
    }

    fn is_const_term(&self, t: &Term) -> bool {
        t.support == Support::Full && self.kappa(t) == 0.0
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.terms
            .iter()
            .all(|t| self.is_const_term(t))
            .then(|| self.terms.iter().map(|t| t.coeff).sum())
    }

    /// `(c0, c1)` with `p(x) = c0 + c1 x` when the polynomial is affine.
    pub fn as_affine(&self) -> Option<(f64, f64)> {
        let (mut c0, mut c1) = (0.0, 0.0);
        for t in &self.terms {
            if t.support != Support::Full {
                return None;
            }
            let k = self.kappa(t);
            if k == 0.0 {
                c0 += t.coeff;
            } else if k == 1.0 {
                c1 += t.coeff;
                c0 -= t.coeff * t.shift;
            } else {
                return None;
            }
        }
        Some((c0, c1))
    }

    /// Kinks and support boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .terms
            .iter()
            .filter(|t| !(t.support == Support::Full && is_int(self.kappa(t))))
            .map(|t| t.shift)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn simplify(&mut self) {
        let (alpha, s) = (self.alpha, self.s);
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for mut t in self.terms.drain(..) {
            let k = t.kappa(alpha, s);
            if t.support == Support::Full && k == 0.0 {
                t.shift = 0.0;
                t.exponent = SymbolicExponent::ZERO;
            }
            t.shift += 0.0; // normalise -0.0
            match merged
                .iter_mut()
                .find(|m| m.support == t.support && m.shift == t.shift && m.kappa(alpha, s) == k)
            {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        self.terms = merged;
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&o.terms);
        Self::new(self.alpha, self.s, terms)
    }

    pub fn scale(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * c,
                ..*t
            })
            .collect();
        Self::new(self.alpha, self.s, terms)
    }

    /// Product, when every pairwise product of terms is representable.
    pub fn mul(&self, o: &Self) -> Option<Self> {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                terms.extend(self.term_mul(a, b)?);
            }
        }
        Some(Self::new(self.alpha, self.s, terms))
    }

    /// `(x - from)^n` rewritten around `to`.
    fn reexpand(&self, t: &Term, n: usize, to: f64) -> Vec<Term> {
        let d = to - t.shift;
        let mut binom = 1.0;
        let mut out = Vec::with_capacity(n + 1);
        for j in 0..=n {
            out.push(Term {
                coeff: t.coeff * binom * d.powi((n - j) as i32),
                shift: to,
                exponent: SymbolicExponent::constant(j as f64),
                support: Support::Full,
            });
            binom = binom * (n - j) as f64 / (j + 1) as f64;
        }
        out
    }

    fn term_mul(&self, a: &Term, b: &Term) -> Option<Vec<Term>> {
        if self.is_const_term(a) {
            return Some(vec![Term {
                coeff: a.coeff * b.coeff,
                ..*b
            }]);
        }
        if self.is_const_term(b) {
            return Some(vec![Term {
                coeff: a.coeff * b.coeff,
                ..*a
            }]);
        }
        if a.shift != b.shift {
            let movable = |t: &Term| {
                let k = self.kappa(t);
                (t.support == Support::Full && is_int(k) && (0.0..=64.0).contains(&k)).then_some(k as usize)
            };
            let (mv, other, n) = match (movable(a), movable(b)) {
                (Some(n), _) => (a, b, n),
                (None, Some(n)) => (b, a, n),
                _ => return None,
            };
            let mut out = Vec::new();
            for t in self.reexpand(mv, n, other.shift) {
                out.extend(self.term_mul(&t, other)?);
            }
            return Some(out);
        }
        use Support::*;
        // a full power with a non-integer exponent vanishes left of its anchor
        let effective = |t: &Term| match t.support {
            Full if !is_int(self.kappa(t)) => RightOf,
            s => s,
        };
        // (x - c)^n (c - x)^k = (-1)^n (c - x)^(n + k)
        let flip = |full: &Term| if self.kappa(full) as i64 % 2 == 0 { 1.0 } else { -1.0 };
        let (support, sign) = match (effective(a), effective(b)) {
            (Full, Full) => (Full, 1.0),
            (Full, LeftOf) => (LeftOf, flip(a)),
            (LeftOf, Full) => (LeftOf, flip(b)),
            (Full, x) | (x, Full) => (x, 1.0),
            (RightOf, RightOf) => (RightOf, 1.0),
            (LeftOf, LeftOf) => (LeftOf, 1.0),
            (RightOf, LeftOf) | (LeftOf, RightOf) => return Some(Vec::new()),
        };
        Some(vec![Term {
            coeff: sign * a.coeff * b.coeff,
            shift: a.shift,
            exponent: a.exponent.add(b.exponent),
            support,
        }])
    }

    /// Single-term view `c (x - mu)^kappa`, turning an affine polynomial into
    /// one shifted linear power.
    fn single_term(&self) -> Option<Term> {
        if let Some((c0, c1)) = self.as_affine() {
            if c1 != 0.0 {
                return Some(Term {
                    coeff: c1,
                    shift: -c0 / c1 + 0.0,
                    exponent: SymbolicExponent::constant(1.0),
                    support: Support::Full,
                });
            }
        }
        match self.terms.as_slice() {
            [t] => Some(*t),
            _ => None,
        }
    }

    /// True when the term's base is non-negative wherever the term is on.
    fn base_nonneg(&self, t: &Term) -> bool {
        match t.support {
            Support::RightOf | Support::LeftOf => true,
            Support::Full => {
                let k = self.kappa(t);
                t.shift <= 0.0 || !is_int(k) || (k as i64) % 2 == 0
            }
        }
    }

    fn abs(&self) -> Option<Self> {
        if let Some(c) = self.as_constant() {
            return Some(Self::constant(self.alpha, self.s, c.abs()));
        }
        let t = self.single_term()?;
        self.base_nonneg(&t).then(|| {
            Self::new(
                self.alpha,
                self.s,
                vec![Term {
                    coeff: t.coeff.abs(),
                    ..t
                }],
            )
        })
    }

    fn pow(&self, sym: Option<Lin>, p: f64) -> Option<Self> {
        let (alpha, s) = (self.alpha, self.s);
        if let Some(c) = self.as_constant() {
            return Some(Self::constant(alpha, s, tpow(c, p)));
        }
        if let Some(t) = self.single_term() {
            let k = self.kappa(&t);
            // keep the exponent symbolic while it stays in span{1, alpha, alpha s}
            let exponent = sym
                .and_then(|l| Lin::from(t.exponent).mul(l))
                .and_then(Lin::to_exponent)
                .unwrap_or(SymbolicExponent::constant(k * p));
            let integer_p = is_int(p);
            let term = |coeff: f64, support: Support| Term {
                coeff,
                shift: t.shift,
                exponent,
                support,
            };
            if integer_p && t.support == Support::Full && is_int(k) {
                return Some(Self::new(alpha, s, vec![term(t.coeff.powi(p as i32), Support::Full)]));
            }
            if integer_p && t.support != Support::Full {
                return Some(Self::new(alpha, s, vec![term(t.coeff.powi(p as i32), t.support)]));
            }
            // non-integer power from here on
            if t.support == Support::Full && is_int(k) && t.shift > 0.0 {
                // base c (x - mu)^k changes sign at mu only for odd k
                if k as i64 % 2 == 0 {
                    return None;
                }
                return if t.coeff > 0.0 {
                    Some(Self::new(alpha, s, vec![term(t.coeff.powf(p), Support::RightOf)]))
                } else {
                    Some(Self::new(alpha, s, vec![term((-t.coeff).powf(p), Support::LeftOf)]))
                };
            }
            if t.coeff > 0.0 {
                return Some(Self::new(alpha, s, vec![term(t.coeff.powf(p), t.support)]));
            }
            if t.support == Support::Full && k == 1.0 && p > 0.0 {
                // negative slope through mu <= 0: base negative on the whole domain
                return Some(Self::new(alpha, s, Vec::new()));
            }
            return None;
        }
        if is_int(p) && (0.0..=16.0).contains(&p) {
            let mut acc = Self::constant(alpha, s, 1.0);
            for _ in 0..p as usize {
                acc = acc.mul(self)?;
            }
            return Some(acc);
        }
        None
    }

    /// `x ↦ f(m·x + k)` for `m != 0`.
    pub fn compose_affine(&self, m: f64, k: f64) -> Result<Self> {
        if m == 0.0 || !m.is_finite() || !k.is_finite() {
            return Err(domain(format!("affine map needs a finite non-zero slope, got {m}")));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let kappa = self.kappa(t);
            let shift = (t.shift - k) / m;
            let (coeff, support) = if m > 0.0 {
                (t.coeff * m.powf(kappa), t.support)
            } else if t.support == Support::Full && is_int(kappa) {
                (t.coeff * m.powi(kappa as i32), Support::Full)
            } else {
                let flipped = match t.support {
                    Support::RightOf | Support::Full => Support::LeftOf,
                    Support::LeftOf => Support::RightOf,
                };
                (t.coeff * (-m).powf(kappa), flipped)
            };
            terms.push(Term {
                coeff,
                shift,
                exponent: t.exponent,
                support,
            });
        }
        Ok(Self::new(self.alpha, self.s, terms))
    }

    /// Polynomial with all full integer powers expanded around the origin.
    fn expand_at_origin(&self) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            let k = self.kappa(t);
            if t.support == Support::Full && is_int(k) && k >= 0.0 && t.shift != 0.0 {
                terms.extend(self.reexpand(t, k as usize, 0.0));
            } else {
                terms.push(*t);
            }
        }
        Self::new(self.alpha, self.s, terms)
    }

    /// Local fractional derivative by the termwise power rule
    /// `D (x - mu)^k = Gamma(1+k)/Gamma(1+k-alpha) (x - mu)^(k-alpha)`.
    ///
    /// Ordinary polynomial parts are expanded around the origin first, so
    /// they are differentiated from 0. Truncated powers are differentiated
    /// from their own anchor; left-truncated powers pick up a sign.
    pub fn lfd_exact(&self) -> Result<Self> {
        let alpha = self.alpha;
        let mut terms = Vec::new();
        for t in &self.expand_at_origin().terms {
            let k = self.kappa(t);
            if k == 0.0 {
                continue;
            }
            if !(1.0 + k - alpha > 0.0) || !(k - alpha > -1.0) {
                return Err(domain(format!(
                    "power rule needs kappa - alpha > -1, got kappa = {k}, alpha = {alpha}"
                )));
            }
            let g = gamma_ratio(1.0 + k, 1.0 + k - alpha)?;
            let sign = if t.support == Support::LeftOf { -1.0 } else { 1.0 };
            terms.push(Term {
                coeff: sign * g * t.coeff,
                shift: t.shift,
                exponent: SymbolicExponent {
                    k: t.exponent.k - 1.0,
                    ..t.exponent
                },
                support: t.support,
            });
        }
        Ok(Self::new(alpha, self.s, terms))
    }

    /// `|f|` when the sign of `f` is fixed on the domain.
    pub fn abs_value(&self) -> Option<Self> {
        if self.terms.iter().all(|t| self.base_nonneg(t)) {
            if self.terms.iter().all(|t| t.coeff >= 0.0) {
                return Some(self.clone());
            }
            if self.terms.iter().all(|t| t.coeff <= 0.0) {
                return Some(self.scale(-1.0));
            }
        }
        self.abs()
    }

    /// `|f|^p` when representable.
    pub fn abs_pow(&self, p: f64) -> Option<Self> {
        self.abs_value()?.pow(Some(Lin::konst(p)), p).filter(|q| q.is_valid())
    }
}

impl fmt::Display for FractalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let k = self.kappa(t);
            if k == 0.0 && t.support == Support::Full {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            match t.support {
                Support::LeftOf => write!(f, "{}*({} - x)^({})", t.coeff, t.shift, k)?,
                _ if t.shift == 0.0 => write!(f, "{}*x^({})", t.coeff, k)?,
                _ => write!(f, "{}*(x - {})^({})", t.coeff, t.shift, k)?,
            }
            match t.support {
                Support::RightOf => write!(f, "[x >= {}]", t.shift)?,
                Support::LeftOf => write!(f, "[x <= {}]", t.shift)?,
                Support::Full => {}
            }
        }
        Ok(())
    }
}
