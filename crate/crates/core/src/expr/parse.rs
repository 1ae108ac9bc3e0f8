use super::{Expr, ParamExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    X,
    A,
    S,
    Abs,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self, src: &str, offset: usize) -> String {
        match self {
            Tok::End => "end of input".into(),
            _ => {
                let rest = &src[offset..];
                let len = rest
                    .char_indices()
                    .skip(1)
                    .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '.'))
                    .map_or(rest.len(), |(i, _)| i);
                let len = if matches!(self, Tok::Num(_) | Tok::Abs) { len } else { 1 };
                format!("'{}'", &rest[..len])
            }
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // optional exponent: e, E followed by digits with an optional sign
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("'{text}'"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let tok = match &src[start..i] {
                    "x" => Tok::X,
                    "a" => Tok::A,
                    "s" => Tok::S,
                    "abs" => Tok::Abs,
                    other => {
                        return Err(Error::Syntax {
                            offset: start,
                            expected: vec!["x".into(), "a".into(), "s".into(), "abs".into()],
                            found: format!("'{other}'"),
                        })
                    }
                };
                out.push((tok, start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    expected: vec!["operator".into(), "operand".into()],
                    found: format!("'{ch}'"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

/// Parse a test-function expression.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        src,
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek() != Tok::End {
        return Err(p.unexpected(&["+", "-", "*", "^", "end of input"]));
    }
    Ok(e)
}

impl Parser<'_> {
    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(self.src, self.offset()),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<()> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp = match self.peek() {
            Tok::LParen => {
                self.bump();
                let e = self.param_expr()?;
                self.expect(Tok::RParen, ")")?;
                e
            }
            Tok::Num(v) => {
                self.bump();
                ParamExpr::Num(v)
            }
            Tok::A => {
                self.bump();
                ParamExpr::Alpha
            }
            Tok::S => {
                self.bump();
                ParamExpr::S
            }
            Tok::X => return Err(self.x_in_exponent()),
            _ => return Err(self.unexpected(&["(", "number", "a", "s"])),
        };
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::X => {
                self.bump();
                Ok(Expr::X)
            }
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(e)
            }
            Tok::Abs => {
                self.bump();
                self.expect(Tok::LParen, "(")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Tok::A | Tok::S => Err(Error::UnsupportedForm {
                offset: self.offset(),
                reason: "parameters a and s may appear only in exponents".into(),
            }),
            _ => Err(self.unexpected(&["x", "number", "(", "abs"])),
        }
    }

    fn x_in_exponent(&self) -> Error {
        Error::UnsupportedForm {
            offset: self.offset(),
            reason: "the variable x may not appear in an exponent".into(),
        }
    }

    fn param_expr(&mut self) -> Result<ParamExpr> {
        let mut lhs = self.param_term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ParamExpr::Add(Box::new(lhs), Box::new(self.param_term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ParamExpr::Sub(Box::new(lhs), Box::new(self.param_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn param_term(&mut self) -> Result<ParamExpr> {
        let mut lhs = self.param_unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = ParamExpr::Mul(Box::new(lhs), Box::new(self.param_unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = ParamExpr::Div(Box::new(lhs), Box::new(self.param_unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn param_unary(&mut self) -> Result<ParamExpr> {
        if self.peek() == Tok::Minus {
            self.bump();
            return Ok(ParamExpr::Neg(Box::new(self.param_unary()?)));
        }
        self.param_atom()
    }

    fn param_atom(&mut self) -> Result<ParamExpr> {
        match self.bump() {
            Tok::Num(v) => Ok(ParamExpr::Num(v)),
            Tok::A => Ok(ParamExpr::Alpha),
            Tok::S => Ok(ParamExpr::S),
            Tok::LParen => {
                let e = self.param_expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(e)
            }
            Tok::X => {
                self.pos -= 1;
                Err(self.x_in_exponent())
            }
            Tok::End => Err(self.unexpected(&["number", "a", "s", "("])),
            _ => {
                self.pos -= 1;
                Err(self.unexpected(&["number", "a", "s", "("]))
            }
        }
    }
}
