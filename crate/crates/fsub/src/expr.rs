//! Arithmetic expressions in the chart coordinates `x0, x1, …`, evaluated
//! over any [`Scalar`].
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary `- +`, `^`
//! (right associative), then calls and parentheses. So `-x0^2` is
//! `-(x0^2)` and `2^-1` is `0.5`.

use std::collections::HashMap;

use thiserror::Error;

use crate::jets::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{msg} at column {}", pos + 1)]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply<S: Scalar>(self, a: &S) -> S {
        match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Tan => a.tan(),
            Func::Exp => a.exp(),
            Func::Ln => a.ln(),
            Func::Sqrt => a.sqrt(),
            Func::Sinh => a.sinh(),
            Func::Cosh => a.cosh(),
            Func::Tanh => a.tanh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Value at `x`; the first entry of `x` also fixes the scalar kind.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Expr::Num(c) => x[0].cst(*c),
            Expr::Var(i) => x[*i].clone(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => match (&**a, &**b) {
                (Expr::Num(c), e) | (e, Expr::Num(c)) => e.eval(x) * *c,
                _ => a.eval(x) * b.eval(x),
            },
            Expr::Div(a, b) => match &**b {
                Expr::Num(c) => a.eval(x) / *c,
                _ => a.eval(x) / b.eval(x),
            },
            Expr::Pow(a, b) => match b.constant() {
                Some(p) if p.fract() == 0.0 && p.abs() <= 64.0 => a.eval(x).powi(p as i32),
                Some(p) => a.eval(x).powf(p),
                None => (b.eval(x) * a.eval(x).ln()).exp(),
            },
            Expr::Call(f, a) => f.apply(&a.eval(x)),
        }
    }

    /// Value when the expression does not involve any variable.
    pub fn constant(&self) -> Option<f64> {
        Some(match self {
            Expr::Num(c) => *c,
            Expr::Var(_) => return None,
            Expr::Neg(a) => -a.constant()?,
            Expr::Add(a, b) => a.constant()? + b.constant()?,
            Expr::Sub(a, b) => a.constant()? - b.constant()?,
            Expr::Mul(a, b) => a.constant()? * b.constant()?,
            Expr::Div(a, b) => a.constant()? / b.constant()?,
            Expr::Pow(a, b) => a.constant()?.powf(b.constant()?),
            Expr::Call(f, a) => f.apply(&a.constant()?),
        })
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by a digit
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| ExprError {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprError {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// Named subexpressions, substituted where they are referenced.
#[derive(Clone, Debug, Default)]
pub struct Definitions {
    src: HashMap<String, String>,
}

impl Definitions {
    pub fn new(src: HashMap<String, String>) -> Definitions {
        Definitions { src }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    nvars: usize,
    defs: &'a Definitions,
    stack: &'a mut Vec<String>,
    cache: &'a mut HashMap<String, Expr>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            // the exponent may carry its own sign and chains to the right
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(ExprError {
                            pos,
                            msg: format!("unknown function `{name}`"),
                        });
                    };
                    self.at += 1;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                self.name(&name, pos)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn name(&mut self, name: &str, pos: usize) -> Result<Expr, ExprError> {
        match name {
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if idx >= self.nvars {
                return Err(ExprError {
                    pos,
                    msg: format!("`{name}` out of range for {} coordinates", self.nvars),
                });
            }
            return Ok(Expr::Var(idx));
        }
        if let Some(e) = self.cache.get(name) {
            return Ok(e.clone());
        }
        let Some(src) = self.defs.src.get(name) else {
            return Err(ExprError {
                pos,
                msg: format!("unknown name `{name}`"),
            });
        };
        if self.stack.iter().any(|s| s == name) {
            return Err(ExprError {
                pos,
                msg: format!("definition cycle through `{name}`"),
            });
        }
        self.stack.push(name.to_string());
        let e = parse_inner(src, self.nvars, self.defs, self.stack, self.cache).map_err(|inner| ExprError {
            pos,
            msg: format!("in definition `{name}`: {inner}"),
        })?;
        self.stack.pop();
        self.cache.insert(name.to_string(), e.clone());
        Ok(e)
    }
}

fn parse_inner(
    src: &str,
    nvars: usize,
    defs: &Definitions,
    stack: &mut Vec<String>,
    cache: &mut HashMap<String, Expr>,
) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
        nvars,
        defs,
        stack,
        cache,
    };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses `src` over `nvars` coordinates with the given definitions.
pub fn parse(src: &str, nvars: usize, defs: &Definitions) -> Result<Expr, ExprError> {
    parse_inner(src, nvars, defs, &mut Vec::new(), &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        parse(s, x.len(), &Definitions::default()).unwrap().eval(x)
    }

    #[test]
    fn precedence_table() {
        assert_eq!(ev("1 + 2 * 3", &[0.0]), 7.0);
        assert_eq!(ev("-2^2", &[0.0]), -4.0);
        assert_eq!(ev("2^3^2", &[0.0]), 512.0);
        assert_eq!(ev("2^-1", &[0.0]), 0.5);
        assert_eq!(ev("8 / 4 / 2", &[0.0]), 1.0);
        assert_eq!(ev("10 - 4 - 3", &[0.0]), 3.0);
        assert_eq!(ev("(1 + 2) * 3", &[0.0]), 9.0);
        assert_eq!(ev("- -3", &[0.0]), 3.0);
        assert_eq!(ev("1.5e-1 * 2", &[0.0]), 0.3);
    }

    #[test]
    fn variables_functions_constants() {
        let x = [0.3, -1.2];
        assert!((ev("sin(x0) * cos(x1) + exp(x1) - ln(2)", &x) - (0.3f64.sin() * (-1.2f64).cos() + (-1.2f64).exp() - 2f64.ln())).abs() < 1e-15);
        assert!((ev("2 * pi", &x) - std::f64::consts::TAU).abs() < 1e-15);
        assert!((ev("x0^x0", &x) - 0.3f64.powf(0.3)).abs() < 1e-15);
        assert!((ev("sqrt(x0) + tanh(x1) + sinh(1) + cosh(1) + tan(x0)", &x)
            - (0.3f64.sqrt() + (-1.2f64).tanh() + 1f64.sinh() + 1f64.cosh() + 0.3f64.tan()))
        .abs()
            < 1e-15);
    }

    #[test]
    fn definitions_inline_and_detect_cycles() {
        let mut m = HashMap::new();
        m.insert("f".to_string(), "1 + 0.2 * sin(x0)".to_string());
        m.insert("g".to_string(), "f^2".to_string());
        let d = Definitions::new(m);
        let e = parse("g * x1", 2, &d).unwrap();
        let f = 1.0 + 0.2 * 0.5f64.sin();
        assert!((e.eval(&[0.5, 2.0]) - f * f * 2.0).abs() < 1e-15);

        let mut m = HashMap::new();
        m.insert("a".to_string(), "b + 1".to_string());
        m.insert("b".to_string(), "a".to_string());
        let err = parse("a", 1, &Definitions::new(m)).unwrap_err();
        assert!(err.msg.contains("cycle"), "{err}");
    }

    #[test]
    fn errors_carry_positions() {
        let d = Definitions::default();
        assert_eq!(parse("1 + ", 1, &d).unwrap_err().pos, 4);
        assert_eq!(parse("x0 $ 2", 1, &d).unwrap_err().pos, 3);
        assert_eq!(parse("x3", 2, &d).unwrap_err().pos, 0);
        assert_eq!(parse("foo(1)", 1, &d).unwrap_err().pos, 0);
        assert_eq!(parse("(1 + 2", 1, &d).unwrap_err().pos, 6);
        assert_eq!(parse("1 2", 1, &d).unwrap_err().pos, 2);
    }

    #[test]
    fn jets_match_floats() {
        use crate::jets::Jet;
        let e = parse("x0^2 * sin(x1) / (1 + x0)", 2, &Definitions::default()).unwrap();
        let xs = [Jet::variable(2, 2, 0, 0.4), Jet::variable(2, 2, 1, 0.7)];
        let j = e.eval(&xs);
        let f = |a: f64, b: f64| a * a * b.sin() / (1.0 + a);
        assert!((j.value() - f(0.4, 0.7)).abs() < 1e-15);
        let h = 1e-6;
        let d0 = (f(0.4 + h, 0.7) - f(0.4 - h, 0.7)) / (2.0 * h);
        assert!((j.gradient()[0] - d0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn sums_and_products_of_literals(a in -50.0f64..50.0, b in -50.0f64..50.0, c in 0.5f64..5.0) {
            let s = format!("({a}) + ({b}) * ({c})");
            prop_assert!((ev(&s, &[0.0]) - (a + b * c)).abs() <= 1e-12 * (1.0 + (a + b * c).abs()));
            let s = format!("({a}) - ({b}) / ({c})");
            prop_assert!((ev(&s, &[0.0]) - (a - b / c)).abs() <= 1e-12 * (1.0 + (a - b / c).abs()));
        }

        #[test]
        fn display_round_trip_of_numbers(a in -1e6f64..1e6) {
            prop_assert_eq!(ev(&format!("{a:e}"), &[0.0]), a);
        }
    }
}
