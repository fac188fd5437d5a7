//! Complex-analytic expression trees.
//!
//! Weierstrass data and arc charts enter the library as strings in a small
//! infix grammar (`docs/grammar.md`). Expressions parse into immutable ASTs
//! that evaluate over `Complex64`, differentiate symbolically, and print back
//! to a canonical form such that `parse(print(e)) == e`.
//!
//! Powers carry an explicit rational exponent and use the principal branch,
//! as do `log` and non-integer powers. `re`/`im`/`arg`/`conj` nodes parse and
//! evaluate, but mark an expression as non-analytic: they are rejected by
//! [`ComplexExpr::differentiate`] and by any caller that requires analytic
//! data (tested via [`ComplexExpr::is_analytic`]).

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

/// Reduced rational number with positive denominator; the exponent type for
/// power nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational exponent with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn minus_one(&self) -> Self {
        Rational::new(self.num - self.den, self.den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Expression tree over one complex variable `w`.
#[derive(Debug, Clone, PartialEq)]
pub enum ComplexExpr {
    Const(Complex64),
    /// The chart variable `w`.
    Var,
    Neg(Box<ComplexExpr>),
    Add(Box<ComplexExpr>, Box<ComplexExpr>),
    Sub(Box<ComplexExpr>, Box<ComplexExpr>),
    Mul(Box<ComplexExpr>, Box<ComplexExpr>),
    Div(Box<ComplexExpr>, Box<ComplexExpr>),
    /// Principal-branch power with rational exponent.
    Pow(Box<ComplexExpr>, Rational),
    Exp(Box<ComplexExpr>),
    /// Principal branch of the logarithm.
    Log(Box<ComplexExpr>),
    // Non-analytic extractors. Allowed in general expressions, rejected
    // wherever analyticity is required.
    Re(Box<ComplexExpr>),
    Im(Box<ComplexExpr>),
    Arg(Box<ComplexExpr>),
    Conj(Box<ComplexExpr>),
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("pole or branch point evaluating expression at w = {at}")]
    Singular { at: Complex64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum DiffError {
    #[error("cannot differentiate non-analytic node `{node}`")]
    NonAnalytic { node: &'static str },
}

impl ComplexExpr {
    pub fn constant(c: Complex64) -> Self {
        ComplexExpr::Const(c)
    }

    pub fn real(x: f64) -> Self {
        ComplexExpr::Const(Complex64::new(x, 0.0))
    }

    /// Parses the documented infix grammar and returns the canonical
    /// (constant-folded) AST.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.parse_expr()?;
        match p.peek() {
            Token::End => Ok(e.canonicalize()),
            t => Err(ParseError::Syntax {
                pos: p.current_pos(),
                msg: format!("unexpected trailing `{}`", t),
            }),
        }
    }

    /// Evaluates the expression at `w`. Pure and deterministic: identical
    /// inputs yield bit-identical results.
    pub fn eval(&self, w: Complex64) -> Result<Complex64, EvalError> {
        use ComplexExpr::*;
        Ok(match self {
            Const(c) => *c,
            Var => w,
            Neg(a) => -a.eval(w)?,
            Add(a, b) => a.eval(w)? + b.eval(w)?,
            Sub(a, b) => a.eval(w)? - b.eval(w)?,
            Mul(a, b) => a.eval(w)? * b.eval(w)?,
            Div(a, b) => {
                let d = b.eval(w)?;
                if d == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::Singular { at: w });
                }
                a.eval(w)? / d
            }
            Pow(a, r) => pow_principal(a.eval(w)?, *r, w)?,
            Exp(a) => a.eval(w)?.exp(),
            Log(a) => {
                let v = a.eval(w)?;
                if v == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::Singular { at: w });
                }
                v.ln()
            }
            Re(a) => Complex64::new(a.eval(w)?.re, 0.0),
            Im(a) => Complex64::new(a.eval(w)?.im, 0.0),
            Arg(a) => Complex64::new(a.eval(w)?.arg(), 0.0),
            Conj(a) => a.eval(w)?.conj(),
        })
    }

    /// True when the tree contains no `re`/`im`/`arg`/`conj` node.
    pub fn is_analytic(&self) -> bool {
        use ComplexExpr::*;
        match self {
            Const(_) | Var => true,
            Neg(a) | Exp(a) | Log(a) => a.is_analytic(),
            Pow(a, _) => a.is_analytic(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.is_analytic() && b.is_analytic()
            }
            Re(_) | Im(_) | Arg(_) | Conj(_) => false,
        }
    }

    /// Symbolic derivative d/dw, returned in canonical form.
    pub fn differentiate(&self) -> Result<Self, DiffError> {
        Ok(self.diff_raw()?.canonicalize())
    }

    fn diff_raw(&self) -> Result<Self, DiffError> {
        use ComplexExpr::*;
        Ok(match self {
            Const(_) => ComplexExpr::real(0.0),
            Var => ComplexExpr::real(1.0),
            Neg(a) => Neg(Box::new(a.diff_raw()?)),
            Add(a, b) => Add(Box::new(a.diff_raw()?), Box::new(b.diff_raw()?)),
            Sub(a, b) => Sub(Box::new(a.diff_raw()?), Box::new(b.diff_raw()?)),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.diff_raw()?), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.diff_raw()?))),
            ),
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(a.diff_raw()?), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(b.diff_raw()?))),
                )),
                Box::new(Pow(b.clone(), Rational::integer(2))),
            ),
            Pow(a, r) => Mul(
                Box::new(Mul(
                    Box::new(ComplexExpr::real(r.as_f64())),
                    Box::new(Pow(a.clone(), r.minus_one())),
                )),
                Box::new(a.diff_raw()?),
            ),
            Exp(a) => Mul(Box::new(Exp(a.clone())), Box::new(a.diff_raw()?)),
            Log(a) => Div(Box::new(a.diff_raw()?), a.clone()),
            Re(_) => return Err(DiffError::NonAnalytic { node: "re" }),
            Im(_) => return Err(DiffError::NonAnalytic { node: "im" }),
            Arg(_) => return Err(DiffError::NonAnalytic { node: "arg" }),
            Conj(_) => return Err(DiffError::NonAnalytic { node: "conj" }),
        })
    }

    /// Canonical form: bottom-up constant folding plus trivial identities
    /// (`x+0`, `1*x`, `x^1`, double negation). `parse` and `differentiate`
    /// always return canonical trees.
    pub fn canonicalize(&self) -> Self {
        use ComplexExpr::*;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let folded = match self {
            Const(c) => Const(*c),
            Var => Var,
            Neg(a) => Neg(Box::new(a.canonicalize())),
            Add(a, b) => Add(Box::new(a.canonicalize()), Box::new(b.canonicalize())),
            Sub(a, b) => Sub(Box::new(a.canonicalize()), Box::new(b.canonicalize())),
            Mul(a, b) => Mul(Box::new(a.canonicalize()), Box::new(b.canonicalize())),
            Div(a, b) => Div(Box::new(a.canonicalize()), Box::new(b.canonicalize())),
            Pow(a, r) => Pow(Box::new(a.canonicalize()), *r),
            Exp(a) => Exp(Box::new(a.canonicalize())),
            Log(a) => Log(Box::new(a.canonicalize())),
            Re(a) => Re(Box::new(a.canonicalize())),
            Im(a) => Im(Box::new(a.canonicalize())),
            Arg(a) => Arg(Box::new(a.canonicalize())),
            Conj(a) => Conj(Box::new(a.canonicalize())),
        };
        // Identity rules on the folded children.
        let simplified = match folded {
            Add(a, b) => match (*a, *b) {
                (Const(x), e) if x == zero => e,
                (e, Const(x)) if x == zero => e,
                (a, b) => Add(Box::new(a), Box::new(b)),
            },
            Sub(a, b) => match (*a, *b) {
                (e, Const(x)) if x == zero => e,
                (Const(x), e) if x == zero => Neg(Box::new(e)),
                (a, b) => Sub(Box::new(a), Box::new(b)),
            },
            Mul(a, b) => match (*a, *b) {
                (Const(x), _) | (_, Const(x)) if x == zero => Const(zero),
                (Const(x), e) if x == one => e,
                (e, Const(x)) if x == one => e,
                (a, b) => Mul(Box::new(a), Box::new(b)),
            },
            Div(a, b) => match (*a, *b) {
                (e, Const(x)) if x == one => e,
                (a, b) => Div(Box::new(a), Box::new(b)),
            },
            Pow(a, r) if r == Rational::integer(1) => *a,
            Pow(_, r) if r == Rational::integer(0) => Const(one),
            Neg(a) => match *a {
                Neg(inner) => *inner,
                Const(c) => Const(-c),
                e => Neg(Box::new(e)),
            },
            e => e,
        };
        // Fold any node whose children are all constants and whose value is
        // finite at an arbitrary probe point (constants ignore `w`).
        if !matches!(simplified, Const(_)) && simplified.is_constant() {
            if let Ok(v) = simplified.eval(Complex64::new(0.0, 0.0)) {
                if v.re.is_finite() && v.im.is_finite() {
                    return Const(v);
                }
            }
        }
        simplified
    }

    fn is_constant(&self) -> bool {
        use ComplexExpr::*;
        match self {
            Const(_) => true,
            Var => false,
            Neg(a) | Exp(a) | Log(a) | Re(a) | Im(a) | Arg(a) | Conj(a) => a.is_constant(),
            Pow(a, _) => a.is_constant(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    fn precedence(&self) -> u8 {
        use ComplexExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(..) => 3,
            Pow(..) => 4,
            _ => 5,
        }
    }

    fn print_child(&self, child: &ComplexExpr, min_prec: u8, out: &mut String) {
        if child.precedence() < min_prec {
            out.push('(');
            child.print_into(out);
            out.push(')');
        } else {
            child.print_into(out);
        }
    }

    fn print_into(&self, out: &mut String) {
        use ComplexExpr::*;
        match self {
            Const(c) => print_const(*c, out),
            Var => out.push('w'),
            Neg(a) => {
                out.push('-');
                self.print_child(a, 4, out);
            }
            Add(a, b) => {
                self.print_child(a, 1, out);
                out.push('+');
                self.print_child(b, 2, out);
            }
            Sub(a, b) => {
                self.print_child(a, 1, out);
                out.push('-');
                self.print_child(b, 2, out);
            }
            Mul(a, b) => {
                self.print_child(a, 2, out);
                out.push('*');
                self.print_child(b, 3, out);
            }
            Div(a, b) => {
                self.print_child(a, 2, out);
                out.push('/');
                self.print_child(b, 3, out);
            }
            Pow(a, r) => {
                self.print_child(a, 5, out);
                out.push('^');
                if r.is_integer() && r.num() >= 0 {
                    out.push_str(&r.to_string());
                } else {
                    out.push('(');
                    out.push_str(&r.to_string());
                    out.push(')');
                }
            }
            Exp(a) => print_call("exp", a, out),
            Log(a) => print_call("log", a, out),
            Re(a) => print_call("re", a, out),
            Im(a) => print_call("im", a, out),
            Arg(a) => print_call("arg", a, out),
            Conj(a) => print_call("conj", a, out),
        }
    }
}

impl fmt::Display for ComplexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.print_into(&mut s);
        f.write_str(&s)
    }
}

impl std::str::FromStr for ComplexExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComplexExpr::parse(s)
    }
}

// Expressions cross the config boundary as grammar strings.
impl serde::Serialize for ComplexExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for ComplexExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = <String as serde::Deserialize>::deserialize(deserializer)?;
        ComplexExpr::parse(&text).map_err(serde::de::Error::custom)
    }
}

fn print_call(name: &str, arg: &ComplexExpr, out: &mut String) {
    out.push_str(name);
    out.push('(');
    arg.print_into(out);
    out.push(')');
}

fn print_f64(x: f64, out: &mut String) {
    // `{}` on f64 is the shortest representation that parses back to the
    // same bits, so printed constants round-trip exactly.
    if x == x.trunc() && x.abs() < 1e15 {
        out.push_str(&format!("{:.1}", x));
    } else {
        out.push_str(&format!("{}", x));
    }
}

fn print_const(c: Complex64, out: &mut String) {
    if c.im == 0.0 {
        if c.re < 0.0 {
            // Negative constants print as parenthesized to reparse into the
            // same Const node rather than a Neg wrapper.
            out.push_str("(0.0-");
            print_f64(-c.re, out);
            out.push(')');
        } else {
            print_f64(c.re, out);
        }
    } else if c.re == 0.0 && c.im == 1.0 {
        out.push('i');
    } else {
        out.push('(');
        print_f64(c.re, out);
        if c.im >= 0.0 || c.im.is_nan() {
            out.push('+');
            print_f64(c.im, out);
        } else {
            out.push('-');
            print_f64(-c.im, out);
        }
        out.push_str("*i)");
    }
}

/// Principal-branch power: integer exponents by repeated multiplication,
/// fractional by `exp(r log z)`.
fn pow_principal(base: Complex64, r: Rational, at: Complex64) -> Result<Complex64, EvalError> {
    let zero = Complex64::new(0.0, 0.0);
    if r.is_integer() {
        let n = r.num();
        if base == zero {
            return if n > 0 {
                Ok(zero)
            } else if n == 0 {
                Ok(Complex64::new(1.0, 0.0))
            } else {
                Err(EvalError::Singular { at })
            };
        }
        let n32: i32 = n.try_into().map_err(|_| EvalError::Singular { at })?;
        Ok(base.powi(n32))
    } else {
        if base == zero {
            return if r.as_f64() > 0.0 {
                Ok(zero)
            } else {
                Err(EvalError::Singular { at })
            };
        }
        if base == Complex64::new(1.0, 0.0) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok((base.ln() * r.as_f64()).exp())
    }
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(x) => write!(f, "{}", x),
            Token::Ident(s) => write!(f, "{}", s),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::End => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((Token::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Token::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Token::Star, i));
                i += 1;
            }
            b'/' => {
                out.push((Token::Slash, i));
                i += 1;
            }
            b'^' => {
                out.push((Token::Caret, i));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let val: f64 = slice.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("invalid number literal `{}`", slice),
                })?;
                out.push((Token::Num(val), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                })
            }
        }
    }
    out.push((Token::End, bytes.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn current_pos(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.current_pos(),
                msg: format!("expected `{}`, found `{}`", t, self.peek()),
            })
        }
    }

    fn parse_expr(&mut self) -> Result<ComplexExpr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = ComplexExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Token::Minus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = ComplexExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ComplexExpr, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = ComplexExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Token::Slash => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = ComplexExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<ComplexExpr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            let inner = self.parse_factor()?;
            Ok(ComplexExpr::Neg(Box::new(inner)))
        } else {
            self.parse_power()
        }
    }

    fn parse_power(&mut self) -> Result<ComplexExpr, ParseError> {
        let base = self.parse_atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.parse_exponent()?;
            Ok(ComplexExpr::Pow(Box::new(base), exponent))
        } else {
            Ok(base)
        }
    }

    /// Exponents are rational: `3` or `-2` bare, `(p/q)` parenthesized.
    /// A denominator requires the parenthesized form, so `w^2/3` stays the
    /// quotient (w^2)/3.
    fn parse_exponent(&mut self) -> Result<Rational, ParseError> {
        let parenthesized = if *self.peek() == Token::LParen {
            self.bump();
            true
        } else {
            false
        };
        let mut sign = 1i64;
        while *self.peek() == Token::Minus || *self.peek() == Token::Plus {
            if self.bump() == Token::Minus {
                sign = -sign;
            }
        }
        let num = self.parse_exponent_int()?;
        let den = if parenthesized && *self.peek() == Token::Slash {
            self.bump();
            self.parse_exponent_int()?
        } else {
            1
        };
        if den == 0 {
            return Err(ParseError::Syntax {
                pos: self.current_pos(),
                msg: "zero denominator in exponent".into(),
            });
        }
        if parenthesized {
            self.expect(Token::RParen)?;
        }
        Ok(Rational::new(sign * num, den))
    }

    fn parse_exponent_int(&mut self) -> Result<i64, ParseError> {
        let pos = self.current_pos();
        match self.bump() {
            Token::Num(x) if x == x.trunc() && x.abs() < 9e15 => Ok(x as i64),
            t => Err(ParseError::Syntax {
                pos,
                msg: format!("expected integer exponent, found `{}`", t),
            }),
        }
    }

    fn parse_atom(&mut self) -> Result<ComplexExpr, ParseError> {
        let pos = self.current_pos();
        match self.bump() {
            Token::Num(x) => Ok(ComplexExpr::real(x)),
            Token::LParen => {
                let e = self.parse_expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "w" => Ok(ComplexExpr::Var),
                "i" => Ok(ComplexExpr::Const(Complex64::new(0.0, 1.0))),
                "pi" => Ok(ComplexExpr::real(std::f64::consts::PI)),
                "exp" | "log" | "re" | "im" | "arg" | "conj" => {
                    self.expect(Token::LParen)?;
                    let arg = self.parse_expr()?;
                    self.expect(Token::RParen)?;
                    let b = Box::new(arg);
                    Ok(match name.as_str() {
                        "exp" => ComplexExpr::Exp(b),
                        "log" => ComplexExpr::Log(b),
                        "re" => ComplexExpr::Re(b),
                        "im" => ComplexExpr::Im(b),
                        "arg" => ComplexExpr::Arg(b),
                        _ => ComplexExpr::Conj(b),
                    })
                }
                _ => Err(ParseError::UnknownIdentifier { name, pos }),
            },
            t => Err(ParseError::Syntax {
                pos,
                msg: format!("expected value, found `{}`", t),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parse_quotient_node_and_eval() {
        let e = ComplexExpr::parse("1/(2*pi*i*w)").unwrap();
        assert!(matches!(e, ComplexExpr::Div(..)));
        // At w = i the value is -1/(2 pi).
        let v = e.eval(c(0.0, 1.0)).unwrap();
        let expected = -1.0 / (2.0 * std::f64::consts::PI);
        assert!((v.re - expected).abs() < 1e-15, "{v}");
        assert!(v.im.abs() < 1e-16);
    }

    #[test]
    fn parse_variable_identity() {
        let e = ComplexExpr::parse("w").unwrap();
        assert_eq!(e, ComplexExpr::Var);
        assert_eq!(e.eval(c(3.0, 4.0)).unwrap(), c(3.0, 4.0));
    }

    #[test]
    fn parse_power_with_rational_exponent() {
        let e = ComplexExpr::parse("(1-w^4)^(-1/2)").unwrap();
        match &e {
            ComplexExpr::Pow(_, r) => assert_eq!(*r, Rational::new(-1, 2)),
            other => panic!("expected power node, got {other:?}"),
        }
        assert_eq!(e.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn eval_scaled_helicoid_data() {
        // 2*G with G = 1/(2 pi i w) at w = 1 gives -i/pi.
        let e = ComplexExpr::parse("2*(1/(2*pi*i*w))").unwrap();
        let v = e.eval(c(1.0, 0.0)).unwrap();
        assert!(v.re.abs() < 1e-16);
        assert!((v.im + 1.0 / std::f64::consts::PI).abs() < 1e-16);
    }

    #[test]
    fn eval_constant_ignores_w() {
        let e = ComplexExpr::parse("5").unwrap();
        assert_eq!(e.eval(c(7.0, -3.0)).unwrap(), c(5.0, 0.0));
    }

    #[test]
    fn exp_log_inverse_pair_principal_branch() {
        let e = ComplexExpr::parse("exp(log(w))").unwrap();
        let v = e.eval(c(2.0, 1.0)).unwrap();
        assert!((v - c(2.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_pole_reports_location() {
        let e = ComplexExpr::parse("1/w").unwrap();
        let err = e.eval(c(0.0, 0.0)).unwrap_err();
        assert_eq!(err, EvalError::Singular { at: c(0.0, 0.0) });
        let e = ComplexExpr::parse("log(w)").unwrap();
        assert!(e.eval(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn derivative_of_square() {
        let e = ComplexExpr::parse("w^2").unwrap();
        let d = e.differentiate().unwrap();
        let v = d.eval(c(3.0, 0.0)).unwrap();
        assert!((v - c(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_of_log() {
        let e = ComplexExpr::parse("log(w)").unwrap();
        let d = e.differentiate().unwrap();
        // 1/(2i) = -i/2
        let v = d.eval(c(0.0, 2.0)).unwrap();
        assert!((v - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        // d/dw (1-w^4)^(-1/2) at w = 0.5 against the finite-difference oracle.
        let e = ComplexExpr::parse("(1-w^4)^(-1/2)").unwrap();
        let d = e.differentiate().unwrap();
        let w = c(0.5, 0.0);
        let h = 1e-5;
        let fd = (e.eval(w + c(h, 0.0)).unwrap() - e.eval(w - c(h, 0.0)).unwrap()) / (2.0 * h);
        let sym = d.eval(w).unwrap();
        assert!((sym - fd).norm() < 1e-8, "symbolic {sym} vs fd {fd}");
    }

    #[test]
    fn differentiate_rejects_non_analytic() {
        let e = ComplexExpr::parse("conj(w)").unwrap();
        assert!(!e.is_analytic());
        assert_eq!(
            e.differentiate().unwrap_err(),
            DiffError::NonAnalytic { node: "conj" }
        );
        assert!(ComplexExpr::parse("re(w)+w").unwrap().differentiate().is_err());
    }

    #[test]
    fn analytic_flag_by_tree_walk() {
        assert!(ComplexExpr::parse("exp(w^2)/(1+w)").unwrap().is_analytic());
        assert!(!ComplexExpr::parse("w*im(w)").unwrap().is_analytic());
    }

    #[test]
    fn syntax_error_carries_position() {
        match ComplexExpr::parse("1+*w") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match ComplexExpr::parse("2*foo(w)") {
            Err(ParseError::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "foo");
                assert_eq!(pos, 2);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip_on_samples() {
        for src in [
            "1/(2*pi*i*w)",
            "(1-w^4)^(-1/2)",
            "exp(log(w))+w^3-2.5*w",
            "-w/(1+i*w)",
            "w^(2/3)*log(w+1.0e-2)",
        ] {
            let e = ComplexExpr::parse(src).unwrap();
            let printed = e.to_string();
            let reparsed = ComplexExpr::parse(&printed).unwrap();
            assert_eq!(e, reparsed, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn derivative_prints_and_round_trips() {
        let e = ComplexExpr::parse("(1-w^4)^(-1/2)").unwrap();
        let d = e.differentiate().unwrap();
        let printed = d.to_string();
        let reparsed = ComplexExpr::parse(&printed).unwrap();
        assert_eq!(d, reparsed);
    }

    // Random analytic expression trees for property tests.
    fn arb_analytic_expr() -> impl Strategy<Value = ComplexExpr> {
        let leaf = prop_oneof![
            (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| ComplexExpr::Const(c(re, im))),
            Just(ComplexExpr::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ComplexExpr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ComplexExpr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ComplexExpr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ComplexExpr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), 1i64..4)
                    .prop_map(|(a, n)| ComplexExpr::Pow(Box::new(a), Rational::integer(n))),
                inner.clone().prop_map(|a| ComplexExpr::Exp(Box::new(a))),
                inner.clone().prop_map(|a| ComplexExpr::Neg(Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonical_print_parse_identity(e in arb_analytic_expr()) {
            let canon = e.canonicalize();
            let printed = canon.to_string();
            let reparsed = ComplexExpr::parse(&printed);
            prop_assert!(reparsed.is_ok(), "failed to parse `{}`", printed);
            prop_assert_eq!(reparsed.unwrap(), canon);
        }

        #[test]
        fn derivative_matches_finite_differences(
            e in arb_analytic_expr(),
            re in -1.0f64..1.0,
            im in 0.1f64..1.0,
        ) {
            let d = match e.differentiate() {
                Ok(d) => d,
                Err(_) => return Ok(()),
            };
            let w = c(re, im);
            let h = 1e-5;
            let plus = e.eval(w + c(h, 0.0));
            let minus = e.eval(w - c(h, 0.0));
            let at = e.eval(w);
            let sym = d.eval(w);
            if let (Ok(p), Ok(m), Ok(v0), Ok(s)) = (plus, minus, at, sym) {
                // Skip wildly scaled samples where fd cancellation dominates.
                let scale = v0.norm().max(s.norm()).max(1.0);
                if scale < 1e6 && p.norm() < 1e8 && m.norm() < 1e8 {
                    let fd = (p - m) / (2.0 * h);
                    prop_assert!(
                        (s - fd).norm() <= 1e-6 * scale.max(fd.norm()),
                        "sym {} vs fd {} (scale {})", s, fd, scale
                    );
                }
            }
        }

        #[test]
        fn eval_is_deterministic(e in arb_analytic_expr(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let w = c(re, im);
            let a = e.eval(w);
            let b = e.eval(w);
            match (a, b) {
                (Ok(x), Ok(y)) => {
                    prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                    prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "nondeterministic result {:?}", other),
            }
        }
    }
}
