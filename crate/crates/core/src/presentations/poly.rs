//! Gaussian-rational noncommutative *-polynomials and their text syntax.
//!
//! Syntax, whitespace-insensitive:
//!
//! ```text
//! poly   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor factor*             juxtaposition is multiplication
//! factor := atom '*'*                  postfix '*' is the adjoint
//! atom   := number | 'i' | name | '(' poly ')'
//! number := digits ['.' digits] ['/' digits] ['i']
//! ```
//!
//! `i` is the imaginary unit, so `(1/2+1/2i) g1 g2*` and `3/4i p` are valid.
//! Names start with a letter or `_`; `i` is reserved.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::C64;

/// An element of `ℚ(i)`, stored exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussianRational {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussianRational {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Modulus, rounded to `f64`.
    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}i", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{}{}{}i",
                    fmt_rational(&self.re),
                    sign,
                    fmt_rational(&self.im.abs())
                )
            }
        }
    }
}

/// A generator or its adjoint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub name: String,
    pub adjoint: bool,
}

impl Letter {
    pub fn new(name: impl Into<String>, adjoint: bool) -> Self {
        Letter {
            name: name.into(),
            adjoint,
        }
    }
}

pub type Word = Vec<Letter>;

/// A finite sum of Gaussian-rational multiples of nonempty words.
///
/// Words are normalized against the unit generator: `e* = e`, and `e` is
/// dropped from any longer word. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NCPolynomial {
    terms: BTreeMap<Word, GaussianRational>,
}

impl NCPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The polynomial consisting of the single generator `name`.
    pub fn generator(name: &str) -> Self {
        Self::term(GaussianRational::one(), vec![Letter::new(name, false)])
    }

    pub fn term(coeff: GaussianRational, word: Word) -> Self {
        let mut p = Self::zero();
        p.add_term(word, coeff);
        p
    }

    fn add_term(&mut self, word: Word, coeff: GaussianRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(word)
            .or_insert_with(GaussianRational::zero);
        *entry = &*entry + &coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// All generator names appearing in the polynomial.
    pub fn symbols(&self) -> std::collections::BTreeSet<&str> {
        self.terms
            .keys()
            .flatten()
            .map(|l| l.name.as_str())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let word = w
                .iter()
                .rev()
                .map(|l| Letter::new(l.name.clone(), !l.adjoint))
                .collect();
            out.add_term(word, c.conj());
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = Self::zero();
        for (w, d) in &self.terms {
            out.add_term(w.clone(), c * d);
        }
        out
    }

    /// Applies the unit rules for the generator `unit`.
    pub fn normalize_unit(&self, unit: &str) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(normalize_word(w, unit), c.clone());
        }
        out
    }

    /// Parses the syntax described in the module docs. Constant terms are
    /// rejected; write them as multiples of `unit`.
    pub fn parse(text: &str, unit: &str) -> Result<Self> {
        let mut parser = Parser::new(text);
        let raw = parser.expr()?;
        parser.expect_end()?;
        let mut out = Self::zero();
        for (w, c) in raw.terms {
            if w.is_empty() {
                return Err(Error::Parse {
                    line: 1,
                    column: 1,
                    message: format!("constant term {c}; multiply constants by the unit '{unit}'"),
                });
            }
            out.add_term(normalize_word(&w, unit), c);
        }
        Ok(out)
    }
}

fn normalize_word(w: &[Letter], unit: &str) -> Word {
    let kept: Word = w.iter().filter(|l| l.name != unit).cloned().collect();
    if kept.is_empty() {
        vec![Letter::new(unit, false)]
    } else {
        kept
    }
}

impl Add for &NCPolynomial {
    type Output = NCPolynomial;
    fn add(self, rhs: &NCPolynomial) -> NCPolynomial {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl Sub for &NCPolynomial {
    type Output = NCPolynomial;
    fn sub(self, rhs: &NCPolynomial) -> NCPolynomial {
        self + &rhs.scale(&GaussianRational::from_ints(-1, 0))
    }
}

impl Mul for &NCPolynomial {
    type Output = NCPolynomial;
    fn mul(self, rhs: &NCPolynomial) -> NCPolynomial {
        let mut out = NCPolynomial::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &rhs.terms {
                let word = w1.iter().chain(w2).cloned().collect();
                out.add_term(word, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let negative_real = c.im.is_zero() && c.re.is_negative();
            let shown = if negative_real { -c } else { c.clone() };
            match (i, negative_real) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !shown.is_zero() && shown != GaussianRational::one() {
                write!(f, "({shown}) ")?;
            }
            let letters: Vec<String> = w
                .iter()
                .map(|l| format!("{}{}", l.name, if l.adjoint { "*" } else { "" }))
                .collect();
            write!(f, "{}", letters.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(GaussianRational),
    Name(String),
    Plus,
    Minus,
    Star,
    Open,
    Close,
    End,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    peeked: Option<(Token, usize)>,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            peeked: None,
        }
    }

    fn error(&self, at: usize, message: impl Into<String>) -> Error {
        let before: String = self.chars[..at.min(self.chars.len())].iter().collect();
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn lex(&mut self) -> Result<(Token, usize)> {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.chars.get(self.pos) else {
            return Ok((Token::End, start));
        };
        let simple = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '(' => Some(Token::Open),
            ')' => Some(Token::Close),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() {
            let int = self.digits();
            let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
            if self.chars.get(self.pos) == Some(&'.') {
                self.pos += 1;
                let frac = self.digits();
                if frac.is_empty() {
                    return Err(self.error(self.pos, "expected digits after '.'"));
                }
                let scale = BigInt::from(10u32).pow(frac.len() as u32);
                value += BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
            }
            if self.chars.get(self.pos) == Some(&'/') {
                self.pos += 1;
                let den = self.digits();
                if den.is_empty() {
                    return Err(self.error(self.pos, "expected a denominator after '/'"));
                }
                let den: BigInt = den.parse().expect("digits");
                if den.is_zero() {
                    return Err(self.error(start, "zero denominator"));
                }
                value /= BigRational::from_integer(den);
            }
            let imaginary = self.chars.get(self.pos) == Some(&'i')
                && !self
                    .chars
                    .get(self.pos + 1)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_');
            if imaginary {
                self.pos += 1;
                return Ok((
                    Token::Number(GaussianRational::new(BigRational::zero(), value)),
                    start,
                ));
            }
            return Ok((Token::Number(GaussianRational::real(value)), start));
        }
        if c.is_alphabetic() || c == '_' {
            while self.pos < self.chars.len()
                && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
            {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            if name == "i" {
                return Ok((Token::Number(GaussianRational::i()), start));
            }
            return Ok((Token::Name(name), start));
        }
        Err(self.error(start, format!("unexpected character '{c}'")))
    }

    fn peek(&mut self) -> Result<&(Token, usize)> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(self.peeked.as_ref().expect("just filled"))
    }

    fn next(&mut self) -> Result<(Token, usize)> {
        self.peek()?;
        Ok(self.peeked.take().expect("just filled"))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next()? {
            (Token::End, _) => Ok(()),
            (t, at) => Err(self.error(at, format!("unexpected {t:?}"))),
        }
    }

    fn expr(&mut self) -> Result<NCPolynomial> {
        let mut sign = match self.peek()?.0 {
            Token::Minus => {
                self.next()?;
                -1
            }
            Token::Plus => {
                self.next()?;
                1
            }
            _ => 1,
        };
        let mut acc = NCPolynomial::zero();
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek()?.0 {
                Token::Plus => sign = 1,
                Token::Minus => sign = -1,
                _ => return Ok(acc),
            }
            self.next()?;
        }
    }

    fn starts_factor(t: &Token) -> bool {
        matches!(t, Token::Number(_) | Token::Name(_) | Token::Open)
    }

    fn term(&mut self) -> Result<NCPolynomial> {
        let mut acc = self.factor()?;
        while Self::starts_factor(&self.peek()?.0) {
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NCPolynomial> {
        let mut atom = match self.next()? {
            (Token::Number(c), _) => NCPolynomial::term(c, Vec::new()),
            (Token::Name(n), _) => NCPolynomial::generator(&n),
            (Token::Open, _) => {
                let inner = self.expr()?;
                match self.next()? {
                    (Token::Close, _) => inner,
                    (t, at) => return Err(self.error(at, format!("expected ')', found {t:?}"))),
                }
            }
            (Token::End, at) => return Err(self.error(at, "unexpected end of input")),
            (t, at) => return Err(self.error(at, format!("unexpected {t:?}"))),
        };
        while self.peek()?.0 == Token::Star {
            self.next()?;
            atom = atom.adjoint();
        }
        Ok(atom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NCPolynomial {
        NCPolynomial::parse(s, "e").unwrap()
    }

    #[test]
    fn parses_coefficients() {
        let q = p("(1/2+1/2i) g1 g2*");
        let (w, c) = q.terms().next().unwrap();
        assert_eq!(w, &vec![Letter::new("g1", false), Letter::new("g2", true)]);
        assert_eq!(
            c,
            &GaussianRational::new(
                BigRational::new(1.into(), 2.into()),
                BigRational::new(1.into(), 2.into())
            )
        );
        assert_eq!(
            p("3/4i p").terms().next().unwrap().1.to_c64(),
            C64::new(0.0, 0.75)
        );
        assert_eq!(
            p("0.25 g").terms().next().unwrap().1.to_c64(),
            C64::new(0.25, 0.0)
        );
        assert_eq!(
            p("i g").terms().next().unwrap().1.to_c64(),
            C64::new(0.0, 1.0)
        );
    }

    #[test]
    fn unit_rules() {
        assert_eq!(p("g* g - e"), p("-e + g*g"));
        assert_eq!(p("e* g e"), p("g"));
        assert_eq!(p("e e*"), p("e"));
        assert!(p("g - g").is_zero());
    }

    #[test]
    fn adjoint_of_products() {
        assert_eq!(p("(g h)*"), p("h* g*"));
        assert_eq!(p("(2i g)*"), p("-2i g*"));
        assert_eq!(p("g**"), p("g"));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "(1/2+1/2i) g1 g2* - 3 h + e",
            "-g*",
            "(-2i) a b a*",
            "e11 e12 - e12",
        ] {
            let q = p(s);
            assert_eq!(p(&q.to_string()), q, "{s} -> {q}");
        }
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = NCPolynomial::parse("g + (h", "e").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 1,
                    column: 7,
                    ..
                }
            ),
            "{err}"
        );
        let err = NCPolynomial::parse("g + 1", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = NCPolynomial::parse("g $ h", "e").unwrap_err();
        assert!(matches!(err, Error::Parse { column: 3, .. }), "{err}");
        assert!(NCPolynomial::parse("1/0 g", "e").is_err());
    }
}
