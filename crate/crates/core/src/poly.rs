//! Complex polynomials in one and two variables.
//!
//! [`UniPoly`] holds the factor polynomials `p_j(y)` of a Hénon map,
//! [`BiPoly`] is a sparse polynomial in `x, y` and [`BiPolyPair`] is a
//! polynomial self-map of C² stored as its two component polynomials.
//! Coefficients are `Complex64`; symbolic equality is coefficient-wise
//! agreement under [`coeffs_close`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the number of stored terms produced by composition.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Moduli above this are reported as [`Error::Overflow`].
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Relative tolerance for symbolic coefficient equality.
pub const SYMBOLIC_TOL: f64 = 1e-9;

/// Mixed absolute/relative coefficient equality: `|a-b| <= 1e-9 (1+|a|+|b|)`.
pub fn coeffs_close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= SYMBOLIC_TOL * (1.0 + a.norm() + b.norm())
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn is_exact_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

fn check_finite(c: Complex64) -> Result<Complex64> {
    let m = c.norm();
    if m.is_finite() && m <= OVERFLOW_LIMIT {
        Ok(c)
    } else {
        Err(Error::Overflow)
    }
}

// ---------------------------------------------------------------------------
// Univariate
// ---------------------------------------------------------------------------

/// Polynomial in one variable, coefficients lowest power first.
///
/// The highest stored coefficient is always nonzero; the zero polynomial has
/// no coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<Complex64>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| is_exact_zero(*c)) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    /// `c * t^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    /// Sum of the moduli of all coefficients below the leading one.
    pub fn lower_coeff_sum(&self) -> f64 {
        match self.coeffs.split_last() {
            Some((_, rest)) => rest.iter().map(|c| c.norm()).sum(),
            None => 0.0,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(zero(), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: Complex64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or_else(zero);
        UniPoly::new(
            (0..n)
                .map(|k| get(&self.coeffs, k) + get(&other.coeffs, k))
                .collect(),
        )
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (a, &ca) in self.coeffs.iter().enumerate() {
            for (b, &cb) in other.coeffs.iter().enumerate() {
                out[a + b] += ca * cb;
            }
        }
        UniPoly::new(out)
    }

    /// `self(inner(t))`, Horner over polynomials.
    pub fn compose(&self, inner: &UniPoly) -> UniPoly {
        self.coeffs
            .iter()
            .rev()
            .fold(UniPoly::zero(), |acc, &c| {
                acc.mul(inner).add(&UniPoly::new(vec![c]))
            })
    }

    /// Coefficient-wise equality under [`coeffs_close`].
    pub fn approx_eq(&self, other: &UniPoly) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| {
            let a = self.coeffs.get(k).copied().unwrap_or_else(zero);
            let b = other.coeffs.get(k).copied().unwrap_or_else(zero);
            coeffs_close(a, b)
        })
    }

    /// Canonical text in the given variable, lowest power first.
    pub fn to_string_in(&self, var: char) -> String {
        let mut out = String::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if is_exact_zero(c) {
                continue;
            }
            let mut term = format_complex(c);
            if k >= 1 {
                term.push('*');
                term.push(var);
            }
            if k >= 2 {
                term.push('^');
                term.push_str(&k.to_string());
            }
            if out.is_empty() {
                out = term;
            } else if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&term);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in('y'))
    }
}

impl FromStr for UniPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_polynomial(s)
    }
}

/// Shortest round-trip decimal for an `f64`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.is_finite() && (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Complex literal in the parser's syntax: `a`, `bi` or `(a+bi)`.
pub fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format_f64(c.re)
    } else if c.re == 0.0 {
        format!("{}i", format_f64(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}i)", format_f64(c.re), format_f64(-c.im))
    } else {
        format!("({}+{}i)", format_f64(c.re), format_f64(c.im))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Parses a polynomial in `y`.
///
/// Grammar: signed sums of `c`, `c*y^k`, `y^k` and `y`, where a coefficient
/// `c` is `a`, `bi`, `i` or `(a+bi)`. Whitespace is insignificant.
pub fn parse_polynomial(text: &str) -> Result<UniPoly> {
    parse_polynomial_in(text, 'y')
}

/// Same grammar as [`parse_polynomial`] with a caller-chosen variable name.
pub fn parse_polynomial_in(text: &str, var: char) -> Result<UniPoly> {
    let mut p = Parser::new(text, var);
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("'+', '-' or end of input"));
    }
    Ok(poly)
}

/// Parses a single complex literal such as `3`, `-2.5i` or `(1-2i)`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let mut p = Parser::new(text, '\0');
    p.skip_ws();
    let neg = p.eat('-');
    if !neg {
        p.eat('+');
    }
    let c = p.coefficient()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("end of input"));
    }
    Ok(if neg { -c } else { c })
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    var: char,
}

impl Parser {
    fn new(text: &str, var: char) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            var,
        }
    }

    fn error(&self, expected: &str) -> Error {
        Error::Syntax {
            position: self.pos + 1,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<UniPoly> {
        let mut acc: Vec<Complex64> = Vec::new();
        let mut sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        loop {
            let (c, k) = self.term()?;
            if acc.len() <= k {
                acc.resize(k + 1, zero());
            }
            acc[k] += c * sign;
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        Ok(UniPoly::new(acc))
    }

    fn term(&mut self) -> Result<(Complex64, usize)> {
        if self.peek() == Some(self.var) {
            return Ok((Complex64::new(1.0, 0.0), self.var_pow()?));
        }
        let c = self.coefficient()?;
        if self.eat('*') {
            if self.peek() != Some(self.var) {
                return Err(self.error(&format!("'{}'", self.var)));
            }
            Ok((c, self.var_pow()?))
        } else {
            Ok((c, 0))
        }
    }

    fn var_pow(&mut self) -> Result<usize> {
        // caller has checked the variable is next
        self.pos += 1;
        if !self.eat('^') {
            return Ok(1);
        }
        if self.peek() == Some('-') {
            return Err(Error::NegativeExponent {
                position: self.pos + 1,
            });
        }
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("integer exponent"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse::<usize>().map_err(|_| Error::Syntax {
            position: start + 1,
            expected: "exponent that fits in usize".into(),
        })
    }

    fn coefficient(&mut self) -> Result<Complex64> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let neg = self.eat('-');
                if !neg {
                    self.eat('+');
                }
                let first = self.imag_or_real()?;
                let first = if neg { -first } else { first };
                let value = if self.eat('+') {
                    first + self.imag_or_real()?
                } else if self.eat('-') {
                    first - self.imag_or_real()?
                } else {
                    first
                };
                if !self.eat(')') {
                    return Err(self.error("')'"));
                }
                Ok(value)
            }
            Some(c) if c == 'i' || c.is_ascii_digit() || c == '.' => self.imag_or_real(),
            _ => Err(self.error(&format!("number, '(' or '{}'", self.var))),
        }
    }

    fn imag_or_real(&mut self) -> Result<Complex64> {
        if self.eat('i') {
            return Ok(Complex64::new(0.0, 1.0));
        }
        let v = self.number()?;
        if self.chars.get(self.pos) == Some(&'i') {
            self.pos += 1;
            Ok(Complex64::new(0.0, v))
        } else {
            Ok(Complex64::new(v, 0.0))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digit = |p: &Parser, k: usize| p.chars.get(k).is_some_and(|c| c.is_ascii_digit());
        while digit(self, self.pos) {
            self.pos += 1;
        }
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            while digit(self, self.pos) {
                self.pos += 1;
            }
        }
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let mut k = self.pos + 1;
            if matches!(self.chars.get(k), Some('+') | Some('-')) {
                k += 1;
            }
            if digit(self, k) {
                self.pos = k;
                while digit(self, self.pos) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map_err(|_| Error::Syntax {
            position: start + 1,
            expected: "number".into(),
        })
    }
}

// ---------------------------------------------------------------------------
// Bivariate
// ---------------------------------------------------------------------------

/// One stored monomial `c * x^i * y^j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub i: u32,
    pub j: u32,
    pub c: Complex64,
}

/// Sparse polynomial in `x` and `y`.
///
/// Terms are sorted by `(i, j)`, exponents are unique and exact zeros are
/// never stored, so iteration (and every sum built from it) is reproducible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiPoly {
    terms: Vec<Term>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(0, 0, c)])
    }

    pub fn x() -> Self {
        Self::from_terms([(1, 0, Complex64::new(1.0, 0.0))])
    }

    pub fn y() -> Self {
        Self::from_terms([(0, 1, Complex64::new(1.0, 0.0))])
    }

    /// Builds a polynomial from `(i, j, c)` triples; repeated exponents are summed.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, Complex64)>>(terms: I) -> Self {
        let mut map: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (i, j, c) in terms {
            *map.entry((i, j)).or_insert_with(zero) += c;
        }
        Self::from_sorted_map(map)
    }

    fn from_sorted_map(map: BTreeMap<(u32, u32), Complex64>) -> Self {
        BiPoly {
            terms: map
                .into_iter()
                .filter(|(_, c)| !is_exact_zero(*c))
                .map(|((i, j), c)| Term { i, j, c })
                .collect(),
        }
    }

    /// `p(y)` as a bivariate polynomial.
    pub fn from_uni_in_y(p: &UniPoly) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| (0, k as u32, c)),
        )
    }

    /// `p(x)` as a bivariate polynomial.
    pub fn from_uni_in_x(p: &UniPoly) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as u32, 0, c)),
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.i + t.j).max()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        match self.terms.binary_search_by(|t| (t.i, t.j).cmp(&(i, j))) {
            Ok(k) => self.terms[k].c,
            Err(_) => zero(),
        }
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.terms.iter().map(|t| t.c.norm()).fold(0.0, f64::max)
    }

    /// Copy with the `(i, j)` term removed.
    pub fn without_term(&self, i: u32, j: u32) -> BiPoly {
        BiPoly {
            terms: self
                .terms
                .iter()
                .filter(|t| (t.i, t.j) != (i, j))
                .copied()
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> BiPoly {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term { c: t.c * s, ..*t })
                .filter(|t| !is_exact_zero(t.c))
                .collect(),
        }
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &BiPoly) -> BiPoly {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// `self + s * other` by a sorted merge.
    pub fn add_scaled(&self, other: &BiPoly, s: Complex64) -> BiPoly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut p, mut q) = (0, 0);
        while p < a.len() || q < b.len() {
            let ka = a.get(p).map(|t| (t.i, t.j));
            let kb = b.get(q).map(|t| (t.i, t.j));
            let t = match (ka, kb) {
                (Some(x), Some(y)) if x == y => {
                    let t = Term {
                        c: a[p].c + b[q].c * s,
                        ..a[p]
                    };
                    p += 1;
                    q += 1;
                    t
                }
                (Some(x), Some(y)) if x < y => {
                    p += 1;
                    a[p - 1]
                }
                (Some(_), None) => {
                    p += 1;
                    a[p - 1]
                }
                _ => {
                    q += 1;
                    Term {
                        c: b[q - 1].c * s,
                        ..b[q - 1]
                    }
                }
            };
            if !is_exact_zero(t.c) {
                out.push(t);
            }
        }
        BiPoly { terms: out }
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        self.mul_capped(other, usize::MAX)
            .expect("uncapped multiplication cannot explode")
    }

    /// Product, failing with [`Error::TermExplosion`] past `cap` terms.
    pub fn mul_capped(&self, other: &BiPoly, cap: usize) -> Result<BiPoly> {
        if self.is_empty() || other.is_empty() {
            return Ok(BiPoly::zero());
        }
        let max_i = |p: &BiPoly| p.terms.iter().map(|t| t.i).max().unwrap_or(0) as usize;
        let max_j = |p: &BiPoly| p.terms.iter().map(|t| t.j).max().unwrap_or(0) as usize;
        let ni = max_i(self) + max_i(other) + 1;
        let nj = max_j(self) + max_j(other) + 1;

        let product = if ni.saturating_mul(nj) <= 1 << 24 {
            let mut buf = vec![zero(); ni * nj];
            for ta in &self.terms {
                for tb in &other.terms {
                    buf[(ta.i + tb.i) as usize * nj + (ta.j + tb.j) as usize] += ta.c * tb.c;
                }
            }
            let terms: Vec<Term> = buf
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !is_exact_zero(*c))
                .map(|(k, c)| Term {
                    i: (k / nj) as u32,
                    j: (k % nj) as u32,
                    c,
                })
                .collect();
            BiPoly { terms }
        } else {
            let mut map: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
            for ta in &self.terms {
                for tb in &other.terms {
                    *map.entry((ta.i + tb.i, ta.j + tb.j)).or_insert_with(zero) += ta.c * tb.c;
                }
                if map.len() > cap {
                    return Err(Error::TermExplosion {
                        terms: map.len(),
                        cap,
                    });
                }
            }
            Self::from_sorted_map(map)
        };
        if product.len() > cap {
            return Err(Error::TermExplosion {
                terms: product.len(),
                cap,
            });
        }
        Ok(product)
    }

    /// Evaluates with Horner grouping in `y`, then in `x`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Result<Complex64> {
        let mut acc = zero();
        let mut prev_i: Option<u32> = None;
        // groups of equal i, walked from the highest i down
        let mut end = self.terms.len();
        while end > 0 {
            let i = self.terms[end - 1].i;
            let mut start = end - 1;
            while start > 0 && self.terms[start - 1].i == i {
                start -= 1;
            }
            let group = &self.terms[start..end];
            let mut inner = zero();
            let mut prev_j: Option<u32> = None;
            for t in group.iter().rev() {
                if let Some(pj) = prev_j {
                    inner = check_finite(inner * y.powu(pj - t.j))?;
                }
                inner = check_finite(inner + t.c)?;
                prev_j = Some(t.j);
            }
            inner = check_finite(inner * y.powu(prev_j.unwrap_or(0)))?;
            if let Some(pi) = prev_i {
                acc = check_finite(acc * x.powu(pi - i))?;
            }
            acc = check_finite(acc + inner)?;
            prev_i = Some(i);
            end = start;
        }
        check_finite(acc * x.powu(prev_i.unwrap_or(0)))
    }

    /// `self(x, y) / y^d` without forming `y^d`, for `|x| <= |y|`, `|y| >= 1`.
    pub fn eval_over_y_power(&self, x: Complex64, y: Complex64, d: u32) -> Complex64 {
        let ratio = x / y;
        self.terms
            .iter()
            .map(|t| t.c * ratio.powu(t.i) * y.powi(t.i as i32 + t.j as i32 - d as i32))
            .sum()
    }

    /// `self(x, y) / x^d` without forming `x^d`, for `|y| <= |x|`, `|x| >= 1`.
    pub fn eval_over_x_power(&self, x: Complex64, y: Complex64, d: u32) -> Complex64 {
        let ratio = y / x;
        self.terms
            .iter()
            .map(|t| t.c * ratio.powu(t.j) * x.powi(t.i as i32 + t.j as i32 - d as i32))
            .sum()
    }

    /// Largest coefficient-wise difference `max |a_k - b_k|`.
    pub fn residual(&self, other: &BiPoly) -> f64 {
        self.sub(other).max_coeff_modulus()
    }

    /// Coefficient-wise equality under [`coeffs_close`].
    pub fn approx_eq(&self, other: &BiPoly) -> bool {
        let keys: std::collections::BTreeSet<(u32, u32)> = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|t| (t.i, t.j))
            .collect();
        keys.into_iter()
            .all(|(i, j)| coeffs_close(self.coeff(i, j), other.coeff(i, j)))
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            f.write_str(&format_complex(t.c))?;
            match t.i {
                0 => {}
                1 => f.write_str("*x")?,
                i => write!(f, "*x^{i}")?,
            }
            match t.j {
                0 => {}
                1 => f.write_str("*y")?,
                j => write!(f, "*y^{j}")?,
            }
        }
        Ok(())
    }
}

/// A polynomial map `(x, y) -> (first(x, y), second(x, y))`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiPolyPair {
    pub first: BiPoly,
    pub second: BiPoly,
}

impl BiPolyPair {
    pub fn new(first: BiPoly, second: BiPoly) -> Self {
        BiPolyPair { first, second }
    }

    pub fn identity() -> Self {
        BiPolyPair::new(BiPoly::x(), BiPoly::y())
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.first.eval(x, y)?, self.second.eval(x, y)?))
    }

    pub fn degree(&self) -> Option<u32> {
        self.first.degree().max(self.second.degree())
    }

    pub fn len(&self) -> usize {
        self.first.len() + self.second.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty() && self.second.is_empty()
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.first
            .max_coeff_modulus()
            .max(self.second.max_coeff_modulus())
    }

    /// Largest coefficient difference over both components.
    pub fn residual(&self, other: &BiPolyPair) -> f64 {
        self.first
            .residual(&other.first)
            .max(self.second.residual(&other.second))
    }

    pub fn approx_eq(&self, other: &BiPolyPair) -> bool {
        self.first.approx_eq(&other.first) && self.second.approx_eq(&other.second)
    }

    /// `self∘self∘⋯` (`k` copies), identity for `k = 0`.
    pub fn iterate(&self, k: u32, cap: usize) -> Result<BiPolyPair> {
        let mut out = BiPolyPair::identity();
        for _ in 0..k {
            out = compose_maps_capped(self, &out, cap)?;
        }
        Ok(out)
    }
}

impl fmt::Display for BiPolyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// Lazily built powers `base^0, base^1, …`.
struct Powers<'a> {
    base: &'a BiPoly,
    pows: Vec<BiPoly>,
}

impl<'a> Powers<'a> {
    fn new(base: &'a BiPoly) -> Self {
        Powers {
            base,
            pows: vec![BiPoly::constant(Complex64::new(1.0, 0.0))],
        }
    }

    fn get(&mut self, k: u32, cap: usize) -> Result<&BiPoly> {
        while self.pows.len() <= k as usize {
            let next = self.pows.last().unwrap().mul_capped(self.base, cap)?;
            self.pows.push(next);
        }
        Ok(&self.pows[k as usize])
    }
}

fn cap_check(p: BiPoly, cap: usize) -> Result<BiPoly> {
    if p.len() > cap {
        Err(Error::TermExplosion {
            terms: p.len(),
            cap,
        })
    } else {
        Ok(p)
    }
}

fn compose_component(
    p: &BiPoly,
    xs: &mut Powers<'_>,
    ys: &mut Powers<'_>,
    cap: usize,
) -> Result<BiPoly> {
    let terms = p.terms();
    let mut acc = BiPoly::zero();
    let mut prev_i: Option<u32> = None;
    let mut end = terms.len();
    while end > 0 {
        let i = terms[end - 1].i;
        let mut start = end - 1;
        while start > 0 && terms[start - 1].i == i {
            start -= 1;
        }
        let mut inner = BiPoly::zero();
        for t in &terms[start..end] {
            inner = inner.add_scaled(ys.get(t.j, cap)?, t.c);
        }
        if let Some(pi) = prev_i {
            acc = acc.mul_capped(xs.get(pi - i, cap)?, cap)?;
        }
        acc = cap_check(acc.add(&inner), cap)?;
        prev_i = Some(i);
        end = start;
    }
    match prev_i {
        Some(i) if i > 0 => acc.mul_capped(xs.get(i, cap)?, cap),
        _ => Ok(acc),
    }
}

/// Substitutes `inner` into a single polynomial: `p(inner.first, inner.second)`.
pub fn compose_poly(p: &BiPoly, inner: &BiPolyPair, cap: usize) -> Result<BiPoly> {
    let mut xs = Powers::new(&inner.first);
    let mut ys = Powers::new(&inner.second);
    compose_component(p, &mut xs, &mut ys, cap)
}

/// Exact coefficient-level composition `outer∘inner` with the default term cap.
pub fn compose_maps(outer: &BiPolyPair, inner: &BiPolyPair) -> Result<BiPolyPair> {
    compose_maps_capped(outer, inner, DEFAULT_TERM_CAP)
}

/// [`compose_maps`] with an explicit term cap.
pub fn compose_maps_capped(
    outer: &BiPolyPair,
    inner: &BiPolyPair,
    cap: usize,
) -> Result<BiPolyPair> {
    let mut xs = Powers::new(&inner.first);
    let mut ys = Powers::new(&inner.second);
    let first = compose_component(&outer.first, &mut xs, &mut ys, cap)?;
    let second = compose_component(&outer.second, &mut xs, &mut ys, cap)?;
    Ok(BiPolyPair { first, second })
}
