//! Exact coefficient rings: polynomials in `x` on the line and finite
//! trigonometric polynomials on the circle.
//!
//! Every value is immutable and normalized, so structural equality is
//! mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, int, parse_rat, to_f64, Rat};

/// Base geometry of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Line,
    Circle,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Line => "line",
            Space::Circle => "circle",
        })
    }
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "line" => Ok(Space::Line),
            "circle" => Ok(Space::Circle),
            other => Err(Error::Parse(format!("unknown space {other:?}"))),
        }
    }
}

/// Polynomial in `x` with rational coefficients, indexed by degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyFn {
    coeffs: Vec<Rat>,
}

impl PolyFn {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PolyFn { coeffs }
    }

    pub fn monomial(c: Rat, degree: usize) -> Self {
        let mut v = vec![Rat::zero(); degree + 1];
        v[degree] = c;
        PolyFn::new(v)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    fn add(&self, other: &PolyFn) -> PolyFn {
        let n = self.coeffs.len().max(other.coeffs.len());
        PolyFn::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    fn scale(&self, c: &Rat) -> PolyFn {
        PolyFn::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    fn mul(&self, other: &PolyFn) -> PolyFn {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return PolyFn::default();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        PolyFn::new(out)
    }

    fn diff(&self, n: usize) -> PolyFn {
        if n >= self.coeffs.len() {
            return PolyFn::default();
        }
        let v = (n..self.coeffs.len())
            .map(|i| &self.coeffs[i] * crate::rational::falling(i, n))
            .collect();
        PolyFn::new(v)
    }

    fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + to_f64(c))
    }
}

/// Finite trigonometric polynomial `mean + Σ cos_n cos(nx) + sin_n sin(nx)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TrigFn {
    mean: Rat,
    cos: BTreeMap<u32, Rat>,
    sin: BTreeMap<u32, Rat>,
}

impl TrigFn {
    pub fn constant(c: Rat) -> Self {
        TrigFn {
            mean: c,
            ..Default::default()
        }
    }

    pub fn cos(n: u32, c: Rat) -> Self {
        let mut t = TrigFn::default();
        t.add_cos(n as i64, c);
        t
    }

    pub fn sin(n: u32, c: Rat) -> Self {
        let mut t = TrigFn::default();
        t.add_sin(n as i64, c);
        t
    }

    pub fn mean(&self) -> &Rat {
        &self.mean
    }

    pub fn cos_coeff(&self, n: u32) -> Rat {
        if n == 0 {
            return self.mean.clone();
        }
        self.cos.get(&n).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn sin_coeff(&self, n: u32) -> Rat {
        self.sin.get(&n).cloned().unwrap_or_else(Rat::zero)
    }

    /// Highest frequency present; `0` for constants (including zero).
    pub fn max_frequency(&self) -> u32 {
        let c = self.cos.keys().next_back().copied().unwrap_or(0);
        let s = self.sin.keys().next_back().copied().unwrap_or(0);
        c.max(s)
    }

    pub fn is_zero(&self) -> bool {
        self.mean.is_zero() && self.cos.is_empty() && self.sin.is_empty()
    }

    fn bump(map: &mut BTreeMap<u32, Rat>, n: u32, c: Rat) {
        let e = map.entry(n).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            map.remove(&n);
        }
    }

    /// Adds `c cos(nx)`; negative `n` folds by parity of cosine.
    fn add_cos(&mut self, n: i64, c: Rat) {
        if c.is_zero() {
            return;
        }
        let m = n.unsigned_abs() as u32;
        if m == 0 {
            self.mean += c;
        } else {
            Self::bump(&mut self.cos, m, c);
        }
    }

    /// Adds `c sin(nx)`; negative `n` flips the sign.
    fn add_sin(&mut self, n: i64, c: Rat) {
        if c.is_zero() || n == 0 {
            return;
        }
        let m = n.unsigned_abs() as u32;
        Self::bump(&mut self.sin, m, if n < 0 { -c } else { c });
    }

    fn add(&self, other: &TrigFn) -> TrigFn {
        let mut out = self.clone();
        out.mean += &other.mean;
        for (n, c) in &other.cos {
            Self::bump(&mut out.cos, *n, c.clone());
        }
        for (n, c) in &other.sin {
            Self::bump(&mut out.sin, *n, c.clone());
        }
        out
    }

    fn scale(&self, c: &Rat) -> TrigFn {
        if c.is_zero() {
            return TrigFn::default();
        }
        TrigFn {
            mean: &self.mean * c,
            cos: self.cos.iter().map(|(n, a)| (*n, a * c)).collect(),
            sin: self.sin.iter().map(|(n, a)| (*n, a * c)).collect(),
        }
    }

    fn terms(&self) -> Vec<(bool, i64, Rat)> {
        // (is_sine, frequency, coefficient)
        let mut v = Vec::with_capacity(1 + self.cos.len() + self.sin.len());
        if !self.mean.is_zero() {
            v.push((false, 0, self.mean.clone()));
        }
        v.extend(self.cos.iter().map(|(n, c)| (false, *n as i64, c.clone())));
        v.extend(self.sin.iter().map(|(n, c)| (true, *n as i64, c.clone())));
        v
    }

    fn mul(&self, other: &TrigFn) -> TrigFn {
        let half = Rat::new(1.into(), 2.into());
        let mut out = TrigFn::default();
        for (sa, a, ca) in self.terms() {
            for (sb, b, cb) in other.terms() {
                let h = &ca * &cb * &half;
                match (sa, sb) {
                    (false, false) => {
                        out.add_cos(a - b, h.clone());
                        out.add_cos(a + b, h);
                    }
                    (true, true) => {
                        out.add_cos(a - b, h.clone());
                        out.add_cos(a + b, -h);
                    }
                    (true, false) => {
                        out.add_sin(a + b, h.clone());
                        out.add_sin(a - b, h);
                    }
                    (false, true) => {
                        out.add_sin(a + b, h.clone());
                        out.add_sin(b - a, h);
                    }
                }
            }
        }
        out
    }

    fn diff_once(&self) -> TrigFn {
        let mut out = TrigFn::default();
        for (n, c) in &self.cos {
            out.add_sin(*n as i64, -(c * int(*n as i64)));
        }
        for (n, c) in &self.sin {
            out.add_cos(*n as i64, c * int(*n as i64));
        }
        out
    }

    fn eval(&self, x: f64) -> f64 {
        let mut acc = to_f64(&self.mean);
        for (n, c) in &self.cos {
            acc += to_f64(c) * (*n as f64 * x).cos();
        }
        for (n, c) in &self.sin {
            acc += to_f64(c) * (*n as f64 * x).sin();
        }
        acc
    }
}

/// An element of one of the two coefficient rings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoefficientFunction {
    Poly(PolyFn),
    Trig(TrigFn),
}

use CoefficientFunction::{Poly, Trig};

impl CoefficientFunction {
    pub fn zero(space: Space) -> Self {
        match space {
            Space::Line => Poly(PolyFn::default()),
            Space::Circle => Trig(TrigFn::default()),
        }
    }

    pub fn constant(space: Space, c: Rat) -> Self {
        match space {
            Space::Line => Poly(PolyFn::new(vec![c])),
            Space::Circle => Trig(TrigFn::constant(c)),
        }
    }

    pub fn one(space: Space) -> Self {
        Self::constant(space, Rat::one())
    }

    /// `c x^d` on the line.
    pub fn monomial(c: Rat, d: usize) -> Self {
        Poly(PolyFn::monomial(c, d))
    }

    pub fn x() -> Self {
        Self::monomial(Rat::one(), 1)
    }

    pub fn cos(n: u32) -> Self {
        Trig(TrigFn::cos(n, Rat::one()))
    }

    pub fn sin(n: u32) -> Self {
        Trig(TrigFn::sin(n, Rat::one()))
    }

    pub fn space(&self) -> Space {
        match self {
            Poly(_) => Space::Line,
            Trig(_) => Space::Circle,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Poly(p) => p.coeffs.is_empty(),
            Trig(t) => t.is_zero(),
        }
    }

    /// Polynomial degree or maximal frequency; zero maps to `0`.
    pub fn size(&self) -> usize {
        match self {
            Poly(p) => p.degree().unwrap_or(0),
            Trig(t) => t.max_frequency() as usize,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Poly(a), Poly(b)) => Ok(Poly(a.add(b))),
            (Trig(a), Trig(b)) => Ok(Trig(a.add(b))),
            _ => Err(Error::RingMismatch),
        }
    }

    /// Exact product; on the circle the result is re-expanded by product-to-sum.
    pub fn ring_mul(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Poly(a), Poly(b)) => Ok(Poly(a.mul(b))),
            (Trig(a), Trig(b)) => Ok(Trig(a.mul(b))),
            _ => Err(Error::RingMismatch),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        match self {
            Poly(p) => Poly(p.scale(c)),
            Trig(t) => Trig(t.scale(c)),
        }
    }

    /// n-th derivative.
    pub fn ring_diff(&self, n: usize) -> Self {
        match self {
            Poly(p) => Poly(p.diff(n)),
            Trig(t) => {
                let mut t = t.clone();
                for _ in 0..n {
                    if t.is_zero() {
                        break;
                    }
                    t = t.diff_once();
                }
                Trig(t)
            }
        }
    }

    pub fn diff(&self) -> Self {
        self.ring_diff(1)
    }

    /// Mean Fourier coefficient, i.e. the circle integral divided by the period.
    pub fn circle_mean(&self) -> Result<Rat> {
        match self {
            Trig(t) => Ok(t.mean.clone()),
            Poly(_) => Err(Error::UnsupportedFunctional(
                "the circle mean is not defined for line coefficients".into(),
            )),
        }
    }

    /// Floating-point evaluation, used only as a sanity bridge in tests.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Poly(p) => p.eval(x),
            Trig(t) => t.eval(x),
        }
    }

    pub fn as_poly(&self) -> Option<&PolyFn> {
        match self {
            Poly(p) => Some(p),
            Trig(_) => None,
        }
    }

    pub fn as_trig(&self) -> Option<&TrigFn> {
        match self {
            Trig(t) => Some(t),
            Poly(_) => None,
        }
    }
}

fn expect_same(a: &CoefficientFunction, b: &CoefficientFunction) {
    assert_eq!(
        a.space(),
        b.space(),
        "ring mismatch in coefficient arithmetic"
    );
}

// Operator sugar for internal code that has already validated the space tag.
// Mixing spaces through these impls is a programming error and panics;
// the fallible entry points are `try_add` and `ring_mul`.
impl Add for &CoefficientFunction {
    type Output = CoefficientFunction;
    fn add(self, rhs: Self) -> CoefficientFunction {
        expect_same(self, rhs);
        self.try_add(rhs).expect("checked above")
    }
}

impl Sub for &CoefficientFunction {
    type Output = CoefficientFunction;
    fn sub(self, rhs: Self) -> CoefficientFunction {
        self + &(-rhs)
    }
}

impl Neg for &CoefficientFunction {
    type Output = CoefficientFunction;
    fn neg(self) -> CoefficientFunction {
        self.scale(&-Rat::one())
    }
}

impl Mul for &CoefficientFunction {
    type Output = CoefficientFunction;
    fn mul(self, rhs: Self) -> CoefficientFunction {
        expect_same(self, rhs);
        self.ring_mul(rhs).expect("checked above")
    }
}

impl fmt::Display for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Poly(p) => {
                let terms: Vec<String> = p
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| match i {
                        0 => fmt_rat(c),
                        1 => format!("{}*x", fmt_rat(c)),
                        _ => format!("{}*x^{}", fmt_rat(c), i),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "poly: 0")
                } else {
                    write!(f, "poly: {}", terms.join(" + "))
                }
            }
            Trig(t) => {
                write!(f, "trig: {}", fmt_rat(&t.mean))?;
                let freqs: std::collections::BTreeSet<u32> =
                    t.cos.keys().chain(t.sin.keys()).copied().collect();
                let parts: Vec<String> = freqs
                    .iter()
                    .map(|n| {
                        format!(
                            "{}:cos={},sin={}",
                            n,
                            fmt_rat(&t.cos_coeff(*n)),
                            fmt_rat(&t.sin_coeff(*n))
                        )
                    })
                    .collect();
                if !parts.is_empty() {
                    write!(f, " | {}", parts.join(" ; "))?;
                }
                Ok(())
            }
        }
    }
}

fn parse_poly_term(term: &str) -> Result<(usize, Rat)> {
    let bad = || Error::Parse(format!("bad polynomial term {term:?}"));
    let t = term.trim();
    let (coef, var) = match t.find('x') {
        None => return Ok((0, parse_rat(t)?)),
        Some(pos) => (
            t[..pos].trim().trim_end_matches('*').trim(),
            t[pos..].trim(),
        ),
    };
    let c = match coef {
        "" => Rat::one(),
        "-" => -Rat::one(),
        s => parse_rat(s)?,
    };
    let deg = if var == "x" {
        1
    } else {
        var.strip_prefix("x^")
            .ok_or_else(bad)?
            .trim()
            .parse::<usize>()
            .map_err(|_| bad())?
    };
    Ok((deg, c))
}

impl FromStr for CoefficientFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("poly:") {
            let mut acc = PolyFn::default();
            for term in body.split('+').filter(|t| !t.trim().is_empty()) {
                let (d, c) = parse_poly_term(term)?;
                acc = acc.add(&PolyFn::monomial(c, d));
            }
            Ok(Poly(acc))
        } else if let Some(body) = s.strip_prefix("trig:") {
            let (mean, rest) = match body.split_once('|') {
                Some((m, r)) => (m, Some(r)),
                None => (body, None),
            };
            let mut t = TrigFn::constant(parse_rat(mean)?);
            for part in rest.into_iter().flat_map(|r| r.split(';')) {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let bad = || Error::Parse(format!("bad trig term {part:?}"));
                let (n, cs) = part.split_once(':').ok_or_else(bad)?;
                let n: u32 = n.trim().parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                for kv in cs.split(',') {
                    let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                    let v = parse_rat(v)?;
                    match k.trim() {
                        "cos" => t.add_cos(n as i64, v),
                        "sin" => t.add_sin(n as i64, v),
                        _ => return Err(bad()),
                    }
                }
            }
            Ok(Trig(t))
        } else {
            Err(Error::Parse(format!(
                "ring element must start with 'poly:' or 'trig:': {s:?}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn cf(s: &str) -> CoefficientFunction {
        s.parse().unwrap()
    }

    #[test]
    fn monomial_product() {
        let x = CoefficientFunction::x();
        let x2 = CoefficientFunction::monomial(int(1), 2);
        assert_eq!(
            x.ring_mul(&x2).unwrap(),
            CoefficientFunction::monomial(int(1), 3)
        );
    }

    #[test]
    fn cos_squared_by_product_to_sum() {
        let c = CoefficientFunction::cos(1);
        let sq = c.ring_mul(&c).unwrap();
        let expected = &CoefficientFunction::constant(Space::Circle, rat(1, 2))
            + &CoefficientFunction::cos(2).scale(&rat(1, 2));
        assert_eq!(sq, expected);
        // pointwise check at 8 sample angles
        for j in 0..8 {
            let t = j as f64 * std::f64::consts::PI / 4.0 + 0.1;
            assert!((sq.eval(t) - t.cos() * t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_absorbs() {
        let f = cf("trig: 2 | 1:cos=1,sin=3 ; 4:cos=0,sin=-1/2");
        assert!(f
            .ring_mul(&CoefficientFunction::zero(Space::Circle))
            .unwrap()
            .is_zero());
        let g = cf("poly: 1 + 2*x");
        assert!(g
            .ring_mul(&CoefficientFunction::zero(Space::Line))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn mixed_spaces_error() {
        let a = CoefficientFunction::x();
        let b = CoefficientFunction::cos(1);
        assert_eq!(a.ring_mul(&b), Err(Error::RingMismatch));
        assert_eq!(a.try_add(&b), Err(Error::RingMismatch));
    }

    #[test]
    fn derivatives() {
        assert_eq!(
            CoefficientFunction::monomial(int(1), 3).ring_diff(1),
            CoefficientFunction::monomial(int(3), 2)
        );
        assert_eq!(
            CoefficientFunction::cos(2).ring_diff(1),
            cf("trig: 0 | 2:sin=-2")
        );
        assert_eq!(
            CoefficientFunction::sin(1).ring_diff(2),
            cf("trig: 0 | 1:sin=-1")
        );
        assert!(CoefficientFunction::x().ring_diff(2).is_zero());
    }

    #[test]
    fn means() {
        assert_eq!(cf("trig: 2 | 1:cos=1").circle_mean().unwrap(), int(2));
        assert_eq!(cf("trig: 0 | 3:sin=1").circle_mean().unwrap(), int(0));
        assert!(matches!(
            CoefficientFunction::x().circle_mean(),
            Err(Error::UnsupportedFunctional(_))
        ));
    }

    #[test]
    fn frequency_of_product_is_sum() {
        let a = cf("trig: 1 | 2:cos=1,sin=1");
        let b = cf("trig: 0 | 3:sin=2");
        assert_eq!(a.ring_mul(&b).unwrap().size(), 5);
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "poly: 0",
            "poly: -1/2 + 3*x^2",
            "trig: 0",
            "trig: 2 | 1:cos=1,sin=0 ; 3:cos=0,sin=-1/2",
        ] {
            let f = cf(s);
            assert_eq!(cf(&f.to_string()), f, "{s}");
        }
        assert_eq!(cf("poly: x + -x^2"), cf("poly: 0 + 1*x + -1*x^2"));
        assert!("exp: 1".parse::<CoefficientFunction>().is_err());
        assert!("poly: 0.5".parse::<CoefficientFunction>().is_err());
    }
}
