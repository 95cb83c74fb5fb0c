//! Exact rationals and the small amount of combinatorics the calculus needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always stored in lowest terms with a positive denominator.
pub type Rat = BigRational;

/// Builds `num / den`. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or an integer string. Decimals are rejected.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    let parse_int = |p: &str| -> Result<BigInt> {
        let p = p.trim();
        if p.is_empty() || p.contains('.') || p.contains('e') || p.contains('E') {
            return Err(bad());
        }
        p.parse::<BigInt>().map_err(|_| bad())
    };
    match t.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(parse_int(t)?)),
    }
}

/// Canonical text form: `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn binomial(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    Rat::from_integer(acc)
}

/// Falling factorial `n (n-1) ... (n-k+1)` of an integer argument.
pub fn falling(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    (0..k).fold(Rat::one(), |acc, j| acc * int((n - j) as i64))
}

pub fn to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rat("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rat(" 3 ").unwrap(), int(3));
        assert_eq!(parse_rat("2/-6").unwrap(), rat(-1, 3));
    }

    #[test]
    fn rejects_decimals_and_garbage() {
        for s in ["0.5", "1e3", "", "1/0", "a/b", "1/2/3"] {
            assert!(parse_rat(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(fmt_rat(&rat(10, -4)), "-5/2");
        assert_eq!(fmt_rat(&int(7)), "7");
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(2, 5), int(0));
        assert_eq!(falling(5, 3), int(60));
        assert_eq!(falling(3, 0), int(1));
    }
}
