//! Exact rational scalar for law testing and the CLI `rational` mode.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;

use super::{Monoid, Semiring, UnsupportedPrimitive};

/// An arbitrary-precision rational, always in lowest terms with a positive
/// denominator. Arbitrary precision keeps the law suites free of overflow
/// artifacts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let mut r = Rational {
            num: num.into(),
            den: den.into(),
        };
        assert!(r.den != BigInt::from(0), "zero denominator");
        r.reduce();
        r
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rational {
            num: n.into(),
            den: BigInt::from(1),
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    fn reduce(&mut self) {
        if self.den < BigInt::from(0) {
            self.num = -std::mem::take(&mut self.num);
            self.den = -std::mem::take(&mut self.den);
        }
        let g = self.num.gcd(&self.den);
        if g > BigInt::from(1) {
            self.num = &self.num / &g;
            self.den = &self.den / &g;
        }
    }
}

impl Monoid for Rational {
    fn zero() -> Self {
        Rational::from_int(0)
    }

    fn add(&self, rhs: &Self) -> Self {
        Rational::new(
            &self.num * &rhs.den + &rhs.num * &self.den,
            &self.den * &rhs.den,
        )
    }
}

impl Semiring for Rational {
    fn one() -> Self {
        Rational::from_int(1)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Rational::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
        Ok(Rational {
            num: -self.num.clone(),
            den: self.den.clone(),
        })
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == BigInt::from(1) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parses `p`, `-p` or `p/q`.
impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse_int = |t: &str| {
            BigInt::from_str(t.trim()).map_err(|_| format!("invalid rational component `{t}`"))
        };
        match s.split_once('/') {
            None => Ok(Rational::from_int(parse_int(s)?)),
            Some((p, q)) => {
                let den = parse_int(q)?;
                if den == BigInt::from(0) {
                    return Err("zero denominator".to_string());
                }
                Ok(Rational::new(parse_int(p)?, den))
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((&self.num * &other.den).cmp(&(&other.num * &self.den)))
    }
}
