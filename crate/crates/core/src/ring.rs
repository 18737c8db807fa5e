//! Coefficient rings and exact field arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoeffRing {
    Z,
    Q,
    Zp(u64),
    /// `Z[t]`, `deg t = -4`.
    Zt,
    /// `Z[h,t]`, `deg h = -2`, `deg t = -4`.
    Zht,
    /// `Z[H]`, the universal ring.
    ZH,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl CoeffRing {
    pub fn is_field(&self) -> bool {
        matches!(self, CoeffRing::Q | CoeffRing::Zp(_))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            CoeffRing::Zp(p) => *p,
            _ => 0,
        }
    }

    /// Rings whose homology this crate computes.
    pub fn supports_homology(&self) -> bool {
        matches!(self, CoeffRing::Z | CoeffRing::Q | CoeffRing::Zp(_))
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRing::Z => write!(f, "Z"),
            CoeffRing::Q => write!(f, "Q"),
            CoeffRing::Zp(p) => write!(f, "Zp:{p}"),
            CoeffRing::Zt => write!(f, "Z[t]"),
            CoeffRing::Zht => write!(f, "Z[h,t]"),
            CoeffRing::ZH => write!(f, "Z[H]"),
        }
    }
}

impl FromStr for CoeffRing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let r = match s {
            "Z" => CoeffRing::Z,
            "Q" => CoeffRing::Q,
            "Z[t]" => CoeffRing::Zt,
            "Z[h,t]" => CoeffRing::Zht,
            "Z[H]" => CoeffRing::ZH,
            _ => {
                let p = s
                    .strip_prefix("Zp:")
                    .or_else(|| s.strip_prefix("Z_"))
                    .or_else(|| s.strip_prefix('Z'))
                    .and_then(|p| p.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown ring '{s}'")))?;
                if !is_prime(p) {
                    return Err(Error::Argument(format!("{p} is not prime")));
                }
                CoeffRing::Zp(p)
            }
        };
        Ok(r)
    }
}

/// Field operations with a runtime context.
pub trait Field {
    type E: Clone + PartialEq + fmt::Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E {
        self.from_int(&BigInt::one())
    }
    fn from_int(&self, v: &BigInt) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        self.add(a, &self.neg(b))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PrimeField {
    pub p: u64,
}

impl Field for PrimeField {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn from_int(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let r = ((v % &p) + &p) % &p;
        r.try_into().unwrap()
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn inv(&self, a: &u64) -> u64 {
        let (mut r, mut base, mut e) = (1u64, *a, self.p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Rationals;

impl Field for Rationals {
    type E = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn from_int(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

/// Whether `v` is a square in the field (`p` = 0 for Q).
pub fn is_square(v: &BigRational, p: u64) -> bool {
    if p == 0 {
        if v.is_negative() {
            return false;
        }
        let sq = |n: &BigInt| {
            let r = n.sqrt();
            &r * &r == *n
        };
        return sq(v.numer()) && sq(v.denom());
    }
    let f = PrimeField { p };
    let x = f.mul(&f.from_int(v.numer()), &f.inv(&f.from_int(v.denom())));
    if x == 0 || p == 2 {
        return true;
    }
    let mut r = 1u64;
    let (mut base, mut e) = (x, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            r = f.mul(&r, &base);
        }
        base = f.mul(&base, &base);
        e >>= 1;
    }
    r == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rings() {
        assert_eq!("Zp:3".parse::<CoeffRing>().unwrap(), CoeffRing::Zp(3));
        assert_eq!("Z2".parse::<CoeffRing>().unwrap(), CoeffRing::Zp(2));
        assert!("Zp:4".parse::<CoeffRing>().is_err());
        assert_eq!(CoeffRing::Zp(5).to_string().parse::<CoeffRing>().unwrap(), CoeffRing::Zp(5));
    }

    #[test]
    fn prime_field() {
        let f = PrimeField { p: 7 };
        for a in 1..7 {
            assert_eq!(f.mul(&a, &f.inv(&a)), 1);
        }
        assert_eq!(f.from_int(&BigInt::from(-3)), 4);
    }

    #[test]
    fn squares() {
        let q = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert!(is_square(&q(4), 0));
        assert!(!is_square(&q(2), 0));
        assert!(is_square(&q(2), 7));
        assert!(!is_square(&q(3), 7));
    }
}
