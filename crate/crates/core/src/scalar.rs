//! Scalar abstraction shared by the exact (rational) and floating point code paths.
//!
//! Everything that only needs field arithmetic is written against [`Scalar`], so the
//! same routine serves exact verification with [`Rational`] and fast screening with
//! `f64`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// A field element usable by the generic matrix and density code.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Signed
    + num_traits::Num
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
    + 'static
{
    /// Whether arithmetic is exact; inexact scalars compare against a tolerance.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test; inexact scalars treat magnitudes below `1e-12` as zero.
    fn is_negligible(&self) -> bool;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            const EXACT: bool = false;

            fn from_i64(v: i64) -> Self {
                v as $f
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $f / den as $f
            }

            fn from_rational(r: &Rational) -> Self {
                rational_to_f64(r) as $f
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn is_negligible(&self) -> bool {
                (*self as f64).abs() < 1e-12
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge numerators/denominators before dividing.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, `"-p/q"` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let err = || Error::Parse {
        what: "rational",
        text: text.to_string(),
    };
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// `"p/q"` with `q > 0`, or just `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Binomial coefficient as `u128`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

pub fn binomial_rational(n: usize, k: usize) -> Rational {
    Rational::from_integer(BigInt::from(binomial(n as u64, k as u64)))
}

/// Absolute value helper that reads better at call sites with references.
pub fn abs<T: Scalar>(v: &T) -> T {
    v.abs()
}
