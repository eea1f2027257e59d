use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{density, enumerate_sn, parse_permutation, Permutation};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, parse_rational, rat};
use crate::Rational;

/// A finite linear combination `Σ c_i σ_i` with exact coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct FormalSum {
    terms: BTreeMap<Permutation, Rational>,
}

impl FormalSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(coeff: Rational, sigma: Permutation) -> Self {
        let mut s = Self::new();
        s.add_term(coeff, sigma);
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Permutation)>) -> Self {
        let mut s = Self::new();
        for (c, p) in terms {
            s.add_term(c, p);
        }
        s
    }

    pub fn add_term(&mut self, coeff: Rational, sigma: Permutation) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(sigma).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add_assign_scaled(&mut self, k: &Rational, other: &FormalSum) {
        for (p, c) in &other.terms {
            self.add_term(k * c, p.clone());
        }
    }

    pub fn scale(&self, k: &Rational) -> FormalSum {
        let mut out = FormalSum::new();
        out.add_assign_scaled(k, self);
        out
    }

    pub fn add(&self, other: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out.add_assign_scaled(&Rational::one(), other);
        out
    }

    pub fn sub(&self, other: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out.add_assign_scaled(&-Rational::one(), other);
        out
    }

    pub fn coefficient(&self, sigma: &Permutation) -> Rational {
        self.terms.get(sigma).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in ascending permutation order (shorter first).
    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(Permutation::order).max().unwrap_or(0)
    }

    /// `d(ρ, λ) = Σ c_i / |σ_i|!`, the value on the uniform permuton.
    pub fn uniform_value(&self) -> Rational {
        self.iter()
            .map(|(p, c)| c / Rational::from_integer(crate::scalar::factorial(p.order() as u64).into()))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn apply_symmetry(&self, s: super::Symmetry) -> FormalSum {
        FormalSum::from_terms(self.iter().map(|(p, c)| (c.clone(), s.apply(p))))
    }

    /// `ρ* = 123 + 321 + 2143 + 3412 + ½(2413 + 3142)`.
    pub fn rho_star() -> FormalSum {
        let half = rat(1, 2);
        FormalSum::from_terms([
            (int(1), perm("123")),
            (int(1), perm("321")),
            (int(1), perm("2143")),
            (int(1), perm("3412")),
            (half.clone(), perm("2413")),
            (half, perm("3142")),
        ])
    }

    /// `ν = 12 + 21`.
    pub fn nu() -> FormalSum {
        FormalSum::from_terms([(int(1), perm("12")), (int(1), perm("21"))])
    }

    /// `ξ = 2(123) - 2(321) - 3(12)`.
    pub fn xi() -> FormalSum {
        FormalSum::from_terms([(int(2), perm("123")), (int(-2), perm("321")), (int(-3), perm("12"))])
    }

    /// Sum of the eight order-4 patterns whose density measures concordance of pairs of pairs.
    pub fn tau_star() -> FormalSum {
        FormalSum::from_terms(
            ["1234", "1243", "2134", "2143", "3412", "3421", "4312", "4321"]
                .into_iter()
                .map(|w| (int(1), perm(w))),
        )
    }

    /// Terms in display order: longest permutations first, then lexicographic.
    pub fn display_terms(&self) -> Vec<(&Permutation, &Rational)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by_key(|(p, _)| (Reverse(p.order()), p.word().to_vec()));
        v
    }
}

fn perm(s: &str) -> Permutation {
    parse_permutation(s).expect("valid literal")
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.display_terms().into_iter().enumerate() {
            let word = p.to_string();
            let bare_ok = !word.contains(',');
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            if mag.is_one() && bare_ok {
                write!(f, "{sign}{word}")?;
            } else if mag.is_one() {
                write!(f, "{sign}({word})")?;
            } else {
                write!(f, "{sign}{}({word})", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalSum({self})")
    }
}

impl FromStr for FormalSum {
    type Err = Error;

    /// Accepts expressions such as `3(1234)+3(4321)-4(123)+3(12)` or
    /// `123+321+1/2(2413)`; `0` is the empty sum.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "formal sum",
            text: s.to_string(),
        };
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text == "0" {
            return Ok(FormalSum::new());
        }
        let bytes = text.as_bytes();
        let mut i = 0;
        let mut out = FormalSum::new();
        if bytes.is_empty() {
            return Err(err());
        }
        while i < bytes.len() {
            let mut negative = false;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                negative = bytes[i] == b'-';
                i += 1;
            } else if i > 0 {
                return Err(err());
            }
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
                i += 1;
            }
            let number = &text[start..i];
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            let (coeff, word) = if i < bytes.len() && bytes[i] == b'(' {
                let close = text[i..].find(')').ok_or_else(err)? + i;
                let word = &text[i + 1..close];
                i = close + 1;
                let coeff = if number.is_empty() { int(1) } else { parse_rational(number)? };
                (coeff, word.to_string())
            } else {
                if number.is_empty() || number.contains('/') {
                    return Err(err());
                }
                (int(1), number.to_string())
            };
            let sigma = parse_permutation(&word)?;
            out.add_term(if negative { -coeff } else { coeff }, sigma);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coeff: String,
    perm: String,
}

impl Serialize for FormalSum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .iter()
            .map(|(p, c)| TermRecord {
                coeff: format_rational(c),
                perm: p.to_string(),
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalSum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(d)?;
        let mut out = FormalSum::new();
        for r in records {
            let c = parse_rational(&r.coeff).map_err(serde::de::Error::custom)?;
            let p = parse_permutation(&r.perm).map_err(serde::de::Error::custom)?;
            out.add_term(c, p);
        }
        Ok(out)
    }
}

/// `d(ρ, π) = Σ c_i d(σ_i, π)`.
pub fn formal_density(rho: &FormalSum, pi: &Permutation) -> Rational {
    rho.iter()
        .map(|(sigma, c)| c * density(sigma, pi))
        .fold(Rational::zero(), |a, b| a + b)
}

/// The degree-`n` representative `Σ_{π ∈ S_n} d(ρ, π) π`.
pub fn project_up(rho: &FormalSum, n: usize) -> Result<FormalSum> {
    let min = rho.max_order().max(1);
    if n < min || n > 8 {
        return Err(Error::OutOfRange {
            what: "projection order",
            value: n,
            min,
            max: 8,
        });
    }
    let mut out = FormalSum::new();
    for pi in enumerate_sn(n)? {
        let c = formal_density(rho, &pi);
        out.add_term(c, pi);
    }
    Ok(out)
}
