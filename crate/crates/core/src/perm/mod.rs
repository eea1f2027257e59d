//! Permutations as one-line words, pattern counting and densities.

mod formal;
mod symmetry;

pub use formal::{formal_density, project_up, FormalSum};
pub use symmetry::Symmetry;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::scalar::binomial;
use crate::Rational;

/// Orders above this get the fast counters when the pattern is one they support.
const FAST_COUNT_THRESHOLD: usize = 20;

/// A bijection on `[n]` stored as its word `π(1)…π(n)` (1-based values).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    word: Vec<u32>,
}

impl Permutation {
    /// Validates that `word` is a rearrangement of `1..=n`.
    pub fn new(word: Vec<u32>) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = word.len();
        let mut seen = vec![false; n + 1];
        for &v in &word {
            let v = v as usize;
            if v == 0 || v > n {
                return Err(Error::ValueOutOfRange { value: v, order: n });
            }
            if seen[v] {
                return Err(Error::DuplicateValue(v));
            }
            seen[v] = true;
        }
        Ok(Permutation { word })
    }

    pub(crate) fn from_word_unchecked(word: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(word.clone()).is_ok(), "{word:?}");
        Permutation { word }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            word: (1..=n as u32).collect(),
        }
    }

    /// The permutation `π(i) = n + 1 - i`.
    pub fn decreasing(n: usize) -> Self {
        Permutation {
            word: (1..=n as u32).rev().collect(),
        }
    }

    /// The standardization of an arbitrary sequence of distinct values.
    /// Incomparable values (NaN) are treated as equal.
    pub fn pattern_of<T: PartialOrd>(values: &[T]) -> Self {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
        let mut word = vec![0u32; values.len()];
        for (rank, &i) in idx.iter().enumerate() {
            word[i] = rank as u32 + 1;
        }
        Permutation { word }
    }

    pub fn order(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    /// `π(position)` for a 1-based position.
    pub fn at(&self, position: usize) -> usize {
        self.word[position - 1] as usize
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.word.len()];
        for (i, &v) in self.word.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { word: inv }
    }

    pub fn reverse(&self) -> Self {
        Permutation {
            word: self.word.iter().rev().copied().collect(),
        }
    }

    pub fn complement(&self) -> Self {
        let n = self.word.len() as u32;
        Permutation {
            word: self.word.iter().map(|&v| n + 1 - v).collect(),
        }
    }

    /// The pattern induced by a set of 0-based positions given in increasing order.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        let values: Vec<u32> = positions.iter().map(|&p| self.word[p]).collect();
        Permutation::pattern_of(&values)
    }

    /// 0/1 permutation matrix with `A(i, π(i)) = 1` (0-based indices).
    pub fn matrix<T: crate::Scalar>(&self) -> crate::Matrix<T> {
        let n = self.order();
        crate::Matrix::from_fn(n, n, |r, c| {
            if self.word[r] as usize == c + 1 {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Lexicographic successor among permutations of the same order.
    pub fn next_lexicographic(&self) -> Option<Self> {
        let mut w = self.word.clone();
        let n = w.len();
        let i = (0..n.saturating_sub(1)).rev().find(|&i| w[i] < w[i + 1])?;
        let j = (i + 1..n).rev().find(|&j| w[j] > w[i])?;
        w.swap(i, j);
        w[i + 1..].reverse();
        Some(Permutation { word: w })
    }
}

impl Ord for Permutation {
    /// Shorter permutations first, then lexicographic by word.
    fn cmp(&self, other: &Self) -> Ordering {
        self.word
            .len()
            .cmp(&other.word.len())
            .then_with(|| self.word.cmp(&other.word))
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.len() <= 9 {
            for v in &self.word {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.word.iter().map(u32::to_string).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl serde::Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_permutation(&text).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_permutation(s)
    }
}

/// Parses a word: plain digits when `n <= 9`, otherwise comma separated values.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::EmptyInput);
    }
    let parse_err = || Error::Parse {
        what: "permutation",
        text: text.to_string(),
    };
    let word: Vec<u32> = if t.contains(',') {
        t.split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| parse_err()))
            .collect::<Result<_>>()?
    } else {
        t.chars()
            .map(|c| c.to_digit(10).ok_or_else(parse_err))
            .collect::<Result<_>>()?
    };
    Permutation::new(word)
}

/// All `n!` permutations of order `n` in lexicographic order, `1 <= n <= 10`.
pub fn enumerate_sn(n: usize) -> Result<Vec<Permutation>> {
    if !(1..=10).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 1,
            max: 10,
        });
    }
    let mut out = Vec::with_capacity(crate::scalar::factorial(n as u64) as usize);
    let mut cur = Some(Permutation::identity(n));
    while let Some(p) = cur {
        cur = p.next_lexicographic();
        out.push(p);
    }
    Ok(out)
}

/// Number of copies of `sigma` in `pi`.
pub fn count_pattern(sigma: &Permutation, pi: &Permutation) -> u128 {
    let k = sigma.order();
    let n = pi.order();
    if k > n {
        return 0;
    }
    if n > FAST_COUNT_THRESHOLD {
        if let Some(c) = crate::stat::fast_count(sigma, pi) {
            return c;
        }
    }
    count_by_subsets(sigma, pi)
}

/// Counts copies by extending increasing position tuples one element at a time,
/// abandoning a prefix as soon as its relative order disagrees with `sigma`.
pub fn count_by_subsets(sigma: &Permutation, pi: &Permutation) -> u128 {
    let k = sigma.order();
    let n = pi.order();
    if k > n {
        return 0;
    }
    let mut chosen = Vec::with_capacity(k);
    extend_copies(sigma.word(), pi.word(), 0, &mut chosen)
}

fn extend_copies(sigma: &[u32], pi: &[u32], start: usize, chosen: &mut Vec<u32>) -> u128 {
    let depth = chosen.len();
    if depth == sigma.len() {
        return 1;
    }
    let remaining = sigma.len() - depth;
    let mut total = 0;
    for pos in start..=pi.len() - remaining {
        let v = pi[pos];
        let consistent = chosen
            .iter()
            .zip(sigma)
            .all(|(&w, &s)| (w < v) == (s < sigma[depth]));
        if consistent {
            chosen.push(v);
            total += extend_copies(sigma, pi, pos + 1, chosen);
            chosen.pop();
        }
    }
    total
}

/// `d(σ, π) = #(σ, π) / C(|π|, |σ|)`, zero when `|σ| > |π|`.
pub fn density(sigma: &Permutation, pi: &Permutation) -> Rational {
    let k = sigma.order();
    let n = pi.order();
    if k > n {
        return Rational::from_integer(BigInt::from(0));
    }
    Rational::new(
        BigInt::from(count_pattern(sigma, pi)),
        BigInt::from(binomial(n as u64, k as u64)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    /// Standardizes every k-subset of positions and compares with sigma.
    fn naive_count(sigma: &Permutation, pi: &Permutation) -> u128 {
        let n = pi.order();
        let k = sigma.order();
        if k > n {
            return 0;
        }
        let mut count = 0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let pos: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if pi.restrict(&pos) == *sigma {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn parse_examples() {
        assert_eq!(p("2143").word(), &[2, 1, 4, 3]);
        assert_eq!(p("1").word(), &[1]);
        assert_eq!("2254".parse::<Permutation>(), Err(Error::DuplicateValue(2)));
        assert_eq!("".parse::<Permutation>(), Err(Error::EmptyInput));
        assert!(matches!("1235".parse::<Permutation>(), Err(Error::ValueOutOfRange { value: 5, .. })));
        let long = p("10,9,8,7,6,5,4,3,2,1");
        assert_eq!(long.order(), 10);
        assert_eq!(long.to_string(), "10,9,8,7,6,5,4,3,2,1");
        assert_eq!(p("31425").to_string(), "31425");
    }

    #[test]
    fn enumeration() {
        assert_eq!(enumerate_sn(1).unwrap(), vec![p("1")]);
        let s3 = enumerate_sn(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert_eq!(s3[0], p("123"));
        assert_eq!(s3[5], p("321"));
        assert!(s3.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(enumerate_sn(6).unwrap().len(), 720);
        assert!(enumerate_sn(0).is_err());
        assert!(enumerate_sn(11).is_err());
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_pattern(&p("123"), &p("123456")), 20);
        assert_eq!(count_pattern(&p("21"), &p("2143")), 2);
        assert_eq!(count_pattern(&p("132"), &p("123")), 0);
        assert_eq!(count_pattern(&p("1234"), &p("123")), 0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&p("12"), &p("2413")), rat(1, 2));
        assert_eq!(density(&p("123"), &p("123456")), int(1));
        assert_eq!(density(&p("1234"), &p("123")), int(0));
    }

    #[test]
    fn subset_counting_matches_naive_oracle() {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=9 {
            let mut w: Vec<u32> = (1..=n).collect();
            w.shuffle(&mut rng);
            let pi = Permutation::new(w).unwrap();
            for k in 1..=n.min(4) as usize {
                for sigma in enumerate_sn(k).unwrap() {
                    assert_eq!(count_by_subsets(&sigma, &pi), naive_count(&sigma, &pi), "{sigma} in {pi}");
                }
            }
        }
    }

    #[test]
    fn pattern_counts_partition_subsets() {
        let pi = p("31524");
        for k in 1..=5 {
            let total: u128 = enumerate_sn(k).unwrap().iter().map(|s| count_pattern(s, &pi)).sum();
            assert_eq!(total, binomial(5, k as u64));
        }
    }

    #[test]
    fn inverse_and_restrict() {
        assert_eq!(p("2413").inverse(), p("3142"));
        assert_eq!(p("52341").restrict(&[0, 2, 4]), p("321"));
        assert_eq!(Permutation::pattern_of(&[0.3, 0.1, 0.9]), p("213"));
    }
}
