//! The ρ* statistic on bivariate samples: rank permutation, fast six-pattern counts
//! and a Monte Carlo permutation test.

use std::io::Read;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::scalar::{binomial, format_rational, rat};
use crate::Rational;

/// Paired observations `(x_i, y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SampleSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidSample(format!(
                "{} x values but {} y values",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite value".into()));
        }
        Ok(SampleSeries { x, y })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Two numeric columns per record; a first line that does not parse is taken as a header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != 2 {
                return Err(Error::InvalidSample(format!(
                    "line {}: expected 2 columns, found {}",
                    line + 1,
                    rec.len()
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => pairs.push((a, b)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::InvalidSample(format!(
                        "line {}: cannot parse {:?}",
                        line + 1,
                        rec.iter().collect::<Vec<_>>()
                    )))
                }
            }
        }
        Self::from_pairs(&pairs)
    }
}

/// Ranks of `values` (1-based). Ties are an error unless `rng` is given, in which case
/// tied values are ordered uniformly at random.
fn ranks(values: &[f64], axis: &'static str, rng: Option<&mut ChaCha8Rng>) -> Result<Vec<u32>> {
    let n = values.len();
    let jitter: Vec<u64> = match rng {
        Some(r) => (0..n).map(|_| r.gen()).collect(),
        None => vec![0; n],
    };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(jitter[a].cmp(&jitter[b])));
    let mut out = vec![0u32; n];
    for w in idx.windows(2) {
        if values[w[0]] == values[w[1]] && jitter[w[0]] == jitter[w[1]] {
            return Err(Error::TiesPresent(axis));
        }
    }
    for (r, &i) in idx.iter().enumerate() {
        out[i] = r as u32 + 1;
    }
    Ok(out)
}

/// Sorts the sample by `x` and returns the word of `y` ranks. With `tie_seed`, ties in
/// either coordinate are broken uniformly at random using that seed.
pub fn ranks_to_permutation(s: &SampleSeries, tie_seed: Option<u64>) -> Result<Permutation> {
    let mut rng = tie_seed.map(ChaCha8Rng::seed_from_u64);
    let rx = ranks(&s.x, "x", rng.as_mut())?;
    let ry = ranks(&s.y, "y", rng.as_mut())?;
    let mut word = vec![0u32; s.len()];
    for i in 0..s.len() {
        word[rx[i] as usize - 1] = ry[i];
    }
    Permutation::new(word)
}

/// Whether `ranks_to_permutation` would need tie-breaking.
pub fn has_ties(s: &SampleSeries) -> bool {
    ranks(&s.x, "x", None).is_err() || ranks(&s.y, "y", None).is_err()
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    /// Adds `v` at 1-based index `i`.
    fn add(&mut self, mut i: usize, v: u64) {
        while i < self.tree.len() {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over indices `1..=i`.
    fn prefix(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    fn clear(&mut self) {
        self.tree.iter_mut().for_each(|t| *t = 0);
    }
}

/// For each position `t`, the number of later positions with a smaller value.
fn smaller_after(w: &[usize]) -> Vec<u64> {
    let n = w.len();
    let mut fw = Fenwick::new(n);
    let mut out = vec![0; n];
    for t in (0..n).rev() {
        out[t] = fw.prefix(w[t] - 1);
        fw.add(w[t], 1);
    }
    out
}

fn count_12(w: &[usize]) -> u128 {
    let n = w.len() as u128;
    let inv: u128 = smaller_after(w).iter().map(|&c| c as u128).sum();
    n * n.saturating_sub(1) / 2 - inv
}

fn count_123(w: &[usize]) -> u128 {
    let n = w.len();
    let mut fw = Fenwick::new(n);
    let mut total = 0u128;
    for (t, &v) in w.iter().enumerate() {
        let smaller_before = fw.prefix(v - 1) as usize;
        // Larger values after t: (n - v) larger values overall, minus those already seen.
        let larger_before = t - smaller_before;
        let larger_after = (n - v) - larger_before;
        total += smaller_before as u128 * larger_after as u128;
        fw.add(v, 1);
    }
    total
}

fn complement(w: &[usize]) -> Vec<usize> {
    let n = w.len();
    w.iter().map(|&v| n + 1 - v).collect()
}

fn reversed(w: &[usize]) -> Vec<usize> {
    w.iter().rev().copied().collect()
}

/// Copies of 2143 (`small_inner = true`) or 3412 (`false`), scanning anchor pairs `(a, c)`.
///
/// 2143: `π_a < π_c`, `b ∈ (a,c)` with `π_b < π_a`, `d > c` with `π_a < π_d < π_c`.
/// 3412: `π_a > π_c`, `b ∈ (a,c)` with `π_b > π_a`, `d > c` with `π_c < π_d < π_a`.
fn count_anchor_pairs(w: &[usize], small_inner: bool) -> u128 {
    let n = w.len();
    let below_after = smaller_after(w);
    let mut lt_a_after = vec![0u64; n];
    let mut total = 0u128;
    for a in 0..n {
        let va = w[a];
        // lt_a_after[c] = #{d > c : π_d < π_a}
        let mut acc = 0u64;
        for c in (a + 1..n).rev() {
            lt_a_after[c] = acc;
            if w[c] < va {
                acc += 1;
            }
        }
        let mut inner = 0u64;
        for c in a + 1..n {
            let vc = w[c];
            if small_inner && vc > va {
                let outer = below_after[c] - lt_a_after[c];
                total += inner as u128 * outer as u128;
            } else if !small_inner && vc < va {
                let outer = lt_a_after[c] - below_after[c];
                total += inner as u128 * outer as u128;
            }
            if (small_inner && vc < va) || (!small_inner && vc > va) {
                inner += 1;
            }
        }
    }
    total
}

/// Copies of 2413: for each `a` and later `d` with `π_a < π_d`, count pairs `b < c` in
/// `(a, d)` with `π_b > π_d` and `π_c < π_a`.
fn count_2413(w: &[usize]) -> u128 {
    let n = w.len();
    let mut count = Fenwick::new(n);
    let mut weighted = Fenwick::new(n);
    let mut total = 0u128;
    for a in 0..n {
        let va = w[a];
        count.clear();
        weighted.clear();
        // low = #{c in (a, t) : π_c < π_a}, maintained as t advances.
        let mut low = 0u64;
        let mut inserted = 0u64;
        let mut inserted_weight = 0u64;
        for &vt in &w[a + 1..] {
            if vt > va {
                // t acts as d: high b's are those inserted with value > π_d.
                let high = inserted - count.prefix(vt);
                let high_weight = inserted_weight - weighted.prefix(vt);
                total += (high as u128 * low as u128) - high_weight as u128;
            }
            // t becomes a candidate b for later d (only matters if π_t > π_a).
            if vt > va {
                count.add(vt, 1);
                weighted.add(vt, low);
                inserted += 1;
                inserted_weight += low;
            } else {
                low += 1;
            }
        }
    }
    total
}

/// Exact copy counts of the six ρ* patterns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SixCounts {
    pub c123: u128,
    pub c321: u128,
    pub c2143: u128,
    pub c3412: u128,
    pub c2413: u128,
    pub c3142: u128,
}

impl SixCounts {
    /// In the order 123, 321, 2143, 3412, 2413, 3142.
    pub fn as_array(&self) -> [u128; 6] {
        [self.c123, self.c321, self.c2143, self.c3412, self.c2413, self.c3142]
    }
}

fn word_of(pi: &Permutation) -> Vec<usize> {
    pi.word().iter().map(|&v| v as usize).collect()
}

/// Counts of 123, 321, 2143, 3412, 2413 and 3142 in `O(n² log n)` time and `O(n)` memory.
pub fn count_six_fast(pi: &Permutation) -> SixCounts {
    let w = word_of(pi);
    let comp = complement(&w);
    SixCounts {
        c123: count_123(&w),
        c321: count_123(&comp),
        c2143: count_anchor_pairs(&w, true),
        c3412: count_anchor_pairs(&w, false),
        c2413: count_2413(&w),
        c3142: count_2413(&reversed(&w)),
    }
}

/// Fast count for the patterns the dedicated counters handle, `None` otherwise.
pub fn fast_count(sigma: &Permutation, pi: &Permutation) -> Option<u128> {
    let w = word_of(pi);
    let n = w.len() as u128;
    let c = match sigma.word() {
        [1] => n,
        [1, 2] => count_12(&w),
        [2, 1] => n * n.saturating_sub(1) / 2 - count_12(&w),
        [1, 2, 3] => count_123(&w),
        [3, 2, 1] => count_123(&complement(&w)),
        [2, 1, 4, 3] => count_anchor_pairs(&w, true),
        [3, 4, 1, 2] => count_anchor_pairs(&w, false),
        [2, 4, 1, 3] => count_2413(&w),
        [3, 1, 4, 2] => count_2413(&reversed(&w)),
        _ => return None,
    };
    Some(c)
}

/// `d(ρ*, π)` from the six counts.
pub fn rho_star_from_counts(c: &SixCounts, n: usize) -> Rational {
    let three = BigInt::from(binomial(n as u64, 3));
    let four = BigInt::from(binomial(n as u64, 4));
    let r3 = Rational::new(BigInt::from(c.c123 + c.c321), three);
    // ½ weights: doubled numerator over doubled denominator keeps everything integral.
    let doubled = 2 * (c.c2143 + c.c3412) + c.c2413 + c.c3142;
    let r4 = Rational::new(BigInt::from(doubled), four * 2);
    r3 + r4
}

/// `d(ρ*, π) = d(123)+d(321)+d(2143)+d(3412)+½(d(2413)+d(3142))`.
pub fn rho_star_statistic(pi: &Permutation) -> Result<Rational> {
    let n = pi.order();
    if n < 4 {
        return Err(Error::OutOfRange {
            what: "permutation order",
            value: n,
            min: 4,
            max: usize::MAX,
        });
    }
    Ok(rho_star_from_counts(&count_six_fast(pi), n))
}

fn rho_star_f64(pi: &Permutation) -> f64 {
    let c = count_six_fast(pi);
    let n = pi.order() as u64;
    let three = binomial(n, 3) as f64;
    let four = binomial(n, 4) as f64;
    (c.c123 + c.c321) as f64 / three
        + ((c.c2143 + c.c3412) as f64 + 0.5 * (c.c2413 + c.c3142) as f64) / four
}

/// Outcome of [`independence_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub n: usize,
    /// Exact `d(ρ*, π_n)` as `p/q`.
    pub statistic: String,
    pub statistic_f64: f64,
    /// `d(ρ*, π_n) - 11/24`.
    pub deviation: f64,
    pub p_value: f64,
    pub shuffles: usize,
    pub seed: u64,
    pub ties_broken: bool,
}

/// Seed of the `i`-th null replicate, derived from the master seed.
pub(crate) fn replicate_seed(seed: u64, i: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (i as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two-sided Monte Carlo test of independence based on `|d(ρ*, π_n) - 11/24|`.
///
/// The null distribution is generated by uniformly shuffling the `y` ranks, so
/// `p = (1 + #{null ≥ observed}) / (shuffles + 1)`.
pub fn independence_test(
    s: &SampleSeries,
    shuffles: usize,
    seed: u64,
    break_ties: bool,
) -> Result<TestReport> {
    if shuffles < 100 {
        return Err(Error::OutOfRange {
            what: "shuffles",
            value: shuffles,
            min: 100,
            max: usize::MAX,
        });
    }
    if s.len() < 4 {
        return Err(Error::InvalidSample(format!("need at least 4 pairs, got {}", s.len())));
    }
    let ties_broken = break_ties && has_ties(s);
    let pi = ranks_to_permutation(s, break_ties.then_some(seed))?;
    let n = pi.order();
    let stat = rho_star_statistic(&pi)?;
    let centre = 11.0 / 24.0;
    let obs = crate::scalar::rational_to_f64(&stat);
    let observed = (rho_star_f64(&pi) - centre).abs();
    // Guard the comparison against rounding between identical statistics.
    let eps = 1e-12;
    let exceed: usize = (0..shuffles)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(seed, i));
            let mut w: Vec<u32> = (1..=n as u32).collect();
            w.shuffle(&mut rng);
            let null = Permutation::from_word_unchecked(w);
            usize::from((rho_star_f64(&null) - centre).abs() >= observed - eps)
        })
        .sum();
    Ok(TestReport {
        n,
        statistic: format_rational(&stat),
        statistic_f64: obs,
        deviation: obs - centre,
        p_value: (1 + exceed) as f64 / (shuffles + 1) as f64,
        shuffles,
        seed,
        ties_broken,
    })
}

/// `11/24`, the value of ρ* on the uniform permuton.
pub fn rho_star_null_value() -> Rational {
    rat(11, 24)
}
