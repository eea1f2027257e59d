//! Fuzzy and cover matrices, repeated-entry statistics, length-profile bounds and the
//! classification of non-vanishing constant covers.
//!
//! A constant cover is a combination `Σ c_i σ_i` with `Σ c_i F_{σ_i}^{↑n} = c J_n`,
//! where `n` is the largest order involved; it is non-vanishing when `c ≠ 0`.

mod echelon;
mod search;

pub use echelon::{Echelon, Overflow};
pub use search::{latin_covers, search_covers, LevelStat, SearchOptions, SearchResult};

use std::cmp::Reverse;
use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{density, enumerate_sn, FormalSum, Permutation, Symmetry};
use crate::scalar::{binomial, factorial, format_rational};
use crate::{Matrix, Rational, RationalMatrix};

/// `C(x-1, j-1) · C(n-x, k-j)` as an integer.
pub fn f_int(k: usize, j: usize, n: usize, x: usize) -> u128 {
    if x == 0 || j == 0 || x > n || j > k {
        return 0;
    }
    if n - x < k.saturating_sub(j) {
        return 0;
    }
    binomial(x as u64 - 1, j as u64 - 1) * binomial((n - x) as u64, (k - j) as u64)
}

/// `f(k, j, n, x) = C(x-1, j-1) · C(n-x, k-j)` for `1 ≤ j ≤ k ≤ n`, `1 ≤ x ≤ n`.
pub fn f_poly(k: usize, j: usize, n: usize, x: usize) -> Result<Rational> {
    if k > n || k == 0 {
        return Err(Error::OutOfRange { what: "k", value: k, min: 1, max: n });
    }
    if j == 0 || j > k {
        return Err(Error::OutOfRange { what: "j", value: j, min: 1, max: k });
    }
    if x == 0 || x > n {
        return Err(Error::OutOfRange { what: "x", value: x, min: 1, max: n });
    }
    Ok(Rational::from_integer(BigInt::from(f_int(k, j, n, x))))
}

fn check_order(sigma: &Permutation, n: usize, max: usize) -> Result<()> {
    if n < sigma.order() || n > max {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: sigma.order(),
            max,
        });
    }
    Ok(())
}

/// `G_σ(x, y) = Σ_j f(k,j,n,x) f(k,σ(j),n,y)`, the fuzzy matrix without its scalar prefactor.
pub fn fuzzy_integer(sigma: &Permutation, n: usize) -> Matrix<i64> {
    let k = sigma.order();
    Matrix::from_fn(n, n, |r, c| {
        let (x, y) = (r + 1, c + 1);
        let lo = x.saturating_sub(n - k).max(1);
        (lo..=k.min(x))
            .map(|j| (f_int(k, j, n, x) * f_int(k, sigma.at(j), n, y)) as i64)
            .sum()
    })
}

/// `(n-k)! / C(n,k)`, the factor turning [`fuzzy_integer`] into the fuzzy matrix.
pub fn fuzzy_scale(k: usize, n: usize) -> Rational {
    Rational::new(
        BigInt::from(factorial((n - k) as u64)),
        BigInt::from(binomial(n as u64, k as u64)),
    )
}

/// The fuzzy permutation matrix `F_σ^{↑n}`; row index is position, column index is value.
pub fn fuzzy_matrix(sigma: &Permutation, n: usize) -> Result<RationalMatrix> {
    check_order(sigma, n, 12)?;
    let s = fuzzy_scale(sigma.order(), n);
    Ok(fuzzy_integer(sigma, n).map(|v| &s * BigInt::from(*v)))
}

/// `Σ c_i F_{σ_i}^{↑n}`.
pub fn fuzzy_matrix_sum(rho: &FormalSum, n: usize) -> Result<RationalMatrix> {
    let mut out = RationalMatrix::zeros(n, n);
    for (sigma, c) in rho.iter() {
        out.add_scaled(c, &fuzzy_matrix(sigma, n)?);
    }
    Ok(out)
}

/// `A_σ^{↑n} = Σ_{π ∈ S_n} d(σ, π) A_π`.
pub fn cover_matrix(sigma: &Permutation, n: usize) -> Result<RationalMatrix> {
    check_order(sigma, n, 7)?;
    let mut out = RationalMatrix::zeros(n, n);
    for pi in enumerate_sn(n)? {
        let d = density(sigma, &pi);
        if d.is_zero() {
            continue;
        }
        for x in 1..=n {
            out[(x - 1, pi.at(x) - 1)] += &d;
        }
    }
    Ok(out)
}

/// Checks `A_σ^{↑n} - F_σ^{↑n} = ((n-1)!/(k-1)!)(1/k - 1/n) J_n` and returns the constant.
pub fn decompose_fto_a(sigma: &Permutation, n: usize) -> Result<Rational> {
    let k = sigma.order();
    let diff = cover_matrix(sigma, n)?.sub(&fuzzy_matrix(sigma, n)?);
    let expected = Rational::new(
        BigInt::from(factorial(n as u64 - 1)),
        BigInt::from(factorial(k as u64 - 1)),
    ) * (Rational::new(BigInt::one(), BigInt::from(k)) - Rational::new(BigInt::one(), BigInt::from(n)));
    if !diff.is_constant(&expected) {
        return Err(Error::IdentityViolated(format!(
            "A - F is not {} J for sigma = {sigma}, n = {n}",
            format_rational(&expected)
        )));
    }
    Ok(expected)
}

/// `m₀`: number of zero entries.
pub fn zero_count<T: Zero + Clone>(m: &Matrix<T>) -> usize {
    m.entries().filter(|v| v.is_zero()).count()
}

/// `m*`: largest multiplicity of a nonzero value (0 if all entries vanish).
pub fn repeat_count<T: Zero + Eq + Hash + Clone>(m: &Matrix<T>) -> usize {
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for v in m.entries().filter(|v| !v.is_zero()) {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

/// If `a + b` is a nonzero constant matrix, `m*(a) ≥ m₀(b)`; `None` when the hypothesis fails.
pub fn repeat_bound_holds<T: Zero + Eq + Hash + Clone + crate::Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Option<bool> {
    let sum = a.add(b);
    let first = sum.entries().next()?.clone();
    if first.is_zero() || !sum.is_constant(&first) {
        return None;
    }
    Some(repeat_count(a) >= zero_count(b))
}

/// `max { m*(F_σ^{↑n}) : σ ∈ S_k }`.
pub fn single_repeat_max(k: usize, n: usize) -> Result<usize> {
    if k < 1 || k > n {
        return Err(Error::OutOfRange { what: "k", value: k, min: 1, max: n });
    }
    Ok(enumerate_sn(k)?
        .iter()
        .map(|s| repeat_count(&fuzzy_integer(s, n)))
        .max()
        .unwrap_or(0))
}

/// One cell of the single-matrix repeat table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RepeatEntry {
    pub n: usize,
    pub k: usize,
    pub max_repeats: usize,
}

/// `single_repeat_max(k, n)` for `2 ≤ k ≤ n`, `4 ≤ n ≤ 6`.
pub fn single_repeat_table() -> Result<Vec<RepeatEntry>> {
    let mut out = Vec::new();
    for n in 4..=6 {
        for k in 2..=n {
            out.push(RepeatEntry { n, k, max_repeats: single_repeat_max(k, n)? });
        }
    }
    Ok(out)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// `max_{a,b} m*(a A + b B)` over real `(a, b)`.
///
/// Entries `p ≠ q` coincide in `A + t B` exactly when `t = (A_p - A_q)/(B_q - B_p)`, so it
/// suffices to inspect those candidate `t`, plus `b = 0`, `a = 0` and a generic `t`.
pub fn pair_repeat_max_matrices(a: &Matrix<i64>, b: &Matrix<i64>) -> usize {
    let av: Vec<i64> = a.entries().copied().collect();
    let bv: Vec<i64> = b.entries().copied().collect();
    let len = av.len();
    let mut best = repeat_count(a).max(repeat_count(b));

    // Positions with identical (A, B) are equal for every t.
    let mut base = UnionFind { parent: (0..len).collect() };
    let mut first_seen: HashMap<(i64, i64), usize> = HashMap::new();
    for p in 0..len {
        match first_seen.get(&(av[p], bv[p])) {
            Some(&q) => base.union(p, q),
            None => {
                first_seen.insert((av[p], bv[p]), p);
            }
        }
    }
    // Generic t: only (0, 0) entries vanish.
    let mut sizes: HashMap<(i64, i64), usize> = HashMap::new();
    for p in 0..len {
        if av[p] != 0 || bv[p] != 0 {
            *sizes.entry((av[p], bv[p])).or_insert(0) += 1;
        }
    }
    best = best.max(sizes.into_values().max().unwrap_or(0));

    let mut candidates: Vec<((i64, i64), usize, usize)> = Vec::new();
    for p in 0..len {
        for q in p + 1..len {
            let den = bv[q] - bv[p];
            let num = av[p] - av[q];
            if den == 0 || num == 0 {
                continue;
            }
            let g = num.gcd(&den);
            let (num, den) = if den < 0 { (-num / g, -den / g) } else { (num / g, den / g) };
            candidates.push(((num, den), p, q));
        }
    }
    candidates.sort_unstable();
    for group in candidates.chunk_by(|x, y| x.0 == y.0) {
        let (num, den) = group[0].0;
        let mut uf = UnionFind { parent: base.parent.clone() };
        for &(_, p, q) in group {
            uf.union(p, q);
        }
        let mut class: HashMap<usize, usize> = HashMap::new();
        for p in 0..len {
            // value of A + tB at p, times den
            if av[p] * den + num * bv[p] != 0 {
                *class.entry(uf.find(p)).or_insert(0) += 1;
            }
        }
        best = best.max(class.into_values().max().unwrap_or(0));
    }
    best
}

/// `max { m*(c₁ F_σ^{↑n} + c₂ F_τ^{↑n}) : |σ| = k, |τ| = l, c ∈ ℝ² }` for `n = 6`.
pub fn pair_repeat_max(k: usize, l: usize, n: usize) -> Result<usize> {
    if n != 6 {
        return Err(Error::OutOfRange { what: "n", value: n, min: 6, max: 6 });
    }
    if k < 1 || l < 1 || k > n || l > n {
        return Err(Error::OutOfRange { what: "pattern order", value: k.max(l), min: 1, max: n });
    }
    use rayon::prelude::*;
    let left: Vec<Matrix<i64>> = enumerate_sn(k)?.iter().map(|s| fuzzy_integer(s, n)).collect();
    let right: Vec<Matrix<i64>> = enumerate_sn(l)?.iter().map(|s| fuzzy_integer(s, n)).collect();
    Ok(left
        .par_iter()
        .map(|a| right.iter().map(|b| pair_repeat_max_matrices(a, b)).max().unwrap_or(0))
        .max()
        .unwrap_or(0))
}

/// Orders `(k_1, ..., k_r)` of the permutations in a cover, sorted non-increasingly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LengthProfile(Vec<usize>);

impl LengthProfile {
    pub fn new(mut orders: Vec<usize>) -> Result<Self> {
        if orders.len() < 2 || orders.len() > 5 {
            return Err(Error::OutOfRange {
                what: "number of terms",
                value: orders.len(),
                min: 2,
                max: 5,
            });
        }
        if let Some(&k) = orders.iter().find(|&&k| k < 2) {
            return Err(Error::OutOfRange { what: "permutation order", value: k, min: 2, max: usize::MAX });
        }
        orders.sort_unstable_by(|a, b| b.cmp(a));
        Ok(LengthProfile(orders))
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_latin_type(&self) -> bool {
        self.0.iter().all(|&k| k == self.n())
    }
}

impl std::str::FromStr for LengthProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let orders = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| {
                p.trim().parse::<usize>().map_err(|_| Error::Parse {
                    what: "length profile",
                    text: s.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LengthProfile::new(orders)
    }
}

impl std::fmt::Display for LengthProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Necessary conditions for a non-vanishing cover with this profile at `n = k_1`:
///
/// * first-row inequality `n - 2 ≤ Σ_{j<r} (n - k_j + 1)`;
/// * degree bounds `k_i ≥ n + 1 - Σ_{j<i} (n - k_j + 1)` for `i ≥ 2`;
/// * the first row must be fully covered: `Σ_j (n - k_j + 1) ≥ n`;
/// * at most `k!` distinct permutations of order `k`.
pub fn profile_bounds(p: &LengthProfile, n: usize) -> bool {
    let k = p.orders();
    if k[0] != n {
        return false;
    }
    let width = |kj: usize| n - kj + 1;
    let r = k.len();
    let first_row: usize = k[..r - 1].iter().map(|&kj| width(kj)).sum();
    if n > first_row + 2 {
        return false;
    }
    let mut prefix = 0;
    for i in 1..r {
        prefix += width(k[i - 1]);
        if k[i] + prefix < n + 1 {
            return false;
        }
    }
    if k.iter().map(|&kj| width(kj)).sum::<usize>() < n {
        return false;
    }
    for chunk in k.chunk_by(|a, b| a == b) {
        if chunk.len() as u128 > factorial(chunk[0] as u64) {
            return false;
        }
    }
    true
}

/// All profiles with `r` terms and `k_1 = n` passing [`profile_bounds`].
pub fn surviving_profiles(r: usize, n: usize) -> Vec<LengthProfile> {
    fn rec(r: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<LengthProfile>) {
        if cur.len() == r {
            let p = LengthProfile::new(cur.clone()).expect("valid by construction");
            if profile_bounds(&p, n) {
                out.push(p);
            }
            return;
        }
        let top = *cur.last().unwrap_or(&n);
        for k in (2..=top).rev() {
            cur.push(k);
            rec(r, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 2 {
        rec(r, n, &mut vec![n], &mut out);
    }
    out
}

/// A constant cover `Σ c_i σ_i` with `Σ c_i F_{σ_i}^{↑n} = c J_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantCover {
    /// Display order: longer permutations first, then lexicographic.
    pub terms: Vec<(Rational, Permutation)>,
    pub n: usize,
    pub c: Rational,
    /// All terms of order `n` with unit coefficients (a latin square).
    pub latin: bool,
    /// Part of a family of covers on the same permutations (solution space of dimension ≥ 2).
    pub reducible: bool,
}

fn sort_terms(terms: &mut [(Rational, Permutation)]) {
    terms.sort_by(|a, b| (Reverse(a.1.order()), a.1.word()).cmp(&(Reverse(b.1.order()), b.1.word())));
}

impl ConstantCover {
    /// Builds a normalized cover; the constant is recomputed from the coefficients.
    pub fn new(terms: Vec<(Rational, Permutation)>, n: usize, reducible: bool) -> Self {
        let mut terms: Vec<_> = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        sort_terms(&mut terms);
        let mut cover = ConstantCover {
            terms,
            n,
            c: Rational::zero(),
            latin: false,
            reducible,
        };
        cover.normalize();
        cover
    }

    pub fn from_formal(rho: &FormalSum, n: usize) -> Self {
        Self::new(rho.iter().map(|(p, c)| (c.clone(), p.clone())).collect(), n, false)
    }

    pub fn to_formal(&self) -> FormalSum {
        FormalSum::from_terms(self.terms.iter().cloned())
    }

    pub fn profile(&self) -> Result<LengthProfile> {
        LengthProfile::new(self.terms.iter().map(|(_, p)| p.order()).collect())
    }

    /// `Σ c_i (n-1)!/(k_i-1)! = c·n` gives the constant without forming matrices.
    fn constant_from_coefficients(&self) -> Rational {
        let n = self.n as u64;
        let total: Rational = self
            .terms
            .iter()
            .map(|(c, p)| {
                c * Rational::new(
                    BigInt::from(factorial(n - 1)),
                    BigInt::from(factorial(p.order() as u64 - 1)),
                )
            })
            .sum();
        total / Rational::from_integer(BigInt::from(n))
    }

    /// Integer coefficients with gcd 1 and the first term positive.
    fn normalize(&mut self) {
        if self.terms.is_empty() {
            return;
        }
        let lcm = self.terms.iter().fold(BigInt::one(), |l, (c, _)| l.lcm(c.denom()));
        let ints: Vec<BigInt> = self.terms.iter().map(|(c, _)| (c * &lcm).to_integer()).collect();
        let mut g = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        if ints[0].is_negative() {
            g = -g;
        }
        for ((c, _), v) in self.terms.iter_mut().zip(ints) {
            *c = Rational::from_integer(v / &g);
        }
        self.c = self.constant_from_coefficients();
        self.latin = self.terms.len() == self.n
            && self.terms.iter().all(|(c, p)| c.is_one() && p.order() == self.n);
    }

    /// Exact check of `Σ c_i F_{σ_i}^{↑n} = c J_n` together with the coefficient identity.
    pub fn verify(&self) -> Result<bool> {
        let sum = fuzzy_matrix_sum(&self.to_formal(), self.n)?;
        Ok(sum.is_constant(&self.c))
    }

    pub fn apply_symmetry(&self, s: Symmetry) -> ConstantCover {
        let terms = self.terms.iter().map(|(c, p)| (c.clone(), s.apply(p))).collect();
        ConstantCover::new(terms, self.n, self.reducible)
    }

    fn key(&self) -> Vec<(Reverse<usize>, Vec<u32>, BigInt)> {
        self.terms
            .iter()
            .map(|(c, p)| (Reverse(p.order()), p.word().to_vec(), c.to_integer()))
            .collect()
    }
}

impl std::fmt::Display for ConstantCover {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_formal())
    }
}

/// The least image of the cover under the eight symmetries, all terms moved together.
pub fn canonicalize_cover(cc: &ConstantCover) -> ConstantCover {
    Symmetry::all()
        .into_iter()
        .map(|s| cc.apply_symmetry(s))
        .min_by(|a, b| a.key().cmp(&b.key()))
        .expect("eight symmetries")
}

/// Basis of the coefficient vectors `(c_1, ..., c_r)` for which `Σ c_i F_{σ_i}^{↑n}` is
/// constant, one normalized cover per basis vector.
pub fn solve_cover(sigmas: &[Permutation], n: usize) -> Result<Vec<ConstantCover>> {
    let r = sigmas.len();
    if r == 0 || r > 5 {
        return Err(Error::OutOfRange { what: "number of terms", value: r, min: 1, max: 5 });
    }
    let mats = sigmas.iter().map(|s| fuzzy_matrix(s, n)).collect::<Result<Vec<_>>>()?;
    let system = RationalMatrix::from_fn(n * n, r + 1, |row, col| {
        if col == r {
            -Rational::one()
        } else {
            mats[col][(row / n, row % n)].clone()
        }
    });
    let basis = system.nullspace();
    let reducible = basis.len() > 1;
    Ok(basis
        .into_iter()
        .map(|v| {
            let terms = sigmas.iter().cloned().zip(v).map(|(p, c)| (c, p)).collect();
            ConstantCover::new(terms, n, reducible)
        })
        .collect())
}

/// JSON record for a cover catalogue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverRecord {
    pub terms: FormalSum,
    pub n: usize,
    pub c: String,
    pub latin: bool,
    pub reducible: bool,
    pub canonical: String,
}

impl From<&ConstantCover> for CoverRecord {
    fn from(cc: &ConstantCover) -> Self {
        CoverRecord {
            terms: cc.to_formal(),
            n: cc.n,
            c: format_rational(&cc.c),
            latin: cc.latin,
            reducible: cc.reducible,
            canonical: canonicalize_cover(cc).to_string(),
        }
    }
}

impl<'de> serde::Deserialize<'de> for CoverRecord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            terms: FormalSum,
            n: usize,
            c: String,
            #[serde(default)]
            latin: bool,
            #[serde(default)]
            reducible: bool,
            #[serde(default)]
            canonical: String,
        }
        let raw = Raw::deserialize(d)?;
        Ok(CoverRecord {
            terms: raw.terms,
            n: raw.n,
            c: raw.c,
            latin: raw.latin,
            reducible: raw.reducible,
            canonical: raw.canonical,
        })
    }
}

/// The combinations listed as the mixed-length four-term covers.
pub fn four_term_expressions() -> Vec<FormalSum> {
    [
        "3(1234)+3(4321)-4(123)+3(12)",
        "3(1234)+3(4321)-4(123)-3(21)",
        "3(1324)+3(4231)-4(123)+3(12)",
        "3(1324)+3(4231)-4(123)-3(21)",
        "3(2143)+3(3412)+4(123)+3(21)",
        "3(2413)+3(3142)+4(123)+3(21)",
        "3(1234)+3(4321)-2(123)-2(321)",
        "3(1324)+3(4231)-2(123)-2(321)",
        "3(2143)+3(3412)+2(123)+2(321)",
        "3(2413)+3(3142)+2(123)+2(321)",
        "36(12345)-36(52341)+15(2143)+10(321)",
        "36(12345)-36(52341)-15(3412)-10(123)",
        "36(12435)-36(52431)+15(2143)+10(321)",
        "36(12435)-36(52431)-15(3412)-10(123)",
    ]
    .iter()
    .map(|s| s.parse().expect("literal"))
    .collect()
}

/// `(profile, expected number of covers)` for every row of the four- and five-term summary.
pub fn expected_cover_counts() -> Vec<(LengthProfile, usize)> {
    [
        ("4,4,3,2", 6),
        ("4,4,3,3", 4),
        ("4,4,4,4", 12),
        ("5,5,4,3", 4),
        ("4,4,3,3,2", 6),
        ("4,4,3,3,3", 2),
        ("4,4,4,3,2", 13),
        ("4,4,4,3,3", 4),
        ("4,4,4,4,2", 11),
        ("4,4,4,4,3", 9),
        ("5,5,4,3,2", 13),
        ("5,5,4,3,3", 6),
        ("5,5,4,4,2", 7),
        ("5,5,4,4,3", 1),
        ("5,5,4,4,4", 2),
        ("5,5,5,5,5", 192),
    ]
    .iter()
    .map(|(p, c)| (p.parse().expect("literal"), *c))
    .collect()
}
