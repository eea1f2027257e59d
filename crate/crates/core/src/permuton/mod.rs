//! Step permutons, exact pattern densities in them, the perturbation family around the
//! uniform measure, and the block interpolation between two step permutons.
//!
//! Orientation: `weights[(i, j)]` (0-based) is the cell in column `i` (the x-interval
//! `[i/n, (i+1)/n]`) and row `j` (the y-interval `[j/n, (j+1)/n]`). Cell `(0, 0)` is the
//! bottom-left cell. The cell carries mass `weights[(i, j)] / n`.

mod derivative;
mod witness;

pub use derivative::{
    h_gradient, h_gradient_interpolated, h_hessian, h_hessian_interpolated, HessianReport,
};
pub use witness::{witness_search, Direction, Witness, WitnessOptions};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flag::RootedPermutation;
use crate::perm::{FormalSum, Permutation, Symmetry};
use crate::scalar::{binomial, factorial, format_rational};
use crate::{Matrix, Rational, RationalMatrix, Scalar};

/// Default bound on the number of cell assignments visited by [`step_density`].
pub const DENSITY_BUDGET: u64 = 10_000_000;

/// `μ[M]` for a doubly stochastic `n × n` matrix `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPermuton<T = Rational> {
    weights: Matrix<T>,
}

impl<T: Scalar> StepPermuton<T> {
    /// Checks nonnegativity and unit row and column sums (up to `1e-9` for floats).
    pub fn new(weights: Matrix<T>) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::NotSquare { rows: weights.rows(), cols: weights.cols() });
        }
        let n = weights.rows();
        let near = |v: &T, target: &T| {
            if T::EXACT {
                v == target
            } else {
                (v.to_f64() - target.to_f64()).abs() < 1e-9
            }
        };
        if let Some(v) = weights.entries().find(|v| v.is_negative() && !(!T::EXACT && v.is_negligible())) {
            return Err(Error::NotDoublyStochastic(format!("negative entry {v:?}")));
        }
        let one = T::one();
        for i in 0..n {
            let row = (0..n).fold(T::zero(), |s, j| s + weights[(i, j)].clone());
            let col = (0..n).fold(T::zero(), |s, j| s + weights[(j, i)].clone());
            if !near(&row, &one) || !near(&col, &one) {
                return Err(Error::NotDoublyStochastic(format!("line {} does not sum to 1", i + 1)));
            }
        }
        Ok(StepPermuton { weights })
    }

    /// The uniform measure as the all-`1/n` matrix on an `n × n` grid.
    pub fn uniform(n: usize) -> Self {
        StepPermuton { weights: Matrix::filled(n, n, T::from_ratio(1, n as i64)) }
    }

    /// The permutation matrix of `pi`, cell `(i, π(i))` for each column `i`.
    pub fn from_permutation(pi: &Permutation) -> Self {
        StepPermuton { weights: pi.matrix() }
    }

    pub fn grid(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn apply_symmetry(&self, s: Symmetry) -> Self {
        StepPermuton { weights: s.apply_grid(&self.weights) }
    }

    pub fn to_f64(&self) -> StepPermuton<f64> {
        StepPermuton { weights: self.weights.map(|v| v.to_f64()) }
    }

    /// Mass of `[x0, x1] × [y0, y1]` for grid-aligned rectangles given in cell units.
    pub fn cell_block_mass(&self, cols: std::ops::Range<usize>, rows: std::ops::Range<usize>) -> T {
        let n = T::from_i64(self.grid() as i64);
        let mut s = T::zero();
        for i in cols {
            for j in rows.clone() {
                s += &self.weights[(i, j)];
            }
        }
        s / n
    }
}

impl StepPermuton<Rational> {
    pub fn weight_strings(&self) -> Vec<Vec<String>> {
        self.weights.to_string_rows()
    }
}

impl Serialize for StepPermuton<Rational> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("StepPermuton", 2)?;
        st.serialize_field("grid", &self.grid())?;
        st.serialize_field("weights", &self.weights)?;
        st.end()
    }
}

/// The values `x_{i,j}`, `1 ≤ i, j ≤ n - 1`, each in `[-1/(4n), 1/(4n)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVector {
    n: usize,
    values: RationalMatrix,
}

impl PerturbationVector {
    pub fn zeros(n: usize) -> Self {
        PerturbationVector { n, values: RationalMatrix::zeros(n - 1, n - 1) }
    }

    pub fn new(n: usize, values: RationalMatrix) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange { what: "grid", value: n, min: 2, max: usize::MAX });
        }
        if values.rows() != n - 1 || values.cols() != n - 1 {
            return Err(Error::NotSquare { rows: values.rows(), cols: values.cols() });
        }
        let bound = Rational::new(BigInt::one(), BigInt::from(4 * n));
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                if values[(i, j)].abs() > bound {
                    return Err(Error::PerturbationBound { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(PerturbationVector { n, values })
    }

    /// Sets `x_{i,j}` (1-based); the bound is checked.
    pub fn with(mut self, i: usize, j: usize, v: Rational) -> Result<Self> {
        self.values[(i - 1, j - 1)] = v;
        PerturbationVector::new(self.n, self.values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.values[(i - 1, j - 1)]
    }

    /// Number of variables, `(n - 1)²`.
    pub fn dimension(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }
}

/// Index of `x_{i,j}` (1-based) in gradient vectors and Hessians.
pub fn variable_index(n: usize, i: usize, j: usize) -> usize {
    (i - 1) * (n - 1) + (j - 1)
}

/// The four cells touched by `B_{i,j}` (0-based cells, with signs).
pub(crate) fn b_cells(i: usize, j: usize) -> [((usize, usize), i64); 4] {
    let (a, b) = (i - 1, j - 1);
    [((a, b), 1), ((a + 1, b + 1), 1), ((a + 1, b), -1), ((a, b + 1), -1)]
}

/// `M_x = J_n / n + Σ x_{i,j} B_{i,j}`.
pub fn make_perturbed(x: &PerturbationVector) -> StepPermuton<Rational> {
    let n = x.n;
    let mut w = RationalMatrix::filled(n, n, Rational::new(BigInt::one(), BigInt::from(n)));
    for i in 1..n {
        for j in 1..n {
            let v = x.get(i, j);
            if v.is_zero() {
                continue;
            }
            for ((a, b), s) in b_cells(i, j) {
                w[(a, b)] += &(v * BigInt::from(s));
            }
        }
    }
    StepPermuton { weights: w }
}

/// Non-decreasing sequences of length `k` over `0..n`.
pub(crate) fn monotone_sequences(n: usize, k: usize) -> Vec<Vec<u8>> {
    fn rec(n: usize, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let start = cur.last().copied().unwrap_or(0);
        for v in start..n as u8 {
            cur.push(v);
            rec(n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `k! / Π m!` over the runs of equal values of a sorted sequence.
pub(crate) fn run_multinomial(seq: &[u8]) -> u64 {
    let mut out = factorial(seq.len() as u64);
    for run in seq.chunk_by(|a, b| a == b) {
        out /= factorial(run.len() as u64);
    }
    out as u64
}

/// Visits every placement of the `k` points of `σ` (in x-order) into cells with a
/// consistent column and row order, passing the cells and the product of the two
/// within-cell ordering multinomials.
///
/// The probability that `k` sampled points induce `σ` equals
/// `(1 / (k! n^k)) Σ mult · Π_t M(cell_t)`.
pub(crate) fn for_each_assignment(
    sigma: &Permutation,
    n: usize,
    budget: u64,
    mut visit: impl FnMut(&[(usize, usize)], u64),
) -> Result<()> {
    let k = sigma.order();
    let per_axis = binomial((n + k - 1) as u64, k as u64);
    if per_axis.saturating_mul(per_axis) > budget as u128 {
        return Err(Error::BudgetExceeded(budget));
    }
    let seqs = monotone_sequences(n, k);
    let mults: Vec<u64> = seqs.iter().map(|s| run_multinomial(s)).collect();
    let mut cells = vec![(0usize, 0usize); k];
    for (cols, mc) in seqs.iter().zip(&mults) {
        for (rows, mr) in seqs.iter().zip(&mults) {
            for t in 0..k {
                cells[t] = (cols[t] as usize, rows[sigma.at(t + 1) - 1] as usize);
            }
            visit(&cells, mc * mr);
        }
    }
    Ok(())
}

/// `d(σ, μ)`: the probability that `|σ|` independent points of `μ` induce `σ`.
pub fn step_density<T: Scalar>(sigma: &Permutation, mu: &StepPermuton<T>) -> Result<T> {
    step_density_budgeted(sigma, mu, DENSITY_BUDGET)
}

pub fn step_density_budgeted<T: Scalar>(sigma: &Permutation, mu: &StepPermuton<T>, budget: u64) -> Result<T> {
    let n = mu.grid();
    let k = sigma.order();
    let w = &mu.weights;
    let mut total = T::zero();
    for_each_assignment(sigma, n, budget, |cells, mult| {
        let mut term = T::from_i64(mult as i64);
        for &(a, b) in cells {
            term = term * w[(a, b)].clone();
        }
        total += &term;
    })?;
    let denom = factorial(k as u64) * (n as u128).pow(k as u32);
    Ok(total / T::from_rational(&Rational::from_integer(BigInt::from(denom))))
}

/// Exact `d(σ, μ)` for rational weights, summed over integers after clearing denominators.
pub fn step_density_exact(sigma: &Permutation, mu: &StepPermuton<Rational>) -> Result<Rational> {
    let n = mu.grid();
    let k = sigma.order();
    let lcm = mu
        .weights
        .entries()
        .fold(BigInt::one(), |l, v| num_integer::Integer::lcm(&l, v.denom()));
    let ints: Matrix<BigInt> = mu.weights.map(|v| (v * &lcm).to_integer());
    let mut total = BigInt::zero();
    for_each_assignment(sigma, n, DENSITY_BUDGET, |cells, mult| {
        let mut term = BigInt::from(mult);
        for &c in cells {
            term *= &ints[c];
        }
        total += term;
    })?;
    let denom = BigInt::from(factorial(k as u64) * (n as u128).pow(k as u32)) * num_traits::pow(lcm, k);
    Ok(Rational::new(total, denom))
}

/// `Σ c_i d(σ_i, μ)`.
pub fn step_density_formal(rho: &FormalSum, mu: &StepPermuton<Rational>) -> Result<Rational> {
    let mut out = Rational::zero();
    for (sigma, c) in rho.iter() {
        out += c * step_density_exact(sigma, mu)?;
    }
    Ok(out)
}

/// Floating-point `Σ c_i d(σ_i, μ)`.
pub fn step_density_formal_f64(rho: &FormalSum, mu: &StepPermuton<f64>) -> Result<f64> {
    let mut out = 0.0;
    for (sigma, c) in rho.iter() {
        out += crate::scalar::rational_to_f64(c) * step_density(sigma, mu)?;
    }
    Ok(out)
}

/// Draws one point of `μ`: a cell by mass, then a uniform position inside it.
pub fn sample_point(mu: &StepPermuton<f64>, cumulative: &[f64], rng: &mut impl Rng) -> (f64, f64) {
    let n = mu.grid();
    let u: f64 = rng.gen::<f64>() * cumulative[cumulative.len() - 1];
    let cell = cumulative.partition_point(|&c| c <= u).min(n * n - 1);
    let (i, j) = (cell / n, cell % n);
    let x = (i as f64 + rng.gen::<f64>()) / n as f64;
    let y = (j as f64 + rng.gen::<f64>()) / n as f64;
    (x, y)
}

fn cumulative_masses(mu: &StepPermuton<f64>) -> Vec<f64> {
    let n = mu.grid();
    let mut acc = 0.0;
    (0..n * n)
        .map(|c| {
            acc += mu.weights[(c / n, c % n)].max(0.0);
            acc
        })
        .collect()
}

fn pattern_of_points(points: &mut [(f64, f64)]) -> Permutation {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    Permutation::pattern_of(&ys)
}

/// Monte Carlo estimate of `d(σ, μ)` with its standard error.
pub fn monte_carlo_density(sigma: &Permutation, mu: &StepPermuton<f64>, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cum = cumulative_masses(mu);
    let k = sigma.order();
    let mut hits = 0usize;
    let mut pts = vec![(0.0, 0.0); k];
    for _ in 0..samples {
        for p in pts.iter_mut() {
            *p = sample_point(mu, &cum, &mut rng);
        }
        if &pattern_of_points(&mut pts) == sigma {
            hits += 1;
        }
    }
    mean_and_error(hits, samples)
}

fn mean_and_error(hits: usize, samples: usize) -> (f64, f64) {
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Monte Carlo estimate of `𝔼_R d((π, R), (μ, R))`: root points are drawn from `μ`,
/// the remaining points are added, and the outcome counts when the whole sample
/// induces `π` with the roots at the positions of `R`.
pub fn monte_carlo_rooted(rooted: &RootedPermutation, mu: &StepPermuton<f64>, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cum = cumulative_masses(mu);
    let n = rooted.order();
    let r = rooted.roots().len();
    let mut hits = 0usize;
    // (x, y, is_root)
    let mut pts = vec![(0.0, 0.0, false); n];
    for _ in 0..samples {
        for (t, p) in pts.iter_mut().enumerate() {
            let (x, y) = sample_point(mu, &cum, &mut rng);
            *p = (x, y, t < r);
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let roots: Vec<usize> = (0..n).filter(|&t| pts[t].2).map(|t| t + 1).collect();
        if &Permutation::pattern_of(&ys) == rooted.base() && roots == rooted.roots() {
            hits += 1;
        }
    }
    mean_and_error(hits, samples)
}

/// The block permuton with `(1 - z)μ₀` on `[0, 1-z]²` and `zμ₁` on `[1-z, 1]²`,
/// realized on a common grid of size `q · n₀ · n₁` for `z = p/q`.
pub fn interpolate(mu0: &StepPermuton<Rational>, mu1: &StepPermuton<Rational>, z: &Rational) -> Result<StepPermuton<Rational>> {
    if z.is_negative() || z > &Rational::one() {
        return Err(Error::ParameterOutOfRange);
    }
    if z.is_zero() {
        return Ok(mu0.clone());
    }
    if z.is_one() {
        return Ok(mu1.clone());
    }
    let to_usize = |v: &BigInt| -> Result<usize> {
        usize::try_from(v.clone()).ok().filter(|&v| v <= 256).ok_or(Error::ParameterOutOfRange)
    };
    let (p, q) = (to_usize(z.numer())?, to_usize(z.denom())?);
    let (a, b) = (mu0.grid(), mu1.grid());
    let grid = q * a * b;
    if grid > 240 {
        return Err(Error::OutOfRange { what: "interpolation grid", value: grid, min: 1, max: 240 });
    }
    // Each cell of μ₀ becomes an s0 × s0 block, each cell of μ₁ an s1 × s1 block.
    let (s0, s1) = ((q - p) * b, p * a);
    let mut w = RationalMatrix::zeros(grid, grid);
    let scale = |m: usize, s: usize| Rational::new(BigInt::from(grid), BigInt::from(m * s * s));
    let f0 = (Rational::one() - z) * scale(a, s0);
    let f1 = z * scale(b, s1);
    for i in 0..grid {
        for j in 0..grid {
            let off = a * s0;
            w[(i, j)] = if i < off && j < off {
                &mu0.weights[(i / s0, j / s0)] * &f0
            } else if i >= off && j >= off {
                &mu1.weights[((i - off) / s1, (j - off) / s1)] * &f1
            } else {
                Rational::zero()
            };
        }
    }
    StepPermuton::new(w)
}

pub(crate) fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(p: &[Rational], z: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * z + c)
}

/// Coefficients (in `z`, lowest first) of `d(ρ, μ_z)` for the block interpolation.
///
/// `k` points split into `j` points of the lower block and `k - j` of the upper one with
/// probability `C(k, j) (1-z)^j z^(k-j)`; they induce `σ` iff `σ = α ⊕ β` with `|α| = j`.
pub fn crossing_polynomial(rho: &FormalSum, mu0: &StepPermuton<Rational>, mu1: &StepPermuton<Rational>) -> Result<Vec<Rational>> {
    let mut out = vec![Rational::zero(); rho.max_order() + 1];
    let one = Rational::one();
    for (sigma, c) in rho.iter() {
        let k = sigma.order();
        let mut prefix_max = 0;
        for j in 0..=k {
            if j > 0 {
                prefix_max = prefix_max.max(sigma.at(j));
            }
            if prefix_max != j {
                continue;
            }
            let lower = if j == 0 { one.clone() } else { step_density_exact(&sigma.restrict(&(0..j).collect::<Vec<_>>()), mu0)? };
            let upper = if j == k { one.clone() } else { step_density_exact(&sigma.restrict(&(j..k).collect::<Vec<_>>()), mu1)? };
            let weight = c * lower * upper * BigInt::from(binomial(k as u64, j as u64));
            let mut poly = vec![weight];
            for _ in 0..j {
                poly = poly_mul(&poly, &[one.clone(), -one.clone()]);
            }
            for _ in j..k {
                poly = poly_mul(&poly, &[Rational::zero(), one.clone()]);
            }
            for (i, v) in poly.into_iter().enumerate() {
                out[i] += v;
            }
        }
    }
    Ok(out)
}

/// Result of [`find_crossing`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub z: String,
    pub value: String,
    pub target: String,
    /// `|d(ρ, μ_z) - d(ρ, λ)|` in floating point.
    pub gap: f64,
    #[serde(skip)]
    pub z_exact: Rational,
}

/// A dyadic `z ∈ (0, 1)` with `|d(ρ, μ_z) - d(ρ, λ)| ≤ 1e-9`, when `d(ρ, μ₀)` and `d(ρ, μ₁)`
/// lie strictly on opposite sides of `d(ρ, λ) = Σ c_i / |σ_i|!`.
pub fn find_crossing(rho: &FormalSum, mu0: &StepPermuton<Rational>, mu1: &StepPermuton<Rational>) -> Result<Crossing> {
    let target = rho.uniform_value();
    let poly = crossing_polynomial(rho, mu0, mu1)?;
    let f = |z: &Rational| poly_eval(&poly, z) - &target;
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    let (f_lo, f_hi) = (f(&lo), f(&hi));
    if f_lo.is_zero() || f_hi.is_zero() || f_lo.is_positive() == f_hi.is_positive() {
        return Err(Error::Straddle);
    }
    let lo_positive = f_lo.is_positive();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let width = Rational::new(BigInt::one(), BigInt::one() << 40);
    let mut best = lo.clone();
    for _ in 0..200 {
        let mid = (&lo + &hi) * &half;
        let v = f(&mid);
        if v.is_zero() {
            best = mid;
            break;
        }
        if v.is_positive() == lo_positive {
            lo = mid.clone();
        } else {
            hi = mid.clone();
        }
        best = mid;
        if &hi - &lo <= width && crate::scalar::rational_to_f64(&v).abs() <= 1e-9 {
            break;
        }
    }
    let value = poly_eval(&poly, &best);
    let gap = crate::scalar::rational_to_f64(&(&value - &target)).abs();
    Ok(Crossing {
        z: format_rational(&best),
        value: format_rational(&value),
        target: format_rational(&target),
        gap,
        z_exact: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{enumerate_sn, project_up};
    use crate::scalar::{int, rat};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn random_permuton(rng: &mut ChaCha8Rng, grid: usize) -> StepPermuton<Rational> {
        let perms = enumerate_sn(grid).unwrap();
        let mut w = RationalMatrix::zeros(grid, grid);
        let mut total = 0;
        for _ in 0..rng.gen_range(1..4) {
            let c = rng.gen_range(1..5);
            total += c;
            w.add_scaled(&int(c), &perms[rng.gen_range(0..perms.len())].matrix());
        }
        StepPermuton::new(w.scale(&rat(1, total))).unwrap()
    }

    #[test]
    fn perturbation_examples() {
        let x = PerturbationVector::zeros(2).with(1, 1, rat(1, 8)).unwrap();
        let m = make_perturbed(&x);
        assert_eq!(m.weights().to_string_rows(), vec![vec!["5/8", "3/8"], vec!["3/8", "5/8"]]);
        assert_eq!(make_perturbed(&PerturbationVector::zeros(4)), StepPermuton::uniform(4));
        assert!(matches!(
            PerturbationVector::zeros(3).with(2, 1, rat(1, 11)),
            Err(Error::PerturbationBound { i: 2, j: 1 })
        ));
        let bound = rat(1, 20);
        let mut x = PerturbationVector::zeros(5);
        for i in 1..5 {
            for j in 1..5 {
                let v = if (i + j) % 2 == 0 { bound.clone() } else { -bound.clone() };
                x = x.with(i, j, v).unwrap();
            }
        }
        let m = make_perturbed(&x);
        assert!(m.weights().entries().all(|v| !v.is_negative()));
        assert!(StepPermuton::new(m.weights().clone()).is_ok());
    }

    #[test]
    fn validation() {
        assert!(StepPermuton::new(RationalMatrix::ones(2, 2)).is_err());
        assert!(StepPermuton::new(RationalMatrix::ones(2, 3)).is_err());
        let w = RationalMatrix::from_rows(vec![vec![int(2), int(-1)], vec![int(-1), int(2)]]);
        assert!(matches!(StepPermuton::new(w), Err(Error::NotDoublyStochastic(_))));
    }

    #[test]
    fn density_examples() {
        let id2 = StepPermuton::<Rational>::from_permutation(&p("12"));
        assert_eq!(step_density_exact(&p("12"), &id2).unwrap(), rat(3, 4));
        assert_eq!(step_density(&p("12"), &id2).unwrap(), rat(3, 4));
        assert!((step_density(&p("12"), &id2.to_f64()).unwrap() - 0.75).abs() < 1e-15);
        let u = StepPermuton::<Rational>::uniform(4);
        for sigma in [p("1"), p("21"), p("231"), p("2413"), p("15342")] {
            let k = sigma.order() as i64;
            assert_eq!(step_density_exact(&sigma, &u).unwrap(), Rational::new(1.into(), BigInt::from(factorial(k as u64))));
        }
        assert_eq!(step_density_formal(&FormalSum::rho_star(), &u).unwrap(), rat(11, 24));
        let id4 = StepPermuton::from_permutation(&p("1234"));
        assert!(step_density_formal(&FormalSum::rho_star(), &id4).unwrap() > rat(11, 24));
        assert!(step_density(&p("123456"), &StepPermuton::<f64>::uniform(12)).is_err());
    }

    #[test]
    fn total_probability_and_nu() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for grid in 1..=3 {
            let mu = random_permuton(&mut rng, grid);
            for k in 1..=4 {
                let s: Rational = enumerate_sn(k).unwrap().iter().map(|s| step_density_exact(s, &mu).unwrap()).sum();
                assert_eq!(s, int(1));
            }
            assert_eq!(step_density_formal(&FormalSum::nu(), &mu).unwrap(), int(1));
        }
    }

    #[test]
    fn projection_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..4 {
            let grid = rng.gen_range(1..=3);
            let mu = random_permuton(&mut rng, grid);
            for sigma in enumerate_sn(3).unwrap().iter().chain(&enumerate_sn(2).unwrap()) {
                let single = FormalSum::single(int(1), sigma.clone());
                let up = project_up(&single, 4).unwrap();
                assert_eq!(step_density_formal(&up, &mu).unwrap(), step_density_exact(sigma, &mu).unwrap());
            }
        }
    }

    #[test]
    fn symmetry_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mu = random_permuton(&mut rng, 3);
        for s in Symmetry::all() {
            for sigma in [p("2413"), p("132"), p("12")] {
                assert_eq!(
                    step_density_exact(&sigma, &mu).unwrap(),
                    step_density_exact(&s.apply(&sigma), &mu.apply_symmetry(s)).unwrap()
                );
            }
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mu = random_permuton(&mut rng, 3);
        for (i, sigma) in [p("12"), p("231"), p("2143")].iter().enumerate() {
            let exact = crate::scalar::rational_to_f64(&step_density_exact(sigma, &mu).unwrap());
            let (m, se) = monte_carlo_density(sigma, &mu.to_f64(), 100_000, i as u64);
            assert!((m - exact).abs() <= 4.0 * se.max(1e-4), "{sigma}: {m} vs {exact}");
        }
    }

    #[test]
    fn rooted_average_matches_unrooting() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mu = random_permuton(&mut rng, 2);
        let rooted = RootedPermutation::new(p("2413"), vec![1, 3]).unwrap();
        let unrooted = crate::flag::unroot(&crate::flag::RootedSum::single(int(1), rooted.clone()));
        let exact = crate::scalar::rational_to_f64(&step_density_formal(&unrooted, &mu).unwrap());
        let (m, se) = monte_carlo_rooted(&rooted, &mu.to_f64(), 200_000, 3);
        assert!((m - exact).abs() <= 4.0 * se.max(1e-4), "{m} vs {exact}");
    }

    #[test]
    fn interpolation() {
        let u1 = StepPermuton::<Rational>::uniform(1);
        let half = interpolate(&u1, &u1, &rat(1, 2)).unwrap();
        assert_eq!(half, StepPermuton::from_permutation(&p("12")));
        let dec = StepPermuton::from_permutation(&p("321"));
        let id = StepPermuton::from_permutation(&p("12"));
        assert_eq!(interpolate(&dec, &id, &int(0)).unwrap(), dec);
        assert_eq!(interpolate(&dec, &id, &int(1)).unwrap(), id);
        assert!(interpolate(&dec, &id, &rat(3, 2)).is_err());
        let z = rat(1, 3);
        let mz = interpolate(&dec, &id, &z).unwrap();
        let cut = mz.grid() * 2 / 3;
        assert!(mz.cell_block_mass(cut..mz.grid(), 0..cut).is_zero());
        let rho: FormalSum = "2(231)-132+3(12)+4(1)".parse().unwrap();
        let poly = crossing_polynomial(&rho, &dec, &id).unwrap();
        assert_eq!(poly_eval(&poly, &z), step_density_formal(&rho, &mz).unwrap());
        let small = interpolate(&StepPermuton::from_permutation(&p("21")), &id, &z).unwrap();
        let rho = FormalSum::rho_star();
        let poly = crossing_polynomial(&rho, &StepPermuton::from_permutation(&p("21")), &id).unwrap();
        assert_eq!(poly_eval(&poly, &z), step_density_formal(&rho, &small).unwrap());
    }

    #[test]
    fn crossings() {
        let dec = StepPermuton::from_permutation(&p("321"));
        let id = StepPermuton::from_permutation(&p("123"));
        let rho = FormalSum::single(int(1), p("123"));
        let c = find_crossing(&rho, &dec, &id).unwrap();
        assert!(c.gap <= 1e-9);
        assert!(c.z_exact.is_positive() && c.z_exact < int(1));
        assert!(matches!(find_crossing(&rho, &id, &id), Err(Error::Straddle)));
        assert!(matches!(find_crossing(&FormalSum::nu(), &dec, &id), Err(Error::Straddle)));
    }
}
