//! Gradient and Hessian of `h_{ρ,n}(x) = d(ρ, μ[M_x])` at `x = 0`.
//!
//! Main route: `d(σ, μ[M])` is a polynomial in the entries of `M` whose first and second
//! partials at `M = J_n / n` are integer sums over cell assignments; the chain rule through
//! `M_x = J_n / n + Σ x_{i,j} B_{i,j}` gives the derivatives in `x`.
//!
//! Second route: restrict `h` to lines through 0 and differentiate the interpolating
//! polynomial on six points, which is exact because `h` has degree at most `max |σ_i|`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{b_cells, for_each_assignment, make_perturbed, step_density_formal, variable_index, PerturbationVector, DENSITY_BUDGET};
use crate::error::{Error, Result};
use crate::matrix::Inertia;
use crate::perm::{FormalSum, Permutation};
use crate::scalar::{factorial, format_rational};
use crate::{Rational, RationalMatrix};

const MAX_GRID: usize = 5;

/// Integer first and second partial sums of `d(σ, ·)` over cells at the uniform point.
struct PatternTables {
    first: Vec<i128>,
    second: Vec<i128>,
}

type TableCache = RwLock<HashMap<(Permutation, usize), Arc<PatternTables>>>;

fn pattern_tables(sigma: &Permutation, n: usize) -> Result<Arc<PatternTables>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (sigma.clone(), n);
    if let Some(t) = cache.read().expect("cache lock").get(&key) {
        return Ok(t.clone());
    }
    let cells = n * n;
    let mut first = vec![0i128; cells];
    let mut second = vec![0i128; cells * cells];
    for_each_assignment(sigma, n, DENSITY_BUDGET, |assigned, mult| {
        let m = mult as i128;
        let idx: Vec<usize> = assigned.iter().map(|&(a, b)| a * n + b).collect();
        for (t, &c) in idx.iter().enumerate() {
            first[c] += m;
            for (s, &d) in idx.iter().enumerate() {
                if s != t {
                    second[c * cells + d] += m;
                }
            }
        }
    })?;
    let tables = Arc::new(PatternTables { first, second });
    cache.write().expect("cache lock").insert(key, tables.clone());
    Ok(tables)
}

fn check_input(rho: &FormalSum, n: usize) -> Result<()> {
    if !(2..=MAX_GRID).contains(&n) {
        return Err(Error::OutOfRange { what: "grid", value: n, min: 2, max: MAX_GRID });
    }
    if rho.max_order() > 5 {
        return Err(Error::OutOfRange { what: "pattern order", value: rho.max_order(), min: 1, max: 5 });
    }
    Ok(())
}

/// First and second partials of `d(ρ, μ[M])` in the entries of `M` at `J_n / n`.
fn cell_derivatives(rho: &FormalSum, n: usize) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let cells = n * n;
    let mut d1 = vec![Rational::zero(); cells];
    let mut d2 = vec![Rational::zero(); cells * cells];
    for (sigma, c) in rho.iter() {
        let k = sigma.order() as u32;
        let t = pattern_tables(sigma, n)?;
        let kf = BigInt::from(factorial(k as u64));
        let nb = BigInt::from(n);
        // d/dW_c: Σ mult · #t · n^{-(k-1)} / (k! n^k)
        let s1 = c / Rational::from_integer(&kf * num_traits::pow(nb.clone(), (2 * k - 1) as usize));
        for (out, v) in d1.iter_mut().zip(&t.first) {
            if *v != 0 {
                *out += &s1 * BigInt::from(*v);
            }
        }
        if k >= 2 {
            let s2 = c / Rational::from_integer(&kf * num_traits::pow(nb, (2 * k - 2) as usize));
            for (out, v) in d2.iter_mut().zip(&t.second) {
                if *v != 0 {
                    *out += &s2 * BigInt::from(*v);
                }
            }
        }
    }
    Ok((d1, d2))
}

fn variables(n: usize) -> Vec<(usize, usize)> {
    (1..n).flat_map(|i| (1..n).map(move |j| (i, j))).collect()
}

/// `∂h_{ρ,n}/∂x_{i,j}` at 0, indexed by [`variable_index`].
pub fn h_gradient(rho: &FormalSum, n: usize) -> Result<Vec<Rational>> {
    check_input(rho, n)?;
    let (d1, _) = cell_derivatives(rho, n)?;
    Ok(variables(n)
        .into_iter()
        .map(|(i, j)| {
            b_cells(i, j).iter().fold(Rational::zero(), |acc, &((a, b), s)| acc + &d1[a * n + b] * BigInt::from(s))
        })
        .collect())
}

fn hessian_from_cells(d2: &[Rational], n: usize) -> RationalMatrix {
    let cells = n * n;
    let vars = variables(n);
    RationalMatrix::from_fn(vars.len(), vars.len(), |p, q| {
        let mut acc = Rational::zero();
        for &((a, b), s) in &b_cells(vars[p].0, vars[p].1) {
            for &((c, d), t) in &b_cells(vars[q].0, vars[q].1) {
                let v = &d2[(a * n + b) * cells + c * n + d];
                if !v.is_zero() {
                    acc += v * BigInt::from(s * t);
                }
            }
        }
        acc
    })
}

/// Exact gradient and Hessian of `h_{ρ,n}` at 0 with their spectral summary.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianReport {
    pub n: usize,
    pub dimension: usize,
    pub gradient: Vec<Rational>,
    pub hessian: RationalMatrix,
    pub eigenvalues: Vec<f64>,
    pub inertia: Inertia,
}

impl HessianReport {
    fn new(n: usize, gradient: Vec<Rational>, hessian: RationalMatrix) -> Result<Self> {
        let inertia = hessian.inertia()?;
        let eigenvalues = hessian.float_eigenvalues()?;
        Ok(HessianReport { n, dimension: gradient.len(), gradient, hessian, eigenvalues, inertia })
    }

    pub fn gradient_zero(&self) -> bool {
        self.gradient.iter().all(Zero::is_zero)
    }

    pub fn has_positive(&self) -> bool {
        self.inertia.positive > 0
    }

    pub fn has_negative(&self) -> bool {
        self.inertia.negative > 0
    }

    /// Zero gradient and eigenvalues of both signs: 0 is a saddle, so `ρ` is not forcing.
    pub fn is_saddle(&self) -> bool {
        self.gradient_zero() && self.has_positive() && self.has_negative()
    }
}

impl Serialize for HessianReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HessianReport", 8)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("dimension", &self.dimension)?;
        st.serialize_field("gradient", &self.gradient.iter().map(format_rational).collect::<Vec<_>>())?;
        st.serialize_field("hessian", &self.hessian)?;
        st.serialize_field("eigenvalues", &self.eigenvalues)?;
        st.serialize_field("inertia", &self.inertia)?;
        st.serialize_field("has_positive", &self.has_positive())?;
        st.serialize_field("has_negative", &self.has_negative())?;
        st.end()
    }
}

/// The Hessian of `h_{ρ,n}` at 0 (variables ordered by [`variable_index`]).
pub fn h_hessian(rho: &FormalSum, n: usize) -> Result<HessianReport> {
    check_input(rho, n)?;
    let (d1, d2) = cell_derivatives(rho, n)?;
    let gradient = variables(n)
        .into_iter()
        .map(|(i, j)| {
            b_cells(i, j).iter().fold(Rational::zero(), |acc, &((a, b), s)| acc + &d1[a * n + b] * BigInt::from(s))
        })
        .collect();
    HessianReport::new(n, gradient, hessian_from_cells(&d2, n))
}

fn sample_points(n: usize) -> Vec<Rational> {
    let r = |a: i64, b: i64| Rational::new(BigInt::from(a), BigInt::from(b * n as i64));
    vec![Rational::zero(), r(1, 8), r(-1, 8), r(1, 16), r(-1, 16), r(3, 16)]
}

/// `(L_i'(0), L_i''(0))` for the Lagrange basis on `points`.
fn lagrange_derivative_weights(points: &[Rational]) -> Vec<(Rational, Rational)> {
    points
        .iter()
        .enumerate()
        .map(|(i, pi)| {
            let mut poly = vec![Rational::one()];
            for (m, pm) in points.iter().enumerate() {
                if m != i {
                    let d = pi - pm;
                    poly = super::poly_mul(&poly, &[-pm / &d, Rational::one() / d]);
                }
            }
            (poly[1].clone(), &poly[2] * BigInt::from(2))
        })
        .collect()
}

/// `h(t · u)` at the sample points, for a direction `u` over variable indices.
fn line_values(rho: &FormalSum, n: usize, direction: &[(usize, usize)], points: &[Rational]) -> Result<Vec<Rational>> {
    points
        .iter()
        .map(|t| {
            let mut x = PerturbationVector::zeros(n);
            for &(i, j) in direction {
                x = x.with(i, j, t.clone())?;
            }
            step_density_formal(rho, &make_perturbed(&x))
        })
        .collect()
}

/// Gradient via univariate interpolation along each coordinate axis.
pub fn h_gradient_interpolated(rho: &FormalSum, n: usize) -> Result<Vec<Rational>> {
    check_input(rho, n)?;
    let pts = sample_points(n);
    let w = lagrange_derivative_weights(&pts);
    variables(n)
        .into_iter()
        .map(|v| {
            let vals = line_values(rho, n, &[v], &pts)?;
            Ok(vals.iter().zip(&w).map(|(f, (d1, _))| f * d1).sum())
        })
        .collect()
}

/// Hessian via second derivatives along `e_p` and `e_p + e_q` and polarization.
pub fn h_hessian_interpolated(rho: &FormalSum, n: usize) -> Result<HessianReport> {
    use rayon::prelude::*;
    check_input(rho, n)?;
    let pts = sample_points(n);
    let w = lagrange_derivative_weights(&pts);
    let vars = variables(n);
    let m = vars.len();
    let deriv = |dir: &[(usize, usize)]| -> Result<(Rational, Rational)> {
        let vals = line_values(rho, n, dir, &pts)?;
        Ok(vals.iter().zip(&w).fold((Rational::zero(), Rational::zero()), |(a, b), (f, (d1, d2))| {
            (a + f * d1, b + f * d2)
        }))
    };
    let axis: Vec<(Rational, Rational)> = vars.par_iter().map(|&v| deriv(&[v])).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|p| (p + 1..m).map(move |q| (p, q))).collect();
    let mixed: Vec<Rational> = pairs
        .par_iter()
        .map(|&(p, q)| deriv(&[vars[p], vars[q]]).map(|(_, d2)| d2))
        .collect::<Result<_>>()?;
    let mut h = RationalMatrix::zeros(m, m);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for p in 0..m {
        h[(p, p)] = axis[p].1.clone();
    }
    for (&(p, q), d2) in pairs.iter().zip(mixed) {
        let v = (d2 - &axis[p].1 - &axis[q].1) * &half;
        h[(p, q)] = v.clone();
        h[(q, p)] = v;
    }
    debug_assert_eq!(vars.iter().map(|&(i, j)| variable_index(n, i, j)).collect::<Vec<_>>(), (0..m).collect::<Vec<_>>());
    HessianReport::new(n, axis.into_iter().map(|(g, _)| g).collect(), h)
}
