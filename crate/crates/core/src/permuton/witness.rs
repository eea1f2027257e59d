//! Randomized search for a step permuton on which `d(ρ, ·)` falls strictly below (or above)
//! its value on the uniform measure.
//!
//! Each restart draws a random doubly stochastic matrix (Sinkhorn scaling of a random
//! positive matrix) and descends along the best 2×2 exchange `+ε` at `(i,j), (i',j')`,
//! `-ε` at `(i,j'), (i',j)`, chosen from the gradient in the cell weights. A floating
//! point candidate is rounded to a rational doubly stochastic matrix and confirmed with
//! exact arithmetic.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{for_each_assignment, step_density_formal, StepPermuton, DENSITY_BUDGET};
use crate::error::Result;
use crate::perm::{FormalSum, Symmetry};
use crate::scalar::{factorial, format_rational, rational_to_f64};
use crate::stat::replicate_seed;
use crate::{Rational, RationalMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `d(ρ, μ) < d(ρ, λ)`
    Lt,
    /// `d(ρ, μ) > d(ρ, λ)`
    Gt,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Lt => 1.0,
            Direction::Gt => -1.0,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lt" | "<" => Ok(Direction::Lt),
            "gt" | ">" => Ok(Direction::Gt),
            _ => Err(crate::Error::Parse { what: "direction", text: s.to_string() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WitnessOptions {
    pub seed: u64,
    pub grids: Vec<usize>,
    /// Random restarts per worker.
    pub restarts: usize,
    /// Descent steps per restart.
    pub steps: usize,
    pub workers: usize,
    /// Only consider permutons fixed by this symmetry.
    pub invariant: Option<Symmetry>,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            seed: 0,
            grids: (2..=8).collect(),
            restarts: 8,
            steps: 400,
            workers: 8,
            invariant: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub permuton: StepPermuton<Rational>,
    pub value: Rational,
    pub target: Rational,
    pub direction: Direction,
    /// Index of the worker that found it.
    pub worker: usize,
}

impl Serialize for Witness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Witness", 7)?;
        st.serialize_field("grid", &self.permuton.grid())?;
        st.serialize_field("weights", self.permuton.weights())?;
        st.serialize_field("value", &format_rational(&self.value))?;
        st.serialize_field("target", &format_rational(&self.target))?;
        st.serialize_field("value_f64", &rational_to_f64(&self.value))?;
        st.serialize_field("direction", &self.direction)?;
        st.serialize_field("worker", &self.worker)?;
        st.end()
    }
}

/// `sign · d(ρ, μ[W])` and its gradient in the entries of `W` (row-major, `W[(i,j)]` at `i*n + j`).
struct Objective {
    n: usize,
    /// Per term: assignments as flat cell lists with their scaled weights.
    terms: Vec<(usize, Vec<(Vec<usize>, f64)>)>,
}

impl Objective {
    fn new(rho: &FormalSum, n: usize, sign: f64) -> Result<Self> {
        let mut terms = Vec::new();
        for (sigma, c) in rho.iter() {
            let k = sigma.order();
            let norm = sign * rational_to_f64(c) / (factorial(k as u64) as f64 * (n as f64).powi(k as i32));
            let mut list = Vec::new();
            for_each_assignment(sigma, n, DENSITY_BUDGET, |cells, mult| {
                list.push((cells.iter().map(|&(a, b)| a * n + b).collect(), mult as f64 * norm));
            })?;
            terms.push((k, list));
        }
        Ok(Objective { n, terms })
    }

    fn value(&self, w: &[f64]) -> f64 {
        self.terms
            .iter()
            .flat_map(|(_, list)| list.iter())
            .map(|(cells, m)| m * cells.iter().map(|&c| w[c]).product::<f64>())
            .sum()
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n * self.n];
        let mut prefix = [0.0f64; 8];
        for (k, list) in &self.terms {
            for (cells, m) in list {
                prefix[0] = 1.0;
                for t in 0..*k {
                    prefix[t + 1] = prefix[t] * w[cells[t]];
                }
                let mut suffix = 1.0;
                for t in (0..*k).rev() {
                    g[cells[t]] += m * prefix[t] * suffix;
                    suffix *= w[cells[t]];
                }
            }
        }
        g
    }
}

fn sinkhorn(w: &mut [f64], n: usize) {
    for _ in 0..500 {
        for i in 0..n {
            let s: f64 = (0..n).map(|j| w[i * n + j]).sum();
            (0..n).for_each(|j| w[i * n + j] /= s);
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| w[i * n + j]).sum();
            (0..n).for_each(|i| w[i * n + j] /= s);
        }
    }
}

fn mirror(w: &[f64], n: usize, s: Symmetry) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = s.map_point(n, (i + 1, j + 1));
            out[(a - 1) * n + (b - 1)] = w[i * n + j];
        }
    }
    out
}

fn symmetrize_f64(w: &[f64], n: usize, s: Option<Symmetry>) -> Vec<f64> {
    match s {
        Some(s) => w.iter().zip(mirror(w, n, s)).map(|(a, b)| (a + b) / 2.0).collect(),
        None => w.to_vec(),
    }
}

/// Steepest 2×2 exchange direction; `None` at a stationary point.
fn best_exchange(g: &[f64], w: &[f64], n: usize) -> Option<(usize, usize, usize, usize)> {
    let mut best = -1e-12;
    let mut mv = None;
    for i in 0..n {
        for i2 in 0..n {
            for j in 0..n {
                for j2 in 0..n {
                    if i == i2 || j == j2 || w[i * n + j2] <= 1e-12 || w[i2 * n + j] <= 1e-12 {
                        continue;
                    }
                    let d = g[i * n + j] + g[i2 * n + j2] - g[i * n + j2] - g[i2 * n + j];
                    if d < best {
                        best = d;
                        mv = Some((i, i2, j, j2));
                    }
                }
            }
        }
    }
    mv
}

/// Rounds to multiples of `1/den` on the leading `(n-1) × (n-1)` block and completes the
/// last row and column; `None` if an entry would be negative.
fn round_doubly_stochastic(w: &[f64], n: usize, den: i64) -> Option<RationalMatrix> {
    let mut m = RationalMatrix::zeros(n, n);
    let d = BigInt::from(den);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            m[(i, j)] = Rational::new(BigInt::from((w[i * n + j] * den as f64).round() as i64), d.clone());
        }
    }
    let one = Rational::from_integer(BigInt::from(1));
    for i in 0..n - 1 {
        let row: Rational = (0..n - 1).map(|j| m[(i, j)].clone()).sum();
        m[(i, n - 1)] = &one - row;
        let col: Rational = (0..n - 1).map(|j| m[(j, i)].clone()).sum();
        m[(n - 1, i)] = &one - col;
    }
    let last: Rational = (0..n - 1).map(|j| m[(n - 1, j)].clone()).sum();
    m[(n - 1, n - 1)] = &one - last;
    if m.entries().any(|v| v.is_negative()) {
        None
    } else {
        Some(m)
    }
}

fn exact_candidate(
    rho: &FormalSum,
    w: &[f64],
    n: usize,
    dir: Direction,
    invariant: Option<Symmetry>,
) -> Result<Option<(StepPermuton<Rational>, Rational)>> {
    let target = rho.uniform_value();
    for den in [1_000i64, 100_000, 10_000_000] {
        let Some(mut m) = round_doubly_stochastic(w, n, den) else { continue };
        if let Some(s) = invariant {
            m = m.add(&s.apply_grid(&m)).scale(&Rational::new(BigInt::from(1), BigInt::from(2)));
        }
        let mu = StepPermuton::new(m)?;
        let value = step_density_formal(rho, &mu)?;
        let ok = match dir {
            Direction::Lt => value < target,
            Direction::Gt => value > target,
        };
        if ok {
            return Ok(Some((mu, value)));
        }
    }
    Ok(None)
}

fn run_worker(
    rho: &FormalSum,
    dir: Direction,
    opts: &WitnessOptions,
    objectives: &[Objective],
    worker: usize,
    found: &AtomicUsize,
) -> Result<Option<Witness>> {
    let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(opts.seed, worker));
    let target = dir.sign() * rational_to_f64(&rho.uniform_value());
    for restart in 0..opts.restarts {
        let obj = &objectives[(worker + restart) % objectives.len()];
        let n = obj.n;
        let mut w: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>().powi(3) + 1e-6).collect();
        sinkhorn(&mut w, n);
        w = symmetrize_f64(&w, n, opts.invariant);
        let mut v = obj.value(&w);
        for _ in 0..opts.steps {
            if v - target < -1e-7 || found.load(Ordering::Relaxed) < worker {
                break;
            }
            let g = symmetrize_f64(&obj.gradient(&w), n, opts.invariant);
            let Some((i, i2, j, j2)) = best_exchange(&g, &w, n) else { break };
            let mut e = w[i * n + j2].min(w[i2 * n + j]);
            let mut improved = false;
            for _ in 0..30 {
                let mut c = w.clone();
                c[i * n + j] += e;
                c[i2 * n + j2] += e;
                c[i * n + j2] -= e;
                c[i2 * n + j] -= e;
                let c = symmetrize_f64(&c, n, opts.invariant);
                let cv = obj.value(&c);
                if cv < v {
                    w = c;
                    v = cv;
                    improved = true;
                    break;
                }
                e /= 2.0;
            }
            if !improved {
                break;
            }
        }
        if found.load(Ordering::Relaxed) < worker {
            return Ok(None);
        }
        if v - target < -1e-9 {
            if let Some((permuton, value)) = exact_candidate(rho, &w, n, dir, opts.invariant)? {
                found.fetch_min(worker, Ordering::Relaxed);
                return Ok(Some(Witness {
                    permuton,
                    value,
                    target: rho.uniform_value(),
                    direction: dir,
                    worker,
                }));
            }
        }
    }
    Ok(None)
}

/// A step permuton with `d(ρ, μ)` strictly on the requested side of `d(ρ, λ)`, or `None`
/// when the budget runs out. The result is the one from the lowest-indexed successful
/// worker, so it depends only on the options.
pub fn witness_search(rho: &FormalSum, dir: Direction, opts: &WitnessOptions) -> Result<Option<Witness>> {
    if rho.is_empty() || opts.grids.is_empty() {
        return Ok(None);
    }
    let objectives: Vec<Objective> = opts
        .grids
        .par_iter()
        .map(|&n| Objective::new(rho, n, dir.sign()))
        .collect::<Result<_>>()?;
    let found = AtomicUsize::new(usize::MAX);
    let results: Vec<Option<Witness>> = (0..opts.workers.max(1))
        .into_par_iter()
        .map(|w| run_worker(rho, dir, opts, &objectives, w, &found))
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().min_by_key(|w| w.worker))
}
