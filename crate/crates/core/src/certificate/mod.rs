//! The sum-of-squares certificate for `d(ρ*, μ) ≥ 11/24` and its exact verification.
//!
//! The certificate consists of five 12-rooted sums `x_i`, five 21-rooted sums `y_i`
//! and a positive definite `5 x 5` matrix `M`. It is valid when
//! `ρ* - ⟦x M xᵀ⟧ - ⟦y M yᵀ⟧`, expanded over `S_6`, has every coefficient equal to 11/24.

mod data;
mod text;

pub use text::{bundled_text, parse_certificate_text};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flag::{flag_product_sums, unroot, RootedPermutation, RootedSum};
use crate::perm::{enumerate_sn, parse_permutation, project_up, FormalSum, Permutation};
use crate::scalar::{format_rational, int, rat};
use crate::{Rational, RationalMatrix};

/// A rooted difference `first - second`.
pub type RootedPair = (RootedPermutation, RootedPermutation);

/// Certificate data as transcribed: the bracketed differences and the integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub x: Vec<Vec<RootedPair>>,
    pub y: Vec<Vec<RootedPair>>,
    pub z1: Vec<RootedPair>,
    pub z2: Vec<RootedPair>,
    pub m_numerators: Vec<Vec<i64>>,
    pub denominator: i64,
}

fn convert(pairs: &[data::Pair]) -> Vec<RootedPair> {
    let term = |(w, r): data::Term| {
        RootedPermutation::new(parse_permutation(w).expect("embedded word"), r.to_vec()).expect("embedded certificate term")
    };
    pairs.iter().map(|&(a, b)| (term(a), term(b))).collect()
}

impl Transcript {
    /// The constants compiled into the library.
    pub fn embedded() -> Self {
        Transcript {
            x: data::X.iter().map(|p| convert(p)).collect(),
            y: data::Y.iter().map(|p| convert(p)).collect(),
            z1: convert(data::Z1),
            z2: convert(data::Z2),
            m_numerators: data::M_NUMERATORS.iter().map(|r| r.to_vec()).collect(),
            denominator: data::DENOMINATOR,
        }
    }

    /// One line per difference and per matrix row; the checksum is taken over this text.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let mut emit = |name: String, pairs: &[RootedPair]| {
            for (a, b) in pairs {
                out.push_str(&format!("{name} {a} {b}\n"));
            }
        };
        for (i, p) in self.x.iter().enumerate() {
            emit(format!("x_{}", i + 1), p);
        }
        for (i, p) in self.y.iter().enumerate() {
            emit(format!("y_{}", i + 1), p);
        }
        emit("z_1".into(), &self.z1);
        emit("z_2".into(), &self.z2);
        for row in &self.m_numerators {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            out.push_str(&format!("M {}\n", cells.join(",")));
        }
        out.push_str(&format!("den {}\n", self.denominator));
        out
    }

    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn matrix(&self) -> RationalMatrix {
        let n = self.m_numerators.len();
        RationalMatrix::from_fn(n, n, |r, c| rat(self.m_numerators[r][c], self.denominator))
    }
}

/// Expected SHA-256 of the embedded transcript.
pub fn embedded_checksum() -> &'static str {
    data::CHECKSUM
}

/// `Σ (first - second)` over the differences.
pub fn pairs_to_sum(pairs: &[RootedPair]) -> RootedSum {
    let mut s = RootedSum::new();
    for (a, b) in pairs {
        s.add_term(int(1), a.clone()).expect("uniform root type");
        s.add_term(int(-1), b.clone()).expect("uniform root type");
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub x: Vec<RootedSum>,
    pub y: Vec<RootedSum>,
    pub m: RationalMatrix,
    pub rho_star: FormalSum,
    pub target: Rational,
}

impl Certificate {
    pub fn from_transcript(t: &Transcript) -> Self {
        Certificate {
            x: t.x.iter().map(|p| pairs_to_sum(p)).collect(),
            y: t.y.iter().map(|p| pairs_to_sum(p)).collect(),
            m: t.matrix(),
            rho_star: FormalSum::rho_star(),
            target: rat(11, 24),
        }
    }

    pub fn with_matrix(&self, m: RationalMatrix) -> Self {
        Certificate { m, ..self.clone() }
    }
}

pub fn builtin_certificate() -> Certificate {
    Certificate::from_transcript(&Transcript::embedded())
}

/// Products `⟦v_i × v_j⟧` for `i ≤ j`, in row-major order of the upper triangle.
fn unrooted_products(v: &[RootedSum]) -> Result<Vec<((usize, usize), FormalSum)>> {
    let pairs: Vec<(usize, usize)> = (0..v.len()).flat_map(|i| (i..v.len()).map(move |j| (i, j))).collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| Ok(((i, j), unroot(&flag_product_sums(&v[i], &v[j])?))))
        .collect()
}

/// `⟦v M vᵀ⟧ = Σ_{i≤j} (2 - [i=j]) M(i,j) ⟦v_i × v_j⟧`.
fn quadratic_form(products: &[((usize, usize), FormalSum)], m: &RationalMatrix) -> FormalSum {
    let mut out = FormalSum::new();
    for ((i, j), prod) in products {
        let weight = if i == j { m[(*i, *j)].clone() } else { &m[(*i, *j)] * int(2) };
        out.add_assign_scaled(&weight, prod);
    }
    out
}

/// Coefficient of one permutation in the verified identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientEntry {
    pub perm: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub identity_holds: bool,
    pub positive_definite: bool,
    pub target: String,
    /// Every `π ∈ S_6` with its coefficient, lexicographic order.
    pub coefficients: Vec<CoefficientEntry>,
    /// Entries whose coefficient differs from the target, with the difference.
    pub residuals: Vec<CoefficientEntry>,
    pub minors: Vec<String>,
    /// Eigenvalues of `112·M` (advisory).
    pub eigenvalues: Vec<f64>,
    pub checksum_ok: bool,
}

/// Expands both quadratic forms and compares every coefficient over `S_6` with 11/24.
pub fn verify_identity(c: &Certificate) -> Result<VerificationReport> {
    let n = 6;
    let x_products = unrooted_products(&c.x)?;
    let y_products = unrooted_products(&c.y)?;
    let lhs = project_up(&c.rho_star, n)?
        .sub(&quadratic_form(&x_products, &c.m))
        .sub(&quadratic_form(&y_products, &c.m));
    let mut coefficients = Vec::new();
    let mut residuals = Vec::new();
    for pi in enumerate_sn(n)? {
        let coeff = lhs.coefficient(&pi);
        let diff = &coeff - &c.target;
        if !diff.is_zero() {
            residuals.push(CoefficientEntry {
                perm: pi.to_string(),
                coefficient: format_rational(&diff),
            });
        }
        coefficients.push(CoefficientEntry {
            perm: pi.to_string(),
            coefficient: format_rational(&coeff),
        });
    }
    // Anything outside S_6 would also be a violation.
    let stray = lhs.iter().filter(|(p, _)| p.order() != n).count();
    let identity_holds = residuals.is_empty() && stray == 0;
    let (positive_definite, minors) = check_positive_definite(&c.m)?;
    let scaled = c.m.scale(&int(112));
    Ok(VerificationReport {
        pass: identity_holds && positive_definite,
        identity_holds,
        positive_definite,
        target: format_rational(&c.target),
        coefficients,
        residuals,
        minors: minors.iter().map(format_rational).collect(),
        eigenvalues: float_eigenvalues(&scaled)?,
        checksum_ok: Transcript::embedded().checksum() == data::CHECKSUM,
    })
}

/// Sylvester's criterion: positive definite iff every leading principal minor is positive.
pub fn check_positive_definite(m: &RationalMatrix) -> Result<(bool, Vec<Rational>)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let minors = m.leading_principal_minors()?;
    Ok((minors.iter().all(Signed::is_positive), minors))
}

/// Eigenvalues of a symmetric rational matrix in floating point, descending.
pub fn float_eigenvalues(m: &RationalMatrix) -> Result<Vec<f64>> {
    m.to_f64().float_eigenvalues()
}

/// One nonzero contribution `weight · ⟦v_i × v_j⟧(π)` to the coefficient of `π`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contribution {
    /// `"x"` or `"y"`.
    pub family: &'static str,
    /// 1-based indices, `i ≤ j`.
    pub i: usize,
    pub j: usize,
    /// Coefficient of `π` in `⟦v_i × v_j⟧`.
    pub product_coefficient: String,
    /// `M(i,j)`; off-diagonal products appear twice in the quadratic form.
    pub m_entry: String,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientBreakdown {
    pub perm: String,
    /// `d(ρ*, π)`.
    pub projected: String,
    pub contributions: Vec<Contribution>,
    /// `d(ρ*, π) - Σ contributions`.
    pub result: String,
}

/// Itemizes the coefficient of `π` in the identity.
pub fn coefficient_breakdown(c: &Certificate, pi: &Permutation) -> Result<CoefficientBreakdown> {
    let projected = crate::perm::formal_density(&c.rho_star, pi);
    let mut total = projected.clone();
    let mut contributions = Vec::new();
    for (family, v) in [("x", &c.x), ("y", &c.y)] {
        for ((i, j), prod) in unrooted_products(v)? {
            let pc = prod.coefficient(pi);
            if pc.is_zero() {
                continue;
            }
            let multiplicity = if i == j { 1 } else { 2 };
            total -= &pc * &c.m[(i, j)] * int(multiplicity as i64);
            contributions.push(Contribution {
                family,
                i: i + 1,
                j: j + 1,
                product_coefficient: format_rational(&pc),
                m_entry: format_rational(&c.m[(i, j)]),
                multiplicity,
            });
        }
    }
    Ok(CoefficientBreakdown {
        perm: pi.to_string(),
        projected: format_rational(&projected),
        contributions,
        result: format_rational(&total),
    })
}

/// The two rooted sums whose vanishing forces uniformity, as transcribed.
pub fn builtin_z_pair() -> (RootedSum, RootedSum) {
    let t = Transcript::embedded();
    (pairs_to_sum(&t.z1), pairs_to_sum(&t.z2))
}
