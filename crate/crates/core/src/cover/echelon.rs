//! Fraction-free reduced row echelon form over the integers, for the small homogeneous
//! systems of the cover search (at most six unknowns).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, Signed, Zero};

/// Rows are kept with gcd 1, a positive pivot, and zeros in every other pivot column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon<T> {
    width: usize,
    rows: Vec<Vec<T>>,
}

/// Returned when a fixed-width integer type overflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

fn pivot<T: Zero>(row: &[T]) -> Option<usize> {
    row.iter().position(|v| !v.is_zero())
}

fn normalize<T: Integer + Signed + Clone>(row: &mut [T]) {
    let g = row.iter().fold(T::zero(), |g, v| g.gcd(v));
    if g.is_zero() {
        return;
    }
    let flip = pivot(row).map(|p| row[p].is_negative()).unwrap_or(false);
    for v in row.iter_mut() {
        *v = v.clone() / g.clone();
        if flip {
            *v = -v.clone();
        }
    }
}

/// `row := row * a - other * b`, checked.
fn combine<T: Integer + Signed + Clone + CheckedMul + CheckedSub>(
    row: &mut [T],
    a: &T,
    other: &[T],
    b: &T,
) -> Result<(), Overflow> {
    for (r, o) in row.iter_mut().zip(other) {
        let left = r.checked_mul(a).ok_or(Overflow)?;
        let right = o.checked_mul(b).ok_or(Overflow)?;
        *r = left.checked_sub(&right).ok_or(Overflow)?;
    }
    normalize(row);
    Ok(())
}

impl<T: Integer + Signed + Clone + CheckedMul + CheckedSub> Echelon<T> {
    pub fn new(width: usize) -> Self {
        Echelon { width, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    /// Adds an equation; returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vec<T>) -> Result<bool, Overflow> {
        debug_assert_eq!(v.len(), self.width);
        for row in &self.rows {
            let p = pivot(row).expect("stored rows are nonzero");
            if !v[p].is_zero() {
                let (a, b) = (row[p].clone(), v[p].clone());
                combine(&mut v, &a, row, &b)?;
            }
        }
        let Some(q) = pivot(&v) else {
            return Ok(false);
        };
        normalize(&mut v);
        for row in &mut self.rows {
            if !row[q].is_zero() {
                let (a, b) = (v[q].clone(), row[q].clone());
                combine(row, &a, &v, &b)?;
            }
        }
        let at = self.rows.partition_point(|r| pivot(r) < Some(q));
        self.rows.insert(at, v);
        Ok(true)
    }

    /// True when some unknown is forced to vanish on every solution, i.e. a row is a
    /// multiple of a unit vector. A full-rank system counts as such.
    pub fn forces_a_zero(&self) -> bool {
        self.rows.iter().any(|r| r.iter().filter(|v| !v.is_zero()).count() == 1)
    }

    pub fn to_big(&self) -> Echelon<BigInt>
    where
        T: Into<BigInt>,
    {
        Echelon {
            width: self.width,
            rows: self.rows.iter().map(|r| r.iter().cloned().map(Into::into).collect()).collect(),
        }
    }
}
