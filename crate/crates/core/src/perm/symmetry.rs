use std::fmt;

use super::Permutation;
use crate::{Matrix, Scalar};

/// An element of the dihedral group of the square acting on permutation diagrams.
///
/// Stored as a signed 2x2 permutation matrix acting on centred coordinates
/// `(2x - n - 1, 2y - n - 1)`, where `x` is the position and `y` the value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symmetry {
    m: [[i8; 2]; 2],
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry { m: [[1, 0], [0, 1]] };
    /// `π(i) ↦ π(n + 1 - i)`.
    pub const REVERSE: Symmetry = Symmetry { m: [[-1, 0], [0, 1]] };
    /// `v ↦ n + 1 - v`.
    pub const COMPLEMENT: Symmetry = Symmetry { m: [[1, 0], [0, -1]] };
    /// Transpose of the permutation matrix.
    pub const INVERSE: Symmetry = Symmetry { m: [[0, 1], [1, 0]] };
    /// `(x, y) ↦ (n + 1 - y, x)`.
    pub const QUARTER_TURN: Symmetry = Symmetry { m: [[0, -1], [1, 0]] };
    pub const HALF_TURN: Symmetry = Symmetry { m: [[-1, 0], [0, -1]] };
    pub const THREE_QUARTER_TURN: Symmetry = Symmetry { m: [[0, 1], [-1, 0]] };
    pub const ANTI_TRANSPOSE: Symmetry = Symmetry { m: [[0, -1], [-1, 0]] };

    pub fn all() -> [Symmetry; 8] {
        [
            Self::IDENTITY,
            Self::REVERSE,
            Self::COMPLEMENT,
            Self::INVERSE,
            Self::QUARTER_TURN,
            Self::HALF_TURN,
            Self::THREE_QUARTER_TURN,
            Self::ANTI_TRANSPOSE,
        ]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: Symmetry) -> Symmetry {
        let (a, b) = (self.m, other.m);
        let mut m = [[0i8; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Symmetry { m }
    }

    pub fn inverse(self) -> Symmetry {
        // Signed permutation matrices are orthogonal.
        Symmetry {
            m: [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]],
        }
    }

    pub fn swaps_axes(self) -> bool {
        self.m[0][0] == 0
    }

    /// Image of the 1-based point `(x, y)` of an `n x n` grid.
    pub fn map_point(self, n: usize, (x, y): (usize, usize)) -> (usize, usize) {
        let s = n as i64 + 1;
        let u = 2 * x as i64 - s;
        let v = 2 * y as i64 - s;
        let nu = self.m[0][0] as i64 * u + self.m[0][1] as i64 * v;
        let nv = self.m[1][0] as i64 * u + self.m[1][1] as i64 * v;
        (((nu + s) / 2) as usize, ((nv + s) / 2) as usize)
    }

    pub fn apply(self, pi: &Permutation) -> Permutation {
        let n = pi.order();
        let mut word = vec![0u32; n];
        for x in 1..=n {
            let (nx, ny) = self.map_point(n, (x, pi.at(x)));
            word[nx - 1] = ny as u32;
        }
        Permutation::from_word_unchecked(word)
    }

    /// Moves entry `(i, j)` of a square grid matrix (0-based) to its image cell.
    pub fn apply_grid<T: Scalar>(self, m: &Matrix<T>) -> Matrix<T> {
        let n = m.rows();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (ni, nj) = self.map_point(n, (i + 1, j + 1));
                out[(ni - 1, nj - 1)] = m[(i, j)].clone();
            }
        }
        out
    }
}

impl fmt::Debug for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match *self {
            Self::IDENTITY => "identity",
            Self::REVERSE => "reverse",
            Self::COMPLEMENT => "complement",
            Self::INVERSE => "inverse",
            Self::QUARTER_TURN => "quarter-turn",
            Self::HALF_TURN => "half-turn",
            Self::THREE_QUARTER_TURN => "three-quarter-turn",
            _ => "anti-transpose",
        };
        f.write_str(name)
    }
}
