use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::Matrix;

/// Smith normal form `left · m · right = diag(diagonal)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// `min(rows, cols)` entries: nonzero invariant factors in divisibility
    /// order, then zeros.
    pub diagonal: Vec<BigInt>,
    pub left_transform: Matrix,
    pub right_transform: Matrix,
}

impl SmithForm {
    /// The diagonal laid out as a matrix of the input's shape.
    pub fn diagonal_matrix(&self) -> Matrix {
        let mut d = Matrix::zeros(self.left_transform.rows(), self.right_transform.rows());
        for (i, x) in self.diagonal.iter().enumerate() {
            d.set(i, i, x.clone());
        }
        d
    }
}

struct Reducer {
    a: Vec<Vec<BigInt>>,
    left: Vec<Vec<BigInt>>,
    right: Vec<Vec<BigInt>>,
}

impl Reducer {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.left.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for row in self.a.iter_mut().chain(self.right.iter_mut()) {
                row.swap(i, j);
            }
        }
    }

    /// row_i -= q · row_j
    fn row_axpy(&mut self, i: usize, j: usize, q: &BigInt) {
        for mat in [&mut self.a, &mut self.left] {
            let src = mat[j].clone();
            for (x, y) in mat[i].iter_mut().zip(&src) {
                *x -= q * y;
            }
        }
    }

    /// col_i -= q · col_j
    fn col_axpy(&mut self, i: usize, j: usize, q: &BigInt) {
        for mat in [&mut self.a, &mut self.right] {
            for row in mat.iter_mut() {
                let y = row[j].clone();
                row[i] -= q * y;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for mat in [&mut self.a, &mut self.left] {
            for x in mat[i].iter_mut() {
                *x = -&*x;
            }
        }
    }

    /// Smallest nonzero |entry| in the trailing block, first in (row, col)
    /// order on ties.
    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.len() {
            for j in t..self.a[i].len() {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.a[bi][bj].abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    Matrix::identity(n).to_rows()
}

/// Elementary row/column reduction with pivot = smallest nonzero absolute
/// value. Deterministic for a fixed input.
pub fn smith_normal_form(m: &Matrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = Reducer {
        a: m.to_rows(),
        left: identity_rows(rows),
        right: identity_rows(cols),
    };
    let steps = rows.min(cols);
    'outer: for t in 0..steps {
        loop {
            let Some((pi, pj)) = r.pivot(t) else {
                break 'outer;
            };
            r.swap_rows(t, pi);
            r.swap_cols(t, pj);
            let p = r.a[t][t].clone();

            let mut dirty = false;
            for i in t + 1..rows {
                if !r.a[i][t].is_zero() {
                    let q = r.a[i][t].div_floor(&p);
                    r.row_axpy(i, t, &q);
                    dirty |= !r.a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !r.a[t][j].is_zero() {
                    let q = r.a[t][j].div_floor(&p);
                    r.col_axpy(j, t, &q);
                    dirty |= !r.a[t][j].is_zero();
                }
            }
            if dirty {
                continue;
            }

            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !r.a[i][j].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    // Bring the offending row up; the next pass leaves a
                    // remainder smaller than the pivot.
                    let minus_one = BigInt::from(-1);
                    r.row_axpy(t, i, &minus_one);
                }
                None => break,
            }
        }
        if r.a[t][t].is_negative() {
            r.negate_row(t);
        }
    }

    let diagonal = (0..steps).map(|i| r.a[i][i].clone()).collect();
    let flatten = |v: Vec<Vec<BigInt>>, n: usize| {
        Matrix::new(n, n, v.into_iter().flatten().collect()).expect("square transform")
    };
    SmithForm {
        diagonal,
        left_transform: flatten(r.left, rows),
        right_transform: flatten(r.right, cols),
    }
}
