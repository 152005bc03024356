//! Dense matrices over arbitrary-precision integers.
//!
//! [`Matrix`] is the carrier for every matrix in the crate: the defining
//! matrices `A`, `B`, their factors `C`, `D`, the block matrix `Z` and all
//! derived 0-1 edge transition matrices.

mod charpoly;
mod snf;

pub use charpoly::{char_poly, det, trace_power_sequence};
pub use snf::{smith_normal_form, SmithForm};

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Fails on a zero dimension or
    /// a length mismatch.
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape("Matrix::new", "dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(
                "Matrix::new",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Rejects ragged and empty input.
    pub fn from_rows<T, R>(rows: R) -> Result<Self>
    where
        T: Into<BigInt>,
        R: IntoIterator,
        R::Item: IntoIterator<Item = T>,
    {
        let mut data = Vec::new();
        let mut nrows = 0;
        let mut ncols = None;
        for row in rows {
            let before = data.len();
            data.extend(row.into_iter().map(Into::into));
            let len = data.len() - before;
            match ncols {
                None => ncols = Some(len),
                Some(c) if c != len => {
                    return Err(Error::shape(
                        "Matrix::from_rows",
                        format!("row {nrows} has {len} entries, expected {c}"),
                    ))
                }
                _ => {}
            }
            nrows += 1;
        }
        Matrix::new(nrows, ncols.unwrap_or(0), data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.data[i * self.cols + j] = v.into();
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn max_entry(&self) -> BigInt {
        self.data.iter().max().cloned().unwrap_or_default()
    }

    pub fn sum(&self) -> BigInt {
        self.data.iter().sum()
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        mat_mul(self, other)
    }

    /// `I - self`; square matrices only.
    pub fn identity_minus(&self) -> Result<Matrix> {
        self.require_square("identity_minus")?;
        let mut m = Matrix::identity(self.rows);
        for (x, y) in m.data.iter_mut().zip(&self.data) {
            *x -= y;
        }
        Ok(m)
    }

    /// Block matrix `[[0, c], [d, 0]]`.
    pub fn off_diagonal_blocks(c: &Matrix, d: &Matrix) -> Result<Matrix> {
        if c.rows != d.cols || c.cols != d.rows {
            return Err(Error::shape(
                "off_diagonal_blocks",
                format!(
                    "C is {}x{} but D is {}x{}",
                    c.rows, c.cols, d.rows, d.cols
                ),
            ));
        }
        let (n, m) = (c.rows, c.cols);
        let mut z = Matrix::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..m {
                z.set(i, n + j, c.get(i, j).clone());
                z.set(n + j, i, d.get(j, i).clone());
            }
        }
        Ok(z)
    }

    /// Sub-matrix with rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        let mut out = Matrix::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out.set(i - r0, j - c0, self.get(i, j).clone());
            }
        }
        out
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::shape(
                op,
                format!("expected a square matrix, got {}x{}", self.rows, self.cols),
            ))
        }
    }

    pub(crate) fn require_nonnegative(&self, what: &str) -> Result<()> {
        if self.is_nonnegative() {
            Ok(())
        } else {
            Err(Error::domain(format!("{what} has a negative entry")))
        }
    }

    /// Entries as machine counts; fails when an entry is negative or too large.
    pub(crate) fn to_counts(&self, what: &str) -> Result<Vec<usize>> {
        self.data
            .iter()
            .map(|x| {
                if x.is_negative() {
                    Err(Error::domain(format!("{what} has a negative entry")))
                } else {
                    x.to_usize()
                        .ok_or_else(|| Error::domain(format!("{what} has an entry too large to expand")))
                }
            })
            .collect()
    }
}

/// Exact product `a · b`.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::shape(
            "mat_mul",
            format!(
                "{}x{} times {}x{}",
                a.rows, a.cols, b.rows, b.cols
            ),
        ));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if x.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let y = b.get(k, j);
                if !y.is_zero() {
                    out.data[i * b.cols + j] += x * y;
                }
            }
        }
    }
    Ok(out)
}

/// Whether the directed graph with adjacency pattern `m > 0` is strongly
/// connected, with every vertex on a cycle (so `[0]` is not irreducible).
pub fn is_irreducible(m: &Matrix) -> Result<bool> {
    m.require_square("is_irreducible")?;
    m.require_nonnegative("matrix")?;
    let n = m.rows;
    let forward = reach(n, 0, |i, j| !m.get(i, j).is_zero());
    let backward = reach(n, 0, |i, j| !m.get(j, i).is_zero());
    Ok(forward.iter().all(|&x| x) && backward.iter().all(|&x| x))
}

/// Vertices reachable from `start` by paths of positive length.
fn reach(n: usize, start: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Every row and every column holds a single 1 and zeros elsewhere.
pub fn is_permutation(m: &Matrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.rows;
    let one = BigInt::one();
    let mut col_hits = vec![0usize; n];
    for i in 0..n {
        let mut hits = 0;
        for j in 0..n {
            let x = m.get(i, j);
            if *x == one {
                hits += 1;
                col_hits[j] += 1;
            } else if !x.is_zero() {
                return false;
            }
        }
        if hits != 1 {
            return false;
        }
    }
    col_hits.iter().all(|&h| h == 1)
}

/// The standing assumption on defining matrices: square, nonnegative,
/// irreducible and not a permutation matrix.
pub fn require_standing(m: &Matrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::shape(
            "standing assumption",
            format!("{what} must be square, got {}x{}", m.rows, m.cols),
        ));
    }
    m.require_nonnegative(what)?;
    if !is_irreducible(m)? {
        return Err(Error::domain(format!(
            "{what} must be irreducible (standing assumption: irreducible nonnegative matrix)"
        )));
    }
    if is_permutation(m) {
        return Err(Error::domain(format!(
            "{what} is a permutation matrix (standing assumption: not any permutation matrix)"
        )));
    }
    Ok(())
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

// JSON: {"rows": N, "cols": M, "entries": [[...], ...]}. Entries outside the
// i64 range are written as decimal strings; both forms are accepted.

pub(crate) fn int_to_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(x.to_string()),
    }
}

pub(crate) fn int_from_json(v: &serde_json::Value) -> std::result::Result<BigInt, String> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(format!("entry {n} is not an integer"))
            }
        }
        serde_json::Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| format!("entry \"{s}\" is not a decimal integer")),
        other => Err(format!("entry {other} is not an integer")),
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Vec<serde_json::Value>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(int_to_json).collect())
            .collect();
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": entries,
        })
        .serialize(serializer)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<serde_json::Value>>,
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMatrix::deserialize(deserializer)?;
        if raw.entries.len() != raw.rows {
            return Err(D::Error::custom(format!(
                "declared {} rows but found {}",
                raw.rows,
                raw.entries.len()
            )));
        }
        let mut data = Vec::with_capacity(raw.rows * raw.cols);
        for (i, row) in raw.entries.iter().enumerate() {
            if row.len() != raw.cols {
                return Err(D::Error::custom(format!(
                    "row {i} has {} entries, declared {} columns",
                    row.len(),
                    raw.cols
                )));
            }
            for v in row {
                data.push(int_from_json(v).map_err(D::Error::custom)?);
            }
        }
        Matrix::new(raw.rows, raw.cols, data).map_err(D::Error::custom)
    }
}

impl Matrix {
    pub fn from_json_str(text: &str) -> Result<Matrix> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().copied())).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(mat_mul(&m(&[&[1, 1]]), &m(&[&[1], &[1]])).unwrap(), m(&[&[2]]));
        assert_eq!(
            mat_mul(&m(&[&[1], &[1]]), &m(&[&[1, 1]])).unwrap(),
            m(&[&[1, 1], &[1, 1]])
        );
        let golden = m(&[&[1, 1], &[1, 0]]);
        assert_eq!(mat_mul(&Matrix::identity(2), &golden).unwrap(), golden);
    }

    #[test]
    fn product_shape_error() {
        let err = mat_mul(&m(&[&[1, 1]]), &m(&[&[1, 1]])).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn no_overflow() {
        let big = BigInt::from(u64::MAX) * 7u32;
        let a = Matrix::new(1, 1, vec![big.clone()]).unwrap();
        let p = mat_mul(&a, &a).unwrap();
        assert_eq!(*p.get(0, 0), &big * &big);
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&m(&[&[1, 1], &[1, 0]])).unwrap());
        assert!(!is_irreducible(&m(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(is_irreducible(&m(&[&[2]])).unwrap());
        assert!(!is_irreducible(&m(&[&[0]])).unwrap());
        assert!(!is_irreducible(&m(&[&[1, 1], &[0, 1]])).unwrap());
        assert!(matches!(
            is_irreducible(&m(&[&[1, -1], &[1, 0]])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn permutations() {
        assert!(is_permutation(&m(&[&[0, 1], &[1, 0]])));
        assert!(!is_permutation(&m(&[&[2]])));
        assert!(!is_permutation(&m(&[&[1, 1], &[1, 0]])));
        assert!(is_permutation(&m(&[&[1]])));
        assert!(!is_permutation(&m(&[&[1, 0], &[1, 0]])));
    }

    #[test]
    fn standing_assumption_messages() {
        let err = require_standing(&m(&[&[0, 1], &[1, 0]]), "A").unwrap_err();
        assert!(err.to_string().contains("not any permutation matrix"));
        let err = require_standing(&m(&[&[1, 0], &[0, 1]]), "A").unwrap_err();
        assert!(err.to_string().contains("irreducible"));
    }

    #[test]
    fn json_round_trip_and_big_entries() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let a = Matrix::new(1, 2, vec![big.clone(), BigInt::from(3)]).unwrap();
        let text = a.to_json_string();
        assert!(text.contains("\"123456789012345678901234567890\""));
        assert_eq!(Matrix::from_json_str(&text).unwrap(), a);
        let b = Matrix::from_json_str(r#"{"rows":1,"cols":2,"entries":[["5", 6]]}"#).unwrap();
        assert_eq!(b, m(&[&[5, 6]]));
    }

    #[test]
    fn json_rejects_bad_input() {
        for bad in [
            r#"{"rows":2,"cols":2,"entries":[[1,2],[3]]}"#,
            r#"{"rows":1,"cols":2,"entries":[[1,2.5]]}"#,
            r#"{"rows":1,"cols":1,"entries":[["x"]]}"#,
            r#"{"rows":2,"cols":1,"entries":[[1]]}"#,
            r#"{"rows":0,"cols":0,"entries":[]}"#,
            r#"{"rows":1,"cols":1,"entries":[[true]]}"#,
        ] {
            assert!(Matrix::from_json_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn blocks() {
        let c = m(&[&[1, 1]]);
        let d = m(&[&[1], &[1]]);
        let z = Matrix::off_diagonal_blocks(&c, &d).unwrap();
        assert_eq!(z, m(&[&[0, 1, 1], &[1, 0, 0], &[1, 0, 0]]));
        assert_eq!(z.block(0, 1, 1, 3), c);
        assert_eq!(z.block(1, 3, 0, 1), d);
    }
}
