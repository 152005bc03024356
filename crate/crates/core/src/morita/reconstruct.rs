//! Recovering `C` and `D` from the matchings by counting.

use std::collections::{BTreeMap, BTreeSet};

use super::model::Model;
use super::MoritaCertificate;
use crate::error::{Error, Result};
use crate::exactmat::{mat_mul, Matrix};

pub(crate) type CountingSets = BTreeMap<(usize, usize), BTreeSet<usize>>;

/// `C(u, v)`: positions `c(a_i)` with `s(a_i) = u` such that some `a_j`
/// follows `a_i` and some `b_k` with `s(b_k) = v` has
/// `(d(b_k), c(b_k)) = (d(a_i), c(a_j))`.
pub(crate) fn counting_sets_c(m: &Model) -> CountingSets {
    let mut sets = CountingSets::new();
    for (i, p) in m.phi_a.iter().enumerate() {
        let Some((ci, di)) = *p else { continue };
        for (j, q) in m.phi_a.iter().enumerate() {
            let Some((cj, _)) = *q else { continue };
            if !m.ga.follows(i, j) {
                continue;
            }
            for (k, r) in m.phi_b.iter().enumerate() {
                if *r == Some((di, cj)) {
                    sets.entry((m.ga.source(i), m.gb.source(k))).or_default().insert(ci);
                }
            }
        }
    }
    sets
}

/// `D(v, u)`: positions `d(b_k)` with `s(b_k) = v` such that some `b_l`
/// follows `b_k` and some `a_j` with `s(a_j) = u` has
/// `(c(a_j), d(a_j)) = (c(b_k), d(b_l))`.
pub(crate) fn counting_sets_d(m: &Model) -> CountingSets {
    let mut sets = CountingSets::new();
    for (k, p) in m.phi_b.iter().enumerate() {
        let Some((dk, ck)) = *p else { continue };
        for (l, q) in m.phi_b.iter().enumerate() {
            let Some((dl, _)) = *q else { continue };
            if !m.gb.follows(k, l) {
                continue;
            }
            for (j, r) in m.phi_a.iter().enumerate() {
                if *r == Some((ck, dl)) {
                    sets.entry((m.gb.source(k), m.ga.source(j))).or_default().insert(dk);
                }
            }
        }
    }
    sets
}

fn first_mismatch(got: &Matrix, want: &Matrix) -> Option<(usize, usize)> {
    (0..want.rows())
        .flat_map(|i| (0..want.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| got.get(i, j) != want.get(i, j))
}

/// Counts the sets `C(u, v)` and `D(v, u)` and checks that the counts
/// factor `A` and `B` again.
pub fn reconstruct_factors(cert: &MoritaCertificate) -> Result<(Matrix, Matrix)> {
    let m = Model::new(cert).map_err(Error::Consistency)?;
    let (n, k) = (cert.a.rows(), cert.b.rows());
    let mut c = Matrix::zeros(n, k);
    for ((u, v), set) in counting_sets_c(&m) {
        c.set(u, v, set.len());
    }
    let mut d = Matrix::zeros(k, n);
    for ((v, u), set) in counting_sets_d(&m) {
        d.set(v, u, set.len());
    }
    for (label, got, want) in [("CD", mat_mul(&c, &d)?, &cert.a), ("DC", mat_mul(&d, &c)?, &cert.b)] {
        if let Some((i, j)) = first_mismatch(&got, want) {
            return Err(Error::Consistency(format!(
                "recovered {label} has {} at ({i}, {j}), expected {}",
                got.get(i, j),
                want.get(i, j)
            )));
        }
    }
    Ok((c, d))
}
