use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{mat_mul, Matrix};
use crate::error::{Error, Result};

/// Determinant by fraction-free Bareiss elimination.
pub fn det(m: &Matrix) -> Result<BigInt> {
    m.require_square("det")?;
    let n = m.rows();
    let mut a: Vec<Vec<BigInt>> = m.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                // Sylvester's identity guarantees exact division.
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Coefficients of `det(tI - m)`, leading coefficient first.
///
/// Faddeev-LeVerrier: `M_k = m·M_{k-1} + c_{n-k+1} I`,
/// `c_{n-k} = -tr(m·M_k) / k`; every division is exact over the integers.
pub fn char_poly(m: &Matrix) -> Result<Vec<BigInt>> {
    m.require_square("char_poly")?;
    let n = m.rows();
    let mut coeffs = vec![BigInt::one()];
    let mut acc = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = mat_mul(m, &acc)?;
        let c_prev = coeffs.last().unwrap().clone();
        for i in 0..n {
            let v = next.get(i, i) + &c_prev;
            next.set(i, i, v);
        }
        let prod = mat_mul(m, &next)?;
        let tr: BigInt = (0..n).map(|i| prod.get(i, i).clone()).sum();
        let (q, r) = tr.div_rem(&BigInt::from(k));
        if !r.is_zero() {
            return Err(Error::Consistency("non-integral Faddeev-LeVerrier step".into()));
        }
        coeffs.push(-q);
        acc = next;
    }
    Ok(coeffs)
}

/// `[tr(m), tr(m^2), ..., tr(m^n_max)]`.
pub fn trace_power_sequence(m: &Matrix, n_max: usize) -> Result<Vec<BigInt>> {
    m.require_square("trace_power_sequence")?;
    let n = m.rows();
    let mut out = Vec::with_capacity(n_max);
    let mut power = m.clone();
    for k in 1..=n_max {
        out.push((0..n).map(|i| power.get(i, i).clone()).sum());
        if k < n_max {
            power = mat_mul(&power, m)?;
        }
    }
    Ok(out)
}
