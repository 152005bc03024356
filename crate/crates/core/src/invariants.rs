//! Conjugacy invariants of irreducible nonnegative matrices, used to screen
//! searches and to separate matrices that cannot be shift equivalent.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactmat::{char_poly, det, int_to_json, is_irreducible, smith_normal_form, trace_power_sequence, Matrix};

pub const DEFAULT_TRACE_DEPTH: usize = 6;

/// `10^-9`.
pub fn default_entropy_tol() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(9))
}

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub det_i_minus_a: BigInt,
    pub bowen_franks: Vec<BigInt>,
    pub char_poly: Vec<BigInt>,
    pub traces: Vec<BigInt>,
    pub entropy: Interval,
}

impl InvariantReport {
    pub fn compute(a: &Matrix, trace_depth: usize, tol: &BigRational) -> Result<InvariantReport> {
        Ok(InvariantReport {
            det_i_minus_a: det_i_minus_a(a)?,
            bowen_franks: bowen_franks(a)?,
            char_poly: char_poly(a)?,
            traces: trace_power_sequence(a, trace_depth)?,
            entropy: entropy(a, tol)?,
        })
    }

    pub fn to_json(&self) -> Value {
        let ints = |v: &[BigInt]| Value::Array(v.iter().map(int_to_json).collect());
        json!({
            "det_i_minus_a": int_to_json(&self.det_i_minus_a),
            "bowen_franks": ints(&self.bowen_franks),
            "char_poly": ints(&self.char_poly),
            "traces": ints(&self.traces),
            "entropy": {
                "lo": ratio_string(&self.entropy.lo),
                "hi": ratio_string(&self.entropy.hi),
            },
        })
    }
}

/// `p/q` with `q > 0`, even for integers.
pub fn ratio_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` or a bare integer.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational number: `{text}`"));
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn det_i_minus_a(a: &Matrix) -> Result<BigInt> {
    det(&a.identity_minus()?)
}

/// Nonunit invariant factors of `I - a`, zeros included; empty when the
/// cokernel is trivial.
pub fn bowen_franks(a: &Matrix) -> Result<Vec<BigInt>> {
    let f = smith_normal_form(&a.identity_minus()?);
    Ok(f.diagonal.into_iter().filter(|x| !x.is_one()).collect())
}

/// Characteristic polynomial with the factor `t^k` at zero removed.
pub fn char_poly_away_from_zero(a: &Matrix) -> Result<Vec<BigInt>> {
    let mut p = char_poly(a)?;
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    Ok(p)
}

type Poly = Vec<BigRational>;

fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[BigRational]) -> Poly {
    let n = p.len() - 1;
    p[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(n - i)))
        .collect()
}

/// Remainder of `p / q`, leading coefficient first.
fn remainder(p: &[BigRational], q: &[BigRational]) -> Poly {
    let mut r: Poly = p.to_vec();
    while r.len() >= q.len() {
        let f = &r[0] / &q[0];
        for (i, c) in q.iter().enumerate() {
            r[i] = &r[i] - &f * c;
        }
        r.remove(0);
    }
    while r.first().is_some_and(Zero::is_zero) {
        r.remove(0);
    }
    r
}

fn sturm_chain(p: Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), derivative(&p)];
    while chain.last().is_some_and(|q| q.len() > 1) {
        let k = chain.len();
        let r = remainder(&chain[k - 2], &chain[k - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut changes = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

fn sign(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots greater than `x`, for `x` not a root.
fn roots_above(chain: &[Poly], x: &BigRational) -> usize {
    let at_x = sign_changes(chain.iter().map(|p| sign(&eval(p, x))));
    let at_inf = sign_changes(chain.iter().map(|p| sign(&p[0])));
    at_x - at_inf
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// Bounds on `ln((1 + y) / (1 - y)) = 2 atanh(y)` for `0 <= y <= 1/3`, with
/// width at most `eps`.
fn atanh2_bounds(y: &BigRational, eps: &BigRational) -> (BigRational, BigRational) {
    let y2 = y * y;
    let one = BigRational::one();
    let mut sum = BigRational::zero();
    let mut power = y.clone();
    let mut k = 0u64;
    loop {
        let odd = BigRational::from_integer(BigInt::from(2 * k + 1));
        sum += &power * BigRational::from_integer(BigInt::from(2)) / &odd;
        power = &power * &y2;
        k += 1;
        let next_odd = BigRational::from_integer(BigInt::from(2 * k + 1));
        let tail = &power * BigRational::from_integer(BigInt::from(2)) / (next_odd * (&one - &y2));
        if tail <= *eps {
            return (sum.clone(), sum + tail);
        }
    }
}

/// Bounds on `ln x` for rational `x > 0`, width at most `eps`.
fn ln_bounds(x: &BigRational, eps: &BigRational) -> (BigRational, BigRational) {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut m = x.clone();
    let mut k: i64 = 0;
    while m >= two {
        m /= &two;
        k += 1;
    }
    while m < BigRational::one() {
        m *= &two;
        k -= 1;
    }
    // m in [1, 2): y = (m - 1) / (m + 1) in [0, 1/3)
    let one = BigRational::one();
    let y = (&m - &one) / (&m + &one);
    let share = eps / BigRational::from_integer(BigInt::from(2 * (k.unsigned_abs() + 1)));
    let (lm_lo, lm_hi) = atanh2_bounds(&y, &share);
    let (l2_lo, l2_hi) = atanh2_bounds(&BigRational::new(BigInt::one(), BigInt::from(3)), &share);
    let kk = BigRational::from_integer(BigInt::from(k));
    if k >= 0 {
        (&kk * l2_lo + lm_lo, &kk * l2_hi + lm_hi)
    } else {
        (&kk * l2_hi + lm_lo, &kk * l2_lo + lm_hi)
    }
}

fn floor_to_grid(x: &BigRational, p: u64) -> BigRational {
    let scale = pow2(p);
    let n = (x * BigRational::from_integer(scale.clone())).floor().to_integer();
    BigRational::new(n, scale)
}

fn ceil_to_grid(x: &BigRational, p: u64) -> BigRational {
    let scale = pow2(p);
    let n = (x * BigRational::from_integer(scale.clone())).ceil().to_integer();
    BigRational::new(n, scale)
}

/// Rational interval of width at most `tol` containing the log of the
/// Perron root of an irreducible `a`.
pub fn entropy(a: &Matrix, tol: &BigRational) -> Result<Interval> {
    if !tol.is_positive() {
        return Err(Error::domain("entropy tolerance must be positive"));
    }
    if !is_irreducible(a)? {
        return Err(Error::domain("entropy requires an irreducible matrix"));
    }
    let chain = sturm_chain(
        char_poly(a)?
            .into_iter()
            .map(BigRational::from_integer)
            .collect(),
    );
    let max_row: BigInt = (0..a.rows()).map(|i| a.row(i).iter().sum::<BigInt>()).max().unwrap();
    // The Perron root lies in [1, max row sum]. Every point probed below is
    // 2/3 plus a dyadic rational, never an integer, hence never a root of
    // the monic integer characteristic polynomial.
    let offset = BigRational::new(BigInt::from(2), BigInt::from(3));
    let mut lo = offset.clone();
    let mut hi = BigRational::from_integer(max_row) + &offset;
    let two = BigRational::from_integer(BigInt::from(2));
    let half_tol = tol / &two;
    while (&hi - &lo) / &lo > half_tol {
        let mid = (&lo + &hi) / &two;
        if roots_above(&chain, &mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eighth = tol / BigRational::from_integer(BigInt::from(8));
    let mut p = 0u64;
    while BigRational::new(BigInt::one(), pow2(p)) > eighth {
        p += 1;
    }
    let (ln_lo, _) = ln_bounds(&lo, &eighth);
    let (_, ln_hi) = ln_bounds(&hi, &eighth);
    Ok(Interval {
        lo: floor_to_grid(&ln_lo, p),
        hi: ceil_to_grid(&ln_hi, p),
    })
}

/// Outcome of the invariant screen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compatibility {
    /// First invariant that separates the two matrices, if any.
    pub failed: Option<&'static str>,
}

impl Compatibility {
    pub fn is_compatible(&self) -> bool {
        self.failed.is_none()
    }
}

/// Necessary conditions for shift equivalence, checked in the order
/// trace sequence, `det(I - .)`, Bowen-Franks, entropy.
pub fn compatible(a: &Matrix, b: &Matrix) -> Result<Compatibility> {
    let failed = if trace_power_sequence(a, DEFAULT_TRACE_DEPTH)? != trace_power_sequence(b, DEFAULT_TRACE_DEPTH)? {
        Some("trace_sequence")
    } else if det_i_minus_a(a)? != det_i_minus_a(b)? {
        Some("det_i_minus_a")
    } else if bowen_franks(a)? != bowen_franks(b)? {
        Some("bowen_franks")
    } else if entropy(a, &default_entropy_tol())?.is_disjoint(&entropy(b, &default_entropy_tol())?) {
        Some("entropy")
    } else {
        None
    };
    Ok(Compatibility { failed })
}

/// [`compatible`] followed by agreement of characteristic polynomials away
/// from zero, the screen used before witness searches. Returns the name of
/// the first separating invariant.
pub fn screen(a: &Matrix, b: &Matrix) -> Result<Option<&'static str>> {
    if let Some(f) = compatible(a, b)?.failed {
        return Ok(Some(f));
    }
    if char_poly_away_from_zero(a)? != char_poly_away_from_zero(b)? {
        return Ok(Some("char_poly"));
    }
    Ok(None)
}

#[cfg(test)]
fn denominator_is_dyadic(x: &BigRational) -> bool {
    let d = x.denom();
    (d & (d - BigInt::one())).is_zero()
}
