//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use ckmorita::ckterm::{CkExpr, Polynomial};
use ckmorita::exactmat::{is_irreducible, is_permutation};
use ckmorita::Matrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub fn m(rows: &[&[i64]]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| r.iter().copied())).unwrap()
}

pub fn from_vecs(rows: &[Vec<i64>]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| r.iter().copied())).unwrap()
}

pub fn to_vecs(x: &Matrix) -> Vec<Vec<i64>> {
    x.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|v| i64::try_from(v).unwrap()).collect())
        .collect()
}

pub fn is_standing(x: &Matrix) -> bool {
    x.is_square() && is_irreducible(x).unwrap_or(false) && !is_permutation(x)
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, max: i64) -> Matrix {
    from_vecs(
        &(0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(0..=max)).collect())
            .collect::<Vec<_>>(),
    )
}

/// A random square matrix satisfying the standing assumptions.
pub fn random_standing(rng: &mut impl Rng, max_size: usize, max: i64) -> Matrix {
    loop {
        let n = rng.gen_range(1..=max_size);
        let x = random_matrix(rng, n, n, max);
        if is_standing(&x) {
            return x;
        }
    }
}

/// All matrices of the given shape with entries in `0..=max`.
pub fn all_matrices(rows: usize, cols: usize, max: i64) -> Vec<Matrix> {
    let cells = rows * cols;
    let base = (max + 1) as usize;
    (0..base.pow(cells as u32))
        .map(|mut code| {
            let mut data = vec![0i64; cells];
            for slot in data.iter_mut().rev() {
                *slot = (code % base) as i64;
                code /= base;
            }
            Matrix::from_rows(data.chunks(cols).map(|r| r.to_vec())).unwrap()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Path-space action.
//
// Generators act on locally constant functions of one-sided infinite
// admissible paths: `S_e f(y) = [y_0 = e] f(shift y)` and
// `S_e^* f(y) = [e y admissible] f(e y)`. Functions are combinations of
// cylinder indicators keyed by their defining word; the empty word is the
// constant function 1.

pub type Func = BTreeMap<Vec<usize>, BigRational>;

pub struct PathAction {
    adj: Vec<Vec<bool>>,
}

fn add_into(f: &mut Func, w: Vec<usize>, c: &BigRational) {
    let slot = f.entry(w).or_insert_with(BigRational::zero);
    *slot += c;
}

impl PathAction {
    pub fn new(presenting: &Matrix) -> Self {
        let n = presenting.rows();
        PathAction {
            adj: (0..n)
                .map(|i| (0..n).map(|j| presenting.get(i, j).is_one()).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn words(&self, length: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..length {
            out = out
                .into_iter()
                .flat_map(|w: Vec<usize>| {
                    let last = w.last().copied();
                    (0..self.len())
                        .filter(move |&e| last.is_none_or(|l| self.adj[l][e]))
                        .map(move |e| {
                            let mut x = w.clone();
                            x.push(e);
                            x
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out
    }

    pub fn successors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&f| self.adj[e][f])
    }

    fn gen(&self, e: usize, f: &Func) -> Func {
        let mut out = Func::new();
        for (w, c) in f {
            if w.first().is_none_or(|&x| self.adj[e][x]) {
                let mut v = vec![e];
                v.extend_from_slice(w);
                add_into(&mut out, v, c);
            }
        }
        out
    }

    fn gen_adj(&self, e: usize, f: &Func) -> Func {
        let mut out = Func::new();
        for (w, c) in f {
            match w.split_first() {
                None => {
                    for g in self.successors(e) {
                        add_into(&mut out, vec![g], c);
                    }
                }
                Some((&x, rest)) if x == e => {
                    if rest.is_empty() {
                        for g in self.successors(e) {
                            add_into(&mut out, vec![g], c);
                        }
                    } else {
                        add_into(&mut out, rest.to_vec(), c);
                    }
                }
                Some(_) => {}
            }
        }
        out
    }

    pub fn apply(&self, e: &CkExpr, f: &Func) -> Func {
        match e {
            CkExpr::Unit => f.clone(),
            CkExpr::Gen(g) => self.gen(*g, f),
            CkExpr::Sum(xs) => {
                let mut out = Func::new();
                for x in xs {
                    for (w, c) in self.apply(x, f) {
                        add_into(&mut out, w, &c);
                    }
                }
                out
            }
            CkExpr::Scale(k, x) => self.apply(x, f).into_iter().map(|(w, c)| (w, c * k)).collect(),
            CkExpr::Product(xs) => xs.iter().rev().fold(f.clone(), |acc, x| self.apply(x, &acc)),
            CkExpr::Adjoint(x) => match &**x {
                CkExpr::Unit => f.clone(),
                CkExpr::Gen(g) => self.gen_adj(*g, f),
                CkExpr::Sum(xs) => self.apply(&CkExpr::Sum(xs.iter().map(adj).collect()), f),
                CkExpr::Scale(k, y) => self.apply(&CkExpr::Scale(k.clone(), Box::new(adj(y))), f),
                CkExpr::Product(xs) => self.apply(&CkExpr::Product(xs.iter().rev().map(adj).collect()), f),
                CkExpr::Adjoint(y) => self.apply(y, f),
            },
        }
    }

    /// The action of a normal form, term by term.
    pub fn apply_polynomial(&self, p: &Polynomial, f: &Func) -> Func {
        let mut out = Func::new();
        for (mono, c) in p.terms() {
            let mut g = f.clone();
            for &e in &mono.nu {
                g = self.gen_adj(e, &g);
            }
            for &e in mono.mu.iter().rev() {
                g = self.gen(e, &g);
            }
            for (w, k) in g {
                add_into(&mut out, w, &(k * c));
            }
        }
        out
    }

    /// Rewrites `f` over cylinders of one common length and drops zeros.
    pub fn canonical(&self, f: &Func) -> Func {
        let depth = f.keys().map(Vec::len).max().unwrap_or(0).max(1);
        let mut out = Func::new();
        for (w, c) in f {
            let mut frontier = vec![w.clone()];
            while frontier[0].len() < depth {
                frontier = frontier
                    .into_iter()
                    .flat_map(|x| {
                        let next: Vec<usize> = match x.last() {
                            Some(&l) => self.successors(l).collect(),
                            None => (0..self.len()).collect(),
                        };
                        next.into_iter().map(move |e| {
                            let mut y = x.clone();
                            y.push(e);
                            y
                        })
                    })
                    .collect();
                if frontier.is_empty() {
                    break;
                }
            }
            for x in frontier {
                add_into(&mut out, x, c);
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn same(&self, f: &Func, g: &Func) -> bool {
        let mut diff = f.clone();
        for (w, c) in g {
            add_into(&mut diff, w.clone(), &-c);
        }
        self.canonical(&diff).is_empty()
    }

    /// Whether two expressions act identically on every cylinder of the
    /// given lengths.
    pub fn agree(&self, x: &CkExpr, y: &CkExpr, lengths: &[usize]) -> bool {
        lengths.iter().all(|&l| {
            self.words(l).into_iter().all(|w| {
                let f = Func::from([(w, BigRational::one())]);
                self.same(&self.apply(x, &f), &self.apply(y, &f))
            })
        })
    }
}

pub fn adj(x: &CkExpr) -> CkExpr {
    CkExpr::Adjoint(Box::new(x.clone()))
}

/// Upper bound on the word lengths an expression can produce.
pub fn expr_span(e: &CkExpr) -> usize {
    match e {
        CkExpr::Unit => 0,
        CkExpr::Gen(_) => 1,
        CkExpr::Sum(xs) => xs.iter().map(expr_span).max().unwrap_or(0),
        CkExpr::Scale(_, x) | CkExpr::Adjoint(x) => expr_span(x),
        CkExpr::Product(xs) => xs.iter().map(expr_span).sum(),
    }
}

// ---------------------------------------------------------------------------
// Naive elementary-equivalence oracle: every (C, D) with entries up to the
// largest entry of A or B, in lexicographic order of (C, D) flattened
// row-major. Any witness fits that bound because C D = A and D C = B with
// no zero rows or columns in either product.

pub fn naive_least_witness(a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let (n, k) = (a.len(), b.len());
    let bound = a.iter().chain(b).flatten().copied().max().unwrap_or(0);
    let cells = 2 * n * k;
    let mut x = vec![0i64; cells];
    loop {
        let c: Vec<Vec<i64>> = (0..n).map(|i| x[i * k..(i + 1) * k].to_vec()).collect();
        let d: Vec<Vec<i64>> = (0..k).map(|i| x[n * k + i * n..n * k + (i + 1) * n].to_vec()).collect();
        if mul(&c, &d) == a && mul(&d, &c) == b {
            return Some((c, d));
        }
        let mut pos = cells;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if x[pos] < bound {
                x[pos] += 1;
                break;
            }
            x[pos] = 0;
        }
    }
}

pub fn mul(x: &[Vec<i64>], y: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = y.len();
    let cols = y.first().map_or(0, Vec::len);
    x.iter()
        .map(|r| (0..cols).map(|j| (0..inner).map(|t| r[t] * y[t][j]).sum()).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Entropy oracle. For irreducible nonnegative A, `lambda > rho(A)` iff every
// leading principal minor of `lambda I - A` is positive.

pub fn det(mut rows: Vec<Vec<BigRational>>) -> BigRational {
    let n = rows.len();
    let mut acc = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            rows.swap(p, col);
            acc = -acc;
        }
        let pivot = rows[col][col].clone();
        acc *= &pivot;
        for r in col + 1..n {
            let f = &rows[r][col] / &pivot;
            for c in col..n {
                let v = &rows[col][c] * &f;
                rows[r][c] -= v;
            }
        }
    }
    acc
}

pub fn spectral_radius_below(a: &Matrix, lambda: &BigRational) -> bool {
    let n = a.rows();
    (1..=n).all(|k| {
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let x = BigRational::from_integer(a.get(i, j).clone());
                        if i == j {
                            lambda - x
                        } else {
                            -x
                        }
                    })
                    .collect()
            })
            .collect();
        det(rows).is_positive()
    })
}

/// Rational bounds `lo <= exp(x) <= hi` for `0 <= x <= 4`.
pub fn exp_bounds(x: &BigRational) -> (BigRational, BigRational) {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let terms = 60;
    for k in 1..=terms {
        term = term * x / BigRational::from_integer(BigInt::from(k));
        sum += &term;
    }
    // Lagrange remainder: the next term times e^x < 3^5
    let tail = term * x / BigRational::from_integer(BigInt::from(terms + 1)) * BigRational::from_integer(BigInt::from(243));
    let hi = &sum + tail;
    (sum, hi)
}

/// True when `[lo, hi]` provably contains `log rho(A)`.
pub fn brackets_log_radius(a: &Matrix, lo: &BigRational, hi: &BigRational) -> bool {
    let (_, exp_lo_hi) = exp_bounds(lo);
    let (exp_hi_lo, _) = exp_bounds(hi);
    // rho >= exp(lo): rho is not below an upper bound of exp(lo)
    let lower_ok = !spectral_radius_below(a, &exp_lo_hi);
    // rho <= exp(hi): rho is below a lower bound of exp(hi)
    let upper_ok = spectral_radius_below(a, &exp_hi_lo);
    lower_ok && upper_ok
}

pub fn abs_diff(x: &BigRational, y: &BigRational) -> BigRational {
    (x - y).abs()
}

// ---------------------------------------------------------------------------
// Random Cuntz-Krieger expressions.

/// A random 0-1 presenting matrix of size at most `max_n` that is
/// irreducible and not a permutation matrix.
pub fn random_presenting(rng: &mut impl Rng, max_n: usize) -> Matrix {
    loop {
        let n = rng.gen_range(1..=max_n);
        let x = random_matrix(rng, n, n, 1);
        if is_standing(&x) {
            return x;
        }
    }
}

pub fn random_walk(rng: &mut impl Rng, pa: &PathAction, len: usize) -> Vec<usize> {
    let mut w: Vec<usize> = Vec::with_capacity(len);
    while w.len() < len {
        let choices: Vec<usize> = match w.last() {
            Some(&l) => pa.successors(l).collect(),
            None => (0..pa.len()).collect(),
        };
        w.push(choices[rng.gen_range(0..choices.len())]);
    }
    w
}

fn word_expr(w: &[usize]) -> CkExpr {
    match w {
        [] => CkExpr::Unit,
        [e] => CkExpr::Gen(*e),
        _ => CkExpr::Product(w.iter().map(|&e| CkExpr::Gen(e)).collect()),
    }
}

/// `S_mu S_nu^*` as an expression.
pub fn monomial_expr(mu: &[usize], nu: &[usize]) -> CkExpr {
    CkExpr::Product(vec![word_expr(mu), adj(&word_expr(nu))])
}

pub fn random_monomial(rng: &mut impl Rng, pa: &PathAction, max_len: usize) -> CkExpr {
    let (p, q) = (rng.gen_range(0..=max_len), rng.gen_range(0..=max_len));
    let mu = random_walk(rng, pa, p);
    let nu = random_walk(rng, pa, q);
    monomial_expr(&mu, &nu)
}

fn small_coeff(rng: &mut impl Rng) -> BigRational {
    let num = rng.gen_range(-3i64..=3);
    let num = if num == 0 { 1 } else { num };
    ratio(num, rng.gen_range(1..=2))
}

/// A sum of up to three scaled monomials with word lengths up to `max_len`.
pub fn random_expr(rng: &mut impl Rng, pa: &PathAction, max_len: usize) -> CkExpr {
    let terms = rng.gen_range(1..=3);
    CkExpr::Sum(
        (0..terms)
            .map(|_| CkExpr::Scale(small_coeff(rng), Box::new(random_monomial(rng, pa, max_len))))
            .collect(),
    )
}

/// An expression equal to zero: one of the defining relations, wrapped
/// between short monomials.
pub fn random_relation(rng: &mut impl Rng, pa: &PathAction) -> CkExpr {
    let core = if rng.gen_bool(0.3) {
        let sum = (0..pa.len()).map(|e| monomial_expr(&[e], &[e])).collect();
        CkExpr::Sum(vec![CkExpr::Unit, CkExpr::Scale(ratio(-1, 1), Box::new(CkExpr::Sum(sum)))])
    } else {
        let e = rng.gen_range(0..pa.len());
        let sum = pa.successors(e).map(|f| monomial_expr(&[f], &[f])).collect();
        CkExpr::Sum(vec![
            CkExpr::Product(vec![adj(&CkExpr::Gen(e)), CkExpr::Gen(e)]),
            CkExpr::Scale(ratio(-1, 1), Box::new(CkExpr::Sum(sum))),
        ])
    };
    CkExpr::Product(vec![random_monomial(rng, pa, 1), core, random_monomial(rng, pa, 1)])
}

/// A second expression that is equal to `p` about half of the time.
pub fn companion(rng: &mut impl Rng, pa: &PathAction, p: &CkExpr, max_len: usize) -> CkExpr {
    let extra = if rng.gen_bool(0.5) {
        random_relation(rng, pa)
    } else {
        random_monomial(rng, pa, max_len)
    };
    CkExpr::Sum(vec![p.clone(), CkExpr::Scale(small_coeff(rng), Box::new(extra))])
}

/// Longest word in either normal form, plus one.
pub fn probe_length(p: &Polynomial, q: &Polynomial) -> usize {
    p.terms().chain(q.terms()).map(|(m, _)| m.mu.len().max(m.nu.len())).max().unwrap_or(0) + 1
}
