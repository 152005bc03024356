//! Normal forms and equality for the dense *-subalgebra of a Cuntz-Krieger
//! algebra presented by a 0-1 matrix `M`.
//!
//! Elements are finite rational combinations of monomials `S_mu S_nu^*`
//! over admissible words. The generators satisfy
//!
//! ```text
//! sum_e S_e S_e^* = 1,        S_e^* S_e = sum_f M(e, f) S_f S_f^*
//! ```
//!
//! so any monomial can be refined one letter deeper:
//! `S_mu S_nu^* = sum_b S_{mu b} S_{nu b}^*` over the edges `b` that may
//! follow both `last(mu)` and `last(nu)`. A polynomial is kept normalized:
//! inside each degree class `|mu| - |nu|` every monomial is refined to the
//! largest bidegree present. Monomials of one fixed bidegree are linearly
//! independent, so two polynomials are equal exactly when their difference
//! normalizes to nothing.

mod parse;

pub use parse::{evaluate, parse_ck_expr, CkExpr};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmat::Matrix;

/// A 0-1 presenting matrix together with generator names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    adj: Vec<Vec<bool>>,
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Presentation {
    /// Requires a square 0-1 matrix without zero rows or columns; otherwise
    /// the unit relation cannot hold.
    pub fn new(m: &Matrix, names: Vec<String>) -> Result<Arc<Presentation>> {
        m.require_square("Presentation::new")?;
        let n = m.rows();
        if names.len() != n {
            return Err(Error::shape(
                "Presentation::new",
                format!("{} names for {n} generators", names.len()),
            ));
        }
        let mut adj = vec![vec![false; n]; n];
        for (i, row) in adj.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let x = m.get(i, j);
                if x.is_one() {
                    *cell = true;
                } else if !x.is_zero() {
                    return Err(Error::domain(format!(
                        "presenting matrix must be 0-1, found {x} at ({i}, {j})"
                    )));
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| !adj[i].iter().any(|&b| b)) {
            return Err(Error::domain(format!(
                "presenting matrix has a zero row at {} ({})",
                i, names[i]
            )));
        }
        if let Some(j) = (0..n).find(|&j| !adj.iter().any(|row| row[j])) {
            return Err(Error::domain(format!(
                "presenting matrix has a zero column at {} ({})",
                j, names[j]
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::domain(format!("duplicate generator name `{name}`")));
            }
        }
        Ok(Arc::new(Presentation { adj, names, index }))
    }

    /// Generators named `a1, a2, ...`.
    pub fn with_default_names(m: &Matrix) -> Result<Arc<Presentation>> {
        let names = (1..=m.rows()).map(|i| format!("a{i}")).collect();
        Presentation::new(m, names)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn allows(&self, e: usize, f: usize) -> bool {
        self.adj[e][f]
    }

    pub fn matrix(&self) -> Matrix {
        let n = self.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if self.adj[i][j] {
                    m.set(i, j, 1);
                }
            }
        }
        m
    }

    pub fn is_admissible(&self, w: &[usize]) -> bool {
        w.iter().all(|&e| e < self.len()) && w.windows(2).all(|p| self.adj[p[0]][p[1]])
    }

    /// Whether `S_mu S_nu^*` is a nonzero element.
    pub fn monomial_is_nonzero(&self, mu: &[usize], nu: &[usize]) -> bool {
        if !self.is_admissible(mu) || !self.is_admissible(nu) {
            return false;
        }
        match (mu.last(), nu.last()) {
            (Some(&x), Some(&y)) => (0..self.len()).any(|b| self.adj[x][b] && self.adj[y][b]),
            _ => true,
        }
    }

    /// Edges that may follow the last letters of both words (any edge when
    /// a word is empty).
    fn continuations<'a>(&'a self, mu: &'a [usize], nu: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        (0..self.len()).filter(move |&b| {
            mu.last().map_or(true, |&x| self.adj[x][b]) && nu.last().map_or(true, |&y| self.adj[y][b])
        })
    }
}

fn same_presentation(a: &Arc<Presentation>, b: &Arc<Presentation>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `S_mu S_nu^*`; both words empty is the unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub mu: Vec<usize>,
    pub nu: Vec<usize>,
}

impl Monomial {
    pub fn new(mu: Vec<usize>, nu: Vec<usize>) -> Self {
        Monomial { mu, nu }
    }

    pub fn unit() -> Self {
        Monomial::new(Vec::new(), Vec::new())
    }

    pub fn degree(&self) -> isize {
        self.mu.len() as isize - self.nu.len() as isize
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.mu.len(), self.nu.len())
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial::new(self.nu.clone(), self.mu.clone())
    }
}

type Terms = BTreeMap<Monomial, BigRational>;

#[derive(Clone)]
pub struct Polynomial {
    pres: Arc<Presentation>,
    terms: Terms,
}

impl Polynomial {
    pub fn zero(pres: &Arc<Presentation>) -> Self {
        Polynomial {
            pres: pres.clone(),
            terms: Terms::new(),
        }
    }

    pub fn one(pres: &Arc<Presentation>) -> Self {
        Polynomial::scalar(pres, BigRational::one())
    }

    pub fn scalar(pres: &Arc<Presentation>, c: BigRational) -> Self {
        let mut p = Polynomial::zero(pres);
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(), c);
        }
        p
    }

    pub fn generator(pres: &Arc<Presentation>, e: usize) -> Self {
        Polynomial::word(pres, &[e], &[])
    }

    /// `S_mu S_nu^*`, or zero when that element vanishes.
    pub fn word(pres: &Arc<Presentation>, mu: &[usize], nu: &[usize]) -> Self {
        let mut p = Polynomial::zero(pres);
        if pres.monomial_is_nonzero(mu, nu) {
            p.terms
                .insert(Monomial::new(mu.to_vec(), nu.to_vec()), BigRational::one());
        }
        p
    }

    /// Range projection `S_e S_e^*`.
    pub fn range_projection(pres: &Arc<Presentation>, e: usize) -> Self {
        Polynomial::word(pres, &[e], &[e])
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.pres
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact: normal forms of zero are empty.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word length appearing in any monomial.
    pub fn max_word_len(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.mu.len().max(m.nu.len()))
            .max()
            .unwrap_or(0)
    }

    fn check_same(&self, other: &Polynomial) -> Result<()> {
        if same_presentation(&self.pres, &other.pres) {
            Ok(())
        } else {
            Err(Error::PresentationMismatch)
        }
    }

    fn from_terms(pres: &Arc<Presentation>, terms: Terms) -> Self {
        Polynomial {
            pres: pres.clone(),
            terms: normalize(pres, terms),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(BigRational::zero) += c;
        }
        Ok(Polynomial::from_terms(&self.pres, terms))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.pres);
        }
        Polynomial {
            pres: self.pres.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut terms = Terms::new();
        for (x, cx) in &self.terms {
            for (y, cy) in &other.terms {
                let coeff = cx * cy;
                for m in monomial_product(&self.pres, x, y) {
                    *terms.entry(m).or_insert_with(BigRational::zero) += &coeff;
                }
            }
        }
        Ok(Polynomial::from_terms(&self.pres, terms))
    }

    /// `(S_mu S_nu^*)^* = S_nu S_mu^*`; rational coefficients are self-conjugate.
    pub fn adjoint(&self) -> Polynomial {
        Polynomial {
            pres: self.pres.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.adjoint(), c.clone()))
                .collect(),
        }
    }

    pub fn is_equal(&self, other: &Polynomial) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Image under the *-homomorphism sending generator `e` to `images[e]`
    /// and the unit to `unit`.
    pub fn substitute(&self, images: &[Polynomial], unit: &Polynomial) -> Result<Polynomial> {
        if images.len() != self.pres.len() {
            return Err(Error::shape(
                "substitute",
                format!("{} images for {} generators", images.len(), self.pres.len()),
            ));
        }
        for img in images {
            unit.check_same(img)?;
        }
        let target = unit.presentation();
        let mut acc = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let term = if m.mu.is_empty() && m.nu.is_empty() {
                unit.clone()
            } else {
                let mut left = Polynomial::one(target);
                for &e in &m.mu {
                    left = left.mul(&images[e])?;
                }
                let mut right = Polynomial::one(target);
                for &e in &m.nu {
                    right = right.mul(&images[e])?;
                }
                left.mul(&right.adjoint())?
            };
            acc = acc.add(&term.scale(c))?;
        }
        Ok(acc)
    }

    /// Terms with every complete refinement family merged back into its
    /// parent; equal as an element, shorter to print.
    pub fn compact_terms(&self) -> Vec<(Monomial, BigRational)> {
        let mut terms = self.terms.clone();
        loop {
            let mut changed = false;
            let parents: Vec<Monomial> = terms
                .keys()
                .filter(|m| !m.mu.is_empty() && !m.nu.is_empty())
                .map(|m| Monomial::new(m.mu[..m.mu.len() - 1].to_vec(), m.nu[..m.nu.len() - 1].to_vec()))
                .collect();
            for parent in parents {
                let children: Vec<Monomial> = self
                    .pres
                    .continuations(&parent.mu, &parent.nu)
                    .map(|b| {
                        let mut mu = parent.mu.clone();
                        mu.push(b);
                        let mut nu = parent.nu.clone();
                        nu.push(b);
                        Monomial::new(mu, nu)
                    })
                    .collect();
                let Some(c) = children.first().and_then(|m| terms.get(m)).cloned() else {
                    continue;
                };
                if children.iter().all(|m| terms.get(m) == Some(&c))
                    && !terms.contains_key(&parent)
                {
                    for m in &children {
                        terms.remove(m);
                    }
                    terms.insert(parent, c);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        terms.into_iter().collect()
    }
}

impl PartialEq for Polynomial {
    /// Algebraic equality; polynomials over different presentations are
    /// never equal.
    fn eq(&self, other: &Self) -> bool {
        self.is_equal(other).unwrap_or(false)
    }
}

/// Product of two monomials as a sum of monomials with coefficient 1.
fn monomial_product(pres: &Presentation, x: &Monomial, y: &Monomial) -> Vec<Monomial> {
    let (mu, nu) = (&x.mu, &x.nu);
    let (alpha, beta) = (&y.mu, &y.nu);
    let mut out = Vec::new();
    if alpha.len() >= nu.len() && alpha.starts_with(nu) {
        let gamma = &alpha[nu.len()..];
        if let Some(&g0) = gamma.first() {
            // S_nu^* S_{nu gamma} = S_gamma
            if nu.last().map_or(true, |&l| pres.allows(l, g0)) {
                let mut w = mu.clone();
                w.extend_from_slice(gamma);
                push_nonzero(pres, &mut out, w, beta.clone());
            }
        } else if let Some(&l) = nu.last() {
            // S_nu^* S_nu = S_l^* S_l = sum_b M(l, b) S_b S_b^*
            for b in pres.continuations(mu, beta).filter(|&b| pres.allows(l, b)) {
                let mut w = mu.clone();
                w.push(b);
                let mut v = beta.clone();
                v.push(b);
                out.push(Monomial::new(w, v));
            }
        } else {
            push_nonzero(pres, &mut out, mu.clone(), beta.clone());
        }
    } else if nu.len() > alpha.len() && nu.starts_with(alpha) {
        // S_nu^* S_alpha = (S_alpha^* S_{alpha gamma})^* = S_gamma^*
        let gamma = &nu[alpha.len()..];
        let g0 = gamma[0];
        if alpha.last().map_or(true, |&l| pres.allows(l, g0)) {
            let mut v = beta.clone();
            v.extend_from_slice(gamma);
            push_nonzero(pres, &mut out, mu.clone(), v);
        }
    }
    out
}

fn push_nonzero(pres: &Presentation, out: &mut Vec<Monomial>, mu: Vec<usize>, nu: Vec<usize>) {
    if pres.monomial_is_nonzero(&mu, &nu) {
        out.push(Monomial::new(mu, nu));
    }
}

/// Refines each degree class to its largest bidegree and drops zeros.
fn normalize(pres: &Presentation, terms: Terms) -> Terms {
    let mut target: HashMap<isize, usize> = HashMap::new();
    for (m, c) in &terms {
        if !c.is_zero() {
            let t = target.entry(m.degree()).or_insert(0);
            *t = (*t).max(m.mu.len());
        }
    }
    let mut out = Terms::new();
    for (m, c) in terms {
        if c.is_zero() {
            continue;
        }
        let steps = target[&m.degree()] - m.mu.len();
        refine_into(pres, m.mu, m.nu, &c, steps, &mut out);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn refine_into(pres: &Presentation, mu: Vec<usize>, nu: Vec<usize>, c: &BigRational, steps: usize, out: &mut Terms) {
    if steps == 0 {
        *out.entry(Monomial::new(mu, nu)).or_insert_with(BigRational::zero) += c;
        return;
    }
    let next: Vec<usize> = pres.continuations(&mu, &nu).collect();
    for b in next {
        let mut m2 = mu.clone();
        m2.push(b);
        let mut n2 = nu.clone();
        n2.push(b);
        refine_into(pres, m2, n2, c, steps - 1, out);
    }
}

pub fn is_equal(p: &Polynomial, q: &Polynomial) -> Result<bool> {
    p.is_equal(q)
}

pub fn adjoint(p: &Polynomial) -> Polynomial {
    p.adjoint()
}

fn fmt_monomial(pres: &Presentation, m: &Monomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let word = |w: &[usize]| w.iter().map(|&e| pres.name(e)).collect::<Vec<_>>().join(" ");
    match (m.mu.is_empty(), m.nu.is_empty()) {
        (true, true) => write!(f, "1"),
        (false, true) => write!(f, "S({})", word(&m.mu)),
        (true, false) => write!(f, "S({})*", word(&m.nu)),
        (false, false) => write!(f, "S({}) S({})*", word(&m.mu), word(&m.nu)),
    }
}

/// Printed in the expression grammar, compacted; re-parses to an equal
/// element.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.compact_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, false) => {}
                (0, true) => write!(f, "-")?,
                (_, false) => write!(f, " + ")?,
                (_, true) => write!(f, " - ")?,
            }
            let a = c.abs();
            let unit = m.mu.is_empty() && m.nu.is_empty();
            if unit {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a} ")?;
                }
                fmt_monomial(&self.pres, m, f)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}) ")?;
            fmt_monomial(&self.pres, m, f)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
