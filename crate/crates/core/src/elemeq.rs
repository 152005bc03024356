//! Elementary equivalence `A = CD`, `B = DC` over the nonnegative integers:
//! verification, a complete bounded search, and enumeration of
//! factorizations for chain search.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactmat::{mat_mul, require_standing, Matrix};
use crate::invariants::screen;

/// A pair `(C, D)` with `A = CD` and `B = DC`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Witness {
    pub c: Matrix,
    pub d: Matrix,
}

impl Witness {
    /// The matrix `CD`.
    pub fn left(&self) -> Result<Matrix> {
        mat_mul(&self.c, &self.d)
    }

    /// The matrix `DC`.
    pub fn right(&self) -> Result<Matrix> {
        mat_mul(&self.d, &self.c)
    }

    pub fn to_json(&self, a: &Matrix, b: &Matrix) -> Value {
        json!({ "A": a, "B": b, "C": &self.c, "D": &self.d })
    }
}

/// Parsed witness file.
#[derive(Clone, Debug, PartialEq, Eq, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    #[serde(rename = "A")]
    pub a: Matrix,
    #[serde(rename = "B")]
    pub b: Matrix,
    #[serde(rename = "C")]
    pub c: Matrix,
    #[serde(rename = "D")]
    pub d: Matrix,
}

/// `cd = a` and `dc = b`. Shapes must fit `a: N x N`, `b: M x M`,
/// `c: N x M`, `d: M x N`.
pub fn verify_elementary(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<bool> {
    a.require_square("verify_elementary")?;
    b.require_square("verify_elementary")?;
    let (n, m) = (a.rows(), b.rows());
    if (c.rows(), c.cols()) != (n, m) || (d.rows(), d.cols()) != (m, n) {
        return Err(Error::shape(
            "verify_elementary",
            format!(
                "expected C {n}x{m} and D {m}x{n}, got C {}x{} and D {}x{}",
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            ),
        ));
    }
    for x in [a, b, c, d] {
        x.require_nonnegative("elementary equivalence input")?;
    }
    Ok(&mat_mul(c, d)? == a && &mat_mul(d, c)? == b)
}

/// Limits on search effort. A node is one tentative entry assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(n: u64) -> Self {
        Budget {
            max_nodes: Some(n),
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Found(Witness),
    /// No witness exists. `screen` names the separating invariant when the
    /// verdict came from the invariant screen rather than the search.
    Infeasible { screen: Option<String> },
    BudgetExhausted { nodes: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    /// In lexicographic order of `(C, D)` flattened row-major.
    pub witnesses: Vec<Witness>,
    /// True when the bounded space was searched to the end (or the limit
    /// was reached); false when the budget ran out first.
    pub complete: bool,
    pub nodes: u64,
    pub screened: Option<String>,
}

/// Returns the lexicographically least witness, or a proof of its absence
/// within the complete bounded space.
pub fn solve_elementary(a: &Matrix, b: &Matrix, budget: &Budget) -> Result<SolveOutcome> {
    let e = enumerate_witnesses(a, b, 1, budget)?;
    Ok(if let Some(w) = e.witnesses.into_iter().next() {
        SolveOutcome::Found(w)
    } else if e.complete {
        SolveOutcome::Infeasible { screen: e.screened }
    } else {
        SolveOutcome::BudgetExhausted { nodes: e.nodes }
    })
}

/// Up to `limit` witnesses, in lexicographic order.
pub fn enumerate_witnesses(a: &Matrix, b: &Matrix, limit: usize, budget: &Budget) -> Result<Enumeration> {
    require_standing(a, "A")?;
    require_standing(b, "B")?;
    require_searchable(a)?;
    require_searchable(b)?;
    if let Some(name) = screen(a, b)? {
        return Ok(Enumeration {
            witnesses: Vec::new(),
            complete: true,
            nodes: 0,
            screened: Some(name.to_string()),
        });
    }
    Ok(search_unscreened(a, Some(b), b.rows(), limit, budget))
}

/// Witness search without validation or screening; used inside chain
/// search where both matrices are already known to be admissible.
pub(crate) fn search_unscreened(a: &Matrix, b: Option<&Matrix>, inner: usize, limit: usize, budget: &Budget) -> Enumeration {
    let mut s = Search::new(a, b, inner, limit, budget);
    let done = limit == 0 || s.fill_c(0);
    Enumeration {
        complete: done || s.found.len() >= limit,
        nodes: s.nodes,
        witnesses: s.found,
        screened: None,
    }
}

/// Factorizations `x = CD` with inner dimension `inner`, `C` without zero
/// rows or columns and `D` likewise, in lexicographic order.
pub fn factorizations(x: &Matrix, inner: usize, limit: usize, budget: &Budget) -> Result<Enumeration> {
    x.require_square("factorizations")?;
    x.require_nonnegative("factorized matrix")?;
    require_searchable(x)?;
    if inner == 0 {
        return Err(Error::shape("factorizations", "inner dimension must be positive"));
    }
    Ok(search_unscreened(x, None, inner, limit, budget))
}

fn to_small(m: &Matrix) -> Vec<Vec<u64>> {
    m.to_rows()
        .into_iter()
        .map(|r| r.iter().map(|x| x.to_u64().expect("entry size checked")).collect())
        .collect()
}

fn require_searchable(m: &Matrix) -> Result<()> {
    if m.entries().iter().any(|x| x.to_u32().is_none()) {
        return Err(Error::domain("entries beyond 2^32 are outside the search range"));
    }
    Ok(())
}

/// Depth-first search over the entries of `C`, then `D`, row-major, each
/// entry tried in increasing order, so solutions appear lexicographically.
struct Search {
    n: usize,
    k: usize,
    a: Vec<Vec<u64>>,
    b: Option<Vec<Vec<u64>>>,
    c: Vec<Vec<u64>>,
    d: Vec<Vec<u64>>,
    c_bound: Vec<Vec<u64>>,
    d_bound: Vec<Vec<u64>>,
    a_row_sum: Vec<u64>,
    a_col_sum: Vec<u64>,
    /// Column sums of `B` (bounds column sums of `C`) and row sums of `B`
    /// (bound row sums of `D`); from `A` when there is no target `B`.
    c_col_cap: Vec<u64>,
    d_row_cap: Vec<u64>,
    /// Running `C D` and `D C`.
    cd: Vec<Vec<u64>>,
    dc: Vec<Vec<u64>>,
    limit: usize,
    found: Vec<Witness>,
    nodes: u64,
    max_nodes: Option<u64>,
    deadline: Option<Instant>,
    out_of_budget: bool,
}

impl Search {
    fn new(a: &Matrix, b: Option<&Matrix>, k: usize, limit: usize, budget: &Budget) -> Search {
        let n = a.rows();
        let a_s = to_small(a);
        let b_s = b.map(to_small);
        let a_row_sum: Vec<u64> = a_s.iter().map(|r| r.iter().sum()).collect();
        let a_col_sum: Vec<u64> = (0..n).map(|j| a_s.iter().map(|r| r[j]).sum()).collect();
        let a_row_max: Vec<u64> = a_s.iter().map(|r| *r.iter().max().unwrap()).collect();
        let a_col_max: Vec<u64> = (0..n).map(|j| a_s.iter().map(|r| r[j]).max().unwrap()).collect();
        // Every row and column of C and D is nonzero, so
        // C(u, v) <= A(u, w) for some w and C(u, v) <= B(x, v) for some x;
        // dually for D.
        let (c_bound, d_bound, c_col_cap, d_row_cap) = match &b_s {
            Some(bm) => {
                let b_row_max: Vec<u64> = bm.iter().map(|r| *r.iter().max().unwrap()).collect();
                let b_col_max: Vec<u64> = (0..k).map(|j| bm.iter().map(|r| r[j]).max().unwrap()).collect();
                let c_bound = (0..n)
                    .map(|u| (0..k).map(|v| a_row_max[u].min(b_col_max[v])).collect())
                    .collect();
                let d_bound = (0..k)
                    .map(|v| (0..n).map(|u| b_row_max[v].min(a_col_max[u])).collect())
                    .collect();
                let b_row_sum = bm.iter().map(|r| r.iter().sum()).collect();
                let b_col_sum = (0..k).map(|j| bm.iter().map(|r| r[j]).sum()).collect();
                (c_bound, d_bound, b_col_sum, b_row_sum)
            }
            None => {
                let c_bound = (0..n).map(|u| vec![a_row_max[u]; k]).collect();
                let d_bound = (0..k).map(|_| a_col_max.clone()).collect();
                let total: u64 = a_row_sum.iter().sum();
                (c_bound, d_bound, vec![total; k], vec![total; k])
            }
        };
        Search {
            n,
            k,
            a: a_s,
            b: b_s,
            c: vec![vec![0; k]; n],
            d: vec![vec![0; n]; k],
            c_bound,
            d_bound,
            a_row_sum,
            a_col_sum,
            c_col_cap,
            d_row_cap,
            cd: vec![vec![0; n]; n],
            dc: vec![vec![0; k]; k],
            limit,
            found: Vec::new(),
            nodes: 0,
            max_nodes: budget.max_nodes,
            deadline: budget.time_limit.map(|t| Instant::now() + t),
            out_of_budget: false,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.max_nodes.is_some_and(|m| self.nodes > m) {
            self.out_of_budget = true;
        }
        if self.nodes % 4096 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.out_of_budget = true;
        }
        !self.out_of_budget
    }

    /// Returns false when the search must stop (limit reached or budget
    /// exhausted); true when the subtree was fully explored.
    fn fill_c(&mut self, pos: usize) -> bool {
        let (n, k) = (self.n, self.k);
        if pos == n * k {
            if (0..k).any(|v| (0..n).all(|u| self.c[u][v] == 0)) {
                return true;
            }
            return self.fill_d(0);
        }
        let (u, v) = (pos / k, pos % k);
        let row_used: u64 = self.c[u][..v].iter().sum();
        let col_used: u64 = (0..u).map(|i| self.c[i][v]).sum();
        let hi = self.c_bound[u][v]
            .min(self.a_row_sum[u] - row_used)
            .min(self.c_col_cap[v] - col_used);
        let last_in_row = v + 1 == k;
        for x in 0..=hi {
            if !self.tick() {
                return false;
            }
            if last_in_row && x == 0 && row_used == 0 {
                continue;
            }
            self.c[u][v] = x;
            if !self.fill_c(pos + 1) {
                self.c[u][v] = 0;
                return false;
            }
        }
        self.c[u][v] = 0;
        true
    }

    fn fill_d(&mut self, pos: usize) -> bool {
        let (n, k) = (self.n, self.k);
        if pos == n * k {
            if (0..n).any(|u| (0..k).all(|v| self.d[v][u] == 0)) {
                return true;
            }
            return self.accept();
        }
        let (v, u) = (pos / n, pos % n);
        let row_used: u64 = self.d[v][..u].iter().sum();
        let col_used: u64 = (0..v).map(|i| self.d[i][u]).sum();
        let hi = self.d_bound[v][u]
            .min(self.d_row_cap[v] - row_used)
            .min(self.a_col_sum[u] - col_used);
        let last_in_row = u + 1 == n;
        let last_row = v + 1 == k;
        for x in 0..=hi {
            if !self.tick() {
                return false;
            }
            if last_in_row && x == 0 && row_used == 0 {
                continue;
            }
            if self.place_d(v, u, x) {
                let ok = (!last_row || self.column_of_cd_complete(u)) && (!last_in_row || self.row_of_dc_complete(v));
                if ok && !self.fill_d(pos + 1) {
                    self.unplace_d(v, u, x);
                    return false;
                }
            }
            self.unplace_d(v, u, x);
        }
        true
    }

    /// Adds `x` at `D(v, u)`, updating running products; false if some
    /// partial product already exceeds its target.
    fn place_d(&mut self, v: usize, u: usize, x: u64) -> bool {
        self.d[v][u] = x;
        if x == 0 {
            return true;
        }
        let mut ok = true;
        for w in 0..self.n {
            self.cd[w][u] += self.c[w][v] * x;
            ok &= self.cd[w][u] <= self.a[w][u];
        }
        for y in 0..self.k {
            self.dc[v][y] += x * self.c[u][y];
            if let Some(b) = &self.b {
                ok &= self.dc[v][y] <= b[v][y];
            }
        }
        ok
    }

    fn unplace_d(&mut self, v: usize, u: usize, x: u64) {
        self.d[v][u] = 0;
        if x == 0 {
            return;
        }
        for w in 0..self.n {
            self.cd[w][u] -= self.c[w][v] * x;
        }
        for y in 0..self.k {
            self.dc[v][y] -= x * self.c[u][y];
        }
    }

    fn column_of_cd_complete(&self, u: usize) -> bool {
        (0..self.n).all(|w| self.cd[w][u] == self.a[w][u])
    }

    fn row_of_dc_complete(&self, v: usize) -> bool {
        match &self.b {
            Some(b) => (0..self.k).all(|y| self.dc[v][y] == b[v][y]),
            None => true,
        }
    }

    fn accept(&mut self) -> bool {
        let to_matrix = |rows: &Vec<Vec<u64>>| {
            Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)))).expect("nonempty")
        };
        self.found.push(Witness {
            c: to_matrix(&self.c),
            d: to_matrix(&self.d),
        });
        self.found.len() < self.limit
    }
}
