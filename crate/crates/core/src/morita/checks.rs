//! The thirteen certificate checks. Each is independent; a failure lists
//! the offending indices and, for symbolic identities, both normal forms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};

use super::model::{left_inner, right_inner, tensor_pair, Family, Model};
use super::reconstruct::{counting_sets_c, counting_sets_d};
use super::MoritaCertificate;
use crate::ckterm::Polynomial;
use crate::exactmat::{mat_mul, Matrix};

pub const CHECK_NAMES: [&str; 13] = [
    "unit_partition",
    "basis_relations",
    "finitely_related_pairing",
    "conjugate_basis_relations",
    "basis_identification",
    "source_projections",
    "orthogonality_from_zero_entries",
    "unmatched_pairs_vanish",
    "transition_matrices_transported",
    "unique_lifts",
    "triple_products",
    "endpoint_consistency",
    "inner_product_transport",
];

const MAX_DETAILS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// First few failures.
    pub details: Vec<String>,
    /// Total number of failures, including those not listed.
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "id": c.id,
                "name": c.name,
                "status": if c.passed { "pass" } else { "fail" },
                "failures": c.failures,
                "details": c.details,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "[{status}] {:>2} {}", c.id, c.name)?;
            for d in &c.details {
                writeln!(f, "        {d}")?;
            }
            if c.failures > c.details.len() {
                writeln!(f, "        ... {} more", c.failures - c.details.len())?;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Rec {
    details: Vec<String>,
    failures: usize,
}

impl Rec {
    fn fail(&mut self, msg: impl FnOnce() -> String) {
        self.failures += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(msg());
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg);
        }
    }

    fn same(&mut self, label: impl FnOnce() -> String, lhs: &Polynomial, rhs: &Polynomial) {
        if !lhs.is_equal(rhs).unwrap_or(false) {
            self.fail(|| format!("{}: `{lhs}` != `{rhs}`", label()));
        }
    }

    fn bit(&mut self, what: &str, i: &str, j: &str, b: Option<bool>) -> Option<bool> {
        if b.is_none() {
            self.fail(|| format!("{what}({i}, {j}) is missing or not 0-1"));
        }
        b
    }
}

/// Runs all checks. Never fails: structural problems become failed checks.
pub fn verify_certificate(cert: &MoritaCertificate) -> CheckReport {
    let model = Model::new(cert);
    let runners: [fn(&MoritaCertificate, &Model, &mut Rec); 13] = [
        unit_partition,
        basis_relations,
        finitely_related_pairing,
        conjugate_basis_relations,
        basis_identification,
        source_projections,
        orthogonality_from_zero_entries,
        unmatched_pairs_vanish,
        transition_matrices_transported,
        unique_lifts,
        triple_products,
        endpoint_consistency,
        inner_product_transport,
    ];
    let checks = runners
        .iter()
        .enumerate()
        .map(|(i, run)| {
            let mut rec = Rec::default();
            match &model {
                Ok(m) => run(cert, m, &mut rec),
                Err(e) => rec.fail(|| format!("certificate structure unusable: {e}")),
            }
            CheckResult {
                id: i + 1,
                name: CHECK_NAMES[i],
                passed: rec.failures == 0,
                details: rec.details,
                failures: rec.failures,
            }
        })
        .collect();
    CheckReport { checks }
}

fn sum(m: &Model, terms: impl IntoIterator<Item = Polynomial>) -> Polynomial {
    terms
        .into_iter()
        .fold(m.zero(), |acc, t| acc.add(&t).expect("same presentation"))
}

fn mul(x: &Polynomial, y: &Polynomial) -> Polynomial {
    x.mul(y).expect("same presentation")
}

fn scaled(p: &Polynomial, bit: bool) -> Polynomial {
    if bit {
        p.clone()
    } else {
        Polynomial::zero(p.presentation())
    }
}

/// `sum_c S_c S_c^* + sum_d S_d S_d^* = 1`, with `E_C`, `E_D` named as
/// the edges of `Z` leaving each side.
fn unit_partition(cert: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let want_c: Vec<&str> = (0..m.ec.len()).map(|k| m.c_name(k)).collect();
    let want_d: Vec<&str> = (0..m.ed.len()).map(|l| m.d_name(l)).collect();
    r.expect(cert.e_c == want_c, || format!("E_C is {:?}, edges of Z give {want_c:?}", cert.e_c));
    r.expect(cert.e_d == want_d, || format!("E_D is {:?}, edges of Z give {want_d:?}", cert.e_d));
    if let Some(recorded) = &cert.z_edges {
        let actual: Vec<(String, usize, usize)> = m
            .z_graph
            .edges()
            .iter()
            .map(|e| (m.names[e.id].clone(), e.source, e.target))
            .collect();
        let listed: Vec<(String, usize, usize)> = recorded.iter().map(|e| (e.id.clone(), e.s, e.t)).collect();
        r.expect(listed == actual, || "Z_edges does not list the edges of Z".to_string());
    }
    let total = m.p_a().add(&m.p_b()).expect("same presentation");
    r.same(|| "sum of range projections".into(), &total, &m.one());
}

/// `S_c^* S_c = sum_d C~(c, d) S_d S_d^*` and
/// `S_d^* S_d = sum_c D~(d, c) S_c S_c^*`.
fn basis_relations(cert: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let (nc, nd) = (m.ec.len(), m.ed.len());
    r.expect((cert.c_tilde.rows(), cert.c_tilde.cols()) == (nc, nd), || {
        format!("C_tilde is {}x{}, expected {nc}x{nd}", cert.c_tilde.rows(), cert.c_tilde.cols())
    });
    r.expect((cert.d_tilde.rows(), cert.d_tilde.cols()) == (nd, nc), || {
        format!("D_tilde is {}x{}, expected {nd}x{nc}", cert.d_tilde.rows(), cert.d_tilde.cols())
    });
    for k in 0..nc {
        let mut terms = Vec::new();
        for l in 0..nd {
            if r.bit("C_tilde", m.c_name(k), m.d_name(l), m.ct[k][l]) == Some(true) {
                terms.push(left_inner(&m.sd(l), &m.sd(l)));
            }
        }
        let sc = m.sc(k);
        r.same(|| format!("S_{0}^* S_{0}", m.c_name(k)), &right_inner(&sc, &sc), &sum(m, terms));
    }
    for l in 0..nd {
        let mut terms = Vec::new();
        for k in 0..nc {
            if r.bit("D_tilde", m.d_name(l), m.c_name(k), m.dt[l][k]) == Some(true) {
                terms.push(left_inner(&m.sc(k), &m.sc(k)));
            }
        }
        let sd = m.sd(l);
        r.same(|| format!("S_{0}^* S_{0}", m.d_name(l)), &right_inner(&sd, &sd), &sum(m, terms));
    }
}

/// `<<eta_c|eta_c>_B xi_d | xi_d>_A = C~(c, d) <xi_d|xi_d>_A` and the
/// mirror identity with `D~`.
fn finitely_related_pairing(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    for k in 0..m.ec.len() {
        let eta = m.sc(k);
        let eta_eta = right_inner(&eta, &eta);
        for l in 0..m.ed.len() {
            let xi = m.sd(l);
            let xi_xi = right_inner(&xi, &xi);
            let Some(bit) = r.bit("C_tilde", m.c_name(k), m.d_name(l), m.ct[k][l]) else {
                continue;
            };
            let lhs = right_inner(&mul(&eta_eta, &xi), &xi);
            r.same(|| format!("pairing ({}, {})", m.c_name(k), m.d_name(l)), &lhs, &scaled(&xi_xi, bit));
            let Some(bit) = r.bit("D_tilde", m.d_name(l), m.c_name(k), m.dt[l][k]) else {
                continue;
            };
            let lhs = right_inner(&mul(&xi_xi, &eta), &eta);
            r.same(|| format!("pairing ({}, {})", m.d_name(l), m.c_name(k)), &lhs, &scaled(&eta_eta, bit));
        }
    }
}

/// The same data read through the left basis `zeta_d = S_d^*` of the
/// first bimodule: both diagonal relations and both product relations.
fn conjugate_basis_relations(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let zeta: Vec<Polynomial> = (0..m.ed.len()).map(|l| m.sd(l).adjoint()).collect();
    for k in 0..m.ec.len() {
        let eta = m.sc(k);
        let mut terms = Vec::new();
        for (l, z) in zeta.iter().enumerate() {
            if m.ct[k][l] == Some(true) {
                terms.push(right_inner(z, z));
            }
        }
        r.same(|| format!("<eta_{0}|eta_{0}>_B", m.c_name(k)), &right_inner(&eta, &eta), &sum(m, terms));
    }
    for (l, z) in zeta.iter().enumerate() {
        let mut terms = Vec::new();
        for k in 0..m.ec.len() {
            if m.dt[l][k] == Some(true) {
                terms.push(left_inner(&m.sc(k), &m.sc(k)));
            }
        }
        r.same(|| format!("_A<zeta_{0}|zeta_{0}>", m.d_name(l)), &left_inner(z, z), &sum(m, terms));
    }
    for k in 0..m.ec.len() {
        let eta = m.sc(k);
        for (l, z) in zeta.iter().enumerate() {
            if let Some(bit) = r.bit("C_tilde", m.c_name(k), m.d_name(l), m.ct[k][l]) {
                let lhs = mul(&left_inner(z, &eta), &left_inner(&eta, z));
                r.same(|| format!("zeta-eta ({}, {})", m.c_name(k), m.d_name(l)), &lhs, &scaled(&left_inner(z, z), bit));
            }
            if let Some(bit) = r.bit("D_tilde", m.d_name(l), m.c_name(k), m.dt[l][k]) {
                let lhs = mul(&right_inner(&eta, z), &right_inner(z, &eta));
                r.same(|| format!("eta-zeta ({}, {})", m.c_name(k), m.d_name(l)), &lhs, &scaled(&right_inner(&eta, &eta), bit));
            }
        }
    }
}

fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k) = (a.rows(), b.rows());
    let mut out = Matrix::zeros(n + k, n + k);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, a.get(i, j).clone());
        }
    }
    for i in 0..k {
        for j in 0..k {
            out.set(n + i, n + j, b.get(i, j).clone());
        }
    }
    out
}

/// `Z` is the block matrix of `C`, `D` with `Z^2 = diag(A, B)`, and each
/// matching is a bijection onto the admissible pairs with matching
/// endpoints.
fn basis_identification(cert: &MoritaCertificate, m: &Model, r: &mut Rec) {
    match Matrix::off_diagonal_blocks(&cert.c, &cert.d) {
        Ok(z) => r.expect(z == cert.z, || "Z is not [[0, C], [D, 0]]".into()),
        Err(e) => r.fail(|| format!("C and D do not form a block matrix: {e}")),
    }
    match mat_mul(&cert.z, &cert.z) {
        Ok(z2) => r.expect(z2 == block_diag(&cert.a, &cert.b), || "Z^2 is not diag(A, B)".into()),
        Err(e) => r.fail(|| e.to_string()),
    }
    let zg = &m.z_graph;
    let n = m.n;

    let known: BTreeSet<String> = m.ga.names().into_iter().collect();
    for p in cert.phi_a.iter().filter(|p| !known.contains(&p.edge)) {
        r.fail(|| format!("phi_A maps `{}`, which is not an edge of A", p.edge));
    }
    let mut seen = HashMap::new();
    for (i, p) in m.phi_a.iter().enumerate() {
        let name = m.ga.name(i);
        let Some((k, l)) = *p else {
            r.fail(|| format!("{name}: no valid pair in phi_A"));
            continue;
        };
        let (c, d) = (m.ec[k], m.ed[l]);
        r.expect(!m.word(&[c, d]).is_zero(), || {
            format!("{name}: S_{} S_{} = 0", m.c_name(k), m.d_name(l))
        });
        r.expect(zg.source(c) == m.ga.source(i) && zg.target(d) == m.ga.target(i), || {
            format!("{name}: endpoints of ({}, {}) differ from those of {name}", m.c_name(k), m.d_name(l))
        });
        if let Some(prev) = seen.insert((k, l), i) {
            r.fail(|| format!("{} and {name} share the pair ({}, {})", m.ga.name(prev), m.c_name(k), m.d_name(l)));
        }
    }
    let admissible_a = m.ec.iter().flat_map(|&c| m.ed.iter().filter(move |&&d| zg.target(c) == zg.source(d))).count();
    r.expect(admissible_a == m.ga.edge_count(), || {
        format!("{} admissible (c, d) pairs for {} edges of A", admissible_a, m.ga.edge_count())
    });

    let known: BTreeSet<String> = m.gb.names().into_iter().collect();
    for p in cert.phi_b.iter().filter(|p| !known.contains(&p.edge)) {
        r.fail(|| format!("phi_B maps `{}`, which is not an edge of B", p.edge));
    }
    let mut seen = HashMap::new();
    for (i, p) in m.phi_b.iter().enumerate() {
        let name = m.gb.name(i);
        let Some((l, k)) = *p else {
            r.fail(|| format!("{name}: no valid pair in phi_B"));
            continue;
        };
        let (d, c) = (m.ed[l], m.ec[k]);
        r.expect(!m.word(&[d, c]).is_zero(), || {
            format!("{name}: S_{} S_{} = 0", m.d_name(l), m.c_name(k))
        });
        r.expect(zg.source(d) == n + m.gb.source(i) && zg.target(c) == n + m.gb.target(i), || {
            format!("{name}: endpoints of ({}, {}) differ from those of {name}", m.d_name(l), m.c_name(k))
        });
        if let Some(prev) = seen.insert((l, k), i) {
            r.fail(|| format!("{} and {name} share the pair ({}, {})", m.gb.name(prev), m.d_name(l), m.c_name(k)));
        }
    }
    let admissible_b = m.ed.iter().flat_map(|&d| m.ec.iter().filter(move |&&c| zg.target(d) == zg.source(c))).count();
    r.expect(admissible_b == m.gb.edge_count(), || {
        format!("{} admissible (d, c) pairs for {} edges of B", admissible_b, m.gb.edge_count())
    });
}

fn require_images(r: &mut Rec, images: Option<Vec<Polynomial>>, side: &str) -> Option<Vec<Polynomial>> {
    if images.is_none() {
        r.fail(|| format!("matching for {side} is incomplete"));
    }
    images
}

/// The image of `S_a^* S_a` is `S_{d(a)}^* S_{d(a)}` and
/// `C~(c(a), d(a)) = 1`; likewise for edges of `B`.
fn source_projections(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let p_a = m.p_a();
    let p_b = m.p_b();
    match (&m.pres_a, require_images(r, m.images_a(), "A")) {
        (Some(pa), Some(images)) => {
            for (i, &(k, l)) in m.phi_a.iter().flatten().enumerate() {
                let s = Polynomial::generator(pa, i);
                let image = right_inner(&s, &s).substitute(&images, &p_a).expect("images over Z^G");
                let sd = m.sd(l);
                r.same(|| format!("{}: image of S^* S", m.ga.name(i)), &image, &right_inner(&sd, &sd));
                r.expect(m.ct[k][l] == Some(true), || format!("{}: C_tilde(c(a), d(a)) != 1", m.ga.name(i)));
            }
        }
        (None, _) => r.fail(|| "A^G does not present an algebra".into()),
        _ => {}
    }
    match (&m.pres_b, require_images(r, m.images_b(), "B")) {
        (Some(pb), Some(images)) => {
            for (i, &(l, k)) in m.phi_b.iter().flatten().enumerate() {
                let s = Polynomial::generator(pb, i);
                let image = right_inner(&s, &s).substitute(&images, &p_b).expect("images over Z^G");
                let sc = m.sc(k);
                r.same(|| format!("{}: image of S^* S", m.gb.name(i)), &image, &right_inner(&sc, &sc));
                r.expect(m.dt[l][k] == Some(true), || format!("{}: D_tilde(d(b), c(b)) != 1", m.gb.name(i)));
            }
        }
        (None, _) => r.fail(|| "B^G does not present an algebra".into()),
        _ => {}
    }
}

/// `C~(c(a), d) = 0` forces `S_d^* S_{d(a)} = 0`; mirror for `B`.
fn orthogonality_from_zero_entries(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    for (i, p) in m.phi_a.iter().enumerate() {
        let Some((k, l)) = *p else {
            r.fail(|| format!("{}: unmatched", m.ga.name(i)));
            continue;
        };
        for l2 in 0..m.ed.len() {
            if m.ct[k][l2] == Some(false) {
                let v = right_inner(&m.sd(l2), &m.sd(l));
                r.expect(v.is_zero(), || {
                    format!("{}: C_tilde({}, {}) = 0 but S_{}^* S_{} = `{v}`", m.ga.name(i), m.c_name(k), m.d_name(l2), m.d_name(l2), m.d_name(l))
                });
            }
        }
    }
    for (i, p) in m.phi_b.iter().enumerate() {
        let Some((l, k)) = *p else {
            r.fail(|| format!("{}: unmatched", m.gb.name(i)));
            continue;
        };
        for k2 in 0..m.ec.len() {
            if m.dt[l][k2] == Some(false) {
                let v = right_inner(&m.sc(k2), &m.sc(k));
                r.expect(v.is_zero(), || {
                    format!("{}: D_tilde({}, {}) = 0 but S_{}^* S_{} = `{v}`", m.gb.name(i), m.d_name(l), m.c_name(k2), m.c_name(k2), m.c_name(k))
                });
            }
        }
    }
}

/// Pairs outside the range of a matching have a zero bit and a vanishing
/// product.
fn unmatched_pairs_vanish(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let used_a: BTreeSet<(usize, usize)> = m.phi_a.iter().flatten().copied().collect();
    for k in 0..m.ec.len() {
        for l in 0..m.ed.len() {
            if used_a.contains(&(k, l)) {
                continue;
            }
            let (c, d) = (m.c_name(k), m.d_name(l));
            r.expect(m.ct[k][l] == Some(false), || format!("({c}, {d}) unmatched but C_tilde is not 0"));
            r.expect(m.word(&[m.ec[k], m.ed[l]]).is_zero(), || format!("({c}, {d}) unmatched but S_{c} S_{d} != 0"));
        }
    }
    let used_b: BTreeSet<(usize, usize)> = m.phi_b.iter().flatten().copied().collect();
    for l in 0..m.ed.len() {
        for k in 0..m.ec.len() {
            if used_b.contains(&(l, k)) {
                continue;
            }
            let (d, c) = (m.d_name(l), m.c_name(k));
            r.expect(m.dt[l][k] == Some(false), || format!("({d}, {c}) unmatched but D_tilde is not 0"));
            r.expect(m.word(&[m.ed[l], m.ec[k]]).is_zero(), || format!("({d}, {c}) unmatched but S_{d} S_{c} != 0"));
        }
    }
}

/// `A^G(a, a') = D~(d(a), c(a'))` and `B^G(b, b') = C~(c(b), d(b'))`.
fn transition_matrices_transported(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    for (i, p) in m.phi_a.iter().enumerate() {
        for (j, q) in m.phi_a.iter().enumerate() {
            let (Some((_, l)), Some((k2, _))) = (p, q) else {
                continue;
            };
            let follows = m.ga.follows(i, j);
            r.expect(m.dt[*l][*k2] == Some(follows), || {
                format!("A^G({}, {}) = {} but D_tilde({}, {}) = {:?}", m.ga.name(i), m.ga.name(j), u8::from(follows), m.d_name(*l), m.c_name(*k2), m.dt[*l][*k2])
            });
        }
    }
    for (i, p) in m.phi_b.iter().enumerate() {
        for (j, q) in m.phi_b.iter().enumerate() {
            let (Some((_, k)), Some((l2, _))) = (p, q) else {
                continue;
            };
            let follows = m.gb.follows(i, j);
            r.expect(m.ct[*k][*l2] == Some(follows), || {
                format!("B^G({}, {}) = {} but C_tilde({}, {}) = {:?}", m.gb.name(i), m.gb.name(j), u8::from(follows), m.c_name(*k), m.d_name(*l2), m.ct[*k][*l2])
            });
        }
    }
    if m.phi_a.iter().any(Option::is_none) || m.phi_b.iter().any(Option::is_none) {
        r.fail(|| "matching incomplete".into());
    }
}

/// Where `D~(d(a_i), c(a_j)) = 1` exactly one `b` has
/// `(d(b), c(b)) = (d(a_i), c(a_j))`; mirror for `C~`.
fn unique_lifts(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let mut b_count: HashMap<(usize, usize), usize> = HashMap::new();
    for &(l, k) in m.phi_b.iter().flatten() {
        *b_count.entry((l, k)).or_default() += 1;
    }
    let mut a_count: HashMap<(usize, usize), usize> = HashMap::new();
    for &(k, l) in m.phi_a.iter().flatten() {
        *a_count.entry((k, l)).or_default() += 1;
    }
    for (i, p) in m.phi_a.iter().enumerate() {
        for (j, q) in m.phi_a.iter().enumerate() {
            let (Some((_, l)), Some((k2, _))) = (p, q) else {
                continue;
            };
            if m.dt[*l][*k2] == Some(true) {
                let n = b_count.get(&(*l, *k2)).copied().unwrap_or(0);
                r.expect(n == 1, || format!("({}, {}): {n} edges of B over ({}, {})", m.ga.name(i), m.ga.name(j), m.d_name(*l), m.c_name(*k2)));
            }
        }
    }
    for (i, p) in m.phi_b.iter().enumerate() {
        for (j, q) in m.phi_b.iter().enumerate() {
            let (Some((_, k)), Some((l2, _))) = (p, q) else {
                continue;
            };
            if m.ct[*k][*l2] == Some(true) {
                let n = a_count.get(&(*k, *l2)).copied().unwrap_or(0);
                r.expect(n == 1, || format!("({}, {}): {n} edges of A over ({}, {})", m.gb.name(i), m.gb.name(j), m.c_name(*k), m.d_name(*l2)));
            }
        }
    }
}

/// `S_c S_d S_{c'} != 0` iff `C~(c, d) = D~(d, c') = 1`; mirror for
/// `S_d S_c S_{d'}`.
fn triple_products(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let (nc, nd) = (m.ec.len(), m.ed.len());
    for k in 0..nc {
        for l in 0..nd {
            let cd = mul(&m.sc(k), &m.sd(l));
            for k2 in 0..nc {
                let nonzero = !mul(&cd, &m.sc(k2)).is_zero();
                let bits = m.ct[k][l] == Some(true) && m.dt[l][k2] == Some(true);
                r.expect(nonzero == bits, || {
                    format!("S_{} S_{} S_{} nonzero = {nonzero}, bits say {bits}", m.c_name(k), m.d_name(l), m.c_name(k2))
                });
            }
        }
    }
    for l in 0..nd {
        for k in 0..nc {
            let dc = mul(&m.sd(l), &m.sc(k));
            for l2 in 0..nd {
                let nonzero = !mul(&dc, &m.sd(l2)).is_zero();
                let bits = m.dt[l][k] == Some(true) && m.ct[k][l2] == Some(true);
                r.expect(nonzero == bits, || {
                    format!("S_{} S_{} S_{} nonzero = {nonzero}, bits say {bits}", m.d_name(l), m.c_name(k), m.d_name(l2))
                });
            }
        }
    }
}

/// Vertices read off nonvanishing triple products are well defined, and
/// each matched edge lies in exactly one counting set.
fn endpoint_consistency(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let (nc, nd) = (m.ec.len(), m.ed.len());
    let nonzero = |ids: [usize; 3]| !m.word(&ids).is_zero();
    // eta_c (x) xi_{d(b)} (x) eta_{c(b)} != 0 pins down s(b)
    for k in 0..nc {
        let starts: BTreeSet<usize> = m
            .phi_b
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|(l, k2)| (i, l, k2)))
            .filter(|&(_, l, k2)| nonzero([m.ec[k], m.ed[l], m.ec[k2]]))
            .map(|(i, _, _)| m.gb.source(i))
            .collect();
        r.expect(starts.len() <= 1, || format!("{}: edges of B from several sources {starts:?}", m.c_name(k)));
        let ends: BTreeSet<usize> = m
            .phi_a
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|(k2, l)| (i, k2, l)))
            .filter(|&(_, k2, l)| nonzero([m.ec[k2], m.ed[l], m.ec[k]]))
            .map(|(i, _, _)| m.ga.target(i))
            .collect();
        r.expect(ends.len() <= 1, || format!("{}: edges of A into several targets {ends:?}", m.c_name(k)));
    }
    for l in 0..nd {
        let starts: BTreeSet<usize> = m
            .phi_a
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|(k, l2)| (i, k, l2)))
            .filter(|&(_, k, l2)| nonzero([m.ed[l], m.ec[k], m.ed[l2]]))
            .map(|(i, _, _)| m.ga.source(i))
            .collect();
        r.expect(starts.len() <= 1, || format!("{}: edges of A from several sources {starts:?}", m.d_name(l)));
        let ends: BTreeSet<usize> = m
            .phi_b
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|(l2, k)| (i, l2, k)))
            .filter(|&(_, l2, k)| nonzero([m.ed[l2], m.ec[k], m.ed[l]]))
            .map(|(i, _, _)| m.gb.target(i))
            .collect();
        r.expect(ends.len() <= 1, || format!("{}: edges of B into several targets {ends:?}", m.d_name(l)));
    }
    let sets_c = counting_sets_c(m);
    for &(k, _) in m.phi_a.iter().flatten().collect::<BTreeSet<_>>() {
        let homes = sets_c.iter().filter(|(_, set)| set.contains(&k)).count();
        r.expect(homes == 1, || format!("{} lies in {homes} counting sets for C", m.c_name(k)));
    }
    let sets_d = counting_sets_d(m);
    for &(l, _) in m.phi_b.iter().flatten().collect::<BTreeSet<_>>() {
        let homes = sets_d.iter().filter(|(_, set)| set.contains(&l)).count();
        r.expect(homes == 1, || format!("{} lies in {homes} counting sets for D", m.d_name(l)));
    }
}

/// Inner products of generators, pushed through the embedding, agree with
/// the inner products of the corresponding elementary tensors.
fn inner_product_transport(_: &MoritaCertificate, m: &Model, r: &mut Rec) {
    let p_a = m.p_a();
    let p_b = m.p_b();
    for (family, pres, images, unit, graph) in [
        (Family::A, &m.pres_a, m.images_a(), &p_a, &m.ga),
        (Family::B, &m.pres_b, m.images_b(), &p_b, &m.gb),
    ] {
        let (Some(pres), Some(images)) = (pres, images) else {
            r.fail(|| format!("matching or algebra unavailable for edges {}..", graph.name(0)));
            continue;
        };
        let gens: Vec<Polynomial> = (0..pres.len()).map(|i| Polynomial::generator(pres, i)).collect();
        for i in 0..gens.len() {
            for j in 0..gens.len() {
                let (left_t, right_t) = tensor_pair(m, family, i, j).expect("matching complete");
                let left = left_inner(&gens[i], &gens[j]).substitute(&images, unit).expect("images over Z^G");
                let right = right_inner(&gens[i], &gens[j]).substitute(&images, unit).expect("images over Z^G");
                r.same(|| format!("left <{}|{}>", graph.name(i), graph.name(j)), &left, &left_t);
                r.same(|| format!("right <{}|{}>", graph.name(i), graph.name(j)), &right, &right_t);
            }
        }
    }
}
