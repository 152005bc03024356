//! Bimodule certificates for elementary equivalences.
//!
//! From `A = CD`, `B = DC` we form `Z = [[0, C], [D, 0]]`. Edges of `Z`
//! leaving the first `N` vertices form `E_C` (named `c1, c2, ...`), the
//! rest form `E_D` (`d1, ...`). Every edge `a` of `A` is matched with an
//! admissible pair `(c(a), d(a))` of the same endpoints, every edge `b` of
//! `B` with a pair `(d(b), c(b))`, and the algebra of `A^G` embeds into the
//! algebra of `Z^G` by `S_a -> S_{c(a)} S_{d(a)}`. The certificate records
//! these choices; [`verify_certificate`] checks the bimodule identities
//! symbolically and [`reconstruct_factors`] recovers `C` and `D` from the
//! matching alone.

mod checks;
mod model;
mod reconstruct;

pub use checks::{verify_certificate, CheckReport, CheckResult, CHECK_NAMES};
pub use model::tensor_inner_products;
pub use reconstruct::reconstruct_factors;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::elemeq::verify_elementary;
use crate::error::{Error, Result};
use crate::exactmat::{mat_mul, require_standing, Matrix};
use crate::sftgraph::{build_edge_graph, edge_transition_matrix, EdgeGraph, EdgeRecord};

/// One entry of a matching: `edge -> (first, second)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiEntry {
    pub edge: String,
    pub first: String,
    pub second: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoritaCertificate {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub z: Matrix,
    pub e_c: Vec<String>,
    pub e_d: Vec<String>,
    /// `E_C x E_D`, 1 where `t(c) = s(d)`.
    pub c_tilde: Matrix,
    /// `E_D x E_C`, 1 where `t(d) = s(c)`.
    pub d_tilde: Matrix,
    /// `a -> (c(a), d(a))`, in edge order of `A`.
    pub phi_a: Vec<PhiEntry>,
    /// `b -> (d(b), c(b))`, in edge order of `B`.
    pub phi_b: Vec<PhiEntry>,
    /// Edge list of `Z` with endpoints, for readers of the file.
    pub z_edges: Option<Vec<EdgeRecord>>,
}

/// Canonical names of the edges of `Z`: `c{k}` for edges leaving the
/// first `n` vertices, `d{k}` for the rest.
pub(crate) fn z_edge_names(g: &EdgeGraph, n: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(g.edge_count());
    let (mut nc, mut nd) = (0, 0);
    for e in g.edges() {
        if e.source < n {
            nc += 1;
            names.push(format!("c{nc}"));
        } else {
            nd += 1;
            names.push(format!("d{nd}"));
        }
    }
    names
}

/// The construction: `Z`, its edge sets, `C^G`, `D^G`, and the
/// lexicographic matchings.
pub fn build_certificate(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<MoritaCertificate> {
    if !verify_elementary(a, b, c, d)? {
        return Err(Error::domain("C and D do not factor A = CD, B = DC"));
    }
    require_standing(a, "A")?;
    require_standing(b, "B")?;
    let n = a.rows();
    let z = Matrix::off_diagonal_blocks(c, d)?;
    let g = build_edge_graph(&z)?;
    let names = z_edge_names(&g, n);
    let n_c = g.edges().iter().filter(|e| e.source < n).count();
    let n_d = g.edge_count() - n_c;
    let zg = edge_transition_matrix(&g)?;
    let c_tilde = zg.block(0, n_c, n_c, n_c + n_d);
    let d_tilde = zg.block(n_c, n_c + n_d, 0, n_c);

    let ga = build_edge_graph(a)?;
    let mut phi_a = Vec::with_capacity(ga.edge_count());
    for e in ga.edges() {
        let pairs: Vec<(usize, usize)> = g
            .out_edges(e.source)
            .iter()
            .flat_map(|&ce| g.out_edges(g.target(ce)).iter().map(move |&de| (ce, de)))
            .filter(|&(_, de)| g.target(de) == e.target)
            .collect();
        if pairs.len() != usize::try_from(a.get(e.source, e.target)).unwrap_or(usize::MAX) {
            return Err(Error::Consistency(format!(
                "{} admissible pairs from {} to {} but A has {}",
                pairs.len(),
                e.source,
                e.target,
                a.get(e.source, e.target)
            )));
        }
        let (ce, de) = pairs[e.copy];
        phi_a.push(PhiEntry {
            edge: ga.name(e.id),
            first: names[ce].clone(),
            second: names[de].clone(),
        });
    }

    let gb = EdgeGraph::with_prefix(b, "b")?;
    let mut phi_b = Vec::with_capacity(gb.edge_count());
    for e in gb.edges() {
        let pairs: Vec<(usize, usize)> = g
            .out_edges(n + e.source)
            .iter()
            .flat_map(|&de| g.out_edges(g.target(de)).iter().map(move |&ce| (de, ce)))
            .filter(|&(_, ce)| g.target(ce) == n + e.target)
            .collect();
        if pairs.len() != usize::try_from(b.get(e.source, e.target)).unwrap_or(usize::MAX) {
            return Err(Error::Consistency(format!(
                "{} admissible pairs from {} to {} but B has {}",
                pairs.len(),
                e.source,
                e.target,
                b.get(e.source, e.target)
            )));
        }
        let (de, ce) = pairs[e.copy];
        phi_b.push(PhiEntry {
            edge: gb.name(e.id),
            first: names[de].clone(),
            second: names[ce].clone(),
        });
    }

    let records = g
        .edges()
        .iter()
        .map(|e| EdgeRecord {
            id: names[e.id].clone(),
            s: e.source,
            t: e.target,
        })
        .collect();
    Ok(MoritaCertificate {
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        d: d.clone(),
        z,
        e_c: names[..n_c].to_vec(),
        e_d: names[n_c..].to_vec(),
        c_tilde,
        d_tilde,
        phi_a,
        phi_b,
        z_edges: Some(records),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    #[serde(rename = "A")]
    a: Matrix,
    #[serde(rename = "B")]
    b: Matrix,
    #[serde(rename = "C")]
    c: Matrix,
    #[serde(rename = "D")]
    d: Matrix,
    #[serde(rename = "Z")]
    z: Matrix,
    #[serde(rename = "E_C")]
    e_c: Vec<String>,
    #[serde(rename = "E_D")]
    e_d: Vec<String>,
    #[serde(rename = "C_tilde")]
    c_tilde: Matrix,
    #[serde(rename = "D_tilde")]
    d_tilde: Matrix,
    #[serde(rename = "phi_A")]
    phi_a: Map<String, Value>,
    #[serde(rename = "phi_B")]
    phi_b: Map<String, Value>,
    #[serde(rename = "Z_edges", default)]
    z_edges: Option<Vec<EdgeRecord>>,
}

fn phi_from_json(map: Map<String, Value>, field: &str) -> Result<Vec<PhiEntry>> {
    map.into_iter()
        .map(|(edge, v)| {
            let pair: [String; 2] = serde_json::from_value(v)
                .map_err(|e| Error::Parse(format!("{field}.{edge}: expected a pair of edge ids ({e})")))?;
            let [first, second] = pair;
            Ok(PhiEntry { edge, first, second })
        })
        .collect()
}

fn phi_to_json(phi: &[PhiEntry]) -> Value {
    Value::Object(
        phi.iter()
            .map(|p| (p.edge.clone(), Value::from(vec![p.first.clone(), p.second.clone()])))
            .collect(),
    )
}

impl MoritaCertificate {
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        let mut put = |k: &str, v: Value| {
            obj.insert(k.to_string(), v);
        };
        let mat = |m: &Matrix| serde_json::to_value(m).expect("matrix serializes");
        put("A", mat(&self.a));
        put("B", mat(&self.b));
        put("C", mat(&self.c));
        put("D", mat(&self.d));
        put("Z", mat(&self.z));
        put("E_C", Value::from(self.e_c.clone()));
        put("E_D", Value::from(self.e_d.clone()));
        put("C_tilde", mat(&self.c_tilde));
        put("D_tilde", mat(&self.d_tilde));
        put("phi_A", phi_to_json(&self.phi_a));
        put("phi_B", phi_to_json(&self.phi_b));
        if let Some(edges) = &self.z_edges {
            put("Z_edges", serde_json::to_value(edges).expect("records serialize"));
        }
        Value::Object(obj)
    }

    pub fn to_json_string_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("certificate serializes")
    }

    pub fn from_json_str(text: &str) -> Result<MoritaCertificate> {
        let raw: RawCertificate = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(MoritaCertificate {
            a: raw.a,
            b: raw.b,
            c: raw.c,
            d: raw.d,
            z: raw.z,
            e_c: raw.e_c,
            e_d: raw.e_d,
            c_tilde: raw.c_tilde,
            d_tilde: raw.d_tilde,
            phi_a: phi_from_json(raw.phi_a, "phi_A")?,
            phi_b: phi_from_json(raw.phi_b, "phi_B")?,
            z_edges: raw.z_edges,
        })
    }

    /// `Z^2`, which is `diag(A, B)` for a sound certificate.
    pub fn z_squared(&self) -> Result<Matrix> {
        mat_mul(&self.z, &self.z)
    }

    /// `c(x)` for an edge name of `A` or `B`.
    pub fn c_of(&self, edge: &str) -> Option<&str> {
        self.lookup(edge).map(|(p, is_a)| if is_a { p.first.as_str() } else { p.second.as_str() })
    }

    /// `d(x)` for an edge name of `A` or `B`.
    pub fn d_of(&self, edge: &str) -> Option<&str> {
        self.lookup(edge).map(|(p, is_a)| if is_a { p.second.as_str() } else { p.first.as_str() })
    }

    fn lookup(&self, edge: &str) -> Option<(&PhiEntry, bool)> {
        self.phi_a
            .iter()
            .find(|p| p.edge == edge)
            .map(|p| (p, true))
            .or_else(|| self.phi_b.iter().find(|p| p.edge == edge).map(|p| (p, false)))
    }
}
