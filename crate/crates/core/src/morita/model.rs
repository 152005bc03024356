//! The certificate read back into concrete edge sets and algebra
//! elements, trusting only `A`, `B` and `Z`.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::{z_edge_names, MoritaCertificate, PhiEntry};
use crate::ckterm::{Polynomial, Presentation};
use crate::error::{Error, Result};
use crate::sftgraph::{build_edge_graph, edge_transition_matrix, EdgeGraph};

pub(crate) struct Model {
    pub n: usize,
    pub z_graph: EdgeGraph,
    /// Canonical names of all `Z` edges, indexed by edge id.
    pub names: Vec<String>,
    /// Edge ids of `E_C` and `E_D`, in name order.
    pub ec: Vec<usize>,
    pub ed: Vec<usize>,
    pub pres: Arc<Presentation>,
    pub ga: EdgeGraph,
    pub gb: EdgeGraph,
    pub pres_a: Option<Arc<Presentation>>,
    pub pres_b: Option<Arc<Presentation>>,
    /// Certificate bits `C~(k, l)` by positions in `E_C`, `E_D`; `None`
    /// when missing or not 0-1.
    pub ct: Vec<Vec<Option<bool>>>,
    pub dt: Vec<Vec<Option<bool>>>,
    /// `(c position, d position)` per edge of `A`, as recorded.
    pub phi_a: Vec<Option<(usize, usize)>>,
    /// `(d position, c position)` per edge of `B`, as recorded.
    pub phi_b: Vec<Option<(usize, usize)>>,
}

fn bits(m: &crate::exactmat::Matrix, rows: usize, cols: usize) -> Vec<Vec<Option<bool>>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    if i >= m.rows() || j >= m.cols() {
                        return None;
                    }
                    let x = m.get(i, j);
                    if x.is_zero() {
                        Some(false)
                    } else if x.is_one() {
                        Some(true)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect()
}

fn position(list: &[usize], names: &[String], name: &str) -> Option<usize> {
    list.iter().position(|&e| names[e] == name)
}

impl Model {
    pub fn new(cert: &MoritaCertificate) -> std::result::Result<Model, String> {
        if !cert.a.is_square() || !cert.b.is_square() {
            return Err("A and B must be square".into());
        }
        let (n, m) = (cert.a.rows(), cert.b.rows());
        if !cert.z.is_square() || cert.z.rows() != n + m {
            return Err(format!("Z must be square of size {}", n + m));
        }
        let z_graph = build_edge_graph(&cert.z).map_err(|e| e.to_string())?;
        let names = z_edge_names(&z_graph, n);
        let ec: Vec<usize> = (0..z_graph.edge_count()).filter(|&e| z_graph.source(e) < n).collect();
        let ed: Vec<usize> = (0..z_graph.edge_count()).filter(|&e| z_graph.source(e) >= n).collect();
        let zg = edge_transition_matrix(&z_graph).map_err(|e| e.to_string())?;
        let pres = Presentation::new(&zg, names.clone()).map_err(|e| format!("Z^G: {e}"))?;
        let ga = build_edge_graph(&cert.a).map_err(|e| e.to_string())?;
        let gb = EdgeGraph::with_prefix(&cert.b, "b").map_err(|e| e.to_string())?;
        let pres_a = edge_transition_matrix(&ga)
            .and_then(|t| Presentation::new(&t, ga.names()))
            .ok();
        let pres_b = edge_transition_matrix(&gb)
            .and_then(|t| Presentation::new(&t, gb.names()))
            .ok();
        let ct = bits(&cert.c_tilde, ec.len(), ed.len());
        let dt = bits(&cert.d_tilde, ed.len(), ec.len());
        let resolve = |g: &EdgeGraph, phi: &[PhiEntry], first: &[usize], second: &[usize]| {
            (0..g.edge_count())
                .map(|i| {
                    let name = g.name(i);
                    let mut hits = phi.iter().filter(|p| p.edge == name);
                    let p = hits.next()?;
                    if hits.next().is_some() {
                        return None;
                    }
                    Some((position(first, &names, &p.first)?, position(second, &names, &p.second)?))
                })
                .collect::<Vec<_>>()
        };
        let phi_a = resolve(&ga, &cert.phi_a, &ec, &ed);
        let phi_b = resolve(&gb, &cert.phi_b, &ed, &ec);
        Ok(Model {
            n,
            names,
            ec,
            ed,
            pres,
            ga,
            gb,
            pres_a,
            pres_b,
            ct,
            dt,
            phi_a,
            phi_b,
            z_graph,
        })
    }

    pub fn sc(&self, k: usize) -> Polynomial {
        Polynomial::generator(&self.pres, self.ec[k])
    }

    pub fn sd(&self, l: usize) -> Polynomial {
        Polynomial::generator(&self.pres, self.ed[l])
    }

    pub fn c_name(&self, k: usize) -> &str {
        &self.names[self.ec[k]]
    }

    pub fn d_name(&self, l: usize) -> &str {
        &self.names[self.ed[l]]
    }

    pub fn one(&self) -> Polynomial {
        Polynomial::one(&self.pres)
    }

    pub fn zero(&self) -> Polynomial {
        Polynomial::zero(&self.pres)
    }

    /// Product of generators of `Z^G` given by edge ids.
    pub fn word(&self, ids: &[usize]) -> Polynomial {
        Polynomial::word(&self.pres, ids, &[])
    }

    /// `P_A = sum_c S_c S_c^*`.
    pub fn p_a(&self) -> Polynomial {
        self.ec
            .iter()
            .fold(self.zero(), |acc, &e| acc.add(&Polynomial::range_projection(&self.pres, e)).expect("same presentation"))
    }

    /// `P_B = sum_d S_d S_d^*`.
    pub fn p_b(&self) -> Polynomial {
        self.ed
            .iter()
            .fold(self.zero(), |acc, &e| acc.add(&Polynomial::range_projection(&self.pres, e)).expect("same presentation"))
    }

    /// Images `S_a -> S_{c(a)} S_{d(a)}` for all edges of `A`, if every
    /// edge is matched.
    pub fn images_a(&self) -> Option<Vec<Polynomial>> {
        self.phi_a
            .iter()
            .map(|p| p.map(|(k, l)| self.word(&[self.ec[k], self.ed[l]])))
            .collect()
    }

    /// Images `S_b -> S_{d(b)} S_{c(b)}`.
    pub fn images_b(&self) -> Option<Vec<Polynomial>> {
        self.phi_b
            .iter()
            .map(|p| p.map(|(l, k)| self.word(&[self.ed[l], self.ec[k]])))
            .collect()
    }
}

/// `x^* y`.
pub(crate) fn right_inner(x: &Polynomial, y: &Polynomial) -> Polynomial {
    x.adjoint().mul(y).expect("same presentation")
}

/// `x y^*`.
pub(crate) fn left_inner(x: &Polynomial, y: &Polynomial) -> Polynomial {
    x.mul(&y.adjoint()).expect("same presentation")
}

#[derive(Clone, Copy)]
pub(crate) enum Family {
    A,
    B,
}

/// Left and right inner products of the elementary tensors attached to
/// `x` and `y` (both edges of `A`, or both of `B`), as elements of the
/// algebra of `Z^G`.
///
/// For edges of `A` the tensors are `eta_{c(x)} (x)_B xi_{d(x)}` and the
/// values are `S_c S_d S_{d'}^* S_{c'}^*` and `S_d^* S_c^* S_{c'} S_{d'}`;
/// edges of `B` use `xi_{d(x)} (x)_A eta_{c(x)}` symmetrically.
pub(crate) fn tensor_pair(model: &Model, family: Family, x: usize, y: usize) -> Option<(Polynomial, Polynomial)> {
    let (first, second, first_y, second_y) = match family {
        Family::A => {
            let (k, l) = (*model.phi_a.get(x)?)?;
            let (k2, l2) = (*model.phi_a.get(y)?)?;
            (model.sc(k), model.sd(l), model.sc(k2), model.sd(l2))
        }
        Family::B => {
            let (l, k) = (*model.phi_b.get(x)?)?;
            let (l2, k2) = (*model.phi_b.get(y)?)?;
            (model.sd(l), model.sc(k), model.sd(l2), model.sc(k2))
        }
    };
    // left: first . <second | second_y> . first_y^*, with the middle
    // inner product taken on the second factor's side.
    let middle_left = left_inner(&second, &second_y);
    let left = left_inner(&first.mul(&middle_left).expect("same presentation"), &first_y);
    // right: <second | <first | first_y> second_y>
    let middle_right = right_inner(&first, &first_y);
    let right = right_inner(&second, &middle_right.mul(&second_y).expect("same presentation"));
    Some((left, right))
}

/// Left and right inner products of the elementary tensors for two edges
/// given by name, both of `A` (`a1, ...`) or both of `B` (`b1, ...`).
pub fn tensor_inner_products(cert: &MoritaCertificate, x: &str, y: &str) -> Result<(Polynomial, Polynomial)> {
    let model = Model::new(cert).map_err(Error::Consistency)?;
    let (family, xi, yi) = match (model.ga.id_of(x), model.ga.id_of(y), model.gb.id_of(x), model.gb.id_of(y)) {
        (Some(i), Some(j), _, _) => (Family::A, i, j),
        (_, _, Some(i), Some(j)) => (Family::B, i, j),
        _ => {
            return Err(Error::domain(format!(
                "`{x}` and `{y}` must both be edges of A or both edges of B"
            )))
        }
    };
    tensor_pair(&model, family, xi, yi)
        .ok_or_else(|| Error::Consistency(format!("matching undefined for `{x}` or `{y}`")))
}
