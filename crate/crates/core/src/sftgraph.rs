//! Edge graphs of nonnegative matrices and their edge transition matrices.
//!
//! A nonnegative `n x m` matrix `A` defines a graph with `A(i, j)` parallel
//! edges from source vertex `i` to target vertex `j`. For square matrices the
//! source and target vertex sets coincide; rectangular matrices give
//! bipartite edge sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmat::Matrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: usize,
    pub source: usize,
    pub target: usize,
    /// Index among the parallel edges with the same endpoints.
    pub copy: usize,
}

/// Serialized form of an edge inside certificate files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub s: usize,
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeGraph {
    sources: usize,
    targets: usize,
    prefix: String,
    edges: Vec<Edge>,
    by_source: Vec<Vec<usize>>,
    by_target: Vec<Vec<usize>>,
}

/// Edge graph with the default `a` naming (`a1, a2, ...`).
pub fn build_edge_graph(a: &Matrix) -> Result<EdgeGraph> {
    EdgeGraph::with_prefix(a, "a")
}

impl EdgeGraph {
    /// Edges are ordered by (source, target, copy) and named
    /// `{prefix}{id + 1}`.
    pub fn with_prefix(a: &Matrix, prefix: &str) -> Result<EdgeGraph> {
        let counts = a.to_counts("edge graph matrix")?;
        let (n, m) = (a.rows(), a.cols());
        let total: usize = counts.iter().sum();
        let mut edges = Vec::with_capacity(total);
        let mut by_source = vec![Vec::new(); n];
        let mut by_target = vec![Vec::new(); m];
        for i in 0..n {
            for j in 0..m {
                for copy in 0..counts[i * m + j] {
                    let id = edges.len();
                    edges.push(Edge {
                        id,
                        source: i,
                        target: j,
                        copy,
                    });
                    by_source[i].push(id);
                    by_target[j].push(id);
                }
            }
        }
        Ok(EdgeGraph {
            sources: n,
            targets: m,
            prefix: prefix.to_string(),
            edges,
            by_source,
            by_target,
        })
    }

    /// Number of vertices; for bipartite graphs, the source side.
    pub fn vertex_count(&self) -> usize {
        self.sources
    }

    pub fn target_vertex_count(&self) -> usize {
        self.targets
    }

    pub fn is_square(&self) -> bool {
        self.sources == self.targets
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn source(&self, id: usize) -> usize {
        self.edges[id].source
    }

    pub fn target(&self, id: usize) -> usize {
        self.edges[id].target
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.by_source[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.by_target[v]
    }

    pub fn name(&self, id: usize) -> String {
        format!("{}{}", self.prefix, id + 1)
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.edges.len()).map(|i| self.name(i)).collect()
    }

    /// Inverse of [`EdgeGraph::name`].
    pub fn id_of(&self, name: &str) -> Option<usize> {
        let k: usize = name.strip_prefix(&self.prefix)?.parse().ok()?;
        if k >= 1 && k <= self.edges.len() && self.name(k - 1) == name {
            Some(k - 1)
        } else {
            None
        }
    }

    /// Counts edges between each vertex pair; recovers the defining matrix.
    pub fn adjacency_counts(&self) -> Matrix {
        let mut m = Matrix::zeros(self.sources, self.targets);
        for e in &self.edges {
            let v = m.get(e.source, e.target) + 1u32;
            m.set(e.source, e.target, v);
        }
        m
    }

    pub fn records(&self) -> Vec<EdgeRecord> {
        self.edges
            .iter()
            .map(|e| EdgeRecord {
                id: self.name(e.id),
                s: e.source,
                t: e.target,
            })
            .collect()
    }

    /// `t(e) = s(f)`, for edges of a square graph.
    pub fn follows(&self, e: usize, f: usize) -> bool {
        self.edges[e].target == self.edges[f].source
    }
}

/// The 0-1 matrix `M(e, f) = 1` iff `t(e) = s(f)`.
pub fn edge_transition_matrix(g: &EdgeGraph) -> Result<Matrix> {
    if !g.is_square() {
        return Err(Error::shape(
            "edge_transition_matrix",
            "edge graph of a rectangular matrix has no transition matrix",
        ));
    }
    let n = g.edge_count();
    if n == 0 {
        return Err(Error::domain("edge graph has no edges"));
    }
    let mut m = Matrix::zeros(n, n);
    for e in 0..n {
        for &f in g.out_edges(g.target(e)) {
            m.set(e, f, 1);
        }
    }
    Ok(m)
}

/// A word of edge ids with `t(w_i) = s(w_{i+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleWord(pub Vec<usize>);

impl AdmissibleWord {
    pub fn is_admissible_in(&self, g: &EdgeGraph) -> bool {
        self.0.windows(2).all(|w| g.follows(w[0], w[1]))
    }
}

/// All admissible words of exactly `length` edges, lexicographic by ids.
pub fn admissible_words(g: &EdgeGraph, length: usize) -> Vec<AdmissibleWord> {
    let mut out = Vec::new();
    if length == 0 {
        out.push(AdmissibleWord(Vec::new()));
        return out;
    }
    if !g.is_square() {
        if length == 1 {
            out.extend((0..g.edge_count()).map(|e| AdmissibleWord(vec![e])));
        }
        return out;
    }
    let mut word = Vec::with_capacity(length);
    fn extend(g: &EdgeGraph, length: usize, word: &mut Vec<usize>, out: &mut Vec<AdmissibleWord>) {
        if word.len() == length {
            out.push(AdmissibleWord(word.clone()));
            return;
        }
        let next: Vec<usize> = match word.last() {
            None => (0..g.edge_count()).collect(),
            Some(&e) => g.out_edges(g.target(e)).to_vec(),
        };
        for f in next {
            word.push(f);
            extend(g, length, word, out);
            word.pop();
        }
    }
    extend(g, length, &mut word, &mut out);
    out
}
