//! Chains of elementary equivalences and a bounded breadth-first search
//! for them.

use std::collections::HashSet;
use std::time::Instant;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::elemeq::{factorizations, search_unscreened, verify_elementary, Budget, Witness};
use crate::error::{Error, Result};
use crate::exactmat::{is_irreducible, require_standing, Matrix};
use crate::invariants::screen;

/// `matrices[i]` and `matrices[i + 1]` are linked by `witnesses[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSEChain {
    pub matrices: Vec<Matrix>,
    pub witnesses: Vec<Witness>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    #[serde(rename = "C")]
    c: Matrix,
    #[serde(rename = "D")]
    d: Matrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    matrices: Vec<Matrix>,
    witnesses: Vec<RawLink>,
}

impl SSEChain {
    pub fn single(a: Matrix) -> Self {
        SSEChain {
            matrices: vec![a],
            witnesses: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        self.witnesses.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "matrices": &self.matrices,
            "witnesses": self.witnesses.iter().map(|w| json!({"C": &w.c, "D": &w.d})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_str(text: &str) -> Result<SSEChain> {
        let raw: RawChain = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(SSEChain {
            matrices: raw.matrices,
            witnesses: raw.witnesses.into_iter().map(|l| Witness { c: l.c, d: l.d }).collect(),
        })
    }
}

/// True iff every link is an elementary equivalence. Shape problems are
/// reported as errors naming the link.
pub fn verify_chain(chain: &SSEChain) -> Result<bool> {
    if chain.matrices.is_empty() {
        return Err(Error::shape("verify_chain", "a chain needs at least one matrix"));
    }
    if chain.witnesses.len() + 1 != chain.matrices.len() {
        return Err(Error::shape(
            "verify_chain",
            format!(
                "{} matrices need {} witnesses, found {}",
                chain.matrices.len(),
                chain.matrices.len() - 1,
                chain.witnesses.len()
            ),
        ));
    }
    for (i, m) in chain.matrices.iter().enumerate() {
        m.require_square("verify_chain")
            .and_then(|_| m.require_nonnegative("chain matrix"))
            .map_err(|e| Error::Link {
                index: i,
                source: Box::new(e),
            })?;
    }
    let mut ok = true;
    for (i, w) in chain.witnesses.iter().enumerate() {
        let step = verify_elementary(&chain.matrices[i], &chain.matrices[i + 1], &w.c, &w.d).map_err(|e| Error::Link {
            index: i,
            source: Box::new(e),
        })?;
        ok &= step;
    }
    Ok(ok)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest intermediate matrix size; `None` means
    /// `max(size(a), size(b)) + 2`.
    pub size_cap: Option<usize>,
    /// Factorizations examined per matrix and inner size.
    pub neighbor_limit: usize,
    pub budget: Budget,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            size_cap: None,
            neighbor_limit: 64,
            budget: Budget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainOutcome {
    Found(SSEChain),
    /// With `separating` set, the matrices are provably not shift
    /// equivalent; otherwise nothing was found within the caps.
    NotFound { separating: Option<String> },
    BudgetExhausted { nodes: u64 },
}

struct Node {
    matrix: Matrix,
    parent: Option<(usize, Witness)>,
}

fn path_to(nodes: &[Node], mut i: usize) -> SSEChain {
    let mut matrices = vec![nodes[i].matrix.clone()];
    let mut witnesses = Vec::new();
    while let Some((p, w)) = &nodes[i].parent {
        matrices.push(nodes[*p].matrix.clone());
        witnesses.push(w.clone());
        i = *p;
    }
    matrices.reverse();
    witnesses.reverse();
    SSEChain { matrices, witnesses }
}

/// Breadth-first over intermediate matrices `DC` for factorizations
/// `X = CD`, so the first chain found has the fewest links.
pub fn search_chain(a: &Matrix, b: &Matrix, max_steps: usize, config: &SearchConfig) -> Result<ChainOutcome> {
    require_standing(a, "A")?;
    require_standing(b, "B")?;
    if let Some(name) = screen(a, b)? {
        return Ok(ChainOutcome::NotFound {
            separating: Some(name.to_string()),
        });
    }
    if a == b {
        return Ok(ChainOutcome::Found(SSEChain::single(a.clone())));
    }
    let cap = config.size_cap.unwrap_or(a.rows().max(b.rows()) + 2);
    let deadline = config.budget.time_limit.map(|t| Instant::now() + t);
    let mut spent: u64 = 0;
    let remaining = |spent: u64| Budget {
        max_nodes: config.budget.max_nodes.map(|m| m.saturating_sub(spent)),
        time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
    };
    let exhausted = |spent: u64| {
        config.budget.max_nodes.is_some_and(|m| spent >= m) || deadline.is_some_and(|d| Instant::now() >= d)
    };

    let mut nodes = vec![Node {
        matrix: a.clone(),
        parent: None,
    }];
    let mut seen: HashSet<Matrix> = HashSet::from([a.clone()]);
    let mut frontier = vec![0usize];
    for step in 1..=max_steps {
        for &i in &frontier {
            let e = search_unscreened(&nodes[i].matrix, Some(b), b.rows(), 1, &remaining(spent));
            spent += e.nodes;
            if let Some(w) = e.witnesses.into_iter().next() {
                let mut chain = path_to(&nodes, i);
                chain.matrices.push(b.clone());
                chain.witnesses.push(w);
                return Ok(ChainOutcome::Found(chain));
            }
            if !e.complete || exhausted(spent) {
                return Ok(ChainOutcome::BudgetExhausted { nodes: spent });
            }
        }
        if step == max_steps {
            break;
        }
        let mut next = Vec::new();
        for &i in &frontier {
            for inner in 1..=cap {
                let x = nodes[i].matrix.clone();
                let e = factorizations(&x, inner, config.neighbor_limit, &remaining(spent))?;
                spent += e.nodes;
                if !e.complete || exhausted(spent) {
                    return Ok(ChainOutcome::BudgetExhausted { nodes: spent });
                }
                for w in e.witnesses {
                    let y = w.right()?;
                    if seen.contains(&y) || !is_irreducible(&y)? {
                        continue;
                    }
                    seen.insert(y.clone());
                    nodes.push(Node {
                        matrix: y,
                        parent: Some((i, w)),
                    });
                    next.push(nodes.len() - 1);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(ChainOutcome::NotFound { separating: None })
}
