//! Adjustment-set validity and minimal adjustment sets.
//!
//! Validity is decided by classifying every treatment–outcome path as causal
//! (all edges pointing towards the outcome) or non-causal, and checking each
//! against the conditioning set `z ∪ forced`. Forced nodes are conditioned on
//! by the data itself (selection) and may be treatment descendants.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dag::{CausalDag, DagError, NodeId, Role};
use crate::paths::{enumerate_paths, path_open, PathError};

/// Largest candidate pool searched exhaustively.
pub const MAX_CANDIDATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdjustError {
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("`{0}` is not an eligible adjustment candidate")]
    CandidateViolation(String),
    #[error("invalid adjustment query: {0}")]
    InvalidQuery(&'static str),
    #[error("{0} candidates is too many for exhaustive search (limit {MAX_CANDIDATES})")]
    TooManyCandidates(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjustmentQuery {
    pub treatment: NodeId,
    pub outcome: NodeId,
    /// Conditioned on by design, e.g. the selection node of a convenience sample.
    pub forced: BTreeSet<NodeId>,
    /// Nodes the analyst may adjust for.
    pub candidates: BTreeSet<NodeId>,
}

impl AdjustmentQuery {
    /// Candidates are every non-latent node that is not the treatment, the
    /// outcome, a forced node or a descendant of the treatment.
    pub fn new(dag: &CausalDag, treatment: NodeId, outcome: NodeId, forced: BTreeSet<NodeId>) -> Self {
        let desc = dag.descendants(treatment);
        let candidates = dag
            .nodes()
            .filter(|v| *v != treatment && *v != outcome)
            .filter(|v| !forced.contains(v) && !desc.contains(v))
            .filter(|&v| dag.role(v) != Role::Latent)
            .collect();
        AdjustmentQuery { treatment, outcome, forced, candidates }
    }

    /// Query taken from the graph's role annotations; `conditioned` nodes are forced.
    pub fn from_roles(dag: &CausalDag) -> Result<Self, AdjustError> {
        let t = dag.treatment().ok_or(AdjustError::InvalidQuery("graph has no treatment node"))?;
        let y = dag.outcome().ok_or(AdjustError::InvalidQuery("graph has no outcome node"))?;
        Ok(Self::new(dag, t, y, dag.nodes_with_role(Role::Conditioned)))
    }

    fn check(&self) -> Result<(), AdjustError> {
        if self.treatment == self.outcome {
            return Err(AdjustError::InvalidQuery("treatment and outcome coincide"));
        }
        if self.forced.contains(&self.treatment) || self.forced.contains(&self.outcome) {
            return Err(AdjustError::InvalidQuery("treatment or outcome is in the forced set"));
        }
        Ok(())
    }
}

/// Whether conditioning on `z` (together with the query's forced nodes)
/// identifies the causal effect of the treatment on the outcome.
pub fn is_valid_adjustment(dag: &CausalDag, q: &AdjustmentQuery, z: &BTreeSet<NodeId>) -> Result<bool, AdjustError> {
    q.check()?;
    for &v in z {
        if !q.candidates.contains(&v) || v == q.treatment || v == q.outcome {
            return Err(AdjustError::CandidateViolation(dag.name(v).into()));
        }
    }
    let desc = dag.descendants(q.treatment);
    if z.iter().any(|v| desc.contains(v)) {
        return Ok(false);
    }
    let conditioned: BTreeSet<NodeId> = z.union(&q.forced).copied().collect();
    for p in enumerate_paths(dag, q.treatment, q.outcome)? {
        let open = path_open(dag, &p, &conditioned)?;
        if p.is_causal() != open {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every inclusion-minimal valid adjustment set drawn from the query's
/// candidates, sorted by size and then by sorted node names.
pub fn minimal_adjustment_sets(dag: &CausalDag, q: &AdjustmentQuery) -> Result<Vec<BTreeSet<NodeId>>, AdjustError> {
    q.check()?;
    let pool: Vec<NodeId> = q.candidates.iter().copied().collect();
    if pool.len() > MAX_CANDIDATES {
        return Err(AdjustError::TooManyCandidates(pool.len()));
    }
    let mut masks: Vec<u32> = (0..1u32 << pool.len()).collect();
    masks.sort_by_key(|m| m.count_ones());

    let mut minimal: Vec<u32> = Vec::new();
    for m in masks {
        // Skip supersets of a set already kept.
        if minimal.iter().any(|&s| s & !m == 0) {
            continue;
        }
        let z: BTreeSet<NodeId> = (0..pool.len()).filter(|i| m >> i & 1 == 1).map(|i| pool[i]).collect();
        if is_valid_adjustment(dag, q, &z)? {
            minimal.push(m);
        }
    }
    let mut sets: Vec<BTreeSet<NodeId>> =
        minimal.into_iter().map(|m| (0..pool.len()).filter(|i| m >> i & 1 == 1).map(|i| pool[i]).collect()).collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| dag.sorted_names(a).cmp(&dag.sorted_names(b))));
    Ok(sets)
}
