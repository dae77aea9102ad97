//! Binary structural causal models.
//!
//! Each node is Bernoulli with success probability
//! `intercept + Σ coef_j · parent_j`, the parents being earlier nodes.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::dag::{CausalDag, DagBuilder, DagError};
use crate::dataset::{Dataset, DatasetError, SelectionRule};
use crate::rng::Stream;

/// Largest model that [`enumerate_population`] will expand (2^24 rows).
pub const MAX_ENUMERATED_NODES: usize = 24;

/// Rounding slack when checking that probabilities stay inside `[0, 1]`.
const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScmError {
    #[error("node `{0}` has more than one equation")]
    DuplicateNode(String),
    #[error("`{node}` lists unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },
    #[error("`{node}` lists parent `{parent}`, which is declared after it")]
    ParentOrderViolation { node: String, parent: String },
    #[error("`{node}` lists parent `{parent}` twice")]
    DuplicateParent { node: String, parent: String },
    #[error("success probability of `{node}` is {probability} when {}", format_config(.config))]
    ProbabilityOutOfRange { node: String, config: Vec<(String, u8)>, probability: f64 },
    #[error("{0} nodes is too many to enumerate (limit {MAX_ENUMERATED_NODES})")]
    TooManyNodes(usize),
    #[error("selection {node} = {value} has probability zero")]
    EmptySelection { node: String, value: u8 },
    #[error("`{0}` is constant, so one treatment arm has probability zero")]
    DegenerateTreatment(String),
    #[error("outcome risk is zero in the untreated arm")]
    ZeroControlRisk,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

fn format_config(config: &[(String, u8)]) -> String {
    if config.is_empty() {
        return "it has no parents".into();
    }
    let mut s = String::new();
    for (i, (n, v)) in config.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(n);
        s.push('=');
        s.push(if *v == 1 { '1' } else { '0' });
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub node: String,
    pub intercept: f64,
    /// `(parent, coefficient)` in declaration order.
    pub parents: Vec<(String, f64)>,
}

impl Equation {
    pub fn new(node: impl Into<String>, intercept: f64) -> Self {
        Equation { node: node.into(), intercept, parents: Vec::new() }
    }

    pub fn parent(mut self, name: impl Into<String>, coef: f64) -> Self {
        self.parents.push((name.into(), coef));
        self
    }
}

/// A validated model, equations in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralModel {
    equations: Vec<Equation>,
    /// For each equation: (parent position, coefficient).
    compiled: Vec<Vec<(usize, f64)>>,
}

impl StructuralModel {
    pub fn new(equations: Vec<Equation>) -> Result<Self, ScmError> {
        let compiled = compile(&equations)?;
        for (k, eq) in equations.iter().enumerate() {
            let (mut lo, mut hi) = (eq.intercept, eq.intercept);
            let (mut lo_cfg, mut hi_cfg) = (Vec::new(), Vec::new());
            for &(p, c) in &compiled[k] {
                let name = equations[p].node.clone();
                lo += c.min(0.0);
                hi += c.max(0.0);
                lo_cfg.push((name.clone(), (c < 0.0) as u8));
                hi_cfg.push((name, (c > 0.0) as u8));
            }
            for (prob, cfg) in [(lo, lo_cfg), (hi, hi_cfg)] {
                if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&prob) {
                    return Err(ScmError::ProbabilityOutOfRange {
                        node: eq.node.clone(),
                        config: cfg,
                        probability: prob,
                    });
                }
            }
        }
        Ok(StructuralModel { equations, compiled })
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn node_names(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.node.clone()).collect()
    }

    pub fn position(&self, node: &str) -> Result<usize, ScmError> {
        self.equations.iter().position(|e| e.node == node).ok_or_else(|| ScmError::UnknownNode(node.to_string()))
    }

    /// Success probability of node `k` given earlier values in `row`.
    #[inline]
    pub fn probability(&self, k: usize, row: &[u8]) -> f64 {
        self.compiled[k]
            .iter()
            .fold(self.equations[k].intercept, |acc, &(p, c)| acc + c * row[p] as f64)
            .clamp(0.0, 1.0)
    }

    /// The parent graph, nodes in equation order.
    pub fn to_dag(&self) -> CausalDag {
        self.dag_builder().build().expect("validated model is acyclic")
    }

    fn dag_builder(&self) -> DagBuilder {
        let mut b = DagBuilder::new();
        for e in &self.equations {
            b = b.node(e.node.clone());
        }
        for e in &self.equations {
            for (p, _) in &e.parents {
                b.edges.push((p.clone(), e.node.clone()));
            }
        }
        b
    }

    /// Whether the model's parent graph has exactly the nodes and edges of `dag`.
    pub fn realizes(&self, dag: &CausalDag) -> bool {
        let ours: BTreeSet<(String, String)> = self.dag_builder().edges.into_iter().collect();
        let theirs: BTreeSet<(String, String)> = dag.to_builder().edges.into_iter().collect();
        let our_nodes: BTreeSet<&String> = self.equations.iter().map(|e| &e.node).collect();
        let their_nodes: BTreeSet<&String> = dag.names().iter().collect();
        ours == theirs && our_nodes == their_nodes
    }
}

fn compile(equations: &[Equation]) -> Result<Vec<Vec<(usize, f64)>>, ScmError> {
    let mut out = Vec::with_capacity(equations.len());
    for (k, eq) in equations.iter().enumerate() {
        if equations[..k].iter().any(|e| e.node == eq.node) {
            return Err(ScmError::DuplicateNode(eq.node.clone()));
        }
        let mut row = Vec::with_capacity(eq.parents.len());
        for (j, (p, c)) in eq.parents.iter().enumerate() {
            if eq.parents[..j].iter().any(|(q, _)| q == p) {
                return Err(ScmError::DuplicateParent { node: eq.node.clone(), parent: p.clone() });
            }
            match equations.iter().position(|e| &e.node == p) {
                Some(i) if i < k => row.push((i, *c)),
                Some(_) => return Err(ScmError::ParentOrderViolation { node: eq.node.clone(), parent: p.clone() }),
                None => return Err(ScmError::UnknownParent { node: eq.node.clone(), parent: p.clone() }),
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Validates raw equations without keeping the model.
pub fn validate_model(equations: &[Equation]) -> Result<(), ScmError> {
    StructuralModel::new(equations.to_vec()).map(|_| ())
}

/// Draws `n` rows.
///
/// Row `i` reads its uniforms from sub-stream `i` of `seed`, one draw per node
/// in equation order; a node is 1 iff its draw is below its success
/// probability. Any split of the row range reproduces the same data.
pub fn sample(m: &StructuralModel, n: usize, seed: u64) -> Dataset {
    sample_range(m, 0..n, seed)
}

/// Rows `range` of the dataset [`sample`] would produce.
pub fn sample_range(m: &StructuralModel, range: Range<usize>, seed: u64) -> Dataset {
    let k = m.len();
    let mut values = vec![0u8; range.len() * k];
    for (chunk, i) in values.chunks_exact_mut(k.max(1)).zip(range) {
        let mut rng = Stream::substream(seed, i as u64);
        for j in 0..k {
            let p = m.probability(j, chunk);
            chunk[j] = (rng.uniform() < p) as u8;
        }
    }
    Dataset::from_raw(m.node_names(), values, None)
}

/// Every joint configuration weighted by its exact probability, optionally
/// conditioned on a selection event (weights renormalised to sum to one).
///
/// Rows run in binary counting order with the first equation as the most
/// significant bit.
pub fn enumerate_population(m: &StructuralModel, selection: Option<&SelectionRule>) -> Result<Dataset, ScmError> {
    let k = m.len();
    if k > MAX_ENUMERATED_NODES {
        return Err(ScmError::TooManyNodes(k));
    }
    let sel = match selection {
        Some(rule) => Some((m.position(&rule.node)?, rule.value)),
        None => None,
    };
    let mut values = Vec::with_capacity(k << k);
    let mut weights = Vec::with_capacity(1 << k);
    let mut row = vec![0u8; k];
    for code in 0..(1usize << k) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (code >> (k - 1 - j) & 1) as u8;
        }
        if let Some((j, v)) = sel {
            if row[j] != v {
                continue;
            }
        }
        let w = (0..k).fold(1.0, |acc, j| {
            let p = m.probability(j, &row);
            acc * if row[j] == 1 { p } else { 1.0 - p }
        });
        values.extend_from_slice(&row);
        weights.push(w);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        let rule = selection.expect("unconditioned joint sums to one");
        return Err(ScmError::EmptySelection { node: rule.node.clone(), value: rule.value });
    }
    if selection.is_some() {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(Dataset::from_raw(m.node_names(), values, Some(weights)))
}

/// Exact `P(outcome=1 | treatment=1) / P(outcome=1 | treatment=0)`.
pub fn population_risk_ratio(
    m: &StructuralModel,
    treatment: &str,
    outcome: &str,
    selection: Option<&SelectionRule>,
) -> Result<f64, ScmError> {
    let pop = enumerate_population(m, selection)?;
    let (t, y) = (pop.column_index(treatment)?, pop.column_index(outcome)?);
    let mut mass = [0.0f64; 2];
    let mut hits = [0.0f64; 2];
    for i in 0..pop.n_rows() {
        let a = pop.get(i, t) as usize;
        mass[a] += pop.weight(i);
        hits[a] += pop.weight(i) * pop.get(i, y) as f64;
    }
    if mass[0] <= 0.0 || mass[1] <= 0.0 {
        return Err(ScmError::DegenerateTreatment(treatment.to_string()));
    }
    if hits[0] <= 0.0 {
        return Err(ScmError::ZeroControlRisk);
    }
    Ok((hits[1] / mass[1]) / (hits[0] / mass[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn out_of_range_intercept() {
        let err = StructuralModel::new(vec![Equation::new("X", 1.2)]).unwrap_err();
        assert!(matches!(err, ScmError::ProbabilityOutOfRange { ref node, .. } if node == "X"));
    }

    #[test]
    fn offending_configuration_is_reported() {
        let eqs = vec![
            Equation::new("A", 0.5),
            Equation::new("B", 0.5),
            Equation::new("Y", 0.5).parent("A", 0.4).parent("B", -0.3),
        ];
        assert!(validate_model(&eqs).is_ok());
        let mut bad = eqs.clone();
        bad[2].parents[0].1 = 0.6;
        match validate_model(&bad).unwrap_err() {
            ScmError::ProbabilityOutOfRange { node, config, probability } => {
                assert_eq!(node, "Y");
                assert_eq!(config, [("A".to_string(), 1), ("B".to_string(), 0)]);
                assert!((probability - 1.1).abs() < 1e-12);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        let later = vec![Equation::new("A", 0.5).parent("B", 0.1), Equation::new("B", 0.5)];
        assert!(matches!(validate_model(&later), Err(ScmError::ParentOrderViolation { .. })));
        let unknown = vec![Equation::new("A", 0.5).parent("Q", 0.1)];
        assert!(matches!(validate_model(&unknown), Err(ScmError::UnknownParent { .. })));
        let dup = vec![Equation::new("A", 0.5), Equation::new("A", 0.5)];
        assert!(matches!(validate_model(&dup), Err(ScmError::DuplicateNode(_))));
    }

    #[test]
    fn conduct_entry_extremes() {
        // Bern(0.65 - 0.3E - 0.3I + 0.3G) over all 8 parent configurations.
        let m = fixtures::case_study_model();
        let k = m.position("conduct_entry").unwrap();
        let (e, i, g) = (
            m.position("parent_education").unwrap(),
            m.position("carer_interaction").unwrap(),
            m.position("genetic").unwrap(),
        );
        let mut seen = Vec::new();
        for code in 0..8u8 {
            let mut row = vec![0u8; m.len()];
            row[e] = code & 1;
            row[i] = code >> 1 & 1;
            row[g] = code >> 2 & 1;
            seen.push(m.probability(k, &row));
        }
        let lo = seen.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = seen.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - 0.05).abs() < 1e-12 && (hi - 0.95).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_has_columns() {
        let m = fixtures::confounder_model();
        let d = sample(&m, 0, 1);
        assert!(d.is_empty());
        assert_eq!(d.columns(), ["C", "A", "B"]);
    }

    #[test]
    fn split_sampling_matches_serial() {
        let m = fixtures::case_study_model();
        let whole = sample(&m, 1000, 99);
        let (a, b) = (sample_range(&m, 0..400, 99), sample_range(&m, 400..1000, 99));
        for i in 0..1000 {
            let part = if i < 400 { a.row(i) } else { b.row(i - 400) };
            assert_eq!(whole.row(i), part);
        }
    }

    #[test]
    fn confounder_population() {
        let m = fixtures::confounder_model();
        let pop = enumerate_population(&m, None).unwrap();
        assert_eq!(pop.n_rows(), 8);
        // Last row is C=1, A=1, B=1: 0.5 * 0.75 * 0.75.
        assert!((pop.weight(7) - 0.28125).abs() < 1e-15);
        assert!((pop.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impossible_selection_is_an_error() {
        let m = StructuralModel::new(vec![Equation::new("Z", 0.0), Equation::new("Y", 0.3)]).unwrap();
        assert!(matches!(
            enumerate_population(&m, Some(&SelectionRule::new("Z", 1))),
            Err(ScmError::EmptySelection { .. })
        ));
        assert!(matches!(population_risk_ratio(&m, "Z", "Y", None), Err(ScmError::DegenerateTreatment(_))));
    }
}
