//! A simulation scenario: a model, one shared sample, and a list of analyses.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dag::{CausalDag, DagError, Role};
use crate::dataset::{Dataset, DatasetError, SelectionRule};
use crate::estimate::{Analysis, EffectEstimate, EstimateError};
use crate::rng::mix;
use crate::scm::{sample, StructuralModel};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRequest {
    /// Row label; defaults to the method's label.
    pub label: Option<String>,
    pub analysis: Analysis,
    /// Bootstrap master seed; when absent it is derived from the scenario
    /// seed and the request's position (see [`Scenario::bootstrap_seed`]).
    pub bootstrap_seed: Option<u64>,
}

impl AnalysisRequest {
    pub fn new(analysis: Analysis) -> Self {
        AnalysisRequest { label: None, analysis, bootstrap_seed: None }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.analysis.method.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: StructuralModel,
    /// Edges drawn in the diagram but deliberately absent from the
    /// simulation (a deleted treatment effect).
    pub analysis_edges: Vec<(String, String)>,
    pub roles: Vec<(String, Role)>,
    pub sample_size: usize,
    pub seed: u64,
    pub selection: Option<SelectionRule>,
    pub analyses: Vec<AnalysisRequest>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("analysis {index}: unknown column `{column}`")]
    UnknownColumn { index: usize, column: String },
    #[error("selection uses unknown node `{0}`")]
    UnknownSelectionNode(String),
    #[error("analysis edge {0} -> {1} is already a simulated edge")]
    AnalysisEdgeSimulated(String, String),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// The outcome of one analysis request.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub index: usize,
    pub label: String,
    pub adjustment: Vec<String>,
    pub result: Result<EffectEstimate, EstimateError>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub title: String,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn failures(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.result.is_err())
    }

    pub fn all_ok(&self) -> bool {
        self.failures().next().is_none()
    }
}

impl Scenario {
    pub fn new(name: &str, model: StructuralModel, sample_size: usize, seed: u64) -> Self {
        Scenario {
            name: name.to_string(),
            model,
            analysis_edges: Vec::new(),
            roles: Vec::new(),
            sample_size,
            seed,
            selection: None,
            analyses: Vec::new(),
        }
    }

    /// The diagram: simulated edges, analysis-only edges and role annotations.
    pub fn dag(&self) -> Result<CausalDag, ScenarioError> {
        let mut b = self.model.to_dag().to_builder();
        for (p, c) in &self.analysis_edges {
            if b.edges.iter().any(|(q, d)| q == p && d == c) {
                return Err(ScenarioError::AnalysisEdgeSimulated(p.clone(), c.clone()));
            }
            b = b.edge(p.as_str(), c.as_str());
        }
        for (n, r) in &self.roles {
            b = b.role(n.as_str(), *r);
        }
        Ok(b.build()?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let dag = self.dag()?;
        if dag.node_count() != self.model.len() {
            // An analysis edge or role introduced a node the model lacks.
            let extra = dag.names().iter().find(|n| self.model.position(n).is_err()).cloned().unwrap_or_default();
            return Err(DagError::UnknownNode(extra).into());
        }
        if let Some(s) = &self.selection {
            if self.model.position(&s.node).is_err() {
                return Err(ScenarioError::UnknownSelectionNode(s.node.clone()));
            }
            if s.value > 1 {
                return Err(DatasetError::SelectionValue(s.value).into());
            }
        }
        for (index, req) in self.analyses.iter().enumerate() {
            for c in req.analysis.columns() {
                if self.model.position(c).is_err() {
                    return Err(ScenarioError::UnknownColumn { index, column: c.to_string() });
                }
            }
        }
        Ok(())
    }

    /// Bootstrap seed of analysis `index`: the explicit one, or a stream of
    /// the complemented scenario seed so it never coincides with the
    /// per-row sampling streams.
    pub fn bootstrap_seed(&self, index: usize) -> u64 {
        self.analyses[index].bootstrap_seed.unwrap_or_else(|| mix(!self.seed, index as u64))
    }

    /// The shared dataset: a sample of `sample_size` rows, then the selection.
    pub fn data(&self) -> Result<Dataset, ScenarioError> {
        let d = sample(&self.model, self.sample_size, self.seed);
        Ok(match &self.selection {
            Some(rule) => d.apply_selection(rule)?,
            None => d,
        })
    }

    /// Runs every analysis on one shared dataset.
    pub fn run(&self) -> Result<ResultTable, ScenarioError> {
        self.validate()?;
        let d = self.data()?;
        Ok(self.run_on(&d))
    }

    /// Runs every analysis on `d`; failures are kept per row.
    pub fn run_on(&self, d: &Dataset) -> ResultTable {
        let rows = self
            .analyses
            .iter()
            .enumerate()
            .map(|(index, req)| {
                let mut a = req.analysis.clone();
                a.bootstrap.seed = self.bootstrap_seed(index);
                ResultRow { index, label: req.label().to_string(), adjustment: a.adjust.clone(), result: a.run(d) }
            })
            .collect();
        ResultTable { title: self.name.clone(), rows }
    }
}
