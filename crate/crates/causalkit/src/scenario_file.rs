//! JSON scenario files.
//!
//! ```json
//! {
//!   "name": "confounder",
//!   "nodes": [
//!     {"name": "C", "intercept": 0.5},
//!     {"name": "A", "intercept": 0.25, "parents": {"C": 0.5}},
//!     {"name": "B", "intercept": 0.25, "parents": {"C": 0.5}}
//!   ],
//!   "roles": {"A": "treatment", "B": "outcome"},
//!   "analysis_edges": [],
//!   "sample_size": 10000,
//!   "seed": 1,
//!   "selection": {"node": "C", "value": 1},
//!   "analyses": [
//!     {"method": "outcome_regression", "treatment": "A", "outcome": "B", "adjust": ["C"],
//!      "family": "poisson", "label": "B ~ A + C"}
//!   ]
//! }
//! ```
//!
//! Unknown keys are rejected everywhere. Parent order is kept as written.

use causalkit_core::bootstrap::{BootstrapSpec, DEFAULT_LEVEL, DEFAULT_REPLICATES};
use causalkit_core::dag::Role;
use causalkit_core::estimate::{Analysis, Method, OutcomeFamily};
use causalkit_core::scenario::{AnalysisRequest, Scenario, ScenarioError};
use causalkit_core::scm::{Equation, ScmError, StructuralModel};
use causalkit_core::SelectionRule;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("scenario syntax: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("node `{node}`: parent `{parent}` needs a numeric coefficient")]
    Coefficient { node: String, parent: String },
    #[error("unknown role `{0}` (expected treatment, outcome, conditioned or latent)")]
    Role(String),
    #[error(transparent)]
    Model(#[from] ScmError),
    #[error(transparent)]
    Semantic(#[from] ScenarioError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub intercept: f64,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub parents: Map<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapFile {
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub method: Method,
    pub treatment: String,
    pub outcome: String,
    #[serde(default)]
    pub adjust: Vec<String>,
    #[serde(default)]
    pub interactions: bool,
    #[serde(default)]
    pub family: OutcomeFamily,
    #[serde(default)]
    pub bootstrap: Option<BootstrapFile>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub roles: Map<String, Value>,
    #[serde(default)]
    pub analysis_edges: Vec<(String, String)>,
    pub sample_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub selection: Option<SelectionRule>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
}

impl ScenarioSpec {
    pub fn into_scenario(self) -> Result<Scenario, ScenarioFileError> {
        let mut equations = Vec::with_capacity(self.nodes.len());
        for n in self.nodes {
            let mut eq = Equation::new(n.name.clone(), n.intercept);
            for (p, v) in n.parents {
                let coef = v
                    .as_f64()
                    .ok_or_else(|| ScenarioFileError::Coefficient { node: n.name.clone(), parent: p.clone() })?;
                eq = eq.parent(p, coef);
            }
            equations.push(eq);
        }
        let model = StructuralModel::new(equations)?;
        let mut roles = Vec::with_capacity(self.roles.len());
        for (name, v) in self.roles {
            let role = match v.as_str() {
                Some("treatment") => Role::Treatment,
                Some("outcome") => Role::Outcome,
                Some("conditioned") => Role::Conditioned,
                Some("latent") => Role::Latent,
                _ => return Err(ScenarioFileError::Role(v.to_string())),
            };
            roles.push((name, role));
        }
        let analyses = self
            .analyses
            .into_iter()
            .map(|a| {
                let adjust: Vec<&str> = a.adjust.iter().map(String::as_str).collect();
                let (bs, seed) = match &a.bootstrap {
                    Some(b) => {
                        let mut bs = BootstrapSpec::new(b.replicates, 0);
                        bs.level = b.level;
                        (bs, b.seed)
                    }
                    None => (BootstrapSpec::default(), None),
                };
                AnalysisRequest {
                    label: a.label.clone(),
                    analysis: Analysis::new(a.method, &a.treatment, &a.outcome, &adjust)
                        .with_interactions(a.interactions)
                        .with_family(a.family)
                        .with_bootstrap(bs),
                    bootstrap_seed: seed,
                }
            })
            .collect();
        let s = Scenario {
            name: self.name,
            model,
            analysis_edges: self.analysis_edges,
            roles,
            sample_size: self.sample_size,
            seed: self.seed,
            selection: self.selection,
            analyses,
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioFileError> {
    serde_json::from_str::<ScenarioSpec>(text)?.into_scenario()
}
