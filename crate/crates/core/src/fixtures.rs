//! Built-in graphs and models: the childcare case study, its building
//! blocks, and the three-node confounder / mediator / collider models.

use alloc::vec;

use crate::dag::{CausalDag, Role};
use crate::scm::{Equation, StructuralModel};

pub const TREATMENT: &str = "childcare";
pub const OUTCOME: &str = "conduct_school";

/// Case-study edges without the treatment → outcome effect.
const CASE_STUDY_EDGES: [(&str, &str); 10] = [
    ("parent_education", "carer_interaction"),
    ("parent_education", "conduct_entry"),
    ("carer_interaction", "conduct_entry"),
    ("genetic", "conduct_entry"),
    ("conduct_entry", "childcare"),
    ("childcare", "weekend_playgroup"),
    ("parent_education", "weekend_playgroup"),
    ("parent_education", "conduct_school"),
    ("conduct_entry", "conduct_school"),
    ("carer_interaction", "conduct_school"),
];

fn case_study(with_effect: bool) -> CausalDag {
    let mut b = CausalDag::builder();
    for n in
        ["genetic", "parent_education", "carer_interaction", "conduct_entry", TREATMENT, "weekend_playgroup", OUTCOME]
    {
        b = b.node(n);
    }
    for (p, c) in CASE_STUDY_EDGES {
        b = b.edge(p, c);
    }
    if with_effect {
        b = b.edge(TREATMENT, OUTCOME);
    }
    b.role(TREATMENT, Role::Treatment).role(OUTCOME, Role::Outcome).build().expect("case-study graph is valid")
}

/// The full case-study diagram, childcare → conduct_school included.
pub fn case_study_dag() -> CausalDag {
    case_study(true)
}

/// The diagram the case-study data are simulated from: no treatment effect.
pub fn no_effect_dag() -> CausalDag {
    case_study(false)
}

/// The simulation model for the case study (childcare has no effect).
pub fn case_study_model() -> StructuralModel {
    StructuralModel::new(vec![
        Equation::new("genetic", 0.1),
        Equation::new("parent_education", 0.9),
        Equation::new("carer_interaction", 0.1).parent("parent_education", 0.85),
        Equation::new("conduct_entry", 0.65)
            .parent("parent_education", -0.3)
            .parent("carer_interaction", -0.3)
            .parent("genetic", 0.3),
        Equation::new(TREATMENT, 0.25).parent("conduct_entry", 0.5),
        Equation::new("weekend_playgroup", 0.1).parent(TREATMENT, 0.34).parent("parent_education", 0.54),
        Equation::new(OUTCOME, 0.65)
            .parent("parent_education", -0.3)
            .parent("conduct_entry", 0.3)
            .parent("carer_interaction", -0.3),
    ])
    .expect("case-study model is valid")
}

fn triple(edges: &[(&str, &str)]) -> CausalDag {
    let mut b = CausalDag::builder().node("A").node("B").node("C");
    for &(p, c) in edges {
        b = b.edge(p, c);
    }
    b.build().expect("three-node graph is valid")
}

/// C is a common cause of A and B.
pub fn fork_dag() -> CausalDag {
    triple(&[("C", "A"), ("C", "B")])
}

/// A and B both cause C.
pub fn collider_dag() -> CausalDag {
    triple(&[("A", "C"), ("B", "C")])
}

/// A causes B through C.
pub fn chain_dag() -> CausalDag {
    triple(&[("A", "C"), ("C", "B")])
}

/// Finances drive both structural and process quality; only process quality
/// affects development.
pub fn quality_dag() -> CausalDag {
    CausalDag::from_edges(&[
        ("finances", "structural_quality"),
        ("finances", "process_quality"),
        ("process_quality", "development"),
    ])
    .expect("quality graph is valid")
}

/// Every built-in graph with a short name.
pub fn all_dags() -> [(&'static str, CausalDag); 6] {
    [
        ("fork", fork_dag()),
        ("collider", collider_dag()),
        ("chain", chain_dag()),
        ("quality", quality_dag()),
        ("case_study", case_study_dag()),
        ("no_effect", no_effect_dag()),
    ]
}

/// C confounds A and B; A has no effect on B.
pub fn confounder_model() -> StructuralModel {
    StructuralModel::new(vec![
        Equation::new("C", 0.5),
        Equation::new("A", 0.25).parent("C", 0.5),
        Equation::new("B", 0.25).parent("C", 0.5),
    ])
    .expect("confounder model is valid")
}

/// A affects B only through C.
pub fn mediator_model() -> StructuralModel {
    StructuralModel::new(vec![
        Equation::new("A", 0.5),
        Equation::new("C", 0.25).parent("A", 0.5),
        Equation::new("B", 0.25).parent("C", 0.5),
    ])
    .expect("mediator model is valid")
}

/// A and B are independent causes of C.
pub fn collider_model() -> StructuralModel {
    StructuralModel::new(vec![
        Equation::new("A", 0.1),
        Equation::new("B", 0.1),
        Equation::new("C", 0.15).parent("A", 0.4).parent("B", 0.4),
    ])
    .expect("collider model is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_realize_their_graphs() {
        assert!(case_study_model().realizes(&no_effect_dag()));
        assert!(!case_study_model().realizes(&case_study_dag()));
        assert!(confounder_model().realizes(&fork_dag()));
        assert!(mediator_model().realizes(&chain_dag()));
        assert!(collider_model().realizes(&collider_dag()));
    }

    #[test]
    fn sizes() {
        assert_eq!(case_study_dag().node_count(), 7);
        assert_eq!(case_study_dag().edge_count(), 11);
        assert_eq!(no_effect_dag().edge_count(), 10);
    }
}
