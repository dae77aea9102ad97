//! Line-based DAG text format.
//!
//! ```text
//! # comment
//! node <name>
//! edge <parent> <child>
//! treatment <name>
//! outcome <name>
//! conditioned <name>
//! latent <name>
//! ```
//!
//! Nodes named by edges need no `node` line.

use std::collections::BTreeSet;
use std::fmt::Write;

use causalkit_core::dag::{DagBuilder, DagError, Role};
use causalkit_core::CausalDag;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DagFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Semantic { line: usize, source: DagError },
    #[error(transparent)]
    Graph(#[from] DagError),
}

fn role_keyword(word: &str) -> Option<Role> {
    match word {
        "treatment" => Some(Role::Treatment),
        "outcome" => Some(Role::Outcome),
        "conditioned" => Some(Role::Conditioned),
        "latent" => Some(Role::Latent),
        _ => None,
    }
}

pub fn parse_dag(text: &str) -> Result<CausalDag, DagFileError> {
    let mut b = DagBuilder::new();
    let mut known: BTreeSet<String> = BTreeSet::new();
    let mut explicit: BTreeSet<String> = BTreeSet::new();
    let mut edges: BTreeSet<(String, String)> = BTreeSet::new();
    let mut roles: Vec<(usize, String, Role)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        let Some((&head, args)) = words.split_first() else {
            continue;
        };
        let syntax = |message: String| DagFileError::Syntax { line, message };
        let semantic = |source: DagError| DagFileError::Semantic { line, source };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(format!("`{head}` takes {n} name(s), got {}", args.len())))
            }
        };
        match head {
            "node" => {
                arity(1)?;
                let n = args[0];
                if !explicit.insert(n.to_string()) {
                    return Err(semantic(DagError::DuplicateNode(n.into())));
                }
                if known.insert(n.to_string()) {
                    b = b.node(n);
                }
            }
            "edge" => {
                arity(2)?;
                let (p, c) = (args[0], args[1]);
                if p == c {
                    return Err(semantic(DagError::SelfLoop(p.into())));
                }
                if !edges.insert((p.into(), c.into())) {
                    return Err(semantic(DagError::DuplicateEdge { parent: p.into(), child: c.into() }));
                }
                for n in [p, c] {
                    if known.insert(n.to_string()) {
                        b = b.node(n);
                    }
                }
                b = b.edge(p, c);
            }
            word => match role_keyword(word) {
                Some(role) => {
                    arity(1)?;
                    roles.push((line, args[0].to_string(), role));
                }
                None => return Err(syntax(format!("unknown directive `{word}`"))),
            },
        }
    }

    // Roles are applied after all nodes are known, one at a time so a
    // conflict is reported at the line that introduced it.
    for (line, name, role) in roles {
        if !known.contains(&name) {
            return Err(DagFileError::Semantic { line, source: DagError::UnknownNode(name) });
        }
        b = b.role(name, role);
        b.validate().map_err(|source| match source {
            DagError::CycleDetected(_) => DagFileError::Graph(source),
            source => DagFileError::Semantic { line, source },
        })?;
    }
    Ok(b.build()?)
}

/// Canonical text: nodes, roles and edges, each block sorted by name.
pub fn to_dag_text(dag: &CausalDag) -> String {
    let mut out = String::new();
    let mut names: Vec<&String> = dag.names().iter().collect();
    names.sort();
    for n in &names {
        writeln!(out, "node {n}").unwrap();
    }
    for role in [Role::Treatment, Role::Outcome, Role::Conditioned, Role::Latent] {
        for n in dag.sorted_names(&dag.nodes_with_role(role)) {
            writeln!(out, "{} {n}", role.keyword()).unwrap();
        }
    }
    let mut edges: Vec<(&str, &str)> = dag.edges().iter().map(|&(p, c)| (dag.name(p), dag.name(c))).collect();
    edges.sort();
    for (p, c) in edges {
        writeln!(out, "edge {p} {c}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_file() {
        let dag = parse_dag("edge A B\n# nothing else\n").unwrap();
        assert_eq!(dag.node_count(), 2);
        assert_eq!(dag.edge_count(), 1);
    }

    #[test]
    fn self_loop_reports_its_line() {
        let err = parse_dag("node A\n\nedge A A\n").unwrap_err();
        assert_eq!(err, DagFileError::Semantic { line: 3, source: DagError::SelfLoop("A".into()) });
    }

    #[test]
    fn second_treatment_is_reported_where_it_appears() {
        let err = parse_dag("edge A B\ntreatment A\ntreatment B\n").unwrap_err();
        assert!(matches!(err, DagFileError::Semantic { line: 3, source: DagError::DuplicateRole { .. } }));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_dag("edge A\n"), Err(DagFileError::Syntax { line: 1, .. })));
        assert!(matches!(parse_dag("arrow A B\n"), Err(DagFileError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_dag("edge A B\ntreatment C\n"),
            Err(DagFileError::Semantic { line: 2, source: DagError::UnknownNode(_) })
        ));
    }

    #[test]
    fn cycles_are_graph_errors() {
        assert!(matches!(parse_dag("edge A B\nedge B A\n"), Err(DagFileError::Graph(DagError::CycleDetected(_)))));
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "edge Z A # trailing comment\nnode M\ntreatment Z\nedge A Y\noutcome Y\nlatent M\n";
        let dag = parse_dag(text).unwrap();
        let canon = to_dag_text(&dag);
        assert_eq!(canon, "node A\nnode M\nnode Y\nnode Z\ntreatment Z\noutcome Y\nlatent M\nedge A Y\nedge Z A\n");
        assert_eq!(to_dag_text(&parse_dag(&canon).unwrap()), canon);
    }
}
