//! Causal diagrams: named nodes, directed edges and role annotations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Index of a node inside a [`CausalDag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// What a node stands for in the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Role {
    Treatment,
    Outcome,
    /// Conditioned on by design, e.g. a selection node the data was restricted on.
    Conditioned,
    /// Not measured; never eligible for adjustment.
    Latent,
    #[default]
    Plain,
}

impl Role {
    pub fn keyword(self) -> &'static str {
        match self {
            Role::Treatment => "treatment",
            Role::Outcome => "outcome",
            Role::Conditioned => "conditioned",
            Role::Latent => "latent",
            Role::Plain => "node",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DagError {
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("node `{0}` declared more than once")]
    DuplicateNode(String),
    #[error("edge {parent} -> {child} refers to an undeclared node")]
    UnknownEdgeEndpoint { parent: String, child: String },
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {parent} -> {child}")]
    DuplicateEdge { parent: String, child: String },
    #[error("more than one {role} node: `{first}` and `{second}`")]
    DuplicateRole { role: &'static str, first: String, second: String },
    #[error("node `{node}` given conflicting roles {first} and {second}")]
    ConflictingRole { node: String, first: &'static str, second: &'static str },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// Unvalidated graph description. [`DagBuilder::build`] checks every
/// invariant and produces a [`CausalDag`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DagBuilder {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub roles: Vec<(String, Role)>,
}

impl DagBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: impl Into<String>) -> Self {
        self.nodes.push(name.into());
        self
    }

    /// Adds an edge, declaring either endpoint that has not been seen yet.
    pub fn edge(mut self, parent: impl Into<String>, child: impl Into<String>) -> Self {
        let (p, c) = (parent.into(), child.into());
        for n in [&p, &c] {
            if !self.nodes.iter().any(|x| x == n) {
                self.nodes.push(n.clone());
            }
        }
        self.edges.push((p, c));
        self
    }

    pub fn role(mut self, name: impl Into<String>, role: Role) -> Self {
        self.roles.push((name.into(), role));
        self
    }

    /// Checks all invariants, reporting the first violation found.
    pub fn validate(&self) -> Result<(), DagError> {
        self.clone().build().map(|_| ())
    }

    pub fn build(self) -> Result<CausalDag, DagError> {
        let mut index = BTreeMap::new();
        for (i, name) in self.nodes.iter().enumerate() {
            if index.insert(name.clone(), NodeId(i)).is_some() {
                return Err(DagError::DuplicateNode(name.clone()));
            }
        }
        let n = self.nodes.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen = BTreeSet::new();
        for (p, c) in &self.edges {
            if p == c {
                return Err(DagError::SelfLoop(p.clone()));
            }
            let (Some(&pi), Some(&ci)) = (index.get(p), index.get(c)) else {
                return Err(DagError::UnknownEdgeEndpoint { parent: p.clone(), child: c.clone() });
            };
            if !seen.insert((pi, ci)) {
                return Err(DagError::DuplicateEdge { parent: p.clone(), child: c.clone() });
            }
            parents[ci.0].push(pi);
            children[pi.0].push(ci);
            edges.push((pi, ci));
        }

        let mut roles = vec![Role::Plain; n];
        for (name, role) in &self.roles {
            let id = *index.get(name).ok_or_else(|| DagError::UnknownNode(name.clone()))?;
            let current = roles[id.0];
            if current != Role::Plain && current != *role {
                return Err(DagError::ConflictingRole {
                    node: name.clone(),
                    first: current.keyword(),
                    second: role.keyword(),
                });
            }
            if matches!(role, Role::Treatment | Role::Outcome) {
                if let Some(other) = roles.iter().position(|r| r == role) {
                    if other != id.0 {
                        return Err(DagError::DuplicateRole {
                            role: role.keyword(),
                            first: self.nodes[other].clone(),
                            second: name.clone(),
                        });
                    }
                }
            }
            roles[id.0] = *role;
        }

        // Neighbour lists are kept in name order so every traversal is deterministic.
        let by_name = |v: &mut Vec<NodeId>| v.sort_by(|a, b| self.nodes[a.0].cmp(&self.nodes[b.0]));
        parents.iter_mut().for_each(by_name);
        children.iter_mut().for_each(by_name);

        let dag = CausalDag { names: self.nodes, index, edges, parents, children, roles };
        if let Some(cycle) = dag.find_cycle() {
            return Err(DagError::CycleDetected(cycle.into_iter().map(|v| dag.name(v).to_string()).collect()));
        }
        Ok(dag)
    }
}

/// A validated directed acyclic graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDag {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    roles: Vec<Role>,
}

impl CausalDag {
    pub fn builder() -> DagBuilder {
        DagBuilder::new()
    }

    /// Builds a graph from edges alone; nodes are declared in order of appearance.
    pub fn from_edges(edges: &[(&str, &str)]) -> Result<Self, DagError> {
        edges.iter().fold(DagBuilder::new(), |b, (p, c)| b.edge(*p, *c)).build()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<NodeId, DagError> {
        self.id(name).ok_or_else(|| DagError::UnknownNode(name.to_string()))
    }

    pub fn require_all<'a, I>(&self, names: I) -> Result<BTreeSet<NodeId>, DagError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names.into_iter().map(|n| self.require(n)).collect()
    }

    /// Edges in declaration order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn has_edge(&self, parent: NodeId, child: NodeId) -> bool {
        self.children[parent.0].contains(&child)
    }

    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v.0]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.0]
    }

    pub fn role(&self, v: NodeId) -> Role {
        self.roles[v.0]
    }

    pub fn nodes_with_role(&self, role: Role) -> BTreeSet<NodeId> {
        self.nodes().filter(|&v| self.role(v) == role).collect()
    }

    pub fn treatment(&self) -> Option<NodeId> {
        self.nodes().find(|&v| self.role(v) == Role::Treatment)
    }

    pub fn outcome(&self) -> Option<NodeId> {
        self.nodes().find(|&v| self.role(v) == Role::Outcome)
    }

    /// Strict descendants of `v`.
    pub fn descendants(&self, v: NodeId) -> BTreeSet<NodeId> {
        self.closure(v, &self.children)
    }

    /// Strict ancestors of `v`.
    pub fn ancestors(&self, v: NodeId) -> BTreeSet<NodeId> {
        self.closure(v, &self.parents)
    }

    fn closure(&self, v: NodeId, adj: &[Vec<NodeId>]) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in &adj[u.0] {
                if out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Kahn's algorithm, ties broken by declaration order.
    pub fn topological_order(&self) -> Vec<NodeId> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<NodeId> = self.nodes().filter(|v| indeg[v.0] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v.0] {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Copy of the graph with one edge deleted. Roles are kept.
    pub fn without_edge(&self, parent: &str, child: &str) -> Result<Self, DagError> {
        let (p, c) = (self.require(parent)?, self.require(child)?);
        let mut b = self.to_builder();
        b.edges.retain(|(a, z)| !(self.id(a) == Some(p) && self.id(z) == Some(c)));
        b.build()
    }

    pub fn to_builder(&self) -> DagBuilder {
        DagBuilder {
            nodes: self.names.clone(),
            edges: self.edges.iter().map(|&(p, c)| (self.name(p).to_string(), self.name(c).to_string())).collect(),
            roles: self
                .nodes()
                .filter(|&v| self.role(v) != Role::Plain)
                .map(|v| (self.name(v).to_string(), self.role(v)))
                .collect(),
        }
    }

    /// Sorts a node set by name, the ordering used in every report.
    pub fn sorted_names(&self, set: &BTreeSet<NodeId>) -> Vec<&str> {
        let mut v: Vec<&str> = set.iter().map(|&n| self.name(n)).collect();
        v.sort_unstable();
        v
    }

    /// `{a, b}` rendering of a node set, names sorted.
    pub fn format_set(&self, set: &BTreeSet<NodeId>) -> String {
        let mut s = String::from("{");
        for (i, n) in self.sorted_names(set).iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(n);
        }
        s.push('}');
        s
    }

    fn find_cycle(&self) -> Option<Vec<NodeId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark = vec![Mark::New; self.node_count()];
        let mut stack: Vec<NodeId> = Vec::new();
        // Iterative DFS: (node, next child index).
        for root in self.nodes() {
            if mark[root.0] != Mark::New {
                continue;
            }
            let mut frames = vec![(root, 0usize)];
            mark[root.0] = Mark::Active;
            stack.push(root);
            while let Some(&(v, next)) = frames.last() {
                if let Some(&c) = self.children[v.0].get(next) {
                    frames.last_mut().unwrap().1 += 1;
                    match mark[c.0] {
                        Mark::Active => {
                            let start = stack.iter().position(|&s| s == c).unwrap();
                            return Some(stack[start..].to_vec());
                        }
                        Mark::New => {
                            mark[c.0] = Mark::Active;
                            stack.push(c);
                            frames.push((c, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[v.0] = Mark::Done;
                    stack.pop();
                    frames.pop();
                }
            }
        }
        None
    }
}

impl fmt::Display for CausalDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in &self.edges {
            writeln!(f, "{} -> {}", self.name(*p), self.name(*c))?;
        }
        Ok(())
    }
}
