//! Simple paths between two nodes and the rule deciding whether a path is open.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dag::{CausalDag, NodeId};

/// Orientation of one edge as the path walks over it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// `a -> b`
    Forward,
    /// `a <- b`
    Backward,
}

impl Direction {
    fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Structure of an interior path node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Chain,
    Fork,
    Collider,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Chain => "chain",
            NodeKind::Fork => "fork",
            NodeKind::Collider => "collider",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("path endpoint `{0}` is in the conditioning set")]
    EndpointConditioned(String),
    #[error("path step {0} does not follow an edge of the graph")]
    InvalidStep(usize),
    #[error("a path needs at least two distinct nodes")]
    TooShort,
    #[error("path revisits node `{0}`")]
    RepeatedNode(String),
    #[error("path query needs two different nodes")]
    SameEndpoints,
}

/// A simple path `v0 .. vk` with the orientation of each of its `k` edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    nodes: Vec<NodeId>,
    directions: Vec<Direction>,
}

impl Path {
    /// Builds the path through `nodes`, reading each edge orientation off the graph.
    pub fn through(dag: &CausalDag, nodes: &[NodeId]) -> Result<Self, PathError> {
        if nodes.len() < 2 {
            return Err(PathError::TooShort);
        }
        let mut seen = BTreeSet::new();
        for &v in nodes {
            if !seen.insert(v) {
                return Err(PathError::RepeatedNode(dag.name(v).into()));
            }
        }
        let directions = nodes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                if dag.has_edge(w[0], w[1]) {
                    Ok(Direction::Forward)
                } else if dag.has_edge(w[1], w[0]) {
                    Ok(Direction::Backward)
                } else {
                    Err(PathError::InvalidStep(i))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Path { nodes: nodes.to_vec(), directions })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn end(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Interior nodes with their classification, in path order.
    pub fn interior(&self) -> impl Iterator<Item = (NodeId, NodeKind)> + '_ {
        (1..self.nodes.len() - 1).map(move |i| (self.nodes[i], self.kind_at(i)))
    }

    /// Classification of interior position `i` (`0 < i < k`).
    pub fn kind_at(&self, i: usize) -> NodeKind {
        match (self.directions[i - 1], self.directions[i]) {
            (Direction::Forward, Direction::Backward) => NodeKind::Collider,
            (Direction::Backward, Direction::Forward) => NodeKind::Fork,
            _ => NodeKind::Chain,
        }
    }

    /// Every edge points away from the start.
    pub fn is_causal(&self) -> bool {
        self.directions.iter().all(|&d| d == Direction::Forward)
    }

    /// The first edge points into the start.
    pub fn is_backdoor(&self) -> bool {
        self.directions[0] == Direction::Backward
    }

    /// The same path walked from the other end.
    pub fn reversed(&self) -> Path {
        Path {
            nodes: self.nodes.iter().rev().copied().collect(),
            directions: self.directions.iter().rev().map(|d| d.flip()).collect(),
        }
    }

    fn name_key<'a>(&self, dag: &'a CausalDag) -> Vec<&'a str> {
        self.nodes.iter().map(|&v| dag.name(v)).collect()
    }

    /// `a <- b -> c` rendering.
    pub fn display<'a>(&'a self, dag: &'a CausalDag) -> PathDisplay<'a> {
        PathDisplay { path: self, dag }
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    dag: &'a CausalDag,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dag.name(self.path.nodes[0]))?;
        for (d, v) in self.path.directions.iter().zip(&self.path.nodes[1..]) {
            let arrow = match d {
                Direction::Forward => " -> ",
                Direction::Backward => " <- ",
            };
            write!(f, "{arrow}{}", self.dag.name(*v))?;
        }
        Ok(())
    }
}

/// All simple paths between `x` and `y`, sorted lexicographically by node names.
pub fn enumerate_paths(dag: &CausalDag, x: NodeId, y: NodeId) -> Result<Vec<Path>, PathError> {
    if x == y {
        return Err(PathError::SameEndpoints);
    }
    let n = dag.node_count();
    let neighbours: Vec<Vec<(NodeId, Direction)>> = dag
        .nodes()
        .map(|v| {
            let mut nb: Vec<(NodeId, Direction)> = dag
                .children(v)
                .iter()
                .map(|&c| (c, Direction::Forward))
                .chain(dag.parents(v).iter().map(|&p| (p, Direction::Backward)))
                .collect();
            nb.sort_by(|a, b| dag.name(a.0).cmp(dag.name(b.0)));
            nb
        })
        .collect();

    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    let mut nodes = vec![x];
    let mut dirs = Vec::new();
    on_path[x.0] = true;
    // Explicit stack of neighbour cursors keeps deep graphs off the call stack.
    let mut cursor = vec![0usize];
    while let Some(&i) = cursor.last() {
        let v = *nodes.last().unwrap();
        match neighbours[v.0].get(i) {
            Some(&(w, d)) => {
                *cursor.last_mut().unwrap() += 1;
                if on_path[w.0] {
                    continue;
                }
                if w == y {
                    let mut p = nodes.clone();
                    p.push(w);
                    let mut ds = dirs.clone();
                    ds.push(d);
                    out.push(Path { nodes: p, directions: ds });
                    continue;
                }
                on_path[w.0] = true;
                nodes.push(w);
                dirs.push(d);
                cursor.push(0);
            }
            None => {
                cursor.pop();
                on_path[v.0] = false;
                nodes.pop();
                dirs.pop();
            }
        }
    }
    out.sort_by(|a, b| a.name_key(dag).cmp(&b.name_key(dag)));
    Ok(out)
}

/// Paths from `treatment` to `outcome` whose first edge points into the treatment.
pub fn backdoor_paths(dag: &CausalDag, treatment: NodeId, outcome: NodeId) -> Result<Vec<Path>, PathError> {
    Ok(enumerate_paths(dag, treatment, outcome)?.into_iter().filter(Path::is_backdoor).collect())
}

/// Whether association flows along `path` given the conditioning set `z`.
///
/// A chain or fork node blocks iff it is in `z`. A collider passes iff it or
/// one of its descendants is in `z`.
pub fn path_open(dag: &CausalDag, path: &Path, z: &BTreeSet<NodeId>) -> Result<bool, PathError> {
    for end in [path.start(), path.end()] {
        if z.contains(&end) {
            return Err(PathError::EndpointConditioned(dag.name(end).into()));
        }
    }
    for (i, w) in path.nodes.windows(2).enumerate() {
        let ok = match path.directions[i] {
            Direction::Forward => dag.has_edge(w[0], w[1]),
            Direction::Backward => dag.has_edge(w[1], w[0]),
        };
        if !ok {
            return Err(PathError::InvalidStep(i));
        }
    }
    Ok(path.interior().all(|(v, kind)| match kind {
        NodeKind::Collider => z.contains(&v) || dag.descendants(v).iter().any(|d| z.contains(d)),
        NodeKind::Chain | NodeKind::Fork => !z.contains(&v),
    }))
}
