//! d-separation, computed two independent ways.
//!
//! [`d_separated_by_paths`] enumerates every simple path and applies
//! [`path_open`]; [`d_separated_by_reachability`] runs a Bayes-ball style
//! search over (node, arrival direction) states and never materialises a path.
//! [`d_separated`] is the reachability route.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::dag::{CausalDag, NodeId};
use crate::paths::{enumerate_paths, path_open, PathError};

fn check_query(dag: &CausalDag, x: NodeId, y: NodeId, z: &BTreeSet<NodeId>) -> Result<(), PathError> {
    if x == y {
        return Err(PathError::SameEndpoints);
    }
    for v in [x, y] {
        if z.contains(&v) {
            return Err(PathError::EndpointConditioned(dag.name(v).into()));
        }
    }
    Ok(())
}

pub fn d_separated(dag: &CausalDag, x: NodeId, y: NodeId, z: &BTreeSet<NodeId>) -> Result<bool, PathError> {
    d_separated_by_reachability(dag, x, y, z)
}

/// True iff every simple path between `x` and `y` is blocked by `z`.
pub fn d_separated_by_paths(dag: &CausalDag, x: NodeId, y: NodeId, z: &BTreeSet<NodeId>) -> Result<bool, PathError> {
    check_query(dag, x, y, z)?;
    for p in enumerate_paths(dag, x, y)? {
        if path_open(dag, &p, z)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff `y` is unreachable from `x` by an active trail given `z`.
pub fn d_separated_by_reachability(
    dag: &CausalDag,
    x: NodeId,
    y: NodeId,
    z: &BTreeSet<NodeId>,
) -> Result<bool, PathError> {
    check_query(dag, x, y, z)?;
    let n = dag.node_count();

    // Nodes that are in z or have a descendant in z: colliders there pass.
    let mut opens_collider = vec![false; n];
    let mut stack: Vec<NodeId> = z.iter().copied().collect();
    while let Some(v) = stack.pop() {
        if !opens_collider[v.0] {
            opens_collider[v.0] = true;
            stack.extend_from_slice(dag.parents(v));
        }
    }

    // `up`: arrived from a child (or the start); `down`: arrived from a parent.
    let mut seen_up = vec![false; n];
    let mut seen_down = vec![false; n];
    let mut queue: Vec<(NodeId, bool)> = vec![(x, true)];
    while let Some((v, up)) = queue.pop() {
        let seen = if up { &mut seen_up } else { &mut seen_down };
        if seen[v.0] {
            continue;
        }
        seen[v.0] = true;
        if v == y {
            return Ok(false);
        }
        let conditioned = z.contains(&v);
        if up {
            if !conditioned {
                queue.extend(dag.parents(v).iter().map(|&p| (p, true)));
                queue.extend(dag.children(v).iter().map(|&c| (c, false)));
            }
        } else {
            if !conditioned {
                queue.extend(dag.children(v).iter().map(|&c| (c, false)));
            }
            if opens_collider[v.0] {
                queue.extend(dag.parents(v).iter().map(|&p| (p, true)));
            }
        }
    }
    Ok(true)
}
