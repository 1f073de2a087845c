use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{CalibGraph, DisjointSets, NodeId};
use crate::error::{Error, Result};
use crate::lie::Pose;

/// Edge indices of the maximum-information spanning tree.
///
/// Edge weight is `trace(Ω)`. Ties go to the smaller `(from, to)` pair, then
/// to the earlier edge.
pub fn spanning_tree(graph: &CalibGraph) -> Result<Vec<usize>> {
    graph.check_connected()?;
    let edges = graph.edges();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&edges[a], &edges[b]);
        eb.information
            .trace()
            .total_cmp(&ea.information.trace())
            .then((ea.from, ea.to).cmp(&(eb.from, eb.to)))
            .then(a.cmp(&b))
    });
    let mut sets = DisjointSets::new(graph.nodes().len());
    let mut tree = Vec::with_capacity(graph.nodes().len().saturating_sub(1));
    for k in order {
        let e = &edges[k];
        let (a, b) = (graph.slot(e.from).unwrap(), graph.slot(e.to).unwrap());
        if sets.union(a, b) {
            tree.push(k);
        }
    }
    tree.sort_unstable();
    Ok(tree)
}

/// Initial guess by chaining measurements outward from `root` along the
/// spanning tree. The root is placed at the identity and fixed.
pub fn spanning_tree_init(graph: &CalibGraph, root: NodeId) -> Result<CalibGraph> {
    let root_slot = graph.slot(root).ok_or(Error::UnknownNode(root))?;
    let tree = spanning_tree(graph)?;
    let n = graph.nodes().len();
    let edges = graph.edges();

    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &k in &tree {
        adjacent[graph.slot(edges[k].from).unwrap()].push(k);
        adjacent[graph.slot(edges[k].to).unwrap()].push(k);
    }

    let mut poses: Vec<Option<Pose>> = vec![None; n];
    poses[root_slot] = Some(Pose::identity());
    let mut queue = VecDeque::from([root_slot]);
    while let Some(u) = queue.pop_front() {
        let pose_u = poses[u].unwrap();
        for &k in &adjacent[u] {
            let e = &edges[k];
            let (from, to) = (graph.slot(e.from).unwrap(), graph.slot(e.to).unwrap());
            let (v, step) = if from == u {
                (to, e.measurement)
            } else {
                (from, e.measurement.inverse())
            };
            if poses[v].is_none() {
                poses[v] = Some(pose_u * step);
                queue.push_back(v);
            }
        }
    }

    let mut out = graph.clone();
    for (node, pose) in out.nodes.iter_mut().zip(poses) {
        node.pose = pose.expect("spanning tree reaches every node");
    }
    out.nodes[root_slot].fixed = true;
    Ok(out)
}
