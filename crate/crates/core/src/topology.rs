//! Rooted-tree and star-graph topologies.
//!
//! The distribution process consumes the height / predecessor / successor
//! structure of a tree rooted at one end-node. Nodes are dense integers
//! `0..node_count`, and the channel id of an edge is its index in the edge
//! list.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// A connected acyclic network with a designated root, a bipartition of the
/// nodes into end-nodes and intermediate nodes, and precomputed BFS
/// structure (heights, predecessors, successor lists, level sets).
#[derive(Debug, Clone)]
pub struct RootedTree {
    node_count: usize,
    root: NodeId,
    edges: Vec<(NodeId, NodeId)>,
    end_nodes: BTreeSet<NodeId>,
    heights: Vec<usize>,
    parents: Vec<Option<NodeId>>,
    successors: Vec<Vec<NodeId>>,
    levels: Vec<Vec<NodeId>>,
    h_max: usize,
}

impl RootedTree {
    /// Validate and build a rooted tree from an edge list.
    ///
    /// Requires `edges.len() == node_count - 1`, connectivity from the root,
    /// and that `end_nodes` together with its complement partition the node
    /// set. The root must be an end-node (the distribution schemes measure
    /// the root's retained qubits).
    pub fn build(
        node_count: usize,
        root: NodeId,
        edges: Vec<(NodeId, NodeId)>,
        end_nodes: BTreeSet<NodeId>,
    ) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::InvalidTopology(format!(
                "need at least 2 nodes, got {node_count}"
            )));
        }
        if root >= node_count {
            return Err(Error::InvalidTopology(format!(
                "root {root} out of range for {node_count} nodes"
            )));
        }
        if edges.len() != node_count - 1 {
            return Err(Error::InvalidTopology(format!(
                "a tree on {node_count} nodes has {} edges, got {}",
                node_count - 1,
                edges.len()
            )));
        }
        for &(u, v) in &edges {
            if u >= node_count || v >= node_count {
                return Err(Error::InvalidTopology(format!(
                    "edge ({u}, {v}) references a node out of range"
                )));
            }
            if u == v {
                return Err(Error::InvalidTopology(format!("self-loop on node {u}")));
            }
        }
        for v in &end_nodes {
            if *v >= node_count {
                return Err(Error::InvalidTopology(format!(
                    "end-node {v} out of range"
                )));
            }
        }
        if !end_nodes.contains(&root) {
            return Err(Error::InvalidTopology(format!(
                "root {root} must be an end-node"
            )));
        }

        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }

        // BFS from the root; the hop distance is the height.
        let mut heights = vec![usize::MAX; node_count];
        let mut parents = vec![None; node_count];
        heights[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &adjacency[v] {
                if heights[u] == usize::MAX {
                    heights[u] = heights[v] + 1;
                    parents[u] = Some(v);
                    queue.push_back(u);
                }
            }
        }
        if heights.iter().any(|&h| h == usize::MAX) {
            return Err(Error::InvalidTopology(
                "graph is not connected from the root".into(),
            ));
        }

        let h_max = heights.iter().copied().max().unwrap();
        let mut successors = vec![Vec::new(); node_count];
        for v in 0..node_count {
            if let Some(p) = parents[v] {
                successors[p].push(v);
            }
        }
        // Deterministic qubit assignment requires a fixed iteration order.
        for list in successors.iter_mut() {
            list.sort_unstable();
        }
        let mut levels = vec![Vec::new(); h_max + 1];
        for v in 0..node_count {
            levels[heights[v]].push(v);
        }

        Ok(Self {
            node_count,
            root,
            edges,
            end_nodes,
            heights,
            parents,
            successors,
            levels,
            h_max,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn end_nodes(&self) -> &BTreeSet<NodeId> {
        &self.end_nodes
    }

    pub fn intermediate_nodes(&self) -> BTreeSet<NodeId> {
        (0..self.node_count)
            .filter(|v| !self.end_nodes.contains(v))
            .collect()
    }

    pub fn is_end_node(&self, v: NodeId) -> bool {
        self.end_nodes.contains(&v)
    }

    /// Hop distance from the root.
    pub fn height(&self, v: NodeId) -> usize {
        self.heights[v]
    }

    pub fn h_max(&self) -> usize {
        self.h_max
    }

    /// Nodes at height `k`, ascending by label.
    pub fn level(&self, k: usize) -> &[NodeId] {
        &self.levels[k]
    }

    /// Nodes at the maximum height.
    pub fn leaves(&self) -> &[NodeId] {
        &self.levels[self.h_max]
    }

    pub fn predecessor(&self, v: NodeId) -> Result<NodeId> {
        self.parents[v].ok_or(Error::NoPredecessor { node: v })
    }

    /// Neighbors one hop further from the root, ascending by label.
    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        &self.successors[v]
    }

    /// Index (= channel id) of the edge joining `u` and `v`, in either
    /// orientation.
    pub fn edge_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.edges
            .iter()
            .position(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    }

    /// Childless nodes whose height is below `h_max`. Such nodes hold a
    /// received qubit but fall outside the leaf set; the tree is usable but
    /// the condition is worth surfacing to callers.
    pub fn dangling_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count)
            .filter(|&v| {
                v != self.root && self.successors[v].is_empty() && self.heights[v] < self.h_max
            })
            .collect()
    }

    /// True when some end-node sits below the maximum height, so the leaf
    /// set does not cover all measuring nodes.
    pub fn has_irregular_end_nodes(&self) -> bool {
        self.end_nodes
            .iter()
            .any(|&v| v != self.root && self.heights[v] < self.h_max)
    }
}

/// Star network: end-nodes `0..n`, intermediate node `n`, channel `j`
/// connecting end-node `j` to the center. Rooted at end-node 0.
#[derive(Debug, Clone)]
pub struct StarTopology {
    n: usize,
    tree: RootedTree,
}

impl StarTopology {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> NodeId {
        self.n
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// End-nodes other than the root, i.e. the measuring leaves `1..n`.
    pub fn leaf_nodes(&self) -> impl Iterator<Item = NodeId> {
        1..self.n
    }
}

/// Build the star with `n` end-nodes; channel `j` is edge `(j, n)`.
pub fn build_star(n: usize) -> Result<StarTopology> {
    if n < 2 {
        return Err(Error::InvalidTopology(format!(
            "a star needs at least 2 end-nodes, got {n}"
        )));
    }
    let edges = (0..n).map(|j| (j, n)).collect();
    let end_nodes = (0..n).collect();
    let tree = RootedTree::build(n + 1, 0, edges, end_nodes)?;
    Ok(StarTopology { n, tree })
}

/// Build a general rooted tree. Star construction is the common case; this
/// is the escape hatch for custom topologies.
pub fn build_tree(
    node_count: usize,
    root: NodeId,
    edges: Vec<(NodeId, NodeId)>,
    end_nodes: BTreeSet<NodeId>,
) -> Result<RootedTree> {
    RootedTree::build(node_count, root, edges, end_nodes)
}
