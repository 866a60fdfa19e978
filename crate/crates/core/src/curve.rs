//! Nodal curves encoded by their decorated dual graph.
//!
//! Components are vertices carrying a geometric genus, nodes are edges. Multi-edges
//! (two components meeting at several points) and self-loops (a component with a
//! self-node) are both allowed. Node identity is the position in the node list.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Result, StabilityError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub genus: u32,
}

/// An unordered pair of component indices; `a == b` encodes a self-node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub a: usize,
    pub b: usize,
}

impl Node {
    pub fn new(x: usize, y: usize) -> Self {
        Node {
            a: x.min(y),
            b: x.max(y),
        }
    }

    pub fn is_self_node(&self) -> bool {
        self.a == self.b
    }

    pub fn touches(&self, component: usize) -> bool {
        self.a == component || self.b == component
    }

    /// The endpoint opposite to `component`, if the node touches it.
    pub fn other(&self, component: usize) -> Option<usize> {
        if self.a == component {
            Some(self.b)
        } else if self.b == component {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodalCurve {
    components: Vec<Component>,
    nodes: Vec<Node>,
}

impl NodalCurve {
    /// Builds a curve from labelled components and label pairs.
    pub fn new<S: Into<String>>(
        components: impl IntoIterator<Item = (S, u32)>,
        nodes: impl IntoIterator<Item = (S, S)>,
    ) -> Result<Self> {
        let components: Vec<Component> = components
            .into_iter()
            .map(|(label, genus)| Component {
                label: label.into(),
                genus,
            })
            .collect();
        let mut resolved = Vec::new();
        for (x, y) in nodes {
            let (x, y) = (x.into(), y.into());
            let find = |l: &str| {
                components
                    .iter()
                    .position(|c| c.label == l)
                    .ok_or_else(|| StabilityError::UnknownComponent(l.to_string()))
            };
            resolved.push(Node::new(find(&x)?, find(&y)?));
        }
        Self::from_parts(components, resolved)
    }

    pub fn from_parts(components: Vec<Component>, nodes: Vec<Node>) -> Result<Self> {
        if components.is_empty() {
            return Err(StabilityError::InvalidCurve("no components".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &components {
            if c.label.is_empty() {
                return Err(StabilityError::InvalidCurve("empty component label".into()));
            }
            if !seen.insert(c.label.as_str()) {
                return Err(StabilityError::InvalidCurve(format!(
                    "duplicate component label `{}`",
                    c.label
                )));
            }
        }
        for (k, n) in nodes.iter().enumerate() {
            if n.b >= components.len() {
                return Err(StabilityError::InvalidCurve(format!(
                    "node {k} refers to a missing component"
                )));
            }
        }
        let nodes = nodes.into_iter().map(|n| Node::new(n.a, n.b)).collect();
        let curve = NodalCurve { components, nodes };
        if !curve.is_connected_on(&(0..curve.components.len()).collect::<Vec<_>>(), None) {
            return Err(StabilityError::InvalidCurve("dual graph is disconnected".into()));
        }
        Ok(curve)
    }

    /// A chain `Y1 - Y2 - ... - Yn` of the given genera, labelled `Y1..Yn`.
    pub fn chain(genera: &[u32]) -> Result<Self> {
        let comps = genera
            .iter()
            .enumerate()
            .map(|(i, &g)| Component {
                label: format!("Y{}", i + 1),
                genus: g,
            })
            .collect();
        let nodes = (1..genera.len()).map(|i| Node::new(i - 1, i)).collect();
        Self::from_parts(comps, nodes)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn genus(&self, component: usize) -> u32 {
        self.components[component].genus
    }

    pub fn label(&self, component: usize) -> &str {
        &self.components[component].label
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.components.iter().position(|c| c.label == label)
    }

    pub fn node(&self, node: usize) -> Result<Node> {
        self.nodes
            .get(node)
            .copied()
            .ok_or(StabilityError::UnknownNode(node))
    }

    pub fn has_self_nodes(&self) -> bool {
        self.nodes.iter().any(Node::is_self_node)
    }

    /// `p_a = Σ g_i + #nodes − #components + 1`.
    pub fn arithmetic_genus(&self) -> i64 {
        let genera: i64 = self.components.iter().map(|c| i64::from(c.genus)).sum();
        genera + self.nodes.len() as i64 - self.components.len() as i64 + 1
    }

    /// `χ(O_X) = Σ (1 − g_i) − #nodes`.
    pub fn structure_sheaf_chi(&self) -> i64 {
        let local: i64 = self
            .components
            .iter()
            .map(|c| 1 - i64::from(c.genus))
            .sum();
        local - self.nodes.len() as i64
    }

    pub fn is_compact_type(&self) -> bool {
        if self.nodes.len() + 1 != self.components.len() {
            return false;
        }
        let mut pairs = BTreeSet::new();
        self.nodes
            .iter()
            .all(|n| !n.is_self_node() && pairs.insert((n.a, n.b)))
    }

    /// Number of nodes joining two distinct components `i` and `j`.
    pub fn nodes_between(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 0;
        }
        let key = Node::new(i, j);
        self.nodes.iter().filter(|n| **n == key).count()
    }

    /// Intersection numbers `Y_i · Y_j` of the components in a regular
    /// one-parameter smoothing whose special fiber is this curve.
    pub fn intersection_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.components.len();
        let mut m = vec![vec![0i64; n]; n];
        for node in self.nodes.iter().filter(|n| !n.is_self_node()) {
            m[node.a][node.b] += 1;
            m[node.b][node.a] += 1;
            m[node.a][node.a] -= 1;
            m[node.b][node.b] -= 1;
        }
        m
    }

    fn is_connected_on(&self, vertices: &[usize], skip_node: Option<usize>) -> bool {
        let Some(&start) = vertices.first() else {
            return false;
        };
        let inside: BTreeSet<usize> = vertices.iter().copied().collect();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for (k, n) in self.nodes.iter().enumerate() {
                if Some(k) == skip_node {
                    continue;
                }
                if let Some(w) = n.other(v) {
                    if inside.contains(&w) && seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.len() == inside.len()
    }

    /// Components reachable from `start` without crossing `skip_node`.
    fn reachable_without(&self, start: usize, skip_node: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for (k, n) in self.nodes.iter().enumerate() {
                if k == skip_node {
                    continue;
                }
                if let Some(w) = n.other(v) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen
    }

    /// Splits the curve at a separating node into the side containing the
    /// node's first endpoint and the other side.
    pub fn split_at_node(&self, node: usize) -> Result<(Subcurve, Subcurve)> {
        let n = self.node(node)?;
        if n.is_self_node() {
            return Err(StabilityError::NotSeparating(node));
        }
        let left = self.reachable_without(n.a, node);
        if left.contains(&n.b) {
            return Err(StabilityError::NotSeparating(node));
        }
        let right: Vec<usize> = (0..self.components.len())
            .filter(|i| !left.contains(i))
            .collect();
        Ok((
            Subcurve {
                selected: left.into_iter().collect(),
            },
            Subcurve { selected: right },
        ))
    }

    /// Indices of the nodes that separate the curve.
    pub fn separating_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&k| self.split_at_node(k).is_ok())
            .collect()
    }

    /// Replaces a node by a chain of `length` rational components.
    ///
    /// New components are appended after the existing ones. The node at
    /// position `node` becomes the edge from its first endpoint to the first
    /// new component; the remaining chain edges are appended.
    pub fn insert_rational_chain(&self, node: usize, length: usize) -> Result<NodalCurve> {
        let n = self.node(node)?;
        if length == 0 {
            return Err(StabilityError::Precondition(
                "rational chain length must be at least 1".into(),
            ));
        }
        let mut components = self.components.clone();
        let base = components.len();
        for j in 0..length {
            let stem = format!("{}~{}#{}.{}", self.label(n.a), self.label(n.b), node, j + 1);
            let mut label = stem.clone();
            let mut bump = 1;
            while components.iter().any(|c| c.label == label) {
                bump += 1;
                label = format!("{stem}_{bump}");
            }
            components.push(Component { label, genus: 0 });
        }
        let mut nodes = self.nodes.clone();
        nodes[node] = Node::new(n.a, base);
        for j in 1..length {
            nodes.push(Node::new(base + j - 1, base + j));
        }
        nodes.push(Node::new(base + length - 1, n.b));
        Self::from_parts(components, nodes)
    }

    /// The curve induced on a subcurve, with interior nodes kept in their
    /// original order. Also returns the original index of every kept node.
    pub fn induced(&self, sub: &Subcurve) -> Result<(NodalCurve, Vec<usize>)> {
        sub.check(self)?;
        let position = |i: usize| sub.selected.iter().position(|&s| s == i);
        let components = sub
            .selected
            .iter()
            .map(|&i| self.components[i].clone())
            .collect();
        let mut nodes = Vec::new();
        let mut origin = Vec::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if let (Some(a), Some(b)) = (position(n.a), position(n.b)) {
                nodes.push(Node::new(a, b));
                origin.push(k);
            }
        }
        Ok((Self::from_parts(components, nodes)?, origin))
    }
}

/// A connected union of components of a curve.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subcurve {
    selected: Vec<usize>,
}

impl Subcurve {
    pub fn new(curve: &NodalCurve, selected: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = selected.into_iter().collect();
        let sub = Subcurve {
            selected: set.into_iter().collect(),
        };
        sub.check(curve)?;
        Ok(sub)
    }

    pub fn from_labels(curve: &NodalCurve, labels: &[&str]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| {
                curve
                    .index_of(l)
                    .ok_or_else(|| StabilityError::UnknownComponent(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(curve, idx)
    }

    pub fn components(&self) -> &[usize] {
        &self.selected
    }

    pub fn contains(&self, component: usize) -> bool {
        self.selected.binary_search(&component).is_ok()
    }

    pub fn labels<'a>(&self, curve: &'a NodalCurve) -> Vec<&'a str> {
        self.selected.iter().map(|&i| curve.label(i)).collect()
    }

    fn check(&self, curve: &NodalCurve) -> Result<()> {
        if self.selected.is_empty() {
            return Err(StabilityError::InvalidSubcurve("empty selection".into()));
        }
        if self.selected.iter().any(|&i| i >= curve.component_count()) {
            return Err(StabilityError::InvalidSubcurve(
                "component index out of range".into(),
            ));
        }
        if !curve.is_connected_on(&self.selected, None) {
            return Err(StabilityError::InvalidSubcurve(
                "selected components are not connected".into(),
            ));
        }
        Ok(())
    }
}
