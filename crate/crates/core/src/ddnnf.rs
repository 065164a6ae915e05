//! Certified dec-DNNF circuits: a DAG with one source, 0/1-sinks, binary
//! decision nodes and decomposable ∧-nodes, where every 0-sink carries a
//! clause label explaining why assignments reaching it are non-models.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::cnf::{Assignment, ClauseIdx, Var};

/// Position of a node in the circuit's node array.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(index: usize) -> NodeId {
        NodeId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One node of a certified dec-DNNF.
///
/// In a decision node `lo` is the 0-labeled outgoing edge and `hi` the
/// 1-labeled one. A 0-sink carries the 1-based index of the clause that every
/// assignment reaching it must falsify.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Node {
    TrueSink,
    FalseSink { clause: ClauseIdx },
    Decision { var: Var, lo: NodeId, hi: NodeId },
    And { left: NodeId, right: NodeId },
}

impl Node {
    pub fn is_sink(&self) -> bool {
        matches!(self, Node::TrueSink | Node::FalseSink { .. })
    }

    /// Outgoing edges, children first to last (lo/hi, left/right).
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let pair = match *self {
            Node::TrueSink | Node::FalseSink { .. } => [None, None],
            Node::Decision { lo, hi, .. } => [Some(lo), Some(hi)],
            Node::And { left, right } => [Some(left), Some(right)],
        };
        pair.into_iter().flatten()
    }
}

/// A certified dec-DNNF over the ambient variable set `1..=num_vars`.
///
/// The node array is expected in topological order (children before parents)
/// with the source last; [`validate_structure`] reports violations of that
/// and of the dec-DNNF syntactic restrictions rather than assuming them.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CertifiedDnnf {
    nodes: Vec<Node>,
    source: NodeId,
    num_vars: u32,
}

impl CertifiedDnnf {
    /// Wraps a node array; the source is the last node.
    ///
    /// Panics if `nodes` is empty or a decision variable exceeds `num_vars`.
    pub fn new(nodes: Vec<Node>, num_vars: u32) -> CertifiedDnnf {
        assert!(!nodes.is_empty(), "a dec-DNNF has at least one node");
        for node in &nodes {
            if let Node::Decision { var, .. } = node {
                assert!(
                    var.index() <= num_vars,
                    "decision variable {} above ambient set of {} variables",
                    var,
                    num_vars
                );
            }
            for child in node.children() {
                assert!(child.index() < nodes.len(), "child {} out of bounds", child);
            }
        }
        let source = NodeId::new(nodes.len() - 1);
        CertifiedDnnf {
            nodes,
            source,
            num_vars,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId::new)
    }

    /// The 0-sinks of the circuit with their clause labels.
    pub fn false_sinks(&self) -> impl Iterator<Item = (NodeId, ClauseIdx)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, node)| match node {
                Node::FalseSink { clause } => Some((NodeId::new(i), *clause)),
                _ => None,
            })
    }

    /// Number of edges: 2 per decision and ∧-node, 0 per sink.
    pub fn size(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| if n.is_sink() { 0 } else { 2 })
            .sum()
    }

    /// Bottom-up evaluation under a total assignment: 1 iff no path
    /// compatible with `t` reaches a 0-sink.
    ///
    /// Expects a structurally valid circuit.
    pub fn evaluate(&self, t: &Assignment) -> bool {
        let mut value = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            value[i] = match *node {
                Node::TrueSink => true,
                Node::FalseSink { .. } => false,
                Node::Decision { var, lo, hi } => {
                    let child = if t.value(var) { hi } else { lo };
                    value[child.index()]
                }
                Node::And { left, right } => value[left.index()] && value[right.index()],
            };
        }
        value[self.source.index()]
    }

    /// Sinks reachable from the source by paths compatible with `t`: at a
    /// decision only the `t(x)`-labeled edge may be crossed, at an ∧-node
    /// both. Sorted by node id.
    pub fn compatible_sinks(&self, t: &Assignment) -> Vec<NodeId> {
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        let mut stack = vec![self.source];
        let mut sinks = Vec::new();
        while let Some(id) = stack.pop() {
            if seen.put(id.index()) {
                continue;
            }
            match *self.node(id) {
                Node::TrueSink | Node::FalseSink { .. } => sinks.push(id),
                Node::Decision { var, lo, hi } => {
                    stack.push(if t.value(var) { hi } else { lo });
                }
                Node::And { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        sinks.sort_unstable();
        sinks
    }
}

/// Per-node sets of variables tested in the sub-DAG rooted at each node.
#[derive(Clone, Debug)]
pub struct VarSetTable {
    sets: Vec<FixedBitSet>,
    num_vars: u32,
}

impl VarSetTable {
    /// The variable set of the sub-DAG rooted at `id`; bit `v - 1` stands
    /// for variable `v`.
    pub fn vars(&self, id: NodeId) -> &FixedBitSet {
        &self.sets[id.index()]
    }

    pub fn contains(&self, id: NodeId, var: Var) -> bool {
        self.sets[id.index()].contains(var.index() as usize - 1)
    }

    pub fn count(&self, id: NodeId) -> usize {
        self.sets[id.index()].count_ones(..)
    }

    /// An empty set sized for this circuit, for callers building masks.
    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.num_vars as usize)
    }
}

/// Set of variables as a bitset; helper for building [`VarSetTable`]-shaped
/// masks out of explicit variable lists.
pub fn var_mask(num_vars: u32, vars: impl IntoIterator<Item = Var>) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(num_vars as usize);
    for v in vars {
        set.insert(v.index() as usize - 1);
    }
    set
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("node {node} has a child with an index not strictly below its own")]
pub struct TopologicalOrderError {
    pub node: NodeId,
}

/// Computes `vars(D(α))` for every node bottom-up.
///
/// Requires the node array to be topologically numbered; a child index at or
/// above its parent's is reported as an error.
pub fn compute_var_sets(d: &CertifiedDnnf) -> Result<VarSetTable, TopologicalOrderError> {
    let n = d.num_vars() as usize;
    let mut sets: Vec<FixedBitSet> = Vec::with_capacity(d.num_nodes());
    for (i, node) in d.nodes().iter().enumerate() {
        for child in node.children() {
            if child.index() >= i {
                return Err(TopologicalOrderError {
                    node: NodeId::new(i),
                });
            }
        }
        let set = match *node {
            Node::TrueSink | Node::FalseSink { .. } => FixedBitSet::with_capacity(n),
            Node::Decision { var, lo, hi } => {
                let mut set = sets[lo.index()].clone();
                set.union_with(&sets[hi.index()]);
                set.insert(var.index() as usize - 1);
                set
            }
            Node::And { left, right } => {
                let mut set = sets[left.index()].clone();
                set.union_with(&sets[right.index()]);
                set
            }
        };
        sets.push(set);
    }
    Ok(VarSetTable {
        sets,
        num_vars: d.num_vars(),
    })
}

/// Kinds of structural violations reported by [`validate_structure`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    /// A node other than the source has indegree 0, or the source has not.
    NotSingleSource,
    /// Node not reachable from the source.
    Unreachable,
    /// A decision variable is tested again below the same decision node.
    ReadOnceViolation,
    /// The children of an ∧-node test a common variable.
    DecomposabilityViolation,
    /// A child index is not strictly below its parent's.
    BadTopologicalOrder,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ViolationKind::NotSingleSource => "NotSingleSource",
            ViolationKind::Unreachable => "Unreachable",
            ViolationKind::ReadOnceViolation => "ReadOnceViolation",
            ViolationKind::DecomposabilityViolation => "DecomposabilityViolation",
            ViolationKind::BadTopologicalOrder => "BadTopologicalOrder",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct StructureViolation {
    pub kind: ViolationKind,
    pub node: NodeId,
    pub variable: Option<Var>,
}

impl fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} node {}", self.kind, self.node)?;
        if let Some(v) = self.variable {
            write!(f, " variable {}", v)?;
        }
        Ok(())
    }
}

/// Outcome of structural validation; valid iff no violations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StructureReport {
    pub violations: Vec<StructureViolation>,
}

impl StructureReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the dec-DNNF syntactic restrictions: topological numbering, a
/// unique indegree-0 node which is the source, reachability of every node,
/// read-once decisions and decomposable ∧-nodes.
///
/// Read-once is checked as `x ∉ vars(child)` per decision node, which is
/// equivalent to the per-path formulation because every node lies on a
/// source-sink path.
pub fn validate_structure(d: &CertifiedDnnf) -> StructureReport {
    let mut violations = Vec::new();

    let mut indegree = vec![0u32; d.num_nodes()];
    let mut bad_order = false;
    for (i, node) in d.nodes().iter().enumerate() {
        let mut ok = true;
        for child in node.children() {
            indegree[child.index()] += 1;
            if child.index() >= i {
                ok = false;
            }
        }
        if !ok {
            bad_order = true;
            violations.push(StructureViolation {
                kind: ViolationKind::BadTopologicalOrder,
                node: NodeId::new(i),
                variable: None,
            });
        }
    }

    if indegree[d.source().index()] != 0 {
        violations.push(StructureViolation {
            kind: ViolationKind::NotSingleSource,
            node: d.source(),
            variable: None,
        });
    }
    for id in d.node_ids() {
        if id != d.source() && indegree[id.index()] == 0 {
            violations.push(StructureViolation {
                kind: ViolationKind::NotSingleSource,
                node: id,
                variable: None,
            });
        }
    }

    // Reachability from the source; cycles cannot trap the scan because every
    // edge is followed at most once.
    let mut reachable = FixedBitSet::with_capacity(d.num_nodes());
    let mut stack = vec![d.source()];
    while let Some(id) = stack.pop() {
        if reachable.put(id.index()) {
            continue;
        }
        stack.extend(d.node(id).children());
    }
    for id in d.node_ids() {
        if !reachable.contains(id.index()) {
            violations.push(StructureViolation {
                kind: ViolationKind::Unreachable,
                node: id,
                variable: None,
            });
        }
    }

    // Variable sets need the topological order the scan above just checked.
    if !bad_order {
        let table = compute_var_sets(d).expect("order already verified");
        for (i, node) in d.nodes().iter().enumerate() {
            match *node {
                Node::Decision { var, lo, hi } => {
                    if table.contains(lo, var) || table.contains(hi, var) {
                        violations.push(StructureViolation {
                            kind: ViolationKind::ReadOnceViolation,
                            node: NodeId::new(i),
                            variable: Some(var),
                        });
                    }
                }
                Node::And { left, right } if !table.vars(left).is_disjoint(table.vars(right)) => {
                    let shared = table
                        .vars(left)
                        .intersection(table.vars(right))
                        .min()
                        .map(|b| Var::new(b as u32 + 1));
                    violations.push(StructureViolation {
                        kind: ViolationKind::DecomposabilityViolation,
                        node: NodeId::new(i),
                        variable: shared,
                    });
                }
                _ => {}
            }
        }
    }

    violations.sort_by_key(|v| (v.node, v.kind as u8));
    StructureReport { violations }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::cnf::Assignment;

    fn var(i: u32) -> Var {
        Var::new(i)
    }

    fn id(i: usize) -> NodeId {
        NodeId::new(i)
    }

    fn cl(i: u32) -> ClauseIdx {
        ClauseIdx::new(i)
    }

    /// Hand-built circuit computing x1 = x2 = x3: a decision on x1 at the
    /// source, then tests of x2 and x3 on both branches, sinks shared.
    pub(crate) fn equality_circuit() -> CertifiedDnnf {
        CertifiedDnnf::new(
            vec![
                Node::TrueSink,                    // 0
                Node::FalseSink { clause: cl(2) }, // 1: (¬x2 ∨ x3)
                Node::FalseSink { clause: cl(3) }, // 2: (¬x3 ∨ x1)
                Node::FalseSink { clause: cl(1) }, // 3: (¬x1 ∨ x2)
                Node::Decision {
                    var: var(3),
                    lo: id(1),
                    hi: id(0),
                }, // 4: x1=1, x2=1
                Node::Decision {
                    var: var(2),
                    lo: id(3),
                    hi: id(4),
                }, // 5: x1=1
                Node::Decision {
                    var: var(3),
                    lo: id(0),
                    hi: id(2),
                }, // 6: x1=0, x2=0
                Node::Decision {
                    var: var(3),
                    lo: id(1),
                    hi: id(2),
                }, // 7: x1=0, x2=1
                Node::Decision {
                    var: var(2),
                    lo: id(6),
                    hi: id(7),
                }, // 8: x1=0
                Node::Decision {
                    var: var(1),
                    lo: id(8),
                    hi: id(5),
                }, // 9: source
            ],
            3,
        )
    }

    fn asg(bits: &[u8]) -> Assignment {
        Assignment::new(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn var_sets_single_sink() {
        let d = CertifiedDnnf::new(vec![Node::TrueSink], 2);
        let table = compute_var_sets(&d).unwrap();
        assert_eq!(table.count(d.source()), 0);
    }

    #[test]
    fn var_sets_equality_circuit() {
        let d = equality_circuit();
        let table = compute_var_sets(&d).unwrap();
        let at_source: Vec<usize> = table.vars(d.source()).ones().collect();
        assert_eq!(at_source, [0, 1, 2]);
    }

    #[test]
    fn var_sets_and_of_disjoint_decisions() {
        let d = CertifiedDnnf::new(
            vec![
                Node::TrueSink,
                Node::FalseSink { clause: cl(1) },
                Node::Decision {
                    var: var(1),
                    lo: id(1),
                    hi: id(0),
                },
                Node::TrueSink,
                Node::FalseSink { clause: cl(2) },
                Node::Decision {
                    var: var(2),
                    lo: id(4),
                    hi: id(3),
                },
                Node::And {
                    left: id(2),
                    right: id(5),
                },
            ],
            2,
        );
        let table = compute_var_sets(&d).unwrap();
        let at_source: Vec<usize> = table.vars(d.source()).ones().collect();
        assert_eq!(at_source, [0, 1]);
    }

    #[test]
    fn var_sets_reject_forward_children() {
        let d = CertifiedDnnf {
            nodes: vec![
                Node::Decision {
                    var: var(1),
                    lo: id(1),
                    hi: id(1),
                },
                Node::TrueSink,
            ],
            source: id(1),
            num_vars: 1,
        };
        assert_eq!(
            compute_var_sets(&d).unwrap_err(),
            TopologicalOrderError { node: id(0) }
        );
    }

    #[test]
    fn validate_read_once_violation() {
        let d = CertifiedDnnf::new(
            vec![
                Node::TrueSink,
                Node::FalseSink { clause: cl(1) },
                Node::Decision {
                    var: var(1),
                    lo: id(1),
                    hi: id(0),
                },
                Node::TrueSink,
                Node::Decision {
                    var: var(1),
                    lo: id(2),
                    hi: id(3),
                },
            ],
            1,
        );
        let report = validate_structure(&d);
        assert!(!report.is_valid());
        assert_eq!(
            report.violations,
            vec![StructureViolation {
                kind: ViolationKind::ReadOnceViolation,
                node: id(4),
                variable: Some(var(1)),
            }]
        );
    }

    #[test]
    fn validate_decomposability_violation() {
        let d = CertifiedDnnf::new(
            vec![
                Node::TrueSink,
                Node::FalseSink { clause: cl(1) },
                Node::Decision {
                    var: var(1),
                    lo: id(1),
                    hi: id(0),
                },
                Node::TrueSink,
                Node::FalseSink { clause: cl(1) },
                Node::Decision {
                    var: var(1),
                    lo: id(3),
                    hi: id(4),
                },
                Node::And {
                    left: id(2),
                    right: id(5),
                },
            ],
            1,
        );
        let report = validate_structure(&d);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(
            report.violations[0].kind,
            ViolationKind::DecomposabilityViolation
        );
        assert_eq!(report.violations[0].node, id(6));
        assert_eq!(report.violations[0].variable, Some(var(1)));
    }

    #[test]
    fn validate_equality_circuit() {
        assert!(validate_structure(&equality_circuit()).is_valid());
    }

    #[test]
    fn validate_detects_second_source_and_unreachable() {
        let d = CertifiedDnnf::new(vec![Node::TrueSink, Node::TrueSink], 1);
        let report = validate_structure(&d);
        let kinds: Vec<ViolationKind> = report.violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::NotSingleSource));
        assert!(kinds.contains(&ViolationKind::Unreachable));
    }

    #[test]
    fn evaluate_equality_circuit() {
        let d = equality_circuit();
        assert!(!d.evaluate(&asg(&[0, 0, 1])));
        assert!(d.evaluate(&asg(&[1, 1, 1])));
        assert!(d.evaluate(&asg(&[0, 0, 0])));
        assert!(!d.evaluate(&asg(&[1, 0, 1])));
    }

    #[test]
    fn evaluate_single_false_sink() {
        let d = CertifiedDnnf::new(vec![Node::FalseSink { clause: cl(1) }], 2);
        for t in Assignment::enumerate(2) {
            assert!(!d.evaluate(&t));
        }
    }

    #[test]
    fn compatible_sinks_examples() {
        let d = equality_circuit();
        let reached = d.compatible_sinks(&asg(&[0, 0, 1]));
        assert!(reached
            .iter()
            .any(|&s| matches!(d.node(s), Node::FalseSink { .. })));

        let t = CertifiedDnnf::new(vec![Node::TrueSink], 1);
        assert_eq!(t.compatible_sinks(&asg(&[0])), vec![t.source()]);

        let pick = CertifiedDnnf::new(
            vec![
                Node::FalseSink { clause: cl(1) },
                Node::TrueSink,
                Node::Decision {
                    var: var(1),
                    lo: id(0),
                    hi: id(1),
                },
            ],
            1,
        );
        assert_eq!(pick.compatible_sinks(&asg(&[1])), vec![id(1)]);
    }

    #[test]
    fn size_counts_edges() {
        assert_eq!(CertifiedDnnf::new(vec![Node::TrueSink], 1).size(), 0);
        let one = CertifiedDnnf::new(
            vec![
                Node::TrueSink,
                Node::FalseSink { clause: cl(1) },
                Node::Decision {
                    var: var(1),
                    lo: id(1),
                    hi: id(0),
                },
            ],
            1,
        );
        assert_eq!(one.size(), 2);
        assert_eq!(equality_circuit().size(), 12);
    }

    #[test]
    fn var_sets_contain_children_sets() {
        let d = equality_circuit();
        let table = compute_var_sets(&d).unwrap();
        for id in d.node_ids() {
            for child in d.node(id).children() {
                assert!(table.vars(child).is_subset(table.vars(id)));
            }
        }
    }
}
