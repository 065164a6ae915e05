//! A proof-producing exhaustive-DPLL model counter: compiles a CNF into a
//! certified dec-DNNF accepted by the checker.
//!
//! The search branches on variables (decision nodes), splits variable-disjoint
//! residual components (decomposable ∧-nodes), emits a 1-sink when no clause
//! remains active, and a 0-sink labeled with the violated clause's original
//! index otherwise. No unit propagation and no clause learning: decisions
//! only, so the trace stays inside the dec-DNNF fragment with every tested
//! variable occurring in an active clause at decision time.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{ClauseIdx, CnfFormula, Lit, Var};
use crate::ddnnf::{CertifiedDnnf, Node, NodeId};

/// Branching heuristics for the search.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Branching {
    /// Variable with the most occurrences among remaining literals of active
    /// clauses, ties broken by smallest index.
    #[default]
    MostFrequent,
    /// Smallest unassigned variable occurring in an active clause.
    SmallestIndex,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct CompileOptions {
    pub branching: Branching,
    /// Reuse sub-circuits for residual components already compiled. Off by
    /// default; changes circuit size, never the counted value.
    pub caching: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no unassigned variable occurs in an active clause")]
pub struct NoFreeVariable;

/// One active clause of a residual formula: its original 1-based index and
/// the literals not yet assigned.
#[derive(Clone, PartialEq, Eq, Debug)]
struct ActiveClause {
    index: ClauseIdx,
    remaining: Vec<Lit>,
}

/// A CNF under a partial assignment: the clauses not yet satisfied, each with
/// its remaining literals. A clause with no remaining literals is violated.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResidualFormula {
    active: Vec<ActiveClause>,
}

impl ResidualFormula {
    /// The whole formula, nothing assigned. Tautological clauses can never be
    /// violated but stay active until a literal satisfies them.
    pub fn new(f: &CnfFormula) -> ResidualFormula {
        ResidualFormula {
            active: f
                .indexed_clauses()
                .map(|(index, clause)| ActiveClause {
                    index,
                    remaining: clause.literals().to_vec(),
                })
                .collect(),
        }
    }

    pub fn is_satisfied(&self) -> bool {
        self.active.is_empty()
    }

    /// Lowest original index among violated clauses, if any.
    pub fn violated_clause(&self) -> Option<ClauseIdx> {
        self.active
            .iter()
            .filter(|c| c.remaining.is_empty())
            .map(|c| c.index)
            .min()
    }

    /// Residual after assigning `var := value`: clauses with a satisfied
    /// literal drop out, falsified literals are removed.
    pub fn assign(&self, var: Var, value: bool) -> ResidualFormula {
        let mut active = Vec::with_capacity(self.active.len());
        'clauses: for clause in &self.active {
            let mut remaining = Vec::with_capacity(clause.remaining.len());
            for &lit in &clause.remaining {
                if lit.var() == var {
                    if lit.is_positive() == value {
                        continue 'clauses;
                    }
                } else {
                    remaining.push(lit);
                }
            }
            active.push(ActiveClause {
                index: clause.index,
                remaining,
            });
        }
        ResidualFormula { active }
    }

    /// Branching variable under `policy`.
    pub fn choose_branch_variable(&self, policy: Branching) -> Result<Var, NoFreeVariable> {
        match policy {
            Branching::SmallestIndex => self
                .active
                .iter()
                .flat_map(|c| c.remaining.iter().map(|l| l.var()))
                .min()
                .ok_or(NoFreeVariable),
            Branching::MostFrequent => {
                let mut occurrences: HashMap<Var, usize> = HashMap::new();
                for clause in &self.active {
                    for lit in &clause.remaining {
                        *occurrences.entry(lit.var()).or_default() += 1;
                    }
                }
                occurrences
                    .into_iter()
                    .max_by_key(|&(var, count)| (count, std::cmp::Reverse(var)))
                    .map(|(var, _)| var)
                    .ok_or(NoFreeVariable)
            }
        }
    }

    /// Partitions the active clauses into connected components of the
    /// clause–variable incidence graph over unassigned variables, ordered by
    /// each component's smallest variable. Variables in no active clause are
    /// free and belong to no component.
    pub fn split_components(&self) -> Vec<ResidualFormula> {
        let mut var_to_group: HashMap<Var, usize> = HashMap::new();
        // Union-find over clause positions.
        let mut group: Vec<usize> = (0..self.active.len()).collect();
        fn root(group: &mut [usize], mut i: usize) -> usize {
            while group[i] != i {
                group[i] = group[group[i]];
                i = group[i];
            }
            i
        }
        for (i, clause) in self.active.iter().enumerate() {
            for lit in &clause.remaining {
                match var_to_group.get(&lit.var()) {
                    Some(&j) => {
                        let (a, b) = (root(&mut group, i), root(&mut group, j));
                        group[a.max(b)] = a.min(b);
                    }
                    None => {
                        var_to_group.insert(lit.var(), i);
                    }
                }
            }
        }

        let mut components: HashMap<usize, ResidualFormula> = HashMap::new();
        for (i, clause) in self.active.iter().enumerate() {
            components
                .entry(root(&mut group, i))
                .or_insert_with(|| ResidualFormula { active: Vec::new() })
                .active
                .push(clause.clone());
        }
        let mut components: Vec<ResidualFormula> = components.into_values().collect();
        components.sort_by_key(|c| c.smallest_variable());
        components
    }

    fn smallest_variable(&self) -> Option<Var> {
        self.active
            .iter()
            .flat_map(|c| c.remaining.iter().map(|l| l.var()))
            .min()
    }

    /// Canonical encoding used as a component cache key.
    fn cache_key(&self) -> Vec<(ClauseIdx, Vec<Lit>)> {
        let mut key: Vec<(ClauseIdx, Vec<Lit>)> = self
            .active
            .iter()
            .map(|c| (c.index, c.remaining.clone()))
            .collect();
        key.sort_unstable_by_key(|(index, _)| *index);
        key
    }
}

struct Search {
    options: CompileOptions,
    nodes: Vec<Node>,
    cache: HashMap<Vec<(ClauseIdx, Vec<Lit>)>, NodeId>,
}

impl Search {
    fn emit(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId::new(self.nodes.len() - 1)
    }

    fn compile_residual(&mut self, residual: &ResidualFormula) -> NodeId {
        if let Some(clause) = residual.violated_clause() {
            return self.emit(Node::FalseSink { clause });
        }
        if residual.is_satisfied() {
            return self.emit(Node::TrueSink);
        }
        let components = residual.split_components();
        if components.len() == 1 {
            self.compile_component(&components[0])
        } else {
            let ids: Vec<NodeId> = components
                .iter()
                .map(|c| self.compile_component(c))
                .collect();
            ids.into_iter()
                .reduce(|left, right| self.emit(Node::And { left, right }))
                .expect("split of an unsatisfied residual is nonempty")
        }
    }

    fn compile_component(&mut self, component: &ResidualFormula) -> NodeId {
        let key = self.options.caching.then(|| component.cache_key());
        if let Some(key) = &key {
            if let Some(&id) = self.cache.get(key) {
                return id;
            }
        }
        let var = component
            .choose_branch_variable(self.options.branching)
            .expect("components have active clauses with remaining literals");
        let lo = self.compile_residual(&component.assign(var, false));
        let hi = self.compile_residual(&component.assign(var, true));
        let id = self.emit(Node::Decision { var, lo, hi });
        if let Some(key) = key {
            self.cache.insert(key, id);
        }
        id
    }
}

/// Compiles `f` into a certified dec-DNNF equivalent to it, with every 0-sink
/// labeled by a clause of `f` falsified on all paths into it. Every CNF
/// compiles; an unsatisfiable one yields a circuit counting 0.
pub fn compile(f: &CnfFormula, options: CompileOptions) -> CertifiedDnnf {
    let mut search = Search {
        options,
        nodes: Vec::new(),
        cache: HashMap::new(),
    };
    search.compile_residual(&ResidualFormula::new(f));
    CertifiedDnnf::new(search.nodes, f.num_vars())
}
