//! Tractable queries on certified dec-DNNF: model counting, clause
//! entailment, CNF entailment, and maximal Hamming weight.
//!
//! Counting and weight maximization work on the unsmoothed circuit by
//! crediting the variables a branch leaves untested ("gap" factors), so the
//! certificate itself is never rewritten.

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use thiserror::Error;

use crate::cnf::{Clause, ClauseIdx, CnfFormula, Var};
use crate::ddnnf::{
    compute_var_sets, validate_structure, var_mask, CertifiedDnnf, Node, NodeId, VarSetTable,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("circuit fails structural validation")]
    StructureInvalid,
    #[error("formula has {formula} variables but circuit has {circuit}")]
    VariableMismatch { formula: u32, circuit: u32 },
}

fn validated_var_sets(d: &CertifiedDnnf) -> Result<VarSetTable, QueryError> {
    if !validate_structure(d).is_valid() {
        return Err(QueryError::StructureInvalid);
    }
    Ok(compute_var_sets(d).expect("validated circuits are topologically ordered"))
}

/// Variables in `vars(node)` untested by the branch into `child`, the decided
/// variable excluded: the models below `child` are free on these.
fn branch_gap(node: &FixedBitSet, var: Var, child: &FixedBitSet) -> FixedBitSet {
    let mut gap = node.clone();
    gap.difference_with(child);
    gap.set(var.index() as usize - 1, false);
    gap
}

/// Number of satisfying assignments of `d` over all `2^num_vars` total
/// assignments.
///
/// Bottom-up: each node carries a count relative to its own variable set;
/// decisions add the two branch counts scaled by `2^gap`, ∧-nodes multiply
/// (exact by decomposability), and the source count is scaled up to the
/// ambient variable set.
pub fn count_models(d: &CertifiedDnnf) -> Result<BigUint, QueryError> {
    let table = validated_var_sets(d)?;
    let mut counts: Vec<BigUint> = Vec::with_capacity(d.num_nodes());
    for (i, node) in d.nodes().iter().enumerate() {
        let count = match *node {
            Node::TrueSink => BigUint::from(1u32),
            Node::FalseSink { .. } => BigUint::from(0u32),
            Node::Decision { var, lo, hi } => {
                let here = table.vars(NodeId::new(i));
                let gap_lo = branch_gap(here, var, table.vars(lo)).count_ones(..);
                let gap_hi = branch_gap(here, var, table.vars(hi)).count_ones(..);
                (&counts[lo.index()] << gap_lo) + (&counts[hi.index()] << gap_hi)
            }
            Node::And { left, right } => &counts[left.index()] * &counts[right.index()],
        };
        counts.push(count);
    }
    let tested = table.count(d.source());
    let free = d.num_vars() as usize - tested;
    Ok(counts[d.source().index()].clone() << free)
}

/// Does the function of `d` entail the clause `c`?
///
/// Conditions `d` on the unique partial assignment falsifying every literal
/// of `c` and checks the conditioned circuit for unsatisfiability. A
/// tautological clause is entailed by everything and returns true without
/// traversal.
pub fn entails_clause(d: &CertifiedDnnf, c: &Clause) -> Result<bool, QueryError> {
    if !validate_structure(d).is_valid() {
        return Err(QueryError::StructureInvalid);
    }
    Ok(entails_clause_unchecked(d, c))
}

/// Entailment check without revalidating the circuit.
fn entails_clause_unchecked(d: &CertifiedDnnf, c: &Clause) -> bool {
    if c.is_tautological() {
        return true;
    }
    // fixed[v-1] = Some(value) pins variable v to the value falsifying c.
    let mut fixed: Vec<Option<bool>> = vec![None; d.num_vars() as usize];
    for lit in c.canonical_key() {
        debug_assert!(lit.var().index() <= d.num_vars());
        fixed[lit.var().index() as usize - 1] = Some(!lit.is_positive());
    }
    let mut sat = vec![false; d.num_nodes()];
    for (i, node) in d.nodes().iter().enumerate() {
        sat[i] = match *node {
            Node::TrueSink => true,
            Node::FalseSink { .. } => false,
            Node::Decision { var, lo, hi } => match fixed[var.index() as usize - 1] {
                Some(true) => sat[hi.index()],
                Some(false) => sat[lo.index()],
                None => sat[lo.index()] || sat[hi.index()],
            },
            Node::And { left, right } => sat[left.index()] && sat[right.index()],
        };
    }
    !sat[d.source().index()]
}

/// Outcome of checking `d ⇒ F` clause by clause.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CnfEntailment {
    Entailed,
    /// Lowest 1-based index of a clause of `F` not entailed by `d`.
    CounterexampleClause(ClauseIdx),
}

/// Checks `d ⇒ f` by checking entailment of every clause of `f`, in
/// `O(size(f) × size(d))`; reports the lowest-index failing clause.
pub fn entails_cnf(d: &CertifiedDnnf, f: &CnfFormula) -> Result<CnfEntailment, QueryError> {
    if d.num_vars() != f.num_vars() {
        return Err(QueryError::VariableMismatch {
            formula: f.num_vars(),
            circuit: d.num_vars(),
        });
    }
    if !validate_structure(d).is_valid() {
        return Err(QueryError::StructureInvalid);
    }
    for (idx, clause) in f.indexed_clauses() {
        if !entails_clause_unchecked(d, clause) {
            return Ok(CnfEntailment::CounterexampleClause(idx));
        }
    }
    Ok(CnfEntailment::Entailed)
}

/// Result of maximal Hamming weight over a tracked variable set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HwResult {
    /// The circuit has no model at all.
    Unsatisfiable,
    /// Maximum over models of the number of tracked variables set to 1.
    Weight(u32),
}

/// Maximum number of variables of `tracked` set to 1 over all models of `d`,
/// or [`HwResult::Unsatisfiable`] if `d` has none.
///
/// Bottom-up with per-branch gap credits: a tracked variable left untested by
/// a branch (or by the whole circuit) is free and counts 1.
pub fn max_hamming_weight(d: &CertifiedDnnf, tracked: &[Var]) -> Result<HwResult, QueryError> {
    let table = validated_var_sets(d)?;
    let tracked_set = var_mask(d.num_vars(), tracked.iter().copied());
    // None = no model in the sub-DAG.
    let mut best: Vec<Option<u32>> = Vec::with_capacity(d.num_nodes());
    for (i, node) in d.nodes().iter().enumerate() {
        let weight = match *node {
            Node::TrueSink => Some(0),
            Node::FalseSink { .. } => None,
            Node::Decision { var, lo, hi } => {
                let here = table.vars(NodeId::new(i));
                let credit = |child: NodeId| {
                    branch_gap(here, var, table.vars(child)).intersection_count(&tracked_set) as u32
                };
                let on_var = u32::from(tracked_set.contains(var.index() as usize - 1));
                let lo_w = best[lo.index()].map(|w| w + credit(lo));
                let hi_w = best[hi.index()].map(|w| w + on_var + credit(hi));
                match (lo_w, hi_w) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
            Node::And { left, right } => match (best[left.index()], best[right.index()]) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        };
        best.push(weight);
    }
    Ok(match best[d.source().index()] {
        None => HwResult::Unsatisfiable,
        Some(w) => {
            let mut free = tracked_set;
            free.difference_with(table.vars(d.source()));
            HwResult::Weight(w + free.count_ones(..) as u32)
        }
    })
}
