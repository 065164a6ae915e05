//! Brute-force ground truth by exhaustive assignment enumeration.
//!
//! Everything here recomputes results from the definitions, sharing no
//! algorithmic path with the counting, entailment, or correctness-checking
//! code it is used to cross-check. Intended for desk-scale instances only.

use num_bigint::BigUint;
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula};
use crate::ddnnf::{validate_structure, CertifiedDnnf, Node};

/// Cap on enumeration size; `2^max_vars` assignments are visited.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OracleLimit {
    pub max_vars: u32,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit { max_vars: 20 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {num_vars} variables, above the enumeration limit of {max_vars}")]
    TooLarge { num_vars: u32, max_vars: u32 },
    #[error("formula has {formula} variables but circuit has {circuit}")]
    VariableMismatch { formula: u32, circuit: u32 },
    #[error("circuit fails structural validation")]
    StructureInvalid,
}

fn check_limit(num_vars: u32, limit: OracleLimit) -> Result<(), OracleError> {
    if num_vars > limit.max_vars {
        return Err(OracleError::TooLarge {
            num_vars,
            max_vars: limit.max_vars,
        });
    }
    Ok(())
}

/// `#f` by enumerating all `2^n` assignments.
pub fn oracle_count(f: &CnfFormula, limit: OracleLimit) -> Result<BigUint, OracleError> {
    check_limit(f.num_vars(), limit)?;
    let mut count: u64 = 0;
    for t in Assignment::enumerate(f.num_vars()) {
        count += u64::from(f.value(&t));
    }
    Ok(BigUint::from(count))
}

/// Maximum number of simultaneously satisfiable clauses, over all
/// assignments; 0 for the empty CNF.
pub fn oracle_maxsat(f: &CnfFormula, limit: OracleLimit) -> Result<usize, OracleError> {
    check_limit(f.num_vars(), limit)?;
    let mut best = 0;
    for t in Assignment::enumerate(f.num_vars()) {
        let satisfied = f.clauses().iter().filter(|c| c.value(&t)).count();
        best = best.max(satisfied);
    }
    Ok(best)
}

/// Which implication a counterexample breaks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FailedDirection {
    /// The formula is satisfied but the circuit is not.
    FormulaNotEntailsCircuit,
    /// The circuit is satisfied but the formula is not.
    CircuitNotEntailsFormula,
}

/// Outcome of the equivalence oracle.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EquivalenceResult {
    Equivalent,
    /// Lexicographically first assignment where formula and circuit differ.
    Counterexample {
        assignment: Assignment,
        direction: FailedDirection,
    },
}

/// Compares `f` and `d` on every assignment.
pub fn oracle_equiv(
    f: &CnfFormula,
    d: &CertifiedDnnf,
    limit: OracleLimit,
) -> Result<EquivalenceResult, OracleError> {
    if f.num_vars() != d.num_vars() {
        return Err(OracleError::VariableMismatch {
            formula: f.num_vars(),
            circuit: d.num_vars(),
        });
    }
    check_limit(f.num_vars(), limit)?;
    if !validate_structure(d).is_valid() {
        return Err(OracleError::StructureInvalid);
    }
    for t in Assignment::enumerate(f.num_vars()) {
        let by_formula = f.value(&t);
        let by_circuit = d.evaluate(&t);
        if by_formula != by_circuit {
            let direction = if by_formula {
                FailedDirection::FormulaNotEntailsCircuit
            } else {
                FailedDirection::CircuitNotEntailsFormula
            };
            return Ok(EquivalenceResult::Counterexample {
                assignment: t,
                direction,
            });
        }
    }
    Ok(EquivalenceResult::Equivalent)
}

/// Correctness per definition: for every assignment and every 0-sink reached
/// by a compatible path, the sink's label must evaluate to 0.
///
/// Decided by per-assignment path traversal, independently of the
/// edge-deletion reachability used by the checker.
pub fn oracle_correct(
    d: &CertifiedDnnf,
    f: &CnfFormula,
    limit: OracleLimit,
) -> Result<bool, OracleError> {
    check_limit(d.num_vars(), limit)?;
    if !validate_structure(d).is_valid() {
        return Err(OracleError::StructureInvalid);
    }
    for t in Assignment::enumerate(d.num_vars()) {
        for sink in d.compatible_sinks(&t) {
            if let Node::FalseSink { clause } = d.node(sink) {
                let label = f
                    .clause(*clause)
                    .expect("labels must reference formula clauses");
                if label.value(&t) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
