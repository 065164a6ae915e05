//! Certificate verification: correctness of clause-labeled 0-sinks, and the
//! full checking procedures for #SAT and maxSAT claims.
//!
//! A certificate is *correct* when every assignment with a compatible path
//! into a 0-sink falsifies that sink's clause label. Correctness plus label
//! membership in `F` gives `F ⇒ D`; clause-by-clause entailment gives
//! `D ⇒ F`; together they certify equivalence, so the circuit's model count
//! is `#F` and, over the selector-augmented formula, its maximal selector
//! weight is `M(F)`.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::cnf::{Clause, ClauseIdx, CnfFormula, Lit, Var};
use crate::ddnnf::{validate_structure, CertifiedDnnf, Node, NodeId};
use crate::queries::{count_models, entails_cnf, max_hamming_weight, CnfEntailment, HwResult};

/// A surviving source→sink path disproving one (sink, literal) obligation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PathWitness {
    pub nodes: Vec<NodeId>,
}

impl PathWitness {
    /// Renders the path with edge labels, e.g. `9 -x1=0-> 8 -and-> 3`.
    pub fn describe(&self, d: &CertifiedDnnf) -> String {
        let mut out = String::new();
        for pair in self.nodes.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            let label = match *d.node(from) {
                Node::Decision { var, lo, hi } => {
                    if to == lo && to == hi {
                        format!("x{}=*", var)
                    } else if to == lo {
                        format!("x{}=0", var)
                    } else {
                        format!("x{}=1", var)
                    }
                }
                Node::And { .. } => "and".to_string(),
                _ => "?".to_string(),
            };
            out.push_str(&format!("{} -{}-> ", from, label));
        }
        out.push_str(&self.nodes.last().expect("paths are nonempty").to_string());
        out
    }
}

/// One failed obligation: a path into `sink` on which no edge forces the
/// label literal to 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CorrectnessViolation {
    pub sink: NodeId,
    pub literal: Lit,
    pub witness: PathWitness,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CorrectnessReport {
    /// Sorted by (sink id, literal position within the label clause).
    pub violations: Vec<CorrectnessViolation>,
}

impl CorrectnessReport {
    pub fn is_correct(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorrectnessError {
    #[error("0-sink {sink} references clause {clause} outside the formula")]
    BadClauseRef { sink: NodeId, clause: ClauseIdx },
    #[error(
        "0-sink {sink} is labeled with tautological clause {clause}, which no assignment falsifies"
    )]
    TautologicalLabel { sink: NodeId, clause: ClauseIdx },
}

/// Nodes still reachable from the source after removing, from every decision
/// node on `var`, the outgoing edge labeled `removed_value`; `parent` links
/// reconstruct one surviving path per reached node.
struct PrunedReach {
    reached: Vec<bool>,
    parent: Vec<Option<NodeId>>,
}

fn reach_without_edges(d: &CertifiedDnnf, var: Var, removed_value: bool) -> PrunedReach {
    let mut reached = vec![false; d.num_nodes()];
    let mut parent = vec![None; d.num_nodes()];
    let mut queue = VecDeque::new();
    reached[d.source().index()] = true;
    queue.push_back(d.source());
    while let Some(id) = queue.pop_front() {
        let survivors: [Option<NodeId>; 2] = match *d.node(id) {
            Node::TrueSink | Node::FalseSink { .. } => [None, None],
            Node::Decision { var: v, lo, hi } => {
                if v == var {
                    if removed_value {
                        [Some(lo), None]
                    } else {
                        [Some(hi), None]
                    }
                } else {
                    [Some(lo), Some(hi)]
                }
            }
            Node::And { left, right } => [Some(left), Some(right)],
        };
        for child in survivors.into_iter().flatten() {
            if !reached[child.index()] {
                reached[child.index()] = true;
                parent[child.index()] = Some(id);
                queue.push_back(child);
            }
        }
    }
    PrunedReach { reached, parent }
}

impl PrunedReach {
    fn witness_to(&self, sink: NodeId) -> PathWitness {
        let mut nodes = vec![sink];
        let mut cursor = sink;
        while let Some(p) = self.parent[cursor.index()] {
            nodes.push(p);
            cursor = p;
        }
        nodes.reverse();
        PathWitness { nodes }
    }
}

/// One correctness obligation: this sink's label contains this literal.
type Obligation = (NodeId, usize, Lit);

/// Checks label correctness of the certificate `d` against `f`: no
/// assignment may both reach a 0-sink and satisfy that sink's clause.
///
/// For every 0-sink α and every literal ℓ of its label, every source→α path
/// must test ℓ's variable and take the edge falsifying ℓ; this is decided by
/// deleting exactly those forced edges and testing that α became unreachable
/// from the source. Obligations on the same (variable, polarity) share one
/// traversal.
///
/// Expects a structurally valid circuit. Labels that cannot be falsified at
/// all (tautological clauses) and out-of-range clause references are errors,
/// not violations.
pub fn check_correct(
    d: &CertifiedDnnf,
    f: &CnfFormula,
) -> Result<CorrectnessReport, CorrectnessError> {
    // (variable, polarity) -> obligations sharing one pruned traversal
    let mut groups: HashMap<(Var, bool), Vec<Obligation>> = HashMap::new();
    for (sink, clause_ref) in d.false_sinks() {
        let clause = f.clause(clause_ref).ok_or(CorrectnessError::BadClauseRef {
            sink,
            clause: clause_ref,
        })?;
        if clause.is_tautological() {
            return Err(CorrectnessError::TautologicalLabel {
                sink,
                clause: clause_ref,
            });
        }
        let mut seen: Vec<Lit> = Vec::new();
        for (pos, &lit) in clause.literals().iter().enumerate() {
            if seen.contains(&lit) {
                continue;
            }
            seen.push(lit);
            groups
                .entry((lit.var(), lit.is_positive()))
                .or_default()
                .push((sink, pos, lit));
        }
    }

    let mut violations = Vec::new();
    let mut keys: Vec<(Var, bool)> = groups.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        // Remove the edges a falsifying assignment is forced to take: any
        // surviving path into the sink is compatible with an assignment that
        // satisfies the literal, i.e. a violation.
        let (var, positive) = key;
        let reach = reach_without_edges(d, var, !positive);
        for &(sink, pos, literal) in &groups[&key] {
            if reach.reached[sink.index()] {
                violations.push((
                    sink,
                    pos,
                    CorrectnessViolation {
                        sink,
                        literal,
                        witness: reach.witness_to(sink),
                    },
                ));
            }
        }
    }
    violations.sort_by_key(|&(sink, pos, _)| (sink, pos));
    Ok(CorrectnessReport {
        violations: violations.into_iter().map(|(_, _, v)| v).collect(),
    })
}

/// Why a certificate was rejected.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InvalidReason {
    /// Structural validation failed (or an internal query refused the circuit).
    StructureInvalid,
    /// The circuit is over a different variable set than the formula.
    VarCountMismatch,
    /// Some 0-sink label admits an assignment that reaches the sink without
    /// falsifying the label.
    NotCorrect,
    /// A 0-sink references a clause index outside the formula.
    ClauseNotInFormula { sink: NodeId },
    /// The circuit does not entail this clause of the formula.
    NotEntailing { clause: ClauseIdx },
    /// The certified value disagrees with the claimed one.
    CountMismatch { expected: BigUint, actual: BigUint },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::StructureInvalid => write!(f, "StructureInvalid"),
            InvalidReason::VarCountMismatch => write!(f, "VarCountMismatch"),
            InvalidReason::NotCorrect => write!(f, "NotCorrect"),
            InvalidReason::ClauseNotInFormula { .. } => write!(f, "ClauseNotInFormula"),
            InvalidReason::NotEntailing { .. } => write!(f, "NotEntailing"),
            InvalidReason::CountMismatch { .. } => write!(f, "CountMismatch"),
        }
    }
}

/// Outcome of a full certificate check: the certified value, or the first
/// failed obligation in checking order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Valid(BigUint),
    Invalid(InvalidReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }
}

fn check_equivalence(f: &CnfFormula, d: &CertifiedDnnf) -> Result<(), InvalidReason> {
    // Cheap comparison first: validation allocates variable sets sized by the
    // certificate's claimed variable count, which is untrusted until here.
    if d.num_vars() != f.num_vars() {
        return Err(InvalidReason::VarCountMismatch);
    }
    if !validate_structure(d).is_valid() {
        return Err(InvalidReason::StructureInvalid);
    }
    // Label membership: labels are indices into f, so membership is a bounds
    // check; out-of-range labels cannot smuggle in clauses f does not have.
    for (sink, clause_ref) in d.false_sinks() {
        if f.clause(clause_ref).is_none() {
            return Err(InvalidReason::ClauseNotInFormula { sink });
        }
    }
    match check_correct(d, f) {
        Ok(report) if report.is_correct() => {}
        Ok(_) => return Err(InvalidReason::NotCorrect),
        Err(CorrectnessError::BadClauseRef { sink, .. }) => {
            return Err(InvalidReason::ClauseNotInFormula { sink })
        }
        Err(CorrectnessError::TautologicalLabel { .. }) => return Err(InvalidReason::NotCorrect),
    }
    match entails_cnf(d, f) {
        Ok(CnfEntailment::Entailed) => Ok(()),
        Ok(CnfEntailment::CounterexampleClause(idx)) => {
            Err(InvalidReason::NotEntailing { clause: idx })
        }
        Err(_) => Err(InvalidReason::StructureInvalid),
    }
}

/// Checks a #SAT certificate: `d` must be a structurally valid, correct
/// certified dec-DNNF whose labels are clauses of `f` and which entails `f`.
/// Correctness and membership give `f ⇒ d`, entailment gives `d ⇒ f`, so the
/// model count of `d` is `#f`.
///
/// With `claimed` present the computed count must match it.
pub fn check_sharp_sat(f: &CnfFormula, d: &CertifiedDnnf, claimed: Option<&BigUint>) -> Verdict {
    if let Err(reason) = check_equivalence(f, d) {
        return Verdict::Invalid(reason);
    }
    let count = count_models(d).expect("circuit was validated");
    if let Some(expected) = claimed {
        if *expected != count {
            return Verdict::Invalid(InvalidReason::CountMismatch {
                expected: expected.clone(),
                actual: count,
            });
        }
    }
    Verdict::Valid(count)
}

/// The selector-augmented formula used by maxSAT certification.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TildeFormula {
    pub formula: CnfFormula,
    /// Selector `selectors[i]` is the fresh variable attached to clause `i+1`.
    pub selectors: Vec<Var>,
}

/// Augments every clause `C_i` of `f` with `¬s_i` for a fresh selector
/// variable `s_i = n + i`. Any model of the result with `s_i = 1` satisfies
/// `C_i`, so maximizing true selectors over its models computes the maximum
/// number of simultaneously satisfiable clauses of `f`.
pub fn build_tilde(f: &CnfFormula) -> TildeFormula {
    let n = f.num_vars();
    let m = f.num_clauses() as u32;
    let selectors: Vec<Var> = (1..=m).map(|i| Var::new(n + i)).collect();
    let clauses = f
        .clauses()
        .iter()
        .zip(&selectors)
        .map(|(clause, &s)| {
            let mut lits = clause.literals().to_vec();
            lits.push(s.negative());
            Clause::new(lits)
        })
        .collect();
    TildeFormula {
        formula: CnfFormula::new(n + m, clauses),
        selectors,
    }
}

/// Checks a maxSAT certificate: `d` must certify the selector-augmented
/// formula of `f` exactly as in [`check_sharp_sat`] steps 1–4; the certified
/// value is then the maximal number of selectors set to 1 over models of `d`.
///
/// The augmented formula is always satisfiable (set every selector to 0), so
/// an unsatisfiable verdict from the weight query cannot occur on a
/// certificate that passed equivalence checking.
pub fn check_max_sat(f: &CnfFormula, d: &CertifiedDnnf, claimed: Option<u64>) -> Verdict {
    let tilde = build_tilde(f);
    if let Err(reason) = check_equivalence(&tilde.formula, d) {
        return Verdict::Invalid(reason);
    }
    let weight = match max_hamming_weight(d, &tilde.selectors) {
        Ok(HwResult::Weight(w)) => BigUint::from(w),
        Ok(HwResult::Unsatisfiable) | Err(_) => {
            return Verdict::Invalid(InvalidReason::StructureInvalid)
        }
    };
    if let Some(expected) = claimed {
        let expected = BigUint::from(expected);
        if expected != weight {
            return Verdict::Invalid(InvalidReason::CountMismatch {
                expected,
                actual: weight,
            });
        }
    }
    Verdict::Valid(weight)
}
