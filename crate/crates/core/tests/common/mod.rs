//! Shared generators and fixtures for the integration suites.

#![allow(dead_code)]

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sharpcert_core::ddnnf::compute_var_sets;
use sharpcert_core::oracle::EquivalenceResult;
use sharpcert_core::*;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random CNF with `1..=max_vars` variables, `0..=max_clauses` clauses of
/// width `1..=max_width`. Duplicate literals and tautological clauses are
/// allowed, as the parser allows them.
pub fn random_cnf(
    rng: &mut StdRng,
    max_vars: u32,
    max_clauses: usize,
    max_width: usize,
) -> CnfFormula {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(0..=max_clauses);
    random_cnf_exact(rng, n, m, max_width)
}

pub fn random_cnf_exact(rng: &mut StdRng, n: u32, m: usize, max_width: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let width = rng.random_range(1..=max_width);
            Clause::new(
                (0..width)
                    .map(|_| Lit::new(Var::new(rng.random_range(1..=n)), rng.random_bool(0.5)))
                    .collect(),
            )
        })
        .collect();
    CnfFormula::new(n, clauses)
}

/// Uniform random k-CNF: every clause has exactly `k` literal draws.
pub fn random_k_cnf(rng: &mut StdRng, n: u32, m: usize, k: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            Clause::new(
                (0..k)
                    .map(|_| Lit::new(Var::new(rng.random_range(1..=n)), rng.random_bool(0.5)))
                    .collect(),
            )
        })
        .collect();
    CnfFormula::new(n, clauses)
}

pub fn all_compile_options() -> [CompileOptions; 4] {
    [
        CompileOptions {
            branching: Branching::MostFrequent,
            caching: false,
        },
        CompileOptions {
            branching: Branching::MostFrequent,
            caching: true,
        },
        CompileOptions {
            branching: Branching::SmallestIndex,
            caching: false,
        },
        CompileOptions {
            branching: Branching::SmallestIndex,
            caching: true,
        },
    ]
}

/// The hand-built circuit computing x1 = x2 = x3 over 3 variables, together
/// with the CNF it certifies.
pub fn equality_fixture() -> (CnfFormula, CertifiedDnnf) {
    let f = parse_dimacs("p cnf 3 3\n-1 2 0\n-2 3 0\n-3 1 0\n").unwrap();
    let id = NodeId::new;
    let cl = ClauseIdx::new;
    let d = CertifiedDnnf::new(
        vec![
            Node::TrueSink,                    // 0
            Node::FalseSink { clause: cl(2) }, // 1
            Node::FalseSink { clause: cl(3) }, // 2
            Node::FalseSink { clause: cl(1) }, // 3
            Node::Decision {
                var: Var::new(3),
                lo: id(1),
                hi: id(0),
            }, // 4
            Node::Decision {
                var: Var::new(2),
                lo: id(3),
                hi: id(4),
            }, // 5
            Node::Decision {
                var: Var::new(3),
                lo: id(0),
                hi: id(2),
            }, // 6
            Node::Decision {
                var: Var::new(3),
                lo: id(1),
                hi: id(2),
            }, // 7
            Node::Decision {
                var: Var::new(2),
                lo: id(6),
                hi: id(7),
            }, // 8
            Node::Decision {
                var: Var::new(1),
                lo: id(8),
                hi: id(5),
            }, // 9
        ],
        3,
    );
    (f, d)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MutationClass {
    /// Flip a 1-sink into a 0-sink with an arbitrary in-range label.
    SinkFlip,
    /// Relabel a 0-sink with a different clause of the formula.
    LabelSwap,
    /// Swap the lo/hi edges of one decision node.
    EdgeSwap,
    /// Point one ∧-child at a node sharing variables with its sibling.
    DecompBreak,
}

pub const MUTATION_CLASSES: [MutationClass; 4] = [
    MutationClass::SinkFlip,
    MutationClass::LabelSwap,
    MutationClass::EdgeSwap,
    MutationClass::DecompBreak,
];

/// One random mutation of the given class, unverified. `None` when the
/// circuit has no site for it.
pub fn raw_mutate(
    rng: &mut StdRng,
    f: &CnfFormula,
    d: &CertifiedDnnf,
    class: MutationClass,
) -> Option<CertifiedDnnf> {
    let mut nodes = d.nodes().to_vec();
    match class {
        MutationClass::SinkFlip => {
            let sites: Vec<usize> = nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n, Node::TrueSink))
                .map(|(i, _)| i)
                .collect();
            if sites.is_empty() || f.num_clauses() == 0 {
                return None;
            }
            let site = sites[rng.random_range(0..sites.len())];
            let label = ClauseIdx::new(rng.random_range(1..=f.num_clauses() as u32));
            nodes[site] = Node::FalseSink { clause: label };
        }
        MutationClass::LabelSwap => {
            let sites: Vec<usize> = nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n, Node::FalseSink { .. }))
                .map(|(i, _)| i)
                .collect();
            if sites.is_empty() || f.num_clauses() < 2 {
                return None;
            }
            let site = sites[rng.random_range(0..sites.len())];
            let Node::FalseSink { clause } = nodes[site] else {
                unreachable!()
            };
            let mut new_label = clause;
            while new_label == clause {
                new_label = ClauseIdx::new(rng.random_range(1..=f.num_clauses() as u32));
            }
            nodes[site] = Node::FalseSink { clause: new_label };
        }
        MutationClass::EdgeSwap => {
            let sites: Vec<usize> = nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n, Node::Decision { lo, hi, .. } if lo != hi))
                .map(|(i, _)| i)
                .collect();
            if sites.is_empty() {
                return None;
            }
            let site = sites[rng.random_range(0..sites.len())];
            let Node::Decision { var, lo, hi } = nodes[site] else {
                unreachable!()
            };
            nodes[site] = Node::Decision {
                var,
                lo: hi,
                hi: lo,
            };
        }
        MutationClass::DecompBreak => {
            let table = compute_var_sets(d).ok()?;
            let sites: Vec<usize> = nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n, Node::And { .. }))
                .map(|(i, _)| i)
                .collect();
            if sites.is_empty() {
                return None;
            }
            let site = sites[rng.random_range(0..sites.len())];
            let Node::And { left, right } = nodes[site] else {
                unreachable!()
            };
            // Candidate replacement children colliding with the left branch.
            let candidates: Vec<NodeId> = (0..site)
                .map(NodeId::new)
                .filter(|&c| c != right && !table.vars(c).is_disjoint(table.vars(left)))
                .collect();
            let new_right = if candidates.is_empty() {
                left
            } else {
                candidates[rng.random_range(0..candidates.len())]
            };
            nodes[site] = Node::And {
                left,
                right: new_right,
            };
        }
    }
    Some(CertifiedDnnf::new(nodes, d.num_vars()))
}

/// Is the mutant observably wrong: structurally invalid, computing a
/// different function than `f`, or carrying an unfalsified label?
pub fn oracle_says_bad(f: &CnfFormula, mutant: &CertifiedDnnf, limit: OracleLimit) -> bool {
    if !validate_structure(mutant).is_valid() {
        return true;
    }
    match oracle_equiv(f, mutant, limit) {
        Ok(EquivalenceResult::Equivalent) => {}
        Ok(EquivalenceResult::Counterexample { .. }) => return true,
        Err(_) => return true,
    }
    matches!(oracle_correct(mutant, f, limit), Ok(false) | Err(_))
}

/// A mutation of `class` that the oracle confirms breaks the certificate.
pub fn verified_mutation(
    rng: &mut StdRng,
    f: &CnfFormula,
    d: &CertifiedDnnf,
    class: MutationClass,
    attempts: usize,
) -> Option<CertifiedDnnf> {
    for _ in 0..attempts {
        if let Some(mutant) = raw_mutate(rng, f, d, class) {
            if oracle_says_bad(f, &mutant, OracleLimit::default()) {
                return Some(mutant);
            }
        }
    }
    None
}

fn has_node_kinds(d: &CertifiedDnnf) -> bool {
    let mut t = false;
    let mut fs = false;
    let mut dec = false;
    let mut and = false;
    for node in d.nodes() {
        match node {
            Node::TrueSink => t = true,
            Node::FalseSink { .. } => fs = true,
            Node::Decision { .. } => dec = true,
            Node::And { .. } => and = true,
        }
    }
    t && fs && dec && and
}

/// A random instance whose compiled certificate contains all four node kinds
/// and supports an oracle-verified mutant of every class.
pub fn mutable_instance(
    rng: &mut StdRng,
) -> (CnfFormula, CertifiedDnnf, BigUint, [CertifiedDnnf; 4]) {
    loop {
        // Two clause groups over disjoint variable halves make ∧-nodes likely.
        let half = rng.random_range(2..=4u32);
        let n = half * 2;
        let per_group = rng.random_range(2..=5usize);
        let mut clauses = Vec::new();
        for group in 0..2u32 {
            let base = group * half;
            for _ in 0..per_group {
                let width = rng.random_range(1..=3usize);
                clauses.push(Clause::new(
                    (0..width)
                        .map(|_| {
                            Lit::new(
                                Var::new(base + rng.random_range(1..=half)),
                                rng.random_bool(0.5),
                            )
                        })
                        .collect(),
                ));
            }
        }
        let f = CnfFormula::new(n, clauses);
        let d = compile(&f, CompileOptions::default());
        if !has_node_kinds(&d) || f.num_clauses() < 2 {
            continue;
        }
        let count = oracle_count(&f, OracleLimit::default()).unwrap();
        if count == BigUint::from(0u32) {
            continue;
        }
        let mutants: Option<Vec<CertifiedDnnf>> = MUTATION_CLASSES
            .iter()
            .map(|&class| verified_mutation(rng, &f, &d, class, 30))
            .collect();
        if let Some(mutants) = mutants {
            let mutants: [CertifiedDnnf; 4] = mutants.try_into().unwrap();
            return (f, d, count, mutants);
        }
    }
}

fn random_leaf(rng: &mut StdRng, num_clauses: usize) -> Node {
    if num_clauses > 0 && rng.random_bool(0.5) {
        Node::FalseSink {
            clause: ClauseIdx::new(rng.random_range(1..=num_clauses as u32)),
        }
    } else {
        Node::TrueSink
    }
}

fn random_internal(rng: &mut StdRng, num_vars: u32, a: NodeId, b: NodeId) -> Node {
    if num_vars > 0 && rng.random_bool(0.7) {
        Node::Decision {
            var: Var::new(rng.random_range(1..=num_vars)),
            lo: a,
            hi: b,
        }
    } else {
        Node::And { left: a, right: b }
    }
}

/// Random node array in topological order with the last node as the only
/// unreferenced one. Read-once, decomposability, label correctness, and
/// equivalence to any formula are all left to chance.
pub fn random_circuit(
    rng: &mut StdRng,
    num_vars: u32,
    num_clauses: usize,
    max_nodes: usize,
) -> CertifiedDnnf {
    let target = rng.random_range(1..=max_nodes);
    let mut nodes = vec![random_leaf(rng, num_clauses)];
    let mut unreferenced: Vec<usize> = vec![0];

    while nodes.len() < target {
        let id = nodes.len();
        if rng.random_bool(0.3) {
            nodes.push(random_leaf(rng, num_clauses));
        } else {
            // Prefer unreferenced children so the merge phase stays short.
            let mut pick = |rng: &mut StdRng| -> NodeId {
                let chosen = if !unreferenced.is_empty() && rng.random_bool(0.8) {
                    unreferenced.swap_remove(rng.random_range(0..unreferenced.len()))
                } else {
                    rng.random_range(0..id)
                };
                if let Some(at) = unreferenced.iter().position(|&u| u == chosen) {
                    unreferenced.swap_remove(at);
                }
                NodeId::new(chosen)
            };
            let a = pick(rng);
            let b = pick(rng);
            nodes.push(random_internal(rng, num_vars, a, b));
        }
        unreferenced.push(id);
    }
    // Merge leftovers until only the final node is unreferenced.
    while unreferenced.len() > 1 {
        let id = nodes.len();
        let a = unreferenced.swap_remove(rng.random_range(0..unreferenced.len()));
        let b = unreferenced.swap_remove(rng.random_range(0..unreferenced.len()));
        nodes.push(random_internal(rng, num_vars, NodeId::new(a), NodeId::new(b)));
        unreferenced.push(id);
    }
    CertifiedDnnf::new(nodes, num_vars)
}

/// Peak resident set size of the current process in bytes, if readable.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest.trim().trim_end_matches(" kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}
