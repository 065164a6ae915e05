//! Certified dec-DNNF circuits as checkable certificates for model counting
//! and maxSAT.
//!
//! A *certified* dec-DNNF labels every 0-sink with a clause that all
//! assignments reaching the sink must falsify. That extra information makes
//! equivalence with a CNF formula checkable in polynomial time: correctness
//! of the labels plus label membership gives `F ⇒ D`, clause-by-clause
//! entailment gives `D ⇒ F`, and the tractable counting and Hamming-weight
//! queries then certify `#F` (or, over the selector-augmented formula,
//! `M(F)`).
//!
//! The crate provides:
//!
//! * [`cnf`] — CNF formulas, assignments, DIMACS reading/writing;
//! * [`ddnnf`] — the circuit representation, structural validation, and
//!   evaluation semantics;
//! * [`queries`] — model counting, clause/CNF entailment, maximal Hamming
//!   weight;
//! * [`checker`] — label correctness and the full #SAT / maxSAT certificate
//!   checks;
//! * [`compiler`] — a proof-producing exhaustive-DPLL counter emitting
//!   certificates the checker accepts;
//! * [`oracle`] — brute-force ground truth for differential testing at desk
//!   scale;
//! * [`cert_io`] — the CDNNF text format for exchanging certificates.
//!
//! ```
//! use sharpcert_core::*;
//!
//! let f = parse_dimacs("p cnf 3 2\n1 2 0\n-1 3 0\n").unwrap();
//! let d = compile(&f, CompileOptions::default());
//! assert_eq!(check_sharp_sat(&f, &d, None), Verdict::Valid(4u32.into()));
//!
//! // Certificates round-trip through a line-oriented text format.
//! let restored = read_cert(&write_cert(&d)).unwrap();
//! assert_eq!(restored, d);
//! ```

#![forbid(unsafe_code)]

pub mod cert_io;
pub mod checker;
pub mod cnf;
pub mod compiler;
pub mod ddnnf;
pub mod oracle;
pub mod queries;

pub use cert_io::{read_cert, write_cert, CertParseError};
pub use checker::{
    build_tilde, check_correct, check_max_sat, check_sharp_sat, CorrectnessReport, InvalidReason,
    Verdict,
};
pub use cnf::{parse_dimacs, Assignment, Clause, ClauseIdx, CnfFormula, DimacsError, Lit, Var};
pub use compiler::{compile, Branching, CompileOptions};
pub use ddnnf::{validate_structure, CertifiedDnnf, Node, NodeId};
pub use oracle::{oracle_correct, oracle_count, oracle_equiv, oracle_maxsat, OracleLimit};
pub use queries::{count_models, entails_clause, entails_cnf, max_hamming_weight, HwResult};

// Shared-use contract: every value is immutable after construction, so all
// of these must stay freely shareable across threads.
const _: () = {
    const fn shareable<T: Send + Sync>() {}
    shareable::<CnfFormula>();
    shareable::<Assignment>();
    shareable::<CertifiedDnnf>();
    shareable::<ddnnf::VarSetTable>();
    shareable::<ddnnf::StructureReport>();
    shareable::<CorrectnessReport>();
    shareable::<Verdict>();
};
