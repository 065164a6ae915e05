//! CNF formulas over variables `1..=n`: literals, clauses, total assignments,
//! and DIMACS reading/writing.

use std::fmt;

use thiserror::Error;

/// A propositional variable, indexed from 1 as in DIMACS.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from a 1-based index.
    ///
    /// Panics if `index` is 0.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Positive literal on this variable.
    pub fn positive(self) -> Lit {
        Lit {
            var: self,
            positive: true,
        }
    }

    /// Negative literal on this variable.
    pub fn negative(self) -> Lit {
        Lit {
            var: self,
            positive: false,
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal: a variable or its negation.
///
/// The derived `Ord` sorts by variable first, negative polarity before
/// positive, which is the order used by [`Clause::canonical_key`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    /// Decodes a nonzero DIMACS integer: `k > 0` is the positive literal on
    /// variable `k`, `k < 0` the negative literal on variable `-k`.
    ///
    /// Panics if `code` is 0.
    pub fn from_dimacs(code: i64) -> Lit {
        assert!(code != 0, "0 is a clause terminator, not a literal");
        Lit {
            var: Var::new(code.unsigned_abs() as u32),
            positive: code > 0,
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var.0);
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// Value of the literal under `t`, with `t(¬x) = 1 - t(x)`.
    pub fn value(self, t: &Assignment) -> bool {
        t.value(self.var) == self.positive
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// 1-based index of a clause within a [`CnfFormula`].
///
/// Certificates label their 0-sinks with these indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseIdx(u32);

impl ClauseIdx {
    /// Creates a clause index from a 1-based position.
    ///
    /// Panics if `index` is 0.
    pub fn new(index: u32) -> ClauseIdx {
        assert!(index >= 1, "clause indices start at 1");
        ClauseIdx(index)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn as_slice_index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Debug for ClauseIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ClauseIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals.
///
/// The literal list keeps the order and multiplicity it was built with; the
/// canonical key is the sorted, deduplicated literal set and is what clause
/// identity means for certificate checking.
#[derive(Clone, PartialEq, Eq)]
pub struct Clause {
    literals: Vec<Lit>,
    canonical_key: Vec<Lit>,
    tautological: bool,
}

impl Clause {
    pub fn new(literals: Vec<Lit>) -> Clause {
        let mut canonical_key = literals.clone();
        canonical_key.sort_unstable();
        canonical_key.dedup();
        let tautological = canonical_key.windows(2).any(|w| w[0].var() == w[1].var());
        Clause {
            literals,
            canonical_key,
            tautological,
        }
    }

    /// Literals in their original order, duplicates included.
    pub fn literals(&self) -> &[Lit] {
        &self.literals
    }

    /// Sorted, deduplicated literal set; order-insensitive clause identity.
    pub fn canonical_key(&self) -> &[Lit] {
        &self.canonical_key
    }

    /// True if the clause contains both `x` and `¬x`.
    pub fn is_tautological(&self) -> bool {
        self.tautological
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// 1 iff some literal of the clause is satisfied by `t`.
    pub fn value(&self, t: &Assignment) -> bool {
        self.literals.iter().any(|lit| lit.value(t))
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", lit)?;
        }
        write!(f, ")")
    }
}

/// A CNF formula: `num_vars` variables `1..=num_vars` and an indexed clause
/// list. Clause indices are 1-based, matching certificate labels.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    /// Builds a formula, checking that every literal's variable is in range.
    ///
    /// Panics if a clause mentions a variable above `num_vars`.
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> CnfFormula {
        for clause in &clauses {
            for lit in clause.literals() {
                assert!(
                    lit.var().index() <= num_vars,
                    "literal {} out of range (formula has {} variables)",
                    lit,
                    num_vars
                );
            }
        }
        CnfFormula { num_vars, clauses }
    }

    /// Convenience constructor from DIMACS integer codes.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i64]]) -> CnfFormula {
        let clauses = clauses
            .iter()
            .map(|lits| Clause::new(lits.iter().map(|&k| Lit::from_dimacs(k)).collect()))
            .collect();
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Looks up a clause by its 1-based index.
    pub fn clause(&self, idx: ClauseIdx) -> Option<&Clause> {
        self.clauses.get(idx.as_slice_index())
    }

    /// Iterates `(index, clause)` pairs with 1-based indices.
    pub fn indexed_clauses(&self) -> impl Iterator<Item = (ClauseIdx, &Clause)> {
        self.clauses
            .iter()
            .enumerate()
            .map(|(i, c)| (ClauseIdx::new(i as u32 + 1), c))
    }

    /// 1 iff every clause is satisfied by `t`; the empty CNF evaluates to 1.
    pub fn value(&self, t: &Assignment) -> bool {
        debug_assert_eq!(t.num_vars(), self.num_vars);
        self.clauses.iter().all(|clause| clause.value(t))
    }

    /// Renders the formula in DIMACS: header, then one clause per line,
    /// literals space-separated and 0-terminated, no comments.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause.literals() {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// A total assignment of the variables `1..=num_vars`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    /// Total assignment from one value per variable, `values[i]` being the
    /// value of variable `i + 1`.
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    /// The `index`-th assignment in lexicographic order over
    /// `(t(x1), ..., t(xn))`: variable 1 is the most significant bit.
    ///
    /// Panics if `num_vars > 63` or `index >= 2^num_vars`.
    pub fn from_index(index: u64, num_vars: u32) -> Assignment {
        assert!(
            num_vars <= 63,
            "index-based enumeration capped at 63 variables"
        );
        assert!(index < 1u64 << num_vars);
        let values = (0..num_vars)
            .map(|i| index >> (num_vars - 1 - i) & 1 == 1)
            .collect();
        Assignment { values }
    }

    /// Enumerates all `2^num_vars` assignments in lexicographic order.
    pub fn enumerate(num_vars: u32) -> impl Iterator<Item = Assignment> {
        (0..1u64 << num_vars).map(move |i| Assignment::from_index(i, num_vars))
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    /// Value of `var`, which must be within the assignment's domain.
    pub fn value(&self, var: Var) -> bool {
        self.values[var.index() as usize - 1]
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.values {
            write!(f, "{}", u8::from(v))?;
        }
        Ok(())
    }
}

/// Errors from [`parse_dimacs`].
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed or missing 'p cnf <vars> <clauses>' header")]
    MalformedHeader { line: usize },
    #[error("line {line}: literal {literal} out of range (header declares {num_vars} variables)")]
    VariableOutOfRange {
        line: usize,
        literal: i64,
        num_vars: u32,
    },
    #[error("header declares {declared} clauses but the file contains {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("file ends inside a clause (missing terminating 0)")]
    UnterminatedClause,
    #[error("line {line}: unexpected token {token:?}")]
    InvalidToken { line: usize, token: String },
}

/// Parses a DIMACS CNF file.
///
/// Comment lines start with `c`; the single header line is
/// `p cnf <vars> <clauses>`; clauses are whitespace-separated nonzero
/// integers terminated by 0 and may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('c'));

    let (num_vars, declared) = loop {
        let (line_no, line) = match lines.next() {
            Some(x) => x,
            None => return Err(DimacsError::MalformedHeader { line: 1 }),
        };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let malformed = DimacsError::MalformedHeader { line: line_no };
        if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
            return Err(malformed);
        }
        let num_vars: u32 = fields[2].parse().map_err(|_| malformed.clone())?;
        let declared: usize = fields[3].parse().map_err(|_| malformed)?;
        break (num_vars, declared);
    };

    // The declared count is untrusted; every clause needs a terminating "0".
    let mut clauses = Vec::with_capacity(declared.min(text.len() / 2));
    let mut current: Vec<Lit> = Vec::new();
    let mut in_clause = false;
    for (line_no, line) in lines {
        for token in line.split_whitespace() {
            let code: i64 = token.parse().map_err(|_| DimacsError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if code == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                in_clause = false;
            } else {
                if code.unsigned_abs() > u64::from(num_vars) {
                    return Err(DimacsError::VariableOutOfRange {
                        line: line_no,
                        literal: code,
                        num_vars,
                    });
                }
                current.push(Lit::from_dimacs(code));
                in_clause = true;
            }
        }
    }
    if in_clause {
        return Err(DimacsError::UnterminatedClause);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { num_vars, clauses })
}

impl std::str::FromStr for CnfFormula {
    type Err = DimacsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_dimacs(s)
    }
}
