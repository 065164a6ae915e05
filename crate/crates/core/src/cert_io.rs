//! Text serialization of certified dec-DNNF circuits (CDNNF format).
//!
//! ```text
//! c optional comment lines, anywhere
//! cdnnf <numNodes> <numEdges> <numVars> <numClauses>
//! T                 1-sink
//! F <clauseIndex>   0-sink labeled with a 1-based clause index
//! D <var> <lo> <hi> decision node; lo is the 0-edge, hi the 1-edge
//! A <left> <right>  ∧-node
//! ```
//!
//! Node ids are 0-based and implicit in node-line order; children must
//! reference strictly smaller ids and the last node line is the source.
//! `numEdges` must match the body (two edges per `D`/`A` line) and every
//! clause index must be within `1..=numClauses`. The writer emits LF line
//! endings, single spaces, no comments, and `numClauses` equal to the
//! largest referenced clause index.

use thiserror::Error;

use crate::cnf::{ClauseIdx, Var};
use crate::ddnnf::{CertifiedDnnf, Node, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertParseError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: node references an id not strictly below its own")]
    ForwardReference { line: usize },
    #[error("line {line}: node is a second source (only the last node may be unreferenced)")]
    MultipleSources { line: usize },
    #[error("certificate contains no nodes")]
    EmptyFile,
}

fn syntax(line: usize, message: impl Into<String>) -> CertParseError {
    CertParseError::SyntaxError {
        line,
        message: message.into(),
    }
}

/// Parses CDNNF text into a circuit.
///
/// Enforces the topological id discipline and the unique-source rule;
/// read-once and decomposability are deliberately left to
/// [`validate_structure`](crate::ddnnf::validate_structure) so that malformed
/// proofs get precise rejection reasons.
pub fn read_cert(text: &str) -> Result<CertifiedDnnf, CertParseError> {
    if text.trim().is_empty() {
        return Err(CertParseError::EmptyFile);
    }

    // A comment line is a lone `c` token; the header itself starts with "cdnnf".
    let is_comment = |l: &str| {
        let t = l.trim_start();
        t == "c" || t.starts_with("c ") || t.starts_with("c\t")
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(move |(_, l)| !is_comment(l) && !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or(CertParseError::EmptyFile)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "cdnnf" {
        return Err(syntax(
            header_line,
            "expected header 'cdnnf <nodes> <edges> <vars> <clauses>'",
        ));
    }
    let parse_count = |field: &str| -> Result<usize, CertParseError> {
        field
            .parse()
            .map_err(|_| syntax(header_line, format!("bad header count {:?}", field)))
    };
    let num_nodes = parse_count(fields[1])?;
    let num_edges = parse_count(fields[2])?;
    let num_vars: u32 = fields[3]
        .parse()
        .map_err(|_| syntax(header_line, format!("bad variable count {:?}", fields[3])))?;
    let num_clauses = parse_count(fields[4])?;

    // Untrusted input: never size allocations from the header alone. Each
    // node takes one line, so the line count bounds any honest node count.
    let line_bound = text.lines().count();
    if num_nodes > line_bound {
        return Err(syntax(
            header_line,
            format!("header declares {} nodes but the file has {} lines", num_nodes, line_bound),
        ));
    }

    let mut nodes: Vec<Node> = Vec::with_capacity(num_nodes);
    let mut node_lines: Vec<usize> = Vec::with_capacity(num_nodes);
    let mut referenced = vec![false; num_nodes];
    let mut edges = 0usize;
    for (line_no, line) in lines {
        let id = nodes.len();
        if id == num_nodes {
            return Err(syntax(
                line_no,
                format!("more than {} node lines", num_nodes),
            ));
        }
        let mut fields = line.split_whitespace();
        let tag = fields.next().expect("blank lines filtered");
        let mut next_field = |what: &str| {
            fields
                .next()
                .ok_or_else(|| syntax(line_no, format!("missing {}", what)))
        };
        let mut child = |field: &str| -> Result<NodeId, CertParseError> {
            let child: usize = field
                .parse()
                .map_err(|_| syntax(line_no, format!("bad node id {:?}", field)))?;
            if child >= id {
                return Err(CertParseError::ForwardReference { line: line_no });
            }
            referenced[child] = true;
            Ok(NodeId::new(child))
        };
        let node = match tag {
            "T" => Node::TrueSink,
            "F" => {
                let clause: usize = next_field("clause index")?
                    .parse()
                    .map_err(|_| syntax(line_no, "bad clause index"))?;
                if clause == 0 || clause > num_clauses {
                    return Err(syntax(
                        line_no,
                        format!("clause index {} outside 1..={}", clause, num_clauses),
                    ));
                }
                Node::FalseSink {
                    clause: ClauseIdx::new(clause as u32),
                }
            }
            "D" => {
                let var: u32 = next_field("variable")?
                    .parse()
                    .map_err(|_| syntax(line_no, "bad variable"))?;
                if var == 0 || var > num_vars {
                    return Err(syntax(
                        line_no,
                        format!("variable {} outside 1..={}", var, num_vars),
                    ));
                }
                let lo = child(next_field("lo child")?)?;
                let hi = child(next_field("hi child")?)?;
                edges += 2;
                Node::Decision {
                    var: Var::new(var),
                    lo,
                    hi,
                }
            }
            "A" => {
                let left = child(next_field("left child")?)?;
                let right = child(next_field("right child")?)?;
                edges += 2;
                Node::And { left, right }
            }
            other => return Err(syntax(line_no, format!("unknown node tag {:?}", other))),
        };
        if fields.next().is_some() {
            return Err(syntax(line_no, "trailing fields on node line"));
        }
        nodes.push(node);
        node_lines.push(line_no);
    }

    if nodes.is_empty() {
        return Err(CertParseError::EmptyFile);
    }
    if nodes.len() != num_nodes {
        return Err(syntax(
            node_lines.last().copied().unwrap_or(header_line),
            format!(
                "header declares {} nodes but the body has {}",
                num_nodes,
                nodes.len()
            ),
        ));
    }
    if edges != num_edges {
        return Err(syntax(
            header_line,
            format!(
                "header declares {} edges but the body has {}",
                num_edges, edges
            ),
        ));
    }
    for (id, &was_referenced) in referenced.iter().enumerate().take(nodes.len() - 1) {
        if !was_referenced {
            return Err(CertParseError::MultipleSources {
                line: node_lines[id],
            });
        }
    }

    Ok(CertifiedDnnf::new(nodes, num_vars))
}

/// Renders a circuit as canonical CDNNF text.
///
/// Expects a structurally valid circuit (in particular the source must be the
/// last node, which topological numbering forces); `read_cert` of the output
/// reproduces the circuit node-for-node.
pub fn write_cert(d: &CertifiedDnnf) -> String {
    let max_clause = d
        .false_sinks()
        .map(|(_, clause)| clause.get())
        .max()
        .unwrap_or(0);
    let mut out = format!(
        "cdnnf {} {} {} {}\n",
        d.num_nodes(),
        d.size(),
        d.num_vars(),
        max_clause
    );
    for node in d.nodes() {
        match *node {
            Node::TrueSink => out.push_str("T\n"),
            Node::FalseSink { clause } => {
                out.push_str(&format!("F {}\n", clause));
            }
            Node::Decision { var, lo, hi } => {
                out.push_str(&format!("D {} {} {}\n", var, lo, hi));
            }
            Node::And { left, right } => {
                out.push_str(&format!("A {} {}\n", left, right));
            }
        }
    }
    out
}
