//! `sharpcert` — check certified dec-DNNF certificates for #SAT and maxSAT
//! claims over DIMACS CNF formulas, and compile certificates for either.
//!
//! Exit codes: 0 verdict valid, 1 certificate rejected, 2 usage/I-O/parse
//! error, 3 oracle refusal (instance too large).

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use sharpcert_core::checker::{check_correct, CorrectnessError};
use sharpcert_core::ddnnf::validate_structure;
use sharpcert_core::oracle::OracleError;
use sharpcert_core::*;

const EXIT_VALID: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_TOO_LARGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sharpcert",
    version,
    about = "Certified dec-DNNF proof checking for #SAT and maxSAT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Default)]
enum BranchingArg {
    #[default]
    MostFrequent,
    SmallestIndex,
}

impl From<BranchingArg> for Branching {
    fn from(arg: BranchingArg) -> Branching {
        match arg {
            BranchingArg::MostFrequent => Branching::MostFrequent,
            BranchingArg::SmallestIndex => Branching::SmallestIndex,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Default)]
enum Mode {
    /// Certificate for the formula itself (model counting).
    #[default]
    Sharp,
    /// Certificate for the selector-augmented formula (maxSAT).
    Max,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a #SAT certificate against a CNF formula
    CheckCount {
        /// DIMACS CNF file, or - for stdin
        cnf: String,
        /// CDNNF certificate file, or - for stdin
        cert: String,
        /// Model count the certificate must certify
        #[arg(long)]
        expect: Option<BigUint>,
        /// Suppress the verdict line; communicate by exit code only
        #[arg(long)]
        quiet: bool,
    },
    /// Verify a maxSAT certificate against a CNF formula
    CheckMaxsat {
        /// DIMACS CNF file, or - for stdin
        cnf: String,
        /// CDNNF certificate file over the selector-augmented formula
        cert: String,
        /// Maximum satisfiable clause count the certificate must certify
        #[arg(long)]
        expect: Option<u64>,
    },
    /// Compile a CNF into a certified dec-DNNF
    Compile {
        /// DIMACS CNF file, or - for stdin
        cnf: String,
        /// Output certificate path, or - for stdout
        out: String,
        #[arg(long, value_enum, default_value_t)]
        branching: BranchingArg,
        /// Reuse identical residual components during the search
        #[arg(long)]
        cache: bool,
        #[arg(long, value_enum, default_value_t)]
        mode: Mode,
    },
    /// Brute-force reference values for desk-scale instances
    Oracle {
        /// DIMACS CNF file, or - for stdin
        cnf: String,
        /// Report the maximum number of satisfiable clauses instead of #F
        #[arg(long)]
        maxsat: bool,
    },
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| format!("stdin: {}", e))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))
    }
}

fn load_formula(path: &str) -> Result<CnfFormula, String> {
    parse_dimacs(&read_input(path)?).map_err(|e| format!("{}: {}", path, e))
}

fn load_certificate(path: &str) -> Result<CertifiedDnnf, String> {
    read_cert(&read_input(path)?).map_err(|e| format!("{}: {}", path, e))
}

fn guard_double_stdin(a: &str, b: &str) -> Result<(), String> {
    if a == "-" && b == "-" {
        return Err("only one input may come from stdin".into());
    }
    Ok(())
}

fn formula_digest(f: &CnfFormula) -> String {
    let hash = Sha256::digest(f.to_dimacs().as_bytes());
    hash.iter().map(|b| format!("{:02x}", b)).collect()
}

/// Human-oriented payload for an INVALID line; `checked` is the formula the
/// certificate was actually verified against (the selector-augmented one for
/// maxSAT).
fn invalid_detail(reason: &InvalidReason, checked: &CnfFormula, d: &CertifiedDnnf) -> String {
    match reason {
        InvalidReason::StructureInvalid => validate_structure(d)
            .violations
            .first()
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into()),
        InvalidReason::VarCountMismatch => {
            format!("cnf {} cert {}", checked.num_vars(), d.num_vars())
        }
        InvalidReason::NotCorrect => match check_correct(d, checked) {
            Ok(report) => report
                .violations
                .first()
                .map(|v| format!("sink {} literal {}", v.sink, v.literal))
                .unwrap_or_else(|| "-".into()),
            Err(CorrectnessError::TautologicalLabel { sink, clause }) => {
                format!("sink {} tautological label {}", sink, clause)
            }
            Err(CorrectnessError::BadClauseRef { sink, .. }) => format!("sink {}", sink),
        },
        InvalidReason::ClauseNotInFormula { sink } => format!("sink {}", sink),
        InvalidReason::NotEntailing { clause } => format!("clause {}", clause),
        InvalidReason::CountMismatch { expected, actual } => {
            format!("expected {} actual {}", expected, actual)
        }
    }
}

fn report_verdict(
    verdict: &Verdict,
    value_key: &str,
    digest: &str,
    checked: &CnfFormula,
    d: &CertifiedDnnf,
    quiet: bool,
) -> u8 {
    match verdict {
        Verdict::Valid(value) => {
            if !quiet {
                println!("VALID {}={} formula_sha256={}", value_key, value, digest);
            }
            EXIT_VALID
        }
        Verdict::Invalid(reason) => {
            if !quiet {
                println!(
                    "INVALID reason={} detail={}",
                    reason,
                    invalid_detail(reason, checked, d)
                );
            }
            EXIT_INVALID
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::CheckCount {
            cnf,
            cert,
            expect,
            quiet,
        } => {
            guard_double_stdin(&cnf, &cert)?;
            let f = load_formula(&cnf)?;
            let d = load_certificate(&cert)?;
            let verdict = check_sharp_sat(&f, &d, expect.as_ref());
            Ok(report_verdict(
                &verdict,
                "count",
                &formula_digest(&f),
                &f,
                &d,
                quiet,
            ))
        }
        Command::CheckMaxsat { cnf, cert, expect } => {
            guard_double_stdin(&cnf, &cert)?;
            let f = load_formula(&cnf)?;
            let d = load_certificate(&cert)?;
            let verdict = check_max_sat(&f, &d, expect);
            let tilde = build_tilde(&f);
            Ok(report_verdict(
                &verdict,
                "max",
                &formula_digest(&f),
                &tilde.formula,
                &d,
                false,
            ))
        }
        Command::Compile {
            cnf,
            out,
            branching,
            cache,
            mode,
        } => {
            let f = load_formula(&cnf)?;
            let target = match mode {
                Mode::Sharp => f,
                Mode::Max => build_tilde(&f).formula,
            };
            let options = CompileOptions {
                branching: branching.into(),
                caching: cache,
            };
            let text = write_cert(&compile(&target, options));
            if out == "-" {
                print!("{}", text);
            } else {
                std::fs::write(&out, text).map_err(|e| format!("{}: {}", out, e))?;
            }
            Ok(EXIT_VALID)
        }
        Command::Oracle { cnf, maxsat } => {
            let f = load_formula(&cnf)?;
            let limit = OracleLimit::default();
            let outcome = if maxsat {
                oracle_maxsat(&f, limit).map(|m| m.to_string())
            } else {
                oracle_count(&f, limit).map(|k| k.to_string())
            };
            match outcome {
                Ok(value) => {
                    println!("{}", value);
                    Ok(EXIT_VALID)
                }
                Err(err @ OracleError::TooLarge { .. }) => {
                    eprintln!("sharpcert: {}", err);
                    Ok(EXIT_TOO_LARGE)
                }
                Err(err) => Err(err.to_string()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("sharpcert: {}", message);
            ExitCode::from(EXIT_ERROR)
        }
    }
}
