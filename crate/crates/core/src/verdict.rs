//! Classification of solver output and its reading as a BMC answer.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn mid(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }
}

pub type Witness = BTreeMap<String, Interval>;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverVerdict {
    Unsat,
    DeltaSat { delta: f64, witness: Option<Witness> },
    Unknown { raw: String },
    Failure { exit_code: Option<i32>, stderr: String },
}

impl fmt::Display for SolverVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverVerdict::Unsat => f.write_str("unsat"),
            SolverVerdict::DeltaSat { delta, .. } => write!(f, "delta-sat (delta = {delta})"),
            SolverVerdict::Unknown { .. } => f.write_str("unknown"),
            SolverVerdict::Failure { exit_code: Some(c), .. } => write!(f, "failure (exit {c})"),
            SolverVerdict::Failure { exit_code: None, .. } => f.write_str("failure (killed)"),
        }
    }
}

const EXCERPT: usize = 400;

fn excerpt(s: &str) -> String {
    s.trim().chars().take(EXCERPT).collect()
}

/// Reads `name : ... [lo, hi]`, taking the last bracketed pair on the line.
fn witness_line(line: &str) -> Option<(String, Interval)> {
    let (name, rest) = line.split_once(':')?;
    let name = name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return None;
    }
    let open = rest.rfind('[')?;
    let close = open + rest[open..].find(']')?;
    let (lo, hi) = rest[open + 1..close].split_once(',')?;
    let lo: f64 = lo.trim().parse().ok()?;
    let hi: f64 = hi.trim().parse().ok()?;
    (lo.is_finite() && hi.is_finite() && lo <= hi).then(|| (name.to_string(), Interval { lo, hi }))
}

/// Classifies raw solver output. Total: every input yields a verdict.
pub fn parse_verdict(stdout: &[u8], stderr: &[u8], exit_code: Option<i32>) -> SolverVerdict {
    let out = String::from_utf8_lossy(stdout);
    let err = String::from_utf8_lossy(stderr);
    let lines: Vec<&str> = out.lines().map(str::trim).collect();
    for (n, line) in lines.iter().enumerate() {
        let first = line.split_whitespace().next().unwrap_or("");
        match first {
            "unsat" => return SolverVerdict::Unsat,
            "delta-sat" | "sat" => {
                let delta = line
                    .split_once('=')
                    .and_then(|(_, d)| d.trim().parse::<f64>().ok())
                    .filter(|d| d.is_finite() && *d >= 0.0)
                    .unwrap_or(0.0);
                let w: Witness = lines[n + 1..].iter().filter_map(|l| witness_line(l)).collect();
                return SolverVerdict::DeltaSat { delta, witness: (!w.is_empty()).then_some(w) };
            }
            "unknown" | "timeout" => return SolverVerdict::Unknown { raw: excerpt(&out) },
            _ => {}
        }
    }
    match exit_code {
        Some(0) => SolverVerdict::Unknown { raw: excerpt(&out) },
        code => SolverVerdict::Failure { exit_code: code, stderr: excerpt(&err) },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BmcAnswer {
    /// No violation within `k` steps.
    HoldsUpTo(usize),
    /// A δ-sat witness; real only once replay confirms it.
    CandidateCounterexample(Option<Witness>),
    Inconclusive,
}

/// Reads a verdict on `M ∧ ¬φ` as an answer about φ.
pub fn interpret(v: &SolverVerdict, k: usize) -> BmcAnswer {
    match v {
        SolverVerdict::Unsat => BmcAnswer::HoldsUpTo(k),
        SolverVerdict::DeltaSat { witness, .. } => BmcAnswer::CandidateCounterexample(witness.clone()),
        SolverVerdict::Unknown { .. } | SolverVerdict::Failure { .. } => BmcAnswer::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        assert_eq!(parse_verdict(b"unsat\n", b"", Some(0)), SolverVerdict::Unsat);
        assert_eq!(
            parse_verdict(b"delta-sat with delta = 0.00100000000000000\n", b"", Some(0)),
            SolverVerdict::DeltaSat { delta: 0.001, witness: None }
        );
        assert_eq!(
            parse_verdict(b"", b"Killed", Some(137)),
            SolverVerdict::Failure { exit_code: Some(137), stderr: "Killed".into() }
        );
        assert!(matches!(parse_verdict(b"unknown", b"", Some(0)), SolverVerdict::Unknown { .. }));
    }

    #[test]
    fn witness_intervals() {
        let out = b"delta-sat with delta = 0.001\nx1 : [ ENTIRE ] = [1.5, 1.75]\nd_1 : [0.25, 0.25]\nbad : [3, 1]\n";
        let SolverVerdict::DeltaSat { witness: Some(w), .. } = parse_verdict(out, b"", Some(0)) else {
            panic!("expected a witness");
        };
        assert_eq!(w.len(), 2);
        assert_eq!(w["x1"].mid(), 1.625);
    }

    #[test]
    fn interpretation() {
        assert_eq!(interpret(&SolverVerdict::Unsat, 20), BmcAnswer::HoldsUpTo(20));
        assert_eq!(interpret(&SolverVerdict::Unknown { raw: String::new() }, 3), BmcAnswer::Inconclusive);
        assert_eq!(
            interpret(&SolverVerdict::DeltaSat { delta: 0.1, witness: None }, 3),
            BmcAnswer::CandidateCounterexample(None)
        );
    }
}
