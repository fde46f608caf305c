//! Trace CSV files and the line-oriented check report.

use std::fmt::{self, Write as _};
use std::io::Write;

use ghasmt_core::sim::Trace;

/// Writes one row per sample with header `t,state,<columns...>`.
pub fn write_trace_csv<W: Write>(tr: &Trace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = ["t", "state"].into_iter().chain(tr.columns.iter().map(String::as_str)).collect();
    w.write_record(&header)?;
    for seg in &tr.segments {
        for s in &seg.samples {
            let mut row = vec![format!("{}", s.t), seg.state.clone()];
            row.extend(s.values.iter().map(|x| format!("{x}")));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Final answer for one requirement, ordered by precedence when several
/// requirements are checked together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    HoldsUpTo(usize),
    Inconclusive,
    Candidate,
    Confirmed,
}

impl Answer {
    pub fn exit_code(self) -> i32 {
        match self {
            Answer::HoldsUpTo(_) => 0,
            Answer::Confirmed => 1,
            Answer::Candidate => 2,
            Answer::Inconclusive => 3,
        }
    }

    fn rank(self) -> u8 {
        match self {
            Answer::HoldsUpTo(_) => 0,
            Answer::Inconclusive => 1,
            Answer::Candidate => 2,
            Answer::Confirmed => 3,
        }
    }

    /// The answer that decides the exit code of a multi-requirement run.
    pub fn worst(answers: impl IntoIterator<Item = Answer>) -> Option<Answer> {
        answers.into_iter().max_by_key(|a| a.rank())
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::HoldsUpTo(k) => write!(f, "holds-up-to-{k}"),
            Answer::Inconclusive => f.write_str("inconclusive"),
            Answer::Candidate => f.write_str("candidate-counterexample"),
            Answer::Confirmed => f.write_str("confirmed-counterexample"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: String,
    pub requirement: String,
    pub k: usize,
    pub delta: f64,
    pub dwell_max: f64,
    pub smt: String,
    pub engine: String,
    pub verdict: String,
    pub answer: Answer,
    pub notes: Vec<String>,
    pub trace: Option<String>,
    pub wall_time_s: f64,
}

impl PropertyReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "property={}", self.property);
        let _ = writeln!(s, "requirement={}", self.requirement);
        let _ = writeln!(s, "k={}", self.k);
        let _ = writeln!(s, "delta={}", self.delta);
        let _ = writeln!(s, "dwell_max={}", self.dwell_max);
        let _ = writeln!(s, "smt={}", self.smt);
        let _ = writeln!(s, "engine={}", self.engine);
        let _ = writeln!(s, "verdict={}", self.verdict.replace('\n', " "));
        let _ = writeln!(s, "answer={}", self.answer);
        let _ = writeln!(s, "exit={}", self.answer.exit_code());
        for n in &self.notes {
            let _ = writeln!(s, "note={}", n.replace('\n', " "));
        }
        if let Some(t) = &self.trace {
            let _ = writeln!(s, "trace={t}");
        }
        let _ = writeln!(s, "wall_time_s={:.3}", self.wall_time_s);
        s
    }
}

/// Renders every property block followed by the summary block.
pub fn render_report(reports: &[PropertyReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&r.render());
        s.push('\n');
    }
    s.push_str("[summary]\n");
    for r in reports {
        let _ = writeln!(s, "{} {} exit={}", r.property, r.answer, r.answer.exit_code());
    }
    let overall = Answer::worst(reports.iter().map(|r| r.answer)).map_or(0, Answer::exit_code);
    let _ = writeln!(s, "overall_exit={overall}");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ghasmt_core::sim::{Sample, Segment};
    use std::collections::BTreeMap;

    #[test]
    fn csv_layout() {
        let seg = |state: &str, t0: f64, xs: &[(f64, f64)]| Segment {
            state: state.into(),
            t_start: t0,
            t_end: xs.last().unwrap().0,
            entry: vec![xs[0].1],
            samples: xs.iter().map(|&(t, x)| Sample { t, values: vec![x] }).collect(),
        };
        let tr = Trace {
            columns: vec!["y1".into()],
            constants: BTreeMap::new(),
            segments: vec![seg("S0", 0.0, &[(0.0, 0.0), (0.5, 1.5)]), seg("S1", 0.5, &[(0.5, 0.0)])],
            events: Vec::new(),
        };
        let mut out = Vec::new();
        write_trace_csv(&tr, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,state,y1\n0,S0,0\n0.5,S0,1.5\n0.5,S1,0\n");
    }

    #[test]
    fn worst_answer_decides_the_exit_code() {
        use Answer::*;
        assert_eq!(Answer::worst([HoldsUpTo(3), Inconclusive]), Some(Inconclusive));
        assert_eq!(Answer::worst([Candidate, Confirmed, HoldsUpTo(1)]), Some(Confirmed));
        assert_eq!(Answer::worst([]), None);
    }
}
