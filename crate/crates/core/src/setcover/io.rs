//! Plain-text set-cover instances.
//!
//! ```text
//! # comments and blank lines are ignored
//! n 3
//! m 2
//! q 0.7
//! p 0.5 0.0      # one row per candidate, m probabilities each
//! p 0.2 0.6
//! p 0.0 0.9
//! conflict 0 2   # unordered candidate pair, any number of lines
//! ```

use std::fmt::Write as _;

use super::{MilpInstance, SolveOutcome};
use crate::error::SetCoverError;
use crate::predictor::ProbMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub p: ProbMatrix,
    pub q: f64,
    pub conflicts: Vec<(usize, usize)>,
}

impl InstanceFile {
    pub fn to_milp(&self) -> Result<MilpInstance, SetCoverError> {
        super::build_milp(&self.p, self.q, &self.conflicts)
    }
}

fn err(line: usize, message: impl Into<String>) -> SetCoverError {
    SetCoverError::Parse { line, message: message.into() }
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, SetCoverError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("invalid {what} '{tok}'")))
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, SetCoverError> {
    let (mut n, mut m, mut q) = (None, None, None);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut conflicts = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let key = toks.next().unwrap_or_default();
        match key {
            "n" => n = Some(number::<usize>(toks.next(), line, "n")?),
            "m" => m = Some(number::<usize>(toks.next(), line, "m")?),
            "q" => q = Some(number::<f64>(toks.next(), line, "q")?),
            "p" => {
                let m = m.ok_or_else(|| err(line, "'m' must precede probability rows"))?;
                let row: Vec<f64> = toks.map(|t| number(Some(t), line, "probability")).collect::<Result<_, _>>()?;
                if row.len() != m {
                    return Err(err(line, format!("expected {m} probabilities, found {}", row.len())));
                }
                if let Some(v) = row.iter().find(|v| !(0.0..1.0).contains(*v)) {
                    return Err(err(line, format!("probability {v} outside [0, 1)")));
                }
                rows.push(row);
                continue;
            }
            "conflict" => {
                let a: usize = number(toks.next(), line, "candidate index")?;
                let b: usize = number(toks.next(), line, "candidate index")?;
                conflicts.push((a, b));
            }
            other => return Err(err(line, format!("unknown key '{other}'"))),
        }
        if toks.next().is_some() {
            return Err(err(line, "trailing tokens"));
        }
    }
    let n = n.ok_or_else(|| err(last_line, "missing 'n'"))?;
    let m = m.ok_or_else(|| err(last_line, "missing 'm'"))?;
    let q = q.unwrap_or(0.7);
    if !(q > 0.0 && q < 1.0) {
        return Err(SetCoverError::InvalidTarget(q));
    }
    if rows.len() != n {
        return Err(err(last_line, format!("expected {n} probability rows, found {}", rows.len())));
    }
    if let Some(&(a, b)) = conflicts.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(SetCoverError::InvalidConflict(a, b));
    }
    Ok(InstanceFile { p: ProbMatrix::from_rows(&rows, m), q, conflicts })
}

pub fn format_instance(inst: &InstanceFile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n {}\nm {}\nq {}", inst.p.n(), inst.p.m(), inst.q);
    for i in 0..inst.p.n() {
        s.push('p');
        for v in inst.p.row(i) {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    for (a, b) in &inst.conflicts {
        let _ = writeln!(s, "conflict {a} {b}");
    }
    s
}

/// Human-readable solver report: status, selected indices, failure probabilities.
pub fn format_outcome(out: &SolveOutcome, failure: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status {}", out.status);
    let sel: Vec<String> = out.plan.selected.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(s, "selected {}", sel.join(" "));
    let _ = writeln!(s, "objective {}", out.plan.objective());
    if !out.dropped_garments.is_empty() {
        let d: Vec<String> = out.dropped_garments.iter().map(|j| j.to_string()).collect();
        let _ = writeln!(s, "dropped {}", d.join(" "));
    }
    for (j, f) in failure.iter().enumerate() {
        let _ = writeln!(s, "failure {j} {f:.6}");
    }
    let _ = writeln!(s, "nodes {}", out.nodes_explored);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# demo\nn 3\nm 2\nq 0.7\np 0.5 0.0\np 0.2 0.6 # trailing comment\np 0.0 0.9\nconflict 0 2\n";

    #[test]
    fn parses_sample() {
        let f = parse_instance(SAMPLE).unwrap();
        assert_eq!((f.p.n(), f.p.m(), f.q), (3, 2, 0.7));
        assert_eq!(f.p.get(1, 1), 0.6);
        assert_eq!(f.conflicts, vec![(0, 2)]);
        assert_eq!(parse_instance(&format_instance(&f)).unwrap(), f);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "n 2\nm 2\np 0.1 0.2\np 0.1\n";
        match parse_instance(bad) {
            Err(SetCoverError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match parse_instance("n 1\nm 1\nfoo 3\n") {
            Err(SetCoverError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_instance("n 1\nm 1\np 1.0\n").is_err());
        assert!(parse_instance("n 1\nm 1\np 0.2\nconflict 0 4\n").is_err());
    }
}
