//! The must-fail corpus: four paradoxes of impredicative or type-in-type
//! systems. Each file checks up to a known definition and is rejected at
//! the next one with a level-related error.

use serde::Serialize;

use crate::program::{check_source, CheckOptions};
use crate::signature::Signature;

pub struct Paradox {
    pub file: &'static str,
    pub source: &'static str,
    /// Declarations that must check, in order.
    pub accepted: &'static [&'static str],
    /// The declaration that must be rejected.
    pub rejected: &'static str,
}

pub const PARADOXES: [Paradox; 4] = [
    Paradox {
        file: "burali_forti.stt",
        source: include_str!("../../../../corpus/burali_forti.stt"),
        accepted: &["neg", "U", "WF", "wf"],
        rejected: "loop",
    },
    Paradox {
        file: "russell.stt",
        source: include_str!("../../../../corpus/russell.stt"),
        accepted: &["neg", "Id", "NPair", "nfst", "U", "regular"],
        rejected: "R",
    },
    Paradox {
        file: "hurkens.stt",
        source: include_str!("../../../../corpus/hurkens.stt"),
        accepted: &["P", "U", "tau", "sig", "Delta", "Omega", "M"],
        rejected: "D",
    },
    Paradox {
        file: "reynolds.stt",
        source: include_str!("../../../../corpus/reynolds.stt"),
        accepted: &["neg", "Id", "Pair", "NPair", "A0", "f", "P", "a0"],
        rejected: "witness",
    },
];

#[derive(Clone, Debug, Serialize)]
pub struct ParadoxOutcome {
    pub file: String,
    pub accepted: Vec<String>,
    pub rejected: Option<String>,
    pub code: Option<String>,
    pub message: Option<String>,
    pub as_documented: bool,
}

impl ParadoxOutcome {
    pub fn text(&self) -> String {
        let verdict = if self.as_documented { "as documented" } else { "UNEXPECTED" };
        format!(
            "{}: accepted [{}], rejected {} with {}: {}",
            self.file,
            self.accepted.join(", "),
            self.rejected.as_deref().unwrap_or("nothing"),
            self.code.as_deref().unwrap_or("-"),
            verdict
        )
    }
}

pub fn run_paradox(p: &Paradox) -> ParadoxOutcome {
    let mut sig = Signature::new();
    let r = check_source(&mut sig, p.source, &CheckOptions::file(p.file));
    let accepted: Vec<String> = r.checked.iter().map(|c| c.entry.name().to_string()).collect();
    let diag = r.diagnostics.first();
    let as_documented = accepted.iter().map(String::as_str).eq(p.accepted.iter().copied())
        && r.diagnostics.len() == 1
        && diag.is_some_and(|d| d.decl.as_deref() == Some(p.rejected) && d.code.is_level_related());
    ParadoxOutcome {
        file: p.file.to_string(),
        accepted,
        rejected: diag.and_then(|d| d.decl.clone()),
        code: diag.map(|d| d.code.as_str().to_string()),
        message: diag.map(|d| d.message.clone()),
        as_documented,
    }
}

pub fn run_paradox_corpus() -> Vec<ParadoxOutcome> {
    PARADOXES.iter().map(run_paradox).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_paradox_fails_where_documented() {
        for o in run_paradox_corpus() {
            assert!(o.as_documented, "{}", o.text());
        }
    }
}
