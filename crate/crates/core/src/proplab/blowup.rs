//! The nested-arrow family `T1 .. Tn`: each `T(i+1)` is a six-fold arrow
//! over `Ti`, with `Type` at the leaves of `T1`. Systems with explicit
//! universe polymorphism generate constraints exponential in `i`; here each
//! definition contributes a constant number.

use std::time::{Duration, Instant};

use crate::diagnostic::Diagnostic;
use crate::program::CheckOptions;
use crate::signature::Signature;

pub const MAX_DEPTH: usize = 12;

pub fn blowup_source(depth: usize) -> String {
    let mut s = String::new();
    for i in 1..=depth {
        let leaf = if i == 1 { "Type".to_string() } else { format!("T{}", i - 1) };
        s.push_str(&format!("T{i} : Type\nT{i} = {}\n\n", vec![leaf; 6].join(" -> ")));
    }
    s
}

#[derive(Clone, Debug)]
pub struct BlowupRow {
    pub name: String,
    pub level: u32,
    pub constraints: usize,
    pub time: Duration,
}

#[derive(Clone, Debug)]
pub struct BlowupReport {
    pub rows: Vec<BlowupRow>,
    pub total: Duration,
}

impl BlowupReport {
    /// Largest ratio between consecutive constraint counts.
    pub fn max_ratio(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].constraints as f64 / w[0].constraints.max(1) as f64).fold(0.0, f64::max)
    }
}

/// Check `T1 .. T(depth)` one definition at a time, timing each.
pub fn run_blowup(depth: usize) -> Result<BlowupReport, Diagnostic> {
    assert!(depth <= MAX_DEPTH, "depth is limited to {MAX_DEPTH}");
    let src = blowup_source(depth);
    let decls = crate::surface::parse_program(&src)?;
    let mut sig = Signature::new();
    let opts = CheckOptions::file("blowup.stt");
    let start = Instant::now();
    let mut rows = Vec::new();
    for pair in decls.chunks(2) {
        let t0 = Instant::now();
        let mut rep = crate::program::check_program(&mut sig, pair, &opts);
        let time = t0.elapsed();
        if let Some(e) = rep.diagnostics.pop() {
            return Err(e);
        }
        let c = rep.checked.pop().expect("one declaration per chunk");
        rows.push(BlowupRow {
            name: c.entry.name().to_string(),
            level: c.entry.level().map_or(0, |l| l.0),
            constraints: c.constraints.len(),
            time,
        });
    }
    Ok(BlowupReport { rows, total: start.elapsed() })
}
