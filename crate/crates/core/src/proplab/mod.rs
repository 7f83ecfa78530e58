//! Executable metatheory: random well-typed judgements, lemma suites over
//! them, the paradox corpus, and the nested-arrow benchmark.

pub mod blowup;
pub mod gen;
pub mod lemmas;
pub mod paradox;

pub use blowup::{blowup_source, run_blowup, BlowupReport};
pub use gen::{gen_well_typed, prelude, Coverage, Gen, Judgement};
pub use lemmas::{run_suite, SuiteReport, SUITES};
pub use paradox::{run_paradox_corpus, ParadoxOutcome, PARADOXES};
