//! Lemma suites. Each trial generates a judgement, confirms the typer
//! accepts it, transforms it as the lemma says, and re-checks.

use rand::Rng;
use serde::Serialize;

use crate::context::{Context, Entry};
use crate::eval::{is_value, Evaluator};
use crate::levels::Level;
use crate::signature::Signature;
use crate::term::fresh_name;
use crate::typer::check_judgement_with;

use super::gen::{annotate, prelude, Coverage, Gen, Judgement};

pub const SUITES: [&str; 8] = [
    "cumulativity",
    "displaceability",
    "restriction",
    "floating",
    "weakening",
    "substitution",
    "preservation",
    "progress",
];

/// Reduction budget per trial for the preservation and progress suites.
pub const STEP_BUDGET: usize = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub fuel: u32,
    pub judgement: String,
    pub derived: String,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// Trials where the lemma had nothing to say (e.g. no variable to
    /// substitute); they count as passes.
    pub vacuous: usize,
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip)]
    pub coverage: Coverage,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "{}: {} trials, {} passed, {} failed ({} vacuous), seed {}\n",
            self.suite, self.trials, self.passed, self.failed, self.vacuous, self.seed
        );
        for c in &self.counterexamples {
            s.push_str(&format!(
                "  counterexample (seed {}, fuel {}):\n    given   {}\n    derived {}\n    error   {}\n",
                c.seed, c.fuel, c.judgement, c.derived, c.error
            ));
        }
        s
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[derive(Debug)]
enum Outcome {
    Pass,
    Vacuous,
    Fail { given: String, derived: String, error: String },
}

fn accept(sig: &Signature, j: &Judgement) -> Result<(), String> {
    check_judgement_with(sig, &j.ctx, &j.term, j.level, &j.ty, STEP_BUDGET).map_err(|e| e.render())
}

fn judge(sig: &Signature, given: &Judgement, derived: Judgement) -> Outcome {
    match accept(sig, &derived) {
        Ok(()) => Outcome::Pass,
        Err(error) => Outcome::Fail { given: given.to_string(), derived: derived.to_string(), error },
    }
}

/// Substitution needs a context entry it can instantiate; a few fresh
/// draws make vacuous trials rare.
const SUBST_ATTEMPTS: u64 = 8;

fn trial(suite: &str, sig: &Signature, seed: u64, fuel: u32, cov: &mut Coverage) -> Outcome {
    let attempts = if suite == "substitution" { SUBST_ATTEMPTS } else { 1 };
    let mut o = Outcome::Vacuous;
    for a in 0..attempts {
        o = trial_once(suite, sig, seed.wrapping_add(a.wrapping_mul(0x2545_F491_4F6C_DD1D)), fuel, cov);
        if !matches!(o, Outcome::Vacuous) {
            break;
        }
    }
    o
}

fn trial_once(suite: &str, sig: &Signature, seed: u64, fuel: u32, cov: &mut Coverage) -> Outcome {
    let mut g = Gen::new(sig, seed);
    let closed = matches!(suite, "preservation" | "progress");
    let j = if closed { g.closed(fuel) } else { g.judgement(fuel) };
    cov.merge(&g.coverage);
    if let Err(error) = accept(sig, &j) {
        return Outcome::Fail { given: j.to_string(), derived: "(generator output)".into(), error };
    }
    let k = j.level;
    match suite {
        "cumulativity" => {
            let k2 = Level(k.0 + g.rng().gen_range(1..=3));
            judge(sig, &j, Judgement { level: k2, ..j.clone() })
        }
        "displaceability" => {
            let i = g.rng().gen_range(1..=3);
            let d = Judgement {
                ctx: j.ctx.displace(Level(i)),
                term: j.term.displace(i),
                level: Level(k.0 + i),
                ty: j.ty.displace(i),
            };
            judge(sig, &j, d)
        }
        "restriction" => judge(sig, &j, Judgement { ctx: j.ctx.restrict(k), ..j.clone() }),
        "floating" => {
            let k2 = Level(k.0 + g.rng().gen_range(0..=3));
            let ctx = j.ctx.restrict(k).float(k, k2).expect("k <= k2");
            judge(sig, &j, Judgement { ctx, level: k2, ..j.clone() })
        }
        "weakening" => {
            let entries = j.ctx.entries();
            let p = g.rng().gen_range(0..=entries.len());
            let l = g.rng().gen_range(0..=k.0 + 3);
            let prefix: Vec<Entry> = entries[..p].to_vec();
            let ty = g.ty(&prefix, l, 1);
            let z = fresh_name("w", |c| entries.iter().any(|e| &*e.name == c));
            let mut new = prefix;
            new.push(Entry { name: z, level: Level(l), ty });
            new.extend(entries[p..].iter().cloned());
            judge(sig, &j, Judgement { ctx: Context::from_entries(new), ..j.clone() })
        }
        "substitution" => {
            let entries = j.ctx.entries();
            let mut order: Vec<usize> = (0..entries.len()).collect();
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), g.rng());
            for p in order {
                let e = &entries[p];
                let prefix = entries[..p].to_vec();
                let Some(b) = g.inhabit(&prefix, e.level.0, &e.ty, 2) else { continue };
                let b = annotate(sig, b, &e.ty);
                // The substituted value must itself be well-typed.
                let bj = Judgement {
                    ctx: Context::from_entries(prefix.clone()),
                    term: b.clone(),
                    level: e.level,
                    ty: e.ty.clone(),
                };
                if let Err(error) = accept(sig, &bj) {
                    return Outcome::Fail { given: j.to_string(), derived: bj.to_string(), error };
                }
                let mut new = prefix;
                new.extend(entries[p + 1..].iter().map(|f| Entry { ty: f.ty.subst(&e.name, &b), ..f.clone() }));
                let d = Judgement {
                    ctx: Context::from_entries(new),
                    term: j.term.subst(&e.name, &b),
                    level: k,
                    ty: j.ty.subst(&e.name, &b),
                };
                return judge(sig, &j, d);
            }
            Outcome::Vacuous
        }
        "preservation" => {
            // The weak-head normal form is re-checked. Intermediate steps can
            // expose unannotated head redexes, which bidirectional checking
            // cannot infer even though they are well-typed.
            match Evaluator::new(sig, STEP_BUDGET).whnf(&j.term) {
                Ok(w) if w.alpha_eq(&j.term) => Outcome::Vacuous,
                Ok(w) => judge(sig, &j, Judgement { term: w, ..j.clone() }),
                Err(e) => Outcome::Fail { given: j.to_string(), derived: "(whnf)".into(), error: e.to_string() },
            }
        }
        "progress" => {
            if is_value(sig, &j.term) {
                return Outcome::Pass;
            }
            match Evaluator::new(sig, STEP_BUDGET).step(&j.term) {
                Ok(Some(_)) => Outcome::Pass,
                Ok(None) => Outcome::Fail {
                    given: j.to_string(),
                    derived: "(no step)".into(),
                    error: "closed well-typed term is neither a value nor reducible".into(),
                },
                Err(e) => Outcome::Fail { given: j.to_string(), derived: "(one step)".into(), error: e.to_string() },
            }
        }
        _ => unreachable!("suite names are validated"),
    }
}

/// Seed of trial `n` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (n as u64).wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Trial sizes cycle through 1..=MAX_FUEL.
pub const MAX_FUEL: u32 = 5;

pub fn run_suite(name: &str, trials: usize, seed: u64) -> Option<SuiteReport> {
    if !SUITES.contains(&name) {
        return None;
    }
    let sig = prelude();
    let mut rep = SuiteReport {
        suite: name.to_string(),
        seed,
        trials,
        passed: 0,
        failed: 0,
        vacuous: 0,
        counterexamples: Vec::new(),
        coverage: Coverage::default(),
    };
    for n in 0..trials {
        let s = trial_seed(seed, n);
        let fuel = 1 + (n as u32 % MAX_FUEL);
        match trial(name, &sig, s, fuel, &mut rep.coverage) {
            Outcome::Pass => rep.passed += 1,
            Outcome::Vacuous => {
                rep.passed += 1;
                rep.vacuous += 1;
            }
            Outcome::Fail { .. } => {
                rep.failed += 1;
                rep.counterexamples.push(shrink(name, &sig, s, fuel));
            }
        }
    }
    Some(rep)
}

/// The same seed at the smallest fuel that still fails.
fn shrink(name: &str, sig: &Signature, seed: u64, fuel: u32) -> Counterexample {
    let mut scratch = Coverage::default();
    let mut best = None;
    for f in (1..=fuel).rev() {
        if let Outcome::Fail { given, derived, error } = trial(name, sig, seed, f, &mut scratch) {
            best = Some(Counterexample { seed, fuel: f, judgement: given, derived, error });
        }
    }
    best.unwrap_or(Counterexample {
        seed,
        fuel,
        judgement: "(not reproducible)".into(),
        derived: String::new(),
        error: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_a_short_run() {
        for s in SUITES {
            let r = run_suite(s, 100, 3).unwrap();
            assert!(r.ok(), "{}", r.text());
            assert_eq!(r.passed, 100);
        }
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("soundness", 1, 0).is_none());
    }

    #[test]
    fn report_json_fields() {
        let r = run_suite("progress", 5, 1).unwrap();
        let v = r.json();
        for k in ["suite", "seed", "trials", "passed", "failed", "vacuous", "counterexamples"] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
    }
}
