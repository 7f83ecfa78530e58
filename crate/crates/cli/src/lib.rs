//! Command-line front end. `run` takes the argument list (without the
//! program name) and writes to the given streams, so tests can drive it
//! without spawning a process.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser};
use stratt::proplab::blowup::{run_blowup, MAX_DEPTH};
use stratt::surface::print_entry;
use stratt::{check_source, normalize, CheckOptions, Diagnostic, ErrorCode, Signature, Term, DEFAULT_FUEL};

#[derive(Args, Debug)]
struct CheckArgs {
    /// Source files, checked in order against one growing signature.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Reject any omitted level or displacement instead of inferring it.
    #[arg(long)]
    no_infer: bool,
    /// Print the checked declarations with every level written out.
    #[arg(long)]
    print_levels: bool,
    /// Print the level constraints generated for each declaration.
    #[arg(long)]
    trace_constraints: bool,
    /// Keep checking after a declaration fails.
    #[arg(long)]
    keep_going: bool,
    /// Suppress the OK lines.
    #[arg(long)]
    quiet: bool,
    /// Print diagnostics as JSON objects, one per line.
    #[arg(long)]
    json: bool,
    /// Reduction steps allowed per conversion or normalization.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: usize,
}

#[derive(Parser, Debug)]
#[command(name = "stratt check", about = "Type-check stratified programs")]
struct CheckCmd {
    #[command(flatten)]
    args: CheckArgs,
}

#[derive(Parser, Debug)]
#[command(name = "stratt reduce", about = "Normalize a definition")]
struct ReduceCmd {
    file: PathBuf,
    name: String,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: usize,
}

#[derive(Parser, Debug)]
#[command(name = "stratt bench", about = "Run a benchmark")]
struct BenchCmd {
    /// Only `blowup` is available.
    which: String,
    #[arg(long, default_value_t = 8)]
    depth: usize,
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn diag(&mut self, d: &Diagnostic) {
        if self.json {
            let _ = writeln!(self.err, "{}", d.json());
        } else {
            let _ = writeln!(self.err, "{}", d.render());
        }
    }
}

/// Usage errors from clap: help and version go to `out` with status 0,
/// anything else to `err` with status 2.
fn usage(e: clap::Error, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = write!(out, "{}", e.render());
            0
        }
        _ => {
            let _ = write!(err, "{}", e.render());
            2
        }
    }
}

pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (sub, rest) = match args.first().map(String::as_str) {
        Some(s @ ("check" | "reduce" | "bench")) => (s, &args[1..]),
        _ => ("check", args),
    };
    let argv = std::iter::once(format!("stratt {sub}")).chain(rest.iter().cloned());
    match sub {
        "reduce" => match ReduceCmd::try_parse_from(argv) {
            Ok(c) => reduce(c, out, err),
            Err(e) => usage(e, out, err),
        },
        "bench" => match BenchCmd::try_parse_from(argv) {
            Ok(c) => bench(c, out, err),
            Err(e) => usage(e, out, err),
        },
        _ => match CheckCmd::try_parse_from(argv) {
            Ok(c) => check(c.args, out, err),
            Err(e) => usage(e, out, err),
        },
    }
}

fn read(path: &PathBuf) -> Result<String, Diagnostic> {
    std::fs::read_to_string(path).map_err(|e| {
        Diagnostic::new(ErrorCode::Parse, format!("cannot read {}: {e}", path.display()))
            .in_file(&path.display().to_string())
    })
}

fn check(a: CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut io = Io { out, err, json: a.json };
    let mut sig = Signature::new();
    let mut status = 0;
    let mut printed = Vec::new();
    for path in &a.files {
        let src = match read(path) {
            Ok(s) => s,
            Err(d) => {
                io.diag(&d);
                return 2;
            }
        };
        let opts = CheckOptions {
            file: path.display().to_string(),
            no_infer: a.no_infer,
            fuel: a.fuel,
            keep_going: a.keep_going,
        };
        let report = check_source(&mut sig, &src, &opts);
        for c in &report.checked {
            if !a.quiet && !a.print_levels {
                let _ = writeln!(io.out, "OK {}", summary(&c.entry));
            }
            if a.trace_constraints {
                let _ = writeln!(io.err, "constraints for {}:", c.entry.name());
                for k in &c.constraints {
                    for line in k.render(&opts.file) {
                        let _ = writeln!(io.err, "  {line}");
                    }
                }
            }
            printed.push(c.entry.clone());
        }
        for d in &report.diagnostics {
            io.diag(d);
        }
        status = status.max(report.exit_code());
        if status != 0 && !a.keep_going {
            break;
        }
    }
    if a.print_levels {
        for e in &printed {
            let _ = writeln!(io.out, "{}\n", print_entry(e));
        }
    }
    status
}

/// `name :^L type` for a definition, `name :^L index-type` for a datatype.
fn summary(e: &stratt::SigEntry) -> String {
    match e {
        stratt::SigEntry::Def(d) => format!("{} :^{} {}", d.name, d.level, d.ty),
        stratt::SigEntry::Data(d) => format!("{} :^{} {}", d.name, d.level, d.index_type()),
    }
}

fn reduce(c: ReduceCmd, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut io = Io { out, err, json: false };
    let src = match read(&c.file) {
        Ok(s) => s,
        Err(d) => {
            io.diag(&d);
            return 2;
        }
    };
    let mut sig = Signature::new();
    let opts = CheckOptions { fuel: c.fuel, ..CheckOptions::file(&c.file.display().to_string()) };
    let report = check_source(&mut sig, &src, &opts);
    if !report.ok() {
        for d in &report.diagnostics {
            io.diag(d);
        }
        return report.exit_code();
    }
    if sig.def(&c.name).is_none() {
        io.diag(&Diagnostic::new(ErrorCode::Unbound, format!("no definition named `{}`", c.name)).in_file(&opts.file));
        return 1;
    }
    match normalize(&sig, &Term::cnst(c.name.as_str(), stratt::LevelExpr::ZERO), c.fuel) {
        Ok(nf) => {
            let _ = writeln!(io.out, "{nf}");
            0
        }
        Err(e) => {
            io.diag(&Diagnostic::from(e).in_file(&opts.file));
            1
        }
    }
}

fn bench(c: BenchCmd, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if c.which != "blowup" {
        let _ = writeln!(err, "unknown benchmark `{}`; available: blowup", c.which);
        return 2;
    }
    if c.depth == 0 || c.depth > MAX_DEPTH {
        let _ = writeln!(err, "--depth must be between 1 and {MAX_DEPTH}");
        return 2;
    }
    match run_blowup(c.depth) {
        Ok(r) => {
            let _ = writeln!(out, "{:<6} {:>5} {:>11} {:>12}", "def", "level", "constraints", "time(us)");
            for row in &r.rows {
                let _ = writeln!(
                    out,
                    "{:<6} {:>5} {:>11} {:>12}",
                    row.name,
                    row.level,
                    row.constraints,
                    row.time.as_micros()
                );
            }
            let _ = writeln!(out, "total {} us, max constraint ratio {:.2}", r.total.as_micros(), r.max_ratio());
            0
        }
        Err(d) => {
            let _ = writeln!(err, "{}", d.render());
            1
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "stratt-proplab", about = "Run metatheory suites, the paradox corpus, or the blowup benchmark")]
struct ProplabCmd {
    /// A lemma suite, `all`, `paradox`, `blowup`, or `coverage`.
    suite: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Depth for the blowup benchmark.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Print a JSON report after the text report.
    #[arg(long)]
    json: bool,
}

/// Entry point of `stratt-proplab`. Exit status is 0 when every trial passed.
pub fn run_proplab(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    use stratt::proplab::{run_paradox_corpus, run_suite, Coverage, Gen, SUITES};
    let argv = std::iter::once("stratt-proplab".to_string()).chain(args.iter().cloned());
    let c = match ProplabCmd::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => return usage(e, out, err),
    };
    match c.suite.as_str() {
        "paradox" => {
            let outcomes = run_paradox_corpus();
            for o in &outcomes {
                let _ = writeln!(out, "{}", o.text());
            }
            if c.json {
                let _ = writeln!(out, "{}", serde_json::to_string(&outcomes).expect("serializable"));
            }
            i32::from(!outcomes.iter().all(|o| o.as_documented))
        }
        "blowup" => bench(BenchCmd { which: "blowup".into(), depth: c.depth }, out, err),
        "coverage" => {
            let sig = stratt::proplab::prelude();
            let mut cov = Coverage::default();
            for n in 0..c.trials {
                let mut g = Gen::new(&sig, stratt::proplab::lemmas::trial_seed(c.seed, n));
                g.judgement(1 + (n as u32 % stratt::proplab::lemmas::MAX_FUEL));
                cov.merge(&g.coverage);
            }
            for (rule, n) in &cov.0 {
                let _ = writeln!(out, "{rule:<10} {n}");
            }
            let missing = cov.missing();
            if c.json {
                let _ = writeln!(out, "{}", serde_json::json!({ "coverage": cov.0, "missing": missing }));
            }
            i32::from(!missing.is_empty())
        }
        name => {
            let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
            let mut reports = Vec::new();
            for n in names {
                match run_suite(n, c.trials, c.seed) {
                    Some(r) => {
                        let _ = write!(out, "{}", r.text());
                        reports.push(r);
                    }
                    None => {
                        let _ = writeln!(
                            err,
                            "unknown suite `{n}`; expected one of {}, all, paradox, blowup, coverage",
                            SUITES.join(", ")
                        );
                        return 2;
                    }
                }
            }
            if c.json {
                let v: Vec<_> = reports.iter().map(|r| r.json()).collect();
                let _ = writeln!(out, "{}", serde_json::Value::Array(v));
            }
            i32::from(!reports.iter().all(|r| r.ok()))
        }
    }
}
