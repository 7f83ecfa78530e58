use std::path::PathBuf;

use stratt::proplab::{run_paradox_corpus, PARADOXES};
use stratt::surface::{parse_program, print_entry, SurfaceDecl};
use stratt::{
    check_judgement, check_program, check_source, CheckOptions, Context, ErrorCode, Evaluator, Level, LevelExpr,
    Report, Signature, Term,
};

fn corpus(file: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", file].iter().collect();
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn check(file: &str, keep_going: bool) -> (Signature, Report) {
    let mut sig = Signature::new();
    let opts = CheckOptions { keep_going, ..CheckOptions::file(file) };
    let r = check_source(&mut sig, &corpus(file), &opts);
    (sig, r)
}

fn levels(r: &Report) -> Vec<(String, u32)> {
    r.checked.iter().map(|c| (c.entry.name().to_string(), c.entry.level().unwrap().0)).collect()
}

fn owned(xs: &[(&str, u32)]) -> Vec<(String, u32)> {
    xs.iter().map(|(n, l)| (n.to_string(), *l)).collect()
}

const IDENTITY: &[(&str, u32)] = &[("id", 1), ("idid1", 2), ("idid2", 3), ("idid3", 4), ("selfId", 2)];
const DECIDABLE: &[(&str, u32)] = &[("neg", 0), ("Dec", 1), ("yes", 1), ("no", 1), ("irrDec", 1)];
const LEIBNIZ: &[(&str, u32)] = &[("eq", 1), ("refl", 1), ("isProp", 1), ("isSet", 2)];
const DATATYPES: &[(&str, u32)] = &[
    ("neg", 0),
    ("Dec", 0),
    ("decDNE", 1),
    ("Eq", 1),
    ("UIP", 2),
    ("NPair", 1),
    ("nfst", 1),
    ("nsnd", 2),
    ("DPair", 1),
    ("dfst", 2),
    ("dsnd", 2),
];

#[test]
fn annotated_examples_check_at_their_levels() {
    for (file, want) in [("identity.stt", IDENTITY), ("decidable.stt", DECIDABLE), ("leibniz.stt", LEIBNIZ)] {
        let (_, r) = check(file, false);
        assert!(r.ok(), "{file}: {:?}", r.diagnostics);
        assert_eq!(levels(&r), owned(want), "{file}");
    }
}

#[test]
fn datatype_examples_check_at_their_levels() {
    let (_, r) = check("datatypes.stt", false);
    assert!(r.ok(), "{:?}", r.diagnostics);
    assert_eq!(levels(&r), owned(DATATYPES));
}

fn erase_and_check(src: &str, file: &str) -> Report {
    let decls: Vec<SurfaceDecl> = parse_program(src).unwrap().iter().map(SurfaceDecl::erase_levels).collect();
    check_program(&mut Signature::new(), &decls, &CheckOptions::file(file))
}

#[test]
fn erased_examples_reinfer_the_same_levels() {
    for (file, want) in [
        ("identity.stt", IDENTITY),
        ("decidable.stt", DECIDABLE),
        ("leibniz.stt", LEIBNIZ),
        ("datatypes.stt", DATATYPES),
    ] {
        let r = erase_and_check(&corpus(file), file);
        assert!(r.ok(), "{file}: {:?}", r.diagnostics);
        assert_eq!(levels(&r), owned(want), "{file}");
    }
}

#[test]
fn erasure_strips_datatype_levels_but_keeps_parameter_kinds() {
    for d in parse_program(&corpus("datatypes.stt")).unwrap() {
        let (SurfaceDecl::Data(before), SurfaceDecl::Data(after)) = (&d, &d.erase_levels()) else { continue };
        assert_eq!(after.level, None);
        assert!(after.ctors.iter().all(|c| c.level.is_none()));
        for (p, q) in before.params.iter().zip(&after.params) {
            assert_eq!((q.level, q.fixed), (None, p.fixed));
        }
    }
}

#[test]
fn erased_fixed_parameters_need_inference() {
    let src = "data Box (X :^0 Type) :^1 Type where { MkBox :^1 X -> Box X }\n";
    let decls: Vec<SurfaceDecl> = parse_program(src).unwrap().iter().map(SurfaceDecl::erase_levels).collect();
    let r = check_program(&mut Signature::new(), &decls, &CheckOptions::default());
    assert_eq!(levels(&r), owned(&[("Box", 1)]));
    let opts = CheckOptions { no_infer: true, ..CheckOptions::default() };
    let r = check_program(&mut Signature::new(), &decls, &opts);
    assert_eq!(r.diagnostics[0].code, ErrorCode::CannotInfer);
}

#[test]
fn unannotated_file_infers_minimal_levels() {
    let (_, r) = check("unannotated.stt", false);
    assert!(r.ok(), "{:?}", r.diagnostics);
    assert_eq!(levels(&r), owned(&[("id", 1), ("neg", 0), ("twice", 1), ("idid", 2)]));
}

#[test]
fn unannotated_file_is_rejected_without_inference() {
    let mut sig = Signature::new();
    let opts = CheckOptions { no_infer: true, ..CheckOptions::file("unannotated.stt") };
    let r = check_source(&mut sig, &corpus("unannotated.stt"), &opts);
    assert_eq!(r.diagnostics.len(), 1);
    assert_eq!(r.diagnostics[0].code, ErrorCode::CannotInfer);
    assert_eq!(r.exit_code(), 1);
}

fn assert_level_rejection(file: &str, name: &str) {
    let (_, r) = check(file, false);
    assert_eq!(r.diagnostics.len(), 1, "{file}");
    let d = &r.diagnostics[0];
    assert_eq!(d.decl.as_deref(), Some(name));
    assert_eq!(d.code, ErrorCode::LevelUnsat, "{}", d.render());
    assert!(!d.provenance.is_empty(), "{}", d.render());
    assert!(d.provenance.iter().all(|p| p.contains("<=") && p.contains(" at ")), "{:?}", d.provenance);
}

#[test]
fn dependent_only_identity_is_rejected() {
    assert_level_rejection("neg_idid1.stt", "idid1");
}

#[test]
fn floating_is_prop_is_rejected() {
    assert_level_rejection("neg_isprop.stt", "isProp");
}

#[test]
fn pair_of_propositions_needs_a_dependent_pair() {
    let (_, r) = check("pairs.stt", true);
    assert_eq!(levels(&r), owned(&[("eq", 1), ("isProp", 1), ("NPair", 1), ("DPair", 1), ("props", 2)]));
    assert_eq!(r.diagnostics.len(), 1);
    assert_eq!(r.diagnostics[0].decl.as_deref(), Some("nprops"));
    assert!(r.diagnostics[0].code.is_level_related());
}

#[test]
fn paradoxes_fail_where_documented() {
    for (o, p) in run_paradox_corpus().iter().zip(PARADOXES.iter()) {
        assert!(o.as_documented, "{}", o.text());
        assert_eq!(o.accepted, p.accepted.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        assert_eq!(o.rejected.as_deref(), Some(p.rejected));
    }
}

#[test]
fn paradox_levels() {
    let (_, r) = check("hurkens.stt", false);
    assert_eq!(r.level_of("M"), Some(Level(4)));
    let (_, r) = check("burali_forti.stt", false);
    assert_eq!(r.level_of("wf"), Some(Level(2)));
    let (_, r) = check("russell.stt", false);
    assert_eq!(r.level_of("regular"), Some(Level(1)));
}

const ALL: [&str; 12] = [
    "identity.stt",
    "decidable.stt",
    "leibniz.stt",
    "datatypes.stt",
    "pairs.stt",
    "unannotated.stt",
    "neg_idid1.stt",
    "neg_isprop.stt",
    "burali_forti.stt",
    "russell.stt",
    "hurkens.stt",
    "reynolds.stt",
];

#[test]
fn printed_levels_recheck_without_inference() {
    for file in ALL {
        let (sig, _) = check(file, true);
        let printed: String = sig.entries().iter().map(|e| print_entry(e) + "\n\n").collect();
        let mut again = Signature::new();
        let opts = CheckOptions { no_infer: true, ..CheckOptions::file(file) };
        let r = check_source(&mut again, &printed, &opts);
        assert!(r.ok(), "{file}: {:?}\n{printed}", r.diagnostics);
        assert_eq!(sig, again, "{file}");
    }
}

#[test]
fn printing_is_stable() {
    for file in ALL {
        let (sig, _) = check(file, true);
        let once: String = sig.entries().iter().map(|e| print_entry(e) + "\n\n").collect();
        let mut again = Signature::new();
        check_source(&mut again, &once, &CheckOptions::file(file));
        let twice: String = again.entries().iter().map(|e| print_entry(e) + "\n\n").collect();
        assert_eq!(once, twice, "{file}");
    }
}

#[test]
fn displaced_constructors_only_fit_their_displaced_type() {
    let base = corpus("datatypes.stt");
    let ok = format!("{base}\nr1 :^2 (X :^1 Type) -> (x :^1 X) -> Eq^1 X x x\nr1 = \\X x. Refl^1 x\n");
    let r = check_source(&mut Signature::new(), &ok, &CheckOptions::file("t"));
    assert!(r.ok(), "{:?}", r.diagnostics);
    let bad = format!("{base}\nr2 :^3 (X :^1 Type) -> (x :^1 X) -> Eq^1 X x x\nr2 = \\X x. Refl^2 x\n");
    let r = check_source(&mut Signature::new(), &bad, &CheckOptions::file("t"));
    assert_eq!(r.diagnostics.len(), 1);
    assert_eq!(r.diagnostics[0].code, ErrorCode::Mismatch, "{}", r.diagnostics[0].render());
}

#[test]
fn case_is_cumulative() {
    let base = corpus("datatypes.stt");
    for k in 1..4 {
        let src = format!(
            "{base}\nfst{k} :^{k} (X :^0 Type) -> (P :^0 X -> Type) -> NPair X P -> X\n\
             fst{k} = \\X P p. case p of {{ MkNPair x y -> x }}\n"
        );
        let r = check_source(&mut Signature::new(), &src, &CheckOptions::file("t"));
        assert!(r.ok(), "level {k}: {:?}", r.diagnostics);
    }
}

#[test]
fn iota_reduction_preserves_types() {
    let src = format!(
        "{}\n\
         data Bool :^0 Type where {{ True :^0 Bool; False :^0 Bool }}\n\
         first :^2 Bool\n\
         first = dfst Bool (\\b. Bool) (MkDPair True False)\n\
         second :^2 Bool\n\
         second = nsnd Bool (\\b. Bool) (MkNPair False True)\n",
        corpus("datatypes.stt")
    );
    let mut sig = Signature::new();
    let r = check_source(&mut sig, &src, &CheckOptions::file("t"));
    assert!(r.ok(), "{:?}", r.diagnostics);
    let ev = Evaluator::new(&sig, 1000);
    for (name, want) in [("first", "True"), ("second", "True")] {
        let body = sig.def(name).unwrap().body.clone().unwrap();
        let v = ev.whnf(&body).unwrap();
        assert_eq!(v.to_string(), want);
        check_judgement(&sig, &Context::new(), &v, Level(2), &Term::cnst("Bool", LevelExpr::ZERO)).unwrap();
    }
}

#[test]
fn missing_definition_is_a_parse_error() {
    let r = check_source(&mut Signature::new(), "x :^0 Type\n", &CheckOptions::file("t"));
    assert_eq!(r.diagnostics[0].code, ErrorCode::Parse);
    assert_eq!(r.exit_code(), 2);
}
