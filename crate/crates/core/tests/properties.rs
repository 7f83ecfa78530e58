use proptest::prelude::*;
use stratt::context::Entry;
use stratt::proplab::{gen_well_typed, prelude};
use stratt::{
    check_assignment, check_judgement, equate, solve_levels, Assignment, Branch, Constraint, Context, Evaluator, Level,
    LevelExpr, MetaId, Provenance, Term, TermKind,
};

const NAMES: [&str; 3] = ["x", "y", "z"];

fn arb_name() -> impl Strategy<Value = String> {
    prop::sample::select(NAMES.to_vec()).prop_map(str::to_string)
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::star()),
        Just(Term::bottom()),
        arb_name().prop_map(Term::var),
        (prop::sample::select(vec!["f", "g"]), 0u32..4).prop_map(|(c, i)| Term::cnst(c, LevelExpr::lit(i))),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            (0u32..4, inner.clone(), arb_name(), inner.clone()).prop_map(|(j, a, x, b)| Term::pi(
                LevelExpr::lit(j),
                a,
                x.as_str(),
                b
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::arrow(a, b)),
            (arb_name(), inner.clone()).prop_map(|(x, b)| Term::lam(x.as_str(), b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            inner.clone().prop_map(Term::absurd),
            (inner.clone(), inner.clone()).prop_map(|(t, a)| Term::ann(t, a)),
            (0u32..4, prop::collection::vec(inner.clone(), 0..3)).prop_map(|(i, args)| Term::ctor(
                "C",
                LevelExpr::lit(i),
                args
            )),
            (inner.clone(), arb_name(), arb_name(), inner).prop_map(|(s, x, y, body)| {
                Term::case(
                    s,
                    vec![Branch { ctor: "C".into(), binders: vec![x.as_str().into(), y.as_str().into()], body }],
                )
            }),
        ]
    })
}

/// Rename every binder to a primed name. Independent of `alpha_eq`, which
/// the result is compared with.
fn rename(t: &Term, suffix: &str) -> Term {
    let fresh = |x: &str| -> stratt::Name { format!("{x}{suffix}").as_str().into() };
    match t.kind() {
        TermKind::Star | TermKind::Bottom | TermKind::Var(_) | TermKind::Const(..) => t.clone(),
        TermKind::Pi(j, a, x, b) => {
            let y = fresh(x);
            Term::pi(*j, rename(a, suffix), y.clone(), rename(&b.subst(x, &Term::var(y)), suffix))
        }
        TermKind::Lam(x, b) => {
            let y = fresh(x);
            Term::lam(y.clone(), rename(&b.subst(x, &Term::var(y)), suffix))
        }
        TermKind::Arrow(a, b) => Term::arrow(rename(a, suffix), rename(b, suffix)),
        TermKind::App(f, a) => Term::app(rename(f, suffix), rename(a, suffix)),
        TermKind::Absurd(a) => Term::absurd(rename(a, suffix)),
        TermKind::Ann(a, b) => Term::ann(rename(a, suffix), rename(b, suffix)),
        TermKind::CtorApp(c, i, args) => Term::ctor(c.clone(), *i, args.iter().map(|a| rename(a, suffix)).collect()),
        TermKind::Case(s, bs) => Term::case(
            rename(s, suffix),
            bs.iter()
                .map(|b| {
                    let ys: Vec<stratt::Name> = b.binders.iter().map(|x| fresh(x)).collect();
                    let pairs: Vec<_> =
                        b.binders.iter().cloned().zip(ys.iter().map(|y| Term::var(y.clone()))).collect();
                    Branch { ctor: b.ctor.clone(), binders: ys, body: rename(&b.body.subst_all(&pairs), suffix) }
                })
                .collect(),
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn displacement_composes(t in arb_term(), i in 0u32..=5, j in 0u32..=5) {
        prop_assert!(t.displace(i).displace(j).alpha_eq(&t.displace(i + j)));
    }

    #[test]
    fn displacement_shifts_every_level(t in arb_term(), i in 0u32..=5) {
        let before = t.levels();
        let after = t.displace(i).levels();
        prop_assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            prop_assert_eq!(b.shift(i), *a);
        }
    }

    #[test]
    fn displacement_commutes_with_substitution(t in arb_term(), s in arb_term(), x in arb_name(), i in 0u32..=5) {
        let lhs = t.subst(&x, &s).displace(i);
        let rhs = t.displace(i).subst(&x, &s.displace(i));
        prop_assert!(lhs.alpha_eq(&rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn alpha_is_an_equivalence(t in arb_term()) {
        let r1 = rename(&t, "1");
        let r2 = rename(&r1, "2");
        prop_assert!(t.alpha_eq(&t));
        prop_assert!(t.alpha_eq(&r1) && r1.alpha_eq(&t));
        prop_assert!(r1.alpha_eq(&r2) && t.alpha_eq(&r2));
    }

    #[test]
    fn alpha_preserved_by_substitution_and_displacement(t in arb_term(), s in arb_term(), x in arb_name(), i in 0u32..=5) {
        let r = rename(&t, "'");
        prop_assert!(t.subst(&x, &s).alpha_eq(&r.subst(&x, &s)));
        prop_assert!(t.displace(i).alpha_eq(&r.displace(i)));
    }

    #[test]
    fn substitution_avoids_capture(t in arb_term(), x in arb_name()) {
        // Substituting a term whose free variables are all of NAMES must
        // keep every one of them free.
        let s = Term::apps(Term::var("x"), [Term::var("y"), Term::var("z")]);
        let r = t.subst(&x, &s);
        if t.occurs_free(&x) {
            for n in NAMES {
                prop_assert!(r.occurs_free(n), "{} lost {}", r, n);
            }
        }
    }

    #[test]
    fn substituting_a_variable_for_itself_is_identity(t in arb_term(), x in arb_name()) {
        prop_assert!(t.subst(&x, &Term::var(x.as_str())).alpha_eq(&t));
    }
}

fn arb_context() -> impl Strategy<Value = Context> {
    prop::collection::vec((0u32..5, arb_term()), 0..6).prop_map(|es| {
        Context::from_entries(
            es.into_iter()
                .enumerate()
                .map(|(n, (l, ty))| Entry { name: format!("a{n}").as_str().into(), level: Level(l), ty })
                .collect(),
        )
    })
}

fn is_subsequence(small: &Context, big: &Context) -> bool {
    let mut it = big.entries().iter();
    small.entries().iter().all(|e| it.any(|f| f == e))
}

proptest! {
    #[test]
    fn restriction_is_idempotent_and_a_subsequence(g in arb_context(), k in 0u32..5) {
        let r = g.restrict(Level(k));
        prop_assert_eq!(r.restrict(Level(k)), r.clone());
        prop_assert!(is_subsequence(&r, &g));
        prop_assert!(r.entries().iter().all(|e| e.level.0 <= k));
        prop_assert_eq!(r.len(), g.entries().iter().filter(|e| e.level.0 <= k).count());
    }

    #[test]
    fn floating_only_moves_level_j(g in arb_context(), j in 0u32..4, d in 0u32..3) {
        let k = j + d;
        let f = g.float(Level(j), Level(k)).unwrap();
        for (a, b) in g.entries().iter().zip(f.entries()) {
            prop_assert_eq!(&a.ty, &b.ty);
            prop_assert_eq!(b.level.0, if a.level.0 == j { k } else { a.level.0 });
        }
        prop_assert!(g.float(Level(k + 1), Level(k)).is_err());
    }
}

/// A random difference system over metas `?0..?n`.
fn arb_system(max_metas: u32, max_offset: u32, max_len: usize) -> impl Strategy<Value = (u32, Vec<Constraint>)> {
    (1..=max_metas).prop_flat_map(move |n| {
        let side = prop_oneof![
            (0..n, 0..=max_offset).prop_map(|(m, o)| LevelExpr::meta(MetaId(m)).shift(o)),
            (0..=max_offset).prop_map(LevelExpr::lit),
        ];
        let c = (0u8..3, side.clone(), side).prop_map(|(r, a, b)| {
            let p = Provenance::new("test", None);
            match r {
                0 => Constraint::le(a, b, p),
                1 => Constraint::lt(a, b, p),
                _ => Constraint::eq(a, b, p),
            }
        });
        (Just(n), prop::collection::vec(c, 0..=max_len))
    })
}

/// Exhaustive search over `0..=hi` for each meta; the pointwise least
/// satisfying assignment if one exists.
fn brute_force(n: u32, cs: &[Constraint], hi: u32) -> Option<Assignment> {
    let mut best: Option<Vec<u32>> = None;
    let mut vals = vec![0u32; n as usize];
    loop {
        let asg: Assignment = vals.iter().enumerate().map(|(m, &v)| (MetaId(m as u32), v)).collect();
        if check_assignment(cs, &asg) {
            best = Some(match best {
                None => vals.clone(),
                Some(b) => b.iter().zip(&vals).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        let mut p = 0;
        loop {
            if p == vals.len() {
                return best.map(|b| b.iter().enumerate().map(|(m, &v)| (MetaId(m as u32), v)).collect());
            }
            vals[p] += 1;
            if vals[p] <= hi {
                break;
            }
            vals[p] = 0;
            p += 1;
        }
    }
}

/// Each edge of the constraint graph adds at most 3 + 1, and a least
/// solution follows a simple path of at most 4 edges, so no value exceeds 16.
const EXHAUSTIVE: u32 = 16;

fn metas(n: u32) -> impl Iterator<Item = MetaId> {
    (0..n).map(MetaId)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn solver_is_sound((n, cs) in arb_system(6, 4, 10)) {
        if let Ok(asg) = solve_levels(&cs, metas(n)) {
            prop_assert!(check_assignment(&cs, &asg));
            prop_assert_eq!(asg.len(), n as usize);
        }
    }

    #[test]
    fn solver_is_minimal((n, cs) in arb_system(4, 3, 8)) {
        let oracle = brute_force(n, &cs, EXHAUSTIVE);
        match solve_levels(&cs, metas(n)) {
            Ok(asg) => prop_assert_eq!(Some(asg), oracle),
            Err(u) => {
                prop_assert!(oracle.is_none(), "solver said unsat, oracle found {:?}", oracle);
                prop_assert!(!u.cycle.is_empty());
            }
        }
    }

    #[test]
    fn solver_is_monotone((n, cs) in arb_system(4, 3, 8), extra in arb_system(4, 3, 2)) {
        let extra: Vec<Constraint> = extra.1.into_iter().filter(|c| c.metas().all(|m| m.0 < n)).collect();
        let mut more = cs.clone();
        more.extend(extra);
        if let (Ok(a), Ok(b)) = (solve_levels(&cs, metas(n)), solve_levels(&more, metas(n))) {
            for m in metas(n) {
                prop_assert!(a.get(m) <= b.get(m));
            }
        }
    }
}

#[test]
fn unsat_cycle_names_its_constraints() {
    let p = |r| Provenance::new(r, None);
    let m = |i| LevelExpr::meta(MetaId(i));
    let cs = vec![
        Constraint::lt(m(0), m(1), p("first")),
        Constraint::le(m(1), m(2), p("second")),
        Constraint::le(m(2), m(0), p("third")),
        Constraint::le(LevelExpr::lit(5), m(3), p("unrelated")),
    ];
    let u = solve_levels(&cs, metas(4)).unwrap_err();
    let rules: Vec<_> = u.cycle.iter().map(|c| c.origin.rule).collect();
    for r in ["first", "second", "third"] {
        assert!(rules.contains(&r), "{rules:?}");
    }
    assert!(!rules.contains(&"unrelated"));
}

#[test]
fn brute_force_oracle_sanity() {
    let p = Provenance::new("t", None);
    let m = |i| LevelExpr::meta(MetaId(i));
    let cs = vec![Constraint::lt(m(0), m(1), p.clone()), Constraint::le(LevelExpr::lit(2), m(0), p)];
    let want: Assignment = [(MetaId(0), 2), (MetaId(1), 3)].into_iter().collect();
    assert_eq!(brute_force(2, &cs, 6), Some(want));
}

fn judgement_seeds() -> impl Strategy<Value = (u64, u32)> {
    (any::<u64>(), 1u32..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_judgements_are_accepted((seed, fuel) in judgement_seeds()) {
        let sig = prelude();
        let j = gen_well_typed(seed, fuel);
        let r = check_judgement(&sig, &j.ctx, &j.term, j.level, &j.ty);
        prop_assert!(r.is_ok(), "{}: {:?}", j, r);
    }

    #[test]
    fn whnf_is_idempotent((seed, fuel) in judgement_seeds()) {
        let sig = prelude();
        let j = gen_well_typed(seed, fuel);
        let ev = Evaluator::new(&sig, 1000);
        let w = ev.whnf(&j.term).unwrap();
        prop_assert!(ev.whnf(&w).unwrap().alpha_eq(&w));
    }

    #[test]
    fn equate_is_reflexive_and_symmetric((seed, fuel) in judgement_seeds(), (s2, f2) in judgement_seeds()) {
        let sig = prelude();
        let a = gen_well_typed(seed, fuel).term;
        let b = gen_well_typed(s2, f2).term;
        let mut sink = Vec::new();
        prop_assert!(equate(&sig, &a, &a, &mut sink));
        prop_assert!(equate(&sig, &a, &a.clone(), &mut sink));
        prop_assert_eq!(equate(&sig, &a, &b, &mut Vec::new()), equate(&sig, &b, &a, &mut Vec::new()));
    }
}

#[test]
fn minimality_window_matches_levels_zero_to_six() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]));
    let strat = arb_system(4, 3, 8);
    for _ in 0..500 {
        let (n, cs) = strat.new_tree(&mut runner).unwrap().current();
        // A least solution above 6 means nothing in the window satisfies.
        let solved = solve_levels(&cs, metas(n)).ok().filter(|a| a.iter().all(|(_, v)| v <= 6));
        assert_eq!(solved, brute_force(n, &cs, 6), "{:?}", cs);
    }
}
