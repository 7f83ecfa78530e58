//! Levels, level metavariables, constraints between them, and the
//! minimizing solver.
//!
//! Every constraint is a difference constraint `x + a <= y + b`, so the least
//! natural-number solution is a longest-path problem from a virtual zero
//! node. Bellman-Ford relaxation computes it and finds positive cycles, which
//! are exactly the unsatisfiable systems.

use std::collections::BTreeMap;
use std::fmt;

use crate::diagnostic::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Level(pub u32);

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::ops::Add for Level {
    type Output = Level;
    fn add(self, o: Level) -> Level {
        Level(self.0 + o.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaId(pub u32);

impl fmt::Display for MetaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelExpr {
    Concrete(Level),
    MetaPlus(MetaId, u32),
}

impl LevelExpr {
    pub const ZERO: LevelExpr = LevelExpr::Concrete(Level(0));

    pub fn lit(n: u32) -> Self {
        LevelExpr::Concrete(Level(n))
    }

    pub fn meta(m: MetaId) -> Self {
        LevelExpr::MetaPlus(m, 0)
    }

    pub fn shift(self, by: u32) -> Self {
        match self {
            LevelExpr::Concrete(Level(c)) => LevelExpr::Concrete(Level(c + by)),
            LevelExpr::MetaPlus(m, o) => LevelExpr::MetaPlus(m, o + by),
        }
    }

    /// Sum of two level expressions; `None` when both mention a meta,
    /// since that is not a difference constraint.
    pub fn plus(self, other: LevelExpr) -> Option<Self> {
        match (self, other) {
            (LevelExpr::Concrete(Level(c)), e) | (e, LevelExpr::Concrete(Level(c))) => Some(e.shift(c)),
            _ => None,
        }
    }

    pub fn as_concrete(self) -> Option<Level> {
        match self {
            LevelExpr::Concrete(l) => Some(l),
            LevelExpr::MetaPlus(..) => None,
        }
    }

    pub fn has_meta(self) -> bool {
        matches!(self, LevelExpr::MetaPlus(..))
    }

    fn parts(self) -> (Option<MetaId>, u32) {
        match self {
            LevelExpr::Concrete(Level(c)) => (None, c),
            LevelExpr::MetaPlus(m, o) => (Some(m), o),
        }
    }

    /// Value under an assignment; `None` if the meta is unassigned.
    pub fn eval(self, asg: &Assignment) -> Option<u32> {
        match self {
            LevelExpr::Concrete(Level(c)) => Some(c),
            LevelExpr::MetaPlus(m, o) => asg.get(m).map(|v| v + o),
        }
    }

    /// Replace the meta by its assigned value, leaving unassigned metas alone.
    pub fn zonk(self, asg: &Assignment) -> Self {
        match self.eval(asg) {
            Some(v) => LevelExpr::lit(v),
            None => self,
        }
    }
}

impl From<Level> for LevelExpr {
    fn from(l: Level) -> Self {
        LevelExpr::Concrete(l)
    }
}

impl fmt::Display for LevelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelExpr::Concrete(l) => write!(f, "{l}"),
            LevelExpr::MetaPlus(m, 0) => write!(f, "{m}"),
            LevelExpr::MetaPlus(m, o) => write!(f, "{m}+{o}"),
        }
    }
}

/// Where a constraint came from: the typing rule and the source position of
/// the term being checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub rule: &'static str,
    pub span: Option<Span>,
}

impl Provenance {
    pub fn new(rule: &'static str, span: Option<Span>) -> Self {
        Provenance { rule, span }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub rel: Relation,
    pub lhs: LevelExpr,
    pub rhs: LevelExpr,
    pub origin: Provenance,
}

impl Constraint {
    pub fn le(lhs: LevelExpr, rhs: LevelExpr, origin: Provenance) -> Self {
        Constraint { rel: Relation::Le, lhs, rhs, origin }
    }

    pub fn lt(lhs: LevelExpr, rhs: LevelExpr, origin: Provenance) -> Self {
        Constraint { rel: Relation::Lt, lhs, rhs, origin }
    }

    pub fn eq(lhs: LevelExpr, rhs: LevelExpr, origin: Provenance) -> Self {
        Constraint { rel: Relation::Eq, lhs, rhs, origin }
    }

    /// The constraint as a list of `lhs <= rhs` pairs.
    pub fn normalized(&self) -> Vec<(LevelExpr, LevelExpr)> {
        match self.rel {
            Relation::Le => vec![(self.lhs, self.rhs)],
            Relation::Lt => vec![(self.lhs.shift(1), self.rhs)],
            Relation::Eq => vec![(self.lhs, self.rhs), (self.rhs, self.lhs)],
        }
    }

    pub fn holds(&self, asg: &Assignment) -> bool {
        self.normalized().into_iter().all(|(l, r)| {
            let lv = l.eval(asg).unwrap_or_else(|| panic!("unassigned level {l}"));
            let rv = r.eval(asg).unwrap_or_else(|| panic!("unassigned level {r}"));
            lv <= rv
        })
    }

    pub fn metas(&self) -> impl Iterator<Item = MetaId> {
        [self.lhs.parts().0, self.rhs.parts().0].into_iter().flatten()
    }

    /// Trace lines in the form `<lhs> <= <rhs>  -- <rule> at <file:line:col>`.
    pub fn render(&self, file: &str) -> Vec<String> {
        let at = match self.origin.span {
            Some(sp) => format!("{file}:{sp}"),
            None => file.to_string(),
        };
        self.normalized().into_iter().map(|(l, r)| format!("{l} <= {r}  -- {} at {at}", self.origin.rule)).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<MetaId, u32>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn get(&self, m: MetaId) -> Option<u32> {
        self.0.get(&m).copied()
    }

    pub fn insert(&mut self, m: MetaId, v: u32) {
        self.0.insert(m, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (MetaId, u32)> + '_ {
        self.0.iter().map(|(m, v)| (*m, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(MetaId, u32)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (MetaId, u32)>>(it: I) -> Self {
        Assignment(it.into_iter().collect())
    }
}

/// An unsatisfiable system, with the constraints along a violating cycle.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("level constraints are unsatisfiable")]
pub struct Unsat {
    pub cycle: Vec<Constraint>,
}

/// Evaluate every constraint under `asg`. Panics if a constraint mentions a
/// meta that `asg` does not assign.
pub fn check_assignment(cs: &[Constraint], asg: &Assignment) -> bool {
    cs.iter().all(|c| c.holds(asg))
}

struct Edge {
    from: usize,
    to: usize,
    weight: i64,
    source: usize,
}

/// The pointwise-least assignment of naturals to `metas` (and every meta the
/// constraints mention) satisfying `cs`, or the cycle that makes it
/// impossible.
pub fn solve_levels(cs: &[Constraint], metas: impl IntoIterator<Item = MetaId>) -> Result<Assignment, Unsat> {
    let mut index: BTreeMap<MetaId, usize> = BTreeMap::new();
    for m in metas.into_iter().chain(cs.iter().flat_map(|c| c.metas())) {
        let next = index.len() + 1;
        index.entry(m).or_insert(next);
    }
    let n = index.len() + 1;
    const ZERO: usize = 0;

    let mut edges = Vec::new();
    for (ci, c) in cs.iter().enumerate() {
        for (l, r) in c.normalized() {
            let (lm, lo) = l.parts();
            let (rm, ro) = r.parts();
            if lm.is_none() && rm.is_none() {
                if lo > ro {
                    return Err(Unsat { cycle: vec![c.clone()] });
                }
                continue;
            }
            let from = lm.map_or(ZERO, |m| index[&m]);
            let to = rm.map_or(ZERO, |m| index[&m]);
            edges.push(Edge { from, to, weight: lo as i64 - ro as i64, source: ci });
        }
    }

    // Every meta starts at 0, which encodes the implicit `0 <= meta`.
    let mut dist = vec![0i64; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for _round in 0..n {
        let mut changed = false;
        for (ei, e) in edges.iter().enumerate() {
            let cand = dist[e.from] + e.weight;
            if cand > dist[e.to] {
                dist[e.to] = cand;
                pred[e.to] = Some(ei);
                changed = true;
                if e.to == ZERO {
                    return Err(Unsat { cycle: witness(cs, &edges, &pred, ZERO) });
                }
            }
        }
        if !changed {
            let asg = index.iter().map(|(m, &i)| (*m, dist[i] as u32)).collect();
            return Ok(asg);
        }
    }
    // Still relaxing after n rounds: a positive cycle exists.
    let start = edges.iter().find(|e| dist[e.from] + e.weight > dist[e.to]).map(|e| e.to).unwrap_or(ZERO);
    Err(Unsat { cycle: witness(cs, &edges, &pred, start) })
}

/// Follow predecessor edges back from `start` and report the constraints on
/// the cycle (or, for the zero node, the chain back to an unraised meta).
fn witness(cs: &[Constraint], edges: &[Edge], pred: &[Option<usize>], start: usize) -> Vec<Constraint> {
    let mut seen = vec![usize::MAX; pred.len()];
    let mut chain: Vec<usize> = Vec::new();
    let mut node = start;
    loop {
        if seen[node] != usize::MAX {
            // Keep only the cycle part of the chain.
            chain.drain(..seen[node]);
            break;
        }
        seen[node] = chain.len();
        match pred[node] {
            Some(ei) => {
                chain.push(ei);
                node = edges[ei].from;
            }
            None => break,
        }
    }
    chain.reverse();
    let mut out: Vec<Constraint> = Vec::new();
    for ei in chain {
        let c = &cs[edges[ei].source];
        if !out.contains(c) {
            out.push(c.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(i: u32) -> LevelExpr {
        LevelExpr::meta(MetaId(i))
    }
    fn p() -> Provenance {
        Provenance::new("test", None)
    }

    /// Independent oracle: exhaustive search over `0..=bound` per meta.
    fn brute_least(cs: &[Constraint], n: u32, bound: u32) -> Option<Vec<u32>> {
        let mut best: Option<Vec<u32>> = None;
        let total = (bound + 1).pow(n);
        for code in 0..total {
            let mut vals = Vec::new();
            let mut c = code;
            for _ in 0..n {
                vals.push(c % (bound + 1));
                c /= bound + 1;
            }
            let asg: Assignment = vals.iter().enumerate().map(|(i, v)| (MetaId(i as u32), *v)).collect();
            if check_assignment(cs, &asg) {
                best = Some(match best {
                    None => vals,
                    Some(b) => b.iter().zip(&vals).map(|(x, y)| *x.min(y)).collect(),
                });
            }
        }
        best
    }

    #[test]
    fn empty_system_assigns_zero() {
        let asg = solve_levels(&[], [MetaId(0)]).unwrap();
        assert_eq!(asg.get(MetaId(0)), Some(0));
    }

    #[test]
    fn chain_example_matches_oracle() {
        let cs = vec![
            Constraint::lt(m(0), m(1), p()),
            Constraint::eq(m(2), m(0).shift(2), p()),
            Constraint::le(m(1), m(2), p()),
        ];
        let oracle = brute_least(&cs, 3, 3).unwrap();
        assert_eq!(oracle, vec![0, 1, 2]);
        let asg = solve_levels(&cs, []).unwrap();
        let got: Vec<u32> = (0..3).map(|i| asg.get(MetaId(i)).unwrap()).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn self_loop_is_unsat() {
        let cs = vec![Constraint::le(m(0).shift(1), m(0), p())];
        let err = solve_levels(&cs, []).unwrap_err();
        assert_eq!(err.cycle.len(), 1);
    }

    #[test]
    fn two_strict_cycle_is_unsat() {
        let cs = vec![Constraint::lt(m(0), m(1), p()), Constraint::lt(m(1), m(0), p())];
        let err = solve_levels(&cs, []).unwrap_err();
        assert_eq!(err.cycle.len(), 2);
    }

    #[test]
    fn concrete_upper_bound_violation_cites_chain() {
        let cs = vec![
            Constraint::le(LevelExpr::lit(2), m(0), Provenance::new("a", None)),
            Constraint::le(m(0), m(1), Provenance::new("b", None)),
            Constraint::le(m(1), LevelExpr::lit(1), Provenance::new("c", None)),
        ];
        let err = solve_levels(&cs, []).unwrap_err();
        let rules: Vec<_> = err.cycle.iter().map(|c| c.origin.rule).collect();
        assert_eq!(rules, vec!["a", "b", "c"]);
    }

    #[test]
    fn concrete_only_violation() {
        let cs = vec![Constraint::lt(LevelExpr::lit(1), LevelExpr::lit(1), p())];
        assert!(solve_levels(&cs, []).is_err());
        let ok = vec![Constraint::lt(LevelExpr::lit(0), LevelExpr::lit(1), p())];
        assert!(solve_levels(&ok, []).is_ok());
    }

    #[test]
    fn check_assignment_examples() {
        let lt = vec![Constraint::lt(m(0), m(1), p())];
        let a: Assignment = [(MetaId(0), 0), (MetaId(1), 1)].into_iter().collect();
        let b: Assignment = [(MetaId(0), 1), (MetaId(1), 1)].into_iter().collect();
        assert!(check_assignment(&lt, &a));
        assert!(!check_assignment(&lt, &b));
        let eq = vec![Constraint::eq(m(0), m(1).shift(2), p())];
        let c: Assignment = [(MetaId(0), 5), (MetaId(1), 3)].into_iter().collect();
        assert!(check_assignment(&eq, &c));
    }

    #[test]
    fn render_normalizes_strict_and_equal() {
        let c = Constraint::lt(m(0), m(1).shift(2), Provenance::new("DT-Pi", Some(Span::new(1, 4))));
        assert_eq!(c.render("f.stt"), vec!["?0+1 <= ?1+2  -- DT-Pi at f.stt:1:4".to_string()]);
        let e = Constraint::eq(m(0), LevelExpr::lit(3), p());
        assert_eq!(e.render("f").len(), 2);
    }

    #[test]
    fn plus_refuses_two_metas() {
        assert_eq!(m(0).plus(LevelExpr::lit(2)), Some(m(0).shift(2)));
        assert_eq!(m(0).plus(m(1)), None);
    }
}
