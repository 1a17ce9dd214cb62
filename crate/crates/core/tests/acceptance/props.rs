//! Randomized invariants over the corpus signatures.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use crs_core::crs::{Crs, RuleId};
use crs_core::engine::{Budget, DepthIndex, Engine, Step};
use crs_core::peaks::compute_critical_peaks;
use crs_core::syntax::parse_spec;
use crs_core::term::{match_term, mgu, Position, Signature, Substitution, Term, Var, VarKind};

use crate::common::{decode_term, decode_with, spec};

const CASES: u32 = 1000;

const SYSTEMS: &[&str] = &[
    "member",
    "while",
    "integer",
    "toll",
    "gramlich",
    "bergstra-klop",
    "levy-a",
    "not-left-linear",
    "asso",
    "cpw-not-normal",
];

const DEPTHS: &[DepthIndex] = &[
    DepthIndex::Fin(0),
    DepthIndex::Fin(1),
    DepthIndex::Fin(2),
    DepthIndex::Fin(3),
    DepthIndex::Omega,
    DepthIndex::OmegaPlus(1),
    DepthIndex::OmegaPlus(2),
    DepthIndex::OmegaOmega,
];

fn budget() -> Budget {
    Budget {
        max_steps: 200,
        max_term_size: 32,
        max_strata: 4,
        max_depth: 64,
    }
}

struct World {
    systems: Vec<(Crs, Engine)>,
}

impl World {
    fn new() -> Self {
        let systems = SYSTEMS
            .iter()
            .map(|id| {
                let crs = spec(id).crs;
                let engine = Engine::new(&crs, budget());
                (crs, engine)
            })
            .collect();
        World { systems }
    }
}

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

type Input = (usize, u32, Vec<u32>);

fn input() -> impl Strategy<Value = Input> {
    (0..SYSTEMS.len(), any::<u32>(), vec(any::<u32>(), 1..24))
}

fn run<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))?;
    println!("    {name}: ok ({CASES} cases)");
    Ok(())
}

fn all_vars(crs: &Crs) -> Vec<Var> {
    crs.varsys.iter().cloned().collect()
}

fn random_term(crs: &Crs, sort_choice: u32, choices: &[u32], cons_only: bool) -> Term {
    let sig = &crs.signature;
    let sorts: Vec<_> = sig.sorts().collect();
    let sort = sorts[sort_choice as usize % sorts.len()];
    decode_with(sig, sort, &all_vars(crs), choices, 10, cons_only)
}

type StepKey = (Position, RuleId, Term);

fn keys(steps: &[Step]) -> BTreeSet<StepKey> {
    steps
        .iter()
        .map(|s| (s.position.clone(), s.rule, s.result.clone()))
        .collect()
}

fn depth_monotonicity(world: &RefCell<World>) -> Result<(), String> {
    run("depth monotonicity", input(), |(sys, sc, ch)| {
        let w = &mut *world.borrow_mut();
        let (crs, engine) = &mut w.systems[sys];
        let t = random_term(crs, sc, &ch, false);
        for pair in DEPTHS.windows(2) {
            let lo = engine.one_step_reducts(&t, pair[0]);
            let hi = engine.one_step_reducts(&t, pair[1]);
            if !hi.complete {
                continue;
            }
            let (lo, hi) = (keys(&lo.steps), keys(&hi.steps));
            if !lo.is_subset(&hi) {
                return fail(format!(
                    "{}: reducts at {} not contained at {}",
                    t.display(&crs.signature),
                    pair[0],
                    pair[1]
                ));
            }
        }
        Ok(())
    })
}

fn constructor_keeping(world: &RefCell<World>) -> Result<(), String> {
    run("constructor-keeping", input(), |(sys, sc, ch)| {
        let w = &mut *world.borrow_mut();
        let (crs, engine) = &mut w.systems[sys];
        let sig = crs.signature.clone();
        let t = random_term(crs, sc, &ch, true);
        for &d in DEPTHS {
            for s in engine.one_step_reducts(&t, d).steps {
                if !s.result.is_constructor_term(&sig) || !crs.rule(s.rule).is_constructor_rule() {
                    return fail(format!(
                        "{} -> {} via {} at {d}",
                        t.display(&sig),
                        s.result.display(&sig),
                        s.rule
                    ));
                }
            }
        }
        Ok(())
    })
}

fn ground_instance(sig: &Signature, t: &Term, choices: &[u32]) -> Substitution {
    let mut sigma = Substitution::new();
    for (i, v) in t.vars().into_iter().enumerate() {
        let pool = sig.constructor_ground_terms(v.sort, 4);
        let c = choices.get(i).copied().unwrap_or(0) as usize;
        sigma.insert(v, pool[c % pool.len()].clone());
    }
    sigma
}

fn substitution_stability(world: &RefCell<World>) -> Result<(), String> {
    let strategy = (input(), vec(any::<u32>(), 8));
    run(
        "substitution stability",
        strategy,
        |((sys, sc, ch), inst)| {
            let w = &mut *world.borrow_mut();
            let (crs, engine) = &mut w.systems[sys];
            let sig = crs.signature.clone();
            let t = random_term(crs, sc, &ch, false);
            let sigma = ground_instance(&sig, &t, &inst);
            let ts = t.apply(&sigma);
            for &d in DEPTHS {
                let before = engine.one_step_reducts(&t, d);
                let after = engine.one_step_reducts(&ts, d);
                if !after.complete {
                    continue;
                }
                let after = keys(&after.steps);
                for s in before.steps {
                    let key = (s.position.clone(), s.rule, s.result.apply(&sigma));
                    if !after.contains(&key) {
                        return fail(format!(
                            "{} -> {} at {d} lost under {}",
                            t.display(&sig),
                            s.result.display(&sig),
                            sigma.display(&sig)
                        ));
                    }
                }
            }
            Ok(())
        },
    )
}

fn concat(p: &Position, q: &Position) -> Position {
    Position(p.0.iter().chain(&q.0).copied().collect())
}

fn replacement_monotonicity(world: &RefCell<World>) -> Result<(), String> {
    let strategy = (input(), 0..DEPTHS.len());
    run(
        "replacement monotonicity",
        strategy,
        |((sys, sc, ch), di)| {
            let w = &mut *world.borrow_mut();
            let (crs, engine) = &mut w.systems[sys];
            let sig = crs.signature.clone();
            let d = DEPTHS[di];
            let t = random_term(crs, sc, &ch, false);
            let whole = engine.one_step_reducts(&t, d);
            if !whole.complete {
                return Ok(());
            }
            let whole = keys(&whole.steps);
            for p in t.positions() {
                let u = t.subterm_at(&p).expect("own position").clone();
                for s in engine.one_step_reducts(&u, d).steps {
                    let replaced = t.replace_at(&sig, &p, s.result.clone()).expect("same sort");
                    let key = (concat(&p, &s.position), s.rule, replaced);
                    if !whole.contains(&key) {
                        return fail(format!(
                            "step of {} at {p} missing from {}",
                            u.display(&sig),
                            t.display(&sig)
                        ));
                    }
                }
            }
            Ok(())
        },
    )
}

fn sandwich(world: &RefCell<World>) -> Result<(), String> {
    let strategy = (input(), 0..DEPTHS.len());
    run(
        "red within parallel within reachable",
        strategy,
        |((sys, sc, ch), di)| {
            let w = &mut *world.borrow_mut();
            let (crs, engine) = &mut w.systems[sys];
            let sig = crs.signature.clone();
            let d = DEPTHS[di];
            let t = random_term(crs, sc, &ch, false);
            let one: Vec<Term> = engine.one_step_reducts(&t, d).results().cloned().collect();
            let (par, par_complete) = engine.parallel_reducts(&t, d);
            let reach = engine.reachable(&t, d);
            if !par.contains(&t) {
                return fail(format!(
                    "{} missing from its parallel reducts",
                    t.display(&sig)
                ));
            }
            if par_complete {
                if let Some(u) = one.iter().find(|u| !par.contains(u)) {
                    return fail(format!(
                        "{} -> {} not a parallel step at {d}",
                        t.display(&sig),
                        u.display(&sig)
                    ));
                }
            }
            if reach.complete {
                if let Some(u) = par.iter().find(|u| !reach.contains(u)) {
                    return fail(format!(
                        "{} parallel reduct {} not reachable at {d}",
                        t.display(&sig),
                        u.display(&sig)
                    ));
                }
            }
            Ok(())
        },
    )
}

/// Replaces random subterms of `g` by variables. Returns the generalization
/// and the ground binding for each introduced variable.
fn generalize(
    sig: &Signature,
    g: &Term,
    prefix: &str,
    choices: &[u32],
) -> (Term, BTreeMap<Var, Term>) {
    let mut cursor = 0usize;
    let mut next = || {
        let c = choices.get(cursor).copied().unwrap_or(7);
        cursor += 1;
        c
    };
    let mut bindings: BTreeMap<Var, Term> = BTreeMap::new();
    let mut seen: BTreeMap<Term, Var> = BTreeMap::new();
    let mut out = g.clone();
    let mut cut: Vec<Position> = Vec::new();
    for p in g.positions() {
        if cut.iter().any(|c| c.is_prefix_of(&p)) {
            continue;
        }
        let c = next();
        if c % 3 != 0 {
            continue;
        }
        let sub = g.subterm_at(&p).expect("own position").clone();
        let pure = sub.is_pure_constructor_term(sig) && sub.is_ground();
        let x = match seen.get(&sub) {
            Some(x) if c % 2 == 0 => x.clone(),
            _ => {
                let kind = if pure && c % 5 < 3 {
                    VarKind::Constructor
                } else {
                    VarKind::General
                };
                let x = Var::new(&format!("{prefix}{}", bindings.len()), kind, sub.sort(sig));
                seen.insert(sub.clone(), x.clone());
                x
            }
        };
        bindings.insert(x.clone(), sub);
        out = out.replace_at(sig, &p, Term::var(x)).expect("same sort");
        cut.push(p);
    }
    (out, bindings)
}

fn merge_match(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    rho: &mut BTreeMap<Var, Term>,
) -> bool {
    let Some(m) = match_term(sig, pattern, subject) else {
        return false;
    };
    for (v, t) in m.iter() {
        match rho.get(v) {
            Some(old) if old != t => return false,
            _ => {
                rho.insert(v.clone(), t.clone());
            }
        }
    }
    true
}

fn mgu_properties(world: &RefCell<World>) -> Result<(), String> {
    let strategy = (
        input(),
        vec(any::<u32>(), 24),
        vec(any::<u32>(), 24),
        vec(any::<u32>(), 1..16),
    );
    run(
        "mgu soundness and generality",
        strategy,
        |((sys, sc, ch), m0, m1, other)| {
            let w = &mut *world.borrow_mut();
            let (crs, _) = &mut w.systems[sys];
            let sig = &crs.signature;
            let sorts: Vec<_> = sig.sorts().collect();
            let sort = sorts[sc as usize % sorts.len()];
            let g = decode_term(sig, sort, &[], &ch, 10);
            let (s, b0) = generalize(sig, &g, "U", &m0);
            let (t, b1) = generalize(sig, &g, "V", &m1);
            let theta: BTreeMap<Var, Term> = b0.into_iter().chain(b1).collect();
            let Some(sigma) = mgu(sig, &[(s.clone(), t.clone())], &BTreeSet::new()) else {
                return fail(format!(
                    "no mgu for unifiable {} and {}",
                    s.display(sig),
                    t.display(sig)
                ));
            };
            if s.apply(&sigma) != t.apply(&sigma) || !sigma.is_well_formed(sig) {
                return fail(format!("unsound mgu {}", sigma.display(sig)));
            }
            let mut rho = BTreeMap::new();
            for (x, ground) in &theta {
                if !merge_match(sig, &Term::var(x.clone()).apply(&sigma), ground, &mut rho) {
                    return fail(format!(
                        "{} is not more general than the unifier at {}",
                        sigma.display(sig),
                        x.name
                    ));
                }
            }

            let u = decode_term(sig, sort, &all_vars(crs), &other, 8);
            if let Some(tau) = mgu(sig, &[(s.clone(), u.clone())], &BTreeSet::new()) {
                let (l, r) = (s.apply(&tau), u.apply(&tau));
                if l != r || !tau.is_well_formed(sig) || l.apply(&tau) != l {
                    return fail(format!(
                        "unsound mgu {} for {} and {}",
                        tau.display(sig),
                        s.display(sig),
                        u.display(sig)
                    ));
                }
            }
            Ok(())
        },
    )
}

fn position_round_trips(world: &RefCell<World>) -> Result<(), String> {
    let strategy = (input(), vec(any::<u32>(), 1..12), any::<u32>());
    run(
        "position and replacement round trips",
        strategy,
        |((sys, sc, ch), uch, pick)| {
            let w = &mut *world.borrow_mut();
            let (crs, _) = &mut w.systems[sys];
            let sig = crs.signature.clone();
            let t = random_term(crs, sc, &ch, false);
            let positions = t.positions();
            if positions.len() != t.size() {
                return fail(format!(
                    "{} positions for size {}",
                    positions.len(),
                    t.size()
                ));
            }
            for p in &positions {
                let text = p.to_string();
                let parsed: Position = text
                    .parse()
                    .map_err(|_| TestCaseError::fail(text.clone()))?;
                if &parsed != p {
                    return fail(format!("position {text} does not round-trip"));
                }
                let sub = t.subterm_at(p).expect("own position").clone();
                if t.replace_at(&sig, p, sub.clone()).expect("same sort") != t {
                    return fail(format!("replacing {p} by itself changed the term"));
                }
                let u = decode_term(&sig, sub.sort(&sig), &all_vars(crs), &uch, 6);
                let r = t.replace_at(&sig, p, u.clone()).expect("same sort");
                if r.subterm_at(p).ok() != Some(&u) {
                    return fail(format!("replacement at {p} not readable back"));
                }
                if r.replace_at(&sig, p, sub).expect("same sort") != t {
                    return fail(format!("replacement at {p} not undoable"));
                }
            }
            let p = &positions[pick as usize % positions.len()];
            let q = positions
                .iter()
                .find(|q| !p.is_prefix_of(q) && !q.is_prefix_of(p));
            if let Some(q) = q {
                let up = t.subterm_at(p).expect("own").clone();
                let uq = t.subterm_at(q).expect("own").clone();
                let swapped = BTreeMap::from([(p.clone(), uq.clone()), (q.clone(), up.clone())]);
                if up.sort(&sig) == uq.sort(&sig) {
                    let par = t
                        .replace_parallel(&sig, &swapped)
                        .expect("parallel positions");
                    let seq = t
                        .replace_at(&sig, p, uq)
                        .and_then(|x| x.replace_at(&sig, q, up))
                        .expect("sequential");
                    if par != seq {
                        return fail(format!("parallel replacement at {p}, {q} differs"));
                    }
                }
            }
            Ok(())
        },
    )
}

const PEAK_SIGNATURE: &str = "sorts nat;\ncons 0 : nat;\ncons s : nat -> nat;\n\
func f : nat -> nat;\nfunc g : nat nat -> nat;\ngvar X Y : nat;\n";

fn oracle_match(p: &Term, t: &Term, b: &mut BTreeMap<Var, Term>) -> bool {
    match (p, t) {
        (Term::Var(x), _) => match b.get(x) {
            Some(old) => old == t,
            None => {
                b.insert(x.clone(), t.clone());
                true
            }
        },
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.iter().zip(ys.iter()).all(|(x, y)| oracle_match(x, y, b))
        }
        _ => false,
    }
}

fn oracle_apply(t: &Term, b: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(x) => b[x].clone(),
        Term::App(f, xs) => Term::app(*f, xs.iter().map(|x| oracle_apply(x, b)).collect()),
    }
}

fn rewrite_root(lhs: &Term, rhs: &Term, t: &Term) -> Option<Term> {
    let mut b = BTreeMap::new();
    oracle_match(lhs, t, &mut b).then(|| oracle_apply(rhs, &b))
}

fn random_rule(
    sig: &Signature,
    nat: crs_core::term::SortId,
    vars: &[Var],
    ch: &[u32],
) -> (Term, Term) {
    let (l, r) = ch.split_at(ch.len() / 2);
    let mut lhs = decode_term(sig, nat, vars, l, 4);
    if lhs.is_var() {
        lhs = Term::app(sig.lookup_fun("f").expect("f"), vec![lhs]);
    }
    let lvars: Vec<Var> = lhs.vars().into_iter().collect();
    let rhs = decode_with(sig, nat, &lvars, r, 4, lhs.is_constructor_term(sig));
    (lhs, rhs)
}

fn peak_completeness() -> Result<(), String> {
    let base = parse_spec(PEAK_SIGNATURE).map_err(|d| format!("{d:?}"))?;
    let sig = base.crs.signature.clone();
    let nat = sig.lookup_sort("nat").expect("nat");
    let vars: Vec<Var> = base.crs.varsys.iter().cloned().collect();
    let ground = sig.ground_terms(nat, 6);
    let strategy = (vec(any::<u32>(), 16), vec(any::<u32>(), 16));
    run("critical-peak completeness", strategy, |(c0, c1)| {
        let rules = [
            random_rule(&sig, nat, &vars, &c0),
            random_rule(&sig, nat, &vars, &c1),
        ];
        let mut text = PEAK_SIGNATURE.to_string();
        for (l, r) in &rules {
            text.push_str(&format!(
                "rule {} = {};\n",
                l.display(&sig),
                r.display(&sig)
            ));
        }
        let crs = parse_spec(&text)
            .map_err(|d| TestCaseError::fail(format!("{text}\n{d:?}")))?
            .crs;
        let peaks = compute_critical_peaks(&crs);
        for t in &ground {
            for p in t.positions() {
                let u = t.subterm_at(&p).expect("own position");
                for (j, (lj, rj)) in rules.iter().enumerate() {
                    let Some(outer) = rewrite_root(lj, rj, u) else {
                        continue;
                    };
                    for q in lj.fun_positions() {
                        let v = u.subterm_at(&q).expect("matched position");
                        for (i, (li, ri)) in rules.iter().enumerate() {
                            if i == j && q.is_root() {
                                continue;
                            }
                            let Some(inner_root) = rewrite_root(li, ri, v) else {
                                continue;
                            };
                            let inner = u.replace_at(&sig, &q, inner_root).expect("same sort");
                            if inner == outer {
                                continue;
                            }
                            let covered = peaks.iter().any(|pk| {
                                pk.source == (RuleId(i), RuleId(j))
                                    && pk.position == q
                                    && match_term(&sig, &pk.peak_term, u).is_some_and(|tau| {
                                        pk.t0.apply(&tau) == inner && pk.t1.apply(&tau) == outer
                                    })
                            });
                            if !covered {
                                return fail(format!(
                                    "divergence of {} (r{} at {q} inside r{}) not covered\n{text}",
                                    u.display(&sig),
                                    i + 1,
                                    j + 1
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn all() -> Result<(), String> {
    let world = RefCell::new(World::new());
    let suites: [&dyn Fn() -> Result<(), String>; 8] = [
        &|| depth_monotonicity(&world),
        &|| constructor_keeping(&world),
        &|| substitution_stability(&world),
        &|| replacement_monotonicity(&world),
        &|| sandwich(&world),
        &|| mgu_properties(&world),
        &|| position_round_trips(&world),
        &peak_completeness,
    ];
    let failures: Vec<String> = suites.iter().filter_map(|s| s().err()).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures.join("; "))
    }
}
