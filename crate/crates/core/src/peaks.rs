//! Critical peaks: overlaps of one rule's left-hand side into a
//! non-variable position of another's, with the instantiated conditions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::crs::{rename_apart, Crs, Lambda, Literal, RuleId};
use crate::engine::{DepthIndex, Engine, TriBool};
use crate::term::{mgu, Position, Substitution, Term, Var};

/// Rule `source.0` applied at `position` of the peak term, rule `source.1`
/// at its root. All fields are already instantiated with `sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalPeak {
    pub t0: Term,
    pub d0: Vec<Literal>,
    pub lambda0: Lambda,
    pub t1: Term,
    pub d1: Vec<Literal>,
    pub lambda1: Lambda,
    pub peak_term: Term,
    pub sigma: Substitution,
    pub position: Position,
    pub source: (RuleId, RuleId),
    /// Variables of the renamed inner rule and of the outer rule.
    pub rule_vars: BTreeSet<Var>,
}

impl CriticalPeak {
    pub fn is_overlay(&self) -> bool {
        self.position.is_root()
    }

    pub fn form(&self) -> (u8, u8) {
        (self.lambda0.as_u8(), self.lambda1.as_u8())
    }

    /// Variables remaining in the instantiated peak.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.peak_term.vars();
        self.t0.collect_vars(&mut out);
        self.t1.collect_vars(&mut out);
        for l in self.d0.iter().chain(&self.d1) {
            out.extend(l.vars());
        }
        out
    }

    pub fn conditions(&self) -> Vec<Literal> {
        self.d0.iter().chain(&self.d1).cloned().collect()
    }
}

/// All non-trivial critical peaks, ordered by inner rule, outer rule, position.
pub fn compute_critical_peaks(crs: &Crs) -> Vec<CriticalPeak> {
    let sig = &crs.signature;
    let mut out = Vec::new();
    for (i0, r0) in crs.rules.iter().enumerate() {
        for (i1, r1) in crs.rules.iter().enumerate() {
            let vars1 = r1.vars();
            let (r0, _) = rename_apart(r0, &vars1);
            let mut protected = r0.vars();
            protected.extend(vars1.iter().cloned());
            let mut positions = r1.lhs.fun_positions();
            positions.sort();
            for p in positions {
                let sub = r1.lhs.subterm_at(&p).expect("own position");
                if sub.sort(sig) != r0.lhs.sort(sig) {
                    continue;
                }
                let Some(sigma) = mgu(sig, &[(r0.lhs.clone(), sub.clone())], &protected) else {
                    continue;
                };
                let t0 = r1.lhs.replace_unchecked(&p.0, r0.rhs.clone()).apply(&sigma);
                let t1 = r1.rhs.apply(&sigma);
                if t0 == t1 {
                    continue;
                }
                out.push(CriticalPeak {
                    t0,
                    d0: r0.conditions.iter().map(|l| l.apply(&sigma)).collect(),
                    lambda0: r0.lambda,
                    t1,
                    d1: r1.conditions.iter().map(|l| l.apply(&sigma)).collect(),
                    lambda1: r1.lambda,
                    peak_term: r1.lhs.apply(&sigma),
                    sigma: sigma.restrict(&protected),
                    position: p,
                    source: (RuleId(i0), RuleId(i1)),
                    rule_vars: protected.clone(),
                });
            }
        }
    }
    out
}

fn ground_irreducible(engine: &mut Engine, t: &Term) -> TriBool {
    if !t.is_ground() {
        return TriBool::No;
    }
    engine.is_irreducible(t, DepthIndex::OmegaOmega)
}

/// Whether some literal of `a` and some literal of `b` contradict each other:
/// `u == v` against `u != v`, or `p == t` against `p == f` with `t`, `f`
/// distinct irreducible ground terms.
fn contradicting_pair(engine: &mut Engine, a: &[Literal], b: &[Literal]) -> TriBool {
    let mut acc = TriBool::No;
    let sides = |l: &Literal| match l {
        Literal::Eq(u, v) => vec![(u.clone(), v.clone()), (v.clone(), u.clone())],
        _ => Vec::new(),
    };
    for la in a {
        for lb in b {
            match (la, lb) {
                (Literal::Eq(u, v), Literal::Neq(s, t))
                | (Literal::Neq(s, t), Literal::Eq(u, v)) => {
                    if (u == s && v == t) || (u == t && v == s) {
                        return TriBool::Yes;
                    }
                }
                (Literal::Eq(..), Literal::Eq(..)) => {
                    for (p, t) in sides(la) {
                        for (q, f) in sides(lb) {
                            if p != q || t == f || !t.is_ground() || !f.is_ground() {
                                continue;
                            }
                            let both =
                                ground_irreducible(engine, &t).and(ground_irreducible(engine, &f));
                            if both == TriBool::Yes {
                                return TriBool::Yes;
                            }
                            acc = acc.or(both);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    acc
}

pub fn is_complementary(peak: &CriticalPeak, engine: &mut Engine) -> TriBool {
    contradicting_pair(engine, &peak.d0, &peak.d1)
        .or(contradicting_pair(engine, &peak.d1, &peak.d0))
}

/// Like [`is_complementary`], but both literals may come from either list.
pub fn is_weakly_complementary(peak: &CriticalPeak, engine: &mut Engine) -> TriBool {
    let all = peak.conditions();
    contradicting_pair(engine, &all, &all)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceJoinability {
    Joinable,
    ConditionInfeasible,
    NotJoinable,
    Unknown,
}

pub fn peak_instance_joinability(
    peak: &CriticalPeak,
    phi: &Substitution,
    depth: DepthIndex,
    engine: &mut Engine,
) -> InstanceJoinability {
    let conds: Vec<Literal> = peak.conditions().iter().map(|l| l.apply(phi)).collect();
    match engine.fulfilled(&conds, depth) {
        TriBool::No => InstanceJoinability::ConditionInfeasible,
        TriBool::Unknown => InstanceJoinability::Unknown,
        TriBool::Yes => match engine
            .joinable(&peak.t0.apply(phi), &peak.t1.apply(phi), depth)
            .answer
        {
            TriBool::Yes => InstanceJoinability::Joinable,
            TriBool::No => InstanceJoinability::NotJoinable,
            TriBool::Unknown => InstanceJoinability::Unknown,
        },
    }
}

/// Ground substitutions for the peak's variables whose bindings are
/// irreducible constructor ground terms of size at most `size_bound`, and
/// which also leave every instantiated rule variable irreducible.
/// The boolean is false when the enumeration was cut short.
pub fn normalized_instances(
    peak: &CriticalPeak,
    size_bound: usize,
    max_instances: usize,
    engine: &mut Engine,
) -> (Vec<Substitution>, bool) {
    let sig = engine.crs().signature.clone();
    let vars: Vec<Var> = peak.vars().into_iter().collect();
    let mut pools: Vec<Vec<Term>> = Vec::new();
    for v in &vars {
        let mut pool = Vec::new();
        for t in sig.constructor_ground_terms(v.sort, size_bound) {
            if engine.is_irreducible(&t, DepthIndex::OmegaOmega) == TriBool::Yes {
                pool.push(t);
            }
        }
        pools.push(pool);
    }
    let mut out = Vec::new();
    let mut complete = true;
    let mut idx = vec![0usize; vars.len()];
    if pools.iter().any(Vec::is_empty) {
        return (out, true);
    }
    'enumerate: loop {
        let phi = Substitution::from_pairs(
            vars.iter()
                .cloned()
                .zip(idx.iter().enumerate().map(|(i, k)| pools[i][*k].clone())),
        );
        let mut keep = true;
        for x in &peak.rule_vars {
            let image = Term::Var(x.clone()).apply(&peak.sigma).apply(&phi);
            if !image.is_ground() {
                continue;
            }
            if engine.is_irreducible(&image, DepthIndex::OmegaOmega) != TriBool::Yes {
                keep = false;
                break;
            }
        }
        if keep {
            if out.len() >= max_instances {
                complete = false;
                break;
            }
            out.push(phi);
        }
        for i in (0..idx.len()).rev() {
            idx[i] += 1;
            if idx[i] < pools[i].len() {
                continue 'enumerate;
            }
            idx[i] = 0;
        }
        break;
    }
    (out, complete)
}
