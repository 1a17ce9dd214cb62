//! Confluence criteria, counterexample search, bounded joinability surveys
//! and the pipeline combining them into a verdict.

use std::sync::Arc;

use serde::Serialize;

use crate::crs::{normality_report, Crs, Literal, RuleId};
use crate::engine::{Budget, DepthIndex, Edge, Engine, ReachSet, TriBool};
use crate::peaks::{
    compute_critical_peaks, is_complementary, is_weakly_complementary, normalized_instances,
    peak_instance_joinability, CriticalPeak, InstanceJoinability,
};
use crate::term::{Substitution, Term, Var};

/// Depth at which all global questions are asked.
pub const TOP: DepthIndex = DepthIndex::OmegaOmega;

const MAX_INSTANCES: usize = 512;
const MAX_PAIR_CANDIDATES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assumptions {
    pub terminating: bool,
    /// Replaces an undecided constructor-confluence check.
    pub constructor_confluent: Option<bool>,
    /// Count equations between pure constructor terms as defined; `None`
    /// picks the default for the system's instantiation variables.
    pub assume_cvar_equations: Option<bool>,
    pub inst_size_bound: usize,
    pub seed_size_bound: usize,
    /// Seeds for the counterexample search; empty means auto-generated.
    pub seeds: Vec<Term>,
}

impl Default for Assumptions {
    fn default() -> Self {
        Assumptions {
            terminating: false,
            constructor_confluent: None,
            assume_cvar_equations: None,
            inst_size_bound: 3,
            seed_size_bound: 3,
            seeds: Vec::new(),
        }
    }
}

impl Assumptions {
    pub fn cvar_equations(&self, crs: &Crs) -> bool {
        self.assume_cvar_equations
            .unwrap_or_else(|| crs.default_assume_cvar_equations())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub status: TriBool,
    pub detail: String,
}

impl Hypothesis {
    fn new(name: &'static str, status: TriBool, detail: impl Into<String>) -> Self {
        Hypothesis {
            name,
            status,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Complementary,
    WeaklyComplementary,
}

impl Criterion {
    pub fn id(self) -> &'static str {
        match self {
            Criterion::Complementary => "complementary",
            Criterion::WeaklyComplementary => "weakly-complementary",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionCheck {
    pub criterion: Criterion,
    pub hypotheses: Vec<Hypothesis>,
    pub applicable: TriBool,
}

impl CriterionCheck {
    fn from_hypotheses(criterion: Criterion, hypotheses: Vec<Hypothesis>) -> Self {
        let applicable = hypotheses
            .iter()
            .fold(TriBool::Yes, |acc, h| acc.and(h.status));
        CriterionCheck {
            criterion,
            hypotheses,
            applicable,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses.iter().filter(|h| h.status != TriBool::Yes)
    }
}

#[derive(Clone, Debug)]
pub struct ConstructorConfluence {
    pub status: TriBool,
    pub trace: Vec<Hypothesis>,
    pub assumed: bool,
}

/// Confluence of the relation at ω, which only uses constructor rules.
pub fn check_constructor_confluence(
    crs: &Crs,
    assumptions: &Assumptions,
    budget: Budget,
) -> ConstructorConfluence {
    let sub = crs.constructor_subsystem();
    if sub.rules.is_empty() {
        return ConstructorConfluence {
            status: TriBool::Yes,
            trace: vec![Hypothesis::new(
                "no-constructor-rules",
                TriBool::Yes,
                "there are no constructor rules",
            )],
            assumed: false,
        };
    }
    let mut engine = Engine::new(&sub, budget);
    let ll = TriBool::from_bool(sub.is_left_linear());
    let normal = normality_report(&mut engine).normal;
    let peaks = compute_critical_peaks(&sub);
    let mut comp = TriBool::Yes;
    for p in &peaks {
        comp = comp.and(is_complementary(p, &mut engine));
    }
    let trace = vec![
        Hypothesis::new(
            "constructor-left-linear",
            ll,
            "constructor rules are left-linear",
        ),
        Hypothesis::new("constructor-normal", normal, "constructor rules are normal"),
        Hypothesis::new(
            "constructor-peaks-complementary",
            comp,
            format!("{} critical peaks among constructor rules", peaks.len()),
        ),
    ];
    let status = ll.and(normal).and(comp);
    match (status, assumptions.constructor_confluent) {
        (TriBool::Yes, _) => ConstructorConfluence {
            status,
            trace,
            assumed: false,
        },
        (_, Some(b)) => ConstructorConfluence {
            status: TriBool::from_bool(b),
            trace,
            assumed: true,
        },
        _ => ConstructorConfluence {
            status: TriBool::Unknown,
            trace,
            assumed: false,
        },
    }
}

fn equation_definedness(crs: &Crs, engine: &mut Engine, assumptions: &Assumptions) -> Hypothesis {
    let sig = crs.signature.clone();
    let implicit = assumptions.cvar_equations(crs);
    let mut status = TriBool::Yes;
    let mut failing = Vec::new();
    for (i, r) in crs.rules.iter().enumerate() {
        for lit in &r.conditions {
            let Literal::Eq(u, v) = lit else { continue };
            let mut side = |t: &Term| -> TriBool {
                if r.conditions
                    .iter()
                    .any(|l| matches!(l, Literal::Def(w) if w == t))
                {
                    return TriBool::Yes;
                }
                if t.is_ground() {
                    engine.is_irreducible(t, TOP)
                } else {
                    TriBool::No
                }
            };
            let mut ok = side(u).or(side(v));
            if implicit && u.is_pure_constructor_term(&sig) && v.is_pure_constructor_term(&sig) {
                ok = TriBool::Yes;
            }
            if ok != TriBool::Yes {
                failing.push(format!("{}: {}", RuleId(i), lit.display(&sig)));
            }
            status = status.and(ok);
        }
    }
    let detail = if failing.is_empty() {
        "every equation has a defined or irreducible ground side".to_string()
    } else {
        format!(
            "equations without defined or irreducible ground side: {}",
            failing.join("; ")
        )
    };
    Hypothesis::new("equations-defined", status, detail)
}

fn left_linear(crs: &Crs) -> Hypothesis {
    let bad: Vec<String> = crs
        .left_linearity()
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| RuleId(i).to_string())
        .collect();
    Hypothesis::new(
        "left-linear",
        TriBool::from_bool(bad.is_empty()),
        if bad.is_empty() {
            "all left-hand sides are linear".to_string()
        } else {
            format!("non-linear left-hand sides: {}", bad.join(", "))
        },
    )
}

fn constructor_confluence_hypothesis(cc: &ConstructorConfluence) -> Hypothesis {
    let detail = if cc.assumed {
        "assumed".to_string()
    } else {
        cc.trace
            .iter()
            .map(|h| format!("{}={}", h.name, h.status))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Hypothesis::new("constructor-confluent", cc.status, detail)
}

fn peaks_hypothesis(name: &'static str, peaks: &[PeakInfo], weak_for_11: bool) -> Hypothesis {
    let mut status = TriBool::Yes;
    let mut bad = Vec::new();
    for (i, p) in peaks.iter().enumerate() {
        let s = match p.peak.form() {
            (1, 1) if weak_for_11 => p.weakly_complementary,
            (0, 0) => continue,
            _ => p.complementary,
        };
        if s != TriBool::Yes {
            bad.push(format!("#{}", i + 1));
        }
        status = status.and(s);
    }
    let detail = if bad.is_empty() {
        format!(
            "{} relevant critical peaks checked",
            peaks.iter().filter(|p| p.peak.form() != (0, 0)).count()
        )
    } else {
        format!("failing peaks: {}", bad.join(", "))
    };
    Hypothesis::new(name, status, detail)
}

pub fn check_complementary_criterion(
    crs: &Crs,
    engine: &mut Engine,
    peaks: &[PeakInfo],
    cc: &ConstructorConfluence,
    assumptions: &Assumptions,
) -> CriterionCheck {
    let conservative = crs.has_conservative_constructors();
    let hyps = vec![
        left_linear(crs),
        Hypothesis::new(
            "conservative-constructors",
            TriBool::from_bool(conservative),
            if conservative {
                "constructor-rule conditions use only constructor variables"
            } else {
                "a constructor-rule condition uses a general variable"
            },
        ),
        equation_definedness(crs, engine, assumptions),
        constructor_confluence_hypothesis(cc),
        peaks_hypothesis("peaks-complementary", peaks, false),
    ];
    CriterionCheck::from_hypotheses(Criterion::Complementary, hyps)
}

pub fn check_weakly_complementary_criterion(
    crs: &Crs,
    engine: &mut Engine,
    peaks: &[PeakInfo],
    cc: &ConstructorConfluence,
    assumptions: &Assumptions,
) -> CriterionCheck {
    let offending: Vec<String> = crs
        .rules
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.condition_vars()
                .into_iter()
                .filter(|v| !v.is_constructor())
                .map(move |v: Var| format!("{} in {}", v.name, RuleId(i)))
        })
        .collect();
    let hyps = vec![
        left_linear(crs),
        Hypothesis::new(
            "condition-variables-constructor",
            TriBool::from_bool(offending.is_empty()),
            if offending.is_empty() {
                "conditions use only constructor variables".to_string()
            } else {
                format!("general variables in conditions: {}", offending.join(", "))
            },
        ),
        equation_definedness(crs, engine, assumptions),
        constructor_confluence_hypothesis(cc),
        peaks_hypothesis("peaks-weakly-complementary", peaks, true),
    ];
    CriterionCheck::from_hypotheses(Criterion::WeaklyComplementary, hyps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessSource {
    PeakInstance { peak: usize, phi: Substitution },
    Seed,
}

/// A divergence from `seed` into two terms with disjoint complete reach sets.
#[derive(Clone, Debug)]
pub struct Witness {
    pub seed: Term,
    pub t0: Term,
    pub t1: Term,
    pub derivation0: Vec<Edge>,
    pub derivation1: Vec<Edge>,
    pub reach0: Arc<ReachSet>,
    pub reach1: Arc<ReachSet>,
    pub source: WitnessSource,
}

fn nonjoinable_witness(
    engine: &mut Engine,
    seed: &Term,
    t0: &Term,
    t1: &Term,
    derivation0: Vec<Edge>,
    derivation1: Vec<Edge>,
    source: WitnessSource,
) -> Option<Witness> {
    let reach0 = engine.reachable(t0, TOP);
    let reach1 = engine.reachable(t1, TOP);
    if !(reach0.complete && reach1.complete) || reach0.intersects(&reach1).is_some() {
        return None;
    }
    Some(Witness {
        seed: seed.clone(),
        t0: t0.clone(),
        t1: t1.clone(),
        derivation0,
        derivation1,
        reach0,
        reach1,
        source,
    })
}

/// Looks for two non-joinable reducts of `seed`.
pub fn witness_from_seed(engine: &mut Engine, seed: &Term) -> Option<Witness> {
    let rs = engine.reachable(seed, TOP);
    let mut irreducible = Vec::new();
    for m in &rs.members {
        if engine.is_irreducible(m, TOP) == TriBool::Yes {
            irreducible.push(m.clone());
            if irreducible.len() == 2 {
                break;
            }
        }
    }
    if let [a, b] = irreducible.as_slice() {
        let w = nonjoinable_witness(
            engine,
            seed,
            a,
            b,
            rs.path_to(a)?,
            rs.path_to(b)?,
            WitnessSource::Seed,
        );
        if w.is_some() {
            return w;
        }
    }
    let mut candidates: Vec<(Term, Arc<ReachSet>)> = Vec::new();
    for m in &rs.members {
        if candidates.len() >= MAX_PAIR_CANDIDATES {
            break;
        }
        let r = engine.reachable(m, TOP);
        if r.complete {
            candidates.push((m.clone(), r));
        }
    }
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            if candidates[i].1.intersects(&candidates[j].1).is_none() {
                let (a, b) = (&candidates[i].0, &candidates[j].0);
                return nonjoinable_witness(
                    engine,
                    seed,
                    a,
                    b,
                    rs.path_to(a)?,
                    rs.path_to(b)?,
                    WitnessSource::Seed,
                );
            }
        }
    }
    None
}

fn step_edge(
    engine: &mut Engine,
    from: &Term,
    position: &crate::term::Position,
    rule: RuleId,
    to: &Term,
) -> Option<Edge> {
    engine
        .one_step_reducts(from, TOP)
        .steps
        .into_iter()
        .find(|s| &s.position == position && s.rule == rule && &s.result == to)
        .map(|s| Edge {
            from: from.clone(),
            position: s.position,
            rule: s.rule,
            to: s.result,
            level: s.level,
        })
}

fn witness_from_peak_instance(
    engine: &mut Engine,
    index: usize,
    peak: &CriticalPeak,
    phi: &Substitution,
) -> Option<Witness> {
    let seed = peak.peak_term.apply(phi);
    let t0 = peak.t0.apply(phi);
    let t1 = peak.t1.apply(phi);
    let e0 = step_edge(engine, &seed, &peak.position, peak.source.0, &t0)?;
    let e1 = step_edge(
        engine,
        &seed,
        &crate::term::Position::root(),
        peak.source.1,
        &t1,
    )?;
    nonjoinable_witness(
        engine,
        &seed,
        &t0,
        &t1,
        vec![e0],
        vec![e1],
        WitnessSource::PeakInstance {
            peak: index,
            phi: phi.clone(),
        },
    )
}

/// Ground seed terms of every sort with at most `max_size` symbols,
/// smallest first.
pub fn auto_seeds(crs: &Crs, max_size: usize) -> Vec<Term> {
    let sig = &crs.signature;
    let mut all: Vec<Term> = sig
        .sorts()
        .flat_map(|s| sig.ground_terms(s, max_size))
        .collect();
    all.sort_by_key(Term::size);
    all
}

/// Searches peak instances and then seed terms for a non-joinable divergence.
pub fn search_counterexample(
    engine: &mut Engine,
    peaks: &[CriticalPeak],
    seeds: Option<&[Term]>,
    assumptions: &Assumptions,
) -> Option<Witness> {
    for (i, peak) in peaks.iter().enumerate() {
        let (instances, _) =
            normalized_instances(peak, assumptions.inst_size_bound, MAX_INSTANCES, engine);
        for phi in &instances {
            if peak_instance_joinability(peak, phi, TOP, engine) == InstanceJoinability::NotJoinable
            {
                if let Some(w) = witness_from_peak_instance(engine, i, peak, phi) {
                    return Some(w);
                }
            }
        }
    }
    let owned;
    let seeds = match seeds {
        Some(s) => s,
        None => {
            owned = auto_seeds(engine.crs(), assumptions.seed_size_bound);
            &owned
        }
    };
    for seed in seeds {
        if let Some(w) = witness_from_seed(engine, seed) {
            return Some(w);
        }
    }
    None
}

/// Replays both derivations in a fresh engine and re-checks non-joinability.
pub fn verify_witness(crs: &Crs, budget: Budget, w: &Witness) -> bool {
    let mut engine = Engine::new(crs, budget);
    for (path, end) in [(&w.derivation0, &w.t0), (&w.derivation1, &w.t1)] {
        let mut cur = w.seed.clone();
        for e in path.iter() {
            if e.from != cur
                || step_edge(&mut engine, &e.from, &e.position, e.rule, &e.to).is_none()
            {
                return false;
            }
            cur = e.to.clone();
        }
        if &cur != end {
            return false;
        }
    }
    engine.joinable(&w.t0, &w.t1, TOP).answer == TriBool::No
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurveyStatus {
    AllInstancesOk,
    SomeUnknown,
    NotJoinableInstanceFound,
}

#[derive(Clone, Debug)]
pub struct PeakSurvey {
    pub peak: usize,
    pub instances: Vec<(Substitution, InstanceJoinability)>,
    pub status: SurveyStatus,
    pub enumeration_complete: bool,
}

#[derive(Clone, Debug)]
pub struct SurveyReport {
    pub bound: usize,
    /// Set when termination was not asserted.
    pub heuristic: bool,
    pub peaks: Vec<PeakSurvey>,
    pub witness: Option<Witness>,
}

impl SurveyReport {
    pub fn all_ok(&self) -> bool {
        self.peaks
            .iter()
            .all(|p| p.status == SurveyStatus::AllInstancesOk)
    }

    pub fn summary(&self) -> String {
        let base = if self.witness.is_some() {
            "NOT JOINABLE".to_string()
        } else if self.all_ok() {
            format!("SUPPORTED (bounded, {})", self.bound)
        } else {
            format!("UNDECIDED (bounded, {})", self.bound)
        };
        if self.heuristic {
            format!("{base} [heuristic: termination not asserted]")
        } else {
            base
        }
    }
}

/// Checks every peak on all normalized ground instances up to the size bound.
pub fn bounded_joinability_survey(
    engine: &mut Engine,
    peaks: &[CriticalPeak],
    assumptions: &Assumptions,
) -> SurveyReport {
    let mut out = Vec::new();
    let mut witness = None;
    for (i, peak) in peaks.iter().enumerate() {
        let (instances, complete) =
            normalized_instances(peak, assumptions.inst_size_bound, MAX_INSTANCES, engine);
        let mut results = Vec::new();
        let mut status = SurveyStatus::AllInstancesOk;
        for phi in instances {
            let j = peak_instance_joinability(peak, &phi, TOP, engine);
            match j {
                InstanceJoinability::NotJoinable => {
                    status = SurveyStatus::NotJoinableInstanceFound;
                    if witness.is_none() {
                        witness = witness_from_peak_instance(engine, i, peak, &phi);
                    }
                }
                InstanceJoinability::Unknown if status == SurveyStatus::AllInstancesOk => {
                    status = SurveyStatus::SomeUnknown;
                }
                _ => {}
            }
            results.push((phi, j));
        }
        if !complete && status == SurveyStatus::AllInstancesOk {
            status = SurveyStatus::SomeUnknown;
        }
        out.push(PeakSurvey {
            peak: i,
            instances: results,
            status,
            enumeration_complete: complete,
        });
    }
    SurveyReport {
        bound: assumptions.inst_size_bound,
        heuristic: !assumptions.terminating,
        peaks: out,
        witness,
    }
}

#[derive(Clone, Debug)]
pub struct PeakInfo {
    pub peak: CriticalPeak,
    pub complementary: TriBool,
    pub weakly_complementary: TriBool,
}

pub fn classify_peaks(engine: &mut Engine, peaks: Vec<CriticalPeak>) -> Vec<PeakInfo> {
    peaks
        .into_iter()
        .map(|peak| {
            let complementary = is_complementary(&peak, engine);
            let weakly_complementary = is_weakly_complementary(&peak, engine);
            PeakInfo {
                peak,
                complementary,
                weakly_complementary,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Confluent {
        criterion: Criterion,
        hypotheses: Vec<Hypothesis>,
    },
    NotConfluent(Box<Witness>),
    Unknown {
        diagnostics: Vec<Hypothesis>,
        advisory: Option<Box<SurveyReport>>,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Confluent { .. } => "confluent",
            Verdict::NotConfluent(_) => "not-confluent",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Confluent { .. } => 0,
            Verdict::NotConfluent(_) => 1,
            Verdict::Unknown { .. } => 2,
        }
    }
}

/// Everything computed for one system.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub verdict: Verdict,
    pub peaks: Vec<PeakInfo>,
    pub constructor_confluence: ConstructorConfluence,
    pub complementary: CriterionCheck,
    pub weakly_complementary: CriterionCheck,
    pub assumptions: Assumptions,
    pub budget: Budget,
}

/// Criteria first, then the counterexample search, then the survey.
pub fn run_pipeline(crs: &Crs, assumptions: &Assumptions, budget: Budget) -> Analysis {
    let mut engine = Engine::new(crs, budget);
    let raw = compute_critical_peaks(crs);
    let peaks = classify_peaks(&mut engine, raw.clone());
    let cc = check_constructor_confluence(crs, assumptions, budget);
    let comp = check_complementary_criterion(crs, &mut engine, &peaks, &cc, assumptions);
    let weak = check_weakly_complementary_criterion(crs, &mut engine, &peaks, &cc, assumptions);
    let finish = |verdict| Analysis {
        verdict,
        peaks: peaks.clone(),
        constructor_confluence: cc.clone(),
        complementary: comp.clone(),
        weakly_complementary: weak.clone(),
        assumptions: assumptions.clone(),
        budget,
    };
    for check in [&comp, &weak] {
        if check.applicable == TriBool::Yes {
            return finish(Verdict::Confluent {
                criterion: check.criterion,
                hypotheses: check.hypotheses.clone(),
            });
        }
    }
    let seeds = (!assumptions.seeds.is_empty()).then_some(assumptions.seeds.as_slice());
    if let Some(w) = search_counterexample(&mut engine, &raw, seeds, assumptions) {
        return finish(Verdict::NotConfluent(Box::new(w)));
    }
    let survey = bounded_joinability_survey(&mut engine, &raw, assumptions);
    if let Some(w) = survey.witness.clone() {
        return finish(Verdict::NotConfluent(Box::new(w)));
    }
    let mut diagnostics: Vec<Hypothesis> = comp.failures().cloned().collect();
    diagnostics.extend(weak.failures().cloned());
    diagnostics.push(Hypothesis::new(
        "counterexample-search",
        TriBool::Unknown,
        "no non-confluence witness found within bounds",
    ));
    finish(Verdict::Unknown {
        diagnostics,
        advisory: Some(Box::new(survey)),
    })
}
