//! Human-readable and JSON renderings of analysis results.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::criteria::{Analysis, CriterionCheck, SurveyReport, Verdict, Witness, WitnessSource};
use crate::crs::Crs;
use crate::engine::{Edge, ReachSet};
use crate::peaks::CriticalPeak;
use crate::term::{Signature, Substitution, Term};

fn term(sig: &Signature, t: &Term) -> String {
    t.display(sig).to_string()
}

fn literals(sig: &Signature, lits: &[crate::crs::Literal]) -> Vec<String> {
    lits.iter().map(|l| l.display(sig).to_string()).collect()
}

pub fn peak_json(sig: &Signature, index: usize, p: &CriticalPeak) -> Value {
    json!({
        "index": index + 1,
        "source": [p.source.0.to_string(), p.source.1.to_string()],
        "position": p.position.to_string(),
        "form": [p.lambda0.as_u8(), p.lambda1.as_u8()],
        "overlay": p.is_overlay(),
        "peak_term": term(sig, &p.peak_term),
        "t0": term(sig, &p.t0),
        "d0": literals(sig, &p.d0),
        "t1": term(sig, &p.t1),
        "d1": literals(sig, &p.d1),
        "sigma": p.sigma.display(sig),
    })
}

fn edge_json(sig: &Signature, e: &Edge) -> Value {
    json!({
        "from": term(sig, &e.from),
        "position": e.position.to_string(),
        "rule": e.rule.to_string(),
        "to": term(sig, &e.to),
        "level": e.level,
    })
}

fn reach_json(sig: &Signature, r: &ReachSet) -> Value {
    json!({
        "origin": term(sig, &r.origin),
        "complete": r.complete,
        "members": r.members.iter().map(|m| term(sig, m)).collect::<Vec<_>>(),
    })
}

pub fn witness_json(sig: &Signature, w: &Witness) -> Value {
    let source = match &w.source {
        WitnessSource::Seed => json!({"kind": "seed"}),
        WitnessSource::PeakInstance { peak, phi } => json!({
            "kind": "peak-instance",
            "peak": peak + 1,
            "phi": phi.display(sig),
        }),
    };
    json!({
        "seed": term(sig, &w.seed),
        "t0": term(sig, &w.t0),
        "t1": term(sig, &w.t1),
        "derivation0": w.derivation0.iter().map(|e| edge_json(sig, e)).collect::<Vec<_>>(),
        "derivation1": w.derivation1.iter().map(|e| edge_json(sig, e)).collect::<Vec<_>>(),
        "reach0": reach_json(sig, &w.reach0),
        "reach1": reach_json(sig, &w.reach1),
        "source": source,
    })
}

fn criterion_json(c: &CriterionCheck) -> Vec<Value> {
    c.hypotheses
        .iter()
        .map(|h| {
            json!({
                "criterion": c.criterion.id(),
                "name": h.name,
                "status": h.status,
                "detail": h.detail,
            })
        })
        .collect()
}

fn subst_json(sig: &Signature, s: &Substitution) -> Value {
    Value::String(s.display(sig))
}

pub fn survey_json(sig: &Signature, s: &SurveyReport) -> Value {
    json!({
        "bound": s.bound,
        "heuristic": s.heuristic,
        "summary": s.summary(),
        "peaks": s.peaks.iter().map(|p| json!({
            "peak": p.peak + 1,
            "status": p.status,
            "enumeration_complete": p.enumeration_complete,
            "instances": p.instances.iter().map(|(phi, r)| json!({
                "phi": subst_json(sig, phi),
                "result": r,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn analysis_json(crs: &Crs, a: &Analysis) -> Value {
    let sig = &crs.signature;
    let mut hypotheses = criterion_json(&a.complementary);
    hypotheses.extend(criterion_json(&a.weakly_complementary));
    let peaks: Vec<Value> = a
        .peaks
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut v = peak_json(sig, i, &p.peak);
            v["complementary"] = json!(p.complementary);
            v["weakly_complementary"] = json!(p.weakly_complementary);
            v
        })
        .collect();
    let (criterion, witness, diagnostics, advisory) = match &a.verdict {
        Verdict::Confluent { criterion, .. } => {
            (json!(criterion.id()), Value::Null, json!([]), Value::Null)
        }
        Verdict::NotConfluent(w) => (Value::Null, witness_json(sig, w), json!([]), Value::Null),
        Verdict::Unknown {
            diagnostics,
            advisory,
        } => (
            Value::Null,
            Value::Null,
            json!(diagnostics),
            advisory
                .as_ref()
                .map(|s| survey_json(sig, s))
                .unwrap_or(Value::Null),
        ),
    };
    json!({
        "verdict": a.verdict.name(),
        "criterion": criterion,
        "hypotheses": hypotheses,
        "peaks": peaks,
        "witness": witness,
        "diagnostics": diagnostics,
        "advisory": advisory,
        "constructor_confluence": {
            "status": a.constructor_confluence.status,
            "assumed": a.constructor_confluence.assumed,
            "trace": a.constructor_confluence.trace,
        },
        "assumptions": {
            "terminating": a.assumptions.terminating,
            "constructor_confluent": a.assumptions.constructor_confluent,
            "assume_cvar_equations": a.assumptions.cvar_equations(crs),
            "inst_size_bound": a.assumptions.inst_size_bound,
            "seeds": a.assumptions.seeds.iter().map(|t| term(sig, t)).collect::<Vec<_>>(),
        },
        "budget": a.budget,
    })
}

pub fn peak_text(sig: &Signature, index: usize, p: &CriticalPeak) -> String {
    let conds = |d: &[crate::crs::Literal]| {
        if d.is_empty() {
            String::new()
        } else {
            format!(" <= {}", literals(sig, d).join(", "))
        }
    };
    format!(
        "#{} {} into {} at {}: ({},{}){}\n    peak {}\n    t0 = {}{}\n    t1 = {}{}",
        index + 1,
        p.source.0,
        p.source.1,
        p.position,
        p.lambda0.as_u8(),
        p.lambda1.as_u8(),
        if p.is_overlay() { ", overlay" } else { "" },
        term(sig, &p.peak_term),
        term(sig, &p.t0),
        conds(&p.d0),
        term(sig, &p.t1),
        conds(&p.d1),
    )
}

fn derivation_text(sig: &Signature, seed: &Term, d: &[Edge]) -> String {
    let mut s = term(sig, seed);
    for e in d {
        let _ = write!(
            s,
            " -[{} @ {}, {}]-> {}",
            e.rule,
            e.position,
            e.level,
            term(sig, &e.to)
        );
    }
    s
}

pub fn witness_text(sig: &Signature, w: &Witness) -> String {
    format!(
        "witness from {}:\n  {}\n  {}\n  {} and {} have disjoint complete reach sets ({} and {} terms)",
        term(sig, &w.seed),
        derivation_text(sig, &w.seed, &w.derivation0),
        derivation_text(sig, &w.seed, &w.derivation1),
        term(sig, &w.t0),
        term(sig, &w.t1),
        w.reach0.len(),
        w.reach1.len(),
    )
}

fn criterion_text(out: &mut String, c: &CriterionCheck) {
    let _ = writeln!(out, "criterion {}: {}", c.criterion.id(), c.applicable);
    for h in &c.hypotheses {
        let _ = writeln!(out, "  [{}] {}: {}", h.status, h.name, h.detail);
    }
}

pub fn survey_text(sig: &Signature, s: &SurveyReport) -> String {
    let mut out = format!("advisory survey: {}\n", s.summary());
    for p in &s.peaks {
        let _ = writeln!(
            out,
            "  peak #{}: {:?} over {} instances",
            p.peak + 1,
            p.status,
            p.instances.len()
        );
        for (phi, r) in &p.instances {
            let _ = writeln!(out, "    {} -> {:?}", phi.display(sig), r);
        }
    }
    out
}

pub fn analysis_text(crs: &Crs, a: &Analysis) -> String {
    let sig = &crs.signature;
    let mut out = String::new();
    let _ = writeln!(out, "{} critical peaks", a.peaks.len());
    for (i, p) in a.peaks.iter().enumerate() {
        let _ = writeln!(out, "{}", peak_text(sig, i, &p.peak));
        let _ = writeln!(
            out,
            "    complementary: {}, weakly complementary: {}",
            p.complementary, p.weakly_complementary
        );
    }
    let _ = writeln!(
        out,
        "constructor confluence: {}{}",
        a.constructor_confluence.status,
        if a.constructor_confluence.assumed {
            " (assumed)"
        } else {
            ""
        }
    );
    criterion_text(&mut out, &a.complementary);
    criterion_text(&mut out, &a.weakly_complementary);
    match &a.verdict {
        Verdict::Confluent { criterion, .. } => {
            let _ = writeln!(out, "verdict: confluent (criterion {})", criterion.id());
        }
        Verdict::NotConfluent(w) => {
            let _ = writeln!(out, "verdict: not confluent");
            let _ = writeln!(out, "{}", witness_text(sig, w));
        }
        Verdict::Unknown {
            diagnostics,
            advisory,
        } => {
            let _ = writeln!(out, "verdict: unknown");
            for d in diagnostics {
                let _ = writeln!(out, "  [{}] {}: {}", d.status, d.name, d.detail);
            }
            if let Some(s) = advisory {
                out.push_str(&survey_text(sig, s));
            }
        }
    }
    out
}
