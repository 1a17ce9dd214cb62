//! The depth-stratified reduction relation.
//!
//! Below ω only constructor rules fire, each with its conditions fulfilled
//! with respect to the previous finite stratum. From ω on every rule may
//! fire with conditions fulfilled with respect to the previous stratum
//! above ω. Limit strata are approximated by iterating concrete strata until
//! the root steps of every term the answer depends on stop changing.
//!
//! All answers are three-valued. `No` is only produced from exhaustive
//! searches; budget exhaustion and undecided conditions yield `Unknown`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::crs::{Crs, Literal, RuleId};
use crate::term::{match_term, Position, Term};

/// An ordinal index up to ω+ω selecting a stratum of the reduction relation.
#[derive(Clone, Copy, Debug)]
pub enum DepthIndex {
    Fin(u32),
    Omega,
    OmegaPlus(u32),
    OmegaOmega,
}

impl DepthIndex {
    fn key(self) -> (u8, u32) {
        match self {
            DepthIndex::Fin(n) => (0, n),
            DepthIndex::Omega => (1, 0),
            DepthIndex::OmegaPlus(n) => (1, n),
            DepthIndex::OmegaOmega => (2, 0),
        }
    }

    /// `OmegaPlus(0)` is written `Omega`.
    pub fn normalize(self) -> Self {
        match self {
            DepthIndex::OmegaPlus(0) => DepthIndex::Omega,
            d => d,
        }
    }

    pub fn is_limit(self) -> bool {
        matches!(self.normalize(), DepthIndex::Omega | DepthIndex::OmegaOmega)
    }

    /// Natural-number addition on the finite part.
    pub fn shift(self, n: u32) -> Self {
        match self.normalize() {
            DepthIndex::Fin(m) => DepthIndex::Fin(m + n),
            DepthIndex::Omega => DepthIndex::OmegaPlus(n).normalize(),
            DepthIndex::OmegaPlus(m) => DepthIndex::OmegaPlus(m + n),
            DepthIndex::OmegaOmega => DepthIndex::OmegaOmega,
        }
    }
}

impl PartialEq for DepthIndex {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for DepthIndex {}

impl Hash for DepthIndex {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for DepthIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DepthIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for DepthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.normalize() {
            DepthIndex::Fin(n) => write!(f, "{n}"),
            DepthIndex::Omega => write!(f, "ω"),
            DepthIndex::OmegaPlus(n) => write!(f, "ω+{n}"),
            DepthIndex::OmegaOmega => write!(f, "ω+ω"),
        }
    }
}

impl FromStr for DepthIndex {
    type Err = String;

    /// Accepts `n`, `w`, `w+n`, `w+w`, with `ω` allowed for `w`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('ω', "w");
        let bad = || format!("invalid depth `{s}` (expected n, w, w+n or w+w)");
        if s == "w" {
            return Ok(DepthIndex::Omega);
        }
        if s == "w+w" {
            return Ok(DepthIndex::OmegaOmega);
        }
        if let Some(rest) = s.strip_prefix("w+") {
            return rest
                .parse()
                .map(|n| DepthIndex::OmegaPlus(n).normalize())
                .map_err(|_| bad());
        }
        s.parse().map(DepthIndex::Fin).map_err(|_| bad())
    }
}

impl Serialize for DepthIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `n0 ⊕_α n1` for `α ∈ {0, ω}`: zero is neutral, otherwise `α + n0 + n1`.
pub fn plus_alpha(omega: bool, n0: u32, n1: u32) -> DepthIndex {
    if n0 == 0 || n1 == 0 || !omega {
        DepthIndex::Fin(n0 + n1)
    } else {
        DepthIndex::OmegaPlus(n0 + n1)
    }
}

/// Truncated subtraction on naturals.
pub fn monus(n0: u32, n1: u32) -> u32 {
    n0.saturating_sub(n1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriBool {
    Yes,
    No,
    Unknown,
}

impl TriBool {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriBool::Yes
        } else {
            TriBool::No
        }
    }

    pub fn and(self, other: TriBool) -> TriBool {
        match (self, other) {
            (TriBool::No, _) | (_, TriBool::No) => TriBool::No,
            (TriBool::Yes, TriBool::Yes) => TriBool::Yes,
            _ => TriBool::Unknown,
        }
    }

    pub fn or(self, other: TriBool) -> TriBool {
        match (self, other) {
            (TriBool::Yes, _) | (_, TriBool::Yes) => TriBool::Yes,
            (TriBool::No, TriBool::No) => TriBool::No,
            _ => TriBool::Unknown,
        }
    }

    pub fn negate(self) -> TriBool {
        match self {
            TriBool::Yes => TriBool::No,
            TriBool::No => TriBool::Yes,
            TriBool::Unknown => TriBool::Unknown,
        }
    }

    pub fn is_yes(self) -> bool {
        self == TriBool::Yes
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TriBool::Yes => "yes",
            TriBool::No => "no",
            TriBool::Unknown => "unknown",
        }
    }
}

impl fmt::Display for TriBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TriBool {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Expansions per reachability search.
    pub max_steps: usize,
    /// Reducts with more symbols are pruned.
    pub max_term_size: usize,
    /// Highest finite stratum tried when approximating a limit.
    pub max_strata: u32,
    /// Nesting cap for condition evaluation.
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 1000,
            max_term_size: 64,
            max_strata: 8,
            max_depth: 256,
        }
    }
}

/// A single root step: rule, reduct, and the least stratum of the current
/// run of strata licensing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootStep {
    pub rule: RuleId,
    pub result: Term,
    pub level: DepthIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub position: Position,
    pub rule: RuleId,
    pub result: Term,
    pub level: DepthIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reducts {
    pub steps: Vec<Step>,
    pub complete: bool,
}

impl Reducts {
    pub fn results(&self) -> impl Iterator<Item = &Term> {
        self.steps.iter().map(|s| &s.result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Term,
    pub position: Position,
    pub rule: RuleId,
    pub to: Term,
    pub level: DepthIndex,
}

/// Terms reachable from `origin`, in discovery order.
#[derive(Clone, Debug)]
pub struct ReachSet {
    pub origin: Term,
    pub depth: DepthIndex,
    pub members: Vec<Term>,
    pub complete: bool,
    pub edges: Vec<Edge>,
    parent: Vec<Option<usize>>,
    index: HashMap<Term, usize>,
}

impl ReachSet {
    pub fn contains(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The discovery path from the origin to `t`.
    pub fn path_to(&self, t: &Term) -> Option<Vec<Edge>> {
        let mut i = *self.index.get(t)?;
        let mut path = Vec::new();
        while let Some(e) = self.parent[i] {
            let edge = &self.edges[e];
            path.push(edge.clone());
            i = self.index[&edge.from];
        }
        path.reverse();
        Some(path)
    }

    pub fn intersects<'a>(&'a self, other: &'a ReachSet) -> Option<&'a Term> {
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.members.iter().find(|t| big.contains(t))
    }
}

#[derive(Clone, Debug)]
pub struct JoinResult {
    pub answer: TriBool,
    /// A common reduct when `answer` is `Yes`.
    pub meet: Option<Term>,
}

#[derive(Clone)]
struct RootEntry {
    steps: Arc<Vec<RootStep>>,
    complete: bool,
    /// Terms whose reach sets at the previous stratum were consulted.
    deps: Arc<Vec<Term>>,
}

impl RootEntry {
    fn empty() -> Self {
        RootEntry {
            steps: Arc::new(Vec::new()),
            complete: true,
            deps: Arc::new(Vec::new()),
        }
    }

    fn same_steps(&self, other: &RootEntry) -> bool {
        self.steps.len() == other.steps.len()
            && self
                .steps
                .iter()
                .zip(other.steps.iter())
                .all(|(a, b)| a.rule == b.rule && a.result == b.result)
    }

    fn find(&self, rule: RuleId, result: &Term) -> Option<&RootStep> {
        self.steps
            .iter()
            .find(|s| s.rule == rule && &s.result == result)
    }
}

/// Query context with memo tables; one per thread.
pub struct Engine {
    crs: Crs,
    budget: Budget,
    roots: HashMap<(Term, DepthIndex), RootEntry>,
    reach: HashMap<(Term, DepthIndex), Arc<ReachSet>>,
    nesting: usize,
}

const MAX_GROUND_PAIRS: usize = 64;

impl Engine {
    pub fn new(crs: &Crs, budget: Budget) -> Self {
        Engine {
            crs: crs.clone(),
            budget,
            roots: HashMap::new(),
            reach: HashMap::new(),
            nesting: 0,
        }
    }

    pub fn crs(&self) -> &Crs {
        &self.crs
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// Changing the budget invalidates every memoized answer.
    pub fn set_budget(&mut self, budget: Budget) {
        if budget != self.budget {
            self.budget = budget;
            self.roots.clear();
            self.reach.clear();
        }
    }

    /// All single steps from `t` at stratum `d`, ordered by position (pre-order)
    /// and then by rule.
    pub fn one_step_reducts(&mut self, t: &Term, d: DepthIndex) -> Reducts {
        let d = d.normalize();
        let mut steps = Vec::new();
        let mut complete = true;
        for p in t.positions() {
            let sub = t.subterm_at(&p).expect("own position");
            if sub.is_var() {
                continue;
            }
            let entry = self.root_steps(sub, d);
            complete &= entry.complete;
            for rs in entry.steps.iter() {
                steps.push(Step {
                    position: p.clone(),
                    rule: rs.rule,
                    result: t.replace_unchecked(&p.0, rs.result.clone()),
                    level: rs.level,
                });
            }
        }
        Reducts { steps, complete }
    }

    /// Fulfilledness of a condition list with respect to the relation at `d`.
    pub fn fulfilled(&mut self, conds: &[Literal], d: DepthIndex) -> TriBool {
        let mut deps = Vec::new();
        self.fulfilled_rec(conds, d.normalize(), &mut deps)
    }

    pub fn reachable(&mut self, t: &Term, d: DepthIndex) -> Arc<ReachSet> {
        self.reach_set(t, d.normalize())
    }

    pub fn joinable(&mut self, t0: &Term, t1: &Term, d: DepthIndex) -> JoinResult {
        let mut deps = Vec::new();
        self.joinable_rec(t0, t1, d.normalize(), &mut deps)
    }

    pub fn is_irreducible(&mut self, t: &Term, d: DepthIndex) -> TriBool {
        let r = self.one_step_reducts(t, d);
        if !r.steps.is_empty() {
            TriBool::No
        } else if r.complete {
            TriBool::Yes
        } else {
            TriBool::Unknown
        }
    }

    /// Results of contracting any set of pairwise incomparable redexes at once.
    pub fn parallel_reducts(&mut self, t: &Term, d: DepthIndex) -> (Vec<Term>, bool) {
        let cap = self.budget.max_steps.max(1);
        let mut complete = true;
        let out = self.parallel_rec(t, d.normalize(), cap, &mut complete);
        (out, complete)
    }

    fn parallel_rec(
        &mut self,
        t: &Term,
        d: DepthIndex,
        cap: usize,
        complete: &mut bool,
    ) -> Vec<Term> {
        let Term::App(f, args) = t else {
            return vec![t.clone()];
        };
        let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
        for a in args.iter() {
            let opts = self.parallel_rec(a, d, cap, complete);
            let mut next = Vec::new();
            'outer: for prefix in &combos {
                for o in &opts {
                    if next.len() >= cap {
                        *complete = false;
                        break 'outer;
                    }
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    next.push(v);
                }
            }
            combos = next;
        }
        let mut out: Vec<Term> = combos.into_iter().map(|v| Term::app(*f, v)).collect();
        let entry = self.root_steps(t, d);
        *complete &= entry.complete;
        let mut seen: HashSet<Term> = out.iter().cloned().collect();
        for rs in entry.steps.iter() {
            if seen.insert(rs.result.clone()) {
                out.push(rs.result.clone());
            }
        }
        out
    }

    /// Irreducible members of the reach set.
    pub fn normal_forms(&mut self, t: &Term, d: DepthIndex) -> (Vec<Term>, bool) {
        let rs = self.reachable(t, d);
        let mut complete = rs.complete;
        let mut out = Vec::new();
        for m in &rs.members {
            match self.is_irreducible(m, d) {
                TriBool::Yes => out.push(m.clone()),
                TriBool::No => {}
                TriBool::Unknown => complete = false,
            }
        }
        (out, complete)
    }

    fn root_steps(&mut self, s: &Term, d: DepthIndex) -> RootEntry {
        if s.is_var() {
            return RootEntry::empty();
        }
        let key = (s.clone(), d);
        if let Some(e) = self.roots.get(&key) {
            return e.clone();
        }
        match d {
            DepthIndex::Fin(0) => RootEntry::empty(),
            DepthIndex::Fin(n) => self.concrete(s, d, DepthIndex::Fin(n - 1), true),
            DepthIndex::OmegaPlus(n) => {
                let prev = DepthIndex::OmegaPlus(n - 1).normalize();
                self.concrete(s, d, prev, false)
            }
            DepthIndex::Omega | DepthIndex::OmegaOmega => self.limit(s, d),
        }
    }

    /// Root steps at a successor stratum `d` whose conditions are checked
    /// against `prev`.
    fn concrete(
        &mut self,
        s: &Term,
        d: DepthIndex,
        prev: DepthIndex,
        cons_only: bool,
    ) -> RootEntry {
        if self.nesting >= self.budget.max_depth {
            return RootEntry {
                complete: false,
                ..RootEntry::empty()
            };
        }
        self.nesting += 1;
        let below_omega = if cons_only {
            None
        } else {
            Some(self.root_steps(s, DepthIndex::Omega))
        };
        let previous = if prev.is_limit() {
            None
        } else {
            Some(self.root_steps(s, prev))
        };
        let mut steps = Vec::new();
        let mut complete = true;
        let mut deps = Vec::new();
        for i in 0..self.crs.rules.len() {
            let rule = &self.crs.rules[i];
            if cons_only && !rule.is_constructor_rule() {
                continue;
            }
            let Some(sigma) = match_term(&self.crs.signature, &rule.lhs, s) else {
                continue;
            };
            let id = RuleId(i);
            if !rule.extra_vars().is_empty() {
                complete = false;
                continue;
            }
            let result = rule.rhs.apply(&sigma);
            if let Some(rs) = below_omega.as_ref().and_then(|e| e.find(id, &result)) {
                steps.push(rs.clone());
                continue;
            }
            let conds: Vec<Literal> = rule.conditions.iter().map(|l| l.apply(&sigma)).collect();
            match self.fulfilled_rec(&conds, prev, &mut deps) {
                TriBool::Yes => {
                    let level = previous
                        .as_ref()
                        .and_then(|e| e.find(id, &result))
                        .map(|rs| rs.level)
                        .unwrap_or(d);
                    steps.push(RootStep {
                        rule: id,
                        result,
                        level,
                    });
                }
                TriBool::No => {}
                TriBool::Unknown => complete = false,
            }
        }
        self.nesting -= 1;
        if let Some(e) = &below_omega {
            complete &= e.complete;
        }
        let mut seen = HashSet::new();
        deps.retain(|t| seen.insert(t.clone()));
        let entry = RootEntry {
            steps: Arc::new(steps),
            complete,
            deps: Arc::new(deps),
        };
        self.roots.insert((s.clone(), d), entry.clone());
        entry
    }

    fn chain_level(limit: DepthIndex, k: u32) -> DepthIndex {
        match limit {
            DepthIndex::Omega => DepthIndex::Fin(k),
            _ => DepthIndex::OmegaPlus(k).normalize(),
        }
    }

    /// Root steps at a limit stratum: find `k` such that stratum `k+1`
    /// agrees with stratum `k` on every term the answer for `s` depends on.
    /// Agreement on that dependency-closed set propagates to all higher
    /// strata, so the common value is the limit.
    fn limit(&mut self, s: &Term, limit: DepthIndex) -> RootEntry {
        let cap = self.budget.max_steps.max(1);
        for k in 0..self.budget.max_strata {
            let lo = Self::chain_level(limit, k);
            let hi = Self::chain_level(limit, k + 1);
            let mut universe: HashSet<Term> = HashSet::from([s.clone()]);
            let mut work = vec![s.clone()];
            let mut settled: Vec<(Term, RootEntry)> = Vec::new();
            let mut stable = true;
            let mut complete = true;
            while let Some(x) = work.pop() {
                let e_hi = self.root_steps(&x, hi);
                let e_lo = self.root_steps(&x, lo);
                if !e_hi.same_steps(&e_lo) {
                    stable = false;
                    break;
                }
                complete &= e_hi.complete;
                for v in e_hi.deps.iter() {
                    let rs = self.reach_set(v, lo);
                    for m in &rs.members {
                        for p in m.positions() {
                            let sub = m.subterm_at(&p).expect("own position");
                            if !sub.is_var() && universe.insert(sub.clone()) {
                                work.push(sub.clone());
                            }
                        }
                    }
                }
                settled.push((x, e_hi));
                if universe.len() > cap {
                    let e = self.root_steps(s, hi);
                    return RootEntry {
                        complete: false,
                        deps: Arc::new(Vec::new()),
                        ..e
                    };
                }
            }
            if stable {
                let mut answer = None;
                for (x, e) in settled {
                    let entry = RootEntry {
                        steps: e.steps,
                        complete,
                        deps: Arc::new(Vec::new()),
                    };
                    if &x == s {
                        answer = Some(entry.clone());
                    }
                    self.roots.entry((x, limit)).or_insert(entry);
                }
                return answer.expect("origin settled");
            }
        }
        let e = self.root_steps(s, Self::chain_level(limit, self.budget.max_strata));
        let entry = RootEntry {
            steps: e.steps,
            complete: false,
            deps: Arc::new(Vec::new()),
        };
        self.roots.insert((s.clone(), limit), entry.clone());
        entry
    }

    fn reach_set(&mut self, t: &Term, d: DepthIndex) -> Arc<ReachSet> {
        let key = (t.clone(), d);
        if let Some(r) = self.reach.get(&key) {
            return r.clone();
        }
        let mut rs = ReachSet {
            origin: t.clone(),
            depth: d,
            members: vec![t.clone()],
            complete: true,
            edges: Vec::new(),
            parent: vec![None],
            index: HashMap::from([(t.clone(), 0)]),
        };
        let mut i = 0;
        while i < rs.members.len() {
            if i >= self.budget.max_steps {
                rs.complete = false;
                break;
            }
            let m = rs.members[i].clone();
            i += 1;
            let red = self.one_step_reducts(&m, d);
            rs.complete &= red.complete;
            for st in red.steps {
                if st.result.size() > self.budget.max_term_size {
                    rs.complete = false;
                    continue;
                }
                let edge_id = rs.edges.len();
                let fresh = !rs.index.contains_key(&st.result);
                rs.edges.push(Edge {
                    from: m.clone(),
                    position: st.position,
                    rule: st.rule,
                    to: st.result.clone(),
                    level: st.level,
                });
                if fresh {
                    rs.index.insert(st.result.clone(), rs.members.len());
                    rs.members.push(st.result);
                    rs.parent.push(Some(edge_id));
                }
            }
        }
        let rs = Arc::new(rs);
        self.reach.insert(key, rs.clone());
        rs
    }

    fn consult(&mut self, t: &Term, d: DepthIndex, deps: &mut Vec<Term>) -> Arc<ReachSet> {
        deps.push(t.clone());
        self.reach_set(t, d)
    }

    fn joinable_rec(
        &mut self,
        t0: &Term,
        t1: &Term,
        d: DepthIndex,
        deps: &mut Vec<Term>,
    ) -> JoinResult {
        if t0 == t1 {
            return JoinResult {
                answer: TriBool::Yes,
                meet: Some(t0.clone()),
            };
        }
        let r0 = self.consult(t0, d, deps);
        if r0.contains(t1) {
            return JoinResult {
                answer: TriBool::Yes,
                meet: Some(t1.clone()),
            };
        }
        let r1 = self.consult(t1, d, deps);
        if let Some(m) = r0.intersects(&r1) {
            return JoinResult {
                answer: TriBool::Yes,
                meet: Some(m.clone()),
            };
        }
        JoinResult {
            answer: if r0.complete && r1.complete {
                TriBool::No
            } else {
                TriBool::Unknown
            },
            meet: None,
        }
    }

    fn fulfilled_rec(&mut self, conds: &[Literal], d: DepthIndex, deps: &mut Vec<Term>) -> TriBool {
        let mut acc = TriBool::Yes;
        for lit in conds {
            let v = self.literal(lit, d, deps);
            acc = acc.and(v);
            if acc == TriBool::No {
                break;
            }
        }
        acc
    }

    fn literal(&mut self, lit: &Literal, d: DepthIndex, deps: &mut Vec<Term>) -> TriBool {
        match lit {
            Literal::Eq(u, v) => self.joinable_rec(u, v, d, deps).answer,
            Literal::Def(u) => {
                let r = self.consult(u, d, deps);
                if r.members
                    .iter()
                    .any(|m| m.is_constructor_ground(&self.crs.signature))
                {
                    TriBool::Yes
                } else if r.complete {
                    TriBool::No
                } else {
                    TriBool::Unknown
                }
            }
            Literal::Neq(u, v) => {
                let ru = self.consult(u, d, deps);
                let rv = self.consult(v, d, deps);
                let sig = &self.crs.signature;
                let cu: Vec<Term> = ru
                    .members
                    .iter()
                    .filter(|m| m.is_constructor_ground(sig))
                    .cloned()
                    .collect();
                let cv: Vec<Term> = rv
                    .members
                    .iter()
                    .filter(|m| m.is_constructor_ground(sig))
                    .cloned()
                    .collect();
                let mut undecided = !(ru.complete && rv.complete);
                let mut pairs = 0;
                for a in &cu {
                    for b in &cv {
                        pairs += 1;
                        if pairs > MAX_GROUND_PAIRS {
                            return TriBool::Unknown;
                        }
                        match self.joinable_rec(a, b, d, deps).answer {
                            TriBool::No => return TriBool::Yes,
                            TriBool::Unknown => undecided = true,
                            TriBool::Yes => {}
                        }
                    }
                }
                if undecided {
                    TriBool::Unknown
                } else {
                    TriBool::No
                }
            }
        }
    }
}
