//! Sorted first-order terms over a signature with a constructor sub-signature.
//!
//! Variables come in two disjoint kinds: general variables range over all
//! terms of their sort, constructor variables only over pure constructor
//! terms (constructor symbols and constructor variables).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::ops::Deref;
use std::sync::Arc;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunId(pub u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("position {0} is not a position of the term")]
    InvalidPosition(Position),
    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: String, found: String },
    #[error("positions {0} and {1} overlap")]
    OverlappingPositions(Position, Position),
    #[error("symbol `{name}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("sort `{0}` declared twice")]
    DuplicateSort(String),
    #[error("function symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("sort `{0}` has no constructor ground term")]
    EmptySort(String),
    #[error("variable `{0}` clashes with another declaration")]
    NameClash(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub result: SortId,
    pub constructor: bool,
}

/// Sorts and function symbols; the constructor flag on each symbol fixes
/// the constructor sub-signature.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<String>,
    funs: Vec<FunDecl>,
    sort_index: HashMap<String, SortId>,
    fun_index: HashMap<String, FunId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: &str) -> Result<SortId, SignatureError> {
        if self.sort_index.contains_key(name) {
            return Err(SignatureError::DuplicateSort(name.to_string()));
        }
        let id = SortId(self.sorts.len() as u32);
        self.sorts.push(name.to_string());
        self.sort_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_fun(
        &mut self,
        name: &str,
        args: Vec<SortId>,
        result: SortId,
        constructor: bool,
    ) -> Result<FunId, SignatureError> {
        if self.fun_index.contains_key(name) {
            return Err(SignatureError::DuplicateSymbol(name.to_string()));
        }
        for s in args.iter().chain(std::iter::once(&result)) {
            if s.0 as usize >= self.sorts.len() {
                return Err(SignatureError::UnknownSort(format!("#{}", s.0)));
            }
        }
        let id = FunId(self.funs.len() as u32);
        self.funs.push(FunDecl {
            name: name.to_string(),
            args,
            result,
            constructor,
        });
        self.fun_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn sorts(&self) -> impl Iterator<Item = SortId> + '_ {
        (0..self.sorts.len() as u32).map(SortId)
    }

    pub fn funs(&self) -> impl Iterator<Item = (FunId, &FunDecl)> + '_ {
        self.funs
            .iter()
            .enumerate()
            .map(|(i, d)| (FunId(i as u32), d))
    }

    pub fn sort_count(&self) -> usize {
        self.sorts.len()
    }

    pub fn sort_name(&self, s: SortId) -> &str {
        &self.sorts[s.0 as usize]
    }

    pub fn fun(&self, f: FunId) -> &FunDecl {
        &self.funs[f.0 as usize]
    }

    pub fn is_constructor(&self, f: FunId) -> bool {
        self.fun(f).constructor
    }

    pub fn lookup_sort(&self, name: &str) -> Option<SortId> {
        self.sort_index.get(name).copied()
    }

    pub fn lookup_fun(&self, name: &str) -> Option<FunId> {
        self.fun_index.get(name).copied()
    }

    /// Checks that every sort is inhabited by some constructor ground term.
    pub fn check_inhabited(&self) -> Result<(), Vec<SignatureError>> {
        let mut inhabited = vec![false; self.sorts.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for d in self.funs.iter().filter(|d| d.constructor) {
                let r = d.result.0 as usize;
                if !inhabited[r] && d.args.iter().all(|a| inhabited[a.0 as usize]) {
                    inhabited[r] = true;
                    changed = true;
                }
            }
        }
        let errs: Vec<_> = inhabited
            .iter()
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(i, _)| SignatureError::EmptySort(self.sorts[i].clone()))
            .collect();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// All constructor ground terms of `sort` with at most `max_size` symbols,
    /// ordered by size and then structurally.
    pub fn constructor_ground_terms(&self, sort: SortId, max_size: usize) -> Vec<Term> {
        self.ground_terms_where(sort, max_size, |d| d.constructor)
    }

    /// All ground terms of `sort` with at most `max_size` symbols.
    pub fn ground_terms(&self, sort: SortId, max_size: usize) -> Vec<Term> {
        self.ground_terms_where(sort, max_size, |_| true)
    }

    fn ground_terms_where(
        &self,
        sort: SortId,
        max_size: usize,
        keep: impl Fn(&FunDecl) -> bool,
    ) -> Vec<Term> {
        // by_size[n][s] = terms of sort s with exactly n symbols
        let ns = self.sorts.len();
        let mut by_size: Vec<Vec<Vec<Term>>> = vec![vec![Vec::new(); ns]];
        for n in 1..=max_size {
            let mut level = vec![Vec::new(); ns];
            for (f, d) in self.funs() {
                if !keep(d) {
                    continue;
                }
                if d.args.is_empty() {
                    if n == 1 {
                        level[d.result.0 as usize].push(Term::constant(f));
                    }
                    continue;
                }
                if n < 1 + d.args.len() {
                    continue;
                }
                for args in split_sizes(n - 1, d.args.len()) {
                    let pools: Vec<&Vec<Term>> = args
                        .iter()
                        .zip(&d.args)
                        .map(|(k, s)| &by_size[*k][s.0 as usize])
                        .collect();
                    for combo in cartesian(&pools) {
                        level[d.result.0 as usize].push(Term::app(f, combo));
                    }
                }
            }
            by_size.push(level);
        }
        by_size
            .into_iter()
            .flat_map(|mut lvl| std::mem::take(&mut lvl[sort.0 as usize]))
            .collect()
    }
}

fn split_sizes(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in split_sizes(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian(pools: &[&Vec<Term>]) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::with_capacity(acc.len() * pool.len());
        for prefix in &acc {
            for t in pool.iter() {
                let mut v = prefix.clone();
                v.push(t.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    General,
    Constructor,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub kind: VarKind,
    pub sort: SortId,
}

impl Var {
    pub fn new(name: &str, kind: VarKind, sort: SortId) -> Self {
        Var {
            name: Arc::from(name),
            kind,
            sort,
        }
    }

    pub fn is_constructor(&self) -> bool {
        self.kind == VarKind::Constructor
    }
}

/// The declared general and constructor variables of a specification.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableSystem {
    vars: BTreeMap<String, Var>,
}

impl VariableSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, sig: &Signature, var: Var) -> Result<(), SignatureError> {
        let name = var.name.to_string();
        if self.vars.contains_key(&name) || sig.lookup_fun(&name).is_some() {
            return Err(SignatureError::NameClash(name));
        }
        self.vars.insert(name, var);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&Var> {
        self.vars.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Var> {
        self.vars.values()
    }

    pub fn gvars(&self) -> impl Iterator<Item = &Var> {
        self.vars.values().filter(|v| v.kind == VarKind::General)
    }

    pub fn cvars(&self) -> impl Iterator<Item = &Var> {
        self.vars
            .values()
            .filter(|v| v.kind == VarKind::Constructor)
    }
}

/// A path into a term; argument indices are 1-based, the root is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<u32>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: u32) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl std::str::FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "e" {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|p| match p.parse::<u32>() {
                Ok(0) | Err(_) => Err(format!("bad position component `{p}`")),
                Ok(n) => Ok(n),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Position)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(FunId, Args),
}

/// Shared argument list of an application. Carries a structural hash so
/// that hashing is constant-time and unequal terms usually compare in O(1).
#[derive(Clone)]
pub struct Args {
    items: Arc<[Term]>,
    hash: u64,
}

impl Args {
    fn new(f: FunId, items: Vec<Term>) -> Self {
        let mut h = DefaultHasher::new();
        f.hash(&mut h);
        for t in &items {
            t.hash(&mut h);
        }
        Args {
            items: Arc::from(items),
            hash: h.finish(),
        }
    }
}

impl Deref for Args {
    type Target = [Term];

    fn deref(&self) -> &[Term] {
        &self.items
    }
}

impl PartialEq for Args {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.items, &other.items)
            || (self.hash == other.hash && self.items == other.items)
    }
}

impl Eq for Args {}

impl Hash for Args {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl PartialOrd for Args {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Args {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.items, &other.items) {
            return Ordering::Equal;
        }
        self.items.cmp(&other.items)
    }
}

impl fmt::Debug for Args {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.items.iter()).finish()
    }
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }

    pub fn constant(f: FunId) -> Self {
        Term::App(f, Args::new(f, Vec::new()))
    }

    pub fn app(f: FunId, args: Vec<Term>) -> Self {
        Term::App(f, Args::new(f, args))
    }

    /// Builds `f(args)` after checking arity and argument sorts.
    pub fn checked_app(sig: &Signature, f: FunId, args: Vec<Term>) -> Result<Self, TermError> {
        let d = sig.fun(f);
        if d.args.len() != args.len() {
            return Err(TermError::ArityMismatch {
                name: d.name.clone(),
                expected: d.args.len(),
                found: args.len(),
            });
        }
        for (a, s) in args.iter().zip(&d.args) {
            let found = a.sort(sig);
            if found != *s {
                return Err(TermError::SortMismatch {
                    expected: sig.sort_name(*s).to_string(),
                    found: sig.sort_name(found).to_string(),
                });
            }
        }
        Ok(Term::app(f, args))
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, a) => a,
        }
    }

    pub fn head(&self) -> Option<FunId> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(*f),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn sort(&self, sig: &Signature) -> SortId {
        match self {
            Term::Var(v) => v.sort,
            Term::App(f, _) => sig.fun(*f).result,
        }
    }

    /// Verifies well-sortedness of the whole term and returns its sort.
    pub fn check_sorts(&self, sig: &Signature) -> Result<SortId, TermError> {
        match self {
            Term::Var(v) => Ok(v.sort),
            Term::App(f, args) => {
                let d = sig.fun(*f);
                if d.args.len() != args.len() {
                    return Err(TermError::ArityMismatch {
                        name: d.name.clone(),
                        expected: d.args.len(),
                        found: args.len(),
                    });
                }
                for (a, s) in args.iter().zip(&d.args) {
                    let found = a.check_sorts(sig)?;
                    if found != *s {
                        return Err(TermError::SortMismatch {
                            expected: sig.sort_name(*s).to_string(),
                            found: sig.sort_name(found).to_string(),
                        });
                    }
                }
                Ok(d.result)
            }
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_var(&self, x: &Var) -> bool {
        match self {
            Term::Var(v) => v == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variable occurrences in left-to-right order, with repetitions.
    pub fn var_occurrences(&self) -> Vec<(Position, Var)> {
        self.positions()
            .into_iter()
            .filter_map(|p| match self.subterm_at(&p) {
                Ok(Term::Var(v)) => Some((p, v.clone())),
                _ => None,
            })
            .collect()
    }

    /// Only constructor symbols, variables of either kind.
    pub fn is_constructor_term(&self, sig: &Signature) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(f, args) => {
                sig.is_constructor(*f) && args.iter().all(|a| a.is_constructor_term(sig))
            }
        }
    }

    /// Only constructor symbols and constructor variables.
    pub fn is_pure_constructor_term(&self, sig: &Signature) -> bool {
        match self {
            Term::Var(v) => v.is_constructor(),
            Term::App(f, args) => {
                sig.is_constructor(*f) && args.iter().all(|a| a.is_pure_constructor_term(sig))
            }
        }
    }

    pub fn is_constructor_ground(&self, sig: &Signature) -> bool {
        self.is_ground() && self.is_constructor_term(sig)
    }

    /// All positions in pre-order, root first.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<u32>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        for (i, a) in self.args().iter().enumerate() {
            path.push(i as u32 + 1);
            a.collect_positions(path, out);
            path.pop();
        }
    }

    /// Positions whose subterm is not a variable.
    pub fn fun_positions(&self) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| !self.subterm_at(p).map(Term::is_var).unwrap_or(true))
            .collect()
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            cur = cur
                .args()
                .get((i as usize).wrapping_sub(1))
                .ok_or_else(|| TermError::InvalidPosition(p.clone()))?;
        }
        Ok(cur)
    }

    /// `self[p <- u]`; the replacement must have the sort of the replaced subterm.
    pub fn replace_at(&self, sig: &Signature, p: &Position, u: Term) -> Result<Term, TermError> {
        let old = self.subterm_at(p)?;
        let (expected, found) = (old.sort(sig), u.sort(sig));
        if expected != found {
            return Err(TermError::SortMismatch {
                expected: sig.sort_name(expected).to_string(),
                found: sig.sort_name(found).to_string(),
            });
        }
        Ok(self.replace_unchecked(&p.0, u))
    }

    pub(crate) fn replace_unchecked(&self, path: &[u32], u: Term) -> Term {
        match path.split_first() {
            None => u,
            Some((&i, rest)) => match self {
                Term::Var(_) => unreachable!("position validated"),
                Term::App(f, args) => {
                    let mut v: Vec<Term> = args.to_vec();
                    let k = i as usize - 1;
                    v[k] = args[k].replace_unchecked(rest, u);
                    Term::app(*f, v)
                }
            },
        }
    }

    /// Simultaneous replacement at pairwise incomparable (or equal) positions.
    pub fn replace_parallel(
        &self,
        sig: &Signature,
        assignments: &BTreeMap<Position, Term>,
    ) -> Result<Term, TermError> {
        let keys: Vec<&Position> = assignments.keys().collect();
        for (i, p) in keys.iter().enumerate() {
            for q in &keys[i + 1..] {
                if p.is_prefix_of(q) || q.is_prefix_of(p) {
                    return Err(TermError::OverlappingPositions((*p).clone(), (*q).clone()));
                }
            }
        }
        let mut out = self.clone();
        for (p, u) in assignments {
            out = out.replace_at(sig, p, u.clone())?;
        }
        Ok(out)
    }

    pub fn is_linear(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.linear_walk(&mut seen)
    }

    fn linear_walk(&self, seen: &mut BTreeSet<Var>) -> bool {
        match self {
            Term::Var(v) => seen.insert(v.clone()),
            Term::App(_, args) => args.iter().all(|a| a.linear_walk(seen)),
        }
    }

    pub fn apply(&self, sigma: &Substitution) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::app(*f, args.iter().map(|a| a.apply(sigma)).collect()),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::App(g, args) => {
                write!(f, "{}", self.sig.fun(*g).name)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a.display(self.sig))?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite map from variables to terms; unmapped variables stay fixed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        Substitution(pairs.into_iter().collect())
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, t: Term) {
        self.0.insert(x, t);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    /// `x (self then other)` = `(x self) other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> = self
            .0
            .iter()
            .map(|(x, t)| (x.clone(), t.apply(other)))
            .collect();
        for (x, t) in &other.0 {
            out.entry(x.clone()).or_insert_with(|| t.clone());
        }
        out.retain(|x, t| t.as_var() != Some(x));
        Substitution(out)
    }

    pub fn restrict(&self, keep: &BTreeSet<Var>) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(x, _)| keep.contains(*x))
                .map(|(x, t)| (x.clone(), t.clone()))
                .collect(),
        )
    }

    /// Sort preservation and kind respect: constructor variables map to
    /// pure constructor terms.
    pub fn is_well_formed(&self, sig: &Signature) -> bool {
        self.0.iter().all(|(x, t)| {
            t.check_sorts(sig).ok() == Some(x.sort)
                && (!x.is_constructor() || t.is_pure_constructor_term(sig))
        })
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(x, t)| format!("{}↦{}", x.name, t.display(sig)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// One-sided matching: the least `σ` with `pattern σ = subject`, where
/// constructor variables may only bind pure constructor terms.
pub fn match_term(sig: &Signature, pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = BTreeMap::new();
    if match_into(sig, pattern, subject, &mut sigma) {
        Some(Substitution(sigma))
    } else {
        None
    }
}

fn match_into(
    sig: &Signature,
    pattern: &Term,
    subject: &Term,
    sigma: &mut BTreeMap<Var, Term>,
) -> bool {
    match pattern {
        Term::Var(x) => {
            if x.sort != subject.sort(sig) {
                return false;
            }
            if x.is_constructor() && !subject.is_pure_constructor_term(sig) {
                return false;
            }
            match sigma.get(x) {
                Some(bound) => bound == subject,
                None => {
                    sigma.insert(x.clone(), subject.clone());
                    true
                }
            }
        }
        Term::App(f, pargs) => match subject {
            Term::App(g, sargs) if f == g => pargs
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_into(sig, p, s, sigma)),
            _ => false,
        },
    }
}

/// Supplies variable names not yet in use, decorated with primes.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    used: BTreeSet<Arc<str>>,
}

impl FreshNames {
    pub fn avoiding<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Self {
        FreshNames {
            used: vars.into_iter().map(|v| v.name.clone()).collect(),
        }
    }

    pub fn reserve(&mut self, v: &Var) {
        self.used.insert(v.name.clone());
    }

    pub fn fresh(&mut self, base: &Var, kind: VarKind) -> Var {
        let mut name = format!("{}'", base.name);
        while self.used.contains(name.as_str()) {
            name.push('\'');
        }
        let v = Var::new(&name, kind, base.sort);
        self.used.insert(v.name.clone());
        v
    }
}

/// Sort- and kind-preserving renaming of `vars` to names outside `avoid`.
pub fn renaming_apart(vars: &BTreeSet<Var>, avoid: &BTreeSet<Var>) -> Substitution {
    let mut fresh = FreshNames::avoiding(vars.iter().chain(avoid.iter()));
    Substitution(
        vars.iter()
            .map(|x| (x.clone(), Term::Var(fresh.fresh(x, x.kind))))
            .collect(),
    )
}

/// Most general unifier of `equations`, most general on `protected`.
///
/// Standard syntactic unification with occurs check. A constructor variable
/// may only be bound to a term built from constructor symbols; general
/// variables inside such a term are first bound to fresh constructor
/// variables. Between two variables of different kinds the general one is
/// bound.
pub fn mgu(
    sig: &Signature,
    equations: &[(Term, Term)],
    protected: &BTreeSet<Var>,
) -> Option<Substitution> {
    let mut fresh = FreshNames::avoiding(protected.iter());
    for (s, t) in equations {
        for v in s.vars().iter().chain(t.vars().iter()) {
            fresh.reserve(v);
        }
    }
    let mut sigma: BTreeMap<Var, Term> = BTreeMap::new();
    let mut stack: Vec<(Term, Term)> = equations.iter().rev().cloned().collect();

    fn bind(sigma: &mut BTreeMap<Var, Term>, x: Var, t: Term) {
        let single = Substitution(BTreeMap::from([(x.clone(), t.clone())]));
        for v in sigma.values_mut() {
            *v = v.apply(&single);
        }
        sigma.insert(x, t);
    }

    while let Some((s, t)) = stack.pop() {
        let cur = Substitution(sigma.clone());
        let (s, t) = (s.apply(&cur), t.apply(&cur));
        if s == t {
            continue;
        }
        if s.sort(sig) != t.sort(sig) {
            return None;
        }
        match (s, t) {
            (Term::Var(x), Term::Var(y)) => {
                if x.kind == VarKind::General || y.kind == VarKind::Constructor {
                    bind(&mut sigma, x, Term::Var(y));
                } else {
                    bind(&mut sigma, y, Term::Var(x));
                }
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.contains_var(&x) {
                    return None;
                }
                let t = if x.is_constructor() {
                    if !t.is_constructor_term(sig) {
                        return None;
                    }
                    let mut lift = BTreeMap::new();
                    for y in t.vars().into_iter().filter(|y| !y.is_constructor()) {
                        let c = fresh.fresh(&y, VarKind::Constructor);
                        lift.insert(y, Term::Var(c));
                    }
                    for (y, c) in &lift {
                        bind(&mut sigma, y.clone(), c.clone());
                    }
                    t.apply(&Substitution(lift))
                } else {
                    t
                };
                bind(&mut sigma, x, t);
            }
            (Term::App(f, a), Term::App(g, b)) => {
                if f != g {
                    return None;
                }
                for pair in a.iter().cloned().zip(b.iter().cloned()).rev() {
                    stack.push(pair);
                }
            }
        }
    }
    Some(Substitution(sigma))
}
