//! Conditional rule systems: rules with positive, negative and definedness
//! literals, validation of the constructor-rule restrictions, and the
//! syntactic predicates used as hypotheses by the confluence criteria.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{DepthIndex, Engine, TriBool};
use crate::term::{renaming_apart, Signature, Substitution, Term, Var, VarKind, VariableSystem};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Eq(Term, Term),
    Neq(Term, Term),
    Def(Term),
}

impl Literal {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Literal::Eq(u, v) | Literal::Neq(u, v) => vec![u, v],
            Literal::Def(u) => vec![u],
        }
    }

    pub fn apply(&self, sigma: &Substitution) -> Literal {
        match self {
            Literal::Eq(u, v) => Literal::Eq(u.apply(sigma), v.apply(sigma)),
            Literal::Neq(u, v) => Literal::Neq(u.apply(sigma), v.apply(sigma)),
            Literal::Def(u) => Literal::Def(u.apply(sigma)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.terms() {
            t.collect_vars(&mut out);
        }
        out
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> LiteralDisplay<'a> {
        LiteralDisplay { lit: self, sig }
    }
}

pub struct LiteralDisplay<'a> {
    lit: &'a Literal,
    sig: &'a Signature,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.sig;
        match self.lit {
            Literal::Eq(u, v) => write!(f, "{} == {}", u.display(s), v.display(s)),
            Literal::Neq(u, v) => write!(f, "{} != {}", u.display(s), v.display(s)),
            Literal::Def(u) => write!(f, "def {}", u.display(s)),
        }
    }
}

pub fn display_conditions(sig: &Signature, conds: &[Literal]) -> String {
    conds
        .iter()
        .map(|l| l.display(sig).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// 0 for constructor rules (lhs is a constructor term), 1 otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Lambda {
    Constructor = 0,
    NonConstructor = 1,
}

impl Lambda {
    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

/// Index into the rule list; displayed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub usize);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0 + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
    pub conditions: Vec<Literal>,
    pub lambda: Lambda,
}

impl Rule {
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.vars();
        self.rhs.collect_vars(&mut out);
        for l in &self.conditions {
            out.extend(l.vars());
        }
        out
    }

    pub fn condition_vars(&self) -> BTreeSet<Var> {
        self.conditions.iter().flat_map(Literal::vars).collect()
    }

    /// Variables of the rhs or the conditions that do not occur in the lhs.
    pub fn extra_vars(&self) -> BTreeSet<Var> {
        let lhs = self.lhs.vars();
        let mut rest = self.rhs.vars();
        rest.extend(self.condition_vars());
        rest.difference(&lhs).cloned().collect()
    }

    pub fn is_constructor_rule(&self) -> bool {
        self.lambda == Lambda::Constructor
    }

    pub fn apply(&self, sigma: &Substitution) -> Rule {
        Rule {
            lhs: self.lhs.apply(sigma),
            rhs: self.rhs.apply(sigma),
            conditions: self.conditions.iter().map(|l| l.apply(sigma)).collect(),
            lambda: self.lambda,
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> RuleDisplay<'a> {
        RuleDisplay { rule: self, sig }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    sig: &'a Signature,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {}",
            self.rule.lhs.display(self.sig),
            self.rule.rhs.display(self.sig)
        )?;
        if !self.rule.conditions.is_empty() {
            write!(
                f,
                " <= {}",
                display_conditions(self.sig, &self.rule.conditions)
            )?;
        }
        Ok(())
    }
}

/// Renames the variables of `rule` apart from `avoid`, preserving sorts and kinds.
pub fn rename_apart(rule: &Rule, avoid: &BTreeSet<Var>) -> (Rule, Substitution) {
    let xi = renaming_apart(&rule.vars(), avoid);
    (rule.apply(&xi), xi)
}

/// Which variables may occur in terms being reduced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Instantiation {
    None,
    #[default]
    GVars,
    All,
}

impl Instantiation {
    pub fn admits(self, v: &Var) -> bool {
        match self {
            Instantiation::None => false,
            Instantiation::GVars => v.kind == VarKind::General,
            Instantiation::All => true,
        }
    }

    pub fn admits_cvars(self) -> bool {
        self == Instantiation::All
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Instantiation::None => "none",
            Instantiation::GVars => "gvars",
            Instantiation::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crs {
    pub signature: Signature,
    pub varsys: VariableSystem,
    pub rules: Vec<Rule>,
    pub instantiation: Instantiation,
}

/// A rule as written, before its lambda is computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRule {
    pub lhs: Term,
    pub rhs: Term,
    pub conditions: Vec<Literal>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleDiagnostic {
    #[error("rule {rule}: {detail}")]
    SortMismatch { rule: usize, detail: String },
    #[error("rule {rule}: left-hand side is a variable")]
    VariableLhs { rule: usize },
    #[error(
        "rule {rule}: constructor rule has variable `{var}` not occurring in its left-hand side"
    )]
    ExtraVariable { rule: usize, var: String },
    #[error("rule {rule}: constructor rule has a negative literal")]
    NegativeLiteral { rule: usize },
    #[error("rule {rule}: constructor rule has non-constructor right-hand side")]
    NonConstructorRhs { rule: usize },
    #[error("rule {rule}: constructor rule has non-constructor condition term `{term}`")]
    NonConstructorCondition { rule: usize, term: String },
}

/// Checks every rule and assigns lambdas; rules are numbered from 1 in diagnostics.
pub fn validate_crs(
    raw: Vec<RawRule>,
    signature: Signature,
    varsys: VariableSystem,
    instantiation: Instantiation,
) -> Result<Crs, Vec<RuleDiagnostic>> {
    let mut diags = Vec::new();
    let mut rules = Vec::new();
    for (i, r) in raw.into_iter().enumerate() {
        let n = i + 1;
        let before = diags.len();
        let sort_err = |detail: String| RuleDiagnostic::SortMismatch { rule: n, detail };
        let ls = r.lhs.check_sorts(&signature);
        let rs = r.rhs.check_sorts(&signature);
        match (&ls, &rs) {
            (Ok(a), Ok(b)) if a != b => diags.push(sort_err(format!(
                "sides have sorts {} and {}",
                signature.sort_name(*a),
                signature.sort_name(*b)
            ))),
            (Err(e), _) | (_, Err(e)) => diags.push(sort_err(e.to_string())),
            _ => {}
        }
        for lit in &r.conditions {
            let sorts: Vec<_> = lit
                .terms()
                .iter()
                .map(|t| t.check_sorts(&signature))
                .collect();
            for s in &sorts {
                if let Err(e) = s {
                    diags.push(sort_err(e.to_string()));
                }
            }
            if let [Ok(a), Ok(b)] = sorts.as_slice() {
                if a != b {
                    diags.push(sort_err(format!(
                        "condition `{}` compares sorts {} and {}",
                        lit.display(&signature),
                        signature.sort_name(*a),
                        signature.sort_name(*b)
                    )));
                }
            }
        }
        if r.lhs.is_var() {
            diags.push(RuleDiagnostic::VariableLhs { rule: n });
        }
        let lambda = if r.lhs.is_constructor_term(&signature) {
            Lambda::Constructor
        } else {
            Lambda::NonConstructor
        };
        let rule = Rule {
            lhs: r.lhs,
            rhs: r.rhs,
            conditions: r.conditions,
            lambda,
        };
        if lambda == Lambda::Constructor && !rule.lhs.is_var() {
            if !rule.rhs.is_constructor_term(&signature) {
                diags.push(RuleDiagnostic::NonConstructorRhs { rule: n });
            }
            for lit in &rule.conditions {
                if matches!(lit, Literal::Neq(..)) {
                    diags.push(RuleDiagnostic::NegativeLiteral { rule: n });
                }
                for t in lit.terms() {
                    if !t.is_constructor_term(&signature) {
                        diags.push(RuleDiagnostic::NonConstructorCondition {
                            rule: n,
                            term: t.display(&signature).to_string(),
                        });
                    }
                }
            }
            for v in rule.extra_vars() {
                diags.push(RuleDiagnostic::ExtraVariable {
                    rule: n,
                    var: v.name.to_string(),
                });
            }
        }
        if diags.len() == before {
            rules.push(rule);
        }
    }
    if diags.is_empty() {
        Ok(Crs {
            signature,
            varsys,
            rules,
            instantiation,
        })
    } else {
        Err(diags)
    }
}

impl Crs {
    pub fn rule(&self, id: crate::crs::RuleId) -> &Rule {
        &self.rules[id.0]
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = RuleId> {
        (0..self.rules.len()).map(RuleId)
    }

    /// Per-rule left-linearity.
    pub fn left_linearity(&self) -> Vec<bool> {
        self.rules.iter().map(|r| r.lhs.is_linear()).collect()
    }

    pub fn is_left_linear(&self) -> bool {
        self.rules.iter().all(|r| r.lhs.is_linear())
    }

    /// Every constructor rule's condition mentions only constructor variables.
    pub fn has_conservative_constructors(&self) -> bool {
        self.rules
            .iter()
            .filter(|r| r.is_constructor_rule())
            .all(|r| r.condition_vars().iter().all(Var::is_constructor))
    }

    /// Every condition of every rule mentions only constructor variables.
    pub fn conditions_use_only_cvars(&self) -> bool {
        self.rules
            .iter()
            .all(|r| r.condition_vars().iter().all(Var::is_constructor))
    }

    pub fn constructor_subsystem(&self) -> Crs {
        Crs {
            signature: self.signature.clone(),
            varsys: self.varsys.clone(),
            rules: self
                .rules
                .iter()
                .filter(|r| r.is_constructor_rule())
                .cloned()
                .collect(),
            instantiation: self.instantiation,
        }
    }

    /// Whether the implicit definedness of pure constructor equations applies
    /// by default: no constructor variable may occur in reduced terms.
    pub fn default_assume_cvar_equations(&self) -> bool {
        !self.instantiation.admits_cvars()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleNormality {
    Normal,
    QuasiNormalSyntactic,
    Unknown,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalityReport {
    pub rules: Vec<RuleNormality>,
    pub normal: TriBool,
    pub quasi_normal: TriBool,
}

fn ground_irreducible(engine: &mut Engine, t: &Term) -> TriBool {
    if !t.is_ground() {
        return TriBool::No;
    }
    engine.is_irreducible(t, DepthIndex::OmegaOmega)
}

/// Classifies every rule by the normality clauses its equations satisfy.
pub fn normality_report(engine: &mut Engine) -> NormalityReport {
    let crs = engine.crs().clone();
    let mut statuses = Vec::new();
    for r in &crs.rules {
        let mut normal = TriBool::Yes;
        let mut quasi = TriBool::Yes;
        for lit in &r.conditions {
            let Literal::Eq(u, v) = lit else { continue };
            let a = ground_irreducible(engine, u).or(ground_irreducible(engine, v));
            normal = normal.and(a);
            let syntactic = {
                let cvars_only = |t: &Term| t.vars().iter().all(Var::is_constructor);
                let has_def = |t: &Term| {
                    r.conditions
                        .iter()
                        .any(|l| matches!(l, Literal::Def(w) if w == t))
                };
                (cvars_only(u) && cvars_only(v))
                    || (u.is_ground() && v.is_ground())
                    || has_def(u)
                    || has_def(v)
            };
            quasi = quasi.and(if syntactic { TriBool::Yes } else { a });
        }
        statuses.push(match (normal, quasi) {
            (TriBool::Yes, _) => RuleNormality::Normal,
            (_, TriBool::Yes) => RuleNormality::QuasiNormalSyntactic,
            (TriBool::No, TriBool::No) => RuleNormality::Fails,
            _ => RuleNormality::Unknown,
        });
    }
    let fold = |pred: &dyn Fn(RuleNormality) -> TriBool| {
        statuses
            .iter()
            .fold(TriBool::Yes, |acc, s| acc.and(pred(*s)))
    };
    let normal = fold(&|s| match s {
        RuleNormality::Normal => TriBool::Yes,
        RuleNormality::Unknown => TriBool::Unknown,
        _ => TriBool::No,
    });
    let quasi_normal = fold(&|s| match s {
        RuleNormality::Normal | RuleNormality::QuasiNormalSyntactic => TriBool::Yes,
        RuleNormality::Unknown => TriBool::Unknown,
        RuleNormality::Fails => TriBool::No,
    });
    NormalityReport {
        rules: statuses,
        normal,
        quasi_normal,
    }
}
