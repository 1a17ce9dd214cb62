#![allow(dead_code)]

use std::collections::BTreeSet;

use crs_core::corpus::load_case;
use crs_core::crs::Crs;
use crs_core::syntax::{parse_term, Spec};
use crs_core::term::{FunId, Position, Signature, SortId, Term, Var, VarKind};

pub fn spec(id: &str) -> Spec {
    load_case(id)
        .expect("corpus case")
        .spec()
        .unwrap_or_else(|d| panic!("{id}: {d:?}"))
}

pub fn term(crs: &Crs, text: &str) -> Term {
    parse_term(crs, text).unwrap_or_else(|d| panic!("{text}: {d}"))
}

pub fn show(crs: &Crs, t: &Term) -> String {
    t.display(&crs.signature).to_string()
}

/// Decodes a choice stream into a term of `sort`. Variables from `vars` are
/// offered at every node; `budget` caps the number of symbols.
pub fn decode_term(
    sig: &Signature,
    sort: SortId,
    vars: &[Var],
    choices: &[u32],
    budget: usize,
) -> Term {
    decode_with(sig, sort, vars, choices, budget, false)
}

pub fn decode_with(
    sig: &Signature,
    sort: SortId,
    vars: &[Var],
    choices: &[u32],
    budget: usize,
    cons_only: bool,
) -> Term {
    let mut d = Decoder {
        sig,
        vars,
        choices,
        cursor: 0,
        left: budget.max(1),
        cons_only,
    };
    d.term(sort)
}

struct Decoder<'a> {
    sig: &'a Signature,
    vars: &'a [Var],
    choices: &'a [u32],
    cursor: usize,
    left: usize,
    cons_only: bool,
}

impl Decoder<'_> {
    fn next(&mut self) -> usize {
        let c = self.choices.get(self.cursor).copied().unwrap_or(0);
        self.cursor += 1;
        c as usize
    }

    fn term(&mut self, sort: SortId) -> Term {
        let sig = self.sig;
        let sort_vars: Vec<&Var> = self.vars.iter().filter(|v| v.sort == sort).collect();
        let funs: Vec<(FunId, usize)> = sig
            .funs()
            .filter(|(f, d)| d.result == sort && (!self.cons_only || sig.is_constructor(*f)))
            .map(|(f, d)| (f, d.args.len()))
            .collect();
        let constants: Vec<(FunId, usize)> =
            funs.iter().copied().filter(|(_, a)| *a == 0).collect();
        self.left = self.left.saturating_sub(1);
        let c = self.next();
        let pool = if self.left == 0 && !constants.is_empty() {
            &constants
        } else {
            &funs
        };
        let k = c % (sort_vars.len() + pool.len());
        if k < sort_vars.len() {
            return Term::var(sort_vars[k].clone());
        }
        let (f, arity) = pool[k - sort_vars.len()];
        let args = (0..arity).map(|i| self.term(sig.fun(f).args[i])).collect();
        Term::app(f, args)
    }
}

pub fn sorts_of(sig: &Signature) -> Vec<SortId> {
    sig.sorts().collect()
}

pub fn var(name: &str, kind: VarKind, sort: SortId) -> Var {
    Var::new(name, kind, sort)
}

pub fn positions_below(t: &Term, p: &Position) -> BTreeSet<Position> {
    t.positions()
        .into_iter()
        .filter(|q| p.is_prefix_of(q))
        .collect()
}
