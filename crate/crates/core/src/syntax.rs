//! The line-oriented specification format and its pretty-printer.
//!
//! ```text
//! sorts nat bool;
//! cons 0 : nat;
//! cons s : nat -> nat;
//! func minus : nat nat -> nat;
//! cvar x y : nat;
//! instantiate gvars;
//! rule minus(x,0) = x;
//! rule minus(s(x),s(y)) = minus(x,y) <= def x, x == y;
//! assume terminating;
//! ```

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::criteria::Assumptions;
use crate::crs::{validate_crs, Crs, Instantiation, Literal, RawRule};
use crate::term::{Signature, SortId, Term, Var, VarKind, VariableSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spec {
    pub crs: Crs,
    pub assumptions: Assumptions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Arrow,
    Assign,
    EqEq,
    NotEq,
    Implied,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::NotEq => f.write_str("`!=`"),
            Tok::Implied => f.write_str("`<=`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (li + 1, i + 1);
            let next = chars.get(i + 1).copied();
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
            match c {
                '#' => break,
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                '(' => push(&mut out, Tok::LParen),
                ')' => push(&mut out, Tok::RParen),
                ',' => push(&mut out, Tok::Comma),
                ';' => push(&mut out, Tok::Semi),
                ':' => push(&mut out, Tok::Colon),
                '-' if next == Some('>') => {
                    push(&mut out, Tok::Arrow);
                    i += 1;
                }
                '=' if next == Some('=') => {
                    push(&mut out, Tok::EqEq);
                    i += 1;
                }
                '=' => push(&mut out, Tok::Assign),
                '!' if next == Some('=') => {
                    push(&mut out, Tok::NotEq);
                    i += 1;
                }
                '<' if next == Some('=') => {
                    push(&mut out, Tok::Implied);
                    i += 1;
                }
                c if is_ident_char(c) => {
                    let start = i;
                    while i < chars.len()
                        && (is_ident_char(chars[i])
                            || (chars[i] == '-'
                                && chars.get(i + 1).is_some_and(|n| is_ident_char(*n))))
                    {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    push(&mut out, Tok::Ident(s));
                    continue;
                }
                other => {
                    return Err(Diagnostic {
                        line,
                        col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    sig: Signature,
    vars: VariableSystem,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(Diagnostic {
            line,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self) -> PResult<Tok> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected {want}, found {t}"))
            }
            None => self.err(format!("expected {want}, found end of input")),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected identifier, found {t}"))
            }
            None => self.err("expected identifier, found end of input"),
        }
    }

    fn idents_until(&mut self, stop: &Tok) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        while self.peek().is_some_and(|t| t != stop) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn sort(&mut self, name: &str) -> PResult<SortId> {
        match self.sig.lookup_sort(name) {
            Some(s) => Ok(s),
            None => {
                self.pos -= 1;
                let r = self.err(format!("unknown sort `{name}`"));
                self.pos += 1;
                r
            }
        }
    }

    fn fun_decl(&mut self, constructor: bool) -> PResult<()> {
        let names = self.idents_until(&Tok::Colon)?;
        if names.is_empty() {
            return self.err("expected symbol name");
        }
        self.expect(Tok::Colon)?;
        let mut sorts = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            let s = self.ident()?;
            sorts.push(self.sort(&s)?);
        }
        let (args, result) = if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let s = self.ident()?;
            (sorts, self.sort(&s)?)
        } else if sorts.len() == 1 {
            (Vec::new(), sorts[0])
        } else {
            return self.err("expected `-> sort` in declaration");
        };
        self.expect(Tok::Semi)?;
        for n in names {
            if self.vars.lookup(&n).is_some() {
                return self.err(format!("symbol `{n}` clashes with a variable"));
            }
            if let Err(e) = self.sig.add_fun(&n, args.clone(), result, constructor) {
                return self.err(e.to_string());
            }
        }
        Ok(())
    }

    fn var_decl(&mut self, kind: VarKind) -> PResult<()> {
        let names = self.idents_until(&Tok::Colon)?;
        if names.is_empty() {
            return self.err("expected variable name");
        }
        self.expect(Tok::Colon)?;
        let s = self.ident()?;
        let sort = self.sort(&s)?;
        self.expect(Tok::Semi)?;
        for n in names {
            if let Err(e) = self.vars.declare(&self.sig, Var::new(&n, kind, sort)) {
                return self.err(e.to_string());
            }
        }
        Ok(())
    }

    fn term(&mut self) -> PResult<Term> {
        let (line, col) = self.here();
        let name = self.ident()?;
        let at = |message: String| Diagnostic { line, col, message };
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let f = self
                .sig
                .lookup_fun(&name)
                .ok_or_else(|| at(format!("unknown function symbol `{name}`")))?;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.term()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            return Term::checked_app(&self.sig, f, args).map_err(|e| at(e.to_string()));
        }
        if let Some(v) = self.vars.lookup(&name) {
            return Ok(Term::Var(v.clone()));
        }
        match self.sig.lookup_fun(&name) {
            Some(f) => Term::checked_app(&self.sig, f, Vec::new()).map_err(|e| at(e.to_string())),
            None => Err(at(format!("unknown identifier `{name}`"))),
        }
    }

    fn literal(&mut self) -> PResult<Literal> {
        let keyword = self.sig.lookup_fun("def").is_none() && self.vars.lookup("def").is_none();
        if keyword && self.peek() == Some(&Tok::Ident("def".into())) {
            self.pos += 1;
            return Ok(Literal::Def(self.term()?));
        }
        let u = self.term()?;
        match self.next()? {
            Tok::EqEq => Ok(Literal::Eq(u, self.term()?)),
            Tok::NotEq => Ok(Literal::Neq(u, self.term()?)),
            t => {
                self.pos -= 1;
                self.err(format!("expected `==` or `!=`, found {t}"))
            }
        }
    }
}

/// Parses a specification into a validated system plus its assumptions.
pub fn parse_spec(text: &str) -> Result<Spec, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        sig: Signature::new(),
        vars: VariableSystem::new(),
    };
    let mut rules: Vec<(RawRule, usize, usize)> = Vec::new();
    let mut assumptions = Assumptions::default();
    let mut instantiation = Instantiation::default();
    let mut diags = Vec::new();
    while p.pos < toks.len() {
        let start = p.pos;
        if let Err(d) = statement(&mut p, &mut rules, &mut assumptions, &mut instantiation) {
            diags.push(d);
            // resynchronize after the next `;`
            p.pos = p.pos.max(start + 1);
            while p.pos < toks.len() && toks[p.pos - 1].tok != Tok::Semi {
                p.pos += 1;
            }
        }
    }
    if p.sig.sort_count() == 0 {
        diags.push(Diagnostic {
            line: 1,
            col: 1,
            message: "no sorts declared".into(),
        });
    }
    if let Err(errs) = p.sig.check_inhabited() {
        for e in errs {
            diags.push(Diagnostic {
                line: 1,
                col: 1,
                message: e.to_string(),
            });
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let positions: Vec<(usize, usize)> = rules.iter().map(|(_, l, c)| (*l, *c)).collect();
    let raw = rules.into_iter().map(|(r, _, _)| r).collect();
    match validate_crs(raw, p.sig, p.vars, instantiation) {
        Ok(crs) => Ok(Spec { crs, assumptions }),
        Err(errs) => Err(errs
            .into_iter()
            .map(|e| {
                let n = rule_number(&e);
                let (line, col) = positions.get(n - 1).copied().unwrap_or((1, 1));
                Diagnostic {
                    line,
                    col,
                    message: e.to_string(),
                }
            })
            .collect()),
    }
}

fn rule_number(e: &crate::crs::RuleDiagnostic) -> usize {
    use crate::crs::RuleDiagnostic::*;
    match e {
        SortMismatch { rule, .. }
        | VariableLhs { rule }
        | ExtraVariable { rule, .. }
        | NegativeLiteral { rule }
        | NonConstructorRhs { rule }
        | NonConstructorCondition { rule, .. } => *rule,
    }
}

fn statement(
    p: &mut Parser<'_>,
    rules: &mut Vec<(RawRule, usize, usize)>,
    assumptions: &mut Assumptions,
    instantiation: &mut Instantiation,
) -> PResult<()> {
    let (line, col) = p.here();
    let kw = p.ident()?;
    match kw.as_str() {
        "sorts" | "sort" => {
            let names = p.idents_until(&Tok::Semi)?;
            p.expect(Tok::Semi)?;
            for n in names {
                if let Err(e) = p.sig.add_sort(&n) {
                    return p.err(e.to_string());
                }
            }
            Ok(())
        }
        "cons" => p.fun_decl(true),
        "func" => p.fun_decl(false),
        "cvar" => p.var_decl(VarKind::Constructor),
        "gvar" => p.var_decl(VarKind::General),
        "instantiate" => {
            let w = p.ident()?;
            *instantiation = match w.as_str() {
                "gvars" => Instantiation::GVars,
                "none" => Instantiation::None,
                "all" => Instantiation::All,
                _ => return p.err(format!("expected gvars, none or all, found `{w}`")),
            };
            p.expect(Tok::Semi)
        }
        "assume" => {
            let w = p.ident()?;
            match w.as_str() {
                "terminating" => assumptions.terminating = true,
                "constructor-confluent" => assumptions.constructor_confluent = Some(true),
                _ => return p.err(format!("unknown assumption `{w}`")),
            }
            p.expect(Tok::Semi)
        }
        "rule" => {
            let lhs = p.term()?;
            p.expect(Tok::Assign)?;
            let rhs = p.term()?;
            let mut conditions = Vec::new();
            if p.peek() == Some(&Tok::Implied) {
                p.pos += 1;
                loop {
                    conditions.push(p.literal()?);
                    if p.peek() == Some(&Tok::Comma) {
                        p.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            p.expect(Tok::Semi)?;
            rules.push((
                RawRule {
                    lhs,
                    rhs,
                    conditions,
                },
                line,
                col,
            ));
            Ok(())
        }
        other => Err(Diagnostic {
            line,
            col,
            message: format!("unknown statement `{other}`"),
        }),
    }
}

/// Parses a term over the declarations of `crs`.
pub fn parse_term(crs: &Crs, text: &str) -> Result<Term, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        sig: crs.signature.clone(),
        vars: crs.varsys.clone(),
    };
    let t = p.term()?;
    if p.pos != toks.len() {
        return p.err("trailing input after term");
    }
    Ok(t)
}

/// Renders a specification that parses back to the same system.
pub fn print_spec(spec: &Spec) -> String {
    let crs = &spec.crs;
    let sig = &crs.signature;
    let mut out = String::new();
    let sorts: Vec<&str> = sig.sorts().map(|s| sig.sort_name(s)).collect();
    let _ = writeln!(out, "sorts {};", sorts.join(" "));
    for (_, d) in sig.funs() {
        let kw = if d.constructor { "cons" } else { "func" };
        if d.args.is_empty() {
            let _ = writeln!(out, "{kw} {} : {};", d.name, sig.sort_name(d.result));
        } else {
            let args: Vec<&str> = d.args.iter().map(|s| sig.sort_name(*s)).collect();
            let _ = writeln!(
                out,
                "{kw} {} : {} -> {};",
                d.name,
                args.join(" "),
                sig.sort_name(d.result)
            );
        }
    }
    for v in crs.varsys.iter() {
        let kw = match v.kind {
            VarKind::Constructor => "cvar",
            VarKind::General => "gvar",
        };
        let _ = writeln!(out, "{kw} {} : {};", v.name, sig.sort_name(v.sort));
    }
    let _ = writeln!(out, "instantiate {};", crs.instantiation.keyword());
    for r in &crs.rules {
        let _ = writeln!(out, "rule {};", r.display(sig));
    }
    if spec.assumptions.terminating {
        let _ = writeln!(out, "assume terminating;");
    }
    if spec.assumptions.constructor_confluent == Some(true) {
        let _ = writeln!(out, "assume constructor-confluent;");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "sorts n b;\ncons 0 : n;\ncons s : n -> n;\ncons t : b;\n\
                        func f : n -> b;\ncvar x y : n;\ngvar X : n;\n";

    fn errors(text: &str) -> Vec<Diagnostic> {
        parse_spec(text).expect_err("should be rejected")
    }

    #[test]
    fn empty_input_has_no_sorts() {
        let d = errors("");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "no sorts declared");
        assert_eq!(
            errors("  # only a comment\n")[0].message,
            "no sorts declared"
        );
    }

    #[test]
    fn statements_and_literals() {
        let text = format!(
            "{HEAD}instantiate all;\nassume terminating;\nassume constructor-confluent;\n\
             rule f(s(x)) = t <= x == y, x != 0, def f(x);\n"
        );
        let spec = parse_spec(&text).unwrap();
        assert_eq!(spec.crs.instantiation, Instantiation::All);
        assert!(spec.assumptions.terminating);
        assert_eq!(spec.assumptions.constructor_confluent, Some(true));
        let conds = &spec.crs.rules[0].conditions;
        assert!(matches!(conds[0], Literal::Eq(..)));
        assert!(matches!(conds[1], Literal::Neq(..)));
        assert!(matches!(conds[2], Literal::Def(..)));
    }

    #[test]
    fn diagnostics_point_at_the_problem() {
        let d = errors(&format!("{HEAD}rule f(q) = t;\n"));
        assert_eq!((d[0].line, d[0].col), (8, 8));
        assert!(d[0].message.contains('q'), "{}", d[0].message);

        let d = errors(&format!("{HEAD}rule f(0, 0) = t;\n"));
        assert_eq!(d[0].line, 8);

        let d = errors(&format!("{HEAD}rule s(x) = 0 <= x != y;\n"));
        assert_eq!(d[0].line, 8);
        assert!(d[0].message.contains("negative literal"));

        let d = errors(&format!("{HEAD}rule f(0) = 0;\n"));
        assert_eq!(d[0].line, 8);
    }

    #[test]
    fn recovers_after_errors() {
        let d = errors(&format!("{HEAD}rule f(q) = t;\nrule f(r) = t;\n"));
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].line, d[1].line), (8, 9));
    }

    #[test]
    fn clashing_declarations_are_rejected() {
        assert!(!errors("sorts n;\ncons 0 : n;\ncons 0 : n;\n").is_empty());
        assert!(!errors("sorts n;\ncons 0 : n;\ncvar x : n;\ngvar x : n;\n").is_empty());
        assert!(!errors("sorts n;\ncons 0 : m;\n").is_empty());
        assert!(!errors("sorts n;\nfunc f : n -> n;\n").is_empty());
    }

    #[test]
    fn terms_and_printing() {
        let spec = parse_spec(&format!("{HEAD}rule f(s(x)) = t <= def f(x);\n")).unwrap();
        let t = parse_term(&spec.crs, "f(s(s(0)))").unwrap();
        assert_eq!(t.display(&spec.crs.signature).to_string(), "f(s(s(0)))");
        assert!(parse_term(&spec.crs, "f(s(0)) extra").is_err());
        assert!(parse_term(&spec.crs, "s(t)").is_err());
        let printed = print_spec(&spec);
        assert_eq!(parse_spec(&printed).unwrap(), spec);
    }
}
