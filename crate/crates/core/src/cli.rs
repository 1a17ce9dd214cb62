//! Command-line front end. Every command returns its output and exit code
//! instead of printing, so it can be driven from tests.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::criteria::run_pipeline;
use crate::crs::Crs;
use crate::engine::{Budget, DepthIndex, Engine};
use crate::peaks::{compute_critical_peaks, is_complementary, is_weakly_complementary};
use crate::report;
use crate::syntax::{parse_spec, parse_term, Spec};
use crate::term::Term;

pub const EXIT_INPUT_ERROR: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "crs",
    version,
    about = "Confluence analysis for conditional rewrite systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide confluence: exit 0 confluent, 1 not confluent, 2 unknown, 3 input error.
    Check(CheckArgs),
    /// List critical peaks.
    Peaks(PeaksArgs),
    /// Show everything reachable from a term.
    Reduce(ReduceArgs),
    /// Decide joinability of two terms.
    Join(JoinArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    #[arg(long, env = "CRS_MAX_STEPS")]
    pub max_steps: Option<usize>,
    #[arg(long, env = "CRS_MAX_TERM_SIZE")]
    pub max_term_size: Option<usize>,
    #[arg(long, env = "CRS_MAX_STRATA")]
    pub max_strata: Option<u32>,
    #[arg(long, env = "CRS_MAX_DEPTH")]
    pub max_depth: Option<usize>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let d = Budget::default();
        Budget {
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            max_term_size: self.max_term_size.unwrap_or(d.max_term_size),
            max_strata: self.max_strata.unwrap_or(d.max_strata),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Treat the system as terminating for the advisory survey.
    #[arg(long)]
    pub assume_terminating: bool,
    /// Take confluence of the constructor rules for granted if undecided.
    #[arg(long)]
    pub assume_constructor_confluent: bool,
    /// Count equations between pure constructor terms as defined.
    #[arg(long, value_enum)]
    pub assume_cvar_equations: Option<Switch>,
    /// Seed term for the counterexample search (repeatable).
    #[arg(long = "seed")]
    pub seeds: Vec<String>,
    /// Size bound for instantiations in the survey and search.
    #[arg(long, env = "CRS_INST_SIZE_BOUND")]
    pub inst_size_bound: Option<usize>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct PeaksArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    pub file: PathBuf,
    pub term: String,
    /// Stratum: n, w, w+n or w+w.
    #[arg(long, default_value = "w+w")]
    pub depth: DepthIndex,
    /// Expansion budget; overrides --max-steps.
    #[arg(long)]
    pub fuel: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct JoinArgs {
    pub file: PathBuf,
    pub t0: String,
    pub t1: String,
    #[arg(long, default_value = "w+w")]
    pub depth: DepthIndex,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String, code: i32) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    fn input_error(stderr: String) -> Self {
        Outcome {
            stdout: String::new(),
            stderr,
            code: EXIT_INPUT_ERROR,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { 0 };
            Outcome {
                stdout: if code == 0 {
                    e.to_string()
                } else {
                    String::new()
                },
                stderr: if code == 0 {
                    String::new()
                } else {
                    e.to_string()
                },
                code,
            }
        }
    }
}

pub fn execute(cmd: Command) -> Outcome {
    let result = match cmd {
        Command::Check(a) => cmd_check(&a),
        Command::Peaks(a) => cmd_peaks(&a),
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Join(a) => cmd_join(&a),
    };
    result.unwrap_or_else(Outcome::input_error)
}

fn load(path: &PathBuf) -> Result<Spec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_spec(&text).map_err(|ds| {
        ds.iter()
            .map(|d| format!("{}:{d}\n", path.display()))
            .collect()
    })
}

fn term_arg(crs: &Crs, text: &str) -> Result<Term, String> {
    let t = parse_term(crs, text).map_err(|d| format!("term `{text}`: {d}\n"))?;
    if let Some(v) = t.vars().into_iter().find(|v| !crs.instantiation.admits(v)) {
        return Err(format!(
            "term `{text}`: variable `{}` is not an instantiation variable\n",
            v.name
        ));
    }
    Ok(t)
}

pub fn cmd_check(a: &CheckArgs) -> Result<Outcome, String> {
    let spec = load(&a.file)?;
    let crs = &spec.crs;
    let mut assumptions = spec.assumptions.clone();
    assumptions.terminating |= a.assume_terminating;
    if a.assume_constructor_confluent {
        assumptions.constructor_confluent = Some(true);
    }
    if let Some(s) = a.assume_cvar_equations {
        assumptions.assume_cvar_equations = Some(s == Switch::On);
    }
    if let Some(k) = a.inst_size_bound {
        assumptions.inst_size_bound = k;
    }
    for s in &a.seeds {
        assumptions.seeds.push(term_arg(crs, s)?);
    }
    let analysis = run_pipeline(crs, &assumptions, a.budget.budget());
    let out = match a.format {
        Format::Json => format!("{}\n", report::analysis_json(crs, &analysis)),
        Format::Text => report::analysis_text(crs, &analysis),
    };
    Ok(Outcome::ok(out, analysis.verdict.exit_code()))
}

pub fn cmd_peaks(a: &PeaksArgs) -> Result<Outcome, String> {
    let spec = load(&a.file)?;
    let crs = &spec.crs;
    let sig = &crs.signature;
    let mut engine = Engine::new(crs, a.budget.budget());
    let peaks = compute_critical_peaks(crs);
    let mut text = format!("{} critical peaks\n", peaks.len());
    let mut values = Vec::new();
    for (i, p) in peaks.iter().enumerate() {
        let c = is_complementary(p, &mut engine);
        let w = is_weakly_complementary(p, &mut engine);
        let _ = writeln!(text, "{}", report::peak_text(sig, i, p));
        let _ = writeln!(text, "    complementary: {c}, weakly complementary: {w}");
        let mut v = report::peak_json(sig, i, p);
        v["complementary"] = json!(c);
        v["weakly_complementary"] = json!(w);
        values.push(v);
    }
    let out = match a.format {
        Format::Json => format!("{}\n", json!({ "peaks": values })),
        Format::Text => text,
    };
    Ok(Outcome::ok(out, 0))
}

pub fn cmd_reduce(a: &ReduceArgs) -> Result<Outcome, String> {
    let spec = load(&a.file)?;
    let crs = &spec.crs;
    let sig = &crs.signature;
    let t = term_arg(crs, &a.term)?;
    let mut budget = a.budget.budget();
    if let Some(f) = a.fuel {
        budget.max_steps = f;
    }
    let mut engine = Engine::new(crs, budget);
    let rs = engine.reachable(&t, a.depth);
    let (nfs, nf_complete) = engine.normal_forms(&t, a.depth);
    let show = |t: &Term| t.display(sig).to_string();
    let out = match a.format {
        Format::Json => format!(
            "{}\n",
            json!({
                "term": show(&t),
                "depth": a.depth,
                "complete": rs.complete,
                "members": rs.members.iter().map(show).collect::<Vec<_>>(),
                "normal_forms": nfs.iter().map(show).collect::<Vec<_>>(),
                "normal_forms_complete": nf_complete,
            })
        ),
        Format::Text => {
            let mut s = format!(
                "reach set of {} at {}: {} terms ({})\n",
                show(&t),
                a.depth,
                rs.len(),
                if rs.complete {
                    "complete"
                } else {
                    "incomplete"
                }
            );
            for m in &rs.members {
                let _ = writeln!(s, "  {}", show(m));
            }
            let _ = writeln!(
                s,
                "normal forms: {} ({})",
                nfs.iter().map(show).collect::<Vec<_>>().join(", "),
                if nf_complete {
                    "complete"
                } else {
                    "incomplete"
                }
            );
            s
        }
    };
    Ok(Outcome::ok(out, 0))
}

pub fn cmd_join(a: &JoinArgs) -> Result<Outcome, String> {
    let spec = load(&a.file)?;
    let crs = &spec.crs;
    let sig = &crs.signature;
    let t0 = term_arg(crs, &a.t0)?;
    let t1 = term_arg(crs, &a.t1)?;
    if t0.sort(sig) != t1.sort(sig) {
        return Err("terms have different sorts\n".into());
    }
    let mut engine = Engine::new(crs, a.budget.budget());
    let j = engine.joinable(&t0, &t1, a.depth);
    let meet = j.meet.as_ref().map(|m| m.display(sig).to_string());
    let out = match a.format {
        Format::Json => format!(
            "{}\n",
            json!({ "joinable": j.answer, "meet": meet, "depth": a.depth })
        ),
        Format::Text => match &meet {
            Some(m) => format!("{} (both reach {m})\n", j.answer),
            None => format!("{}\n", j.answer),
        },
    };
    Ok(Outcome::ok(out, 0))
}
