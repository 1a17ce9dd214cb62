//! Bundled example systems with their expected analysis results.

use thiserror::Error;

use crate::syntax::{parse_spec, Diagnostic, Spec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeakExpectation {
    pub form: (u8, u8),
    pub overlay: bool,
    pub complementary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expected {
    pub peak_count: usize,
    /// Per-peak expectations, in the order peaks are computed.
    pub peaks: Vec<PeakExpectation>,
    /// `"confluent"`, `"not-confluent"` or `"unknown"`; `None` when the case
    /// only pins down peak structure.
    pub verdict: Option<&'static str>,
    /// Witness endpoints, in either order.
    pub witness: Option<(&'static str, &'static str)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusCase {
    pub id: &'static str,
    pub text: &'static str,
    pub expected: Expected,
}

impl CorpusCase {
    pub fn spec(&self) -> Result<Spec, Vec<Diagnostic>> {
        parse_spec(self.text)
    }
}

#[derive(Debug, Error)]
#[error("unknown corpus case `{0}`")]
pub struct UnknownCase(pub String);

const fn pk(form: (u8, u8), overlay: bool, complementary: bool) -> PeakExpectation {
    PeakExpectation {
        form,
        overlay,
        complementary,
    }
}

pub const IDS: &[&str] = &[
    "member",
    "cp",
    "while",
    "integer",
    "not-left-linear",
    "bergstra-klop",
    "gramlich",
    "toll",
    "cpw-not-normal",
    "asso",
    "levy-a",
    "levy-a-redeclared",
    "quasi-over",
];

pub fn load_case(id: &str) -> Result<CorpusCase, UnknownCase> {
    let member = include_str!("../corpus/member.crs");
    let (id, text, expected) = match id {
        "member" => (
            "member",
            member,
            Expected {
                peak_count: 2,
                peaks: vec![pk((1, 1), true, true); 2],
                verdict: Some("confluent"),
                witness: None,
            },
        ),
        "cp" => (
            "cp",
            member,
            Expected {
                peak_count: 2,
                peaks: vec![pk((1, 1), true, true); 2],
                verdict: None,
                witness: None,
            },
        ),
        "while" => (
            "while",
            include_str!("../corpus/while.crs"),
            Expected {
                peak_count: 4,
                peaks: vec![pk((1, 1), true, true); 4],
                verdict: Some("confluent"),
                witness: None,
            },
        ),
        "integer" => (
            "integer",
            include_str!("../corpus/integer.crs"),
            Expected {
                peak_count: 2,
                peaks: vec![pk((0, 1), false, false); 2],
                verdict: Some("unknown"),
                witness: None,
            },
        ),
        "not-left-linear" => (
            "not-left-linear",
            include_str!("../corpus/not-left-linear.crs"),
            Expected {
                peak_count: 0,
                peaks: vec![],
                verdict: Some("not-confluent"),
                witness: Some(("c", "d")),
            },
        ),
        "bergstra-klop" => (
            "bergstra-klop",
            include_str!("../corpus/bergstra-klop.crs"),
            Expected {
                peak_count: 0,
                peaks: vec![],
                verdict: Some("not-confluent"),
                witness: Some(("d", "g(d)")),
            },
        ),
        "gramlich" => (
            "gramlich",
            include_str!("../corpus/gramlich.crs"),
            Expected {
                peak_count: 1,
                peaks: vec![pk((0, 1), false, false)],
                verdict: Some("not-confluent"),
                witness: Some(("f(c)", "g(c)")),
            },
        ),
        "toll" => (
            "toll",
            include_str!("../corpus/toll.crs"),
            Expected {
                peak_count: 2,
                peaks: vec![pk((1, 1), false, false); 2],
                verdict: Some("not-confluent"),
                witness: Some(("d", "plus(c,c)")),
            },
        ),
        "cpw-not-normal" => (
            "cpw-not-normal",
            include_str!("../corpus/cpw-not-normal.crs"),
            Expected {
                peak_count: 3,
                peaks: vec![
                    pk((1, 1), false, false),
                    pk((1, 1), true, false),
                    pk((1, 1), true, false),
                ],
                verdict: Some("not-confluent"),
                witness: Some(("e", "h(c)")),
            },
        ),
        "asso" => (
            "asso",
            include_str!("../corpus/asso.crs"),
            Expected {
                peak_count: 1,
                peaks: vec![pk((1, 1), false, false)],
                verdict: Some("unknown"),
                witness: None,
            },
        ),
        "levy-a" => (
            "levy-a",
            include_str!("../corpus/levy-a.crs"),
            Expected {
                peak_count: 4,
                peaks: vec![pk((0, 1), false, false); 4],
                verdict: Some("not-confluent"),
                witness: Some(("plus(c,c)", "minus(d,d)")),
            },
        ),
        "levy-a-redeclared" => (
            "levy-a-redeclared",
            include_str!("../corpus/levy-a-redeclared.crs"),
            Expected {
                peak_count: 4,
                peaks: vec![pk((1, 1), false, false); 4],
                verdict: Some("not-confluent"),
                witness: Some(("plus(c,c)", "minus(d,d)")),
            },
        ),
        "quasi-over" => (
            "quasi-over",
            include_str!("../corpus/quasi-over.crs"),
            Expected {
                peak_count: 5,
                peaks: vec![
                    pk((0, 1), false, false),
                    pk((0, 1), false, false),
                    pk((0, 1), false, false),
                    pk((1, 1), true, false),
                    pk((1, 1), true, false),
                ],
                verdict: None,
                witness: None,
            },
        ),
        other => return Err(UnknownCase(other.to_string())),
    };
    Ok(CorpusCase { id, text, expected })
}

pub fn all_cases() -> Vec<CorpusCase> {
    IDS.iter()
        .map(|id| load_case(id).expect("listed case"))
        .collect()
}
