//! Command-line front end: the expression mini-language, configuration
//! files, check suites and report rendering.

pub mod config;
pub mod expr;
pub mod report;
pub mod suites;

use crate::cdr::Patch;
use expr::{evaluate, parse_query, render_value, ExprError};

/// One evaluated line of an expression file.
#[derive(Clone, Debug, PartialEq)]
pub struct OpeLine {
    pub line: usize,
    pub input: String,
    pub output: Result<String, ExprError>,
}

/// Evaluates every non-blank, non-comment (`#`) line of `text` in `patch`.
pub fn run_ope(patch: &Patch, text: &str) -> Vec<OpeLine> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| OpeLine {
            line: i + 1,
            input: l.trim().to_string(),
            output: parse_query(l)
                .and_then(|q| evaluate(patch.ctx(), &q))
                .map(|v| render_value(patch.ctx(), &v)),
        })
        .collect()
}
