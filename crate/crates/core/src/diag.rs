//! Diagnostics shared by the parser and the typechecker.

use std::fmt;

use crate::syntax::Pos;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    /// Typing rule label such as `TyUser-Run`, or a parser label such as
    /// `Parse-Syntax`.
    pub rule: String,
    pub message: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl Diagnostic {
    pub fn new(pos: Pos, rule: &str, message: impl Into<String>) -> Self {
        Diagnostic { pos, rule: rule.to_string(), message: message.into(), expected: None, actual: None }
    }

    pub fn with_types(mut self, expected: impl fmt::Display, actual: impl fmt::Display) -> Self {
        self.expected = Some(expected.to_string());
        self.actual = Some(actual.to_string());
        self
    }

    /// `file:line:col: error[Rule]: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: error[{}]: {}", self.pos, self.rule, self.message)?;
        if let (Some(e), Some(a)) = (&self.expected, &self.actual) {
            write!(f, " (expected {e}, found {a})")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}
