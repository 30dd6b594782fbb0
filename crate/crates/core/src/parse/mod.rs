//! Concrete syntax: lexer, parser, conversion to the three term sorts and a
//! pretty-printer whose output parses back to an alpha-equivalent program.
//!
//! Grammar summary (`->` for arrows, `#` line comments):
//!
//! ```text
//! program  ::= item* main
//! item     ::= operation ID : A ~> B [! {e, ...}] | exception ID | signal ID
//!            | let ID = M
//! M        ::= let p = M in M | M ; M | fun (x : X) -> M | funK (x : X) @ C -> K
//!            | using V @ V run M finally F | kernel K @ V finally F
//!            | try M with H | user M with H | match V with arms
//!            | if V then M else M | return V | raise e [: X] | kill s [: X]
//!            | getenv (c. K) | getenv () | setenv (V, K) | setenv V
//!            | op(V, x. M, {e -> M, ...}) | op V | V V | V
//! ```
//!
//! Values and computations share one surface grammar; a computation in a
//! value position is bound by a fresh `let` just outside the enclosing
//! computation, unless strict mode is on. Top-level items start in the
//! first column; an argument in the first column never extends an
//! application.

mod convert;
pub mod lexer;
mod print;
mod surface;

pub use print::{print_kernel, print_program, print_user, print_value};

use std::collections::BTreeSet;

use crate::diag::Diagnostic;
use crate::names::{Fresh, Name};
use crate::syntax::{Program, UserComp};
use crate::types::{EffectTables, OpSig};
use lexer::Tok;
use surface::{Binder, Parser, Pattern};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Reject computations in value positions instead of hoisting them.
    pub strict_values: bool,
    /// First value of the fresh-name counter.
    pub fresh_start: u64,
}

pub fn parse_program(src: &str) -> Result<Program, Diagnostic> {
    parse_program_with(src, ParseOptions::default())
}

pub fn parse_program_with(src: &str, opts: ParseOptions) -> Result<Program, Diagnostic> {
    let mut toks = lexer::lex(src)?;
    let mut i = 0;
    let mut tables = EffectTables::default();
    let mut fresh = Fresh::starting_at(opts.fresh_start);
    let mut top_scope: Vec<(String, Name)> = Vec::new();
    let mut bindings = Vec::new();

    loop {
        let p = Parser::with_position(toks, i, &tables);
        let pos = p.pos();
        match p.peek().clone() {
            Tok::Eof => {
                return Err(Diagnostic::new(pos, "Parse-Syntax", "no main computation"));
            }
            Tok::Kw("exception") | Tok::Kw("signal") => {
                let is_exc = p.is_kw("exception");
                let mut p = p;
                p.eat_kw(if is_exc { "exception" } else { "signal" });
                let n = p.ident()?;
                if p.tables.is_declared(&n) {
                    return Err(Diagnostic::new(pos, "Parse-Duplicate", format!("`{n}` is already declared")));
                }
                (toks, i) = p.into_parts();
                let set = if is_exc { &mut tables.exceptions } else { &mut tables.signals };
                set.insert(Name::from(n.as_str()));
            }
            Tok::Kw("operation") => {
                let mut p = p;
                p.eat_kw("operation");
                let n = p.ident()?;
                if p.tables.is_declared(&n) {
                    return Err(Diagnostic::new(pos, "Parse-Duplicate", format!("`{n}` is already declared")));
                }
                p.expect_sym(":")?;
                let param = p.ground_ty()?;
                p.expect_sym("~>")?;
                let result = p.ground_ty()?;
                let excs = if p.is_sym("!") {
                    p.expect_sym("!")?;
                    p.exc_set()?
                } else {
                    BTreeSet::new()
                };
                (toks, i) = p.into_parts();
                tables.ops.insert(Name::from(n.as_str()), OpSig { param, result, excs });
            }
            Tok::Kw("let") => {
                let mut p = p;
                // Distinguish a top-level binding from a main `let ... in`.
                p.eat_kw("let");
                let name_pos = p.pos();
                let single = match p.peek().clone() {
                    Tok::Ident(s) => Some(s),
                    _ => None,
                };
                let pat = parse_let_head(&mut p)?;
                let bound = p.expr()?;
                if p.is_kw("in") {
                    // main computation starting with a let
                    let (toks2, _) = p.into_parts();
                    let p = Parser::with_position(toks2, i, &tables);
                    return finish_main(p, &tables, &mut fresh, opts, &top_scope, bindings);
                }
                let Some(source) = single else {
                    return Err(Diagnostic::new(name_pos, "Parse-Syntax", "top-level binding needs a plain name"));
                };
                if !matches!(pat, Pattern::Bind(Binder::Named(_))) {
                    return Err(Diagnostic::new(name_pos, "Parse-Syntax", "top-level binding needs a plain name"));
                }
                (toks, i) = p.into_parts();
                let mut conv = convert::Converter::new(&tables, &mut fresh, opts.strict_values);
                for (s, n) in &top_scope {
                    conv.restore(s, n);
                }
                let m = conv.user(&bound)?;
                let n = conv.bind_toplevel(&source);
                top_scope.push((source, n.clone()));
                bindings.push((n, m));
            }
            _ => return finish_main(p, &tables, &mut fresh, opts, &top_scope, bindings),
        }
    }
}

/// Parses `p =` after a `let` keyword, leaving the parser at the bound
/// expression.
fn parse_let_head(p: &mut Parser) -> Result<Pattern, Diagnostic> {
    let pat = p.pattern()?;
    p.expect_sym("=")?;
    Ok(pat)
}

fn finish_main(
    mut p: Parser,
    tables: &EffectTables,
    fresh: &mut Fresh,
    opts: ParseOptions,
    top_scope: &[(String, Name)],
    bindings: Vec<(Name, UserComp)>,
) -> Result<Program, Diagnostic> {
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(Diagnostic::new(p.pos(), "Parse-Syntax", format!("unexpected {} after main computation", p.peek().describe())));
    }
    let mut conv = convert::Converter::new(tables, fresh, opts.strict_values);
    for (s, n) in top_scope {
        conv.restore(s, n);
    }
    let main = conv.user(&e)?;
    Ok(Program { tables: tables.clone(), bindings, main })
}
