//! Mode-agnostic surface syntax and its recursive-descent parser. Whether
//! an expression is a value, a user computation or a kernel computation is
//! decided later, during conversion.

use std::collections::BTreeSet;

use super::lexer::{Tok, Token};
use crate::diag::Diagnostic;
use crate::names::Name;
use crate::syntax::{Pos, Prim};
use crate::types::{BaseType, EffSet, EffectTables, GroundType, KernelType, RunnerType, UserType, ValueType};

#[derive(Clone, Debug)]
pub enum Binder {
    Named(String),
    Wild,
}

#[derive(Clone, Debug)]
pub enum Pattern {
    Bind(Binder),
    Pair(Box<Pattern>, Box<Pattern>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub pos: Pos,
    pub kind: ExprKind,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Ident(String),
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
    Tuple(Box<Expr>, Box<Expr>),
    Inj { left: bool, ann: (ValueType, ValueType), arg: Box<Expr> },
    Fun(Binder, ValueType, Box<Expr>),
    FunK(Binder, ValueType, GroundType, Box<Expr>),
    Runner(Vec<RunnerClause>, GroundType),
    Binop(Prim, Box<Expr>, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Return(Box<Expr>),
    Raise(String, Option<ValueType>),
    Kill(String, Option<ValueType>),
    Let(Pattern, Box<Expr>, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    Try(Box<Expr>, SurfaceHandler),
    User(Box<Expr>, SurfaceHandler),
    Match(Box<Expr>, Arms),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    OpCall { op: String, arg: Box<Expr>, var: Binder, body: Box<Expr>, handlers: Vec<(String, Pos, Expr)> },
    Getenv(Option<(Binder, Box<Expr>)>),
    Setenv(Box<Expr>, Option<Box<Expr>>),
    Using { runner: Box<Expr>, state: Box<Expr>, body: Box<Expr>, fin: SurfaceFinally },
    Kernel { body: Box<Expr>, state: Box<Expr>, fin: SurfaceFinally },
}

#[derive(Clone, Debug)]
pub struct RunnerClause {
    pub pos: Pos,
    pub op: String,
    pub param: Binder,
    pub body: Expr,
}

#[derive(Clone, Debug)]
pub struct SurfaceHandler {
    pub ret: Option<(Pattern, Box<Expr>)>,
    pub raises: Vec<(String, Pos, Expr)>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct SurfaceFinally {
    pub pos: Pos,
    pub ret: Option<(Pattern, Binder, Box<Expr>)>,
    pub raises: Vec<(String, Pos, Binder, Expr)>,
    pub kills: Vec<(String, Pos, Expr)>,
}

#[derive(Clone, Debug)]
pub enum Arms {
    Pair(Binder, Binder, Box<Expr>),
    Sum(Binder, Box<Expr>, Binder, Box<Expr>),
    Empty(ValueType),
}

pub struct Parser<'t> {
    toks: Vec<Token>,
    i: usize,
    pub tables: &'t EffectTables,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'t> Parser<'t> {
    pub fn with_position(toks: Vec<Token>, i: usize, tables: &'t EffectTables) -> Self {
        Parser { toks, i, tables }
    }

    pub fn into_parts(self) -> (Vec<Token>, usize) {
        (self.toks, self.i)
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(self.pos(), "Parse-Syntax", msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    pub fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    pub fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn binder(&mut self) -> PResult<Binder> {
        if self.eat_sym("_") {
            return Ok(Binder::Wild);
        }
        if self.is_sym("(") && matches!(self.peek_at(1), Tok::Sym(")")) {
            self.advance();
            self.advance();
            return Ok(Binder::Wild);
        }
        Ok(Binder::Named(self.ident()?))
    }

    pub fn pattern(&mut self) -> PResult<Pattern> {
        if self.is_sym("(") && !matches!(self.peek_at(1), Tok::Sym(")")) {
            self.advance();
            let a = self.pattern()?;
            if self.eat_sym(")") {
                return Ok(a);
            }
            self.expect_sym(",")?;
            let b = self.pattern()?;
            self.expect_sym(")")?;
            return Ok(Pattern::Pair(Box::new(a), Box::new(b)));
        }
        Ok(Pattern::Bind(self.binder()?))
    }

    // -- types --------------------------------------------------------------

    fn name_set(&mut self, kind: &str) -> PResult<EffSet> {
        self.expect_sym("{")?;
        let mut out = BTreeSet::new();
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            let pos = self.pos();
            let n = self.ident()?;
            let known = match kind {
                "operation" => self.tables.ops.contains_key(n.as_str()),
                "exception" => self.tables.exceptions.contains(n.as_str()),
                _ => self.tables.signals.contains(n.as_str()),
            };
            if !known {
                return Err(Diagnostic::new(pos, "Parse-Undeclared", format!("undeclared {kind} `{n}`")));
            }
            out.insert(Name::from(n.as_str()));
            if self.eat_sym("}") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    pub fn exc_set(&mut self) -> PResult<EffSet> {
        self.name_set("exception")
    }

    /// Full value type, including function types.
    pub fn ty(&mut self) -> PResult<ValueType> {
        let arg = self.sum_ty()?;
        if !self.eat_sym("->") {
            return Ok(arg);
        }
        let res = self.sum_ty()?;
        if self.eat_sym("!!") {
            self.expect_sym("(")?;
            let ops = self.name_set("operation")?;
            self.expect_sym(",")?;
            let excs = self.name_set("exception")?;
            self.expect_sym(",")?;
            let sigs = self.name_set("signal")?;
            self.expect_sym(",")?;
            let state = self.ground_ty()?;
            self.expect_sym(")")?;
            Ok(ValueType::kernel_fun(arg, KernelType { carrier: res, ops, excs, sigs, state }))
        } else if self.eat_sym("!") {
            self.expect_sym("(")?;
            let ops = self.name_set("operation")?;
            self.expect_sym(",")?;
            let excs = self.name_set("exception")?;
            self.expect_sym(")")?;
            Ok(ValueType::user_fun(arg, UserType { carrier: res, ops, excs }))
        } else {
            self.unexpected("`!` or `!!` after a function result type")
        }
    }

    pub fn ground_ty(&mut self) -> PResult<GroundType> {
        let pos = self.pos();
        let t = self.sum_ty()?;
        t.as_ground().ok_or_else(|| Diagnostic::new(pos, "Parse-Syntax", format!("expected a ground type, found {t}")))
    }

    fn sum_ty(&mut self) -> PResult<ValueType> {
        let a = self.prod_ty()?;
        if self.eat_sym("+") {
            let b = self.sum_ty()?;
            return Ok(ValueType::sum(a, b));
        }
        Ok(a)
    }

    fn prod_ty(&mut self) -> PResult<ValueType> {
        let a = self.atom_ty()?;
        if self.eat_sym("*") {
            let b = self.prod_ty()?;
            return Ok(ValueType::prod(a, b));
        }
        Ok(a)
    }

    fn atom_ty(&mut self) -> PResult<ValueType> {
        let t = match self.peek().clone() {
            Tok::Kw("int") => ValueType::Base(BaseType::Int),
            Tok::Kw("bool") => ValueType::Base(BaseType::Bool),
            Tok::Kw("str") => ValueType::Base(BaseType::Str),
            Tok::Kw("unit") => ValueType::Unit,
            Tok::Kw("empty") => ValueType::Empty,
            Tok::Kw("runner") => {
                self.advance();
                let handled = self.name_set("operation")?;
                self.expect_sym("=>")?;
                self.expect_sym("(")?;
                let external = self.name_set("operation")?;
                self.expect_sym(",")?;
                let signals = self.name_set("signal")?;
                self.expect_sym(",")?;
                let state = self.ground_ty()?;
                self.expect_sym(")")?;
                return Ok(ValueType::Runner(RunnerType { handled, external, signals, state }));
            }
            Tok::Sym("(") => {
                self.advance();
                let t = self.ty()?;
                self.expect_sym(")")?;
                return Ok(t);
            }
            _ => return self.unexpected("a type"),
        };
        self.advance();
        Ok(t)
    }

    // -- expressions --------------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Kw("let") => {
                self.advance();
                let pat = self.pattern()?;
                self.expect_sym("=")?;
                let bound = self.expr()?;
                self.expect_kw("in")?;
                let body = self.expr()?;
                ExprKind::Let(pat, Box::new(bound), Box::new(body))
            }
            Tok::Kw("fun") => {
                self.advance();
                self.expect_sym("(")?;
                let x = self.binder()?;
                self.expect_sym(":")?;
                let t = self.ty()?;
                self.expect_sym(")")?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                ExprKind::Fun(x, t, Box::new(body))
            }
            Tok::Kw("funK") => {
                self.advance();
                self.expect_sym("(")?;
                let x = self.binder()?;
                self.expect_sym(":")?;
                let t = self.ty()?;
                self.expect_sym(")")?;
                self.expect_sym("@")?;
                let c = self.ground_ty()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                ExprKind::FunK(x, t, c, Box::new(body))
            }
            Tok::Kw("if") => {
                self.advance();
                let c = self.expr()?;
                self.expect_kw("then")?;
                let t = self.expr()?;
                self.expect_kw("else")?;
                let e = self.expr()?;
                ExprKind::If(Box::new(c), Box::new(t), Box::new(e))
            }
            Tok::Kw("using") => {
                self.advance();
                let runner = self.cmp()?;
                self.expect_sym("@")?;
                let state = self.cmp()?;
                self.expect_kw("run")?;
                let body = self.expr()?;
                self.expect_kw("finally")?;
                let fin = self.finally()?;
                ExprKind::Using { runner: Box::new(runner), state: Box::new(state), body: Box::new(body), fin }
            }
            Tok::Kw("kernel") => {
                self.advance();
                let body = self.expr()?;
                self.expect_sym("@")?;
                let state = self.cmp()?;
                self.expect_kw("finally")?;
                let fin = self.finally()?;
                ExprKind::Kernel { body: Box::new(body), state: Box::new(state), fin }
            }
            Tok::Kw("try") => {
                self.advance();
                let body = self.expr()?;
                self.expect_kw("with")?;
                let h = self.handler()?;
                ExprKind::Try(Box::new(body), h)
            }
            Tok::Kw("user") => {
                self.advance();
                let body = self.expr()?;
                self.expect_kw("with")?;
                let h = self.handler()?;
                ExprKind::User(Box::new(body), h)
            }
            Tok::Kw("match") => {
                self.advance();
                let scrut = self.cmp()?;
                self.expect_kw("with")?;
                let arms = self.arms()?;
                ExprKind::Match(Box::new(scrut), arms)
            }
            Tok::Kw("return") => {
                self.advance();
                let v = self.cmp()?;
                return self.seq_tail(Expr { pos, kind: ExprKind::Return(Box::new(v)) });
            }
            Tok::Kw("raise") => {
                self.advance();
                let e = self.ident()?;
                let ann = if self.eat_sym(":") { Some(self.ty()?) } else { None };
                return self.seq_tail(Expr { pos, kind: ExprKind::Raise(e, ann) });
            }
            Tok::Kw("kill") => {
                self.advance();
                let s = self.ident()?;
                let ann = if self.eat_sym(":") { Some(self.ty()?) } else { None };
                return self.seq_tail(Expr { pos, kind: ExprKind::Kill(s, ann) });
            }
            _ => {
                let head = self.cmp()?;
                return self.seq_tail(head);
            }
        };
        Ok(Expr { pos, kind })
    }

    fn seq_tail(&mut self, first: Expr) -> PResult<Expr> {
        if self.eat_sym(";") {
            let pos = first.pos;
            let rest = self.expr()?;
            return Ok(Expr { pos, kind: ExprKind::Seq(Box::new(first), Box::new(rest)) });
        }
        Ok(first)
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let a = self.add()?;
        let op = if self.is_sym("=") {
            Prim::Eq
        } else if self.is_sym("<") {
            Prim::Lt
        } else {
            return Ok(a);
        };
        self.advance();
        let b = self.add()?;
        let pos = a.pos;
        Ok(Expr { pos, kind: ExprKind::Binop(op, Box::new(a), Box::new(b)) })
    }

    fn add(&mut self) -> PResult<Expr> {
        let mut a = self.mul()?;
        loop {
            let op = if self.is_sym("+") {
                Prim::Add
            } else if self.is_sym("-") {
                Prim::Sub
            } else {
                return Ok(a);
            };
            self.advance();
            let b = self.mul()?;
            let pos = a.pos;
            a = Expr { pos, kind: ExprKind::Binop(op, Box::new(a), Box::new(b)) };
        }
    }

    fn mul(&mut self) -> PResult<Expr> {
        let mut a = self.app()?;
        while self.eat_sym("*") {
            let b = self.app()?;
            let pos = a.pos;
            a = Expr { pos, kind: ExprKind::Binop(Prim::Mul, Box::new(a), Box::new(b)) };
        }
        Ok(a)
    }

    fn starts_atom(&self) -> bool {
        // A token in the first column starts a new top-level item, so it
        // never extends an application.
        if self.pos().col == 1 {
            return false;
        }
        match self.peek() {
            Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) => true,
            Tok::Kw(k) => matches!(*k, "true" | "false" | "inl" | "inr" | "getenv" | "setenv"),
            Tok::Sym(s) => matches!(*s, "(" | "{"),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Kw(k @ ("inl" | "inr")) => {
                self.advance();
                self.expect_sym("[")?;
                let x = self.ty()?;
                self.expect_sym(",")?;
                let y = self.ty()?;
                self.expect_sym("]")?;
                let arg = self.atom()?;
                return Ok(Expr { pos, kind: ExprKind::Inj { left: k == "inl", ann: (x, y), arg: Box::new(arg) } });
            }
            Tok::Kw("getenv") => {
                self.advance();
                self.expect_sym("(")?;
                if self.eat_sym(")") {
                    return Ok(Expr { pos, kind: ExprKind::Getenv(None) });
                }
                let c = self.binder()?;
                self.expect_sym(".")?;
                let body = self.expr()?;
                self.expect_sym(")")?;
                return Ok(Expr { pos, kind: ExprKind::Getenv(Some((c, Box::new(body)))) });
            }
            Tok::Kw("setenv") => {
                self.advance();
                let arg = self.atom()?;
                let kind = match arg.kind {
                    ExprKind::Tuple(v, k) if computation_shaped(&k, self.tables) => ExprKind::Setenv(v, Some(k)),
                    _ => ExprKind::Setenv(Box::new(arg), None),
                };
                return Ok(Expr { pos, kind });
            }
            Tok::Ident(id) if self.tables.ops.contains_key(id.as_str()) && matches!(self.peek_at(1), Tok::Sym("(")) => {
                if let Some(e) = self.try_explicit_op(&id)? {
                    return Ok(e);
                }
            }
            _ => {}
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            let pos = head.pos;
            head = Expr { pos, kind: ExprKind::App(Box::new(head), Box::new(arg)) };
        }
        Ok(head)
    }

    /// `op(V, x. M, { e -> N, ... })`. Falls back (returning `None`) when the
    /// parenthesised part is an ordinary argument of a generic call.
    fn try_explicit_op(&mut self, op: &str) -> PResult<Option<Expr>> {
        let start = self.i;
        let pos = self.pos();
        self.advance(); // op
        self.advance(); // (
        let Ok(arg) = self.expr() else {
            self.i = start;
            return Ok(None);
        };
        let is_explicit = self.is_sym(",")
            && matches!(self.peek_at(1), Tok::Ident(_) | Tok::Sym("_"))
            && matches!(self.peek_at(2), Tok::Sym("."));
        if !is_explicit {
            self.i = start;
            return Ok(None);
        }
        self.advance(); // ,
        let var = self.binder()?;
        self.expect_sym(".")?;
        let body = self.expr()?;
        let mut handlers = Vec::new();
        if self.eat_sym(",") {
            self.expect_sym("{")?;
            if !self.eat_sym("}") {
                loop {
                    let hpos = self.pos();
                    let e = self.ident()?;
                    self.expect_sym("->")?;
                    let h = self.expr()?;
                    handlers.push((e, hpos, h));
                    if self.eat_sym("}") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(Some(Expr {
            pos,
            kind: ExprKind::OpCall { op: op.to_string(), arg: Box::new(arg), var, body: Box::new(body), handlers },
        }))
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                ExprKind::Ident(s)
            }
            Tok::Int(n) => {
                self.advance();
                ExprKind::Int(n)
            }
            Tok::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            Tok::Kw("true") => {
                self.advance();
                ExprKind::Bool(true)
            }
            Tok::Kw("false") => {
                self.advance();
                ExprKind::Bool(false)
            }
            Tok::Kw("inl" | "inr" | "getenv" | "setenv") => return self.app(),
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.advance();
                match self.advance() {
                    Tok::Int(n) => ExprKind::Int(-n),
                    _ => unreachable!(),
                }
            }
            Tok::Sym("(") => {
                self.advance();
                if self.eat_sym(")") {
                    ExprKind::Unit
                } else {
                    let first = self.expr()?;
                    if self.eat_sym(")") {
                        return Ok(first);
                    }
                    self.expect_sym(",")?;
                    let mut items = vec![first];
                    loop {
                        items.push(self.expr()?);
                        if self.eat_sym(")") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                    // (a, b, c) is (a, (b, c))
                    let mut acc = items.pop().unwrap();
                    while let Some(x) = items.pop() {
                        let p = x.pos;
                        acc = Expr { pos: p, kind: ExprKind::Tuple(Box::new(x), Box::new(acc)) };
                    }
                    return Ok(Expr { pos, kind: acc.kind });
                }
            }
            Tok::Sym("{") => return self.runner_lit(),
            _ => return self.unexpected("an expression"),
        };
        Ok(Expr { pos, kind })
    }

    fn runner_lit(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        self.expect_sym("{")?;
        let mut clauses = Vec::new();
        if !self.eat_sym("}") {
            loop {
                let cpos = self.pos();
                let op = self.ident()?;
                let param = self.binder()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                clauses.push(RunnerClause { pos: cpos, op, param, body });
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        self.expect_sym("@")?;
        let state = self.ground_ty()?;
        Ok(Expr { pos, kind: ExprKind::Runner(clauses, state) })
    }

    fn handler(&mut self) -> PResult<SurfaceHandler> {
        let pos = self.pos();
        self.expect_sym("{")?;
        let mut h = SurfaceHandler { ret: None, raises: Vec::new(), pos };
        if self.eat_sym("}") {
            return Ok(h);
        }
        loop {
            let cpos = self.pos();
            if self.eat_kw("return") {
                let p = self.pattern()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                if h.ret.is_some() {
                    return Err(Diagnostic::new(cpos, "Parse-Duplicate", "duplicate return clause"));
                }
                h.ret = Some((p, Box::new(body)));
            } else if self.eat_kw("raise") {
                let e = self.ident()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                h.raises.push((e, cpos, body));
            } else {
                return self.unexpected("`return` or `raise` clause");
            }
            if self.eat_sym("}") {
                return Ok(h);
            }
            self.expect_sym(",")?;
        }
    }

    fn finally(&mut self) -> PResult<SurfaceFinally> {
        let pos = self.pos();
        self.expect_sym("{")?;
        let mut f = SurfaceFinally { pos, ret: None, raises: Vec::new(), kills: Vec::new() };
        if self.eat_sym("}") {
            return Ok(f);
        }
        loop {
            let cpos = self.pos();
            if self.eat_kw("return") {
                let p = self.pattern()?;
                self.expect_sym("@")?;
                let c = self.binder()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                if f.ret.is_some() {
                    return Err(Diagnostic::new(cpos, "Parse-Duplicate", "duplicate return clause"));
                }
                f.ret = Some((p, c, Box::new(body)));
            } else if self.eat_kw("raise") {
                let e = self.ident()?;
                self.expect_sym("@")?;
                let c = self.binder()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                f.raises.push((e, cpos, c, body));
            } else if self.eat_kw("kill") {
                let s = self.ident()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                f.kills.push((s, cpos, body));
            } else {
                return self.unexpected("`return`, `raise` or `kill` clause");
            }
            if self.eat_sym("}") {
                return Ok(f);
            }
            self.expect_sym(",")?;
        }
    }

    fn arms(&mut self) -> PResult<Arms> {
        self.expect_sym("{")?;
        if self.eat_sym("}") {
            self.expect_sym(":")?;
            let t = self.ty()?;
            return Ok(Arms::Empty(t));
        }
        if self.is_sym("(") && !matches!(self.peek_at(1), Tok::Sym(")")) {
            self.advance();
            let x = self.binder()?;
            self.expect_sym(",")?;
            let y = self.binder()?;
            self.expect_sym(")")?;
            self.expect_sym("->")?;
            let body = self.expr()?;
            self.expect_sym("}")?;
            return Ok(Arms::Pair(x, y, Box::new(body)));
        }
        let mut left = None;
        let mut right = None;
        for _ in 0..2 {
            let pos = self.pos();
            let is_left = if self.eat_kw("inl") {
                true
            } else if self.eat_kw("inr") {
                false
            } else {
                return self.unexpected("`inl`, `inr` or `(` in match clauses");
            };
            let b = self.binder()?;
            self.expect_sym("->")?;
            let body = self.expr()?;
            let slot = if is_left { &mut left } else { &mut right };
            if slot.is_some() {
                return Err(Diagnostic::new(pos, "Parse-Duplicate", "duplicate match clause"));
            }
            *slot = Some((b, body));
            if self.is_sym("}") {
                break;
            }
            self.expect_sym(",")?;
        }
        self.expect_sym("}")?;
        match (left, right) {
            (Some((x, m)), Some((y, n))) => Ok(Arms::Sum(x, Box::new(m), y, Box::new(n))),
            _ => self.error("sum match needs both an `inl` and an `inr` clause"),
        }
    }
}

/// Whether an expression certainly denotes a computation rather than a
/// value. Used to tell `setenv (V, K)` from `setenv V` at a pair.
pub fn computation_shaped(e: &Expr, tables: &EffectTables) -> bool {
    match &e.kind {
        ExprKind::Return(_)
        | ExprKind::Raise(..)
        | ExprKind::Kill(..)
        | ExprKind::Let(..)
        | ExprKind::Seq(..)
        | ExprKind::Try(..)
        | ExprKind::User(..)
        | ExprKind::Match(..)
        | ExprKind::If(..)
        | ExprKind::OpCall { .. }
        | ExprKind::Getenv(_)
        | ExprKind::Setenv(..)
        | ExprKind::Using { .. }
        | ExprKind::Kernel { .. } => true,
        ExprKind::App(..) => !is_prim_application(e, tables),
        _ => false,
    }
}

/// Flattens `f a b` into `(f, [a, b])`.
pub fn spine(e: &Expr) -> (&Expr, Vec<&Expr>) {
    let mut args = Vec::new();
    let mut head = e;
    while let ExprKind::App(f, a) = &head.kind {
        args.push(&**a);
        head = f;
    }
    args.reverse();
    (head, args)
}

pub fn is_prim_application(e: &Expr, _tables: &EffectTables) -> bool {
    let (head, args) = spine(e);
    match &head.kind {
        ExprKind::Ident(w) => match Prim::from_word(w) {
            Some(p) => p.signature().0.len() == args.len(),
            None => false,
        },
        _ => false,
    }
}
