//! Pretty-printer producing source text that parses back to an
//! alpha-equivalent term. Binders print with their fresh suffix (`x__3`),
//! and every compound computation in a nested position is parenthesised.

use crate::ground::escape_str;
use crate::names::source_name;
use crate::syntax::*;

pub fn print_value(v: &Value) -> String {
    let mut out = String::new();
    value(&mut out, v);
    out
}

pub fn print_user(m: &UserComp) -> String {
    let mut out = String::new();
    user(&mut out, m);
    out
}

pub fn print_kernel(k: &KernelComp) -> String {
    let mut out = String::new();
    kernel(&mut out, k);
    out
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for e in &p.tables.exceptions {
        out.push_str(&format!("exception {e}\n"));
    }
    for s in &p.tables.signals {
        out.push_str(&format!("signal {s}\n"));
    }
    for (op, sig) in &p.tables.ops {
        out.push_str(&format!("operation {op} : {sig}\n"));
    }
    for (x, m) in &p.bindings {
        out.push_str(&format!("let {} = ", source_name(x)));
        user_nested(&mut out, m);
        out.push('\n');
    }
    user(&mut out, &p.main);
    out.push('\n');
    out
}

fn name(out: &mut String, n: &str) {
    out.push_str(&source_name(n));
}

fn value(out: &mut String, v: &Value) {
    match v {
        Value::Var(x) => name(out, x),
        Value::Lit(Literal::Int(n)) if *n < 0 => out.push_str(&format!("({n})")),
        Value::Lit(Literal::Int(n)) => out.push_str(&n.to_string()),
        Value::Lit(Literal::Bool(b)) => out.push_str(&b.to_string()),
        Value::Lit(Literal::Str(s)) => out.push_str(&escape_str(s)),
        Value::Prim(p, args) => {
            out.push('(');
            if p.is_infix() && args.len() == 2 {
                value(out, &args[0]);
                out.push_str(&format!(" {} ", p.symbol()));
                value(out, &args[1]);
            } else {
                out.push_str(p.symbol());
                for a in args {
                    out.push(' ');
                    value(out, a);
                }
            }
            out.push(')');
        }
        Value::Unit => out.push_str("()"),
        Value::Pair(a, b) => {
            out.push('(');
            value(out, a);
            out.push_str(", ");
            value(out, b);
            out.push(')');
        }
        Value::Inl(a, x, y) | Value::Inr(a, x, y) => {
            let kw = if matches!(v, Value::Inl(..)) { "inl" } else { "inr" };
            out.push_str(&format!("({kw}[{x}, {y}] "));
            value(out, a);
            out.push(')');
        }
        Value::Fun(x, t, m) => {
            out.push_str("(fun (");
            name(out, x);
            out.push_str(&format!(" : {t}) -> "));
            user(out, m);
            out.push(')');
        }
        Value::FunK(x, t, c, k) => {
            out.push_str("(funK (");
            name(out, x);
            out.push_str(&format!(" : {t}) @ {c} -> "));
            kernel(out, k);
            out.push(')');
        }
        Value::Runner(r) => {
            out.push_str("({ ");
            for (i, cl) in r.clauses.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("{} ", cl.op));
                name(out, &cl.param);
                out.push_str(" -> ");
                kernel(out, &cl.body);
            }
            out.push_str(&format!(" }} @ {})", r.state));
        }
    }
}

fn user_nested(out: &mut String, m: &UserComp) {
    out.push('(');
    user(out, m);
    out.push(')');
}

fn kernel_nested(out: &mut String, k: &KernelComp) {
    out.push('(');
    kernel(out, k);
    out.push(')');
}

fn handler<B>(out: &mut String, h: &Handler<B>, body: fn(&mut String, &B)) {
    out.push_str("{ return ");
    name(out, &h.ret.0);
    out.push_str(" -> ");
    body(out, &h.ret.1);
    for (e, n) in &h.raises {
        out.push_str(&format!(", raise {e} -> "));
        body(out, n);
    }
    out.push_str(" }");
}

fn finally(out: &mut String, f: &Finally) {
    out.push_str("{ return ");
    name(out, &f.ret.0);
    out.push_str(" @ ");
    name(out, &f.ret.1);
    out.push_str(" -> ");
    user_nested(out, &f.ret.2);
    for (e, c, n) in &f.raises {
        out.push_str(&format!(", raise {e} @ "));
        name(out, c);
        out.push_str(" -> ");
        user_nested(out, n);
    }
    for (s, n) in &f.kills {
        out.push_str(&format!(", kill {s} -> "));
        user_nested(out, n);
    }
    out.push_str(" }");
}

fn op_call<B>(out: &mut String, c: &OpCall<B>, body: fn(&mut String, &B)) {
    out.push_str(&format!("{}(", c.op));
    value(out, &c.arg);
    out.push_str(", ");
    name(out, &c.var);
    out.push_str(". ");
    body(out, &c.body);
    out.push_str(", {");
    for (i, (e, n)) in c.handlers.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        out.push_str(&format!("{e} -> "));
        body(out, n);
    }
    out.push_str(" })");
}

fn annotation(out: &mut String, t: &Option<crate::types::ValueType>) {
    if let Some(t) = t {
        out.push_str(&format!(" : ({t})"));
    }
}

fn user(out: &mut String, m: &UserComp) {
    match &m.kind {
        UserKind::Return(v) => {
            out.push_str("return ");
            value(out, v);
        }
        UserKind::App(f, a) => {
            value(out, f);
            out.push(' ');
            value(out, a);
        }
        UserKind::Try(m, h) => {
            out.push_str("try ");
            user_nested(out, m);
            out.push_str(" with ");
            handler(out, h, user_nested);
        }
        UserKind::Let(x, m, n) => {
            out.push_str("let ");
            name(out, x);
            out.push_str(" = ");
            user_nested(out, m);
            out.push_str(" in ");
            user_nested(out, n);
        }
        UserKind::MatchPair(v, x, y, m) => {
            out.push_str("match ");
            value(out, v);
            out.push_str(" with { (");
            name(out, x);
            out.push_str(", ");
            name(out, y);
            out.push_str(") -> ");
            user_nested(out, m);
            out.push_str(" }");
        }
        UserKind::MatchEmpty(v, t) => {
            out.push_str("match ");
            value(out, v);
            out.push_str(&format!(" with {{}} : ({t})"));
        }
        UserKind::MatchSum(v, x, m, y, n) => {
            out.push_str("match ");
            value(out, v);
            out.push_str(" with { inl ");
            name(out, x);
            out.push_str(" -> ");
            user_nested(out, m);
            out.push_str(", inr ");
            name(out, y);
            out.push_str(" -> ");
            user_nested(out, n);
            out.push_str(" }");
        }
        UserKind::Op(c) => op_call(out, c, user_nested),
        UserKind::Raise(e, t) => {
            out.push_str(&format!("raise {e}"));
            annotation(out, t);
        }
        UserKind::Run(r, w, m, f) => {
            out.push_str("using ");
            value(out, r);
            out.push_str(" @ ");
            value(out, w);
            out.push_str(" run ");
            user_nested(out, m);
            out.push_str(" finally ");
            finally(out, f);
        }
        UserKind::Kernel(k, w, f) => {
            out.push_str("kernel ");
            kernel_nested(out, k);
            out.push_str(" @ ");
            value(out, w);
            out.push_str(" finally ");
            finally(out, f);
        }
    }
}

fn kernel(out: &mut String, k: &KernelComp) {
    match &k.kind {
        KernelKind::Return(v) => {
            out.push_str("return ");
            value(out, v);
        }
        KernelKind::App(f, a) => {
            value(out, f);
            out.push(' ');
            value(out, a);
        }
        KernelKind::Try(m, h) => {
            out.push_str("try ");
            kernel_nested(out, m);
            out.push_str(" with ");
            handler(out, h, kernel_nested);
        }
        KernelKind::Let(x, m, n) => {
            out.push_str("let ");
            name(out, x);
            out.push_str(" = ");
            kernel_nested(out, m);
            out.push_str(" in ");
            kernel_nested(out, n);
        }
        KernelKind::MatchPair(v, x, y, m) => {
            out.push_str("match ");
            value(out, v);
            out.push_str(" with { (");
            name(out, x);
            out.push_str(", ");
            name(out, y);
            out.push_str(") -> ");
            kernel_nested(out, m);
            out.push_str(" }");
        }
        KernelKind::MatchEmpty(v, t) => {
            out.push_str("match ");
            value(out, v);
            out.push_str(&format!(" with {{}} : ({t})"));
        }
        KernelKind::MatchSum(v, x, m, y, n) => {
            out.push_str("match ");
            value(out, v);
            out.push_str(" with { inl ");
            name(out, x);
            out.push_str(" -> ");
            kernel_nested(out, m);
            out.push_str(", inr ");
            name(out, y);
            out.push_str(" -> ");
            kernel_nested(out, n);
            out.push_str(" }");
        }
        KernelKind::Op(c) => op_call(out, c, kernel_nested),
        KernelKind::Raise(e, t) => {
            out.push_str(&format!("raise {e}"));
            annotation(out, t);
        }
        KernelKind::Kill(s, t) => {
            out.push_str(&format!("kill {s}"));
            annotation(out, t);
        }
        KernelKind::Getenv(c, k) => {
            out.push_str("getenv (");
            name(out, c);
            out.push_str(". ");
            kernel(out, k);
            out.push(')');
        }
        KernelKind::Setenv(v, k) => {
            out.push_str("setenv (");
            value(out, v);
            out.push_str(", ");
            kernel_nested(out, k);
            out.push(')');
        }
        KernelKind::User(m, h) => {
            out.push_str("user ");
            user_nested(out, m);
            out.push_str(" with ");
            handler(out, h, kernel_nested);
        }
    }
}
