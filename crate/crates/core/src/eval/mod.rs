//! Evaluator. Each computation evaluates to a step: a returned value, a
//! raised exception, a signal (kernel mode only) or a suspended operation
//! call carrying its continuation. `run`, kernel switches and user switches
//! drive the steps of their bodies and propagate unhandled operation calls
//! outwards with the rest of the construct wrapped into the continuation.

pub mod session;
pub mod value;

use std::cell::RefCell;
use std::rc::Rc;

use crate::ground::apply_prim;
use crate::names::Name;
use crate::syntax::*;
pub use session::{Construct, Cont, Fired, Resume, RunRecord, Sess, Session, TraceEvent};
pub use value::{Closure, Env, RValue, RunnerClosure};

pub type UCont = Cont<RValue, UserStep>;
pub type KCont = Cont<RValue, KernelStep>;

pub enum UserStep {
    Return(RValue),
    Raise(Name),
    Op(Name, RValue, UCont),
    /// A container signal unwinding user code to the nearest kernel code.
    Killed(Name),
    /// Evaluation went wrong; only reachable for ill-typed terms.
    Stuck(String),
}

pub enum KernelStep {
    Return(RValue, RValue),
    Raise(Name, RValue),
    /// A signal carries no state.
    Kill(Name),
    Op(Name, RValue, KCont),
    Stuck(String),
}

/// Where kernel code runs: the dynamic run depth and the run or kernel
/// switch whose state it manipulates.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub depth: u32,
    pub owner: u64,
}

#[derive(Clone)]
pub struct Machine {
    pub sess: Sess,
}

impl Default for Machine {
    fn default() -> Self {
        Machine::new()
    }
}

impl Machine {
    pub fn new() -> Self {
        Machine { sess: Rc::new(RefCell::new(Session::default())) }
    }

    pub fn value(&self, env: &Env, v: &Value) -> Result<RValue, String> {
        Ok(match v {
            Value::Var(x) => env.lookup(x).cloned().ok_or_else(|| format!("unbound variable `{x}`"))?,
            Value::Lit(Literal::Int(n)) => RValue::Int(*n),
            Value::Lit(Literal::Bool(b)) => RValue::Bool(*b),
            Value::Lit(Literal::Str(s)) => RValue::Str(s.clone()),
            Value::Prim(p, args) => {
                let mut gs = Vec::with_capacity(args.len());
                for a in args {
                    let a = self.value(env, a)?;
                    gs.push(a.to_ground().ok_or_else(|| format!("`{}` applied to a non-ground value", p.symbol()))?);
                }
                let r = apply_prim(*p, &gs).ok_or_else(|| format!("`{}` applied to arguments of the wrong type", p.symbol()))?;
                RValue::from_ground(&r)
            }
            Value::Unit => RValue::Unit,
            Value::Pair(a, b) => RValue::pair(self.value(env, a)?, self.value(env, b)?),
            Value::Inl(a, _, _) => RValue::Inl(Rc::new(self.value(env, a)?)),
            Value::Inr(a, _, _) => RValue::Inr(Rc::new(self.value(env, a)?)),
            Value::Fun(x, _, m) => RValue::Fun(Rc::new(Closure { param: x.clone(), body: m.clone(), env: env.clone() })),
            Value::FunK(x, _, _, k) => {
                RValue::FunK(Rc::new(Closure { param: x.clone(), body: k.clone(), env: env.clone() }))
            }
            Value::Runner(r) => RValue::Runner(Rc::new(RunnerClosure { lit: r.clone(), env: env.clone() })),
        })
    }

    // -- user mode ----------------------------------------------------------

    pub fn user(&self, env: &Env, depth: u32, m: &UserComp) -> UserStep {
        macro_rules! val {
            ($v:expr) => {
                match self.value(env, $v) {
                    Ok(v) => v,
                    Err(e) => return UserStep::Stuck(e),
                }
            };
        }
        match &m.kind {
            UserKind::Return(v) => UserStep::Return(val!(v)),
            UserKind::App(f, a) => {
                let f = val!(f);
                let a = val!(a);
                match f {
                    RValue::Fun(c) => self.user(&c.env.bind(&c.param, a), depth, &c.body),
                    _ => UserStep::Stuck("applied value is not a user function".into()),
                }
            }
            UserKind::Try(b, h) => {
                let step = self.user(env, depth, b);
                let (me, env, h) = (self.clone(), env.clone(), h.clone());
                self.then_user(step, move |r| match r {
                    Ok(v) => me.user(&env.bind(&h.ret.0, v), depth, &h.ret.1),
                    Err(e) => match h.raise_clause(&e) {
                        Some(n) => me.user(&env, depth, n),
                        None => UserStep::Raise(e),
                    },
                })
            }
            UserKind::Let(x, b, n) => {
                let step = self.user(env, depth, b);
                let (me, env, x, n) = (self.clone(), env.clone(), x.clone(), n.clone());
                self.then_user(step, move |r| match r {
                    Ok(v) => me.user(&env.bind(&x, v), depth, &n),
                    Err(e) => UserStep::Raise(e),
                })
            }
            UserKind::MatchPair(v, x, y, b) => match val!(v) {
                RValue::Pair(a, c) => self.user(&env.bind(x, (*a).clone()).bind(y, (*c).clone()), depth, b),
                _ => UserStep::Stuck("pair match on a non-pair".into()),
            },
            UserKind::MatchEmpty(..) => UserStep::Stuck("match on a value of the empty type".into()),
            UserKind::MatchSum(v, x, b1, y, b2) => match val!(v) {
                RValue::Inl(a) => self.user(&env.bind(x, (*a).clone()), depth, b1),
                RValue::Inr(a) => self.user(&env.bind(y, (*a).clone()), depth, b2),
                _ => UserStep::Stuck("sum match on a non-injection".into()),
            },
            UserKind::Op(c) => {
                let arg = val!(&c.arg);
                let (me, env, c2) = (self.clone(), env.clone(), c.clone());
                let k = Cont::new(&self.sess, move |r: Resume<RValue>| match r {
                    Ok(v) => me.user(&env.bind(&c2.var, v), depth, &c2.body),
                    Err(e) => match c2.handler(&e) {
                        Some(n) => me.user(&env, depth, n),
                        None => UserStep::Stuck(format!("`{}` cannot raise `{e}`", c2.op)),
                    },
                }, UserStep::Killed);
                UserStep::Op(c.op.clone(), arg, k)
            }
            UserKind::Raise(e, _) => UserStep::Raise(e.clone()),
            UserKind::Run(r, w, b, f) => {
                let RValue::Runner(runner) = val!(r) else {
                    return UserStep::Stuck("`using` needs a runner".into());
                };
                let state = val!(w);
                let id = self.sess.borrow_mut().new_run(m.pos, Construct::Run, depth + 1);
                let step = self.user(env, depth + 1, b);
                let ctx = Rc::new(RunCtx { runner, fin: f.clone(), env: env.clone(), depth, id });
                self.run_loop(ctx, state, step)
            }
            UserKind::Kernel(k, w, f) => {
                let state = val!(w);
                let id = self.sess.borrow_mut().new_run(m.pos, Construct::KernelSwitch, depth);
                let step = self.kernel(env, Frame { depth, owner: id }, state, k);
                let ctx = Rc::new(SwitchCtx { fin: f.clone(), env: env.clone(), depth, id });
                self.switch_loop(ctx, step)
            }
        }
    }

    /// Sequences `step` with `k`, which receives its value or exception.
    pub fn then_user(&self, step: UserStep, k: impl FnOnce(Resume<RValue>) -> UserStep + 'static) -> UserStep {
        match step {
            UserStep::Return(v) => k(Ok(v)),
            UserStep::Raise(e) => k(Err(e)),
            UserStep::Op(op, a, cont) => {
                let me = self.clone();
                UserStep::Op(op, a, cont.then(move |s| me.then_user(s, k)))
            }
            UserStep::Killed(s) => UserStep::Killed(s),
            UserStep::Stuck(msg) => UserStep::Stuck(msg),
        }
    }

    fn finally_return(&self, ctx: &FinCtx, x: RValue, c: RValue) -> UserStep {
        self.sess.borrow_mut().fire(ctx.id, Fired::Return);
        let (xn, cn, n) = &ctx.fin.ret;
        self.user(&ctx.env.bind(cn, c).bind(xn, x), ctx.depth, n)
    }

    fn finally_raise(&self, ctx: &FinCtx, e: Name, c: RValue) -> UserStep {
        let Some((cn, n)) = ctx.fin.raise_clause(&e) else {
            return UserStep::Stuck(format!("no finalisation clause for exception `{e}`"));
        };
        self.sess.borrow_mut().fire(ctx.id, Fired::Raise(e.to_string()));
        self.user(&ctx.env.bind(cn, c), ctx.depth, n)
    }

    fn finally_kill(&self, ctx: &FinCtx, s: Name) -> UserStep {
        let Some(n) = ctx.fin.kill_clause(&s) else {
            // Only a container signal can lack a clause; it continues outwards.
            return UserStep::Killed(s);
        };
        self.sess.borrow_mut().fire(ctx.id, Fired::Kill(s.to_string()));
        self.user(ctx.env, ctx.depth, n)
    }

    fn run_loop(&self, ctx: Rc<RunCtx>, state: RValue, step: UserStep) -> UserStep {
        let fc = ctx.fin_ctx();
        match step {
            UserStep::Return(v) => self.finally_return(&fc, v, state),
            UserStep::Raise(e) => self.finally_raise(&fc, e, state),
            UserStep::Killed(s) => UserStep::Killed(s),
            UserStep::Stuck(msg) => UserStep::Stuck(msg),
            UserStep::Op(op, arg, cont) => {
                let Some(clause) = ctx.runner.lit.clause(&op) else {
                    return UserStep::Stuck(format!("runner does not implement operation `{op}`"));
                };
                self.sess.borrow_mut().event("op", ctx.depth + 1, &op, None, None);
                let frame = Frame { depth: ctx.depth, owner: ctx.id };
                let kstep = self.kernel(&ctx.runner.env.bind(&clause.param, arg), frame, state, &clause.body);
                self.coop_loop(ctx, op, cont, kstep)
            }
        }
    }

    /// Drives a co-operation, then resumes the user continuation under the
    /// same runner.
    fn coop_loop(&self, ctx: Rc<RunCtx>, op: Name, cont: UCont, kstep: KernelStep) -> UserStep {
        let depth = ctx.depth + 1;
        match kstep {
            KernelStep::Return(b, c) => {
                self.sess.borrow_mut().event("coop-return", depth, &op, None, None);
                let next = cont.resume(Ok(b));
                self.run_loop(ctx, c, next)
            }
            KernelStep::Raise(e, c) => {
                self.sess.borrow_mut().event("coop-raise", depth, &op, Some(&e), None);
                let next = cont.resume(Err(e));
                self.run_loop(ctx, c, next)
            }
            KernelStep::Kill(s) => {
                {
                    let mut sess = self.sess.borrow_mut();
                    sess.event("coop-kill", depth, &op, None, Some(&s));
                    sess.mark_killed(ctx.id);
                }
                drop(cont);
                self.finally_kill(&ctx.fin_ctx(), s)
            }
            KernelStep::Stuck(msg) => UserStep::Stuck(msg),
            KernelStep::Op(op2, a2, kcont) => {
                let me = self.clone();
                UserStep::Op(op2, a2, kcont.then(move |ks| me.coop_loop(ctx, op, cont, ks)))
            }
        }
    }

    fn switch_loop(&self, ctx: Rc<SwitchCtx>, step: KernelStep) -> UserStep {
        let fc = FinCtx { fin: &ctx.fin, env: &ctx.env, depth: ctx.depth, id: ctx.id };
        match step {
            KernelStep::Return(v, c) => self.finally_return(&fc, v, c),
            KernelStep::Raise(e, c) => self.finally_raise(&fc, e, c),
            KernelStep::Kill(s) => {
                self.sess.borrow_mut().mark_killed(ctx.id);
                self.finally_kill(&fc, s)
            }
            KernelStep::Stuck(msg) => UserStep::Stuck(msg),
            KernelStep::Op(op, a, kcont) => {
                let me = self.clone();
                UserStep::Op(op, a, kcont.then(move |ks| me.switch_loop(ctx, ks)))
            }
        }
    }

    // -- kernel mode --------------------------------------------------------

    pub fn kernel(&self, env: &Env, frame: Frame, state: RValue, k: &KernelComp) -> KernelStep {
        macro_rules! val {
            ($v:expr) => {
                match self.value(env, $v) {
                    Ok(v) => v,
                    Err(e) => return KernelStep::Stuck(e),
                }
            };
        }
        match &k.kind {
            KernelKind::Return(v) => KernelStep::Return(val!(v), state),
            KernelKind::App(f, a) => {
                let f = val!(f);
                let a = val!(a);
                match f {
                    RValue::FunK(c) => self.kernel(&c.env.bind(&c.param, a), frame, state, &c.body),
                    _ => KernelStep::Stuck("applied value is not a kernel function".into()),
                }
            }
            KernelKind::Try(b, h) => {
                let step = self.kernel(env, frame, state, b);
                let (me, env, h) = (self.clone(), env.clone(), h.clone());
                self.then_kernel(step, move |r, c| match r {
                    Ok(v) => me.kernel(&env.bind(&h.ret.0, v), frame, c, &h.ret.1),
                    Err(e) => match h.raise_clause(&e) {
                        Some(n) => me.kernel(&env, frame, c, n),
                        None => KernelStep::Raise(e, c),
                    },
                })
            }
            KernelKind::Let(x, b, n) => {
                let step = self.kernel(env, frame, state, b);
                let (me, env, x, n) = (self.clone(), env.clone(), x.clone(), n.clone());
                self.then_kernel(step, move |r, c| match r {
                    Ok(v) => me.kernel(&env.bind(&x, v), frame, c, &n),
                    Err(e) => KernelStep::Raise(e, c),
                })
            }
            KernelKind::MatchPair(v, x, y, b) => match val!(v) {
                RValue::Pair(a, c) => self.kernel(&env.bind(x, (*a).clone()).bind(y, (*c).clone()), frame, state, b),
                _ => KernelStep::Stuck("pair match on a non-pair".into()),
            },
            KernelKind::MatchEmpty(..) => KernelStep::Stuck("match on a value of the empty type".into()),
            KernelKind::MatchSum(v, x, b1, y, b2) => match val!(v) {
                RValue::Inl(a) => self.kernel(&env.bind(x, (*a).clone()), frame, state, b1),
                RValue::Inr(a) => self.kernel(&env.bind(y, (*a).clone()), frame, state, b2),
                _ => KernelStep::Stuck("sum match on a non-injection".into()),
            },
            KernelKind::Op(c) => {
                let arg = val!(&c.arg);
                let (me, env, c2) = (self.clone(), env.clone(), c.clone());
                let k = Cont::new(&self.sess, move |r: Resume<RValue>| match r {
                    Ok(v) => me.kernel(&env.bind(&c2.var, v), frame, state, &c2.body),
                    Err(e) => match c2.handler(&e) {
                        Some(n) => me.kernel(&env, frame, state, n),
                        None => KernelStep::Stuck(format!("`{}` cannot raise `{e}`", c2.op)),
                    },
                }, KernelStep::Kill);
                KernelStep::Op(c.op.clone(), arg, k)
            }
            KernelKind::Raise(e, _) => KernelStep::Raise(e.clone(), state),
            KernelKind::Kill(s, _) => KernelStep::Kill(s.clone()),
            KernelKind::Getenv(c, b) => {
                self.sess.borrow_mut().note_read(frame.owner);
                self.kernel(&env.bind(c, state.clone()), frame, state, b)
            }
            KernelKind::Setenv(v, b) => {
                let v = val!(v);
                self.kernel(env, frame, v, b)
            }
            KernelKind::User(m, h) => {
                let step = self.user(env, frame.depth, m);
                let ctx = Rc::new(UserSwitchCtx { h: h.clone(), env: env.clone(), frame });
                self.user_switch_loop(ctx, state, step)
            }
        }
    }

    /// Sequences a kernel step with `k`, which receives the value or
    /// exception together with the state at that point. Signals skip `k`.
    pub fn then_kernel(&self, step: KernelStep, k: impl FnOnce(Resume<RValue>, RValue) -> KernelStep + 'static) -> KernelStep {
        match step {
            KernelStep::Return(v, c) => k(Ok(v), c),
            KernelStep::Raise(e, c) => k(Err(e), c),
            KernelStep::Kill(s) => KernelStep::Kill(s),
            KernelStep::Op(op, a, cont) => {
                let me = self.clone();
                KernelStep::Op(op, a, cont.then(move |s| me.then_kernel(s, k)))
            }
            KernelStep::Stuck(msg) => KernelStep::Stuck(msg),
        }
    }

    fn user_switch_loop(&self, ctx: Rc<UserSwitchCtx>, state: RValue, step: UserStep) -> KernelStep {
        match step {
            UserStep::Return(v) => self.kernel(&ctx.env.bind(&ctx.h.ret.0, v), ctx.frame, state, &ctx.h.ret.1),
            UserStep::Raise(e) => match ctx.h.raise_clause(&e) {
                Some(n) => self.kernel(&ctx.env, ctx.frame, state, n),
                None => KernelStep::Raise(e, state),
            },
            UserStep::Killed(s) => KernelStep::Kill(s),
            UserStep::Stuck(msg) => KernelStep::Stuck(msg),
            UserStep::Op(op, a, cont) => {
                let me = self.clone();
                KernelStep::Op(op, a, cont.then(move |us| me.user_switch_loop(ctx, state, us)))
            }
        }
    }
}

struct RunCtx {
    runner: Rc<RunnerClosure>,
    fin: Finally,
    env: Env,
    depth: u32,
    id: u64,
}

impl RunCtx {
    fn fin_ctx(&self) -> FinCtx<'_> {
        FinCtx { fin: &self.fin, env: &self.env, depth: self.depth, id: self.id }
    }
}

struct SwitchCtx {
    fin: Finally,
    env: Env,
    depth: u32,
    id: u64,
}

struct FinCtx<'a> {
    fin: &'a Finally,
    env: &'a Env,
    depth: u32,
    id: u64,
}

struct UserSwitchCtx {
    h: Handler<KernelComp>,
    env: Env,
    frame: Frame,
}

// ---------------------------------------------------------------------------
// Top level.

/// Terminal result of a whole evaluation.
#[derive(Clone, Debug)]
pub enum Outcome {
    Return(RValue),
    Raise(Name),
    Kill(Name),
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Return(v) => write!(f, "return {v}"),
            Outcome::Raise(e) => write!(f, "raise {e}"),
            Outcome::Kill(s) => write!(f, "kill {s}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("stuck: {0}")]
    Stuck(String),
    #[error("operation `{0}` is not provided by the container")]
    UnhandledOperation(String),
    #[error("container reply to `{op}` does not fit its signature: {reply}")]
    BadReply { op: String, reply: String },
}

/// Reply of a container to an operation call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    Return(crate::ground::GroundValue),
    Raise(Name),
    Kill(Name),
}

/// Something that can answer the operations escaping to the top level.
pub trait Handle {
    fn handle(&mut self, op: &str, arg: &crate::ground::GroundValue) -> Option<Reply>;
}

pub struct Evaluation {
    pub outcome: Result<Outcome, EvalError>,
    pub session: Session,
}

/// Evaluates a closed user computation, answering escaping operations
/// with `top`.
pub fn run_toplevel(top: &mut dyn Handle, m: &UserComp) -> Evaluation {
    let machine = Machine::new();
    let mut step = machine.user(&Env::new(), 0, m);
    let outcome = loop {
        match step {
            UserStep::Return(v) => break Ok(Outcome::Return(v)),
            UserStep::Raise(e) => break Ok(Outcome::Raise(e)),
            UserStep::Killed(s) => break Ok(Outcome::Kill(s)),
            UserStep::Stuck(msg) => break Err(EvalError::Stuck(msg)),
            UserStep::Op(op, arg, cont) => {
                let Some(g) = arg.to_ground() else {
                    break Err(EvalError::Stuck(format!("argument of `{op}` is not ground")));
                };
                {
                    let mut sess = machine.sess.borrow_mut();
                    sess.container_ops += 1;
                    sess.event("op", 0, &op, None, None);
                }
                match top.handle(&op, &g) {
                    None => break Err(EvalError::UnhandledOperation(op.to_string())),
                    Some(Reply::Return(v)) => step = cont.resume(Ok(RValue::from_ground(&v))),
                    Some(Reply::Raise(e)) => step = cont.resume(Err(e)),
                    Some(Reply::Kill(s)) => step = cont.kill(s),
                }
            }
        }
    };
    // Drop continuations before unwrapping the session.
    let session = std::mem::take(&mut *machine.sess.borrow_mut());
    Evaluation { outcome, session }
}

/// Evaluates with no operations available at the top level.
pub fn run_pure(m: &UserComp) -> Evaluation {
    struct NoOps;
    impl Handle for NoOps {
        fn handle(&mut self, _: &str, _: &crate::ground::GroundValue) -> Option<Reply> {
            None
        }
    }
    run_toplevel(&mut NoOps, m)
}
