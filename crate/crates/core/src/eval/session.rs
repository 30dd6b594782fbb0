//! Per-evaluation bookkeeping: finalisation log, trace events and the
//! continuation-affinity counters.

use std::cell::RefCell;
use std::collections::HashSet;
use std::rc::Rc;

use serde::Serialize;

use crate::names::Name;
use crate::syntax::Pos;

/// Which construct a finalisation record belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construct {
    Run,
    KernelSwitch,
}

/// The finalisation clause that fired.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", content = "name", rename_all = "kebab-case")]
pub enum Fired {
    Return,
    Raise(String),
    Kill(String),
}

/// One record per evaluated run or kernel-switch occurrence.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub id: u64,
    pub line: u32,
    pub col: u32,
    pub construct: Construct,
    pub depth: u32,
    pub fired: Vec<Fired>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub event: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exception: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<String>,
    #[serde(rename = "runDepth")]
    pub run_depth: u32,
}

impl TraceEvent {
    pub fn new(event: &'static str, run_depth: u32) -> Self {
        TraceEvent { event, op: None, exception: None, signal: None, run_depth }
    }
}

#[derive(Debug, Default)]
pub struct Session {
    pub runs: Vec<RunRecord>,
    pub trace: Vec<TraceEvent>,
    pub continuations_created: u64,
    pub continuations_resumed: u64,
    /// Continuations resumed more than once. Always zero for a correct
    /// evaluator.
    pub affinity_violations: u64,
    resumed: HashSet<u64>,
    killed: HashSet<u64>,
    /// Reads of a runner's state after one of its co-operations sent a
    /// signal. Always zero for a correct evaluator.
    pub reads_after_kill: u64,
    /// Operations that reached the top-level container.
    pub container_ops: u64,
}

impl Session {
    pub fn new_run(&mut self, pos: Pos, construct: Construct, depth: u32) -> u64 {
        let id = self.runs.len() as u64;
        self.runs.push(RunRecord { id, line: pos.line, col: pos.col, construct, depth, fired: Vec::new() });
        id
    }

    pub fn fire(&mut self, run: u64, fired: Fired) {
        let depth = self.runs[run as usize].depth;
        let mut ev = TraceEvent::new("finally", depth);
        match &fired {
            Fired::Return => {}
            Fired::Raise(e) => ev.exception = Some(e.clone()),
            Fired::Kill(s) => ev.signal = Some(s.clone()),
        }
        self.trace.push(ev);
        self.runs[run as usize].fired.push(fired);
    }

    pub fn event(&mut self, event: &'static str, depth: u32, op: &Name, exception: Option<&Name>, signal: Option<&Name>) {
        self.trace.push(TraceEvent {
            event,
            op: Some(op.to_string()),
            exception: exception.map(|e| e.to_string()),
            signal: signal.map(|s| s.to_string()),
            run_depth: depth,
        });
    }

    pub fn mark_killed(&mut self, owner: u64) {
        self.killed.insert(owner);
    }

    pub fn note_read(&mut self, owner: u64) {
        if self.killed.contains(&owner) {
            self.reads_after_kill += 1;
        }
    }

    fn new_cont(&mut self) -> u64 {
        self.continuations_created += 1;
        self.continuations_created
    }

    fn note_resume(&mut self, id: u64) {
        self.continuations_resumed += 1;
        if !self.resumed.insert(id) {
            self.affinity_violations += 1;
        }
    }
}

pub type Sess = Rc<RefCell<Session>>;

/// Outcome delivered to a suspended operation call: its result or one of
/// its exceptions.
pub type Resume<V> = Result<V, Name>;

/// A suspended computation awaiting the result of an operation call.
/// Besides a result or exception it can receive a signal sent by the
/// container that answered the call.
pub struct Cont<V, S> {
    id: u64,
    sess: Sess,
    f: Box<dyn FnOnce(Result<Resume<V>, Name>) -> S>,
}

impl<V: 'static, S: 'static> Cont<V, S> {
    /// `killed` turns a delivered signal into a step of the call site.
    pub fn new(sess: &Sess, f: impl FnOnce(Resume<V>) -> S + 'static, killed: fn(Name) -> S) -> Self {
        Cont::raw(sess, move |r| match r {
            Ok(r) => f(r),
            Err(s) => killed(s),
        })
    }

    fn raw(sess: &Sess, f: impl FnOnce(Result<Resume<V>, Name>) -> S + 'static) -> Self {
        let id = sess.borrow_mut().new_cont();
        Cont { id, sess: sess.clone(), f: Box::new(f) }
    }

    pub fn resume(self, r: Resume<V>) -> S {
        self.sess.borrow_mut().note_resume(self.id);
        (self.f)(Ok(r))
    }

    /// Delivers a signal to the call site instead of resuming it.
    pub fn kill(self, s: Name) -> S {
        (self.f)(Err(s))
    }

    /// A continuation that resumes this one and post-processes its result.
    pub fn then<T: 'static>(self, g: impl FnOnce(S) -> T + 'static) -> Cont<V, T> {
        let sess = self.sess.clone();
        Cont::raw(&sess, move |r| {
            g(match r {
                Ok(r) => self.resume(r),
                Err(s) => self.kill(s),
            })
        })
    }
}
