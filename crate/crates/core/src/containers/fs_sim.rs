//! In-memory filesystem with a per-file quota and fault injection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{file_signature, kill, Container};
use crate::eval::{Handle, Reply};
use crate::ground::GroundValue;
use crate::names::{name, Name};
use crate::types::OpSig;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FsSimConfig {
    /// Maximum length of a file in bytes; `None` means unlimited.
    #[serde(default)]
    pub quota: Option<usize>,
    /// Zero-based index of the `fwrite` call that fails with `IOError`.
    #[serde(default)]
    pub fail_at_write: Option<usize>,
    /// Initial file contents.
    #[serde(default)]
    pub files: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SimFile {
    pub content: String,
    /// Number of handles currently open on the file.
    pub open_handles: usize,
    pub closes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
struct SimHandle {
    path: String,
    closed: bool,
}

#[derive(Clone, Debug)]
pub struct FsSim {
    config: FsSimConfig,
    pub files: BTreeMap<String, SimFile>,
    handles: Vec<SimHandle>,
    writes: usize,
    /// Every call with its reply, in order.
    pub log: Vec<(String, GroundValue, Reply)>,
}

impl FsSim {
    pub fn new(config: FsSimConfig) -> Self {
        let files = config
            .files
            .iter()
            .map(|(p, c)| (p.clone(), SimFile { content: c.clone(), ..SimFile::default() }))
            .collect();
        FsSim { config, files, handles: Vec::new(), writes: 0, log: Vec::new() }
    }

    pub fn file(&self, path: &str) -> Option<&SimFile> {
        self.files.get(path)
    }

    /// Total number of successful `close` calls.
    pub fn close_count(&self) -> usize {
        self.files.values().map(|f| f.closes).sum()
    }

    /// Number of `fwrite` calls that appended to a file.
    pub fn committed_writes(&self) -> usize {
        self.log.iter().filter(|(op, _, r)| op == "fwrite" && matches!(r, Reply::Return(_))).count()
    }

    fn reply(&mut self, op: &str, arg: &GroundValue) -> Option<Reply> {
        match (op, arg) {
            ("open", GroundValue::Str(path)) => {
                let f = self.files.entry(path.to_string()).or_default();
                f.content.clear();
                f.open_handles += 1;
                self.handles.push(SimHandle { path: path.to_string(), closed: false });
                Some(Reply::Return(GroundValue::Int(self.handles.len() as i64 - 1)))
            }
            ("fwrite", GroundValue::Pair(h, s)) => {
                let (GroundValue::Int(h), GroundValue::Str(s)) = (&**h, &**s) else { return None };
                let index = self.writes;
                self.writes += 1;
                if self.config.fail_at_write == Some(index) {
                    return kill("IOError");
                }
                let Some(handle) = usize::try_from(*h).ok().and_then(|h| self.handles.get(h)) else {
                    return kill("IOError");
                };
                if handle.closed {
                    return kill("IOError");
                }
                let file = self.files.get_mut(&handle.path)?;
                if self.config.quota.is_some_and(|q| file.content.len() + s.len() > q) {
                    return Some(Reply::Raise(name("QuotaExceeded")));
                }
                file.content.push_str(s);
                Some(Reply::Return(GroundValue::Unit))
            }
            ("close", GroundValue::Int(h)) => {
                let Some(handle) = usize::try_from(*h).ok().and_then(|h| self.handles.get_mut(h)) else {
                    return kill("IOError");
                };
                if handle.closed {
                    return kill("DoubleClose");
                }
                handle.closed = true;
                let file = self.files.get_mut(&handle.path)?;
                file.open_handles -= 1;
                file.closes += 1;
                Some(Reply::Return(GroundValue::Unit))
            }
            _ => None,
        }
    }
}

impl Handle for FsSim {
    fn handle(&mut self, op: &str, arg: &GroundValue) -> Option<Reply> {
        let r = self.reply(op, arg)?;
        self.log.push((op.to_string(), arg.clone(), r.clone()));
        Some(r)
    }
}

impl Container for FsSim {
    fn name(&self) -> &'static str {
        "fs-sim"
    }

    fn signature(&self) -> BTreeMap<Name, OpSig> {
        file_signature(&["QuotaExceeded"])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(h: i64, s: &str) -> GroundValue {
        GroundValue::pair(GroundValue::Int(h), GroundValue::str(s))
    }

    #[test]
    fn open_write_close() {
        let mut fs = FsSim::new(FsSimConfig::default());
        assert_eq!(fs.handle("open", &GroundValue::str("hello.txt")), Some(Reply::Return(GroundValue::Int(0))));
        assert_eq!(fs.handle("fwrite", &write(0, "ab")), Some(Reply::Return(GroundValue::Unit)));
        assert_eq!(fs.handle("fwrite", &write(0, "cd")), Some(Reply::Return(GroundValue::Unit)));
        assert_eq!(fs.handle("close", &GroundValue::Int(0)), Some(Reply::Return(GroundValue::Unit)));
        let f = fs.file("hello.txt").unwrap();
        assert_eq!((f.content.as_str(), f.open_handles, f.closes), ("abcd", 0, 1));
        assert_eq!(fs.handle("close", &GroundValue::Int(0)), Some(Reply::Kill(name("DoubleClose"))));
    }

    #[test]
    fn quota_raises_without_appending() {
        let mut fs = FsSim::new(FsSimConfig { quota: Some(3), ..FsSimConfig::default() });
        fs.handle("open", &GroundValue::str("f"));
        assert_eq!(fs.handle("fwrite", &write(0, "abcd")), Some(Reply::Raise(name("QuotaExceeded"))));
        assert_eq!(fs.file("f").unwrap().content, "");
    }

    #[test]
    fn injected_fault_kills_and_leaves_file_open() {
        let mut fs = FsSim::new(FsSimConfig { fail_at_write: Some(1), ..FsSimConfig::default() });
        fs.handle("open", &GroundValue::str("f"));
        assert_eq!(fs.handle("fwrite", &write(0, "a")), Some(Reply::Return(GroundValue::Unit)));
        assert_eq!(fs.handle("fwrite", &write(0, "b")), Some(Reply::Kill(name("IOError"))));
        assert_eq!(fs.file("f").unwrap().open_handles, 1);
    }

    #[test]
    fn write_after_close_kills() {
        let mut fs = FsSim::new(FsSimConfig::default());
        fs.handle("open", &GroundValue::str("f"));
        fs.handle("close", &GroundValue::Int(0));
        assert_eq!(fs.handle("fwrite", &write(0, "a")), Some(Reply::Kill(name("IOError"))));
    }

    #[test]
    fn config_json() {
        let c: FsSimConfig = serde_json::from_str(r#"{"quota": 5, "failAtWrite": 2, "files": {"a": "x"}}"#).unwrap();
        assert_eq!(c.quota, Some(5));
        assert_eq!(c.fail_at_write, Some(2));
        assert_eq!(c.files["a"], "x");
    }
}
