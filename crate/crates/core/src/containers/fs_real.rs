//! File operations against the host filesystem, confined to a sandbox.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use super::{file_signature, kill, Container};
use crate::eval::{Handle, Reply};
use crate::ground::GroundValue;
use crate::names::Name;
use crate::types::OpSig;

pub struct FsReal {
    root: PathBuf,
    handles: Vec<Option<File>>,
}

impl FsReal {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FsReal { root: root.into(), handles: Vec::new() }
    }

    /// Resolves `path` inside the sandbox, rejecting absolute paths and
    /// parent components.
    fn resolve(&self, path: &str) -> Option<PathBuf> {
        let p = Path::new(path);
        if path.is_empty() || !p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)) {
            return None;
        }
        Some(self.root.join(p))
    }
}

impl Handle for FsReal {
    fn handle(&mut self, op: &str, arg: &GroundValue) -> Option<Reply> {
        match (op, arg) {
            ("open", GroundValue::Str(path)) => {
                let Some(full) = self.resolve(path) else { return kill("SandboxViolation") };
                match File::create(full) {
                    Ok(f) => {
                        self.handles.push(Some(f));
                        Some(Reply::Return(GroundValue::Int(self.handles.len() as i64 - 1)))
                    }
                    Err(_) => kill("IOError"),
                }
            }
            ("fwrite", GroundValue::Pair(h, s)) => {
                let (GroundValue::Int(h), GroundValue::Str(s)) = (&**h, &**s) else { return None };
                let file = usize::try_from(*h).ok().and_then(|h| self.handles.get_mut(h)).and_then(Option::as_mut);
                match file.map(|f| f.write_all(s.as_bytes())) {
                    Some(Ok(())) => Some(Reply::Return(GroundValue::Unit)),
                    _ => kill("IOError"),
                }
            }
            ("close", GroundValue::Int(h)) => {
                let slot = usize::try_from(*h).ok().and_then(|h| self.handles.get_mut(h));
                match slot.and_then(Option::take) {
                    Some(f) => match f.sync_all() {
                        Ok(()) => Some(Reply::Return(GroundValue::Unit)),
                        Err(_) => kill("IOError"),
                    },
                    None => kill("IOError"),
                }
            }
            _ => None,
        }
    }
}

impl Container for FsReal {
    fn name(&self) -> &'static str {
        "fs-real"
    }

    fn signature(&self) -> BTreeMap<Name, OpSig> {
        file_signature(&[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::name;

    #[test]
    fn round_trip_and_policy() {
        let dir = tempfile::tempdir().unwrap();
        let mut fs = FsReal::new(dir.path());
        assert_eq!(fs.handle("open", &GroundValue::str("out.txt")), Some(Reply::Return(GroundValue::Int(0))));
        let w = GroundValue::pair(GroundValue::Int(0), GroundValue::str("bytes"));
        assert_eq!(fs.handle("fwrite", &w), Some(Reply::Return(GroundValue::Unit)));
        assert_eq!(fs.handle("close", &GroundValue::Int(0)), Some(Reply::Return(GroundValue::Unit)));
        assert_eq!(std::fs::read_to_string(dir.path().join("out.txt")).unwrap(), "bytes");
        assert_eq!(fs.handle("fwrite", &w), Some(Reply::Kill(name("IOError"))));
        assert_eq!(fs.handle("open", &GroundValue::str("../x")), Some(Reply::Kill(name("SandboxViolation"))));
        assert_eq!(fs.handle("open", &GroundValue::str("/etc/x")), Some(Reply::Kill(name("SandboxViolation"))));
    }
}
