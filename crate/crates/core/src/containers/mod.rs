//! Top-level runners implemented in the host. A container answers the
//! operations that escape every runner of a program.

mod fs_real;
mod fs_sim;
mod heap;

use std::collections::BTreeMap;

pub use fs_real::FsReal;
pub use fs_sim::{FsSim, FsSimConfig, SimFile};
pub use heap::Heap;

use crate::eval::{Handle, Reply};
use crate::ground::GroundValue;
use crate::names::{name, Name};
use crate::types::{EffSet, GroundType, OpSig};

pub trait Container: Handle {
    fn name(&self) -> &'static str;

    /// Operations this container answers, with their signatures.
    fn signature(&self) -> BTreeMap<Name, OpSig>;
}

/// Checks that every operation of `needed` is provided by `container` with
/// the declared parameter and result types, raising only declared
/// exceptions.
pub fn check_compatible(
    container: &dyn Container,
    needed: &EffSet,
    declared: &BTreeMap<Name, OpSig>,
) -> Result<(), String> {
    let provided = container.signature();
    for op in needed {
        match (provided.get(op), declared.get(op)) {
            (None, _) => {
                return Err(format!("operation `{op}` is not provided by the {} container", container.name()))
            }
            (Some(p), Some(d)) if p.param != d.param || p.result != d.result || !p.excs.is_subset(&d.excs) => {
                return Err(format!(
                    "operation `{op}` is declared as `{d}` but the {} container provides `{p}`",
                    container.name()
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Provides no operations.
#[derive(Debug, Default)]
pub struct Pure;

impl Handle for Pure {
    fn handle(&mut self, _: &str, _: &GroundValue) -> Option<Reply> {
        None
    }
}

impl Container for Pure {
    fn name(&self) -> &'static str {
        "pure"
    }

    fn signature(&self) -> BTreeMap<Name, OpSig> {
        BTreeMap::new()
    }
}

fn sig(param: GroundType, result: GroundType, excs: &[&str]) -> OpSig {
    OpSig { param, result, excs: excs.iter().map(|e| name(e)).collect() }
}

fn kill(s: &str) -> Option<Reply> {
    Some(Reply::Kill(name(s)))
}

/// The file operations shared by both filesystem containers.
fn file_signature(excs: &[&str]) -> BTreeMap<Name, OpSig> {
    let mut m = BTreeMap::new();
    m.insert(name("open"), sig(GroundType::str(), GroundType::int(), &[]));
    m.insert(name("fwrite"), sig(GroundType::prod(GroundType::int(), GroundType::str()), GroundType::Unit, excs));
    m.insert(name("close"), sig(GroundType::int(), GroundType::Unit, &[]));
    m
}

/// Looks up a container by its command-line name. `fs-real` needs a
/// sandbox directory and is built separately.
pub fn by_name(n: &str, fs: Option<FsSimConfig>) -> Option<Box<dyn Container>> {
    Some(match n {
        "pure" => Box::new(Pure),
        "state" => Box::new(Heap::default()),
        "fs-sim" => Box::new(FsSim::new(fs.unwrap_or_default())),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatibility_requires_equal_signatures() {
        let fs = FsSim::new(FsSimConfig::default());
        let mut declared = fs.signature();
        let needed: EffSet = [name("open")].into_iter().collect();
        assert!(check_compatible(&fs, &needed, &declared).is_ok());
        declared.insert(name("open"), sig(GroundType::str(), GroundType::int(), &["Busy"]));
        assert!(check_compatible(&fs, &needed, &declared).is_ok());
        declared.insert(name("open"), sig(GroundType::int(), GroundType::int(), &[]));
        assert!(check_compatible(&fs, &needed, &declared).is_err());
        assert!(check_compatible(&Pure, &needed, &declared).is_err());
    }
}
