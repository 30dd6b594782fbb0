//! A heap of mutable integer cells.

use std::collections::BTreeMap;

use super::{kill, sig, Container};
use crate::eval::{Handle, Reply};
use crate::ground::GroundValue;
use crate::names::{name, Name};
use crate::types::{GroundType, OpSig};

#[derive(Clone, Debug, Default)]
pub struct Heap {
    pub cells: Vec<i64>,
}

impl Handle for Heap {
    fn handle(&mut self, op: &str, arg: &GroundValue) -> Option<Reply> {
        let cell = |h: &Heap, a: i64| usize::try_from(a).ok().filter(|&i| i < h.cells.len());
        match (op, arg) {
            ("malloc", GroundValue::Int(v)) => {
                self.cells.push(*v);
                Some(Reply::Return(GroundValue::Int(self.cells.len() as i64 - 1)))
            }
            ("memread", GroundValue::Int(a)) => match cell(self, *a) {
                Some(i) => Some(Reply::Return(GroundValue::Int(self.cells[i]))),
                None => kill("SegFault"),
            },
            ("memset", GroundValue::Pair(a, v)) => {
                let (GroundValue::Int(a), GroundValue::Int(v)) = (&**a, &**v) else { return None };
                match cell(self, *a) {
                    Some(i) => {
                        self.cells[i] = *v;
                        Some(Reply::Return(GroundValue::Unit))
                    }
                    None => kill("SegFault"),
                }
            }
            _ => None,
        }
    }
}

impl Container for Heap {
    fn name(&self) -> &'static str {
        "state"
    }

    fn signature(&self) -> BTreeMap<Name, OpSig> {
        let int = GroundType::int;
        let mut m = BTreeMap::new();
        m.insert(name("malloc"), sig(int(), int(), &[]));
        m.insert(name("memread"), sig(int(), int(), &[]));
        m.insert(name("memset"), sig(GroundType::prod(int(), int()), GroundType::Unit, &[]));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells() {
        let mut h = Heap::default();
        assert_eq!(h.handle("malloc", &GroundValue::Int(4)), Some(Reply::Return(GroundValue::Int(0))));
        let set = GroundValue::pair(GroundValue::Int(0), GroundValue::Int(9));
        assert_eq!(h.handle("memset", &set), Some(Reply::Return(GroundValue::Unit)));
        assert_eq!(h.handle("memread", &GroundValue::Int(0)), Some(Reply::Return(GroundValue::Int(9))));
        assert_eq!(h.handle("memread", &GroundValue::Int(3)), Some(Reply::Kill(name("SegFault"))));
    }
}
