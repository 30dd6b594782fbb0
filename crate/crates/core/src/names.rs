//! Identifiers and fresh-name supply.
//!
//! Every binder is renamed at parse time to `base~n`, where `n` comes from a
//! per-session monotone counter. The `~` cannot appear in source
//! identifiers, so renamed binders never clash with user names.

use std::sync::Arc;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// The user-facing part of a name: `x~3` becomes `x`.
pub fn base_name(n: &str) -> &str {
    match n.find('~') {
        Some(i) => &n[..i],
        None => n,
    }
}

/// Like [`base_name`], kept separate so printing policy can change.
pub fn display_name(n: &str) -> &str {
    base_name(n)
}

/// A name as it is written back into source text: `x~3` becomes `x__3`.
pub fn source_name(n: &str) -> String {
    n.replace('~', "__")
}

/// Deterministic supply of fresh binder names.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: u64,
}

impl Fresh {
    pub fn new() -> Self {
        Fresh { next: 0 }
    }

    pub fn starting_at(next: u64) -> Self {
        Fresh { next }
    }

    pub fn counter(&self) -> u64 {
        self.next
    }

    pub fn rename(&mut self, base: &str) -> Name {
        let n = self.next;
        self.next += 1;
        Arc::from(format!("{}~{}", base_name(base), n).as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_are_distinct_and_keep_base() {
        let mut f = Fresh::new();
        let a = f.rename("x");
        let b = f.rename("x~0");
        assert_ne!(a, b);
        assert_eq!(base_name(&a), "x");
        assert_eq!(base_name(&b), "x");
        assert_eq!(source_name(&b), "x__1");
    }
}
