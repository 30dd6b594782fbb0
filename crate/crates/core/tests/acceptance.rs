//! Runs the eight acceptance criteria and prints one line per criterion.

use coop_core::criteria::{self, Verdict};

type Check = (&'static str, fn(u64) -> Verdict);

fn main() {
    let seed = std::env::var("COOP_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7);
    let checks: Vec<Check> = vec![
        ("corpus", |_| criteria::corpus()),
        ("equations", |s| criteria::equations(s, 100)),
        ("agreement", |s| criteria::agreement(s, 2000)),
        ("finalisation", |s| criteria::finalisation(s, 1000)),
        ("runner-morphism", |s| criteria::round_trips(s, 24)),
        ("monad-laws", |s| criteria::monad_laws(s, 500)),
        ("resources", |s| criteria::resources(s, 50)),
        ("affinity", |s| criteria::affinity(s, 1000)),
    ];
    let mut failed = 0;
    for (i, (label, check)) in checks.into_iter().enumerate() {
        let v = check(seed);
        println!("criterion {} {label}: {} ({})", i + 1, if v.pass { "pass" } else { "FAIL" }, v.summary);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
