//! `coop`: typecheck, run, trace and test programs with runners.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coop_core::check::describe_bindings;
use coop_core::containers::{check_compatible, by_name, Container, FsReal, FsSim, FsSimConfig};
use coop_core::corpus::{self, load};
use coop_core::equations::{mutations, run_schema, schemas, Schema};
use coop_core::eval::{run_toplevel, EvalError, Evaluation, Outcome};
use coop_core::parse::{parse_program_with, ParseOptions};

#[derive(Parser)]
#[command(name = "coop", version, about = "Interpreter for a calculus of effectful runners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and typecheck a program.
    Check {
        file: PathBuf,
        /// Print `name : type` for each top-level binding.
        #[arg(long)]
        emit_types: bool,
        /// Reject computations in value positions instead of hoisting them.
        #[arg(long)]
        strict_values: bool,
    },
    /// Run a program and print its outcome.
    Run(RunArgs),
    /// Run a program and print its event trace as JSON.
    Trace(RunArgs),
    /// Test the equational theory against the denotational oracle.
    EqTest {
        #[arg(long, env = "COOP_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Run only the schema with this id.
        #[arg(long)]
        schema: Option<String>,
        /// Run the deliberately unsound schemas; each must fail.
        #[arg(long)]
        mutations: bool,
    },
    /// Run the bundled examples and check the ill-typed ones are rejected.
    Corpus,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContainerName {
    Pure,
    State,
    FsSim,
    FsReal,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "pure")]
    container: ContainerName,
    /// Write the event trace as JSON to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// JSON configuration of the fs-sim container.
    #[arg(long)]
    fs_config: Option<PathBuf>,
    /// Directory confining the fs-real container.
    #[arg(long)]
    sandbox: Option<PathBuf>,
    /// Evaluate without typechecking.
    #[arg(long)]
    no_check: bool,
    /// Reject computations in value positions instead of hoisting them.
    #[arg(long)]
    strict_values: bool,
}

const EXIT_RAISE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_KILL: u8 = 3;
const EXIT_STATIC: u8 = 4;
const EXIT_STUCK: u8 = 5;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file, emit_types, strict_values } => cmd_check(&file, emit_types, strict_values),
        Command::Run(args) => cmd_run(&args, false),
        Command::Trace(args) => cmd_run(&args, true),
        Command::EqTest { seed, cases, schema, mutations } => cmd_eq_test(seed, cases, schema.as_deref(), mutations),
        Command::Corpus => cmd_corpus(),
    };
    ExitCode::from(code)
}

fn read(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_IO
    })
}

fn cmd_check(file: &Path, emit_types: bool, strict_values: bool) -> u8 {
    let src = match read(file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    match load(&src, ParseOptions { strict_values, ..ParseOptions::default() }) {
        Ok(loaded) => {
            if emit_types {
                for line in describe_bindings(&loaded.checked) {
                    println!("{line}");
                }
            }
            0
        }
        Err(ds) => {
            for d in ds {
                eprintln!("{}", d.render(&file.display().to_string()));
            }
            1
        }
    }
}

enum Top {
    Boxed(Box<dyn Container>),
    Sim(FsSim),
}

impl Top {
    fn container(&mut self) -> &mut dyn Container {
        match self {
            Top::Boxed(c) => c.as_mut(),
            Top::Sim(s) => s,
        }
    }
}

fn container(args: &RunArgs) -> Result<Top, u8> {
    Ok(match args.container {
        ContainerName::Pure => Top::Boxed(by_name("pure", None).expect("pure container")),
        ContainerName::State => Top::Boxed(by_name("state", None).expect("state container")),
        ContainerName::FsSim => {
            let config = match &args.fs_config {
                None => FsSimConfig::default(),
                Some(p) => serde_json::from_str(&read(p)?).map_err(|e| {
                    eprintln!("{}: {e}", p.display());
                    EXIT_IO
                })?,
            };
            Top::Sim(FsSim::new(config))
        }
        ContainerName::FsReal => {
            let Some(dir) = &args.sandbox else {
                eprintln!("the fs-real container needs --sandbox DIR");
                return Err(EXIT_IO);
            };
            Top::Boxed(Box::new(FsReal::new(dir)))
        }
    })
}

fn cmd_run(args: &RunArgs, trace_to_stdout: bool) -> u8 {
    let src = match read(&args.file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let file = args.file.display().to_string();
    let opts = ParseOptions { strict_values: args.strict_values, ..ParseOptions::default() };
    let mut top = match container(args) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let program = if args.no_check {
        match parse_program_with(&src, opts) {
            Ok(p) => p.assembled(),
            Err(d) => {
                eprintln!("{}", d.render(&file));
                return EXIT_STATIC;
            }
        }
    } else {
        let loaded = match load(&src, opts) {
            Ok(l) => l,
            Err(ds) => {
                for d in ds {
                    eprintln!("{}", d.render(&file));
                }
                return EXIT_STATIC;
            }
        };
        let needed = loaded.checked.program_type.as_ref().map(|t| t.ops.clone()).unwrap_or_default();
        if let Err(e) = check_compatible(top.container(), &needed, &loaded.program.tables.ops) {
            eprintln!("{file}: {e}");
            return EXIT_STATIC;
        }
        loaded.checked.elaborated.expect("checked program")
    };
    let Evaluation { outcome, session } = run_toplevel(top.container(), &program);
    let json = serde_json::to_string_pretty(&session.trace).expect("trace serialises");
    if trace_to_stdout {
        println!("{json}");
    }
    if let Some(path) = &args.trace {
        if let Err(e) = std::fs::write(path, json + "\n") {
            eprintln!("{}: {e}", path.display());
            return EXIT_IO;
        }
    }
    if let Top::Sim(sim) = &top {
        eprintln!("fs-sim: {}", serde_json::to_string(&sim.files).expect("files serialise"));
    }
    let report = |s: String| {
        if trace_to_stdout {
            eprintln!("{s}");
        } else {
            println!("{s}");
        }
    };
    match outcome {
        Ok(o) => {
            report(o.to_string());
            match o {
                Outcome::Return(_) => 0,
                Outcome::Raise(_) => EXIT_RAISE,
                Outcome::Kill(_) => EXIT_KILL,
            }
        }
        Err(e @ EvalError::UnhandledOperation(_)) => {
            eprintln!("{file}: {e}");
            EXIT_STATIC
        }
        Err(e) => {
            eprintln!("{file}: {e}");
            EXIT_STUCK
        }
    }
}

fn cmd_eq_test(seed: u64, cases: usize, only: Option<&str>, mutated: bool) -> u8 {
    let mut suite: Vec<Schema> = if mutated { mutations() } else { schemas() };
    if let Some(id) = only {
        suite.retain(|s| s.id == id);
        if suite.is_empty() {
            eprintln!("no schema `{id}`");
            return EXIT_IO;
        }
    }
    suite.sort_by_key(|s| s.id);
    println!("{:<20} {:<9} {:>6} {:>9} {:>8}  result", "schema", "group", "cases", "failures", "invalid");
    let mut bad = 0;
    for s in &suite {
        let r = run_schema(s, seed, cases);
        // A mutation passes when the suite catches it.
        let ok = if mutated { r.failures > 0 } else { r.failures == 0 && r.cases == cases };
        println!(
            "{:<20} {:<9} {:>6} {:>9} {:>8}  {}",
            s.id,
            s.group,
            r.cases,
            r.failures,
            r.invalid,
            if ok { "pass" } else { "FAIL" }
        );
        if !ok {
            bad += 1;
            if let Some(c) = &r.counterexample {
                eprintln!("{}: {c}", s.id);
            }
        }
    }
    let what = if mutated { "mutations caught" } else { "schemas hold" };
    println!("{} of {} {what} (seed {seed})", suite.len() - bad, suite.len());
    u8::from(bad > 0)
}

fn cmd_corpus() -> u8 {
    let mut bad = 0;
    for ex in corpus::examples() {
        let (ok, got) = match corpus::run_example(&ex) {
            Ok(r) => (r.outcome == ex.expected, r.outcome),
            Err(e) => (false, e),
        };
        println!("{:<22} {:<5} {got}", ex.name, if ok { "pass" } else { "FAIL" });
        bad += usize::from(!ok);
    }
    for n in corpus::negatives() {
        let (ok, got) = match corpus::check_negative(&n) {
            Ok(ds) => {
                let first = ds.first().map(|d| d.render(n.name)).unwrap_or_default();
                (ds.iter().any(|d| d.rule == n.rule), first)
            }
            Err(e) => (false, e),
        };
        println!("{:<22} {:<5} {got}", n.name, if ok { "pass" } else { "FAIL" });
        bad += usize::from(!ok);
    }
    u8::from(bad > 0)
}
