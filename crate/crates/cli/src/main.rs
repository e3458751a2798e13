mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use indlearn::automata::Dfa;
use indlearn::format::{load_dfa, load_transducer, write_dfa};
use indlearn::learner::{LearnOutcome, Learner, LearnerConfig, RsStrategy};
use indlearn::teachers::{check_invariant, check_separator, Baseline, RmcTeacher, SeparationTeacher, Teacher, TeacherError};
use indlearn::transducer::RmcModel;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_TIMEOUT: u8 = 2;
pub const EXIT_UNSAFE: u8 = 3;

#[derive(Parser)]
#[command(name = "indlearn", version, about = "Learn regular separators and inductive invariants")]
struct Cli {
    /// Log level (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a separator or an inductive invariant.
    Learn(LearnArgs),
    /// Check a candidate separator or invariant.
    Check(CheckArgs),
    /// Run the learner over a directory of models and write a CSV.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sep,
    Rmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TeacherKind {
    Idmat,
    Strict,
    Nonstrict,
}

impl TeacherKind {
    pub fn name(self) -> &'static str {
        match self {
            TeacherKind::Idmat => "idmat",
            TeacherKind::Strict => "strict",
            TeacherKind::Nonstrict => "nonstrict",
        }
    }
}

#[derive(Args, Clone, Debug)]
struct ModelArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Words the answer must accept (sep mode).
    #[arg(long)]
    pos: Option<PathBuf>,
    /// Words the answer must reject (sep mode).
    #[arg(long)]
    neg: Option<PathBuf>,
    /// Initial configurations (rmc mode).
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Bad configurations (rmc mode).
    #[arg(long)]
    bad: Option<PathBuf>,
    /// Length-preserving step transducer (rmc mode).
    #[arg(long)]
    step: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "small", value_parser = parse_rs)]
    rs: RsStrategy,
    #[arg(long, value_enum, default_value = "idmat")]
    teacher: TeacherKind,
    #[arg(long)]
    timeout_secs: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    max_refinements: usize,
    /// Where to write the learned automaton (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write run statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the final clause set in DIMACS format.
    #[arg(long)]
    dump_cnf: Option<PathBuf>,
    /// Write the final observation table.
    #[arg(long)]
    dump_table: Option<PathBuf>,
    /// Check every model and refinement against the encoding's guarantees.
    #[arg(long)]
    self_check: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    invariant: PathBuf,
}

fn parse_rs(s: &str) -> Result<RsStrategy, String> {
    s.parse()
}

enum Problem {
    Sep(Dfa, Dfa),
    Rmc(RmcModel),
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str, mode: &str) -> Result<&'a Path> {
    match p {
        Some(p) => Ok(p),
        None => bail!("--{flag} is required in {mode} mode"),
    }
}

fn load_problem(m: &ModelArgs) -> Result<Problem> {
    match m.mode {
        Mode::Sep => {
            let pos = load_dfa(need(&m.pos, "pos", "sep")?)?;
            let neg = load_dfa(need(&m.neg, "neg", "sep")?)?;
            Ok(Problem::Sep(pos, neg))
        }
        Mode::Rmc => {
            let initial = load_dfa(need(&m.initial, "initial", "rmc")?)?;
            let bad = load_dfa(need(&m.bad, "bad", "rmc")?)?;
            let step = load_transducer(need(&m.step, "step", "rmc")?)?;
            Ok(Problem::Rmc(RmcModel::new(initial, bad, step)?))
        }
    }
}

#[derive(Serialize)]
pub struct StatsJson {
    pub mode: &'static str,
    pub result: &'static str,
    pub mem_queries: u64,
    pub mem_hint_queries: u64,
    pub val_queries: u64,
    pub sat_calls: u64,
    pub unsat_cores: u64,
    pub prefix_count: usize,
    pub suffix_count: usize,
    pub hypothesis_states: usize,
    pub wall_ms: u64,
    pub rs_strategy: &'static str,
    pub teacher: &'static str,
}

fn build_teacher(problem: Problem, kind: TeacherKind) -> Result<Box<dyn Teacher>, TeacherError> {
    let inner: Box<dyn Teacher> = match problem {
        Problem::Sep(pos, neg) => Box::new(SeparationTeacher::new(pos, neg)?),
        Problem::Rmc(model) => Box::new(RmcTeacher::new(model)),
    };
    Ok(match kind {
        TeacherKind::Idmat => inner,
        TeacherKind::Strict => Box::new(Baseline::strict(inner)),
        TeacherKind::Nonstrict => Box::new(Baseline::non_strict(inner)),
    })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Sep => "sep",
        Mode::Rmc => "rmc",
    }
}

fn cmd_learn(args: &LearnArgs) -> Result<u8> {
    let problem = load_problem(&args.model)?;
    let sigma = match &problem {
        Problem::Sep(p, _) => p.alphabet().clone(),
        Problem::Rmc(m) => m.alphabet().clone(),
    };
    let mut teacher = match build_teacher(problem, args.teacher) {
        Ok(t) => t,
        Err(TeacherError::Unsafe(w)) => {
            eprintln!("no separator exists: {} is in both languages", sigma.render(&w));
            return Ok(EXIT_UNSAFE);
        }
        Err(e) => return Err(e.into()),
    };
    let config = LearnerConfig {
        rs_strategy: args.rs,
        max_refinements: args.max_refinements,
        timeout: args.timeout_secs.map(Duration::from_secs),
        self_check: args.self_check,
        ..LearnerConfig::default()
    };
    let mut learner = Learner::new(teacher.as_mut(), config);
    let outcome = learner.run();
    let stats = learner.stats();
    if let Some(path) = &args.dump_table {
        fs::write(path, learner.table().dump()).with_context(|| path.display().to_string())?;
    }
    if let Some(path) = &args.dump_cnf {
        let mut buf = Vec::new();
        learner.encoder().write_dimacs(&mut buf)?;
        fs::write(path, buf).with_context(|| path.display().to_string())?;
    }
    drop(learner);
    let (result, code) = match &outcome {
        LearnOutcome::Success(_) => ("valid", EXIT_OK),
        LearnOutcome::Timeout => ("timeout", EXIT_TIMEOUT),
        LearnOutcome::Unsafe(_) => ("unsafe", EXIT_UNSAFE),
        LearnOutcome::ContractViolation(_) => ("error", EXIT_ERROR),
    };
    if let Some(path) = &args.stats {
        let json = StatsJson {
            mode: mode_name(args.model.mode),
            result,
            mem_queries: stats.mem_queries,
            mem_hint_queries: stats.mem_hint_queries,
            val_queries: stats.val_queries,
            sat_calls: stats.sat_calls,
            unsat_cores: stats.unsat_cores,
            prefix_count: stats.prefix_count,
            suffix_count: stats.suffix_count,
            hypothesis_states: stats.hypothesis_states,
            wall_ms: stats.wall_ms,
            rs_strategy: args.rs.name(),
            teacher: args.teacher.name(),
        };
        fs::write(path, serde_json::to_string_pretty(&json)? + "\n").with_context(|| path.display().to_string())?;
    }
    match outcome {
        LearnOutcome::Success(h) => {
            // the baselines answer with a modified membership oracle, so
            // re-check against the unmodified conditions
            if let Some(f) = teacher.check(&h)? {
                bail!("learned automaton fails the check: {}", f.describe(&sigma));
            }
            let text = write_dfa(&h.minimize());
            match &args.out {
                Some(path) => fs::write(path, text).with_context(|| path.display().to_string())?,
                None => print!("{text}"),
            }
            log::info!("learned {} states in {} ms", stats.hypothesis_states, stats.wall_ms);
        }
        LearnOutcome::Timeout => eprintln!("timeout after {} ms", stats.wall_ms),
        LearnOutcome::Unsafe(w) => eprintln!("unsafe: {} is both reachable and bad", sigma.render(&w)),
        LearnOutcome::ContractViolation(msg) => eprintln!("error: {msg}"),
    }
    Ok(code)
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let problem = load_problem(&args.model)?;
    let h = load_dfa(&args.invariant)?;
    let failure = match &problem {
        Problem::Sep(pos, neg) => check_separator(pos, neg, &h)?,
        Problem::Rmc(model) => check_invariant(model, &h)?,
    };
    match failure {
        None => {
            println!("ok");
            Ok(EXIT_OK)
        }
        Some(f) => {
            println!("{}", f.describe(h.alphabet()));
            Ok(EXIT_UNSAFE)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let result = match &cli.command {
        Command::Learn(a) => cmd_learn(a),
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
