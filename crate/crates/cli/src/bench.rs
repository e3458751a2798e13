//! Runs `learn` as a child process per (model, config, repeat) so that each
//! run gets its own wall-clock and memory limits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::{TeacherKind, EXIT_OK, EXIT_TIMEOUT, EXIT_UNSAFE};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory with one subdirectory per model.
    #[arg(long)]
    models: PathBuf,
    /// Comma-separated strategies, each optionally suffixed with
    /// `:teacher` (e.g. `small,off:strict`).
    #[arg(long, default_value = "small,short,off")]
    configs: String,
    /// Teachers paired with every strategy that names none.
    #[arg(long, default_value = "idmat")]
    teachers: String,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Per-run wall-clock limit.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Per-run address-space limit.
    #[arg(long)]
    mem_limit_mb: Option<u64>,
}

#[derive(Serialize, Default, Clone)]
struct Row {
    model: String,
    config: String,
    repeat: usize,
    result: String,
    wall_ms: Option<u64>,
    mem: Option<u64>,
    mem_hints: Option<u64>,
    val: Option<u64>,
    sat_calls: Option<u64>,
    cores: Option<u64>,
    states: Option<usize>,
}

#[derive(Deserialize)]
struct ChildStats {
    result: String,
    mem_queries: u64,
    mem_hint_queries: u64,
    val_queries: u64,
    sat_calls: u64,
    unsat_cores: u64,
    hypothesis_states: usize,
    wall_ms: u64,
}

struct Job {
    model: String,
    files: Vec<String>,
    rs: String,
    teacher: TeacherKind,
    repeat: usize,
}

fn model_files(dir: &Path) -> Option<Vec<String>> {
    let path = |f: &str| dir.join(f).display().to_string();
    if dir.join("s0.aut").is_file() {
        Some(vec![
            "--mode".into(),
            "rmc".into(),
            "--initial".into(),
            path("s0.aut"),
            "--bad".into(),
            path("sb.aut"),
            "--step".into(),
            path("step.trd"),
        ])
    } else if dir.join("pos.aut").is_file() {
        Some(vec![
            "--mode".into(),
            "sep".into(),
            "--pos".into(),
            path("pos.aut"),
            "--neg".into(),
            path("neg.aut"),
        ])
    } else {
        None
    }
}

fn parse_teacher(s: &str) -> Result<TeacherKind> {
    Ok(match s {
        "idmat" => TeacherKind::Idmat,
        "strict" => TeacherKind::Strict,
        "nonstrict" => TeacherKind::Nonstrict,
        _ => bail!("unknown teacher `{s}`"),
    })
}

fn parse_configs(configs: &str, teachers: &str) -> Result<Vec<(String, TeacherKind)>> {
    let default: Vec<TeacherKind> = teachers
        .split(',')
        .filter(|t| !t.is_empty())
        .map(parse_teacher)
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for item in configs.split(',').filter(|c| !c.is_empty()) {
        let (rs, teacher) = match item.split_once(':') {
            Some((rs, t)) => (rs, Some(parse_teacher(t)?)),
            None => (item, None),
        };
        rs.parse::<indlearn::learner::RsStrategy>().map_err(anyhow::Error::msg)?;
        match teacher {
            Some(t) => out.push((rs.to_string(), t)),
            None => out.extend(default.iter().map(|&t| (rs.to_string(), t))),
        }
    }
    Ok(out)
}

fn spawn(job: &Job, args: &BenchArgs, stats: &Path) -> std::io::Result<Child> {
    let exe = std::env::current_exe()?;
    let mut cmd = Command::new(exe);
    cmd.arg("learn")
        .args(&job.files)
        .args(["--rs", &job.rs, "--teacher", job.teacher.name()])
        .args(["--timeout-secs", &args.timeout_secs.to_string()])
        .arg("--stats")
        .arg(stats)
        .stdout(Stdio::null())
        .stderr(Stdio::null());
    #[cfg(unix)]
    if let Some(mb) = args.mem_limit_mb {
        use std::os::unix::process::CommandExt;
        let bytes = mb.saturating_mul(1 << 20) as libc::rlim_t;
        // SAFETY: only async-signal-safe calls between fork and exec
        unsafe {
            cmd.pre_exec(move || {
                let lim = libc::rlimit {
                    rlim_cur: bytes,
                    rlim_max: bytes,
                };
                if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
                Ok(())
            });
        }
    }
    cmd.spawn()
}

fn run_job(job: &Job, args: &BenchArgs, scratch: &Path, index: usize) -> Row {
    let mut row = Row {
        model: job.model.clone(),
        config: format!("{}-{}", job.rs, job.teacher.name()),
        repeat: job.repeat,
        ..Row::default()
    };
    let stats_path = scratch.join(format!("run{index}.json"));
    let start = Instant::now();
    let mut child = match spawn(job, args, &stats_path) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("{}: cannot start run: {e}", job.model);
            row.result = "error".into();
            return row;
        }
    };
    // a few seconds of grace beyond the child's own deadline
    let limit = Duration::from_secs(args.timeout_secs) + Duration::from_secs(5);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if start.elapsed() > limit => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(_) => break None,
        }
    };
    let wall = start.elapsed().as_millis() as u64;
    let parsed: Option<ChildStats> = fs::read_to_string(&stats_path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok());
    row.result = match status.and_then(|s| s.code()) {
        Some(c) if c == i32::from(EXIT_OK) => "valid",
        Some(c) if c == i32::from(EXIT_TIMEOUT) => "timeout",
        Some(c) if c == i32::from(EXIT_UNSAFE) => "unsafe",
        Some(_) => "error",
        // killed by the wall-clock limit or by a signal (memory limit)
        None => {
            if start.elapsed() > limit {
                "timeout"
            } else {
                "error"
            }
        }
    }
    .into();
    row.wall_ms = Some(wall);
    if let Some(s) = parsed {
        debug_assert!(s.result == row.result || row.result == "error");
        row.wall_ms = Some(s.wall_ms);
        row.mem = Some(s.mem_queries);
        row.mem_hints = Some(s.mem_hint_queries);
        row.val = Some(s.val_queries);
        row.sat_calls = Some(s.sat_calls);
        row.cores = Some(s.unsat_cores);
        row.states = Some(s.hypothesis_states);
    }
    let _ = fs::remove_file(&stats_path);
    row
}

pub fn run(args: &BenchArgs) -> Result<u8> {
    let configs = parse_configs(&args.configs, &args.teachers)?;
    let entries = fs::read_dir(&args.models).with_context(|| args.models.display().to_string())?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let mut rows = Vec::new();
    let mut jobs = Vec::new();
    for dir in &dirs {
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let readable = fs::read_dir(dir).is_ok();
        match model_files(dir).filter(|_| readable) {
            Some(files) => {
                for (rs, teacher) in &configs {
                    for repeat in 0..args.repeats {
                        jobs.push(Job {
                            model: name.clone(),
                            files: files.clone(),
                            rs: rs.clone(),
                            teacher: *teacher,
                            repeat,
                        });
                    }
                }
            }
            None => {
                eprintln!("warning: skipping {}: no readable model files", dir.display());
                rows.push(Row {
                    model: name,
                    result: "error".into(),
                    ..Row::default()
                });
            }
        }
    }
    let scratch = std::env::temp_dir().join(format!("indlearn-bench-{}", std::process::id()));
    fs::create_dir_all(&scratch)?;
    let next = AtomicUsize::new(0);
    let results = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..args.jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let row = run_job(job, args, &scratch, i);
                log::info!("{} {} #{}: {}", row.model, row.config, row.repeat, row.result);
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let _ = fs::remove_dir_all(&scratch);
    rows.extend(results.into_inner().unwrap().into_iter().flatten());
    let mut w = csv::Writer::from_path(&args.out).with_context(|| args.out.display().to_string())?;
    if rows.is_empty() {
        w.write_record(["model", "config", "repeat", "result", "wall_ms", "mem", "mem_hints", "val", "sat_calls", "cores", "states"])?;
    }
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}
