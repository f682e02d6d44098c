//! Benchmark harness: one child `solve` process per (graph, k), killed at the
//! time limit and started under an address-space limit.

use std::io::{self, Read};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use gics_core::bench::{clause_scaling, par2, BenchRecord, ClauseScalingRow, RunStatus};
use gics_core::oracle;
use gics_core::Graph;

use crate::{load_graph, write_json, BenchArgs, CliError, CliResult, EXIT_PARSE, EXIT_RESOURCE, EXIT_USAGE};

/// Largest number of failure sets the harness enumerates when verifying.
const VERIFY_LIMIT: usize = 200_000;
const POLL: Duration = Duration::from_millis(5);

pub fn limit_address_space(bytes: u64) -> io::Result<()> {
    let lim = libc::rlimit { rlim_cur: bytes as libc::rlim_t, rlim_max: bytes as libc::rlim_t };
    // SAFETY: setrlimit only reads the struct passed by pointer.
    if unsafe { libc::setrlimit(libc::RLIMIT_AS, &lim) } == 0 {
        Ok(())
    } else {
        Err(io::Error::last_os_error())
    }
}

/// Graph paths listed in a manifest, resolved against its directory.
pub fn read_manifest(path: &Path) -> CliResult<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| dir.join(l))
        .collect())
}

#[derive(Debug)]
pub struct ChildRun {
    pub status: RunStatus,
    pub wall_seconds: f64,
    pub stdout: String,
}

/// Runs `solver` with `args`, killing it once `time_limit` seconds pass.
pub fn run_limited(solver: &Path, args: &[String], time_limit: f64, mem_limit: u64) -> io::Result<ChildRun> {
    let mut cmd = Command::new(solver);
    cmd.args(args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null());
    // SAFETY: the closure only calls setrlimit, which is async-signal-safe.
    unsafe {
        cmd.pre_exec(move || limit_address_space(mem_limit));
    }
    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let mut pipe = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = pipe.read_to_string(&mut s);
        s
    });

    let limit = Duration::from_secs_f64(time_limit);
    let mut killed = false;
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= limit {
            child.kill()?;
            killed = true;
            break child.wait()?;
        }
        thread::sleep(POLL);
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    let stdout = reader.join().unwrap_or_default();

    let status = if killed {
        RunStatus::Timeout
    } else {
        match exit.code() {
            Some(0) => RunStatus::Solved,
            Some(EXIT_RESOURCE) => RunStatus::Timeout,
            Some(EXIT_USAGE) | Some(EXIT_PARSE) => RunStatus::EncodeFail,
            // allocation failure under the address-space limit aborts the child
            _ => RunStatus::Memout,
        }
    };
    Ok(ChildRun { status, wall_seconds, stdout })
}

#[derive(Debug, Serialize)]
pub struct ScalingEntry {
    pub instance: String,
    pub rows: Vec<ClauseScalingRow>,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub time_limit: f64,
    pub mem_limit: u64,
    pub records: Vec<BenchRecord>,
    pub par2: Option<f64>,
    pub clause_scaling: Vec<ScalingEntry>,
}

fn failed_record(instance: &str, g: Option<&Graph>, k: usize, status: RunStatus, wall: f64) -> BenchRecord {
    BenchRecord {
        instance: instance.to_string(),
        n: g.map_or(0, Graph::n),
        m: g.map_or(0, Graph::m),
        k,
        method: "gismo".into(),
        status,
        wall_seconds: wall,
        sensor_count: None,
        verified: None,
        queries: None,
        conflicts: None,
        budget_exhaustions: None,
    }
}

fn solved_record(instance: &str, g: &Graph, k: usize, run: &ChildRun, verify: bool) -> CliResult<BenchRecord> {
    let v: serde_json::Value = serde_json::from_str(&run.stdout)
        .map_err(|e| CliError::parse(format!("child output for {instance} k={k}: {e}")))?;
    let sensors: Vec<String> = v["sensors"]
        .as_array()
        .map(|a| a.iter().filter_map(|s| s.as_str().map(str::to_string)).collect())
        .unwrap_or_default();
    let feasible = oracle::count_subsets_up_to(g.n(), k).is_some_and(|c| c <= VERIFY_LIMIT as u128);
    let verified = if verify && feasible {
        let nodes =
            sensors.iter().map(|s| g.node_by_label(s)).collect::<Result<Vec<_>, _>>().map_err(CliError::parse)?;
        Some(oracle::is_gics(g, &nodes, k, VERIFY_LIMIT)?)
    } else {
        None
    };
    Ok(BenchRecord {
        sensor_count: Some(sensors.len()),
        verified,
        queries: v["queries"].as_u64(),
        conflicts: v["conflicts"].as_u64(),
        budget_exhaustions: v["budget_exhaustions"].as_u64(),
        ..failed_record(instance, Some(g), k, RunStatus::Solved, run.wall_seconds)
    })
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    if !(args.time_limit.is_finite() && args.time_limit > 0.0) {
        return Err(CliError::usage(format!("bad time limit {}", args.time_limit)));
    }
    if args.k.contains(&0) {
        return Err(CliError::usage("k must be at least 1"));
    }
    let solver = std::env::current_exe()?;
    let graphs = read_manifest(&args.manifest)?;
    let mut records = Vec::new();
    let mut scaling = Vec::new();

    for path in &graphs {
        let instance = path.display().to_string();
        let graph = match load_graph(path, None) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("{e}");
                for &k in &args.k {
                    records.push(failed_record(&instance, None, k, RunStatus::EncodeFail, 0.0));
                }
                continue;
            }
        };
        let ks: Vec<usize> = args.k.iter().copied().filter(|&k| k <= graph.n()).collect();
        if !ks.is_empty() {
            scaling.push(ScalingEntry { instance: instance.clone(), rows: clause_scaling(&graph, &ks)? });
        }
        for &k in &args.k {
            let mut child_args = vec![
                "solve".to_string(),
                instance.clone(),
                "--k".into(),
                k.to_string(),
                "--time-limit".into(),
                args.time_limit.to_string(),
            ];
            child_args.extend(args.options.to_args());
            let run = run_limited(&solver, &child_args, args.time_limit, args.mem_limit)?;
            let record = match run.status {
                RunStatus::Solved => solved_record(&instance, &graph, k, &run, args.verify)?,
                other => failed_record(&instance, Some(&graph), k, other, run.wall_seconds),
            };
            eprintln!(
                "{:<40} k={:<3} {:<12} {:>9.3}s  |S|={}",
                instance,
                k,
                format!("{:?}", record.status).to_lowercase(),
                record.wall_seconds,
                record.sensor_count.map_or("-".into(), |c| c.to_string()),
            );
            records.push(record);
        }
    }

    let report = BenchReport {
        time_limit: args.time_limit,
        mem_limit: args.mem_limit,
        par2: par2(&records, args.time_limit),
        records,
        clause_scaling: scaling,
    };
    if let Some(p) = &args.csv {
        let mut w = csv::Writer::from_path(p).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))?;
        for r in &report.records {
            w.serialize(r).map_err(CliError::parse)?;
        }
        w.flush()?;
    }
    if let Some(score) = report.par2 {
        eprintln!("PAR-2: {score:.3}");
    }
    write_json(args.output.as_deref(), &report)
}
