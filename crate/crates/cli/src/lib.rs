//! Command-line front end: `encode`, `solve`, `verify` and `bench`.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gics_core::encoder::group_comments;
use gics_core::gismo::{run_gismo_until, GismoError, GroupLog};
use gics_core::graph::parse_graph;
use gics_core::oracle::{self, OracleError};
use gics_core::satcore::dimacs::write_dimacs;
use gics_core::{
    encode_instance, ConflictBudget, EncodeError, EncodedInstance, GismoConfig, Graph, GraphFormat, GroupOrder,
    InnerOrder, NodeId,
};

pub mod harness;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
/// `verify` ran to completion and the sensor set is not a GICS.
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_USAGE, message: msg.to_string() }
    }

    pub fn parse(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_PARSE, message: msg.to_string() }
    }

    pub fn resource(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_RESOURCE, message: msg.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::parse(format!("I/O error: {e}"))
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        CliError::usage(e)
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::LimitExceeded { .. } => CliError::resource(e),
            _ => CliError::usage(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gismo", version, about = "Sensor placement via grouped independent support")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the CNF encoding as DIMACS plus a JSON sidecar.
    Encode(EncodeArgs),
    /// Compute a sensor set and print it as JSON.
    Solve(SolveArgs),
    /// Check a sensor set by brute force.
    Verify(VerifyArgs),
    /// Run `solve` over a manifest of graphs and report PAR-2.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph file (edge list or Matrix Market)
    pub graph: PathBuf,
    /// Failure bound
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Input format; inferred from the extension when omitted
    #[arg(long, value_parser = parse_format)]
    pub format: Option<GraphFormat>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// DIMACS output path (stdout when omitted)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Sidecar path; defaults to `<output>.json`
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveOptions {
    /// Conflicts per definability query
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// input, deg-desc, deg-asc, random, or a comma-separated label list
    #[arg(long, default_value = "input")]
    pub order: OrderArg,
    /// Seed for `--order random`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Which group variable to test first
    #[arg(long, default_value = "y-first", value_parser = parse_inner)]
    pub inner: InnerOrder,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[command(flatten)]
    pub options: SolveOptions,
    /// Wall-clock limit in seconds
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Address-space limit, e.g. `4G` or `512M`
    #[arg(long, value_parser = parse_bytes)]
    pub mem_limit: Option<u64>,
    /// Write JSON here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Include wall time in the JSON (makes output run-dependent)
    #[arg(long)]
    pub timing: bool,
    /// Include the per-group query log
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Comma-separated sensor labels
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub sensors: Vec<String>,
    /// Cap on enumerated subsets and projected models
    #[arg(long, default_value_t = oracle::DEFAULT_LIMIT)]
    pub limit: usize,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One graph path per line, relative to the manifest; `#` starts a comment
    pub manifest: PathBuf,
    /// Failure bounds to run for each graph
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub k: Vec<usize>,
    #[command(flatten)]
    pub options: SolveOptions,
    /// Per-run wall-clock limit in seconds
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Per-run address-space limit
    #[arg(long, default_value = "4G", value_parser = parse_bytes)]
    pub mem_limit: u64,
    /// Verify solved runs with the brute-force oracle when it is feasible
    #[arg(long)]
    pub verify: bool,
    /// Write the JSON report here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the records as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderArg {
    Input,
    DegDesc,
    DegAsc,
    Random,
    Labels(Vec<String>),
}

impl FromStr for OrderArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "input" => OrderArg::Input,
            "deg-desc" => OrderArg::DegDesc,
            "deg-asc" => OrderArg::DegAsc,
            "random" => OrderArg::Random,
            _ if s.contains(',') => OrderArg::Labels(s.split(',').map(|t| t.trim().to_string()).collect()),
            _ => return Err(format!("unknown order `{s}`")),
        })
    }
}

impl fmt::Display for OrderArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderArg::Input => f.write_str("input"),
            OrderArg::DegDesc => f.write_str("deg-desc"),
            OrderArg::DegAsc => f.write_str("deg-asc"),
            OrderArg::Random => f.write_str("random"),
            OrderArg::Labels(l) => f.write_str(&l.join(",")),
        }
    }
}

fn parse_format(s: &str) -> Result<GraphFormat, String> {
    s.parse::<GraphFormat>().map_err(|e| e.to_string())
}

fn parse_inner(s: &str) -> Result<InnerOrder, String> {
    match s {
        "y-first" => Ok(InnerOrder::YFirst),
        "x-first" => Ok(InnerOrder::XFirst),
        _ => Err(format!("expected `y-first` or `x-first`, got `{s}`")),
    }
}

/// Byte counts with an optional `K`, `M`, `G` or `T` suffix (powers of 1024).
pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let (digits, shift) = match t.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&t[..t.len() - 1], 10),
        Some('M') => (&t[..t.len() - 1], 20),
        Some('G') => (&t[..t.len() - 1], 30),
        Some('T') => (&t[..t.len() - 1], 40),
        _ => (t, 0),
    };
    let base: u64 = digits.trim().parse().map_err(|_| format!("bad size `{s}`"))?;
    base.checked_mul(1u64 << shift).ok_or_else(|| format!("size `{s}` overflows"))
}

impl SolveOptions {
    pub fn config(&self, g: &Graph) -> CliResult<GismoConfig> {
        let order = match &self.order {
            OrderArg::Input => GroupOrder::Input,
            OrderArg::DegDesc => GroupOrder::DegreeDescending,
            OrderArg::DegAsc => GroupOrder::DegreeAscending,
            OrderArg::Random => GroupOrder::Random(self.seed),
            OrderArg::Labels(labels) => GroupOrder::Explicit(
                labels.iter().map(|l| g.node_by_label(l).map_err(CliError::usage)).collect::<CliResult<_>>()?,
            ),
        };
        Ok(GismoConfig {
            budget: ConflictBudget::new(self.budget).map_err(CliError::usage)?,
            order,
            inner_order: self.inner,
            ..Default::default()
        })
    }

    /// Flags that reproduce these options on a child `solve` invocation.
    pub fn to_args(&self) -> Vec<String> {
        let inner = match self.inner {
            InnerOrder::YFirst => "y-first",
            InnerOrder::XFirst => "x-first",
        };
        vec![
            "--budget".into(),
            self.budget.to_string(),
            "--order".into(),
            self.order.to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--inner".into(),
            inner.into(),
        ]
    }
}

pub fn load_graph(path: &Path, format: Option<GraphFormat>) -> CliResult<Graph> {
    let format = format.unwrap_or_else(|| GraphFormat::from_path(path));
    let file = File::open(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    parse_graph(BufReader::new(file), format).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn load_instance(input: &GraphArgs) -> CliResult<(Graph, EncodedInstance)> {
    let g = load_graph(&input.graph, input.format)?;
    let k = usize::try_from(input.k).map_err(CliError::usage)?;
    let inst = encode_instance(&g, k)?;
    Ok((g, inst))
}

fn graph_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(CliError::parse)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct GroupEntry {
    pub label: String,
    pub node: u32,
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Serialize)]
pub struct EncodeSidecar {
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub num_vars: u32,
    pub num_clauses: usize,
    pub detection_clauses: usize,
    pub cardinality_clauses: usize,
    pub aux_vars: usize,
    pub solver_queries: u64,
    pub groups: Vec<GroupEntry>,
}

pub fn encode_sidecar(name: String, inst: &EncodedInstance) -> EncodeSidecar {
    let g = &inst.graph;
    EncodeSidecar {
        graph: name,
        n: g.n(),
        m: g.m(),
        k: inst.k,
        num_vars: inst.formula.num_vars(),
        num_clauses: inst.formula.num_clauses(),
        detection_clauses: inst.detection_clauses,
        cardinality_clauses: inst.cardinality_clauses,
        aux_vars: inst.varmap.aux.len(),
        solver_queries: 0,
        groups: g
            .nodes()
            .map(|v| {
                let (x, y) = inst.partition.group(v);
                GroupEntry { label: g.label(v).to_string(), node: v.0, x: x.id(), y: y.id() }
            })
            .collect(),
    }
}

pub fn cmd_encode(args: &EncodeArgs) -> CliResult<()> {
    let (_, inst) = load_instance(&args.input)?;
    let mut out = open_output(args.output.as_deref())?;
    write_dimacs(&mut out, &inst.formula, &group_comments(&inst))?;
    out.flush()?;
    let sidecar = args.sidecar.clone().or_else(|| {
        args.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = sidecar {
        write_json(Some(&path), &encode_sidecar(graph_name(&args.input.graph), &inst))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ConfigRecord {
    pub budget: u64,
    pub order: String,
    pub seed: u64,
    pub inner: InnerOrder,
}

#[derive(Debug, Serialize)]
pub struct SolveRecord {
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub config: ConfigRecord,
    pub sensor_count: usize,
    pub sensors: Vec<String>,
    pub queries: u64,
    pub conflicts: u64,
    pub budget_exhaustions: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_group_log: Option<Vec<GroupLog>>,
}

pub fn solve_record(args: &SolveArgs) -> CliResult<SolveRecord> {
    let start = Instant::now();
    let deadline = match args.time_limit {
        Some(t) if t.is_finite() && t > 0.0 => Some(start + Duration::from_secs_f64(t)),
        Some(t) => return Err(CliError::usage(format!("bad time limit {t}"))),
        None => None,
    };
    let (g, inst) = load_instance(&args.input)?;
    let cfg = args.options.config(&g)?;
    let res = run_gismo_until(&inst, &cfg, deadline).map_err(|e| match e {
        GismoError::Deadline { .. } => CliError::resource(format!("time limit reached: {e}")),
        other => CliError::usage(other),
    })?;
    Ok(SolveRecord {
        graph: graph_name(&args.input.graph),
        n: g.n(),
        m: g.m(),
        k: inst.k,
        config: ConfigRecord {
            budget: args.options.budget,
            order: args.options.order.to_string(),
            seed: args.options.seed,
            inner: args.options.inner,
        },
        sensor_count: res.sensor_set.len(),
        sensors: res.sensor_labels,
        queries: res.total_queries,
        conflicts: res.total_conflicts,
        budget_exhaustions: res.budget_exhaustions,
        wall_seconds: args.timing.then(|| start.elapsed().as_secs_f64()),
        per_group_log: args.log.then_some(res.per_group_log),
    })
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    if let Some(bytes) = args.mem_limit {
        harness::limit_address_space(bytes).map_err(|e| CliError::resource(format!("setting memory limit: {e}")))?;
    }
    let record = solve_record(args)?;
    write_json(args.output.as_deref(), &record)
}

#[derive(Debug, Serialize)]
pub struct WitnessRecord {
    pub first: Vec<String>,
    pub second: Vec<String>,
    pub sigma0: Vec<String>,
    pub sigma1: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct VerifyRecord {
    pub graph: String,
    pub k: usize,
    pub sensors: Vec<String>,
    pub is_gics: bool,
    pub witness: Option<WitnessRecord>,
    /// `None` when the projected enumeration exceeded the limit
    pub is_gis: Option<bool>,
}

pub fn verify_record(args: &VerifyArgs) -> CliResult<VerifyRecord> {
    let (g, inst) = load_instance(&args.input)?;
    let mut sensors: Vec<NodeId> = args
        .sensors
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| g.node_by_label(s).map_err(CliError::usage))
        .collect::<CliResult<_>>()?;
    sensors.sort_unstable();
    sensors.dedup();
    let names = |vs: &[NodeId]| vs.iter().map(|&v| g.label(v).to_string()).collect::<Vec<_>>();

    let collision = oracle::find_collision(&g, &sensors, inst.k, args.limit)?;
    let is_gis = match oracle::is_gis_bruteforce(&inst, &sensors, args.limit) {
        Ok(b) => Some(b),
        Err(OracleError::LimitExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(VerifyRecord {
        graph: graph_name(&args.input.graph),
        k: inst.k,
        sensors: names(&sensors),
        is_gics: collision.is_none(),
        witness: collision.map(|c| WitnessRecord {
            first: names(&c.first),
            second: names(&c.second),
            sigma0: names(&c.signature.sigma0),
            sigma1: names(&c.signature.sigma1),
        }),
        is_gis,
    })
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(","))
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<i32> {
    let rec = verify_record(args)?;
    if args.json {
        write_json(None, &rec)?;
    } else {
        let verdict = if rec.is_gics { "PASS" } else { "FAIL" };
        println!("{verdict}: {} with k={} on {}", braces(&rec.sensors), rec.k, rec.graph);
        if let Some(w) = &rec.witness {
            println!(
                "  {} and {} share signature ({}, {})",
                braces(&w.first),
                braces(&w.second),
                braces(&w.sigma0),
                braces(&w.sigma1)
            );
        }
        match rec.is_gis {
            Some(true) => println!("  grouped independent support: yes"),
            Some(false) => println!("  grouped independent support: no"),
            None => println!("  grouped independent support: skipped (enumeration limit)"),
        }
    }
    Ok(if rec.is_gics { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Parses `args` and runs the chosen command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Encode(a) => cmd_encode(a).map(|_| EXIT_OK),
        Command::Solve(a) => cmd_solve(a).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => harness::cmd_bench(a).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
