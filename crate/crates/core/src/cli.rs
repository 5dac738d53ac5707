//! Experiment runner behind the `moduli` binary.
//!
//! Every subcommand writes one JSON document (or a flattened `key,value` CSV)
//! to stdout or, atomically, to `--out`. Exit status is 0 on success, 1 on
//! usage or input errors and 2 when the report carries a numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::alcove::{enumerate_faces, torsion_shift, AlcovePoint, MultiplicityPattern, PATTERN_TOL};
use crate::error::{Error, Result};
use crate::io::{format_float, to_json_string, write_atomic, MatrixRepr};
use crate::lie::{haar, project_to_alcove, GroupElement};
use crate::local_model::{
    closed_form_holonomy, Gauge, LoopCenter, ModelConnection, PathOnQuadric, DEFAULT_STEPS,
};
use crate::plucker::{antidiagonal_identify, BetaData};
use crate::rep_variety::{
    implode_equivalent, relation_residual, solve_point, tangent_dimension_report, RepPoint, SolveOptions,
    Topology, MAX_STARTS,
};
use crate::trinion::{standard_graphs, verlinde_crosscheck_on, TrinionGraph};

#[derive(Parser, Debug)]
#[command(name = "moduli", version, about = "Numerical experiments on degenerating SU(n) character varieties")]
pub struct Cli {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parallel transport of the model connection around a loop on xy = t.
    Holonomy(HolonomyArgs),
    /// Residues of the connection in the two blow-up charts.
    Residues(ResiduesArgs),
    /// Solve the surface-group relation at fixed α and t.
    Solve(SolveArgs),
    /// Tangent dimension of the quotient at independently solved points.
    Dimension(DimensionArgs),
    /// Faces of the alcove, their reversals and torsion shifts.
    Strata(StrataArgs),
    /// Decide whether two solved points lie in one symmetry orbit.
    ImplodeCheck(ImplodeArgs),
    /// Framing forms, their compatibility quotients and antidiagonal pairings.
    Betas(BetasArgs),
    /// Rank-2 lattice point counts against the Verlinde formula.
    Verlinde(VerlindeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathKind {
    Gamma,
    XLoop,
    YLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GaugeArg {
    Unitary,
    Holomorphic,
    Blowup1,
    Blowup2,
}

impl From<GaugeArg> for Gauge {
    fn from(g: GaugeArg) -> Self {
        match g {
            GaugeArg::Unitary => Gauge::Unitary,
            GaugeArg::Holomorphic => Gauge::Holomorphic,
            GaugeArg::Blowup1 => Gauge::BlowupPatch1,
            GaugeArg::Blowup2 => Gauge::BlowupPatch2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Connected,
    Disconnected,
}

#[derive(Args, Debug)]
pub struct HolonomyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = PathKind::Gamma)]
    pub path: PathKind,
    #[arg(long, value_enum, default_value_t = GaugeArg::Unitary)]
    pub gauge: GaugeArg,
    /// Starting |x| (|y| for the y-loop); defaults to √t on γ and 1 otherwise.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
}

#[derive(Args, Debug)]
pub struct ResiduesArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 64)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = TopologyArg::Connected)]
    pub topology: TopologyArg,
    /// Handles on the first component of a disconnected presentation.
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long, default_value_t = MAX_STARTS)]
    pub starts: usize,
}

#[derive(Args, Debug)]
pub struct DimensionArgs {
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = TopologyArg::Connected)]
    pub topology: TopologyArg,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
}

#[derive(Args, Debug)]
pub struct StrataArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct ImplodeArgs {
    /// Two point files as written by `solve`.
    #[arg(long = "in", num_args = 1, required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
}

#[derive(Args, Debug)]
pub struct BetasArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Partial sums `I₁,…,I_ℓ = n` of the stratum.
    #[arg(long, value_delimiter = ',')]
    pub pattern: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub k: u8,
    /// Framing data to analyse instead of a random sample on the stratum.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerlindeArgs {
    #[arg(long)]
    pub genus: usize,
    #[arg(long)]
    pub level: usize,
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
}

/// Outcome of a subcommand: the report and whether it records a numerical failure.
struct Outcome {
    report: Value,
    numerical_failure: bool,
}

impl Outcome {
    fn ok<T: Serialize>(report: &T) -> Result<Self> {
        Ok(Self { report: to_value(report)?, numerical_failure: false })
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn alpha_of(n: usize, alpha: &[f64]) -> Result<AlcovePoint> {
    if alpha.len() != n {
        return Err(Error::InvalidInput(format!("--alpha has {} entries, --n is {n}", alpha.len())));
    }
    AlcovePoint::new(alpha.to_vec())
}

fn failure(e: &Error) -> Value {
    json!({ "status": "numerical_failure", "error": e.to_string() })
}

fn holonomy(a: &HolonomyArgs) -> Result<Outcome> {
    let alpha = alpha_of(a.n, &a.alpha)?;
    let r = a.radius.unwrap_or(if a.path == PathKind::Gamma { a.t.abs().sqrt() } else { 1.0 });
    let (path, expected_turns) = match a.path {
        PathKind::Gamma => (PathOnQuadric::gamma(a.t, r), 1.0),
        PathKind::XLoop => (PathOnQuadric::x_loop(a.t, r), 0.5),
        PathKind::YLoop => (PathOnQuadric::y_loop(a.t, r), -0.5),
    };
    let conn = ModelConnection::new(alpha.clone(), a.gauge.into());
    let transport = match conn.transport(&path, a.steps) {
        Ok(t) => t,
        Err(e) if e.is_numerical() => return Ok(Outcome { report: failure(&e), numerical_failure: true }),
        Err(e) => return Err(e),
    };
    let m = transport.matrix().clone();
    let expected = closed_form_holonomy(&alpha, expected_turns);
    let error = (&m - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let projection = match GroupElement::new(m.clone()).and_then(|g| project_to_alcove(&g)) {
        Ok(p) => json!({ "alpha": p.alpha, "ambiguous": p.ambiguous }),
        Err(_) => Value::Null,
    };
    Outcome::ok(&json!({
        "n": a.n,
        "alpha": alpha,
        "t": a.t,
        "radius": r,
        "path": a.path.to_possible_value().map(|v| v.get_name().to_string()),
        "gauge": Gauge::from(a.gauge),
        "steps": a.steps,
        "matrix": MatrixRepr::from_matrix(&m),
        "closed_form": MatrixRepr::from_matrix(&expected),
        "max_entry_error": error,
        "projection": projection,
    }))
}

fn residues(a: &ResiduesArgs) -> Result<Outcome> {
    let alpha = alpha_of(a.n, &a.alpha)?;
    let half: Vec<f64> = alpha.as_slice().iter().map(|x| x / 2.0).collect();
    let mut charts = Vec::new();
    for (gauge, center, sign) in [(Gauge::BlowupPatch1, LoopCenter::V, -1.0), (Gauge::BlowupPatch2, LoopCenter::U, 1.0)] {
        let conn = ModelConnection::new(alpha.clone(), gauge);
        let res = conn.residue(center, a.radius, Complex64::new(0.5, 0.0), a.points)?;
        let error = (0..a.n)
            .flat_map(|i| (0..a.n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let want = if i == j { sign * half[i] } else { 0.0 };
                (res[(i, j)] - Complex64::new(want, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        charts.push(json!({
            "gauge": gauge,
            "center": center,
            "residue": MatrixRepr::from_matrix(&res),
            "expected_diagonal": half.iter().map(|h| sign * h).collect::<Vec<_>>(),
            "max_entry_error": error,
        }));
    }
    Outcome::ok(&json!({ "alpha": alpha, "radius": a.radius, "points": a.points, "charts": charts }))
}

fn topology(kind: TopologyArg, h: usize) -> Topology {
    match kind {
        TopologyArg::Connected => Topology::Connected,
        TopologyArg::Disconnected => Topology::Disconnected { h },
    }
}

fn t_for(kind: TopologyArg, t: f64) -> Complex64 {
    match kind {
        TopologyArg::Connected => Complex64::new(t, 0.0),
        TopologyArg::Disconnected => Complex64::default(),
    }
}

fn solve(a: &SolveArgs, seed: u64) -> Result<Outcome> {
    let alpha = alpha_of(a.n, &a.alpha)?;
    let opts = SolveOptions { max_starts: a.starts, ..SolveOptions::default() };
    match solve_point(seed, a.g, &alpha, t_for(a.topology, a.t), topology(a.topology, a.h), opts) {
        Ok(p) => Outcome::ok(&json!({ "residual": relation_residual(&p), "seed": seed, "point": p })),
        Err(e) if e.is_numerical() => Ok(Outcome { report: failure(&e), numerical_failure: true }),
        Err(e) => Err(e),
    }
}

/// Generic α drawn from `rng`, resampled off the walls.
pub fn sample_generic_alpha<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AlcovePoint {
    loop {
        let a = AlcovePoint::sample(rng, n);
        if a.pattern(PATTERN_TOL).is_generic() {
            return a;
        }
    }
}

fn dimension(a: &DimensionArgs, seed: u64) -> Result<Outcome> {
    if a.g < 2 || a.n < 2 {
        return Err(Error::InvalidInput("need --g ≥ 2 and --n ≥ 2".into()));
    }
    let expected = (2 * a.g - 2) * (a.n * a.n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(a.trials);
    let mut failed = false;
    for trial in 0..a.trials {
        let trial_seed = rng.next_u64();
        let alpha = sample_generic_alpha(&mut ChaCha8Rng::seed_from_u64(trial_seed), a.n);
        let topo = topology(a.topology, a.h);
        let solved = solve_point(trial_seed, a.g, &alpha, t_for(a.topology, a.t), topo, SolveOptions::default());
        let entry = match solved.and_then(|p| tangent_dimension_report(&p).map(|r| (p, r))) {
            Ok((p, r)) => json!({
                "trial": trial,
                "seed": trial_seed,
                "alpha": alpha,
                "residual": relation_residual(&p),
                "dimension": r.quotient,
                "kernel": r.kernel,
                "orbit": r.orbit,
                "group_dim": r.group_dim,
            }),
            Err(e) if e.is_numerical() => {
                failed = true;
                json!({ "trial": trial, "seed": trial_seed, "alpha": alpha, "error": e.to_string() })
            }
            Err(e) => return Err(e),
        };
        entries.push(entry);
    }
    let all_match = !failed && entries.iter().all(|e| e["dimension"] == json!(expected));
    Ok(Outcome {
        report: json!({
            "g": a.g,
            "n": a.n,
            "topology": topology(a.topology, a.h),
            "t": t_for(a.topology, a.t).re,
            "expected": expected,
            "all_match": all_match,
            "entries": entries,
        }),
        numerical_failure: failed,
    })
}

fn strata(a: &StrataArgs, seed: u64) -> Result<Outcome> {
    if a.n < 2 {
        return Err(Error::InvalidInput("need --n ≥ 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces = Vec::new();
    for f in enumerate_faces(a.n) {
        let shift = if f.k() == 1 && f.is_attainable() && f.len() >= 2 {
            let alpha = AlcovePoint::sample_in_face(&mut rng, &f)?;
            Some(torsion_shift(&f, &alpha)?)
        } else {
            None
        };
        faces.push(json!({
            "pattern": f,
            "blocks": f.blocks(),
            "attainable": f.is_attainable(),
            "reversed": f.reversed(),
            "torsion_shift": shift,
        }));
    }
    Outcome::ok(&json!({ "n": a.n, "count": faces.len(), "faces": faces }))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    // Accept either the bare object or a `solve` report wrapping it.
    let inner = value.get("point").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn implode(a: &ImplodeArgs, seed: u64) -> Result<Outcome> {
    if a.inputs.len() != 2 {
        return Err(Error::InvalidInput(format!("expected two --in files, got {}", a.inputs.len())));
    }
    let p: RepPoint = read_json(&a.inputs[0])?;
    let q: RepPoint = read_json(&a.inputs[1])?;
    let report = implode_equivalent(&p, &q, a.budget, seed)?;
    Outcome::ok(&json!({ "budget": a.budget, "seed": seed, "report": report }))
}

fn betas(a: &BetasArgs, seed: u64) -> Result<Outcome> {
    let b = match &a.input {
        Some(path) => read_json::<BetaData>(path)?,
        None => {
            let n = a.n.ok_or_else(|| Error::InvalidInput("--n or --in is required".into()))?;
            let sums = if a.pattern.is_empty() { (1..=n).collect() } else { a.pattern.clone() };
            let pattern = MultiplicityPattern::from_partial_sums(&sums, a.k)?;
            if pattern.n() != n {
                return Err(Error::InvalidInput(format!("pattern {pattern} does not end at {n}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f1 = haar(&mut rng, n).into_matrix();
            let f2 = haar(&mut rng, n).into_matrix();
            BetaData::from_frames(&pattern, &f1, &f2, |_, _| {
                Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0))
            })
        }
    };
    let stratum = b.stratum()?;
    let flags = b.flags()?;
    let [q1, q2] = b.compatibility_quotients()?;
    let steps = |q: &crate::plucker::SubquotientFrame| -> Vec<Value> {
        q.steps.iter().map(|g| json!({ "from": g.from, "to": g.to, "scale": g.scale })).collect()
    };
    let pairings = antidiagonal_identify(&b)?;
    Outcome::ok(&json!({
        "n": b.n,
        "stratum": stratum,
        "flag_dims": [flags[0].dims(), flags[1].dims()],
        "gammas": [steps(&q1), steps(&q2)],
        "pairings": pairings,
        "betas": b,
    }))
}

fn verlinde(a: &VerlindeArgs) -> Result<Outcome> {
    let graphs = match &a.graph {
        Some(path) => vec![read_json::<TrinionGraph>(path)?],
        None => standard_graphs(a.genus)?,
    };
    Outcome::ok(&verlinde_crosscheck_on(a.genus, a.level, &graphs)?)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::Number(n) if n.is_f64() => out.push((prefix.to_string(), format_float(n.as_f64().unwrap()))),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render(report: &Value, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json_string(report)?.into_bytes()),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Error::InvalidInput(e.to_string());
            w.write_record(["key", "value"]).map_err(io_err)?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(io_err)?;
            }
            w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))
        }
    }
}

const SUBCOMMANDS: &[&str] =
    &["holonomy", "residues", "solve", "dimension", "strata", "implode-check", "betas", "verlinde"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Rewrites `args` with the config file's entries as flags placed right after
/// the subcommand, skipping every flag given explicitly.
fn merge_config(args: Vec<OsString>, config: &Map<String, Value>) -> Result<Vec<OsString>> {
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let pos = args.iter().position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)));
    let mut out = args.clone();
    let insert_at = match pos {
        Some(p) => p + 1,
        None => {
            let cmd = config
                .get("command")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::InvalidInput("no subcommand on the command line or in the config".into()))?;
            out.insert(1, cmd.into());
            2
        }
    };
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in config {
        let flag = key.replace('_', "-");
        if key == "command" || flag == "config" || given.contains(&flag) {
            continue;
        }
        match value {
            Value::Bool(true) => extra.push(format!("--{flag}").into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) if flag == "in" => {
                for item in items {
                    let s = scalar_text(item).ok_or_else(|| Error::InvalidInput(format!("config key {key}")))?;
                    extra.extend([format!("--{flag}").into(), s.into()]);
                }
            }
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar_text).collect();
                let parts = parts.ok_or_else(|| Error::InvalidInput(format!("config key {key}")))?;
                extra.extend([format!("--{flag}").into(), parts.join(",").into()]);
            }
            other => {
                let s = scalar_text(other).ok_or_else(|| Error::InvalidInput(format!("config key {key}")))?;
                extra.extend([format!("--{flag}").into(), s.into()]);
            }
        }
    }
    out.splice(insert_at..insert_at, extra);
    Ok(out)
}

fn usage_for(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    let sub = args.iter().filter_map(|a| a.to_str()).find(|s| SUBCOMMANDS.contains(s));
    match sub.and_then(|s| cmd.find_subcommand_mut(s)) {
        Some(sc) => sc.clone().bin_name(format!("moduli {}", sc.get_name())).render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("MODULI_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A pool built earlier in the process keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Holonomy(a) => holonomy(a),
        Command::Residues(a) => residues(a),
        Command::Solve(a) => solve(a, cli.seed),
        Command::Dimension(a) => dimension(a, cli.seed),
        Command::Strata(a) => strata(a, cli.seed),
        Command::ImplodeCheck(a) => implode(a, cli.seed),
        Command::Betas(a) => betas(a, cli.seed),
        Command::Verlinde(a) => verlinde(a),
    }
}

/// Runs the CLI on `args` (including the program name), writing the report to
/// `stdout` (or `--out`) and diagnostics to `stderr`. Returns the exit status.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&args) {
        let merged = std::fs::read_to_string(&path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
            .and_then(|text| match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => Ok(m),
                Ok(_) => Err(Error::InvalidInput("config must be a JSON object".into())),
                Err(e) => Err(Error::InvalidInput(format!("{}: {e}", path.display()))),
            })
            .and_then(|m| merge_config(args.clone(), &m));
        match merged {
            Ok(a) => args = a,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = write!(stderr, "{}\n{}\n", e.render(), usage_for(&args));
            return 1;
        }
    };
    configure_threads();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if e.is_numerical() { 2 } else { 1 };
        }
    };
    let bytes = match render(&outcome.report, cli.format) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let written = match &cli.out {
        Some(path) => write_atomic(path, &bytes),
        None => stdout.write_all(&bytes),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    if outcome.numerical_failure {
        2
    } else {
        0
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
