//! `ripmat`: parameter reports, matrix construction and export, restricted
//! isometry measurement, and additive-combinatorics experiments.
//!
//! Every run that writes an output file also writes a manifest next to it
//! ("<out>.manifest.json") recording the normalized flags; `ripmat replay`
//! re-executes a manifest and reproduces the output byte for byte.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ripmat::addcomb::{self, AddCombError};
use ripmat::construction::{self, ConstructionError, ResidueSet};
use ripmat::matrix::DenseMatrix;
use ripmat::modmath::PrimeModulus;
use ripmat::params::{self, fmt_f64, CombinatorialConstants, ParamsError};
use ripmat::ric::{self, RicError, RicMethod};
use ripmat::rng::SplitMix64;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_NO_FEASIBLE_M: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_TOO_MANY_SUPPORTS: u8 = 5;
const EXIT_ADDCOMB: u8 = 6;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "ripmat", version, about = "Explicit RIP matrix toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the parameter pipeline at one m, or sweep for the best m.
    Params(ParamsArgs),
    /// Build a chirp matrix and write it in CHIRP1 format.
    Build(BuildArgs),
    /// Estimate a restricted isometry constant from a CHIRP1 file.
    Ric(RicArgs),
    /// Additive-combinatorics measurements on residue sets.
    #[command(subcommand)]
    Addcomb(AddcombCmd),
    /// Re-run a recorded manifest; output is byte-identical.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ParamsArgs {
    /// Even pipeline parameter m.
    #[arg(long, conflicts_with = "optimize")]
    m: Option<u64>,
    /// Sweep even m in [m-min, m-max] and report the argmax of eps.
    #[arg(long, requires = "m_min", requires = "m_max")]
    optimize: bool,
    #[arg(long)]
    m_min: Option<u64>,
    #[arg(long)]
    m_max: Option<u64>,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    c0: f64,
    #[arg(long, default_value_t = 3.5)]
    c1: f64,
    #[arg(long, default_value_t = 0.75)]
    c4: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON to stdout instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BuildArgs {
    /// Prime modulus; alternatively derive it from --k/--eps.
    #[arg(long, conflicts_with_all = ["k", "eps"])]
    p: Option<u64>,
    /// Even construction parameter m.
    #[arg(long)]
    m: u64,
    /// Target sparsity; picks the smallest prime in [k^(2-eps), 2k^(2-eps)].
    #[arg(long, requires = "eps")]
    k: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Number of columns.
    #[arg(long = "N")]
    n_cols: u64,
    #[arg(long)]
    out: PathBuf,
    /// Realify: write the 2n x 2N real matrix instead.
    #[arg(long)]
    real: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RicMode {
    Exhaustive,
    Sample,
}

#[derive(Args)]
struct RicArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    mode: RicMode,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SetPair {
    #[arg(long)]
    p: u64,
    /// Set spec: "0,1,2", "1..10", "M=4,r=3", or "@file".
    #[arg(long = "A")]
    a: String,
    #[arg(long = "B")]
    b: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum AddcombCmd {
    /// Additive energy E(A, B).
    Energy(SetPair),
    /// The difference set A - B.
    Diffset(SetPair),
    /// The sum-product energy sum over B of E(A, b.A) with its ratio.
    Propc {
        #[command(flatten)]
        sets: SetPair,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        c0: f64,
    },
    /// Energy ratios E(S,S)/|S|^3 of one set or of sampled subsets.
    Ess(EssArgs),
    /// Search for a Balog-Szemeredi-Gowers witness pair inside A.
    Bsg(BsgArgs),
}

#[derive(Args)]
struct EssArgs {
    #[arg(long)]
    p: u64,
    /// Measure this single set.
    #[arg(long = "S", conflicts_with = "b_gen")]
    s: Option<String>,
    /// Sample subsets of this generated set, e.g. "M=4,r=3".
    #[arg(long = "B-gen", requires = "samples", requires = "size")]
    b_gen: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BsgArgs {
    #[arg(long)]
    p: u64,
    #[arg(long = "A")]
    a: String,
    #[arg(long, default_value_t = 3.5)]
    c1: f64,
    #[arg(long, default_value_t = 0.75)]
    c4: f64,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Randomized subset sampling; omit for the exhaustive scan.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    fn other(message: impl std::fmt::Display) -> Self {
        CliError { code: 1, message: message.to_string() }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        let code = match e {
            ParamsError::NoFeasibleM(..) => EXIT_NO_FEASIBLE_M,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        let code = match e {
            ConstructionError::CapacityExceeded { .. } => EXIT_CAPACITY,
            ConstructionError::DegenerateSet(_) => EXIT_DEGENERATE,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<RicError> for CliError {
    fn from(e: RicError) -> Self {
        let code = match e {
            RicError::TooManySupports { .. } => EXIT_TOO_MANY_SUPPORTS,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<AddCombError> for CliError {
    fn from(e: AddCombError) -> Self {
        CliError { code: EXIT_ADDCOMB, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(args: &[String]) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::usage(e.to_string()));
        }
    };
    match cli.cmd {
        Cmd::Params(a) => cmd_params(a),
        Cmd::Build(a) => cmd_build(a),
        Cmd::Ric(a) => cmd_ric(a),
        Cmd::Addcomb(a) => cmd_addcomb(a),
        Cmd::Replay(a) => cmd_replay(a),
    }
}

fn prime(p: u64) -> Result<PrimeModulus, CliError> {
    PrimeModulus::new(p).map_err(|e| CliError::usage(e.to_string()))
}

/// "0,1,2" | "1..10" | "M=4,r=3" | "@file" -> sorted distinct residues.
fn parse_set_spec(spec: &str, p: PrimeModulus) -> Result<ResidueSet, CliError> {
    let bad = |msg: String| CliError::usage(format!("bad set spec {spec:?}: {msg}"));
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {path}: {e}")))?;
        let elems: Result<Vec<u64>, _> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse::<u64>)
            .collect();
        return Ok(ResidueSet::new(p, elems.map_err(|e| bad(e.to_string()))?));
    }
    if spec.contains('=') {
        let mut m_digits = None;
        let mut r = None;
        for part in spec.split(',') {
            match part.split_once('=') {
                Some(("M", v)) => m_digits = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                Some(("r", v)) => r = Some(v.parse::<u32>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(bad(format!("unknown generator field {part:?}"))),
            }
        }
        let (m_digits, r) = match (m_digits, r) {
            (Some(m), Some(r)) => (m, r),
            _ => return Err(bad("generator spec needs both M= and r=".into())),
        };
        return Ok(construction::build_set_b_explicit(m_digits, r, p)?);
    }
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let hi: u64 = hi.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        if lo > hi {
            return Err(bad("empty range".into()));
        }
        return Ok(ResidueSet::new(p, lo..=hi));
    }
    let elems: Result<Vec<u64>, _> =
        spec.split(',').map(|t| t.trim().parse::<u64>()).collect();
    Ok(ResidueSet::new(p, elems.map_err(|e| bad(e.to_string()))?))
}

/// Normalized flag map recorded beside every written output.
struct Manifest {
    command: String,
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
        }
    }

    fn flag(mut self, name: &str, value: impl std::fmt::Display) -> Self {
        self.inputs.insert(name.to_string(), value.to_string());
        self
    }

    fn flag_opt(self, name: &str, value: Option<impl std::fmt::Display>) -> Self {
        match value {
            Some(v) => self.flag(name, v),
            None => self,
        }
    }

    fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn to_json(&self) -> String {
        let inputs: Vec<String> = self
            .inputs
            .iter()
            .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
            .collect();
        let outputs: Vec<String> = self
            .outputs
            .iter()
            .map(|p| json_string(&p.display().to_string()))
            .collect();
        format!(
            "{{\"command\":{},\"inputs\":{{{}}},\"seed\":{},\"tool_version\":{},\"outputs\":[{}]}}",
            json_string(&self.command),
            inputs.join(","),
            self.seed.map_or("null".to_string(), |s| s.to_string()),
            json_string(env!("CARGO_PKG_VERSION")),
            outputs.join(","),
        )
    }

    /// Write `body` to `out` and this manifest to "<out>.manifest.json".
    fn write_with_output(mut self, out: &Path, body: &[u8]) -> Result<(), CliError> {
        std::fs::write(out, body).map_err(CliError::other)?;
        self.outputs.push(out.to_path_buf());
        let mut manifest_path = out.as_os_str().to_owned();
        manifest_path.push(".manifest.json");
        std::fs::write(manifest_path, self.to_json()).map_err(CliError::other)
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

/// Route JSON to --out (with a manifest) or stdout (--json); otherwise the
/// caller prints its table.
fn emit_json(
    manifest: Manifest,
    out: Option<&Path>,
    json_flag: bool,
    body: &str,
) -> Result<bool, CliError> {
    if let Some(path) = out {
        let mut bytes = body.as_bytes().to_vec();
        bytes.push(b'\n');
        manifest.write_with_output(path, &bytes)?;
        return Ok(true);
    }
    if json_flag {
        println!("{body}");
        return Ok(false);
    }
    Ok(false)
}

fn cmd_params(a: ParamsArgs) -> Result<(), CliError> {
    let constants = CombinatorialConstants {
        c0: a.c0,
        c1: a.c1,
        c4: a.c4,
        ..CombinatorialConstants::default()
    };
    if a.optimize {
        let (m_min, m_max) = (a.m_min.unwrap(), a.m_max.unwrap());
        if m_min < 100 || m_min > m_max {
            return Err(CliError::usage("need 100 <= m-min <= m-max"));
        }
        let (best, sweep) = params::optimize_m(m_min, m_max, &constants)?;
        let manifest = Manifest::new("params")
            .flag("optimize", true)
            .flag("m-min", m_min)
            .flag("m-max", m_max)
            .flag("c0", a.c0)
            .flag("c1", a.c1)
            .flag("c4", a.c4);
        let wrote = emit_json(manifest, a.out.as_deref(), a.json, &best.to_json())?;
        if !a.json {
            println!("swept {} even values of m in [{m_min}, {m_max}]", sweep.len());
            println!("argmax m = {}", best.m);
            println!("  gamma = {}", fmt_f64(best.gamma));
            println!("  eps1  = {}", fmt_f64(best.eps1));
            println!("  eps   = {}", fmt_f64(best.eps));
            if wrote {
                println!("report written to {}", a.out.unwrap().display());
            }
        }
        return Ok(());
    }
    let m = a.m.ok_or_else(|| CliError::usage("either --m or --optimize is required"))?;
    if m < 2 || m % 2 != 0 {
        return Err(CliError::usage(format!("--m {m}: m must be an even integer >= 2")));
    }
    let report = params::report_for_m(m, &constants)?;
    let manifest = Manifest::new("params")
        .flag("m", m)
        .flag("c0", a.c0)
        .flag("c1", a.c1)
        .flag("c4", a.c4);
    let wrote = emit_json(manifest, a.out.as_deref(), a.json, &report.to_json())?;
    if !a.json {
        println!("m = {}", report.m);
        println!("log2 M    = {}", fmt_f64(report.log2m_digits));
        println!("tau       = {}", fmt_f64(report.tau));
        println!("2 tau - 1 = {}", fmt_f64(report.two_tau_minus_1));
        println!("gamma     = {}  (feasible: {})", fmt_f64(report.gamma), report.feasible_gamma);
        println!("eps1      = {}  (feasible: {})", fmt_f64(report.eps1), report.feasible_eps1);
        println!("eps       = {}  (feasible: {})", fmt_f64(report.eps), report.feasible_eps);
        if wrote {
            println!("report written to {}", a.out.unwrap().display());
        }
    }
    if !report.feasible() {
        return Err(CliError {
            code: EXIT_NO_FEASIBLE_M,
            message: format!("m = {m} is infeasible"),
        });
    }
    Ok(())
}

fn cmd_build(a: BuildArgs) -> Result<(), CliError> {
    if a.m < 2 || a.m % 2 != 0 {
        return Err(CliError::usage(format!("--m {}: m must be an even integer >= 2", a.m)));
    }
    let p = match (a.p, a.k) {
        (Some(p), None) => prime(p)?,
        (None, Some(k)) => {
            if k < 2 {
                return Err(CliError::usage("--k must be at least 2"));
            }
            construction::select_prime_for_k(k, a.eps.unwrap())?
        }
        _ => return Err(CliError::usage("exactly one of --p or --k/--eps is required")),
    };
    let set_a = construction::build_set_a(p, a.m)?;
    let set_b = construction::build_set_b(p, a.m)?;
    let chirp = construction::build_matrix_from_sets(&set_a, &set_b, a.n_cols)?;
    let mut dense = chirp.to_dense();
    if a.real {
        dense = construction::realify(&dense);
    }
    let eps = a.eps.unwrap_or(1.0 / (403.0 * a.m as f64));
    let cap = construction::capacity_check(p, a.m, eps, a.n_cols)?;
    let mut body = Vec::new();
    dense.write_chirp1(&mut body).map_err(CliError::other)?;
    let manifest = Manifest::new("build")
        .flag_opt("p", a.p)
        .flag_opt("k", a.k)
        .flag_opt("eps", a.eps)
        .flag("m", a.m)
        .flag("N", a.n_cols)
        .flag_opt("real", a.real.then_some(true));
    manifest.write_with_output(&a.out, &body)?;
    println!("p = {}", p.get());
    println!("matrix: {} x {} ({})", dense.rows(), dense.cols(), if a.real { "real" } else { "complex" });
    println!("|A| = {}, |B| = {}, |A||B| = {}", set_a.len(), set_b.len(), cap.ab_product);
    println!(
        "capacity: eps = {} (limit {}, ok: {}), N <= p^((2+eps)/(2-eps)): {}, p^((2+eps)/(2-eps)) <= |A||B|: {}",
        fmt_f64(cap.eps),
        fmt_f64(cap.eps_limit),
        cap.eps_ok,
        cap.n_le_p_power,
        cap.p_power_le_ab
    );
    println!("written to {}", a.out.display());
    Ok(())
}

fn cmd_ric(a: RicArgs) -> Result<(), CliError> {
    if a.k < 1 || a.workers < 1 || a.trials < 1 {
        return Err(CliError::usage("--k, --trials, and --workers must be positive"));
    }
    let mat = DenseMatrix::read_chirp1_file(&a.matrix).map_err(CliError::other)?;
    if a.k > mat.cols() {
        return Err(CliError::usage(format!(
            "--k {} exceeds the column count {}",
            a.k,
            mat.cols()
        )));
    }
    let est = match a.mode {
        RicMode::Exhaustive => ric::ric_exhaustive(&mat, a.k, a.workers)?,
        RicMode::Sample => ric::ric_sampled(&mat, a.k, a.trials, a.seed, a.workers)?,
    };
    let mut manifest = Manifest::new("ric")
        .flag("matrix", a.matrix.display())
        .flag("k", a.k)
        .flag(
            "mode",
            match a.mode {
                RicMode::Exhaustive => "exhaustive",
                RicMode::Sample => "sample",
            },
        )
        .flag("workers", a.workers);
    if a.mode == RicMode::Sample {
        manifest = manifest.flag("trials", a.trials).flag("seed", a.seed).seed(a.seed);
    }
    let wrote = emit_json(manifest, a.out.as_deref(), a.json, &est.to_json())?;
    if !a.json {
        let method = match est.method {
            RicMethod::Exhaustive => "exhaustive",
            RicMethod::Sampled => "sampled",
        };
        println!("delta_{} >= {}  ({method}, {} supports)", est.k, fmt_f64(est.delta_lower), est.supports_examined);
        if wrote {
            println!("estimate written to {}", a.out.unwrap().display());
        }
    }
    Ok(())
}

fn cmd_addcomb(cmd: AddcombCmd) -> Result<(), CliError> {
    match cmd {
        AddcombCmd::Energy(sp) => {
            let p = prime(sp.p)?;
            let a = parse_set_spec(&sp.a, p)?;
            let b = parse_set_spec(&sp.b, p)?;
            let e = addcomb::energy(&a, &b)?;
            let body = format!(
                "{{\"p\":{},\"A_size\":{},\"B_size\":{},\"energy\":{}}}",
                sp.p,
                a.len(),
                b.len(),
                e.value
            );
            let manifest = addcomb_manifest("addcomb energy", &sp);
            let wrote = emit_json(manifest, sp.out.as_deref(), sp.json, &body)?;
            if !sp.json {
                println!("E(A, B) = {}", e.value);
                if wrote {
                    println!("written to {}", sp.out.unwrap().display());
                }
            }
        }
        AddcombCmd::Diffset(sp) => {
            let p = prime(sp.p)?;
            let a = parse_set_spec(&sp.a, p)?;
            let b = parse_set_spec(&sp.b, p)?;
            let d = addcomb::difference_set(&a, &b)?;
            let elems: Vec<String> = d.elements().iter().map(|x| x.to_string()).collect();
            let body = format!(
                "{{\"p\":{},\"size\":{},\"elements\":[{}]}}",
                sp.p,
                d.len(),
                elems.join(",")
            );
            let manifest = addcomb_manifest("addcomb diffset", &sp);
            let wrote = emit_json(manifest, sp.out.as_deref(), sp.json, &body)?;
            if !sp.json {
                println!("|A - B| = {}", d.len());
                println!("A - B = {{{}}}", elems.join(", "));
                if wrote {
                    println!("written to {}", sp.out.unwrap().display());
                }
            }
        }
        AddcombCmd::Propc { sets: sp, c0 } => {
            let p = prime(sp.p)?;
            let a = parse_set_spec(&sp.a, p)?;
            let b = parse_set_spec(&sp.b, p)?;
            let r = addcomb::prop_c_sum(&a, &b, c0)?;
            let body = format!(
                "{{\"p\":{},\"c0\":{},\"sum\":{},\"normalized_ratio\":{}}}",
                sp.p,
                fmt_f64(c0),
                r.sum,
                fmt_f64(r.normalized_ratio)
            );
            let manifest = addcomb_manifest("addcomb propc", &sp).flag("c0", c0);
            let wrote = emit_json(manifest, sp.out.as_deref(), sp.json, &body)?;
            if !sp.json {
                println!("sum over b in B of E(A, b.A) = {}", r.sum);
                println!("normalized ratio = {}", fmt_f64(r.normalized_ratio));
                if wrote {
                    println!("written to {}", sp.out.unwrap().display());
                }
            }
        }
        AddcombCmd::Ess(a) => cmd_ess(a)?,
        AddcombCmd::Bsg(a) => cmd_bsg(a)?,
    }
    Ok(())
}

fn addcomb_manifest(command: &str, sp: &SetPair) -> Manifest {
    Manifest::new(command)
        .flag("p", sp.p)
        .flag("A", &sp.a)
        .flag("B", &sp.b)
}

fn cmd_ess(a: EssArgs) -> Result<(), CliError> {
    let p = prime(a.p)?;
    if let Some(spec) = &a.s {
        let s = parse_set_spec(spec, p)?;
        if s.is_empty() {
            return Err(CliError::usage("--S must be nonempty"));
        }
        let r = addcomb::ess_ratio(&s, p);
        let body = format!(
            "{{\"p\":{},\"size\":{},\"energy\":{},\"ratio\":{},\"meets_size_threshold\":{}}}",
            a.p,
            s.len(),
            r.energy,
            fmt_f64(r.ratio),
            r.meets_size_threshold
        );
        let manifest = Manifest::new("addcomb ess").flag("p", a.p).flag("S", spec);
        let wrote = emit_json(manifest, a.out.as_deref(), a.json, &body)?;
        if !a.json {
            println!(
                "|S| = {}, E(S,S) = {}, ratio = {}, |S| >= p^0.49: {}",
                s.len(),
                r.energy,
                fmt_f64(r.ratio),
                r.meets_size_threshold
            );
            if wrote {
                println!("written to {}", a.out.unwrap().display());
            }
        }
        return Ok(());
    }
    let gen = a
        .b_gen
        .as_deref()
        .ok_or_else(|| CliError::usage("either --S or --B-gen is required"))?;
    let ambient = parse_set_spec(gen, p)?;
    let samples = a.samples.unwrap();
    let size = a.size.unwrap();
    if size == 0 || size > ambient.len() {
        return Err(CliError::usage(format!(
            "--size must be in [1, {}]",
            ambient.len()
        )));
    }
    let mut max_ratio: f64 = 0.0;
    let mut sum_ratio: f64 = 0.0;
    let mut meets = 0u64;
    let mut rows = Vec::new();
    for i in 0..samples {
        let idx = SplitMix64::keyed(a.seed, i).distinct_below(ambient.len(), size);
        let subset = ResidueSet::new(p, idx.iter().map(|&j| ambient.elements()[j]));
        let r = addcomb::ess_ratio(&subset, p);
        max_ratio = max_ratio.max(r.ratio);
        sum_ratio += r.ratio;
        if r.meets_size_threshold {
            meets += 1;
        }
        rows.push(r);
    }
    let mean = sum_ratio / samples as f64;
    let body = format!(
        "{{\"p\":{},\"samples\":{},\"size\":{},\"seed\":{},\"max_ratio\":{},\"mean_ratio\":{},\"meets_size_threshold\":{}}}",
        a.p,
        samples,
        size,
        a.seed,
        fmt_f64(max_ratio),
        fmt_f64(mean),
        meets
    );
    let manifest = Manifest::new("addcomb ess")
        .flag("p", a.p)
        .flag("B-gen", gen)
        .flag("samples", samples)
        .flag("size", size)
        .flag("seed", a.seed)
        .seed(a.seed);
    let wrote = emit_json(manifest, a.out.as_deref(), a.json, &body)?;
    if !a.json {
        println!("{:>8}  {:>12}  {:>20}", "sample", "E(S,S)", "E(S,S)/|S|^3");
        for (i, r) in rows.iter().enumerate() {
            println!("{:>8}  {:>12}  {:>20}", i, r.energy, fmt_f64(r.ratio));
        }
        println!(
            "{} subsets of size {} from |B| = {}: max ratio {}, mean {}, {} meet |S| >= p^0.49",
            samples,
            size,
            ambient.len(),
            fmt_f64(max_ratio),
            fmt_f64(mean),
            meets
        );
        if wrote {
            println!("written to {}", a.out.unwrap().display());
        }
    }
    Ok(())
}

fn cmd_bsg(a: BsgArgs) -> Result<(), CliError> {
    let p = prime(a.p)?;
    let set = parse_set_spec(&a.a, p)?;
    if set.is_empty() || set.len() > 63 {
        return Err(CliError::usage("--A must have between 1 and 63 elements"));
    }
    let witness = addcomb::bsg_witness_search(&set, a.c1, a.c4, a.budget, a.seed)?;
    let body = match &witness {
        Some(w) => format!(
            "{{\"found\":true,\"k_ratio\":{},\"a_prime_size\":{},\"b_prime_size\":{},\"diff_size\":{}}}",
            fmt_f64(w.k_ratio),
            w.a_prime.len(),
            w.b_prime.len(),
            w.diff_size
        ),
        None => "{\"found\":false}".to_string(),
    };
    let mut manifest = Manifest::new("addcomb bsg")
        .flag("p", a.p)
        .flag("A", &a.a)
        .flag("c1", a.c1)
        .flag("c4", a.c4)
        .flag("budget", a.budget)
        .flag_opt("seed", a.seed);
    if let Some(s) = a.seed {
        manifest = manifest.seed(s);
    }
    let wrote = emit_json(manifest, a.out.as_deref(), a.json, &body)?;
    if !a.json {
        match witness {
            Some(w) => {
                println!("K = |A|^3 / E(A,A) = {}", fmt_f64(w.k_ratio));
                println!(
                    "witness: |A'| = {}, |B'| = {}, |A' - B'| = {}",
                    w.a_prime.len(),
                    w.b_prime.len(),
                    w.diff_size
                );
            }
            None => println!("no witness found within budget"),
        }
        if wrote {
            println!("written to {}", a.out.unwrap().display());
        }
    }
    Ok(())
}

fn cmd_replay(a: ReplayArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.manifest).map_err(CliError::other)?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad manifest: {e}")))?;
    let command = v["command"]
        .as_str()
        .ok_or_else(|| CliError::usage("manifest is missing \"command\""))?;
    let inputs = v["inputs"]
        .as_object()
        .ok_or_else(|| CliError::usage("manifest is missing \"inputs\""))?;
    let outputs = v["outputs"]
        .as_array()
        .ok_or_else(|| CliError::usage("manifest is missing \"outputs\""))?;
    let mut argv = vec!["ripmat".to_string()];
    argv.extend(command.split(' ').map(str::to_string));
    // object order matches the BTreeMap order the manifest was written in
    for (k, val) in inputs {
        let s = val
            .as_str()
            .ok_or_else(|| CliError::usage("manifest inputs must be strings"))?;
        if s == "true" {
            argv.push(format!("--{k}"));
        } else {
            argv.push(format!("--{k}"));
            argv.push(s.to_string());
        }
    }
    if let Some(out) = outputs.first() {
        let s = out
            .as_str()
            .ok_or_else(|| CliError::usage("manifest outputs must be strings"))?;
        argv.push("--out".to_string());
        argv.push(s.to_string());
    }
    run(&argv)
}
