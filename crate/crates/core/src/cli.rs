//! Command-line front end.

use crate::forest::ForestConfig;
use crate::io::{self, Meta, ModelFile, NetworkFile};
use crate::learner::{predict_variant, run_al_kst, run_rf_kst, LearnerConfig};
use crate::lifetimes::{sample_pool, LifetimeDistribution};
use crate::net_model::{derive_variant_by_id, validate, Network};
use crate::signature::{
    default_grid, exact_signature, mc_kst, relative_error, reliability, uniform_grid,
    RelativeError, ReliabilityCurve, SignatureTable, DEFAULT_EXACT_LIMIT, RE_FLOOR,
};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "netrel",
    version,
    about = "Two-terminal network reliability estimation"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "NETREL_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact survival signature and reliability by full enumeration.
    Exact(ExactArgs),
    /// Spanning-tree Monte Carlo estimate.
    McKst(McArgs),
    /// Active-learning estimate with a forest surrogate.
    AlKst(AlArgs),
    /// Forest trained on randomly chosen samples.
    RfKst(RfArgs),
    /// Reliability of a network with components removed, predicted by a saved model.
    Variant(VariantArgs),
    /// Check a network file.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct Output {
    /// Directory for result files.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Number of time points.
    #[arg(long, default_value_t = 256)]
    pub grid_points: usize,
    /// Grid end; by default the first time some class reaches 0.999 failure probability.
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    #[serde(skip)]
    pub network: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub limit: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[serde(skip)]
    pub network: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest component count for the automatic comparison against the exact curve.
    #[arg(long, default_value_t = 20)]
    pub exact_limit: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Candidate components per split (defaults to all).
    #[arg(long)]
    pub mtry: Option<usize>,
}

impl ForestArgs {
    fn config(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            mtry: self.mtry,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AlArgs {
    #[serde(skip)]
    pub network: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub pool: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.005)]
    pub delta: f64,
    /// Initial labelled samples (defaults to twice the node count).
    #[arg(long)]
    pub n_ini: Option<usize>,
    /// Samples labelled per iteration (defaults to 2 (n_v - 2) + 4 n_e).
    #[arg(long)]
    pub n_add: Option<usize>,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 20)]
    pub exact_limit: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct RfArgs {
    #[serde(skip)]
    pub network: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub pool: usize,
    /// Samples labelled for training.
    #[arg(long)]
    pub train: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 20)]
    pub exact_limit: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct VariantArgs {
    /// The original network the model was trained on.
    #[serde(skip)]
    pub network: PathBuf,
    /// Component ids to remove, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub remove: Vec<String>,
    #[arg(long)]
    #[serde(skip)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub pool: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub exact_limit: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub network: PathBuf,
}

/// Paths written by a command, plus what to print on stdout.
#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub files: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<String>>,
}

/// Hashed configuration: the command's parameters and the bytes of its inputs.
#[derive(Serialize)]
struct Stamp<'a, A> {
    command: &'a str,
    args: &'a A,
    inputs: Vec<String>,
}

fn meta<A: Serialize>(
    command: &str,
    args: &A,
    inputs: &[&Path],
    seed: Option<u64>,
) -> Result<Meta> {
    let inputs = inputs
        .iter()
        .map(|p| Ok(io::sha256_hex(&std::fs::read(p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Meta::new(
        seed,
        &Stamp {
            command,
            args,
            inputs,
        },
    ))
}

fn load(path: &Path) -> Result<(Network, Vec<LifetimeDistribution<f64>>)> {
    let (net, dists) = NetworkFile::<f64>::read(path)?.to_network()?;
    validate(&net).into_result()?;
    Ok((net, dists))
}

fn grid(net: &Network, dists: &[LifetimeDistribution<f64>], out: &Output) -> Result<Vec<f64>> {
    match out.t_max {
        Some(t) if t.is_finite() && t > 0.0 => Ok(uniform_grid(t, out.grid_points)),
        Some(t) => Err(Error::InvalidConfig(format!(
            "t_max must be positive, got {t}"
        ))),
        None => default_grid(net.class_sizes(), dists, out.grid_points),
    }
}

/// Relative error against the exact curve when enumeration is cheap enough.
fn compare(
    net: &Network,
    dists: &[LifetimeDistribution<f64>],
    curve: &ReliabilityCurve<f64>,
    limit: usize,
) -> Result<Option<RelativeError<f64>>> {
    if net.m() > limit {
        return Ok(None);
    }
    let exact = exact_signature(net, limit)?;
    let truth = reliability(&exact, dists, &curve.grid)?;
    Ok(Some(relative_error(&truth, curve, RE_FLOOR)?))
}

fn emit(
    out: &Output,
    meta: &Meta,
    table: &SignatureTable,
    curve: &ReliabilityCurve<f64>,
    re: Option<&RelativeError<f64>>,
    report: &mut Report,
) -> Result<()> {
    let table = table.resolved();
    let (sig, rel, ext) = match out.format {
        Format::Csv => (
            io::signature_csv(meta, &table),
            io::curve_csv(meta, curve, re),
            "csv",
        ),
        Format::Json => (
            io::signature_json(meta, &table),
            io::curve_json(meta, curve, re),
            "json",
        ),
    };
    report
        .files
        .push(io::write(&out.out, &format!("signature.{ext}"), &sig)?);
    report
        .files
        .push(io::write(&out.out, &format!("reliability.{ext}"), &rel)?);
    report.re_max = re.map(|r| r.max);
    Ok(())
}

pub fn run(cli: Cli) -> Result<Report> {
    let mut report = Report::default();
    match &cli.command {
        Command::Exact(a) => {
            let (net, dists) = load(&a.network)?;
            let m = meta("exact", a, &[&a.network], None)?;
            let table = exact_signature(&net, a.limit)?;
            let curve = reliability(&table, &dists, &grid(&net, &dists, &a.output)?)?;
            emit(&a.output, &m, &table, &curve, None, &mut report)?;
        }
        Command::McKst(a) => {
            let (net, dists) = load(&a.network)?;
            let m = meta("mc-kst", a, &[&a.network], Some(a.seed))?;
            let pool = sample_pool(&net, &dists, a.samples, a.seed)?;
            let table = mc_kst(&net, &pool)?;
            let curve = reliability(&table, &dists, &grid(&net, &dists, &a.output)?)?;
            let re = compare(&net, &dists, &curve, a.exact_limit)?;
            emit(&a.output, &m, &table, &curve, re.as_ref(), &mut report)?;
        }
        Command::AlKst(a) => {
            let (net, dists) = load(&a.network)?;
            let m = meta("al-kst", a, &[&a.network], Some(a.seed))?;
            let mut cfg = LearnerConfig::for_network(&net, a.pool, a.seed);
            cfg.delta = a.delta;
            cfg.n_ini = a.n_ini.unwrap_or(cfg.n_ini).min(a.pool);
            cfg.n_add = a.n_add.unwrap_or(cfg.n_add);
            cfg.forest = a.forest.config();
            let pool = sample_pool(&net, &dists, a.pool, a.seed)?;
            let out = run_al_kst(&net, &pool, &cfg)?;
            let curve = reliability(&out.table, &dists, &grid(&net, &dists, &a.output)?)?;
            let re = compare(&net, &dists, &curve, a.exact_limit)?;
            emit(&a.output, &m, &out.table, &curve, re.as_ref(), &mut report)?;
            let model = ModelFile::new(&net, out.surrogate);
            report.files.push(io::write(
                &a.output.out,
                "model.json",
                &io::json_with_meta(&m, "model", &model),
            )?);
            report.files.push(io::write(
                &a.output.out,
                "audit.json",
                &io::json_with_meta(&m, "audit", &out.audit),
            )?);
        }
        Command::RfKst(a) => {
            let (net, dists) = load(&a.network)?;
            let m = meta("rf-kst", a, &[&a.network], Some(a.seed))?;
            let mut cfg = LearnerConfig::for_network(&net, a.pool, a.seed);
            cfg.forest = a.forest.config();
            let pool = sample_pool(&net, &dists, a.pool, a.seed)?;
            let out = run_rf_kst(&net, &pool, &cfg, a.train)?;
            let curve = reliability(&out.table, &dists, &grid(&net, &dists, &a.output)?)?;
            let re = compare(&net, &dists, &curve, a.exact_limit)?;
            emit(&a.output, &m, &out.table, &curve, re.as_ref(), &mut report)?;
            let model = ModelFile::new(&net, out.surrogate);
            report.files.push(io::write(
                &a.output.out,
                "model.json",
                &io::json_with_meta(&m, "model", &model),
            )?);
        }
        Command::Variant(a) => {
            let (net, dists) = load(&a.network)?;
            let m = meta("variant", a, &[&a.network, &a.model], Some(a.seed))?;
            let model = read_model(&a.model)?;
            model.check(&net)?;
            let (variant, mask) = derive_variant_by_id(&net, &a.remove)?;
            let pool = sample_pool(&variant, &dists, a.pool, a.seed)?;
            let g = grid(&variant, &dists, &a.output)?;
            let (table, curve) =
                predict_variant(&net, &model.surrogate, &variant, &mask, &pool, &dists, &g)?;
            let re = compare(&variant, &dists, &curve, a.exact_limit)?;
            emit(&a.output, &m, &table, &curve, re.as_ref(), &mut report)?;
        }
        Command::Validate(a) => {
            let (net, _) = NetworkFile::<f64>::read(&a.network)?.to_network()?;
            let r = validate(&net);
            report.valid = Some(r.is_ok());
            report.violations = Some(r.violations.iter().map(|v| v.to_string()).collect());
            if !r.is_ok() {
                return Err(Error::Invalid(r));
            }
        }
    }
    Ok(report)
}

/// Reads a model written by `al-kst` or `rf-kst`.
pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let inner = value
        .get("model")
        .ok_or_else(|| Error::Parse("missing `model` field".into()))?;
    ModelFile::parse(&inner.to_string())
}
