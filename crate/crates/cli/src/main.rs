mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mode_core::bench::{
    bias_experiment, render_bias, render_robust, robustness_experiment, write_report, BenchError,
    BiasConfig, ReportFormat, RobustConfig, ScmId,
};
use mode_core::dataset::{binarize_by_median, load_csv, save_csv, DataError, Instance, SchemaHint};
use mode_core::discovery::{find_parents, DiscoveryError, DEFAULT_ALPHA, DEFAULT_MAX_COND};
use mode_core::mode::{
    build_model, whatif, BuildOptions, ModeError, RankBy, Variant, WhatIfOptions, DEFAULT_DELTA,
    DEFAULT_K,
};
use mode_core::models::{load_model, save_model, ModelError, ModelKind, ModelSpec};
use mode_core::scm::{make_g1, make_g2, make_wine};

use config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or bad input data: exit code 2.
    Usage(String),
    /// Anything else: exit code 1.
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Usage(e.to_string())
            }
        }
    )*};
}

usage_from!(DataError, DiscoveryError, ModelError, ModeError);

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn internal(e: impl fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "mode", version, about = "Causally interpretable outcome prediction and what-if analysis")]
struct Cli {
    /// Random seed (data generation, model training, benchmarks).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Progress and diagnostics on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// JSON file with default values for flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a dataset from one of the built-in causal models.
    Gen(GenArgs),
    /// Find the direct causes of the outcome.
    Discover(DiscoverArgs),
    /// Discover parents and train a model on them.
    Train(TrainArgs),
    /// Predict for an instance and rank its features by controlled direct effect.
    Whatif(WhatifArgs),
    /// Run a benchmark experiment.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Serve the HTTP/JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScmArg {
    G1,
    G2,
    Wine,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    scm: ScmArg,
    #[arg(long)]
    n: Option<usize>,
    /// Environment of the wine model (required for it, rejected otherwise).
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    env: Option<u8>,
    /// Replace Y by Y > median(Y).
    #[arg(long)]
    binarize_outcome: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    outcome: Option<String>,
    /// Significance level of the independence tests.
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest conditioning set.
    #[arg(long)]
    max_cond: Option<usize>,
}

#[derive(Debug, Args)]
struct DiscoverArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// lr, logreg, dt or rf.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_features: Option<usize>,
    /// Train on every feature instead of the discovered parents.
    #[arg(long)]
    all_features: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RankArg {
    Signed,
    Absolute,
}

#[derive(Debug, Args)]
struct WhatifArgs {
    #[arg(long)]
    model: PathBuf,
    /// JSON file, inline JSON object, or name=value,name=value.
    #[arg(long)]
    instance: String,
    #[arg(long)]
    k: Option<usize>,
    /// Step for continuous features.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Per-feature steps as name=value,name=value.
    #[arg(long)]
    delta_overrides: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    class_of_interest: Option<u8>,
    #[arg(long, value_enum, default_value = "signed")]
    rank_by: RankArg,
    /// Rank effects on P(Y > threshold) for a continuous outcome.
    #[arg(long, allow_negative_numbers = true)]
    exceedance: Option<f64>,
    /// List features outside the model with zero effect.
    #[arg(long)]
    include_excluded: bool,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Bias of the X1 direct effect, parents-only against all variables.
    Bias(BiasArgs),
    /// Prediction error when the environment changes between train and test.
    Robust(RobustArgs),
}

#[derive(Debug, Args)]
struct BenchOut {
    /// md or csv.
    #[arg(long)]
    format: Option<String>,
    /// Directory for the report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated model kinds.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Debug, Args)]
struct BiasArgs {
    #[arg(long, default_value = "g1")]
    scm: String,
    /// Comma-separated dataset sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_cond: Option<usize>,
    /// Multiply the bias columns for display.
    #[arg(long)]
    scale: Option<f64>,
    #[command(flatten)]
    out: BenchOut,
}

#[derive(Debug, Args)]
struct RobustArgs {
    /// Rows per environment.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    out: BenchOut,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Persist registered models here and load existing ones at start.
    #[arg(long)]
    model_dir: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    bind: Option<String>,
    /// Allowed CORS origin; repeatable.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

struct Ctx {
    seed: Option<u64>,
    verbose: bool,
    json: bool,
    file: FileConfig,
}

impl Ctx {
    fn log(&self, msg: impl fmt::Display) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }

    fn seed(&self) -> u64 {
        self.seed.or(self.file.seed).unwrap_or(0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let ctx = Ctx {
        seed: cli.seed,
        verbose: cli.verbose,
        json: cli.json,
        file,
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a),
        Command::Discover(a) => cmd_discover(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Whatif(a) => cmd_whatif(&ctx, a),
        Command::Bench(BenchCommand::Bias(a)) => cmd_bias(&ctx, a),
        Command::Bench(BenchCommand::Robust(a)) => cmd_robust(&ctx, a),
        Command::Serve(a) => cmd_serve(&ctx, a),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).map_err(internal)?);
    Ok(())
}

fn cmd_gen(ctx: &Ctx, a: GenArgs) -> Result<()> {
    let scm = match (a.scm, a.env) {
        (ScmArg::Wine, Some(env)) => make_wine(env),
        (ScmArg::Wine, None) => return Err(CliError::Usage("--env is required for --scm wine".into())),
        (_, Some(_)) => return Err(CliError::Usage("--env only applies to --scm wine".into())),
        (ScmArg::G1, None) => make_g1(),
        (ScmArg::G2, None) => make_g2(),
    };
    let n = a.n.or(ctx.file.n).unwrap_or(2000);
    if n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let mut table = scm.sample(n, ctx.seed());
    if a.binarize_outcome {
        let outcome = table.outcome().to_string();
        table = binarize_by_median(&table, &[outcome.as_str()])?;
    }
    save_csv(&table, &a.out).map_err(internal)?;
    if ctx.json {
        print_json(&serde_json::json!({
            "path": a.out,
            "rows": table.n_rows(),
            "columns": table.columns().iter().map(|c| c.name()).collect::<Vec<_>>(),
        }))
    } else {
        println!("{} rows written to {}", table.n_rows(), a.out.display());
        Ok(())
    }
}

fn alpha(a: &DataArgs, file: &FileConfig) -> Result<f64> {
    let alpha = a.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(alpha)
}

fn load_data(a: &DataArgs, file: &FileConfig) -> Result<mode_core::dataset::DataTable> {
    let outcome = a.outcome.clone().or(file.outcome.clone()).unwrap_or_else(|| "Y".into());
    Ok(load_csv(&a.data, &outcome, &SchemaHint::new())?)
}

fn cmd_discover(ctx: &Ctx, a: DiscoverArgs) -> Result<()> {
    let alpha = alpha(&a.data, &ctx.file)?;
    let max_cond = a.data.max_cond.or(ctx.file.max_cond).unwrap_or(DEFAULT_MAX_COND);
    let table = load_data(&a.data, &ctx.file)?;
    let started = Instant::now();
    let parents = find_parents(&table, alpha, max_cond)?;
    ctx.log(format_args!(
        "{} tests in {:.2?}",
        parents.n_tests(),
        started.elapsed()
    ));
    if ctx.json {
        return print_json(&parents);
    }
    println!("{}", parents.parents.join(" "));
    if ctx.verbose {
        for t in &parents.trace {
            println!(
                "{} _||_ {} | {{{}}}  stat {:.4}  p {:.4}  {}",
                t.feature,
                parents.outcome,
                t.conditioning.join(","),
                t.statistic,
                t.p_value,
                if t.independent { "independent" } else { "dependent" }
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model_id: String,
    path: &'a Path,
    model_kind: String,
    parents: &'a [String],
    warnings: &'a [String],
}

fn cmd_train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let f = &ctx.file;
    let alpha = alpha(&a.data, f)?;
    let kind: ModelKind = a
        .model
        .clone()
        .or(f.model.clone())
        .ok_or_else(|| CliError::Usage("--model is required".into()))?
        .parse()?;
    let mut spec = ModelSpec::new(kind).with_seed(ctx.seed());
    let h = &mut spec.hyperparams;
    h.n_trees = a.trees.or(f.trees);
    h.max_depth = a.max_depth.or(f.max_depth);
    h.min_leaf = a.min_leaf.or(f.min_leaf);
    h.max_features = a.max_features.or(f.max_features);
    spec.validate()?;
    let opts = BuildOptions {
        alpha,
        max_cond: a.data.max_cond.or(f.max_cond).unwrap_or(DEFAULT_MAX_COND),
        variant: if a.all_features {
            Variant::AllVariables
        } else {
            Variant::ParentsOnly
        },
    };
    let table = load_data(&a.data, f)?;
    let started = Instant::now();
    let model = build_model(&table, &spec, &opts)?;
    ctx.log(format_args!("trained {} in {:.2?}", kind, started.elapsed()));
    for w in &model.metadata.warnings {
        eprintln!("warning: {w}");
    }
    save_model(&model, &a.out).map_err(internal)?;
    let summary = TrainSummary {
        model_id: model.content_id(),
        path: &a.out,
        model_kind: kind.to_string(),
        parents: &model.feature_names,
        warnings: &model.metadata.warnings,
    };
    if ctx.json {
        return print_json(&summary);
    }
    println!(
        "{} on [{}] written to {} (id {})",
        summary.model_kind,
        summary.parents.join(", "),
        a.out.display(),
        summary.model_id
    );
    Ok(())
}

fn read_instance(arg: &str) -> Result<Instance> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') {
        arg.to_string()
    } else if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("cannot read {arg}: {e}")))?
    } else {
        return Ok(Instance::parse_inline(arg)?);
    };
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid instance JSON: {e}")))
}

fn cmd_whatif(ctx: &Ctx, a: WhatifArgs) -> Result<()> {
    let f = &ctx.file;
    let model = load_model(&a.model)?;
    let instance = read_instance(&a.instance)?;
    let delta_overrides = match &a.delta_overrides {
        Some(s) => Instance::parse_inline(s)?
            .iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        None => Default::default(),
    };
    let opts = WhatIfOptions {
        k: a.k.or(f.k).unwrap_or(DEFAULT_K),
        delta: a.delta.or(f.delta).unwrap_or(DEFAULT_DELTA),
        delta_overrides,
        class_of_interest: a.class_of_interest.or(f.class_of_interest).unwrap_or(1),
        rank_by: match a.rank_by {
            RankArg::Signed => RankBy::Signed,
            RankArg::Absolute => RankBy::Absolute,
        },
        include_excluded: a.include_excluded,
        exceedance_threshold: a.exceedance,
    };
    let report = whatif(&model, &instance, &opts)?;
    for w in &report.warnings {
        ctx.log(format_args!("warning: {w}"));
    }
    println!("{}", report.to_json());
    Ok(())
}

fn model_specs(names: &[String], defaults: Vec<ModelSpec>, seed: u64) -> Result<Vec<ModelSpec>> {
    let specs = if names.is_empty() {
        defaults
    } else {
        names
            .iter()
            .map(|n| {
                let kind: ModelKind = n.parse()?;
                Ok(defaults
                    .iter()
                    .find(|s| s.kind == kind)
                    .cloned()
                    .unwrap_or_else(|| ModelSpec::new(kind)))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(specs.into_iter().map(|s| s.with_seed(seed)).collect())
}

fn report_format(out: &BenchOut, file: &FileConfig) -> Result<ReportFormat> {
    out.format
        .clone()
        .or(file.format.clone())
        .unwrap_or_else(|| "md".into())
        .parse()
        .map_err(|e: String| CliError::Usage(e))
}

fn emit_report(
    ctx: &Ctx,
    out: &BenchOut,
    stem: &str,
    format: ReportFormat,
    text: &str,
    rows: &impl Serialize,
) -> Result<()> {
    if let Some(dir) = &out.out {
        std::fs::create_dir_all(dir).map_err(internal)?;
        let ext = match format {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
        };
        write_report(dir.join(format!("{stem}.{ext}")), text)?;
        let json = serde_json::to_string_pretty(rows).map_err(internal)?;
        write_report(dir.join(format!("{stem}.json")), &(json + "\n"))?;
        ctx.log(format_args!("reports written to {}", dir.display()));
    }
    if ctx.json {
        print_json(rows)
    } else {
        print!("{text}");
        Ok(())
    }
}

fn cmd_bias(ctx: &Ctx, a: BiasArgs) -> Result<()> {
    let f = &ctx.file;
    let defaults = BiasConfig::default();
    let scm: ScmId = a.scm.parse().map_err(CliError::Usage)?;
    let alpha = a.alpha.or(f.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")));
    }
    let config = BiasConfig {
        scm,
        sizes: if a.sizes.is_empty() {
            f.sizes.clone().unwrap_or(defaults.sizes)
        } else {
            a.sizes.clone()
        },
        reps: a.out.reps.or(f.reps).unwrap_or(defaults.reps),
        specs: model_specs(&a.out.models, defaults.specs, ctx.seed())?,
        seed: ctx.seed(),
        alpha,
        max_cond: a.max_cond.or(f.max_cond).unwrap_or(DEFAULT_MAX_COND),
    };
    let format = report_format(&a.out, f)?;
    let started = Instant::now();
    let rows = bias_experiment(&config)?;
    ctx.log(format_args!("bias experiment finished in {:.1?}", started.elapsed()));
    let text = render_bias(&rows, format, a.scale.or(f.scale).unwrap_or(1.0));
    emit_report(ctx, &a.out, "bias", format, &text, &rows)
}

fn cmd_robust(ctx: &Ctx, a: RobustArgs) -> Result<()> {
    let f = &ctx.file;
    let defaults = RobustConfig::default();
    let config = RobustConfig {
        n: a.n.or(f.n).unwrap_or(defaults.n),
        reps: a.out.reps.or(f.reps).unwrap_or(defaults.reps),
        specs: model_specs(&a.out.models, defaults.specs, ctx.seed())?,
        seed: ctx.seed(),
        train_fraction: defaults.train_fraction,
    };
    let format = report_format(&a.out, f)?;
    let started = Instant::now();
    let rows = robustness_experiment(&config)?;
    ctx.log(format_args!("robustness experiment finished in {:.1?}", started.elapsed()));
    let text = render_robust(&rows, format);
    emit_report(ctx, &a.out, "robust", format, &text, &rows)
}

fn cmd_serve(ctx: &Ctx, a: ServeArgs) -> Result<()> {
    let f = &ctx.file;
    let config = mode_service::ServeConfig {
        bind: a.bind.or(f.bind.clone()).unwrap_or_else(|| "127.0.0.1".into()),
        port: a.port.or(f.port).unwrap_or(8080),
        model_dir: a.model_dir.or(f.model_dir.clone()),
        cors_origins: if a.cors_origins.is_empty() {
            f.cors_origins
                .clone()
                .unwrap_or_else(|| vec!["http://localhost:5173".into()])
        } else {
            a.cors_origins
        },
    };
    ctx.log(format_args!("listening on {}:{}", config.bind, config.port));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(internal)?;
    runtime.block_on(mode_service::serve(config)).map_err(internal)
}
