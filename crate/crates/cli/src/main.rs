use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chromashape::analysis::{
    baseline_report, rank_validation, trial_palettes, RankValidationConfig,
};
use chromashape::catalog::designer_tool_palettes;
use chromashape::evidence::{read_trial_log, write_trial_log, Evidence, Marker, PoolDims};
use chromashape::optimizer::{
    nearest_representative, Constraints, Encoding, Palette, PaletteRecord, SwapPart,
};
use chromashape::stimgen::{build_plan, render_svg, Experiment};
use chromashape::synthetic::LatentModel;
use chromashape_service::api::{serve, AppState};
use chromashape_service::data::DataSources;
use chromashape_service::service::{
    preview_marks, stimulus, GenerateRequest, GenerateResponse, SwapRequest,
};
use chromashape_service::{ApiError, Config, Engine};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "chromashape",
    version,
    about = "Categorical palette generation from pairwise accuracy data"
)]
struct Cli {
    /// Directory holding colors.tsv, shapes.tsv and evidence.json.
    #[arg(long, global = true, env = "CHROMASHAPE_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Evidence bundle or latent model JSON; overrides the data directory.
    #[arg(long, global = true)]
    evidence: Option<PathBuf>,
    /// TOML file with weights, generator, JND and auto-encoding settings.
    #[arg(long, global = true, env = "CHROMASHAPE_CONFIG")]
    config: Option<PathBuf>,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank palettes for a category count and constraints.
    Generate(GenerateArgs),
    /// Replace one element of a palette with its best alternative.
    Swap(SwapArgs),
    /// Turn trial logs into an evidence bundle.
    Ingest(IngestArgs),
    /// Print a pairwise accuracy matrix.
    Matrix(MatrixArgs),
    /// Render one scatterplot stimulus as SVG.
    Stim(StimArgs),
    /// Build the design manifest of an experiment.
    Plan(PlanArgs),
    /// Correlate model ranks with observed palette accuracy.
    Validate(ValidateArgs),
    /// Compare modelled accuracy of palette groups.
    Report(ReportArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Write a synthetic latent model and optionally trials drawn from it.
    SynthEvidence(SynthArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// auto, color_only, shape_only or redundant.
    #[arg(long = "type", default_value = "auto")]
    encoding: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=10))]
    n: u64,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    require_color: Vec<u16>,
    #[arg(long, value_delimiter = ',')]
    require_shape: Vec<u16>,
    /// Colors to include, mapped to the nearest pool color.
    #[arg(long, value_delimiter = ',')]
    require_hex: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    exclude_color: Vec<u16>,
    #[arg(long, value_delimiter = ',')]
    exclude_shape: Vec<u16>,
    /// JSON constraints file merged with the flags.
    #[arg(long)]
    constraints: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(clap::Args)]
struct SwapArgs {
    /// Palette record or generate output; `-` reads stdin.
    #[arg(long)]
    palette: String,
    /// Palette to take from a generate output.
    #[arg(long, default_value_t = 1)]
    rank: usize,
    #[arg(long)]
    position: usize,
    #[arg(long)]
    part: Option<String>,
    #[arg(long)]
    constraints: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(clap::Args)]
struct IngestArgs {
    #[arg(long, required = true, num_args = 1..)]
    trials: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    min_observations: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Json,
    Tsv,
}

#[derive(clap::Args)]
struct MatrixArgs {
    #[arg(long)]
    axis: String,
    #[arg(long, default_value = "all")]
    bin: String,
    #[arg(long, value_enum, default_value = "json")]
    format: MatrixFormat,
}

#[derive(clap::Args)]
struct StimArgs {
    /// Pool ids or #rrggbb values.
    #[arg(long, value_delimiter = ',')]
    colors: Vec<String>,
    /// Shape ids or names.
    #[arg(long, value_delimiter = ',')]
    shapes: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    engagement: bool,
    /// SVG output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the point data as JSON.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PlanArgs {
    #[arg(long)]
    experiment: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render every design and engagement check into this directory.
    #[arg(long)]
    render: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ValidateArgs {
    #[arg(long)]
    trials: PathBuf,
    #[arg(long, default_value_t = 50)]
    samples_per_n: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=10), default_value_t = 5)]
    n: u64,
    #[arg(long = "type", default_value = "color_only")]
    encoding: String,
    /// JSON object mapping group names to palette lists.
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Generated palettes in the default comparison.
    #[arg(long, default_value_t = 10)]
    generated: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Trials to sample from the model.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, requires = "trials")]
    trials_out: Option<PathBuf>,
}

struct Context {
    sources: DataSources,
    config: Config,
}

impl Context {
    fn engine(&self) -> Result<Engine, ApiError> {
        let (pool, catalog) = self.sources.load_pools(&self.config.jnd.params()?)?;
        let dims = PoolDims {
            colors: pool.len(),
            shapes: catalog.len(),
        };
        let evidence = self
            .sources
            .load_evidence(dims, self.config.min_observations)?;
        Engine::new(pool, catalog, evidence, self.config.clone())
    }

    fn pools(
        &self,
    ) -> Result<
        (
            chromashape::catalog::ColorPool,
            chromashape::catalog::ShapeCatalog,
        ),
        ApiError,
    > {
        self.sources.load_pools(&self.config.jnd.params()?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), ApiError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let ctx = Context {
        sources: DataSources {
            data_dir: cli.data_dir,
            evidence: cli.evidence,
        },
        config,
    };
    match cli.command {
        Command::Generate(a) => generate(&ctx, a),
        Command::Swap(a) => swap(&ctx, a),
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Matrix(a) => matrix(&ctx, a),
        Command::Stim(a) => stim(&ctx, a),
        Command::Plan(a) => plan(&ctx, a),
        Command::Validate(a) => validate(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Serve(a) => serve_cmd(&ctx, a),
        Command::SynthEvidence(a) => synth(&ctx, a),
    }
}

fn io_err(path: &Path, e: io::Error) -> ApiError {
    ApiError::new(500, "io", Some(path.display().to_string()), e.to_string())
}

fn read_text(source: &str) -> Result<String, ApiError> {
    if source == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| io_err(Path::new("-"), e))?;
        Ok(s)
    } else {
        fs::read_to_string(source).map_err(|e| io_err(Path::new(source), e))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(text: &str, field: &str) -> Result<T, ApiError> {
    serde_json::from_str(text).map_err(|e| ApiError::bad_request(field, e.to_string()))
}

fn emit<T: Serialize>(value: &T, pretty: bool) -> Result<(), ApiError> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| ApiError::internal(e.to_string()))?;
    write_out(None, &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), ApiError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            let mut out = io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(io_err(Path::new("-"), e)),
                _ => Ok(()),
            }
        }
    }
}

fn load_constraints(path: Option<&PathBuf>) -> Result<Constraints, ApiError> {
    match path {
        Some(p) => read_json(&read_text(&p.display().to_string())?, "constraints"),
        None => Ok(Constraints::default()),
    }
}

fn generate(ctx: &Context, a: GenerateArgs) -> Result<(), ApiError> {
    let mut req = GenerateRequest::new(&a.encoding, a.n as usize);
    req.constraints = load_constraints(a.constraints.as_ref())?;
    req.constraints.required_colors.extend(a.require_color);
    req.constraints.required_shapes.extend(a.require_shape);
    req.constraints.excluded_colors.extend(a.exclude_color);
    req.constraints.excluded_shapes.extend(a.exclude_shape);
    req.required_hex = a.require_hex;
    req.k_out = a.k;
    req.seed = a.seed;
    let engine = ctx.engine()?;
    emit(&engine.generate(&req, None)?, a.pretty)
}

fn swap(ctx: &Context, a: SwapArgs) -> Result<(), ApiError> {
    let text = read_text(&a.palette)?;
    let value: serde_json::Value = read_json(&text, "palette")?;
    let palette: PaletteRecord = if value.get("palettes").is_some() {
        let resp: GenerateResponse = read_json(&text, "palette")?;
        resp.palettes
            .into_iter()
            .find(|p| p.rank == a.rank)
            .ok_or_else(|| {
                ApiError::bad_request("rank", format!("no palette of rank {}", a.rank))
            })?
    } else {
        read_json(&text, "palette")?
    };
    let part = a
        .part
        .as_deref()
        .map(|p| p.parse::<SwapPart>())
        .transpose()
        .map_err(|e| ApiError::bad_request("part", e.to_string()))?;
    let req = SwapRequest {
        palette,
        position: a.position,
        part,
        constraints: load_constraints(a.constraints.as_ref())?,
        weights: None,
    };
    let engine = ctx.engine()?;
    emit(&engine.swap(&req, None)?, a.pretty)
}

fn ingest(ctx: &Context, a: IngestArgs) -> Result<(), ApiError> {
    let (pool, catalog) = ctx.pools()?;
    let dims = PoolDims {
        colors: pool.len(),
        shapes: catalog.len(),
    };
    let mut records = Vec::new();
    for path in &a.trials {
        let log = read_trial_log(path, &dims)?;
        for w in &log.warnings {
            eprintln!("warning: {w}");
        }
        records.extend(log.records);
    }
    let mut ev = Evidence::from_trials(&records, dims);
    if let Some(m) = a.min_observations.or(ctx.config.min_observations) {
        ev = ev.with_min_observations(m);
    }
    ev.save(&a.out)?;
    eprintln!("{} trials -> {}", records.len(), a.out.display());
    Ok(())
}

fn matrix(ctx: &Context, a: MatrixArgs) -> Result<(), ApiError> {
    let resp = ctx.engine()?.matrix(&a.axis, &a.bin)?;
    match a.format {
        MatrixFormat::Json => emit(&resp, false),
        MatrixFormat::Tsv => {
            let mut text = String::from("i\tj\tacc\ttrials");
            for c in &resp.cells {
                text.push_str(&format!("\n{}\t{}\t{}\t{}", c.i, c.j, c.acc, c.trials));
            }
            write_out(None, &text)
        }
    }
}

fn stim(ctx: &Context, a: StimArgs) -> Result<(), ApiError> {
    let (pool, catalog) = ctx.pools()?;
    let marks = preview_marks(&pool, &catalog, &a.colors, &a.shapes)?;
    let stim = stimulus(&marks, a.seed, a.engagement)?;
    if let Some(p) = &a.data {
        let text = serde_json::to_string(&stim).map_err(|e| ApiError::internal(e.to_string()))?;
        fs::write(p, text).map_err(|e| io_err(p, e))?;
    }
    let svg = render_svg(&stim, &catalog)?;
    write_out(a.out.as_deref(), &svg)
}

fn plan(ctx: &Context, a: PlanArgs) -> Result<(), ApiError> {
    let experiment: Experiment = a
        .experiment
        .parse()
        .map_err(|e: chromashape::Error| ApiError::bad_request("experiment", e.to_string()))?;
    let (pool, catalog) = ctx.pools()?;
    let dims = PoolDims {
        colors: pool.len(),
        shapes: catalog.len(),
    };
    let evidence = if experiment == Experiment::E4 {
        match ctx.sources.load_evidence(dims, ctx.config.min_observations) {
            Ok(e) => Some(e),
            Err(e) => {
                log::warn!("planning without evidence: {e}");
                None
            }
        }
    } else {
        None
    };
    let plan = build_plan(experiment, &pool, &catalog, evidence.as_deref(), a.seed)?;
    if let Some(dir) = &a.render {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for d in &plan.designs {
            let stim = chromashape::stimgen::gen_stimulus(&plan.spec_for(d), &d.marks)?;
            let path = dir.join(format!("design-{:04}.svg", d.id));
            fs::write(&path, render_svg(&stim, &catalog)?).map_err(|e| io_err(&path, e))?;
        }
        for (k, check) in plan.engagement.iter().enumerate() {
            let stim = chromashape::stimgen::gen_engagement_check(
                &plan.engagement_spec(check),
                &check.marks,
            )?;
            let path = dir.join(format!("check-g{:02}-{k:03}.svg", check.group));
            fs::write(&path, render_svg(&stim, &catalog)?).map_err(|e| io_err(&path, e))?;
        }
    }
    let text = serde_json::to_string(&plan).map_err(|e| ApiError::internal(e.to_string()))?;
    eprintln!(
        "{} designs in {} groups",
        plan.designs.len(),
        plan.groups.len()
    );
    write_out(a.out.as_deref(), &text)
}

fn validate(ctx: &Context, a: ValidateArgs) -> Result<(), ApiError> {
    let engine = ctx.engine()?;
    let log = read_trial_log(&a.trials, &engine.dims())?;
    let candidates = trial_palettes(&log.records);
    let config = RankValidationConfig {
        samples_per_n: a.samples_per_n,
        repeats: a.repeats,
        ..RankValidationConfig::default()
    };
    let model = engine.model(None)?;
    let report = rank_validation(&model, &candidates, &log.records, &config, a.seed)?;
    emit(&report, false)
}

fn report(ctx: &Context, a: ReportArgs) -> Result<(), ApiError> {
    let engine = ctx.engine()?;
    let n = a.n as usize;
    let (encoding, _) = engine.resolve_encoding(&a.encoding, n)?;
    let groups: Vec<(String, Vec<Palette>)> = match &a.groups {
        Some(path) => {
            let map: std::collections::BTreeMap<String, Vec<Palette>> =
                read_json(&read_text(&path.display().to_string())?, "groups")?;
            for p in map.values().flatten() {
                p.validate()?;
            }
            map.into_iter().collect()
        }
        None => default_groups(&engine, encoding, n, a.generated)?,
    };
    let model = engine.model(None)?;
    let summary = baseline_report(&groups, &model, &RankValidationConfig::default(), a.seed)?;
    emit(&summary, false)
}

/// Top generated palettes over several seeds against the designer tool
/// palettes mapped onto the pool.
fn default_groups(
    engine: &Engine,
    encoding: Encoding,
    n: usize,
    generated: u64,
) -> Result<Vec<(String, Vec<Palette>)>, ApiError> {
    let mut ours = Vec::new();
    for seed in 0..generated.max(1) {
        let mut req = GenerateRequest::new(encoding.as_str(), n);
        req.k_out = 1;
        req.seed = seed;
        ours.push(engine.generate(&req, None)?.palettes[0].palette()?);
    }
    let mut designer = Vec::new();
    for p in designer_tool_palettes() {
        let mut colors: Vec<u16> = Vec::new();
        for c in &p.colors {
            let id = nearest_representative(c.to_lab(), &engine.pool);
            if !colors.contains(&id) {
                colors.push(id);
            }
        }
        let shapes: Vec<u16> = p
            .shapes
            .iter()
            .filter_map(|s| engine.catalog.by_name(s).map(|e| e.id))
            .collect();
        let entries: Vec<Marker> = match encoding {
            Encoding::ColorOnly => colors.iter().take(n).map(|&c| Marker::color(c)).collect(),
            Encoding::ShapeOnly => shapes.iter().take(n).map(|&s| Marker::shape(s)).collect(),
            Encoding::Redundant => colors
                .iter()
                .zip(&shapes)
                .take(n)
                .map(|(&c, &s)| Marker::pair(c, s))
                .collect(),
        };
        if entries.len() == n {
            designer.push(Palette::new(encoding, entries)?);
        }
    }
    if designer.is_empty() {
        return Err(ApiError::bad_request(
            "n",
            format!("no designer palette provides {n} {encoding} entries"),
        ));
    }
    Ok(vec![
        ("generated".into(), ours),
        ("designer".into(), designer),
    ])
}

fn serve_cmd(ctx: &Context, a: ServeArgs) -> Result<(), ApiError> {
    let state = AppState::new(ctx.engine()?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| ApiError::internal(e.to_string()))?;
    rt.block_on(serve(state, &a.addr))
        .map_err(|e| ApiError::new(500, "io", Some("addr".into()), e.to_string()))
}

fn synth(ctx: &Context, a: SynthArgs) -> Result<(), ApiError> {
    let (pool, catalog) = ctx.pools()?;
    let dims = PoolDims {
        colors: pool.len(),
        shapes: catalog.len(),
    };
    let model = LatentModel::new(dims, a.seed);
    let text =
        serde_json::to_string(&model.to_json()).map_err(|e| ApiError::internal(e.to_string()))?;
    fs::write(&a.out, text).map_err(|e| io_err(&a.out, e))?;
    if let Some(path) = &a.trials_out {
        let trials = model.sample_trials(a.trials, chromashape::seed::derive(a.seed, 1));
        let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
        write_trial_log(io::BufWriter::new(file), &trials).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}
