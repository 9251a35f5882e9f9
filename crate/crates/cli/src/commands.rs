use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use gustqa_core::eval::{evaluate, JudgeClient, JudgeConfig, Prediction};
use gustqa_core::geo::BoundaryKind;
use gustqa_core::grid::{grid_stats, synth_grid, write_wgf, Extent, SyntheticSpec};
use gustqa_core::qa::{read_jsonl, DatasetStats, NamedPoints, QARecord};
use gustqa_core::render::{encode_png, read_png, ColorGroup};
use gustqa_core::spot::{annotate, MarkerStyle, SpotResult};
use serde::de::DeserializeOwned;
use tracing::info;

use crate::config::{load_boundary_file, load_palette, parse_colors, PipelineConfig};
use crate::error::{CliError, CliResult, ExitCode};
use crate::io::write_atomic;
use crate::pipeline::{
    pretty_json, read_grid, records_to_jsonl, run_pipeline, stage_generate, stage_geoindex, stage_render, stage_spot,
    Indexes,
};

#[derive(Debug, Parser)]
#[command(name = "gustqa", version, about = "Wind-gust heatmaps to visual QA datasets")]
pub struct Cli {
    /// Log filter, e.g. `info` or `gustqa=debug`; RUST_LOG wins when set.
    #[arg(long, global = true, default_value = "info")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one wind grid to a Beaufort-colored PNG.
    Render(RenderArgs),
    /// Extract representative points from a rendered heatmap.
    Spot(SpotArgs),
    /// Attach place names to a points file.
    Geoindex(GeoindexArgs),
    /// Build the QA dataset from named-points files.
    Generate(GenerateArgs),
    /// Score predictions against a gold dataset.
    Evaluate(EvaluateArgs),
    /// Summarize a dataset file or a wind grid.
    Stats(StatsArgs),
    /// Run every stage over a directory of grids.
    Pipeline(PipelineArgs),
    /// Write randomized storm grids for testing.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Pipeline config; only the sections this stage uses are read.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> CliResult<PipelineConfig> {
        match &self.config {
            Some(p) => PipelineConfig::from_file(p),
            None => Ok(PipelineConfig::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Land boundaries to draw as coastlines.
    #[arg(long)]
    pub coastlines: Option<PathBuf>,
    #[arg(long)]
    pub palette: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct SpotArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated color groups.
    #[arg(long, value_parser = parse_color_list)]
    pub colors: Option<ColorList>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Image reference stored in the points file; defaults to the image path.
    #[arg(long)]
    pub image_ref: Option<String>,
    /// Geographic bounds as north,south,west,east; the whole globe by default.
    #[arg(long, value_parser = parse_extent)]
    pub extent: Option<Extent>,
    /// Also write a copy of the image with the points drawn on it.
    #[arg(long)]
    pub annotate: Option<PathBuf>,
    #[arg(long)]
    pub palette: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub land: PathBuf,
    #[arg(long)]
    pub ocean: PathBuf,
}

#[derive(Debug, Args)]
pub struct GeoindexArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub boundaries: BoundaryArgs,
    /// Nearest-vertex fallback radius in degrees.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Named-points files, or directories of them.
    #[arg(long, required = true, num_args = 1..)]
    pub named: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Boundary files supplying the gazetteer for false verification answers.
    #[command(flatten)]
    pub boundaries: BoundaryArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub preds: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-record scores as JSONL.
    #[arg(long)]
    pub details: Option<PathBuf>,
    /// Judge client config; description records are judged only when set.
    #[arg(long)]
    pub judge_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Written to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub grids_dir: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long, default_value_t = 90)]
    pub nlat: usize,
    #[arg(long, default_value_t = 180)]
    pub nlon: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Deduplicated color groups in the order given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorList(pub Vec<ColorGroup>);

fn parse_color_list(s: &str) -> Result<ColorList, String> {
    parse_colors(s).map(ColorList)
}

pub fn parse_extent(s: &str) -> Result<Extent, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [lat_north, lat_south, lon_west, lon_east] = v[..] else {
        return Err("expected north,south,west,east".into());
    };
    let e = Extent { lat_north, lat_south, lon_west, lon_east };
    e.validate().map_err(|e| e.to_string())?;
    Ok(e)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => Ok(write_atomic(p, bytes)?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).context("writing stdout")?;
            Ok(())
        }
    }
}

fn load_indexes(b: &BoundaryArgs, cfg: &PipelineConfig) -> CliResult<Indexes> {
    let land = load_boundary_file(&b.land, BoundaryKind::Land, &cfg.boundary_keys.land)?;
    let ocean = load_boundary_file(&b.ocean, BoundaryKind::Ocean, &cfg.boundary_keys.ocean)?;
    Ok(Indexes::build(land, ocean, cfg.index_cell_deg))
}

fn render_cmd(a: RenderArgs) -> CliResult<ExitCode> {
    let mut cfg = a.config.load()?;
    if let Some(w) = a.width {
        cfg.render.width = w;
    }
    if let Some(h) = a.height {
        cfg.render.height = h;
    }
    let table = load_palette(a.palette.as_deref().or(cfg.paths.palette.as_deref()))?;
    let grid = read_grid(&a.grid)?;
    let land = match &a.coastlines {
        Some(p) => {
            cfg.render.overlay_coastlines = true;
            Some(load_boundary_file(p, BoundaryKind::Land, &cfg.boundary_keys.land)?)
        }
        None if cfg.render.overlay_coastlines => {
            let p = cfg.paths.land.as_deref().ok_or_else(|| {
                CliError::usage(anyhow!("overlay_coastlines is set but neither --coastlines nor paths.land is given"))
            })?;
            Some(load_boundary_file(p, BoundaryKind::Land, &cfg.boundary_keys.land)?)
        }
        None => None,
    };
    let img = stage_render(&grid, &cfg.render, &table, land.as_ref()).map_err(CliError::usage)?;
    write_atomic(&a.out, &encode_png(&img).map_err(CliError::data)?)?;
    info!(out = %a.out.display(), width = img.width, height = img.height, "rendered");
    Ok(ExitCode::Success)
}

fn spot_cmd(a: SpotArgs) -> CliResult<ExitCode> {
    let mut cfg = a.config.load()?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.apply_seed();
    let colors = a.colors.map_or(cfg.colors, |c| c.0);
    let table = load_palette(a.palette.as_deref().or(cfg.paths.palette.as_deref()))?;
    let img = read_png(&a.image).with_context(|| format!("reading {}", a.image.display()))?;
    let image_ref = a.image_ref.unwrap_or_else(|| a.image.to_string_lossy().into_owned());
    let extent = a.extent.unwrap_or_default();
    let result = stage_spot(&img, &image_ref, &colors, &cfg.spot, &table, extent).map_err(CliError::usage)?;
    write_atomic(&a.out, result.to_json().as_bytes())?;
    if let Some(p) = &a.annotate {
        let marked = annotate(&img, &result, &MarkerStyle::default());
        write_atomic(p, &encode_png(&marked).map_err(CliError::data)?)?;
    }
    info!(out = %a.out.display(), points = result.point_count(), "spot done");
    Ok(ExitCode::Success)
}

fn geoindex_cmd(a: GeoindexArgs) -> CliResult<ExitCode> {
    let cfg = a.config.load()?;
    let tol = a.tol.unwrap_or(cfg.locate_tol_deg);
    if !(tol >= 0.0) {
        return Err(CliError::usage(anyhow!("--tol must be >= 0")));
    }
    let points: SpotResult = read_json(&a.points)?;
    let idx = load_indexes(&a.boundaries, &cfg)?;
    let named = stage_geoindex(&points, &idx, tol);
    write_atomic(&a.out, named.to_json().as_bytes())?;
    info!(out = %a.out.display(), named = named.points.len(), dropped = named.unknown_dropped, "geoindex done");
    Ok(ExitCode::Success)
}

/// Expands directories to their `*.json` entries, sorted.
fn named_files(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|e| e == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn generate_cmd(a: GenerateArgs) -> CliResult<ExitCode> {
    let mut cfg = a.config.load()?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.apply_seed();
    cfg.gen.validate().map_err(CliError::usage)?;
    let named: Vec<NamedPoints> = named_files(&a.named)?.iter().map(|p| read_json(p)).collect::<CliResult<_>>()?;
    let idx = load_indexes(&a.boundaries, &cfg)?;
    let (records, stats) = stage_generate(&named, &idx.gazetteer(), &cfg.gen)?;
    write_atomic(&a.out, &records_to_jsonl(&records)?)?;
    if let Some(p) = &a.stats {
        write_atomic(p, &pretty_json(&stats))?;
    }
    info!(out = %a.out.display(), images = stats.images, records = stats.records, "generated");
    Ok(ExitCode::Success)
}

fn evaluate_cmd(a: EvaluateArgs) -> CliResult<ExitCode> {
    let preds: Vec<Prediction> = read_jsonl_file(&a.preds)?;
    let golds: Vec<QARecord> = read_jsonl_file(&a.gold)?;
    let judge = match &a.judge_config {
        Some(p) => {
            let jc: JudgeConfig = read_json(p).map_err(|e| CliError::usage(e.source))?;
            Some(JudgeClient::new(jc).map_err(CliError::usage)?)
        }
        None => None,
    };
    let (report, details) = evaluate(&preds, &golds, judge.as_ref()).map_err(CliError::data)?;
    write_atomic(&a.out, &pretty_json(&report))?;
    if let Some(p) = &a.details {
        write_atomic(p, &records_to_jsonl_any(&details)?)?;
    }
    info!(out = %a.out.display(), records = report.records, missing = report.missing_predictions, "evaluated");
    Ok(ExitCode::Success)
}

fn records_to_jsonl_any<T: serde::Serialize>(items: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    gustqa_core::qa::write_jsonl(&mut buf, items)?;
    Ok(buf)
}

fn stats_cmd(a: StatsArgs) -> CliResult<ExitCode> {
    let bytes = if let Some(p) = &a.dataset {
        let records: Vec<QARecord> = read_jsonl_file(p)?;
        let mut stats = DatasetStats::from_records(&records, &[]);
        stats.images = stats.per_split_images.values().sum();
        pretty_json(&stats)
    } else {
        let p = a.grid.as_deref().expect("clap requires one of dataset or grid");
        let grid = read_grid(p)?;
        pretty_json(&grid_stats(&grid, &load_palette(None)?))
    };
    emit(a.out.as_deref(), &bytes)?;
    Ok(ExitCode::Success)
}

fn pipeline_cmd(a: PipelineArgs) -> CliResult<ExitCode> {
    let mut cfg = a.config.load()?;
    if let Some(d) = a.grids_dir {
        cfg.paths.grids_dir = Some(d);
    }
    if let Some(o) = a.output {
        cfg.paths.output = Some(o);
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let outcome = run_pipeline(cfg)?;
    if outcome.code == ExitCode::Partial {
        for im in outcome.manifest.images.iter().filter(|i| i.error.is_some()) {
            eprintln!("gustqa: {} failed: {}", im.grid, im.error.as_deref().unwrap_or_default());
        }
    }
    Ok(outcome.code)
}

fn synth_cmd(a: SynthArgs) -> CliResult<ExitCode> {
    if a.count == 0 || a.nlat == 0 || a.nlon == 0 {
        return Err(CliError::usage(anyhow!("count, nlat and nlon must be positive")));
    }
    for i in 0..a.count {
        let seed = a.seed.wrapping_add(i as u64);
        let spec = SyntheticSpec::random_storms(seed, a.nlat, a.nlon);
        let grid = synth_grid(&spec, seed).map_err(CliError::usage)?;
        write_atomic(&a.out_dir.join(format!("synth-{i:03}.wgf")), write_wgf(&grid).as_bytes())?;
    }
    info!(dir = %a.out_dir.display(), count = a.count, "synthesized");
    Ok(ExitCode::Success)
}

pub fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Render(a) => render_cmd(a),
        Command::Spot(a) => spot_cmd(a),
        Command::Geoindex(a) => geoindex_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Stats(a) => stats_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a),
        Command::Synth(a) => synth_cmd(a),
    }
}
