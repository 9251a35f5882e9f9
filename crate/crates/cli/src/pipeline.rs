//! render, spot, geoindex and generate, composed over a directory of grids.
//!
//! Each stage function here is also what the matching subcommand calls, so
//! running the stages by hand yields the same bytes as `pipeline`.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use gustqa_core::geo::{BoundaryKind, BoundarySet, SpatialIndex};
use gustqa_core::grid::{parse_wgf, Extent, WindGrid};
use gustqa_core::qa::{generate_dataset, write_jsonl, DatasetStats, GenConfig, NamedPoints, QARecord};
use gustqa_core::render::{encode_png, overlay_coastlines, render, BeaufortTable, ColorGroup, RasterImage, RenderConfig};
use gustqa_core::spot::{run_spot, PixelFrame, SpotConfig, SpotResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::config::{load_boundary_file, load_palette, PipelineConfig};
use crate::error::{CliError, CliResult, ExitCode};
use crate::io::{sha256_hex, write_atomic};

pub const SCHEMA_VERSION: u32 = 1;

pub fn read_grid(path: &Path) -> anyhow::Result<WindGrid> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_wgf(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn stage_render(
    grid: &WindGrid,
    cfg: &RenderConfig,
    table: &BeaufortTable,
    coastlines: Option<&BoundarySet>,
) -> anyhow::Result<RasterImage> {
    cfg.validate(&grid.extent)?;
    let img = render(grid, cfg, table);
    Ok(match coastlines {
        Some(land) if cfg.overlay_coastlines => overlay_coastlines(&img, land, cfg, grid.extent),
        _ => img,
    })
}

pub fn stage_spot(
    img: &RasterImage,
    image_ref: &str,
    colors: &[ColorGroup],
    cfg: &SpotConfig,
    table: &BeaufortTable,
    extent: Extent,
) -> anyhow::Result<SpotResult> {
    let frame = PixelFrame::new(img.width, img.height, extent);
    Ok(run_spot(img, image_ref, colors, cfg, table, &frame)?)
}

pub struct Indexes {
    pub land: SpatialIndex,
    pub ocean: SpatialIndex,
}

impl Indexes {
    pub fn build(land: BoundarySet, ocean: BoundarySet, cell_deg: f64) -> Self {
        Self { land: SpatialIndex::build(land, cell_deg), ocean: SpatialIndex::build(ocean, cell_deg) }
    }

    /// All feature names, sorted and deduplicated.
    pub fn gazetteer(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.land.set().names().chain(self.ocean.set().names()).map(str::to_string).collect();
        names.sort();
        names.dedup();
        names
    }
}

pub fn stage_geoindex(points: &SpotResult, idx: &Indexes, tol: f64) -> NamedPoints {
    NamedPoints::from_spot(points, &idx.land, &idx.ocean, tol)
}

pub fn stage_generate(
    named: &[NamedPoints],
    gazetteer: &[String],
    cfg: &GenConfig,
) -> anyhow::Result<(Vec<QARecord>, DatasetStats)> {
    Ok(generate_dataset(named, gazetteer, cfg)?)
}

pub fn records_to_jsonl(records: &[QARecord]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records)?;
    Ok(buf)
}

pub fn pretty_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output root, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageState {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageStatus {
    pub grid: String,
    pub stem: String,
    pub status: ImageState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub points: usize,
    pub named_points: usize,
    pub unknown_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub seed: u64,
    pub config: PipelineConfig,
    pub images: Vec<ImageStatus>,
    pub records: usize,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn failed(&self) -> usize {
        self.images.iter().filter(|i| i.status == ImageState::Failed).count()
    }
}

/// Collects every file written under the output root.
struct Writer {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> anyhow::Result<()> {
        write_atomic(&self.root.join(rel), bytes)?;
        self.artifacts.push(Artifact { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }
}

pub fn list_grids(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut grids: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "wgf"))
        .collect();
    grids.sort();
    Ok(grids)
}

struct GridOutput {
    status: ImageStatus,
    named: Option<NamedPoints>,
    files: Vec<(String, Vec<u8>)>,
}

fn process_grid(path: &Path, cfg: &PipelineConfig, table: &BeaufortTable, idx: &Indexes) -> GridOutput {
    let grid_name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let run = || -> anyhow::Result<(SpotResult, NamedPoints, Vec<(String, Vec<u8>)>)> {
        let grid = read_grid(path)?;
        let img = stage_render(&grid, &cfg.render, table, Some(idx.land.set()))?;
        let image_ref = format!("images/{stem}.png");
        let png = encode_png(&img)?;
        let points = stage_spot(&img, &image_ref, &cfg.colors, &cfg.spot, table, grid.extent)?;
        let named = stage_geoindex(&points, idx, cfg.locate_tol_deg);
        let files = vec![
            (image_ref, png),
            (format!("points/{stem}.json"), points.to_json().into_bytes()),
            (format!("named/{stem}.json"), named.to_json().into_bytes()),
        ];
        Ok((points, named, files))
    };
    match run() {
        Ok((points, named, files)) => {
            info!(grid = %grid_name, points = points.point_count(), named = named.points.len(), "image done");
            GridOutput {
                status: ImageStatus {
                    grid: grid_name,
                    stem,
                    status: ImageState::Ok,
                    error: None,
                    points: points.point_count(),
                    named_points: named.points.len(),
                    unknown_dropped: named.unknown_dropped,
                },
                named: Some(named),
                files,
            }
        }
        Err(e) => {
            warn!(grid = %grid_name, error = %format!("{e:#}"), "image failed");
            GridOutput {
                status: ImageStatus {
                    grid: grid_name,
                    stem,
                    status: ImageState::Failed,
                    error: Some(format!("{e:#}")),
                    points: 0,
                    named_points: 0,
                    unknown_dropped: 0,
                },
                named: None,
                files: Vec::new(),
            }
        }
    }
}

pub struct PipelineOutcome {
    pub manifest: Manifest,
    pub code: ExitCode,
}

/// Runs every stage for every grid. A failing grid is recorded and skipped;
/// if every grid fails the run is a data error.
pub fn run_pipeline(mut cfg: PipelineConfig) -> CliResult<PipelineOutcome> {
    cfg.apply_seed();
    cfg.validate()?;
    let out_root = cfg.paths.output.clone().expect("validated");
    let table = load_palette(cfg.paths.palette.as_deref())?;
    let land = load_boundary_file(cfg.paths.land.as_deref().expect("validated"), BoundaryKind::Land, &cfg.boundary_keys.land)?;
    let ocean =
        load_boundary_file(cfg.paths.ocean.as_deref().expect("validated"), BoundaryKind::Ocean, &cfg.boundary_keys.ocean)?;
    let idx = Indexes::build(land, ocean, cfg.index_cell_deg);
    let grids = list_grids(cfg.paths.grids_dir.as_deref().expect("validated")).map_err(CliError::data)?;
    info!(grids = grids.len(), output = %out_root.display(), "pipeline start");

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(CliError::usage)?;
    let outputs: Vec<GridOutput> = pool.install(|| grids.par_iter().map(|g| process_grid(g, &cfg, &table, &idx)).collect());

    let mut writer = Writer { root: out_root.clone(), artifacts: Vec::new() };
    let mut named = Vec::new();
    let mut images = Vec::new();
    for o in outputs {
        for (rel, bytes) in &o.files {
            writer.put(rel, bytes)?;
        }
        named.extend(o.named);
        images.push(o.status);
    }

    let (records, stats) = stage_generate(&named, &idx.gazetteer(), &cfg.gen)?;
    writer.put("dataset.jsonl", &records_to_jsonl(&records)?)?;
    writer.put("stats.json", &pretty_json(&stats))?;
    writer.artifacts.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        config: cfg.clone(),
        images,
        records: records.len(),
        artifacts: writer.artifacts,
    };
    write_atomic(&out_root.join("manifest.json"), &pretty_json(&manifest))?;

    let failed = manifest.failed();
    let code = if failed == 0 {
        ExitCode::Success
    } else if failed == manifest.images.len() {
        return Err(CliError::data(anyhow!("all {failed} grids failed; see {}", out_root.join("manifest.json").display())));
    } else {
        ExitCode::Partial
    };
    info!(records = manifest.records, failed, "pipeline done");
    Ok(PipelineOutcome { manifest, code })
}
