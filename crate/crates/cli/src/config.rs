//! Pipeline configuration file.
//!
//! Precedence is flags, then the config file, then built-in defaults. The
//! top-level `seed` overrides both the k-means and the generation seeds.

use std::path::{Path, PathBuf};

use anyhow::Context;
use gustqa_core::geo::{load_boundaries, BoundaryKind, BoundarySet, LoadOptions};
use gustqa_core::qa::GenConfig;
use gustqa_core::render::{BeaufortTable, ColorGroup, RenderConfig};
use gustqa_core::spot::SpotConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub grids_dir: Option<PathBuf>,
    pub land: Option<PathBuf>,
    pub ocean: Option<PathBuf>,
    /// Beaufort table JSON; the built-in palette when absent.
    pub palette: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryKeys {
    pub land: LoadOptions,
    pub ocean: LoadOptions,
}

impl Default for BoundaryKeys {
    fn default() -> Self {
        Self { land: LoadOptions::default(), ocean: LoadOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub boundary_keys: BoundaryKeys,
    pub render: RenderConfig,
    pub spot: SpotConfig,
    pub gen: GenConfig,
    pub colors: Vec<ColorGroup>,
    /// Nearest-vertex fallback radius for naming, degrees.
    pub locate_tol_deg: f64,
    pub index_cell_deg: f64,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            boundary_keys: BoundaryKeys::default(),
            render: RenderConfig::default(),
            spot: SpotConfig::default(),
            gen: GenConfig::default(),
            colors: ColorGroup::ALL.to_vec(),
            locate_tol_deg: 1.0,
            index_cell_deg: 5.0,
            seed: 0,
            workers: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(CliError::usage)?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(CliError::usage)
    }

    /// Push the top-level seed into the stages that consume one.
    pub fn apply_seed(&mut self) {
        self.spot.kmeans.seed = self.seed;
        self.gen.seed = self.seed;
    }

    /// Checks that every referenced input exists and the stage configs are coherent.
    pub fn validate(&self) -> CliResult<()> {
        let need = |p: &Option<PathBuf>, what: &str| -> CliResult<()> {
            match p {
                None => Err(CliError::usage(anyhow::anyhow!("config is missing paths.{what}"))),
                Some(p) if !p.exists() => {
                    Err(CliError::usage(anyhow::anyhow!("paths.{what}: {} does not exist", p.display())))
                }
                Some(_) => Ok(()),
            }
        };
        need(&self.paths.grids_dir, "grids_dir")?;
        need(&self.paths.land, "land")?;
        need(&self.paths.ocean, "ocean")?;
        if self.paths.palette.is_some() {
            need(&self.paths.palette, "palette")?;
        }
        if self.paths.output.is_none() {
            return Err(CliError::usage(anyhow::anyhow!("config is missing paths.output")));
        }
        self.spot.validate().map_err(CliError::usage)?;
        self.gen.validate().map_err(CliError::usage)?;
        if !(self.locate_tol_deg >= 0.0) || !(self.index_cell_deg > 0.0) {
            return Err(CliError::usage(anyhow::anyhow!("locate_tol_deg must be >= 0 and index_cell_deg > 0")));
        }
        if self.render.width == 0 || self.render.height == 0 {
            return Err(CliError::usage(anyhow::anyhow!("render width and height must be positive")));
        }
        Ok(())
    }
}

pub fn load_palette(path: Option<&Path>) -> CliResult<BeaufortTable> {
    match path {
        None => Ok(BeaufortTable::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading palette {}", p.display()))?;
            BeaufortTable::from_json(&text).with_context(|| format!("palette {}", p.display())).map_err(CliError::data)
        }
    }
}

pub fn load_boundary_file(path: &Path, kind: BoundaryKind, opts: &LoadOptions) -> CliResult<BoundarySet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_boundaries(&text, kind, opts).with_context(|| format!("loading {}", path.display())).map_err(CliError::data)
}

pub fn parse_colors(list: &str) -> Result<Vec<ColorGroup>, String> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let c: ColorGroup = part.parse().map_err(|e| format!("{e}"))?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err("no colors given".into());
    }
    Ok(out)
}
