//! Wind-gust heatmap analysis and visual-QA dataset tooling.
//!
//! The crate is organised as a pipeline:
//!
//! - [`grid`]: gridded wind-gust fields (WGF text format, synthetic storms)
//! - [`render`]: Beaufort classification, palette and equirectangular rasters
//! - [`spot`]: color masks, contour tracing and in-region representative points
//! - [`geo`]: boundary polygons, point-in-polygon and a bucketed spatial index
//! - [`qa`]: question/answer templates, split assignment and JSONL I/O
//! - [`eval`]: answer parsing and the scoring metrics, plus the LLM judge client

pub mod eval;
pub mod geo;
pub mod grid;
pub mod qa;
pub mod render;
pub mod spot;

pub use geo::{BoundarySet, GeoPoint, LocationRecord, SpatialIndex};
pub use grid::WindGrid;
pub use render::{BeaufortTable, ColorGroup, RasterImage};
pub use spot::{BitMask, SpotConfig, SpotResult};

/// Small stable 64-bit hash used to derive per-item seeds from string ids.
pub fn stable_hash(s: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Small simplified boundary files bundled for tests and demos.
pub mod fixtures {
    use crate::geo::{load_boundaries, BoundaryKind, BoundarySet, LoadOptions};

    pub const LAND_GEOJSON: &str = include_str!("../fixtures/land.geojson");
    pub const OCEAN_GEOJSON: &str = include_str!("../fixtures/ocean.geojson");

    pub fn land() -> BoundarySet {
        load_boundaries(LAND_GEOJSON, BoundaryKind::Land, &LoadOptions::default()).expect("bundled land fixture")
    }

    pub fn ocean() -> BoundarySet {
        load_boundaries(OCEAN_GEOJSON, BoundaryKind::Ocean, &LoadOptions::default()).expect("bundled ocean fixture")
    }

    /// Every feature name in both bundled files, sorted and deduplicated.
    pub fn gazetteer() -> Vec<String> {
        let mut names: Vec<String> = land().names().chain(ocean().names()).map(str::to_string).collect();
        names.sort();
        names.dedup();
        names
    }
}
