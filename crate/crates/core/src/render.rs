//! Beaufort classification and equirectangular heatmap rendering.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::BoundarySet;
use crate::grid::{Extent, WindGrid};
use crate::spot::PixelFrame;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid speed {0}: must be finite and >= 0")]
    InvalidSpeed(f64),
    #[error("Beaufort level {0} out of range 0..=12")]
    LevelOutOfRange(u8),
    #[error("unknown color group `{0}` (expected white, green, yellow or red)")]
    UnknownColor(String),
    #[error("invalid palette: {0}")]
    InvalidPalette(String),
    #[error("palette JSON: {0}")]
    PaletteJson(#[from] serde_json::Error),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Png {
        path: String,
        #[source]
        source: image::ImageError,
    },
}

/// The four base colors that SPOT tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorGroup {
    White,
    Green,
    Yellow,
    Red,
}

impl ColorGroup {
    pub const ALL: [ColorGroup; 4] = [ColorGroup::White, ColorGroup::Green, ColorGroup::Yellow, ColorGroup::Red];

    pub fn as_str(self) -> &'static str {
        match self {
            ColorGroup::White => "white",
            ColorGroup::Green => "green",
            ColorGroup::Yellow => "yellow",
            ColorGroup::Red => "red",
        }
    }
}

impl fmt::Display for ColorGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColorGroup {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" => Ok(ColorGroup::White),
            "green" => Ok(ColorGroup::Green),
            "yellow" => Ok(ColorGroup::Yellow),
            "red" => Ok(ColorGroup::Red),
            _ => Err(RenderError::UnknownColor(s.to_string())),
        }
    }
}

pub type Rgb = [u8; 3];

/// One row of the palette file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaufortBand {
    pub level: u8,
    pub name: String,
    pub rgb: Rgb,
    pub lower_mps: f64,
    /// Exclusive upper bound; `None` for the open-ended top band.
    pub upper_mps: Option<f64>,
    pub group: ColorGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeaufortTable {
    bands: Vec<BeaufortBand>,
}

const DEFAULT_BANDS: [(&str, Rgb, f64, ColorGroup); 13] = [
    ("white", [255, 255, 255], 0.0, ColorGroup::White),
    ("light cyan", [232, 255, 255], 0.5, ColorGroup::White),
    ("aquamarine", [230, 255, 246], 1.6, ColorGroup::White),
    ("light green", [144, 238, 144], 3.4, ColorGroup::Green),
    ("light lime green", [190, 245, 120], 5.5, ColorGroup::Green),
    ("light lemon yellow", [205, 250, 140], 8.0, ColorGroup::Green),
    ("light yellow", [255, 240, 120], 10.8, ColorGroup::Yellow),
    ("peach", [255, 215, 110], 13.9, ColorGroup::Yellow),
    ("light coral", [250, 200, 90], 17.2, ColorGroup::Yellow),
    ("salmon", [250, 128, 114], 20.8, ColorGroup::Red),
    ("deep pink", [255, 20, 130], 24.5, ColorGroup::Red),
    ("dark magenta", [170, 0, 70], 28.5, ColorGroup::Red),
    ("dark purple", [110, 0, 40], 32.7, ColorGroup::Red),
];

impl Default for BeaufortTable {
    /// Standard Beaufort thresholds with the 13-color white-to-dark-purple palette.
    fn default() -> Self {
        let bands = DEFAULT_BANDS
            .iter()
            .enumerate()
            .map(|(i, (name, rgb, lower, group))| BeaufortBand {
                level: i as u8,
                name: (*name).to_string(),
                rgb: *rgb,
                lower_mps: *lower,
                upper_mps: DEFAULT_BANDS.get(i + 1).map(|b| b.2),
                group: *group,
            })
            .collect();
        Self { bands }
    }
}

impl BeaufortTable {
    pub fn new(mut bands: Vec<BeaufortBand>) -> Result<Self, RenderError> {
        bands.sort_by_key(|b| b.level);
        let bad = |m: String| Err(RenderError::InvalidPalette(m));
        if bands.len() != 13 {
            return bad(format!("expected 13 bands, got {}", bands.len()));
        }
        for (i, b) in bands.iter().enumerate() {
            if b.level as usize != i {
                return bad(format!("levels must be 0..=12, found duplicate or gap at {}", b.level));
            }
            let expected_group = match i {
                0..=2 => ColorGroup::White,
                3..=5 => ColorGroup::Green,
                6..=8 => ColorGroup::Yellow,
                _ => ColorGroup::Red,
            };
            if b.group != expected_group {
                return bad(format!("level {i} must belong to group {expected_group}"));
            }
            match (bands.get(i + 1), b.upper_mps) {
                (Some(next), Some(up)) if up == next.lower_mps && up > b.lower_mps => {}
                (None, None) => {}
                _ => return bad(format!("band {i} is not contiguous with its successor")),
            }
        }
        if bands[0].lower_mps != 0.0 {
            return bad("band 0 must start at 0 m/s".into());
        }
        for (i, a) in bands.iter().enumerate() {
            if bands[i + 1..].iter().any(|b| b.rgb == a.rgb) {
                return bad(format!("rgb of level {i} is not unique"));
            }
        }
        Ok(Self { bands })
    }

    pub fn from_json(text: &str) -> Result<Self, RenderError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.bands).expect("palette serializes")
    }

    pub fn bands(&self) -> &[BeaufortBand] {
        &self.bands
    }

    pub fn band(&self, level: u8) -> Result<&BeaufortBand, RenderError> {
        self.bands.get(level as usize).ok_or(RenderError::LevelOutOfRange(level))
    }

    /// Beaufort level whose `[lower, upper)` interval contains `speed`.
    pub fn level(&self, speed: f64) -> Result<u8, RenderError> {
        if !speed.is_finite() || speed < 0.0 {
            return Err(RenderError::InvalidSpeed(speed));
        }
        let idx = self.bands.partition_point(|b| b.lower_mps <= speed);
        Ok((idx - 1) as u8)
    }

    pub fn rgb(&self, level: u8) -> Rgb {
        self.bands[level as usize].rgb
    }

    /// Band whose palette color is exactly `rgb`.
    pub fn band_of_rgb(&self, rgb: Rgb) -> Option<&BeaufortBand> {
        self.bands.iter().find(|b| b.rgb == rgb)
    }

    /// Palette colors belonging to one group.
    pub fn group_colors(&self, group: ColorGroup) -> Vec<Rgb> {
        self.bands.iter().filter(|b| b.group == group).map(|b| b.rgb).collect()
    }
}

pub fn beaufort_level(speed: f64) -> Result<u8, RenderError> {
    BeaufortTable::default().level(speed)
}

pub fn color_group(level: u8) -> Result<ColorGroup, RenderError> {
    match level {
        0..=2 => Ok(ColorGroup::White),
        3..=5 => Ok(ColorGroup::Green),
        6..=8 => Ok(ColorGroup::Yellow),
        9..=12 => Ok(ColorGroup::Red),
        _ => Err(RenderError::LevelOutOfRange(level)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn filled(width: usize, height: usize, rgb: Rgb) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        Self { width, height, pixels: vec![rgb; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: Rgb) {
        self.pixels[y * self.width + x] = rgb;
    }

    pub fn frame(&self, extent: Extent) -> PixelFrame {
        PixelFrame::new(self.width, self.height, extent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub overlay_coastlines: bool,
    pub coastline_rgb: Rgb,
    pub coastline_thickness: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 3510,
            height: 1755,
            overlay_coastlines: false,
            coastline_rgb: [0, 0, 0],
            coastline_thickness: 1,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self, extent: &Extent) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidImage("width and height must be >= 1".into()));
        }
        if extent.is_globe() && self.width != 2 * self.height {
            return Err(RenderError::InvalidImage(format!(
                "a full-globe raster needs width = 2 x height, got {}x{}",
                self.width, self.height
            )));
        }
        if self.coastline_thickness == 0 {
            return Err(RenderError::InvalidImage("coastline thickness must be >= 1".into()));
        }
        Ok(())
    }
}

/// Paint each pixel with the palette color of the nearest grid cell.
///
/// The raster covers the grid's extent exactly; NaN cells take the level-0 color.
pub fn render(grid: &WindGrid, cfg: &RenderConfig, table: &BeaufortTable) -> RasterImage {
    let (w, h) = (cfg.width, cfg.height);
    let cell_rgb: Vec<Rgb> = grid
        .values
        .iter()
        .map(|v| table.rgb(table.level(*v).unwrap_or(0)))
        .collect();
    // pixel center (x + 0.5) / w of the way across lands in column floor((2x + 1) * nlon / 2w)
    let cols: Vec<usize> = (0..w).map(|x| (2 * x + 1) * grid.nlon / (2 * w)).collect();
    let mut img = RasterImage::filled(w, h, table.rgb(0));
    for y in 0..h {
        let row = (2 * y + 1) * grid.nlat / (2 * h);
        let src = &cell_rgb[row * grid.nlon..(row + 1) * grid.nlon];
        let dst = &mut img.pixels[y * w..(y + 1) * w];
        for (px, col) in dst.iter_mut().zip(&cols) {
            *px = src[*col];
        }
    }
    img
}

/// Rasterize every boundary ring edge onto the image in the coastline color.
pub fn overlay_coastlines(img: &RasterImage, boundaries: &BoundarySet, cfg: &RenderConfig, extent: Extent) -> RasterImage {
    let mut out = img.clone();
    let frame = img.frame(extent);
    for feature in &boundaries.features {
        for poly in &feature.polygons {
            for ring in std::iter::once(&poly.outer).chain(&poly.holes) {
                let pts: Vec<(i64, i64)> = ring
                    .iter()
                    .filter_map(|p| frame.geo_to_pixel(*p).ok())
                    .map(|(x, y)| (x as i64, y as i64))
                    .collect();
                for pair in pts.windows(2) {
                    for (x, y) in line_pixels(pair[0], pair[1]) {
                        stamp(&mut out, x, y, cfg.coastline_thickness, cfg.coastline_rgb);
                    }
                }
            }
        }
    }
    out
}

fn stamp(img: &mut RasterImage, x: i64, y: i64, thickness: usize, rgb: Rgb) {
    let t = thickness.max(1) as i64;
    let lo = -(t - 1) / 2;
    for dy in lo..lo + t {
        for dx in lo..lo + t {
            let (px, py) = (x + dx, y + dy);
            if px >= 0 && py >= 0 && (px as usize) < img.width && (py as usize) < img.height {
                img.set(px as usize, py as usize, rgb);
            }
        }
    }
}

/// Bresenham line including both endpoints.
pub fn line_pixels(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy) as usize + 1);
    loop {
        out.push((x, y));
        if x == b.0 && y == b.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

pub fn write_png(img: &RasterImage, path: &Path) -> Result<(), RenderError> {
    let buf: Vec<u8> = img.pixels.iter().flatten().copied().collect();
    image::save_buffer(path, &buf, img.width as u32, img.height as u32, image::ExtendedColorType::Rgb8)
        .map_err(|source| RenderError::Png { path: path.display().to_string(), source })
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, RenderError> {
    let buf: Vec<u8> = img.pixels.iter().flatten().copied().collect();
    let mut out = std::io::Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut out,
        &buf,
        img.width as u32,
        img.height as u32,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .map_err(|source| RenderError::Png { path: "<memory>".into(), source })?;
    Ok(out.into_inner())
}

pub fn read_png(path: &Path) -> Result<RasterImage, RenderError> {
    let decoded = image::open(path)
        .map_err(|source| RenderError::Png { path: path.display().to_string(), source })?
        .into_rgb8();
    let (w, h) = decoded.dimensions();
    let pixels = decoded.pixels().map(|p| p.0).collect();
    Ok(RasterImage { width: w as usize, height: h as usize, pixels })
}
