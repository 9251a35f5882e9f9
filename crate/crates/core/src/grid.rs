//! Gridded wind-gust fields.
//!
//! A [`WindGrid`] is a dense, row-major lat/lon grid of gust speeds in m/s with
//! row 0 at the northern edge. Grids are exchanged as WGF v1 text:
//!
//! ```text
//! #wgf v1
//! nlat=2
//! nlon=3
//! lat_north=90
//! lat_south=-90
//! lon_west=-180
//! lon_east=180
//! timestamp=2023-01-01T00:00:00Z
//! units=m/s
//!
//! 0,1.5,nan
//! 3,4,5
//! ```

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::BeaufortTable;

pub const WGF_MAGIC: &str = "#wgf v1";
pub const SPEED_UNITS: &str = "m/s";

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("missing header key `{0}`")]
    MissingKey(&'static str),
    #[error("line {line}: unsupported units `{units}`, expected m/s")]
    BadUnits { line: usize, units: String },
    #[error("row count mismatch: header says nlat={expected}, found {found} data rows")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("line {line}: column count mismatch: expected {expected}, found {found}")]
    ColumnCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse `{token}` as a speed")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: negative speed {value} in column {column}")]
    NegativeSpeed {
        line: usize,
        column: usize,
        value: f64,
    },
    #[error("line {line}: non-finite speed `{token}`")]
    NonFinite { line: usize, token: String },
    #[error("invalid grid: {0}")]
    Invalid(String),
}

/// Geographic bounds of an equirectangular frame, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub lat_north: f64,
    pub lat_south: f64,
    pub lon_west: f64,
    pub lon_east: f64,
}

impl Default for Extent {
    fn default() -> Self {
        Self::GLOBE
    }
}

impl Extent {
    pub const GLOBE: Extent = Extent {
        lat_north: 90.0,
        lat_south: -90.0,
        lon_west: -180.0,
        lon_east: 180.0,
    };

    pub fn validate(&self) -> Result<(), GridError> {
        let all = [self.lat_north, self.lat_south, self.lon_west, self.lon_east];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GridError::Invalid("extent bounds must be finite".into()));
        }
        if self.lat_north <= self.lat_south {
            return Err(GridError::Invalid("lat_north must exceed lat_south".into()));
        }
        if self.lon_east <= self.lon_west {
            return Err(GridError::Invalid("lon_east must exceed lon_west".into()));
        }
        Ok(())
    }

    pub fn lat_span(&self) -> f64 {
        self.lat_north - self.lat_south
    }

    pub fn lon_span(&self) -> f64 {
        self.lon_east - self.lon_west
    }

    pub fn is_globe(&self) -> bool {
        *self == Self::GLOBE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindGrid {
    pub nlat: usize,
    pub nlon: usize,
    pub extent: Extent,
    pub timestamp: String,
    pub units: String,
    /// Row-major speeds, row 0 northmost. NaN marks a missing cell.
    pub values: Vec<f64>,
}

impl WindGrid {
    pub fn new(
        nlat: usize,
        nlon: usize,
        extent: Extent,
        timestamp: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let grid = Self {
            nlat,
            nlon,
            extent,
            timestamp: timestamp.into(),
            units: SPEED_UNITS.to_string(),
            values,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn uniform(nlat: usize, nlon: usize, speed: f64) -> Result<Self, GridError> {
        Self::new(nlat, nlon, Extent::GLOBE, "", vec![speed; nlat * nlon])
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.nlat == 0 || self.nlon == 0 {
            return Err(GridError::Invalid("nlat and nlon must be positive".into()));
        }
        if self.values.len() != self.nlat * self.nlon {
            return Err(GridError::Invalid(format!(
                "expected {} values, got {}",
                self.nlat * self.nlon,
                self.values.len()
            )));
        }
        if self.units != SPEED_UNITS {
            return Err(GridError::Invalid(format!("units must be m/s, got {}", self.units)));
        }
        self.extent.validate()?;
        for (i, v) in self.values.iter().enumerate() {
            if v.is_infinite() || *v < 0.0 {
                return Err(GridError::Invalid(format!("cell {i} holds invalid speed {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.nlon + col]
    }

    /// Latitude/longitude of the center of cell (row, col).
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let e = &self.extent;
        let lat = e.lat_north - (row as f64 + 0.5) * e.lat_span() / self.nlat as f64;
        let lon = e.lon_west + (col as f64 + 0.5) * e.lon_span() / self.nlon as f64;
        (lat, lon)
    }
}

const HEADER_KEYS: [&str; 8] = [
    "nlat",
    "nlon",
    "lat_north",
    "lat_south",
    "lon_west",
    "lon_east",
    "timestamp",
    "units",
];

/// Parse WGF v1 text into a validated grid.
///
/// `lat_north`, `lat_south`, `lon_west` and `lon_east` default to the full globe
/// when absent; every other header key is required.
pub fn parse_wgf(text: &str) -> Result<WindGrid, GridError> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));

    match lines.next() {
        Some((_, l)) if l.trim() == WGF_MAGIC => {}
        _ => {
            return Err(GridError::MalformedHeader {
                line: 1,
                reason: format!("expected `{WGF_MAGIC}`"),
            })
        }
    }

    let mut nlat = None;
    let mut nlon = None;
    let mut extent = Extent::GLOBE;
    let mut timestamp = None;
    let mut units = None;

    for (n, line) in lines.by_ref() {
        if line.trim().is_empty() {
            break;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| GridError::MalformedHeader {
            line: n,
            reason: "expected key=value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |reason: String| GridError::MalformedHeader { line: n, reason };
        let float = |v: &str| -> Result<f64, GridError> {
            v.parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .ok_or_else(|| bad(format!("`{key}` is not a finite number")))
        };
        match key {
            "nlat" | "nlon" => {
                let v: usize = value
                    .parse()
                    .ok()
                    .filter(|v| *v > 0)
                    .ok_or_else(|| bad(format!("`{key}` must be a positive integer")))?;
                if key == "nlat" {
                    nlat = Some(v);
                } else {
                    nlon = Some(v);
                }
            }
            "lat_north" => extent.lat_north = float(value)?,
            "lat_south" => extent.lat_south = float(value)?,
            "lon_west" => extent.lon_west = float(value)?,
            "lon_east" => extent.lon_east = float(value)?,
            "timestamp" => timestamp = Some(value.to_string()),
            "units" => {
                if value != SPEED_UNITS {
                    return Err(GridError::BadUnits {
                        line: n,
                        units: value.to_string(),
                    });
                }
                units = Some(value.to_string());
            }
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }

    let nlat = nlat.ok_or(GridError::MissingKey("nlat"))?;
    let nlon = nlon.ok_or(GridError::MissingKey("nlon"))?;
    let timestamp = timestamp.ok_or(GridError::MissingKey("timestamp"))?;
    let units = units.ok_or(GridError::MissingKey("units"))?;
    extent
        .validate()
        .map_err(|e| GridError::MalformedHeader { line: 1, reason: e.to_string() })?;

    let mut values = Vec::with_capacity(nlat * nlon);
    let mut rows = 0;
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > nlat {
            continue;
        }
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != nlon {
            return Err(GridError::ColumnCountMismatch {
                line: n,
                expected: nlon,
                found: tokens.len(),
            });
        }
        for (column, tok) in tokens.into_iter().enumerate() {
            let v = parse_speed(tok).ok_or_else(|| GridError::BadNumber {
                line: n,
                token: tok.to_string(),
            })?;
            if v.is_infinite() {
                return Err(GridError::NonFinite { line: n, token: tok.to_string() });
            }
            if v < 0.0 {
                return Err(GridError::NegativeSpeed { line: n, column, value: v });
            }
            values.push(v);
        }
    }
    if rows != nlat {
        return Err(GridError::RowCountMismatch { expected: nlat, found: rows });
    }

    Ok(WindGrid { nlat, nlon, extent, timestamp, units, values })
}

fn parse_speed(tok: &str) -> Option<f64> {
    if tok.eq_ignore_ascii_case("nan") {
        return Some(f64::NAN);
    }
    tok.parse::<f64>().ok().filter(|v| !v.is_nan())
}

fn fmt_value(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("nan");
    } else {
        // Display for f64 is the shortest text that parses back to the same bits.
        let _ = write!(out, "{v}");
    }
}

/// Serialize a grid as WGF v1. The output re-parses to bitwise-equal values.
pub fn write_wgf(grid: &WindGrid) -> String {
    let e = &grid.extent;
    let mut out = String::with_capacity(64 + grid.values.len() * 6);
    out.push_str(WGF_MAGIC);
    out.push('\n');
    let header: [(&str, String); 8] = [
        ("nlat", grid.nlat.to_string()),
        ("nlon", grid.nlon.to_string()),
        ("lat_north", e.lat_north.to_string()),
        ("lat_south", e.lat_south.to_string()),
        ("lon_west", e.lon_west.to_string()),
        ("lon_east", e.lon_east.to_string()),
        ("timestamp", grid.timestamp.clone()),
        ("units", grid.units.clone()),
    ];
    debug_assert!(header.iter().zip(HEADER_KEYS).all(|((k, _), h)| *k == h));
    for (k, v) in header {
        let _ = writeln!(out, "{k}={v}");
    }
    out.push('\n');
    for row in grid.values.chunks(grid.nlon) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            fmt_value(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

/// A Gaussian storm added on top of the background field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center_lat: f64,
    pub center_lon: f64,
    pub peak_speed: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub blobs: Vec<Blob>,
    pub background_speed: f64,
    pub nlat: usize,
    pub nlon: usize,
    #[serde(default)]
    pub extent: Extent,
    /// Amplitude of seeded uniform noise added to every cell; 0 disables it.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub timestamp: String,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.nlat == 0 || self.nlon == 0 {
            return Err(GridError::Invalid("grid dimensions must be positive".into()));
        }
        if !(self.background_speed >= 0.0) || !(self.noise >= 0.0) {
            return Err(GridError::Invalid("background and noise must be >= 0".into()));
        }
        for b in &self.blobs {
            if !(b.sigma > 0.0) {
                return Err(GridError::Invalid("blob sigma must be > 0".into()));
            }
            if !(b.peak_speed >= self.background_speed) {
                return Err(GridError::Invalid("blob peak must be >= background".into()));
            }
        }
        self.extent.validate()
    }

    /// A randomized storm field: a breezy background with one to four gale-force blobs.
    pub fn random_storms(seed: u64, nlat: usize, nlon: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let background_speed = rng.random_range(2.0..9.0);
        let n = rng.random_range(1..=4);
        let blobs = (0..n)
            .map(|_| Blob {
                center_lat: rng.random_range(-70.0..70.0),
                center_lon: rng.random_range(-170.0..170.0),
                peak_speed: rng.random_range(18.0..38.0),
                sigma: rng.random_range(4.0..18.0),
            })
            .collect();
        Self {
            blobs,
            background_speed,
            nlat,
            nlon,
            extent: Extent::GLOBE,
            noise: 1.5,
            timestamp: String::new(),
        }
    }
}

/// Evaluate the blob field at every cell center, plus optional seeded noise.
pub fn synth_grid(spec: &SyntheticSpec, seed: u64) -> Result<WindGrid, GridError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = WindGrid {
        nlat: spec.nlat,
        nlon: spec.nlon,
        extent: spec.extent,
        timestamp: spec.timestamp.clone(),
        units: SPEED_UNITS.to_string(),
        values: vec![0.0; spec.nlat * spec.nlon],
    };
    for row in 0..spec.nlat {
        for col in 0..spec.nlon {
            let (lat, lon) = grid.cell_center(row, col);
            let mut v = spec.background_speed;
            for b in &spec.blobs {
                let d2 = (lat - b.center_lat).powi(2) + (lon - b.center_lon).powi(2);
                v += b.peak_speed * (-d2 / (2.0 * b.sigma * b.sigma)).exp();
            }
            if spec.noise > 0.0 {
                v += rng.random_range(0.0..spec.noise);
            }
            grid.values[row * spec.nlon + col] = v;
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridStats {
    /// Cell count per Beaufort level 0..=12.
    pub levels: [usize; 13],
    pub nan: usize,
}

impl GridStats {
    pub fn total(&self) -> usize {
        self.levels.iter().sum::<usize>() + self.nan
    }
}

pub fn grid_stats(grid: &WindGrid, table: &BeaufortTable) -> GridStats {
    let mut stats = GridStats { levels: [0; 13], nan: 0 };
    for v in &grid.values {
        match table.level(*v) {
            Ok(level) => stats.levels[level as usize] += 1,
            Err(_) => stats.nan += 1,
        }
    }
    stats
}
