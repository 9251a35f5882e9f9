//! Sparse position and outline tracking.
//!
//! For each color group: build a mask, trace one contour per connected region,
//! split a point budget across regions by area, and pick representative pixels
//! with k-means. Centroids that fall outside their region (concave shapes) are
//! snapped to the nearest region pixel, so every emitted point lies on the mask.

mod contour;
mod kmeans;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub use contour::{find_contours, Contour};
pub use kmeans::{kmeans, KMeansConfig, KMeansFit};

use crate::geo::GeoPoint;
use crate::grid::Extent;
use crate::render::{BeaufortTable, ColorGroup, RasterImage, RenderError, Rgb};

/// Pixel coordinate `(x, y)`, origin top-left.
pub type Pixel = (usize, usize);

#[derive(Debug, Error)]
pub enum SpotError {
    #[error(transparent)]
    Color(#[from] RenderError),
    #[error("point count k must be >= 1, got {0}")]
    InvalidK(usize),
    #[error("k-means needs at least k points (k = {k}, n = {n})")]
    TooFewPoints { k: usize, n: usize },
    #[error("pixel ({x}, {y}) outside a {width}x{height} frame")]
    OutOfFrame {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("non-finite coordinate ({lat}, {lon})")]
    NonFinite { lat: f64, lon: f64 },
    #[error("contour does not belong to this mask")]
    ForeignContour,
    #[error("invalid SPOT config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// An HSV acceptance window. Hue in degrees, saturation and value in percent.
///
/// Each hue interval is half-open `[lo, hi)`; `lo > hi` wraps through 360.
/// An empty hue list accepts any hue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsvRange {
    #[serde(default)]
    pub hue: Vec<(f64, f64)>,
    pub sat: (f64, f64),
    pub val: (f64, f64),
}

impl HsvRange {
    pub fn contains(&self, hsv: (f64, f64, f64)) -> bool {
        let (h, s, v) = hsv;
        let hue_ok = self.hue.is_empty()
            || self.hue.iter().any(|&(lo, hi)| if lo <= hi { h >= lo && h < hi } else { h >= lo || h < hi });
        hue_ok && s >= self.sat.0 && s <= self.sat.1 && v >= self.val.0 && v <= self.val.1
    }
}

pub fn rgb_to_hsv(rgb: Rgb) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| f64::from(c) / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let mut h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta) + 120.0
    } else {
        60.0 * ((r - g) / delta) + 240.0
    };
    if h < 0.0 {
        h += 360.0;
    }
    let s = if max == 0.0 { 0.0 } else { delta / max };
    (h, s * 100.0, max * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    ExactPalette,
    HsvRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpotConfig {
    pub match_mode: MatchMode,
    pub hsv: BTreeMap<ColorGroup, HsvRange>,
    pub min_area: usize,
    pub erosion_radius: usize,
    pub point_budget_per_color: usize,
    pub max_points_per_region: usize,
    /// Larger candidate sets are clustered on a seeded random sample of this size; 0 disables sampling.
    pub kmeans_sample_cap: usize,
    pub kmeans: KMeansConfig,
}

pub fn default_hsv_ranges() -> BTreeMap<ColorGroup, HsvRange> {
    let vivid = |hue: Vec<(f64, f64)>| HsvRange { hue, sat: (30.0, 100.0), val: (30.0, 100.0) };
    BTreeMap::from([
        (ColorGroup::Red, vivid(vec![(330.0, 15.0)])),
        (ColorGroup::Yellow, vivid(vec![(40.0, 70.0)])),
        (ColorGroup::Green, vivid(vec![(80.0, 160.0)])),
        (ColorGroup::White, HsvRange { hue: vec![], sat: (0.0, 12.0), val: (85.0, 100.0) }),
    ])
}

impl Default for SpotConfig {
    fn default() -> Self {
        Self {
            match_mode: MatchMode::ExactPalette,
            hsv: default_hsv_ranges(),
            min_area: 50,
            erosion_radius: 1,
            point_budget_per_color: 20,
            max_points_per_region: 10,
            kmeans_sample_cap: 5000,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl SpotConfig {
    pub fn validate(&self) -> Result<(), SpotError> {
        if self.point_budget_per_color == 0 || self.max_points_per_region == 0 {
            return Err(SpotError::InvalidConfig("point budget and per-region cap must be >= 1".into()));
        }
        if self.kmeans.max_iter == 0 || !(self.kmeans.tol > 0.0) {
            return Err(SpotError::InvalidConfig("kmeans needs max_iter >= 1 and tol > 0".into()));
        }
        Ok(())
    }
}

/// Equirectangular mapping between pixel centers and geographic coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelFrame {
    pub width: usize,
    pub height: usize,
    pub extent: Extent,
}

impl PixelFrame {
    pub fn new(width: usize, height: usize, extent: Extent) -> Self {
        Self { width, height, extent }
    }

    pub fn globe(width: usize, height: usize) -> Self {
        Self::new(width, height, Extent::GLOBE)
    }

    pub fn pixel_to_geo(&self, p: Pixel) -> Result<GeoPoint, SpotError> {
        let (x, y) = p;
        if x >= self.width || y >= self.height {
            return Err(SpotError::OutOfFrame { x, y, width: self.width, height: self.height });
        }
        let e = &self.extent;
        let lon = e.lon_west + (x as f64 + 0.5) * e.lon_span() / self.width as f64;
        let lat = e.lat_north - (y as f64 + 0.5) * e.lat_span() / self.height as f64;
        Ok(GeoPoint { lat, lon })
    }

    /// The pixel whose cell contains the coordinate, clamped to the frame.
    ///
    /// A coordinate on the seam between two pixels belongs to the one with the
    /// smaller index, i.e. each pixel owns the half-open span `(left, right]`.
    pub fn geo_to_pixel(&self, g: GeoPoint) -> Result<Pixel, SpotError> {
        if !g.lat.is_finite() || !g.lon.is_finite() {
            return Err(SpotError::NonFinite { lat: g.lat, lon: g.lon });
        }
        let e = &self.extent;
        let u = (g.lon - e.lon_west) / e.lon_span() * self.width as f64;
        let v = (e.lat_north - g.lat) / e.lat_span() * self.height as f64;
        let clamp = |t: f64, n: usize| (t.ceil() - 1.0).clamp(0.0, (n - 1) as f64) as usize;
        Ok((clamp(u, self.width), clamp(v, self.height)))
    }
}

pub fn color_mask(img: &RasterImage, color: ColorGroup, cfg: &SpotConfig, table: &BeaufortTable) -> BitMask {
    let bits = match cfg.match_mode {
        MatchMode::ExactPalette => {
            let palette = table.group_colors(color);
            img.pixels.iter().map(|p| palette.contains(p)).collect()
        }
        MatchMode::HsvRange => match cfg.hsv.get(&color) {
            Some(range) => img.pixels.iter().map(|p| range.contains(rgb_to_hsv(*p))).collect(),
            None => vec![false; img.pixels.len()],
        },
    };
    BitMask { width: img.width, height: img.height, bits }
}

/// Split the per-color point budget across contours in proportion to area.
pub fn allocate_points(contours: &[Contour], cfg: &SpotConfig) -> Vec<usize> {
    let total: usize = contours.iter().map(|c| c.area_px).sum();
    if total == 0 {
        return vec![1; contours.len()];
    }
    contours
        .iter()
        .map(|c| {
            let share = cfg.point_budget_per_color as f64 * c.area_px as f64 / total as f64;
            (share.round() as usize).clamp(1, cfg.max_points_per_region.max(1))
        })
        .collect()
}

/// Pick up to `k` representative pixels inside the contour's region.
///
/// Points come back sorted by `(y, x)` and deduplicated.
pub fn representative_points(mask: &BitMask, contour: &Contour, k: usize, cfg: &SpotConfig) -> Result<Vec<Pixel>, SpotError> {
    if k == 0 {
        return Err(SpotError::InvalidK(k));
    }
    let start = *contour.boundary.first().ok_or(SpotError::ForeignContour)?;
    let region = contour::component_at(mask, start).ok_or(SpotError::ForeignContour)?;

    let mut candidates = region.eroded(cfg.erosion_radius, mask.width, mask.height).pixels();
    if candidates.is_empty() {
        candidates = region.pixels();
    }
    if candidates.len() <= k {
        return Ok(candidates);
    }

    let cap = cfg.kmeans_sample_cap;
    if cap >= k && candidates.len() > cap {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.kmeans.seed ^ candidates.len() as u64);
        let mut keep = rand::seq::index::sample(&mut rng, candidates.len(), cap).into_vec();
        keep.sort_unstable();
        candidates = keep.into_iter().map(|i| candidates[i]).collect();
    }
    let coords: Vec<[f64; 2]> = candidates.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
    let fit = kmeans(&coords, k, &cfg.kmeans)?;
    let members = region.pixels();
    let mut points: Vec<Pixel> = fit
        .centroids
        .iter()
        .map(|c| {
            let x = c[0].round().clamp(0.0, (mask.width - 1) as f64) as usize;
            let y = c[1].round().clamp(0.0, (mask.height - 1) as f64) as usize;
            if region.contains(x as i64, y as i64) {
                (x, y)
            } else {
                nearest_member(&members, (x, y))
            }
        })
        .collect();
    points.sort_by_key(|&(x, y)| (y, x));
    points.dedup();
    Ok(points)
}

/// Closest member by Euclidean distance; `members` is in raster order so ties go
/// to the smaller y, then the smaller x.
fn nearest_member(members: &[Pixel], p: Pixel) -> Pixel {
    let d2 = |q: &Pixel| {
        let dx = q.0 as i64 - p.0 as i64;
        let dy = q.1 as i64 - p.1 as i64;
        dx * dx + dy * dy
    };
    let mut best = members[0];
    let mut best_d = d2(&best);
    for q in &members[1..] {
        let d = d2(q);
        if d < best_d {
            best = *q;
            best_d = d;
        }
    }
    best
}

fn serialize_geo_points<S: Serializer>(points: &[GeoPoint], s: S) -> Result<S::Ok, S::Error> {
    use serde_json::value::RawValue;
    let fixed = |v: f64| {
        let text = format!("{:.4}", v);
        // avoid "-0.0000"
        let text = if text.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') { "0.0000".to_string() } else { text };
        RawValue::from_string(text).map_err(serde::ser::Error::custom)
    };
    let mut seq = s.serialize_seq(Some(points.len()))?;
    for p in points {
        seq.serialize_element(&[fixed(p.lat)?, fixed(p.lon)?])?;
    }
    seq.end()
}

fn deserialize_geo_points<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<GeoPoint>, D::Error> {
    let raw: Vec<[f64; 2]> = Deserialize::deserialize(d)?;
    Ok(raw.into_iter().map(|[lat, lon]| GeoPoint { lat, lon }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotRegion {
    pub region_id: usize,
    pub area_px: usize,
    pub pixel_points: Vec<Pixel>,
    #[serde(serialize_with = "serialize_geo_points", deserialize_with = "deserialize_geo_points")]
    pub geo_points: Vec<GeoPoint>,
    #[serde(skip)]
    pub contour: Option<Contour>,
}

/// Points file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotResult {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub colors: BTreeMap<ColorGroup, Vec<SpotRegion>>,
}

impl SpotResult {
    pub fn point_count(&self) -> usize {
        self.colors.values().flatten().map(|r| r.pixel_points.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("points serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Full SPOT pass over one image for the requested color groups.
pub fn run_spot(
    img: &RasterImage,
    image_ref: &str,
    colors: &[ColorGroup],
    cfg: &SpotConfig,
    table: &BeaufortTable,
    frame: &PixelFrame,
) -> Result<SpotResult, SpotError> {
    cfg.validate()?;
    let mut out = BTreeMap::new();
    for &color in colors {
        let mask = color_mask(img, color, cfg, table);
        let contours = find_contours(&mask, cfg.min_area);
        let counts = allocate_points(&contours, cfg);
        let mut regions = Vec::with_capacity(contours.len());
        for (contour, k) in contours.into_iter().zip(counts) {
            let pixel_points = representative_points(&mask, &contour, k, cfg)?;
            // rounded to the points-file precision so a reloaded result compares equal
            let geo_points = pixel_points
                .iter()
                .map(|p| frame.pixel_to_geo(*p).map(|g| GeoPoint::new(round4(g.lat), round4(g.lon))))
                .collect::<Result<_, _>>()?;
            regions.push(SpotRegion {
                region_id: contour.region_id,
                area_px: contour.area_px,
                pixel_points,
                geo_points,
                contour: Some(contour),
            });
        }
        out.insert(color, regions);
    }
    Ok(SpotResult { image: image_ref.to_string(), width: img.width, height: img.height, colors: out })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerStyle {
    pub radius: usize,
    pub rgb: Rgb,
}

impl Default for MarkerStyle {
    fn default() -> Self {
        Self { radius: 3, rgb: [128, 0, 255] }
    }
}

/// Copy of `img` with a filled disc at every representative point.
pub fn annotate(img: &RasterImage, result: &SpotResult, style: &MarkerStyle) -> RasterImage {
    let mut out = img.clone();
    let r = style.radius as i64;
    for &(px, py) in result.colors.values().flatten().flat_map(|reg| &reg.pixel_points) {
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (px as i64 + dx, py as i64 + dy);
                if x >= 0 && y >= 0 && (x as usize) < out.width && (y as usize) < out.height {
                    out.set(x as usize, y as usize, style.rgb);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WindGrid;
    use crate::render::{render, RenderConfig};

    fn table() -> BeaufortTable {
        BeaufortTable::default()
    }

    #[test]
    fn exact_masks() {
        let t = table();
        let img = RasterImage::filled(6, 4, t.rgb(10));
        let cfg = SpotConfig::default();
        assert_eq!(color_mask(&img, ColorGroup::Red, &cfg, &t).count(), 24);
        let img = RasterImage::filled(6, 4, t.rgb(0));
        assert_eq!(color_mask(&img, ColorGroup::Red, &cfg, &t).count(), 0);

        let g = WindGrid::new(1, 2, Extent::GLOBE, "", vec![5.0, 25.0]).unwrap();
        let img = render(&g, &RenderConfig { width: 8, height: 4, ..Default::default() }, &t);
        let m = color_mask(&img, ColorGroup::Red, &cfg, &t);
        for y in 0..4 {
            for x in 0..8 {
                assert_eq!(m.get(x, y), x >= 4);
            }
        }
    }

    #[test]
    fn palette_sits_inside_default_hsv_windows() {
        let t = table();
        let ranges = default_hsv_ranges();
        for band in t.bands() {
            let hsv = rgb_to_hsv(band.rgb);
            for (group, range) in &ranges {
                assert_eq!(range.contains(hsv), *group == band.group, "{} {:?} vs {group}", band.name, hsv);
            }
        }
        assert!(ranges.values().all(|r| !r.contains(rgb_to_hsv([0, 0, 0]))));
    }

    #[test]
    fn hsv_mode_matches_exact_mode_on_rendered_images() {
        let t = table();
        let g = WindGrid::new(1, 4, Extent::GLOBE, "", vec![0.0, 5.0, 15.0, 25.0]).unwrap();
        let img = render(&g, &RenderConfig { width: 8, height: 4, ..Default::default() }, &t);
        let exact = SpotConfig::default();
        let hsv = SpotConfig { match_mode: MatchMode::HsvRange, ..Default::default() };
        for c in ColorGroup::ALL {
            assert_eq!(color_mask(&img, c, &exact, &t), color_mask(&img, c, &hsv, &t));
        }
    }

    #[test]
    fn hue_wraps() {
        let red = &default_hsv_ranges()[&ColorGroup::Red];
        assert!(red.contains((359.0, 80.0, 80.0)));
        assert!(red.contains((3.0, 80.0, 80.0)));
        assert!(!red.contains((20.0, 80.0, 80.0)));
    }

    fn contour(area: usize, id: usize) -> Contour {
        Contour { boundary: vec![(0, 0)], area_px: area, region_id: id }
    }

    #[test]
    fn allocation_rules() {
        let cfg = SpotConfig { point_budget_per_color: 20, max_points_per_region: 10, ..Default::default() };
        assert_eq!(allocate_points(&[contour(500, 0)], &cfg), vec![10]);
        let cfg = SpotConfig { point_budget_per_color: 8, ..Default::default() };
        assert_eq!(allocate_points(&[contour(300, 0), contour(300, 1)], &cfg), vec![4, 4]);
        let cfg = SpotConfig { point_budget_per_color: 10, ..Default::default() };
        assert_eq!(allocate_points(&[contour(10, 0), contour(990, 1)], &cfg), vec![1, 10]);
    }

    fn disc_mask(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BitMask {
        let mut m = BitMask::new(w, h);
        for y in 0..h {
            for x in 0..w {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    #[test]
    fn tiny_region_returns_all_pixels() {
        let mut m = BitMask::new(5, 5);
        m.set(1, 1, true);
        m.set(2, 1, true);
        m.set(3, 2, true);
        let c = &find_contours(&m, 0)[0];
        let pts = representative_points(&m, c, 5, &SpotConfig::default()).unwrap();
        assert_eq!(pts, vec![(1, 1), (2, 1), (3, 2)]);
    }

    #[test]
    fn disc_center() {
        let m = disc_mask(41, 41, 20.0, 20.0, 12.0);
        let c = &find_contours(&m, 0)[0];
        let pts = representative_points(&m, c, 1, &SpotConfig::default()).unwrap();
        assert_eq!(pts, vec![(20, 20)]);
    }

    #[test]
    fn sampled_clustering_stays_close_to_full() {
        let m = disc_mask(201, 201, 100.0, 100.0, 90.0);
        let c = &find_contours(&m, 0)[0];
        let full = SpotConfig { kmeans_sample_cap: 0, ..Default::default() };
        let sampled = SpotConfig { kmeans_sample_cap: 2000, ..Default::default() };
        let a = representative_points(&m, c, 1, &full).unwrap();
        let b = representative_points(&m, c, 1, &sampled).unwrap();
        assert_eq!(a, vec![(100, 100)]);
        assert!(b[0].0.abs_diff(100) <= 3 && b[0].1.abs_diff(100) <= 3, "{b:?}");
        assert_eq!(b, representative_points(&m, c, 1, &sampled).unwrap());
        let many = representative_points(&m, c, 6, &sampled).unwrap();
        assert_eq!(many.len(), 6);
        assert!(many.iter().all(|&(x, y)| m.get(x, y)));
    }

    #[test]
    fn concave_centroid_snaps_inside() {
        // U shape: two 4-wide arms joined by a 4-high base; the mean falls in the gap
        let mut m = BitMask::new(30, 30);
        for y in 0..30 {
            for x in 0..30 {
                let arm = y < 26 && (x < 4 || x >= 26);
                let base = y >= 26;
                m.set(x, y, arm || base);
            }
        }
        let c = &find_contours(&m, 0)[0];
        let cfg = SpotConfig { erosion_radius: 0, ..Default::default() };
        let pts = representative_points(&m, c, 1, &cfg).unwrap();
        assert_eq!(pts.len(), 1);
        let (x, y) = pts[0];
        assert!(m.get(x, y));
        // the raw centroid rounds to (15, 18); the closest member is straight down on the base
        assert_eq!((x, y), (15, 26));
    }

    #[test]
    fn k_zero_rejected() {
        let m = disc_mask(9, 9, 4.0, 4.0, 3.0);
        let c = &find_contours(&m, 0)[0];
        assert!(matches!(representative_points(&m, c, 0, &SpotConfig::default()), Err(SpotError::InvalidK(0))));
    }

    #[test]
    fn pixel_geo_examples() {
        let f = PixelFrame::globe(2, 2);
        assert_eq!(f.pixel_to_geo((0, 0)).unwrap(), GeoPoint::new(45.0, -90.0));
        assert_eq!(f.pixel_to_geo((1, 1)).unwrap(), GeoPoint::new(-45.0, 90.0));
        assert!(f.pixel_to_geo((2, 0)).is_err());

        let big = PixelFrame::globe(3510, 1755);
        assert_eq!(big.geo_to_pixel(GeoPoint::new(0.0, 0.0)).unwrap(), (1754, 877));
        assert_eq!(big.geo_to_pixel(GeoPoint::new(90.0, -180.0)).unwrap(), (0, 0));
        assert_eq!(big.geo_to_pixel(GeoPoint::new(-90.0, 180.0)).unwrap(), (3509, 1754));
        assert!(big.geo_to_pixel(GeoPoint::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn blank_image_has_no_regions() {
        let t = table();
        let img = RasterImage::filled(40, 20, t.rgb(0));
        let r = run_spot(&img, "blank.png", &[ColorGroup::Red, ColorGroup::Yellow], &SpotConfig::default(), &t, &PixelFrame::globe(40, 20)).unwrap();
        assert!(r.colors.values().all(|v| v.is_empty()));
    }

    #[test]
    fn points_json_uses_four_decimals() {
        let r = SpotResult {
            image: "a.png".into(),
            width: 2,
            height: 2,
            colors: BTreeMap::from([(
                ColorGroup::Red,
                vec![SpotRegion {
                    region_id: 0,
                    area_px: 1,
                    pixel_points: vec![(0, 0)],
                    geo_points: vec![GeoPoint::new(45.0, -0.00001)],
                    contour: None,
                }],
            )]),
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"geo_points\":[[45.0000,0.0000]]"), "{json}");
        assert!(json.contains("\"pixel_points\":[[0,0]]"));
        let back = SpotResult::from_json(&json).unwrap();
        assert_eq!(back.colors[&ColorGroup::Red][0].geo_points[0], GeoPoint::new(45.0, 0.0));
    }

    #[test]
    fn annotate_draws_clipped_discs() {
        let img = RasterImage::filled(20, 20, [255, 255, 255]);
        let empty = SpotResult { image: String::new(), width: 20, height: 20, colors: BTreeMap::new() };
        let style = MarkerStyle::default();
        assert_eq!(annotate(&img, &empty, &style), img);

        let mut one = empty.clone();
        one.colors.insert(
            ColorGroup::Red,
            vec![SpotRegion { region_id: 0, area_px: 1, pixel_points: vec![(10, 10)], geo_points: vec![], contour: None }],
        );
        let out = annotate(&img, &one, &style);
        let changed = out.pixels.iter().zip(&img.pixels).filter(|(a, b)| a != b).count();
        // lattice points with dx^2 + dy^2 <= 9
        let disc = (-3i64..=3).flat_map(|dy| (-3i64..=3).map(move |dx| (dx, dy))).filter(|(dx, dy)| dx * dx + dy * dy <= 9).count();
        assert_eq!(changed, disc);
        assert_eq!(disc, 29);

        one.colors.get_mut(&ColorGroup::Red).unwrap()[0].pixel_points = vec![(0, 0)];
        let out = annotate(&img, &one, &style);
        assert_eq!(out.pixels.len(), 400);
        let changed = out.pixels.iter().zip(&img.pixels).filter(|(a, b)| a != b).count();
        assert_eq!(changed, (0i64..=3).flat_map(|dy| (0i64..=3).map(move |dx| (dx, dy))).filter(|(dx, dy)| dx * dx + dy * dy <= 9).count());
    }
}
