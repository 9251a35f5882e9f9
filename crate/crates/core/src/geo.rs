//! Boundary polygons and point-to-place-name lookup.
//!
//! Geometry is planar in (lon, lat) degrees. Rings that cross the antimeridian
//! are split at load time into pieces that stay inside [-180, 180].

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("GeoJSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a GeoJSON FeatureCollection")]
    NotFeatureCollection,
    #[error("feature {index}: {reason}")]
    BadFeature { index: usize, reason: String },
    #[error("feature {index}: missing name property `{key}`")]
    MissingName { index: usize, key: String },
    #[error("feature {index}: unsupported geometry `{kind}` (expected Polygon or MultiPolygon)")]
    NonPolygon { index: usize, kind: String },
    #[error("feature {index}: ring {ring} is not closed")]
    UnclosedRing { index: usize, ring: usize },
    #[error("feature {index}: ring {ring} has {count} vertices, need at least 4")]
    ShortRing { index: usize, ring: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Land,
    Ocean,
}

pub type Ring = Vec<GeoPoint>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub outer: Ring,
    pub holes: Vec<Ring>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub admin_parent: Option<String>,
    pub polygons: Vec<Polygon>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    pub kind: BoundaryKind,
    pub features: Vec<Feature>,
}

impl BoundarySet {
    pub fn empty(kind: BoundaryKind) -> Self {
        Self { kind, features: Vec::new() }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub name_key: String,
    /// Property holding the parent region (country, continent or ocean).
    pub parent_key: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { name_key: "name".into(), parent_key: Some("parent".into()) }
    }
}

fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..=180.0).contains(&lon) {
        lon
    } else {
        (lon + 180.0).rem_euclid(360.0) - 180.0
    }
}

fn parse_ring(v: &Value, index: usize, ring: usize) -> Result<Ring, GeoError> {
    let bad = |reason: &str| GeoError::BadFeature { index, reason: format!("ring {ring}: {reason}") };
    let coords = v.as_array().ok_or_else(|| bad("expected an array of positions"))?;
    let mut out = Vec::with_capacity(coords.len());
    for c in coords {
        let pos = c.as_array().filter(|p| p.len() >= 2).ok_or_else(|| bad("position needs [lon, lat]"))?;
        let lon = pos[0].as_f64().ok_or_else(|| bad("non-numeric longitude"))?;
        let lat = pos[1].as_f64().ok_or_else(|| bad("non-numeric latitude"))?;
        if !lon.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(bad("coordinate out of range"));
        }
        out.push(GeoPoint::new(lat, normalize_lon(lon)));
    }
    if out.len() < 4 {
        return Err(GeoError::ShortRing { index, ring, count: out.len() });
    }
    if out.first() != out.last() {
        return Err(GeoError::UnclosedRing { index, ring });
    }
    Ok(out)
}

fn parse_polygon(v: &Value, index: usize) -> Result<Polygon, GeoError> {
    let rings = v
        .as_array()
        .filter(|r| !r.is_empty())
        .ok_or_else(|| GeoError::BadFeature { index, reason: "polygon needs at least one ring".into() })?;
    let mut parsed = rings.iter().enumerate().map(|(i, r)| parse_ring(r, index, i));
    let outer = parsed.next().expect("non-empty")?;
    let holes = parsed.collect::<Result<_, _>>()?;
    Ok(Polygon { outer, holes })
}

/// Load a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
pub fn load_boundaries(text: &str, kind: BoundaryKind, opts: &LoadOptions) -> Result<BoundarySet, GeoError> {
    let doc: Value = serde_json::from_str(text)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(GeoError::NotFeatureCollection);
    }
    let items = doc.get("features").and_then(Value::as_array).ok_or(GeoError::NotFeatureCollection)?;

    let mut features = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let props = item.get("properties");
        let prop = |key: &str| {
            props
                .and_then(|p| p.get(key))
                .and_then(Value::as_str)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };
        let name = prop(&opts.name_key).ok_or_else(|| GeoError::MissingName { index, key: opts.name_key.clone() })?;
        let admin_parent = opts.parent_key.as_deref().and_then(prop);

        let geometry = item.get("geometry").filter(|g| !g.is_null());
        let gtype = geometry.and_then(|g| g.get("type")).and_then(Value::as_str).unwrap_or("null");
        let coords = geometry.and_then(|g| g.get("coordinates"));
        let raw = match (gtype, coords) {
            ("Polygon", Some(c)) => vec![parse_polygon(c, index)?],
            ("MultiPolygon", Some(Value::Array(parts))) => {
                parts.iter().map(|p| parse_polygon(p, index)).collect::<Result<_, _>>()?
            }
            ("Polygon" | "MultiPolygon", _) => {
                return Err(GeoError::BadFeature { index, reason: "missing coordinates".into() })
            }
            (other, _) => return Err(GeoError::NonPolygon { index, kind: other.to_string() }),
        };
        let polygons = raw.into_iter().flat_map(split_antimeridian).collect();
        features.push(Feature { name, admin_parent, polygons });
    }
    Ok(BoundarySet { kind, features })
}

/// Re-express a ring with continuous longitudes. Returns `None` when the ring
/// never jumps across the antimeridian or winds around a pole.
fn unwrap_ring(ring: &Ring) -> Option<Ring> {
    let mut out = Vec::with_capacity(ring.len());
    let mut shift = 0.0;
    let mut crossed = false;
    out.push(ring[0]);
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = b.lon - a.lon;
        // a straight run along the seam itself is not a crossing
        let seam_edge = a.lon.abs() == 180.0 && b.lon.abs() == 180.0;
        if d.abs() > 180.0 && !seam_edge {
            crossed = true;
            shift -= 360.0 * d.signum();
        }
        out.push(GeoPoint::new(b.lat, b.lon + shift));
    }
    (crossed && shift == 0.0).then_some(out)
}

/// Sutherland-Hodgman clip of a closed ring against `lon <= line` (or `>=`).
fn clip_ring(ring: &Ring, line: f64, keep_west: bool) -> Option<Ring> {
    let inside = |p: &GeoPoint| if keep_west { p.lon <= line } else { p.lon >= line };
    let open = &ring[..ring.len() - 1];
    let mut out: Ring = Vec::with_capacity(open.len() + 4);
    for i in 0..open.len() {
        let cur = open[i];
        let prev = open[(i + open.len() - 1) % open.len()];
        let cross = || {
            let t = (line - prev.lon) / (cur.lon - prev.lon);
            GeoPoint::new(prev.lat + t * (cur.lat - prev.lat), line)
        };
        match (inside(&prev), inside(&cur)) {
            (true, true) => out.push(cur),
            (true, false) => out.push(cross()),
            (false, true) => {
                out.push(cross());
                out.push(cur);
            }
            (false, false) => {}
        }
    }
    out.dedup();
    if out.len() < 3 {
        return None;
    }
    out.push(out[0]);
    Some(out)
}

fn shift_ring(ring: Ring, by: f64) -> Ring {
    ring.into_iter().map(|p| GeoPoint::new(p.lat, p.lon + by)).collect()
}

fn split_antimeridian(poly: Polygon) -> Vec<Polygon> {
    let Some(outer) = unwrap_ring(&poly.outer) else {
        return vec![poly];
    };
    let (min, max) = outer.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.lon), hi.max(p.lon)));
    // the seam sits at +180 for rings unwrapped eastward and -180 for westward ones
    let (seam, wrap) = if max > 180.0 { (180.0, -360.0) } else if min < -180.0 { (-180.0, 360.0) } else { return vec![poly] };

    // bring holes onto the outer ring's unwrapped longitude range
    let holes: Vec<Ring> = poly
        .holes
        .iter()
        .map(|h| {
            let h = unwrap_ring(h).unwrap_or_else(|| h.clone());
            let mid = h.iter().map(|p| p.lon).sum::<f64>() / h.len() as f64;
            if mid + 360.0 <= max { shift_ring(h, 360.0) } else if mid - 360.0 >= min { shift_ring(h, -360.0) } else { h }
        })
        .collect();

    let mut parts = Vec::new();
    for keep_west in [true, false] {
        let Some(piece) = clip_ring(&outer, seam, keep_west) else { continue };
        let beyond = (seam > 0.0) != keep_west;
        let fix = |r: Ring| if beyond { shift_ring(r, wrap) } else { r };
        let piece_holes = holes.iter().filter_map(|h| clip_ring(h, seam, keep_west)).map(fix).collect();
        parts.push(Polygon { outer: fix(piece), holes: piece_holes });
    }
    parts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RingPosition {
    Inside,
    Outside,
    Boundary,
}

fn on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool {
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    cross == 0.0
        && p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
}

/// Even-odd ray cast toward +lon.
fn ring_position(p: GeoPoint, ring: &Ring) -> RingPosition {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if on_segment(p, a, b) {
            return RingPosition::Boundary;
        }
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if p.lon < x {
                inside = !inside;
            }
        }
    }
    if inside {
        RingPosition::Inside
    } else {
        RingPosition::Outside
    }
}

fn polygon_contains(p: GeoPoint, poly: &Polygon) -> bool {
    if ring_position(p, &poly.outer) == RingPosition::Outside {
        return false;
    }
    !poly.holes.iter().any(|h| ring_position(p, h) == RingPosition::Inside)
}

/// Boundary points (outer or hole edges) count as inside.
pub fn point_in_polygon(p: GeoPoint, feature: &Feature) -> bool {
    feature.polygons.iter().any(|poly| polygon_contains(p, poly))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocationKind {
    Land,
    Ocean,
    Unknown,
}

impl From<BoundaryKind> for LocationKind {
    fn from(k: BoundaryKind) -> Self {
        match k {
            BoundaryKind::Land => LocationKind::Land,
            BoundaryKind::Ocean => LocationKind::Ocean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchedBy {
    Containment,
    Nearest,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationRecord {
    pub name: String,
    pub kind: LocationKind,
    pub admin_parent: Option<String>,
    pub matched_by: MatchedBy,
}

impl LocationRecord {
    pub fn unknown() -> Self {
        Self { name: String::new(), kind: LocationKind::Unknown, admin_parent: None, matched_by: MatchedBy::None }
    }

    fn from_feature(f: &Feature, kind: BoundaryKind, matched_by: MatchedBy) -> Self {
        Self { name: f.name.clone(), kind: kind.into(), admin_parent: f.admin_parent.clone(), matched_by }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BBox {
    min_lat: f64,
    max_lat: f64,
    min_lon: f64,
    max_lon: f64,
}

fn ring_bbox(ring: &Ring) -> BBox {
    ring.iter().fold(
        BBox { min_lat: f64::MAX, max_lat: f64::MIN, min_lon: f64::MAX, max_lon: f64::MIN },
        |b, p| BBox {
            min_lat: b.min_lat.min(p.lat),
            max_lat: b.max_lat.max(p.lat),
            min_lon: b.min_lon.min(p.lon),
            max_lon: b.max_lon.max(p.lon),
        },
    )
}

/// Uniform lon/lat bucket grid over one boundary set.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    set: BoundarySet,
    cell_deg: f64,
    ncols: usize,
    nrows: usize,
    cells: Vec<Vec<usize>>,
}

impl SpatialIndex {
    pub fn build(set: BoundarySet, cell_deg: f64) -> Self {
        let cell_deg = if cell_deg > 0.0 && cell_deg.is_finite() { cell_deg } else { 1.0 };
        let ncols = (360.0 / cell_deg).ceil().max(1.0) as usize;
        let nrows = (180.0 / cell_deg).ceil().max(1.0) as usize;
        let mut index = Self { set, cell_deg, ncols, nrows, cells: vec![Vec::new(); ncols * nrows] };
        for (id, f) in index.set.features.iter().enumerate() {
            for poly in &f.polygons {
                let b = ring_bbox(&poly.outer);
                let (c0, r0) = index.cell_of(b.min_lat, b.min_lon);
                let (c1, r1) = index.cell_of(b.max_lat, b.max_lon);
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        let cell = &mut index.cells[r * ncols + c];
                        if cell.last() != Some(&id) {
                            cell.push(id);
                        }
                    }
                }
            }
        }
        index
    }

    pub fn set(&self) -> &BoundarySet {
        &self.set
    }

    pub fn kind(&self) -> BoundaryKind {
        self.set.kind
    }

    fn cell_of(&self, lat: f64, lon: f64) -> (usize, usize) {
        let col = ((lon + 180.0) / self.cell_deg).floor().clamp(0.0, (self.ncols - 1) as f64) as usize;
        let row = ((lat + 90.0) / self.cell_deg).floor().clamp(0.0, (self.nrows - 1) as f64) as usize;
        (col, row)
    }

    /// Feature ids whose bounding boxes touch the cell containing `p`, ascending.
    pub fn candidates(&self, p: GeoPoint) -> &[usize] {
        let (c, r) = self.cell_of(p.lat, p.lon);
        &self.cells[r * self.ncols + c]
    }

    /// Feature ids registered in any cell overlapping the box `p ± radius`, ascending.
    fn candidates_near(&self, p: GeoPoint, radius: f64) -> Vec<usize> {
        let (c0, r0) = self.cell_of(p.lat - radius, p.lon - radius);
        let (c1, r1) = self.cell_of(p.lat + radius, p.lon + radius);
        let mut ids: Vec<usize> = (r0..=r1)
            .flat_map(|r| (c0..=c1).map(move |c| (r, c)))
            .flat_map(|(r, c)| self.cells[r * self.ncols + c].iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Smallest feature id containing `p`.
    pub fn containing(&self, p: GeoPoint) -> Option<usize> {
        self.candidates(p).iter().copied().find(|&id| point_in_polygon(p, &self.set.features[id]))
    }
}

fn min_vertex_distance(p: GeoPoint, f: &Feature) -> f64 {
    f.polygons
        .iter()
        .flat_map(|poly| std::iter::once(&poly.outer).chain(&poly.holes))
        .flatten()
        .map(|v| ((v.lat - p.lat).powi(2) + (v.lon - p.lon).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

fn nearest_of(ids: impl Iterator<Item = usize>, set: &BoundarySet, p: GeoPoint, tol: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for id in ids {
        let d = min_vertex_distance(p, &set.features[id]);
        if d <= tol && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, id));
        }
    }
    best
}

fn resolve(
    land: &BoundarySet,
    ocean: &BoundarySet,
    contained: (Option<usize>, Option<usize>),
    near: (Option<(f64, usize)>, Option<(f64, usize)>),
) -> LocationRecord {
    if let Some(id) = contained.0 {
        return LocationRecord::from_feature(&land.features[id], land.kind, MatchedBy::Containment);
    }
    if let Some(id) = contained.1 {
        return LocationRecord::from_feature(&ocean.features[id], ocean.kind, MatchedBy::Containment);
    }
    match near {
        (Some((dl, l)), Some((dw, _))) if dl <= dw => {
            LocationRecord::from_feature(&land.features[l], land.kind, MatchedBy::Nearest)
        }
        (_, Some((_, w))) => LocationRecord::from_feature(&ocean.features[w], ocean.kind, MatchedBy::Nearest),
        (Some((_, l)), None) => LocationRecord::from_feature(&land.features[l], land.kind, MatchedBy::Nearest),
        (None, None) => LocationRecord::unknown(),
    }
}

/// Name the place at `p`.
///
/// Land containment beats ocean containment, which beats the nearest boundary
/// vertex within `tol` degrees. Ties go to the smaller feature id (land first
/// for equal nearest distances).
pub fn locate(land: &SpatialIndex, ocean: &SpatialIndex, p: GeoPoint, tol: f64) -> LocationRecord {
    let contained = (land.containing(p), ocean.containing(p));
    let near = if contained.0.is_some() || contained.1.is_some() {
        (None, None)
    } else {
        (
            nearest_of(land.candidates_near(p, tol).into_iter(), land.set(), p, tol),
            nearest_of(ocean.candidates_near(p, tol).into_iter(), ocean.set(), p, tol),
        )
    };
    resolve(land.set(), ocean.set(), contained, near)
}

/// Reference lookup that scans every feature; same contract as [`locate`].
pub fn locate_scan(land: &BoundarySet, ocean: &BoundarySet, p: GeoPoint, tol: f64) -> LocationRecord {
    let scan = |set: &BoundarySet| set.features.iter().position(|f| point_in_polygon(p, f));
    let contained = (scan(land), scan(ocean));
    let near = if contained.0.is_some() || contained.1.is_some() {
        (None, None)
    } else {
        (
            nearest_of(0..land.features.len(), land, p, tol),
            nearest_of(0..ocean.features.len(), ocean, p, tol),
        )
    };
    resolve(land, ocean, contained, near)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fc(features: &str) -> String {
        format!(r#"{{"type":"FeatureCollection","features":[{features}]}}"#)
    }

    fn square_feature(name: &str, lon0: f64, lat0: f64, lon1: f64, lat1: f64) -> String {
        format!(
            r#"{{"type":"Feature","properties":{{"name":"{name}"}},"geometry":{{"type":"Polygon","coordinates":[[[{lon0},{lat0}],[{lon1},{lat0}],[{lon1},{lat1}],[{lon0},{lat1}],[{lon0},{lat0}]]]}}}}"#
        )
    }

    fn load(text: &str) -> BoundarySet {
        load_boundaries(text, BoundaryKind::Land, &LoadOptions::default()).unwrap()
    }

    #[test]
    fn loads_polygon_and_multipolygon() {
        let set = load(&fc(&square_feature("Atlantis", 0.0, 0.0, 1.0, 1.0)));
        assert_eq!(set.features.len(), 1);
        assert_eq!(set.features[0].name, "Atlantis");
        assert_eq!(set.features[0].polygons.len(), 1);
        assert!(set.features[0].polygons[0].holes.is_empty());

        let multi = r#"{"type":"Feature","properties":{"name":"Twins","parent":"Sea"},"geometry":{"type":"MultiPolygon","coordinates":[
            [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
            [[[5,5],[6,5],[6,6],[5,6],[5,5]]]]}}"#;
        let set = load(&fc(multi));
        assert_eq!(set.features.len(), 1);
        assert_eq!(set.features[0].polygons.len(), 2);
        assert_eq!(set.features[0].admin_parent.as_deref(), Some("Sea"));
    }

    #[test]
    fn load_errors() {
        let nameless = r#"{"type":"Feature","properties":{"title":"x"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}"#;
        let text = fc(&format!("{},{}", square_feature("a", 0.0, 0.0, 1.0, 1.0), nameless));
        let err = load_boundaries(&text, BoundaryKind::Land, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GeoError::MissingName { index: 1, .. }), "{err}");
        assert!(err.to_string().contains("feature 1"));

        let point = r#"{"type":"Feature","properties":{"name":"p"},"geometry":{"type":"Point","coordinates":[0,0]}}"#;
        assert!(matches!(
            load_boundaries(&fc(point), BoundaryKind::Land, &LoadOptions::default()),
            Err(GeoError::NonPolygon { index: 0, .. })
        ));

        let open = r#"{"type":"Feature","properties":{"name":"o"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}}"#;
        assert!(matches!(
            load_boundaries(&fc(open), BoundaryKind::Land, &LoadOptions::default()),
            Err(GeoError::UnclosedRing { index: 0, ring: 0 })
        ));

        assert!(matches!(
            load_boundaries("{\"type\":\"Feature\"}", BoundaryKind::Land, &LoadOptions::default()),
            Err(GeoError::NotFeatureCollection)
        ));
    }

    #[test]
    fn custom_name_key() {
        let text = fc(r#"{"type":"Feature","properties":{"NAME":"Coral Sea"},"geometry":{"type":"Polygon","coordinates":[[[150,-20],[160,-20],[160,-10],[150,-20]]]}}"#);
        let opts = LoadOptions { name_key: "NAME".into(), parent_key: None };
        let set = load_boundaries(&text, BoundaryKind::Ocean, &opts).unwrap();
        assert_eq!(set.features[0].name, "Coral Sea");
    }

    #[test]
    fn longitudes_are_normalized() {
        let set = load(&fc(&square_feature("east", 190.0, 0.0, 200.0, 10.0)));
        let ring = &set.features[0].polygons[0].outer;
        assert!(ring.iter().all(|p| (-180.0..=180.0).contains(&p.lon)));
        assert!(point_in_polygon(GeoPoint::new(5.0, -165.0), &set.features[0]));
    }

    #[test]
    fn unit_square_and_hole() {
        let set = load(&fc(&square_feature("sq", 0.0, 0.0, 1.0, 1.0)));
        let f = &set.features[0];
        assert!(point_in_polygon(GeoPoint::new(0.5, 0.5), f));
        assert!(!point_in_polygon(GeoPoint::new(0.5, 1.5), f));
        assert!(point_in_polygon(GeoPoint::new(0.0, 0.5), f));
        assert!(point_in_polygon(GeoPoint::new(1.0, 1.0), f));

        let holed = r#"{"type":"Feature","properties":{"name":"donut"},"geometry":{"type":"Polygon","coordinates":[
            [[0,0],[3,0],[3,3],[0,3],[0,0]],
            [[1,1],[2,1],[2,2],[1,2],[1,1]]]}}"#;
        let f = &load(&fc(holed)).features[0];
        assert!(!point_in_polygon(GeoPoint::new(1.5, 1.5), f));
        assert!(point_in_polygon(GeoPoint::new(0.5, 0.5), f));
        assert!(point_in_polygon(GeoPoint::new(1.0, 1.5), f), "hole edge belongs to the polygon");
    }

    #[test]
    fn antimeridian_ring_is_split() {
        let text = fc(r#"{"type":"Feature","properties":{"name":"dateline"},"geometry":{"type":"Polygon","coordinates":[[[170,-10],[-170,-10],[-170,10],[170,10],[170,-10]]]}}"#);
        let set = load(&text);
        let f = &set.features[0];
        assert_eq!(f.polygons.len(), 2);
        assert!(point_in_polygon(GeoPoint::new(0.0, 179.0), f));
        assert!(point_in_polygon(GeoPoint::new(0.0, -179.0), f));
        assert!(point_in_polygon(GeoPoint::new(0.0, 180.0), f));
        assert!(!point_in_polygon(GeoPoint::new(0.0, 0.0), f));
        assert!(!point_in_polygon(GeoPoint::new(0.0, 169.0), f));
        assert!(!point_in_polygon(GeoPoint::new(0.0, -169.0), f));

        // same ring written starting west of the seam
        let text = fc(r#"{"type":"Feature","properties":{"name":"dateline"},"geometry":{"type":"Polygon","coordinates":[[[-170,-10],[-170,10],[170,10],[170,-10],[-170,-10]]]}}"#);
        let f = &load(&text).features[0];
        assert!(point_in_polygon(GeoPoint::new(0.0, 179.0), f));
        assert!(point_in_polygon(GeoPoint::new(0.0, -179.0), f));
        assert!(!point_in_polygon(GeoPoint::new(0.0, 0.0), f));
    }

    #[test]
    fn antimeridian_hole_follows_its_piece() {
        let text = fc(r#"{"type":"Feature","properties":{"name":"ring"},"geometry":{"type":"Polygon","coordinates":[
            [[160,-20],[-160,-20],[-160,20],[160,20],[160,-20]],
            [[-178,-5],[-172,-5],[-172,5],[-178,5],[-178,-5]]]}}"#);
        let f = &load(&text).features[0];
        assert!(!point_in_polygon(GeoPoint::new(0.0, -175.0), f));
        assert!(point_in_polygon(GeoPoint::new(0.0, 175.0), f));
        assert!(point_in_polygon(GeoPoint::new(15.0, -175.0), f));
    }

    #[test]
    fn seam_edges_are_not_crossings() {
        let text = fc(r#"{"type":"Feature","properties":{"name":"band"},"geometry":{"type":"Polygon","coordinates":[[[-180,60],[180,60],[180,90],[-180,90],[-180,60]]]}}"#);
        let f = &load(&text).features[0];
        assert_eq!(f.polygons.len(), 1);
        assert!(point_in_polygon(GeoPoint::new(70.0, 0.0), f));
        assert!(point_in_polygon(GeoPoint::new(70.0, 179.9), f));
    }

    fn two_sets() -> (BoundarySet, BoundarySet) {
        let land = load(&fc(&[
            square_feature("Westland", 0.0, 0.0, 10.0, 10.0),
            square_feature("Eastland", 20.0, 0.0, 30.0, 10.0),
        ]
        .join(",")));
        let mut ocean = load(&fc(&square_feature("Big Sea", -50.0, -50.0, 50.0, 50.0)));
        ocean.kind = BoundaryKind::Ocean;
        (land, ocean)
    }

    #[test]
    fn index_candidates() {
        let empty = SpatialIndex::build(BoundarySet::empty(BoundaryKind::Land), 5.0);
        assert!(empty.candidates(GeoPoint::new(0.0, 0.0)).is_empty());

        let (land, _) = two_sets();
        let idx = SpatialIndex::build(land, 5.0);
        assert_eq!(idx.candidates(GeoPoint::new(5.0, 5.0)), &[0]);
        assert_eq!(idx.candidates(GeoPoint::new(5.0, 25.0)), &[1]);
        assert!(idx.candidates(GeoPoint::new(5.0, 15.0)).is_empty());
        assert!(idx.candidates(GeoPoint::new(-20.0, 5.0)).is_empty());
    }

    #[test]
    fn locate_priorities() {
        let (land, ocean) = two_sets();
        let li = SpatialIndex::build(land.clone(), 5.0);
        let oi = SpatialIndex::build(ocean.clone(), 5.0);

        let r = locate(&li, &oi, GeoPoint::new(5.0, 5.0), 1.0);
        assert_eq!((r.name.as_str(), r.kind, r.matched_by), ("Westland", LocationKind::Land, MatchedBy::Containment));

        let r = locate(&li, &oi, GeoPoint::new(5.0, 15.0), 100.0);
        assert_eq!((r.name.as_str(), r.kind, r.matched_by), ("Big Sea", LocationKind::Ocean, MatchedBy::Containment));

        let empty_ocean = SpatialIndex::build(BoundarySet::empty(BoundaryKind::Ocean), 5.0);
        let r = locate(&li, &empty_ocean, GeoPoint::new(10.3, 10.2), 1.0);
        assert_eq!((r.name.as_str(), r.matched_by), ("Westland", MatchedBy::Nearest));

        let r = locate(&li, &empty_ocean, GeoPoint::new(40.0, 40.0), 1.0);
        assert_eq!(r, LocationRecord::unknown());

        for p in [GeoPoint::new(5.0, 5.0), GeoPoint::new(10.3, 10.2), GeoPoint::new(60.0, 60.0), GeoPoint::new(5.0, 15.0)] {
            assert_eq!(locate(&li, &oi, p, 1.0), locate_scan(&land, &ocean, p, 1.0));
        }
    }
}
