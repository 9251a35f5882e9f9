//! Question/answer generation over named SPOT points.
//!
//! Four question types are produced per image. Every record of an image shares
//! one split; splits are assigned over image ids, never over records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{locate, GeoPoint, LocationKind, LocationRecord, SpatialIndex};
use crate::render::ColorGroup;
use crate::spot::SpotResult;
use crate::stable_hash;

#[derive(Debug, Error)]
pub enum QaError {
    #[error("line {line}: {source}")]
    Line { line: usize, source: serde_json::Error },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialize: {0}")]
    Serialize(serde_json::Error),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPoint {
    pub color: ColorGroup,
    pub point: GeoPoint,
    pub location: LocationRecord,
}

/// SPOT points of one image resolved to place names. Unknown locations are dropped and counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPoints {
    pub image: String,
    pub points: Vec<NamedPoint>,
    pub unknown_dropped: usize,
}

impl NamedPoints {
    pub fn from_spot(result: &SpotResult, land: &SpatialIndex, ocean: &SpatialIndex, tol: f64) -> Self {
        let mut points = Vec::new();
        let mut unknown_dropped = 0;
        for (&color, regions) in &result.colors {
            for &point in regions.iter().flat_map(|r| &r.geo_points) {
                let location = locate(land, ocean, point, tol);
                if location.kind == LocationKind::Unknown {
                    unknown_dropped += 1;
                } else {
                    points.push(NamedPoint { color, point, location });
                }
            }
        }
        Self { image: result.image.clone(), points, unknown_dropped }
    }

    /// Distinct names under `color`, optionally restricted to one kind.
    pub fn names(&self, color: ColorGroup, kind: Option<LocationKind>) -> BTreeSet<String> {
        self.points
            .iter()
            .filter(|p| p.color == color && kind.is_none_or(|k| p.location.kind == k))
            .map(|p| p.location.name.clone())
            .collect()
    }

    /// `"{parent}: {name}"` items (or bare names without a parent) under `color` and `kind`.
    pub fn labelled(&self, color: ColorGroup, kind: LocationKind) -> BTreeSet<String> {
        self.points
            .iter()
            .filter(|p| p.color == color && p.location.kind == kind)
            .map(|p| match &p.location.admin_parent {
                Some(parent) => format!("{parent}: {}", p.location.name),
                None => p.location.name.clone(),
            })
            .collect()
    }

    pub fn all_names(&self) -> BTreeSet<String> {
        self.points.iter().map(|p| p.location.name.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("named points serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QType {
    Verification,
    Enumeration,
    GeoIndexing,
    Description,
}

impl QType {
    pub const ALL: [QType; 4] = [QType::Verification, QType::Enumeration, QType::GeoIndexing, QType::Description];

    pub fn as_str(self) -> &'static str {
        match self {
            QType::Verification => "verification",
            QType::Enumeration => "enumeration",
            QType::GeoIndexing => "geo_indexing",
            QType::Description => "description",
        }
    }
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QAMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<ColorGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<LocationKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<GeoPoint>,
    /// Enumeration phrasing variant; 0 is the canonical wording.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QARecord {
    pub id: String,
    pub image: String,
    pub split: Split,
    pub qtype: QType,
    pub question: String,
    pub answer: String,
    #[serde(default)]
    pub meta: QAMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuestionCounts {
    pub verification: usize,
    pub enumeration: usize,
    pub geo_indexing: usize,
    pub description: usize,
}

impl Default for QuestionCounts {
    fn default() -> Self {
        Self { verification: 10, enumeration: 8, geo_indexing: 10, description: 1 }
    }
}

impl QuestionCounts {
    pub fn total(&self) -> usize {
        self.verification + self.enumeration + self.geo_indexing + self.description
    }

    pub fn get(&self, q: QType) -> usize {
        match q {
            QType::Verification => self.verification,
            QType::Enumeration => self.enumeration,
            QType::GeoIndexing => self.geo_indexing,
            QType::Description => self.description,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub counts: QuestionCounts,
    /// Verification true:false ratio.
    pub verification_ratio: [u32; 2],
    /// train:val:test ratio.
    pub split_ratio: [u32; 3],
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { counts: QuestionCounts::default(), verification_ratio: [5, 5], split_ratio: [7, 1, 2], seed: 0 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), QaError> {
        if self.verification_ratio.contains(&0) {
            return Err(QaError::InvalidConfig("verification ratio parts must be positive".into()));
        }
        if self.split_ratio.contains(&0) {
            return Err(QaError::InvalidConfig("split ratio parts must be positive".into()));
        }
        Ok(())
    }

    fn n_true(&self) -> usize {
        let [t, f] = self.verification_ratio;
        (self.counts.verification as f64 * f64::from(t) / f64::from(t + f)).round() as usize
    }
}

const RED_PHRASE: &str = "strong gales, storm or hurricane";
const YELLOW_PHRASE: &str = "strong breeze or gale";
pub const NONE_ANSWER: &str = "None";
pub const EMPTY_SLOT: &str = "no notable regions";
pub const DESCRIPTION_QUESTION: &str = "Can you describe the image in detail?";

pub fn verification_question(name: &str) -> String {
    format!(
        "Can you verify whether it is true or false that the location specified as {name} is currently experiencing {RED_PHRASE}?"
    )
}

pub fn geoindex_question(name: &str) -> String {
    format!("What is the latitude and longitude of the location referred to as {name}?")
}

fn kind_label(kind: LocationKind) -> &'static str {
    match kind {
        LocationKind::Land => "Land",
        LocationKind::Ocean => "Ocean",
        LocationKind::Unknown => "Unknown",
    }
}

pub fn enumeration_question(kind: LocationKind, color: ColorGroup, variant: u8) -> String {
    let phrase = if color == ColorGroup::Red { RED_PHRASE } else { YELLOW_PHRASE };
    let kind = kind_label(kind);
    match variant {
        0 => format!("Could you identify the {kind} regions currently undergoing {phrase}?"),
        _ => format!("Which {kind} regions are currently experiencing {phrase}?"),
    }
}

/// `(lat, lon)` at two decimals; negative zero prints as zero.
pub fn format_coordinate(p: GeoPoint) -> String {
    let fmt = |v: f64| {
        let s = format!("{v:.2}");
        if s == "-0.00" { "0.00".to_string() } else { s }
    };
    format!("({}, {})", fmt(p.lat), fmt(p.lon))
}

pub fn description_answer(red_ocean: &str, red_land: &str, yellow_ocean: &str, yellow_land: &str) -> String {
    format!(
        "Globally, regions are battling intense weather phenomena, including powerful gales, storms, and hurricanes, \
with wind gusts surpassing 20.7 m/s. The fury of these winds is felt over vast lands and oceanic stretches alike. \
Notably, areas such as {red_ocean}. Closer to human habitation, land regions in {red_land} reel under the power of \
these gales, showing nature\u{2019}s unbridled force across both developed and developing landscapes. Moreover, a vast \
array of regions encounters strong breezes and winds gusting between 10.8 to 20.7 m/s, impacting both land and sea. \
This includes {yellow_ocean}. On land, {yellow_land}, each face their own challenges with these forceful winds that \
spare few corners of the Earth."
    )
}

/// Short image id used in record ids: the file stem of the image reference.
pub fn image_stem(image: &str) -> String {
    Path::new(image).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| image.to_string())
}

fn rng_for(cfg: &GenConfig, image: &str, q: QType) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ stable_hash(&format!("{image}/{}", q.as_str())))
}

fn record(np: &NamedPoints, q: QType, idx: usize, question: String, answer: String, meta: QAMeta) -> QARecord {
    QARecord {
        id: format!("{}-{}-{idx:02}", image_stem(&np.image), q.as_str()),
        image: np.image.clone(),
        split: Split::Train,
        qtype: q,
        question,
        answer,
        meta,
    }
}

fn shuffled<T: Clone>(items: impl IntoIterator<Item = T>, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut v: Vec<T> = items.into_iter().collect();
    v.shuffle(rng);
    v
}

/// Per-image generation warnings; empty when every requested record was produced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageStats {
    pub image: String,
    pub records: usize,
    pub unknown_dropped: usize,
    pub warnings: Vec<String>,
}

/// True answers name red locations; false answers name same-image non-red
/// locations first, then gazetteer names. A shortage of red names is made up
/// with extra false questions.
pub fn gen_verification(np: &NamedPoints, gazetteer: &[String], cfg: &GenConfig, warnings: &mut Vec<String>) -> Vec<QARecord> {
    let n = cfg.counts.verification;
    let mut rng = rng_for(cfg, &np.image, QType::Verification);
    let red = np.names(ColorGroup::Red, None);

    let trues: Vec<String> = shuffled(red.iter().cloned(), &mut rng).into_iter().take(cfg.n_true().min(n)).collect();
    let want_false = n - trues.len();

    let image_names = np.all_names();
    let hard = shuffled(image_names.iter().filter(|s| !red.contains(*s)).cloned(), &mut rng);
    let global: BTreeSet<&String> = gazetteer.iter().filter(|s| !red.contains(*s) && !image_names.contains(*s)).collect();
    let soft = shuffled(global.into_iter().cloned(), &mut rng);
    let falses: Vec<String> = hard.into_iter().chain(soft).take(want_false).collect();

    if trues.len() + falses.len() < n {
        warnings.push(format!(
            "{}: verification short by {} (only {} distinct names)",
            np.image,
            n - trues.len() - falses.len(),
            trues.len() + falses.len()
        ));
    }

    let mut items: Vec<(String, bool)> =
        trues.into_iter().map(|s| (s, true)).chain(falses.into_iter().map(|s| (s, false))).collect();
    items.shuffle(&mut rng);

    items
        .into_iter()
        .enumerate()
        .map(|(i, (name, truth))| {
            let first = np.points.iter().find(|p| p.location.name == name);
            let meta = QAMeta {
                color: truth.then_some(ColorGroup::Red),
                kind: first.map(|p| p.location.kind),
                location: Some(name.clone()),
                ..Default::default()
            };
            let answer = if truth { "True" } else { "False" };
            record(np, QType::Verification, i, verification_question(&name), answer.to_string(), meta)
        })
        .collect()
}

/// Cycles through {Land, Ocean} x {red, yellow} x 2 phrasings.
pub fn gen_enumeration(np: &NamedPoints, cfg: &GenConfig) -> Vec<QARecord> {
    let mut combos = Vec::with_capacity(8);
    for variant in 0..2u8 {
        for kind in [LocationKind::Land, LocationKind::Ocean] {
            for color in [ColorGroup::Red, ColorGroup::Yellow] {
                combos.push((kind, color, variant));
            }
        }
    }
    (0..cfg.counts.enumeration)
        .map(|i| {
            let (kind, color, variant) = combos[i % combos.len()];
            let items = np.labelled(color, kind);
            let answer =
                if items.is_empty() { NONE_ANSWER.to_string() } else { items.into_iter().collect::<Vec<_>>().join("; ") };
            let meta = QAMeta { color: Some(color), kind: Some(kind), variant: Some(variant), ..Default::default() };
            record(np, QType::Enumeration, i, enumeration_question(kind, color, variant), answer, meta)
        })
        .collect()
}

/// Distinct named points, red first, then yellow, green and white. Each name is
/// asked once before any name repeats with a different point.
pub fn gen_geoindex(np: &NamedPoints, cfg: &GenConfig, warnings: &mut Vec<String>) -> Vec<QARecord> {
    const ORDER: [ColorGroup; 4] = [ColorGroup::Red, ColorGroup::Yellow, ColorGroup::Green, ColorGroup::White];
    let n = cfg.counts.geo_indexing;
    let mut rng = rng_for(cfg, &np.image, QType::GeoIndexing);
    let mut seen_names = BTreeSet::new();
    let mut taken = vec![false; np.points.len()];
    let mut picked: Vec<usize> = Vec::new();
    for color in ORDER {
        // first point per name keeps the choice independent of shuffle order
        let mut firsts: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, p) in np.points.iter().enumerate().filter(|(_, p)| p.color == color) {
            firsts.entry(p.location.name.as_str()).or_insert(i);
        }
        for i in shuffled(firsts.into_values(), &mut rng) {
            if picked.len() < n && seen_names.insert(np.points[i].location.name.as_str()) {
                taken[i] = true;
                picked.push(i);
            }
        }
    }
    let mut seen_points: BTreeSet<(u64, u64)> =
        picked.iter().map(|&i| (np.points[i].point.lat.to_bits(), np.points[i].point.lon.to_bits())).collect();
    for color in ORDER {
        let rest: Vec<usize> = (0..np.points.len()).filter(|&i| !taken[i] && np.points[i].color == color).collect();
        for i in shuffled(rest, &mut rng) {
            let p = np.points[i].point;
            if picked.len() < n && seen_points.insert((p.lat.to_bits(), p.lon.to_bits())) {
                taken[i] = true;
                picked.push(i);
            }
        }
    }
    if picked.len() < n {
        warnings.push(format!("{}: geo_indexing short by {} (only {} distinct points)", np.image, n - picked.len(), picked.len()));
    }
    picked
        .into_iter()
        .map(|i| &np.points[i])
        .enumerate()
        .map(|(i, p)| {
            let meta = QAMeta {
                color: Some(p.color),
                location: Some(p.location.name.clone()),
                kind: Some(p.location.kind),
                coordinate: Some(p.point),
                variant: None,
            };
            record(np, QType::GeoIndexing, i, geoindex_question(&p.location.name), format_coordinate(p.point), meta)
        })
        .collect()
}

pub fn gen_description(np: &NamedPoints) -> QARecord {
    let slot = |color, kind| {
        let names = np.names(color, Some(kind));
        if names.is_empty() { EMPTY_SLOT.to_string() } else { names.into_iter().collect::<Vec<_>>().join(", ") }
    };
    let answer = description_answer(
        &slot(ColorGroup::Red, LocationKind::Ocean),
        &slot(ColorGroup::Red, LocationKind::Land),
        &slot(ColorGroup::Yellow, LocationKind::Ocean),
        &slot(ColorGroup::Yellow, LocationKind::Land),
    );
    record(np, QType::Description, 0, DESCRIPTION_QUESTION.to_string(), answer, QAMeta::default())
}

/// All records for one image, in type order, with split left at the default.
pub fn generate_image(np: &NamedPoints, gazetteer: &[String], cfg: &GenConfig) -> (Vec<QARecord>, ImageStats) {
    let mut warnings = Vec::new();
    let mut out = gen_verification(np, gazetteer, cfg, &mut warnings);
    out.extend(gen_enumeration(np, cfg));
    out.extend(gen_geoindex(np, cfg, &mut warnings));
    if cfg.counts.description > 0 {
        let d = gen_description(np);
        // extra description records would be identical; one is emitted per image
        out.push(d);
        if cfg.counts.description > 1 {
            warnings.push(format!("{}: description count capped at 1", np.image));
        }
    }
    let stats = ImageStats { image: np.image.clone(), records: out.len(), unknown_dropped: np.unknown_dropped, warnings };
    (out, stats)
}

/// Image-level split assignment: floor-proportional val and test counts, the remainder to train.
pub fn split_dataset(images: &[String], ratio: [u32; 3], seed: u64) -> BTreeMap<String, Split> {
    let ids: BTreeSet<&String> = images.iter().collect();
    let n = ids.len();
    let total: u64 = ratio.iter().map(|&r| u64::from(r)).sum();
    let part = |r: u32| if total == 0 { 0 } else { (n as u64 * u64::from(r) / total) as usize };
    let (n_val, n_test) = (part(ratio[1]), part(ratio[2]));

    let mut order: Vec<&String> = ids.into_iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let split = if i < n_val {
                Split::Val
            } else if i < n_val + n_test {
                Split::Test
            } else {
                Split::Train
            };
            (id.clone(), split)
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub images: usize,
    pub records: usize,
    pub per_type: BTreeMap<QType, usize>,
    pub per_split_records: BTreeMap<Split, usize>,
    pub per_split_images: BTreeMap<Split, usize>,
    pub unknown_dropped: usize,
    pub warnings: Vec<String>,
}

impl DatasetStats {
    pub fn from_records(records: &[QARecord], images: &[ImageStats]) -> Self {
        let mut s = DatasetStats { images: images.len(), records: records.len(), ..Default::default() };
        let mut image_split = BTreeMap::new();
        for r in records {
            *s.per_type.entry(r.qtype).or_default() += 1;
            *s.per_split_records.entry(r.split).or_default() += 1;
            image_split.insert(r.image.as_str(), r.split);
        }
        for split in image_split.into_values() {
            *s.per_split_images.entry(split).or_default() += 1;
        }
        for im in images {
            s.unknown_dropped += im.unknown_dropped;
            s.warnings.extend(im.warnings.iter().cloned());
        }
        s
    }
}

/// Generate, split and concatenate records for all images, ordered by image id.
pub fn generate_dataset(
    images: &[NamedPoints],
    gazetteer: &[String],
    cfg: &GenConfig,
) -> Result<(Vec<QARecord>, DatasetStats), QaError> {
    cfg.validate()?;
    let mut ordered: Vec<&NamedPoints> = images.iter().collect();
    ordered.sort_by(|a, b| a.image.cmp(&b.image));
    let ids: Vec<String> = ordered.iter().map(|n| n.image.clone()).collect();
    let splits = split_dataset(&ids, cfg.split_ratio, cfg.seed);

    let mut records = Vec::new();
    let mut per_image = Vec::new();
    for np in ordered {
        let (mut recs, st) = generate_image(np, gazetteer, cfg);
        let split = splits[&np.image];
        recs.iter_mut().for_each(|r| r.split = split);
        records.extend(recs);
        per_image.push(st);
    }
    let stats = DatasetStats::from_records(&records, &per_image);
    Ok((records, stats))
}

pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, records: &[T]) -> Result<(), QaError> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(QaError::Serialize)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Blank lines are skipped; line numbers are 1-based.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(r: R) -> Result<Vec<T>, QaError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| QaError::Line { line: i + 1, source })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::MatchedBy;

    fn loc(name: &str, kind: LocationKind, parent: &str) -> LocationRecord {
        LocationRecord { name: name.into(), kind, admin_parent: Some(parent.into()), matched_by: MatchedBy::Containment }
    }

    fn np(points: Vec<(ColorGroup, LocationRecord)>) -> NamedPoints {
        NamedPoints {
            image: "images/2023-01-01T00.png".into(),
            points: points
                .into_iter()
                .enumerate()
                .map(|(i, (color, location))| NamedPoint { color, point: GeoPoint::new(i as f64, -(i as f64)), location })
                .collect(),
            unknown_dropped: 0,
        }
    }

    fn gaz() -> Vec<String> {
        (0..30).map(|i| format!("Place {i}")).collect()
    }

    #[test]
    fn verification_true_question_text() {
        let np = np(vec![(ColorGroup::Red, loc("Tasman Sea", LocationKind::Ocean, "Pacific Ocean"))]);
        let mut w = Vec::new();
        let recs = gen_verification(&np, &gaz(), &GenConfig::default(), &mut w);
        assert_eq!(recs.len(), 10);
        let t: Vec<_> = recs.iter().filter(|r| r.answer == "True").collect();
        assert_eq!(t.len(), 1);
        assert!(t[0].question.ends_with("location specified as Tasman Sea is currently experiencing strong gales, storm or hurricane?"));
        assert!(w.is_empty());
    }

    #[test]
    fn no_red_means_all_false() {
        let np = np(vec![(ColorGroup::Green, loc("Bavaria", LocationKind::Land, "Germany"))]);
        let recs = gen_verification(&np, &gaz(), &GenConfig::default(), &mut Vec::new());
        assert_eq!(recs.len(), 10);
        assert!(recs.iter().all(|r| r.answer == "False"));
        assert!(recs.iter().any(|r| r.meta.location.as_deref() == Some("Bavaria")), "hard negative used");
        let names: BTreeSet<_> = recs.iter().map(|r| r.meta.location.clone()).collect();
        assert_eq!(names.len(), 10);
    }

    #[test]
    fn verification_shortfall_warns() {
        let np = np(vec![(ColorGroup::Red, loc("A", LocationKind::Land, "X"))]);
        let mut w = Vec::new();
        let recs = gen_verification(&np, &["B".to_string()], &GenConfig::default(), &mut w);
        assert_eq!(recs.len(), 2);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn enumeration_answers() {
        let np = np(vec![
            (ColorGroup::Red, loc("Tasman Sea", LocationKind::Ocean, "Pacific Ocean")),
            (ColorGroup::Yellow, loc("B", LocationKind::Land, "Continent")),
            (ColorGroup::Yellow, loc("A", LocationKind::Land, "Continent")),
        ]);
        let recs = gen_enumeration(&np, &GenConfig::default());
        assert_eq!(recs.len(), 8);
        let ans = |kind, color, variant| {
            recs.iter()
                .find(|r| r.meta.kind == Some(kind) && r.meta.color == Some(color) && r.meta.variant == Some(variant))
                .unwrap()
                .answer
                .clone()
        };
        assert_eq!(ans(LocationKind::Ocean, ColorGroup::Red, 0), "Pacific Ocean: Tasman Sea");
        assert_eq!(ans(LocationKind::Land, ColorGroup::Red, 1), "None");
        assert_eq!(ans(LocationKind::Land, ColorGroup::Yellow, 0), "Continent: A; Continent: B");
        assert_eq!(
            recs[0].question,
            "Could you identify the Land regions currently undergoing strong gales, storm or hurricane?"
        );
    }

    #[test]
    fn coordinate_format() {
        assert_eq!(format_coordinate(GeoPoint::new(-58.82, 176.31)), "(-58.82, 176.31)");
        assert_eq!(format_coordinate(GeoPoint::new(0.0, 0.0)), "(0.00, 0.00)");
        assert_eq!(format_coordinate(GeoPoint::new(-0.001, 0.004)), "(0.00, 0.00)");
    }

    #[test]
    fn geoindex_prefers_red_and_is_deterministic() {
        let mut pts = vec![(ColorGroup::White, loc("W", LocationKind::Ocean, "O"))];
        pts.extend((0..12).map(|i| (ColorGroup::Red, loc(&format!("R{i}"), LocationKind::Land, "L"))));
        let np = np(pts);
        let cfg = GenConfig::default();
        let a = gen_geoindex(&np, &cfg, &mut Vec::new());
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|r| r.meta.color == Some(ColorGroup::Red)));
        assert_eq!(a, gen_geoindex(&np, &cfg, &mut Vec::new()));
        let r = &a[0];
        assert_eq!(r.answer, format_coordinate(r.meta.coordinate.unwrap()));
    }

    #[test]
    fn geoindex_repeats_names_only_after_exhausting_them() {
        let pts = (0..8).map(|i| (ColorGroup::Red, loc(&format!("R{}", i % 3), LocationKind::Land, "L"))).collect();
        let mut w = Vec::new();
        let a = gen_geoindex(&np(pts), &GenConfig::default(), &mut w);
        assert_eq!(a.len(), 8);
        assert_eq!(w.len(), 1);
        let first3: BTreeSet<_> = a[..3].iter().map(|r| r.meta.location.clone().unwrap()).collect();
        assert_eq!(first3.len(), 3);
        let coords: BTreeSet<_> = a.iter().map(|r| r.answer.clone()).collect();
        assert_eq!(coords.len(), 8);
    }

    #[test]
    fn description_slots() {
        let empty = np(vec![]);
        let d = gen_description(&empty);
        assert_eq!(d.answer.matches(EMPTY_SLOT).count(), 4);
        assert!(d.answer.contains("wind gusts surpassing 20.7 m/s"));

        let one = np(vec![(ColorGroup::Red, loc("Tasman Sea", LocationKind::Ocean, "Pacific Ocean"))]);
        assert!(gen_description(&one).answer.contains("Notably, areas such as Tasman Sea."));
    }

    #[test]
    fn splits() {
        let ids: Vec<String> = (0..10).map(|i| format!("img{i}")).collect();
        let s = split_dataset(&ids, [7, 1, 2], 3);
        let count = |x| s.values().filter(|v| **v == x).count();
        assert_eq!((count(Split::Train), count(Split::Val), count(Split::Test)), (7, 1, 2));
        assert_eq!(split_dataset(&ids[..1], [7, 1, 2], 0)["img0"], Split::Train);
        assert_eq!(s, split_dataset(&ids, [7, 1, 2], 3));
    }

    #[test]
    fn jsonl_errors_carry_line() {
        let err = read_jsonl::<QARecord, _>("not json\n".as_bytes()).unwrap_err();
        assert!(matches!(err, QaError::Line { line: 1, .. }));
        let none: Vec<QARecord> = read_jsonl("".as_bytes()).unwrap();
        assert!(none.is_empty());
        let mut buf = Vec::new();
        write_jsonl::<QARecord, _>(&mut buf, &[]).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn ids_use_stem() {
        let np = np(vec![]);
        let (recs, _) = generate_image(&np, &gaz(), &GenConfig::default());
        assert_eq!(recs.last().unwrap().id, "2023-01-01T00-description-00");
        assert_eq!(recs[0].id, "2023-01-01T00-verification-00");
    }
}
