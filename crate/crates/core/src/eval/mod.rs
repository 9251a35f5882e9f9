//! Prediction parsing and scoring.
//!
//! Each gold record is routed by question type: verification to precision,
//! recall and F1; enumeration to the set match score; geo-indexing to the
//! haversine distance; description to BLEU, ROUGE and (optionally) judge scores.

pub mod judge;
pub mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::qa::{QARecord, QType};

pub use judge::{JudgeClient, JudgeConfig, JudgeError, JudgeScores};
pub use text::{bleu, bleu_report, rouge, rouge_report, tokenize, RougeScores};

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {preds} predictions vs {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("duplicate {which} id `{id}`")]
    DuplicateId { which: &'static str, id: String },
    #[error("prediction `{0}` has no gold record")]
    MissingGold(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Abstain,
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase)
}

/// Whole-word, case-insensitive; both or neither of "true"/"false" is an abstention.
pub fn parse_verification(text: &str) -> Verdict {
    let (mut t, mut f) = (false, false);
    for w in words(text) {
        t |= w == "true";
        f |= w == "false";
    }
    match (t, f) {
        (true, false) => Verdict::True,
        (false, true) => Verdict::False,
        _ => Verdict::Abstain,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Positive class is `true`; an abstention counts as the wrong label.
pub fn f1_verification(preds: &[Verdict], golds: &[bool]) -> Result<Prf, EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch { preds: preds.len(), golds: golds.len() });
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, &g) in preds.iter().zip(golds) {
        let said_true = match p {
            Verdict::True => true,
            Verdict::False => false,
            Verdict::Abstain => !g,
        };
        match (said_true, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(Prf { precision, recall, f1 })
}

/// Lowercase, punctuation to spaces, whitespace collapsed, leading "the " dropped.
pub fn normalize_name(text: &str) -> String {
    let cleaned: String =
        text.chars().map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' }).collect::<String>().to_lowercase();
    let mut out = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    while let Some(rest) = out.strip_prefix("the ") {
        out = rest.to_string();
    }
    out
}

const SENTINELS: [&str; 2] = ["none", "no notable regions"];

/// Items split on `;`, `,` and newlines; any `parent:` prefix is discarded.
pub fn parse_name_set(text: &str) -> BTreeSet<String> {
    text.split([';', ',', '\n'])
        .map(|item| item.rsplit(':').next().unwrap_or(item))
        .map(normalize_name)
        .filter(|s| !s.is_empty() && !SENTINELS.contains(&s.as_str()))
        .collect()
}

/// `(|x ∩ y| - |x △ y|) / |x ∪ y|`, or 0 when both sets are empty.
pub fn match_score<T: Ord>(x: &BTreeSet<T>, y: &BTreeSet<T>) -> f64 {
    let inter = x.intersection(y).count();
    let union = x.len() + y.len() - inter;
    if union == 0 {
        return 0.0;
    }
    let sym = union - inter;
    (inter as f64 - sym as f64) / union as f64
}

fn coord_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\(\s*([+-]?\d+(?:\.\d+)?)\s*,\s*([+-]?\d+(?:\.\d+)?)\s*\)").expect("static regex")
    })
}

/// First `(lat, lon)` pair in the text; out-of-range pairs yield `None`.
pub fn parse_coordinate(text: &str) -> Option<GeoPoint> {
    let caps = coord_re().captures(text)?;
    let lat: f64 = caps[1].parse().ok()?;
    let lon: f64 = caps[2].parse().ok()?;
    ((-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)).then_some(GeoPoint::new(lat, lon))
}

pub fn haversine(a: GeoPoint, b: GeoPoint, r: f64) -> f64 {
    let (la, lb) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lb - la;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la.cos() * lb.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * r * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub count: usize,
    pub abstain: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub count: usize,
    pub mean_match_score: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeoIndexingReport {
    pub count: usize,
    pub parse_failures: usize,
    /// Mean over parseable answers only.
    pub mean_haversine_km: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptionReport {
    pub count: usize,
    pub bleu: Option<f64>,
    pub rouge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_errors: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: usize,
    /// Gold records without a prediction; scored as an empty answer.
    pub missing_predictions: usize,
    pub verification: VerificationReport,
    pub enumeration: EnumerationReport,
    pub geo_indexing: GeoIndexingReport,
    pub description: DescriptionReport,
}

/// One scored record for the detail file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDetail {
    pub id: String,
    pub qtype: QType,
    pub metric: String,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn index_unique<'a, T>(items: &'a [T], id: impl Fn(&T) -> &str, which: &'static str) -> Result<HashMap<&'a str, &'a T>, EvalError>
where
    T: 'a,
{
    let mut map = HashMap::with_capacity(items.len());
    for it in items {
        let key = id(it);
        if map.insert(key, it).is_some() {
            return Err(EvalError::DuplicateId { which, id: key.to_string() });
        }
    }
    Ok(map)
}

/// Score predictions against gold records, in gold order.
pub fn evaluate(
    preds: &[Prediction],
    golds: &[QARecord],
    judge: Option<&JudgeClient>,
) -> Result<(EvalReport, Vec<RecordDetail>), EvalError> {
    let gold_ids = index_unique(golds, |g| g.id.as_str(), "gold")?;
    let pred_by_id = index_unique(preds, |p| p.id.as_str(), "prediction")?;
    if let Some(p) = preds.iter().find(|p| !gold_ids.contains_key(p.id.as_str())) {
        return Err(EvalError::MissingGold(p.id.clone()));
    }

    let mut report = EvalReport { records: golds.len(), ..Default::default() };
    let mut details = Vec::with_capacity(golds.len());
    let (mut verdicts, mut labels) = (Vec::new(), Vec::new());
    let (mut ms, mut km, mut bleus, mut rouges) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut judge_items = Vec::new();

    for g in golds {
        let (answer, missing) = match pred_by_id.get(g.id.as_str()) {
            Some(p) => (p.answer.as_str(), false),
            None => {
                report.missing_predictions += 1;
                ("", true)
            }
        };
        let detail = |metric: &str, value: Option<f64>, note: Option<String>| RecordDetail {
            id: g.id.clone(),
            qtype: g.qtype,
            metric: metric.to_string(),
            value,
            note,
        };
        match g.qtype {
            QType::Verification => {
                let v = parse_verification(answer);
                let gold = parse_verification(&g.answer) == Verdict::True;
                report.verification.count += 1;
                if v == Verdict::Abstain {
                    report.verification.abstain += 1;
                }
                let correct = matches!((v, gold), (Verdict::True, true) | (Verdict::False, false));
                details.push(detail("correct", Some(f64::from(u8::from(correct))), Some(format!("{v:?}").to_lowercase())));
                verdicts.push(v);
                labels.push(gold);
            }
            QType::Enumeration => {
                let (gold_set, pred_set) = (parse_name_set(&g.answer), parse_name_set(answer));
                report.enumeration.count += 1;
                // a correctly predicted empty set is a full match at record level
                let (s, note) = if gold_set.is_empty() && pred_set.is_empty() && !missing {
                    (1.0, Some("both sets empty".to_string()))
                } else {
                    (match_score(&gold_set, &pred_set), None)
                };
                details.push(detail("match_score", Some(s), note));
                ms.push(s);
            }
            QType::GeoIndexing => {
                report.geo_indexing.count += 1;
                match (parse_coordinate(&g.answer), parse_coordinate(answer)) {
                    (Some(gold), Some(pred)) => {
                        let d = haversine(pred, gold, EARTH_RADIUS_KM);
                        details.push(detail("haversine_km", Some(d), None));
                        km.push(d);
                    }
                    (None, _) => details.push(detail("haversine_km", None, Some("gold answer has no coordinate".into()))),
                    (_, None) => {
                        report.geo_indexing.parse_failures += 1;
                        details.push(detail("haversine_km", None, Some("unparseable prediction".into())));
                    }
                }
            }
            QType::Description => {
                let b = bleu_report(answer, &g.answer);
                let r = rouge_report(answer, &g.answer);
                report.description.count += 1;
                details.push(detail("bleu", Some(b), None));
                details.push(detail("rouge", Some(r), None));
                bleus.push(b);
                rouges.push(r);
                judge_items.push((g, answer));
            }
        }
    }

    if !verdicts.is_empty() {
        let prf = f1_verification(&verdicts, &labels)?;
        report.verification.precision = Some(prf.precision);
        report.verification.recall = Some(prf.recall);
        report.verification.f1 = Some(prf.f1);
    }
    report.enumeration.mean_match_score = mean(&ms);
    report.geo_indexing.mean_haversine_km = mean(&km);
    report.description.bleu = mean(&bleus);
    report.description.rouge = mean(&rouges);

    if let Some(client) = judge {
        let requests: Vec<(&str, &str, &str)> =
            judge_items.iter().map(|(g, a)| (g.question.as_str(), g.answer.as_str(), *a)).collect();
        let results = client.judge_batch(&requests);
        let mut scores: [Vec<f64>; 3] = Default::default();
        let mut errors = 0;
        for ((g, _), res) in judge_items.iter().zip(results) {
            match res {
                Ok(s) => {
                    for (acc, v) in scores.iter_mut().zip([s.score1, s.score2, s.score3]) {
                        acc.push(f64::from(v));
                    }
                    details.push(RecordDetail {
                        id: g.id.clone(),
                        qtype: g.qtype,
                        metric: "judge".into(),
                        value: Some(f64::from(s.score2)),
                        note: Some(format!("{} {} {}", s.score1, s.score2, s.score3)),
                    });
                }
                Err(e) => {
                    errors += 1;
                    details.push(RecordDetail {
                        id: g.id.clone(),
                        qtype: g.qtype,
                        metric: "judge".into(),
                        value: None,
                        note: Some(e.to_string()),
                    });
                }
            }
        }
        report.description.judge_total = mean(&scores[0]);
        report.description.judge_similarity = mean(&scores[1]);
        report.description.judge_reference = mean(&scores[2]);
        report.description.judge_errors = Some(errors);
    }

    Ok((report, details))
}

/// Per-type record counts of a gold file.
pub fn count_by_type(golds: &[QARecord]) -> BTreeMap<QType, usize> {
    let mut m = BTreeMap::new();
    for g in golds {
        *m.entry(g.qtype).or_default() += 1;
    }
    m
}
