//! BLEU and ROUGE over a simple tokenization.
//!
//! Tokens are lowercase; every punctuation character is its own token. For an
//! n-gram order where neither side has any n-grams (both texts shorter than n),
//! precision and recall are taken as 1 provided both texts are non-empty.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        if c.is_alphanumeric() || c.is_whitespace() {
            spaced.extend(c.to_lowercase());
        } else {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Clipped matches, candidate n-gram total, reference n-gram total.
fn overlap(cand: &[String], reference: &[String], n: usize) -> (usize, usize, usize) {
    let c = ngram_counts(cand, n);
    let r = ngram_counts(reference, n);
    let hits = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
    (hits, cand.len().saturating_sub(n - 1), reference.len().saturating_sub(n - 1))
}

fn bleu_tokens(cand: &[String], reference: &[String], max_n: usize) -> f64 {
    if cand.is_empty() || reference.is_empty() || max_n == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (hits, total, ref_total) = overlap(cand, reference, n);
        let p = match (total, ref_total) {
            (0, 0) => 1.0,
            (0, _) => 0.0,
            _ => hits as f64 / total as f64,
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let bp = (1.0 - reference.len() as f64 / cand.len() as f64).min(0.0).exp();
    bp * (log_sum / max_n as f64).exp()
}

/// Cumulative BLEU-`max_n` with brevity penalty; empty candidate scores 0.
pub fn bleu(candidate: &str, reference: &str, max_n: usize) -> f64 {
    bleu_tokens(&tokenize(candidate), &tokenize(reference), max_n)
}

/// Mean of BLEU-1 and BLEU-2.
pub fn bleu_report(candidate: &str, reference: &str) -> f64 {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    (bleu_tokens(&c, &r, 1) + bleu_tokens(&c, &r, 2)) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
}

impl RougeScores {
    pub fn mean(&self) -> f64 {
        (self.rouge1 + self.rouge2 + self.rouge_l) / 3.0
    }
}

fn f_measure(hits: usize, cand_total: usize, ref_total: usize) -> f64 {
    if hits == 0 {
        return 0.0;
    }
    let p = hits as f64 / cand_total as f64;
    let r = hits as f64 / ref_total as f64;
    2.0 * p * r / (p + r)
}

fn rouge_n(cand: &[String], reference: &[String], n: usize) -> f64 {
    let (hits, ct, rt) = overlap(cand, reference, n);
    if ct == 0 && rt == 0 {
        return if cand.is_empty() || reference.is_empty() { 0.0 } else { 1.0 };
    }
    f_measure(hits, ct, rt)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge(candidate: &str, reference: &str) -> RougeScores {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    RougeScores {
        rouge1: rouge_n(&c, &r, 1),
        rouge2: rouge_n(&c, &r, 2),
        rouge_l: f_measure(lcs_len(&c, &r), c.len(), r.len()),
    }
}

/// Mean of ROUGE-1, ROUGE-2 and ROUGE-L F1.
pub fn rouge_report(candidate: &str, reference: &str) -> f64 {
    rouge(candidate, reference).mean()
}
