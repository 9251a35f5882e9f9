//! Chat-completion judge client for description answers.

use std::fmt;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use tracing::{debug, warn};

pub const DEFAULT_PROMPT: &str = "The user question is {question}. the ground truth answer is {gt_ans}, the generated response {gpt_ans} is generated by GPT model.

Please act as an impartial judge and evaluate the quality of the response provided by AI assistant to the question displayed upper!
You should give three scores to the response. the highest score is 5 and the lowest score is 1. the scores include:

Score 1: the total score considering factors helpfulness, relevance, accuracy, depth, creativity, and level
of detail of the generated response.

Score 2: the similarity and completeness score between ground truth answer and generated response. sometimes the generated answer have mention some inaccurate point or the answer is incomplete compared with the ground truth answer. 5 means 80%-90% similar. 4 means 60%-80% similar. 3 means 40%-60% similar, 2 means 20%-40% similar and 1 means 0-20% similar.

Score 3: the total score considering factors helpfulness, relevance, accuracy, depth, creativity, and level
of detail of the ground truth answer.

Avoid any position biases and ensure that the order in which the responses were presented does not influence
your decision. Do not allow the length of the responses to influence your evaluation,
Be as objective as possible.
Directly output the score and strictly follow the format:

### Score 1: number ### Score 2: number ### Score 3: number
";

const PLACEHOLDERS: [&str; 3] = ["{question}", "{gt_ans}", "{gpt_ans}"];

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("invalid judge config: {0}")]
    Config(String),
    #[error("environment variable `{0}` with the judge API key is not set")]
    MissingKey(String),
    #[error("reading prompt template: {0}")]
    Template(#[from] std::io::Error),
    #[error("request failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("unparseable scores: {0}")]
    Scores(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub requests_per_minute: u32,
    /// First retry delay; doubles on every further retry.
    pub backoff_base_ms: u64,
    pub prompt_template: Option<PathBuf>,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key_env: "JUDGE_API_KEY".into(),
            timeout_secs: 60.0,
            max_retries: 3,
            requests_per_minute: 60,
            backoff_base_ms: 1000,
            prompt_template: None,
        }
    }
}

impl JudgeConfig {
    pub fn validate(&self) -> Result<(), JudgeError> {
        if self.endpoint.is_empty() || self.model.is_empty() || self.api_key_env.is_empty() {
            return Err(JudgeError::Config("endpoint, model and api_key_env must be non-empty".into()));
        }
        if !(self.timeout_secs > 0.0) || self.requests_per_minute == 0 {
            return Err(JudgeError::Config("timeout and requests_per_minute must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeScores {
    pub score1: u8,
    pub score2: u8,
    pub score3: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JudgeReply {
    pub scores: JudgeScores,
    pub retries: u32,
}

fn score_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)score\s*([123])\s*:\s*(\d+)").expect("static regex"))
}

/// Reads `Score 1: n`, `Score 2: n`, `Score 3: n`; each must be in 1..=5.
pub fn parse_scores(text: &str) -> Result<JudgeScores, JudgeError> {
    let mut got: [Option<u8>; 3] = [None; 3];
    for caps in score_re().captures_iter(text) {
        let slot = caps[1].parse::<usize>().expect("regex digit") - 1;
        let v: u32 = caps[2].parse().map_err(|_| JudgeError::Scores(format!("score {} is not a number", slot + 1)))?;
        if !(1..=5).contains(&v) {
            return Err(JudgeError::Scores(format!("score {} = {v} outside 1..=5", slot + 1)));
        }
        got[slot].get_or_insert(v as u8);
    }
    match got {
        [Some(score1), Some(score2), Some(score3)] => Ok(JudgeScores { score1, score2, score3 }),
        _ => {
            let missing: Vec<String> =
                got.iter().enumerate().filter(|(_, s)| s.is_none()).map(|(i, _)| format!("Score {}", i + 1)).collect();
            Err(JudgeError::Scores(format!("missing {}", missing.join(", "))))
        }
    }
}

pub fn render_prompt(template: &str, question: &str, gt_ans: &str, gpt_ans: &str) -> String {
    template.replace("{question}", question).replace("{gt_ans}", gt_ans).replace("{gpt_ans}", gpt_ans)
}

struct ApiKey(String);

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

enum Attempt {
    Retry(String),
    Fatal(JudgeError),
}

/// Blocking client; requests are spaced to honor the per-minute cap.
#[derive(Debug)]
pub struct JudgeClient {
    cfg: JudgeConfig,
    key: ApiKey,
    template: String,
    http: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
}

impl JudgeClient {
    pub fn new(cfg: JudgeConfig) -> Result<Self, JudgeError> {
        cfg.validate()?;
        let key = std::env::var(&cfg.api_key_env).map_err(|_| JudgeError::MissingKey(cfg.api_key_env.clone()))?;
        let template = match &cfg.prompt_template {
            Some(path) => std::fs::read_to_string(path)?,
            None => DEFAULT_PROMPT.to_string(),
        };
        if let Some(p) = PLACEHOLDERS.iter().find(|p| !template.contains(**p)) {
            return Err(JudgeError::Config(format!("prompt template lacks placeholder {p}")));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| JudgeError::Config(e.to_string()))?;
        Ok(Self { cfg, key: ApiKey(key), template, http, last_request: Mutex::new(None) })
    }

    pub fn prompt(&self, question: &str, gt_ans: &str, gpt_ans: &str) -> String {
        render_prompt(&self.template, question, gt_ans, gpt_ans)
    }

    fn wait_for_slot(&self) {
        let interval = Duration::from_secs_f64(60.0 / f64::from(self.cfg.requests_per_minute));
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = *last {
            let ready = t + interval;
            let now = Instant::now();
            if ready > now {
                thread::sleep(ready - now);
            }
        }
        *last = Some(Instant::now());
    }

    fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        self.wait_for_slot();
        let resp = self
            .http
            .post(&self.cfg.endpoint)
            .bearer_auth(&self.key.0)
            .json(body)
            .send()
            .map_err(|e| Attempt::Retry(if e.is_timeout() { "timeout".into() } else { format!("transport: {e}") }))?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| Attempt::Retry(format!("reading body: {e}")))?;
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(Attempt::Fatal(JudgeError::Status { status, body: text.chars().take(200).collect() }));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| Attempt::Fatal(JudgeError::Malformed(e.to_string())))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Attempt::Fatal(JudgeError::Malformed("no choices[0].message.content".into())))
    }

    /// One judged answer. Transport errors, timeouts, 429 and 5xx are retried with exponential backoff.
    pub fn judge_request(&self, question: &str, gt_ans: &str, gpt_ans: &str) -> Result<JudgeReply, JudgeError> {
        let body = json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": self.prompt(question, gt_ans, gpt_ans)}],
        });
        let mut retries = 0;
        loop {
            match self.attempt(&body) {
                Ok(content) => {
                    let scores = parse_scores(&content)?;
                    debug!(retries, "judge scored");
                    return Ok(JudgeReply { scores, retries });
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(reason)) => {
                    if retries >= self.cfg.max_retries {
                        return Err(JudgeError::Exhausted { attempts: retries + 1, last: reason });
                    }
                    let delay = self.cfg.backoff_base_ms.saturating_mul(1u64 << retries.min(16));
                    retries += 1;
                    warn!(retry = retries, %reason, delay_ms = delay, "judge request failed, retrying");
                    thread::sleep(Duration::from_millis(delay));
                }
            }
        }
    }

    /// Judges `(question, gt_ans, gpt_ans)` triples in order; failures are returned per item.
    pub fn judge_batch(&self, items: &[(&str, &str, &str)]) -> Vec<Result<JudgeScores, JudgeError>> {
        items
            .iter()
            .map(|(q, g, p)| {
                let r = self.judge_request(q, g, p).map(|r| r.scores);
                if let Err(e) = &r {
                    warn!(error = %e, "judge item failed");
                }
                r
            })
            .collect()
    }
}
