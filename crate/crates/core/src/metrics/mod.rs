//! Success-rate and path-efficiency metrics, and a deterministic answer judge.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::evolution::rouge_l_f1;
use crate::experience::tokenize;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("no records to aggregate")]
    EmptyRecords,
    #[error("judge score {0} outside 1..=5")]
    ScoreOutOfRange(u8),
    #[error("shortest path length must be positive, got {0}")]
    NonPositiveShortest(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Answer-quality score on a 1..=5 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct JudgeScore(u8);

impl JudgeScore {
    pub fn new(raw: u8) -> Result<Self, MetricsError> {
        if (1..=5).contains(&raw) {
            Ok(Self(raw))
        } else {
            Err(MetricsError::ScoreOutOfRange(raw))
        }
    }

    pub fn raw(self) -> u8 {
        self.0
    }

    /// `(raw - 1) / 4`.
    pub fn normalized(self) -> f64 {
        (self.0 as f64 - 1.0) / 4.0
    }
}

impl TryFrom<u8> for JudgeScore {
    type Error = MetricsError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<JudgeScore> for u8 {
    fn from(s: JudgeScore) -> u8 {
        s.0
    }
}

/// Scores an answer against the truth. Implementations must be deterministic to keep runs reproducible.
pub trait Judge {
    fn score(&self, answer: &str, truth: &str) -> JudgeScore;
}

/// Rubric judge: 5 on a normalized exact match, otherwise banded on Rouge-L F1
/// (≥ 0.8 → 4, ≥ 0.5 → 3, ≥ 0.2 → 2, else 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceJudge;

impl Judge for ReferenceJudge {
    fn score(&self, answer: &str, truth: &str) -> JudgeScore {
        reference_judge(answer, truth)
    }
}

pub fn reference_judge(answer: &str, truth: &str) -> JudgeScore {
    let (a, t) = (tokenize(answer), tokenize(truth));
    if !t.is_empty() && a == t {
        return JudgeScore(5);
    }
    let f = rouge_l_f1(answer, truth);
    JudgeScore(match f {
        f if f >= 0.8 => 4,
        f if f >= 0.5 => 3,
        f if f >= 0.2 => 2,
        _ => 1,
    })
}

/// One evaluated episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub episode_id: String,
    pub category: String,
    /// Judge score for question-answering episodes.
    pub judge: Option<JudgeScore>,
    /// Arrival flag for goal-reaching episodes.
    pub success: bool,
    /// Geodesic shortest-path length (meters).
    pub shortest: f64,
    /// Path actually traveled (meters).
    pub path: f64,
    pub failure: bool,
}

impl EvalRecord {
    fn efficiency(&self) -> f64 {
        self.shortest / self.path.max(self.shortest)
    }

    fn check(&self) -> Result<(), MetricsError> {
        if self.shortest > 0.0 {
            Ok(())
        } else {
            Err(MetricsError::NonPositiveShortest(self.shortest))
        }
    }
}

fn judged(records: &[EvalRecord]) -> Result<Vec<(&EvalRecord, JudgeScore)>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyRecords);
    }
    Ok(records
        .iter()
        .map(|r| (r, r.judge.unwrap_or(JudgeScore(1))))
        .collect())
}

/// Mean normalized judge score. Records without a score count as the minimum.
pub fn sr_llm(records: &[EvalRecord]) -> Result<f64, MetricsError> {
    let j = judged(records)?;
    Ok(j.iter().map(|(_, s)| s.normalized()).sum::<f64>() / j.len() as f64)
}

/// Judge score weighted by `l / max(p, l)`; failed episodes contribute 0.
pub fn spl_llm(records: &[EvalRecord]) -> Result<f64, MetricsError> {
    let j = judged(records)?;
    let mut total = 0.0;
    for (r, s) in &j {
        r.check()?;
        if !r.failure {
            total += s.normalized() * r.efficiency();
        }
    }
    Ok(total / j.len() as f64)
}

/// `(SR, SPL)` for goal-reaching episodes.
pub fn sr_spl_goal(records: &[EvalRecord]) -> Result<(f64, f64), MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyRecords);
    }
    let n = records.len() as f64;
    let mut sr = 0.0;
    let mut spl = 0.0;
    for r in records {
        r.check()?;
        if r.success {
            sr += 1.0;
            spl += r.efficiency();
        }
    }
    Ok((sr / n, spl / n))
}

/// One row of the metrics report. QA rows fill `sr_llm`/`spl_llm`, goal rows `sr`/`spl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub category: String,
    pub episodes: usize,
    pub sr: Option<f64>,
    pub spl: Option<f64>,
    pub sr_llm: Option<f64>,
    pub spl_llm: Option<f64>,
}

fn row(category: &str, qa: &[EvalRecord], goal: &[EvalRecord]) -> Result<MetricsRow, MetricsError> {
    let (sr, spl) = if goal.is_empty() {
        (None, None)
    } else {
        let (a, b) = sr_spl_goal(goal)?;
        (Some(a), Some(b))
    };
    let (sr_llm_v, spl_llm_v) = if qa.is_empty() {
        (None, None)
    } else {
        (Some(sr_llm(qa)?), Some(spl_llm(qa)?))
    };
    Ok(MetricsRow {
        category: category.to_string(),
        episodes: qa.len() + goal.len(),
        sr,
        spl,
        sr_llm: sr_llm_v,
        spl_llm: spl_llm_v,
    })
}

/// Per-category rows (sorted by name) followed by an `overall` row.
pub fn report(records: &[EvalRecord]) -> Result<Vec<MetricsRow>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyRecords);
    }
    let split = |rs: Vec<&EvalRecord>| -> (Vec<EvalRecord>, Vec<EvalRecord>) {
        rs.into_iter().cloned().partition(|r| r.judge.is_some())
    };
    let mut by_cat: BTreeMap<&str, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        by_cat.entry(&r.category).or_default().push(r);
    }
    let mut rows = Vec::new();
    for (cat, rs) in by_cat {
        let (qa, goal) = split(rs);
        rows.push(row(cat, &qa, &goal)?);
    }
    let (qa, goal) = split(records.iter().collect());
    rows.push(row("overall", &qa, &goal)?);
    Ok(rows)
}

pub fn write_report<W: Write>(out: W, rows: &[MetricsRow]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["category", "episodes", "sr", "spl", "sr_llm", "spl_llm"])?;
    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    for r in rows {
        w.write_record([
            r.category.clone(),
            r.episodes.to_string(),
            fmt(r.sr),
            fmt(r.spl),
            fmt(r.sr_llm),
            fmt(r.spl_llm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<R: std::io::Read>(input: R) -> Result<Vec<MetricsRow>, MetricsError> {
    let mut rows = Vec::new();
    let parse = |s: &str| -> Option<f64> { s.parse().ok() };
    for rec in csv::Reader::from_reader(input).records() {
        let rec = rec?;
        rows.push(MetricsRow {
            category: rec[0].to_string(),
            episodes: rec[1].parse().unwrap_or(0),
            sr: parse(&rec[2]),
            spl: parse(&rec[3]),
            sr_llm: parse(&rec[4]),
            spl_llm: parse(&rec[5]),
        });
    }
    Ok(rows)
}
