use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// One model output: a label and optional per-class scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub scores: Vec<f64>,
}

impl Prediction {
    pub fn new(label: impl Into<String>, scores: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            scores,
        }
    }

    /// Highest score, or 0 when no scores were given.
    pub fn confidence(&self) -> f64 {
        self.scores
            .iter()
            .copied()
            .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))))
            .unwrap_or(0.0)
    }
}

fn class_order(labels: &[&str]) -> impl Fn(&str, &str) -> Ordering {
    let numeric = labels.iter().all(|l| l.trim().parse::<i64>().is_ok());
    move |a: &str, b: &str| {
        if numeric {
            let (x, y) = (
                a.trim().parse::<i64>().unwrap(),
                b.trim().parse::<i64>().unwrap(),
            );
            x.cmp(&y).then_with(|| a.cmp(b))
        } else {
            a.cmp(b)
        }
    }
}

/// Majority vote over test-time variants.
///
/// Ties go to the label whose voters have the highest summed confidence,
/// then to the lowest class (numeric order when every label is an integer).
pub fn tta_vote(predictions: &[Prediction]) -> Result<String> {
    if predictions.is_empty() {
        return Err(Error::arg("no predictions to vote on"));
    }
    let n = predictions[0].scores.len();
    if predictions.iter().any(|p| p.scores.len() != n) {
        return Err(Error::arg("score vectors differ in length"));
    }
    let mut tally: HashMap<&str, (usize, f64)> = HashMap::new();
    for p in predictions {
        let t = tally.entry(p.label.as_str()).or_default();
        t.0 += 1;
        t.1 += p.confidence();
    }
    let labels: Vec<&str> = tally.keys().copied().collect();
    let order = class_order(&labels);
    let best = tally
        .iter()
        .max_by(|(la, (ca, sa)), (lb, (cb, sb))| {
            ca.cmp(cb)
                .then_with(|| sa.total_cmp(sb))
                .then_with(|| order(lb, la))
        })
        .map(|(l, _)| l.to_string())
        .expect("non-empty tally");
    Ok(best)
}

/// Parses `sample_id,label,score0,score1,...` lines.
///
/// A line with a single field is a bare label for an unnamed sample.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_predictions(text: &str) -> Result<Vec<(String, Prediction)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (id, label, scores) = match fields.as_slice() {
            [label] => ("", *label, &[][..]),
            [id, label, scores @ ..] => (*id, *label, scores),
            [] => unreachable!(),
        };
        if label.is_empty() {
            return Err(Error::Format(format!("line {}: empty label", no + 1)));
        }
        let scores = scores
            .iter()
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Format(format!("line {}: bad score {s:?}", no + 1))),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((id.to_string(), Prediction::new(label, scores)));
    }
    Ok(out)
}

/// Votes per sample id, in order of first appearance.
pub fn vote_by_sample(rows: &[(String, Prediction)]) -> Result<Vec<(String, String)>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<Prediction>> = HashMap::new();
    for (id, p) in rows {
        groups
            .entry(id.as_str())
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push(p.clone());
    }
    if order.is_empty() {
        return Err(Error::arg("no predictions to vote on"));
    }
    order
        .into_iter()
        .map(|id| Ok((id.to_string(), tta_vote(&groups[id])?)))
        .collect()
}
