// SPDX-License-Identifier: Apache-2.0

//! Automatic download policies fed by the scores of newly discovered items.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::graph::Timestamp;

/// Default span of the score history, in seconds.
pub const DEFAULT_HISTORY_SPAN: Timestamp = 3600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Download iff the score exceeds the mean of the history window.
    MeanThreshold,
    /// Download iff the score exceeds the given percentile (0–100,
    /// nearest-rank) of the history window.
    PercentileThreshold(f64),
    /// Keep the best `capacity` items seen so far.
    BoundedBuffer(usize),
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::MeanThreshold => f.write_str("mean"),
            PolicyKind::PercentileThreshold(p) => write!(f, "percentile:{p}"),
            PolicyKind::BoundedBuffer(c) => write!(f, "buffer:{c}"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    /// `mean`, `percentile:<p>`, or `buffer:<capacity>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (name, arg) {
            ("mean", None) => Ok(PolicyKind::MeanThreshold),
            ("percentile", Some(a)) => {
                let p: f64 = a.parse().map_err(|_| format!("invalid percentile `{a}`"))?;
                if !(0.0..=100.0).contains(&p) {
                    return Err(format!("percentile {p} outside [0, 100]"));
                }
                Ok(PolicyKind::PercentileThreshold(p))
            }
            ("buffer", Some(a)) => {
                let c: usize = a.parse().map_err(|_| format!("invalid buffer capacity `{a}`"))?;
                if c == 0 {
                    return Err("buffer capacity must be positive".into());
                }
                Ok(PolicyKind::BoundedBuffer(c))
            }
            _ => Err(format!("unknown download policy `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub history_span: Timestamp,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self { kind, history_span: DEFAULT_HISTORY_SPAN }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Download,
    Skip,
}

#[derive(Debug, Clone)]
pub struct DownloadPolicyState {
    spec: PolicySpec,
    history: VecDeque<(Timestamp, f64)>,
    buffer: Vec<(Arc<str>, f64)>,
}

impl DownloadPolicyState {
    pub fn new(spec: PolicySpec) -> Self {
        Self { spec, history: VecDeque::new(), buffer: Vec::new() }
    }

    pub fn spec(&self) -> PolicySpec {
        self.spec
    }

    /// Scores currently inside the history window, oldest first.
    pub fn history(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().map(|&(_, s)| s)
    }

    /// Buffered items, in admission order (replacements take the evicted
    /// slot).
    pub fn buffer(&self) -> &[(Arc<str>, f64)] {
        &self.buffer
    }

    fn expire(&mut self, now: Timestamp) {
        let cutoff = now - self.spec.history_span;
        while self.history.front().is_some_and(|&(t, _)| t < cutoff) {
            self.history.pop_front();
        }
    }

    /// Decides on one observed item and records its score.
    pub fn observe(&mut self, item: &str, score: f64, now: Timestamp) -> Decision {
        debug_assert!(score >= 0.0);
        self.expire(now);
        let decision = match self.spec.kind {
            PolicyKind::MeanThreshold => {
                if self.history.is_empty() {
                    Decision::Download
                } else {
                    let mean = self.history().sum::<f64>() / self.history.len() as f64;
                    threshold(score, mean)
                }
            }
            PolicyKind::PercentileThreshold(p) => {
                if self.history.is_empty() {
                    Decision::Download
                } else {
                    let mut sorted: Vec<f64> = self.history().collect();
                    sorted.sort_by(f64::total_cmp);
                    threshold(score, nearest_rank(&sorted, p))
                }
            }
            PolicyKind::BoundedBuffer(capacity) => self.admit(item, score, capacity),
        };
        self.history.push_back((now, score));
        decision
    }

    fn admit(&mut self, item: &str, score: f64, capacity: usize) -> Decision {
        if self.buffer.len() < capacity {
            self.buffer.push((Arc::from(item), score));
            return Decision::Download;
        }
        let (slot, &(_, min)) = self
            .buffer
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then_with(|| a.1 .0.cmp(&b.1 .0)))
            .expect("capacity is positive");
        if score > min {
            self.buffer[slot] = (Arc::from(item), score);
            Decision::Download
        } else {
            Decision::Skip
        }
    }
}

fn threshold(score: f64, bar: f64) -> Decision {
    if score > bar {
        Decision::Download
    } else {
        Decision::Skip
    }
}

/// Nearest-rank percentile of an ascending, non-empty slice.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
