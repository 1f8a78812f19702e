// SPDX-License-Identifier: Apache-2.0

//! Per-step knowledge and recommendation similarity, and their CSV forms.

use std::borrow::Cow;
use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use super::{Agent, SimConfig};
use crate::eval::{correlation_analysis, deltas, jaccard, spearman_similarity, CorrelationReport, EvalError, SpearmanMode};
use crate::format::format_float;
use crate::graph::{FolksonomyGraph, ItemId, Timestamp};
use crate::recommend::{pliers_tripartite, rank};

pub const METRICS_HEADER: &str = "step,sim_time_s,avg_graph_jaccard,avg_rec_jaccard,avg_rec_spearman_corrected,avg_rec_spearman_literal,n_contacts,n_contents";
pub const CORRELATION_HEADER: &str = "n,r_squared,r_yx1,r_yx2,beta1,beta2,flags";

#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub step: usize,
    /// Start of the step, in seconds.
    pub sim_time: Timestamp,
    /// Mean over all agents of the LKG↔GKG Jaccard index.
    pub avg_graph_jaccard: f64,
    /// Mean Jaccard of local vs global recommendation item sets, over agents
    /// with at least one non-empty vector (1 when there are none).
    pub avg_rec_jaccard: f64,
    pub avg_rec_spearman_corrected: f64,
    pub avg_rec_spearman_literal: f64,
    /// Contacts replayed since the previous sampled step.
    pub n_contacts: usize,
    /// Contents created since the previous sampled step.
    pub n_contents: usize,
    /// Agents contributing to the recommendation averages.
    pub rec_agents: usize,
}

impl StepMetrics {
    pub fn avg_rec_spearman(&self, mode: SpearmanMode) -> f64 {
        match mode {
            SpearmanMode::Corrected => self.avg_rec_spearman_corrected,
            SpearmanMode::Literal => self.avg_rec_spearman_literal,
        }
    }
}

struct AgentSample {
    graph_jaccard: f64,
    rec: Option<(f64, f64, f64)>,
}

fn view(graph: &FolksonomyGraph, window: Option<Timestamp>, now: Timestamp) -> Cow<'_, FolksonomyGraph> {
    match window {
        Some(w) => Cow::Owned(graph.prune_older_than(now, w).expect("window validated")),
        None => Cow::Borrowed(graph),
    }
}

/// Samples every agent against the global graph. With an expiry window both
/// sides are first restricted to items created in `[now - window, now)`.
pub fn compute_step_metrics(
    agents: &[Agent],
    gkg: &FolksonomyGraph,
    config: &SimConfig,
    step: usize,
    now: Timestamp,
) -> StepMetrics {
    let global = view(gkg, config.expiry_window, now);
    let global_flat = global.flatten();
    let samples: Vec<AgentSample> = agents
        .par_iter()
        .map(|agent| {
            let local = view(&agent.lkg, config.expiry_window, now);
            let graph_jaccard = jaccard(&local.flatten(), &global_flat);
            let rec = config
                .recommendation_metrics
                .then(|| rec_similarity(&local, &global, agent, config))
                .flatten();
            AgentSample { graph_jaccard, rec }
        })
        .collect();

    let n = samples.len();
    let avg_graph_jaccard = if n == 0 {
        1.0
    } else {
        samples.iter().map(|s| s.graph_jaccard).sum::<f64>() / n as f64
    };
    let recs: Vec<(f64, f64, f64)> = samples.iter().filter_map(|s| s.rec).collect();
    let mean = |f: fn(&(f64, f64, f64)) -> f64| {
        if recs.is_empty() {
            1.0
        } else {
            recs.iter().map(f).sum::<f64>() / recs.len() as f64
        }
    };
    StepMetrics {
        step,
        sim_time: 0,
        avg_graph_jaccard,
        avg_rec_jaccard: mean(|r| r.0),
        avg_rec_spearman_corrected: mean(|r| r.1),
        avg_rec_spearman_literal: mean(|r| r.2),
        n_contacts: 0,
        n_contents: 0,
        rec_agents: recs.len(),
    }
}

/// `(jaccard, corrected footrule, literal footrule)` of the agent's local and
/// global recommendation lists, or `None` when both are empty.
fn rec_similarity(
    local: &FolksonomyGraph,
    global: &FolksonomyGraph,
    agent: &Agent,
    config: &SimConfig,
) -> Option<(f64, f64, f64)> {
    let list = |g: &FolksonomyGraph| -> Vec<ItemId> {
        if g.user_degree(agent.user) == 0 {
            return Vec::new();
        }
        rank(&pliers_tripartite(g, agent.user, config.lambda), g, config.top_n).items()
    };
    let (l, g) = (list(local), list(global));
    if l.is_empty() && g.is_empty() {
        return None;
    }
    let (ls, gs): (HashSet<ItemId>, HashSet<ItemId>) = (l.iter().copied().collect(), g.iter().copied().collect());
    Some((
        jaccard(&ls, &gs),
        spearman_similarity(&l, &g, SpearmanMode::Corrected),
        spearman_similarity(&l, &g, SpearmanMode::Literal),
    ))
}

pub fn write_metrics_csv<W: Write>(mut out: W, rows: &[StepMetrics]) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.step,
            r.sim_time,
            format_float(r.avg_graph_jaccard),
            format_float(r.avg_rec_jaccard),
            format_float(r.avg_rec_spearman_corrected),
            format_float(r.avg_rec_spearman_literal),
            r.n_contacts,
            r.n_contents
        )?;
    }
    Ok(())
}

/// Correlates the step-to-step change of the graph similarity with the
/// content and contact counts of the same step.
pub fn correlation_for_run(rows: &[StepMetrics]) -> Result<CorrelationReport, EvalError> {
    let sims: Vec<f64> = rows.iter().map(|r| r.avg_graph_jaccard).collect();
    let y = deltas(&sims);
    let x1: Vec<f64> = rows.iter().skip(1).map(|r| r.n_contents as f64).collect();
    let x2: Vec<f64> = rows.iter().skip(1).map(|r| r.n_contacts as f64).collect();
    correlation_analysis(&y, &x1, &x2)
}

/// One data row, or a row of empty fields flagged `insufficient_data` when
/// the run is too short.
pub fn write_correlation_csv<W: Write>(
    mut out: W,
    report: &Result<CorrelationReport, EvalError>,
) -> std::io::Result<()> {
    writeln!(out, "{CORRELATION_HEADER}")?;
    match report {
        Ok(r) => writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            format_float(r.r_squared),
            format_float(r.r_yx1),
            format_float(r.r_yx2),
            format_float(r.beta1),
            format_float(r.beta2),
            r.flags.labels().join(";")
        ),
        Err(EvalError::TooShort(n)) => writeln!(out, "{n},,,,,,insufficient_data"),
        Err(e) => writeln!(out, "0,,,,,,{}", e.to_string().replace(',', ";")),
    }
}
