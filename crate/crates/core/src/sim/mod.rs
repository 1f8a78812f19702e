// SPDX-License-Identifier: Apache-2.0

//! Discrete-time replay of contact and content traces.
//!
//! Every agent keeps a local knowledge graph (LKG). Creating content adds it
//! to the creator's LKG and to the global knowledge graph (GKG); a contact
//! makes both agents exchange their LKGs and score what they discovered.
//! Each step covers the half-open interval `[k * step, (k + 1) * step)`:
//! contents of the step are applied first, then its contacts in input
//! order, then metrics are sampled.

mod metrics;
pub mod policy;
pub mod synth;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::eval::SpearmanMode;
use crate::graph::{FolksonomyGraph, GraphError, ItemId, Timestamp, UserId, Vocabulary};
use crate::recommend::{pliers_tripartite, DEFAULT_LAMBDA};
use crate::trace::{ContactEvent, ContentEvent};

pub use metrics::{
    compute_step_metrics, correlation_for_run, write_correlation_csv, write_metrics_csv, StepMetrics,
    CORRELATION_HEADER, METRICS_HEADER,
};
pub use policy::{Decision, DownloadPolicyState, PolicyKind, PolicySpec};

pub const DEFAULT_STEP_LENGTH: Timestamp = 60;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{kind} event {index}: {reason}")]
    InvalidEvent { kind: &'static str, index: usize, reason: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub step_length: Timestamp,
    pub lambda: f64,
    pub expiry_window: Option<Timestamp>,
    pub metric_cadence: usize,
    pub top_n: Option<usize>,
    pub spearman_mode: SpearmanMode,
    pub rng_seed: u64,
    pub download_policy: Option<PolicySpec>,
    /// Minimum simulated span; the run also covers every event.
    pub duration: Option<Timestamp>,
    /// Compute the recommendation-similarity columns (two PLIERS runs per
    /// agent per sampled step). When off they are reported as 1.
    pub recommendation_metrics: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step_length: DEFAULT_STEP_LENGTH,
            lambda: DEFAULT_LAMBDA,
            expiry_window: None,
            metric_cadence: 1,
            top_n: None,
            spearman_mode: SpearmanMode::Corrected,
            rng_seed: 0,
            download_policy: None,
            duration: None,
            recommendation_metrics: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::Config(m));
        if self.step_length <= 0 {
            return err(format!("step_length must be positive, got {}", self.step_length));
        }
        if self.metric_cadence == 0 {
            return err("metric_cadence must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return err(format!("lambda must be in [0, 1], got {}", self.lambda));
        }
        if let Some(w) = self.expiry_window {
            if w <= 0 {
                return err(format!("expiry_window must be positive, got {w}"));
            }
        }
        if let Some(d) = self.duration {
            if d < 0 {
                return err(format!("duration must be non-negative, got {d}"));
            }
        }
        if let Some(p) = &self.download_policy {
            if p.history_span <= 0 {
                return err("download history span must be positive".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub id: Arc<str>,
    pub user: UserId,
    pub lkg: FolksonomyGraph,
    pub policy: Option<DownloadPolicyState>,
    /// Items learned through encounters.
    pub discovered: usize,
    /// Discovered items the download policy accepted.
    pub downloads: usize,
}

/// What one side of an encounter learned.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Discovery {
    /// Newly discovered items with their tripartite PLIERS score.
    pub scored: Vec<(ItemId, f64)>,
    pub decisions: Vec<Decision>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncounterOutcome {
    pub a: Discovery,
    pub b: Discovery,
}

#[derive(Debug)]
pub struct Simulator {
    config: SimConfig,
    vocab: Arc<Vocabulary>,
    agents: Vec<Agent>,
    index: HashMap<Arc<str>, usize>,
    gkg: FolksonomyGraph,
}

impl Simulator {
    /// Registers the given agents (deduplicated, sorted by id).
    pub fn new<S: AsRef<str>>(config: SimConfig, agent_ids: &[S]) -> Result<Self, SimError> {
        config.validate()?;
        let vocab = Vocabulary::new();
        let ids: BTreeSet<&str> = agent_ids.iter().map(AsRef::as_ref).collect();
        let mut agents = Vec::with_capacity(ids.len());
        let mut index = HashMap::with_capacity(ids.len());
        for id in ids {
            let id: Arc<str> = Arc::from(id);
            index.insert(id.clone(), agents.len());
            agents.push(Agent {
                user: vocab.intern_user(&id),
                id,
                lkg: FolksonomyGraph::with_vocabulary(vocab.clone()),
                policy: config.download_policy.map(DownloadPolicyState::new),
                discovered: 0,
                downloads: 0,
            });
        }
        let gkg = FolksonomyGraph::with_vocabulary(vocab.clone());
        Ok(Self { config, vocab, agents, index, gkg })
    }

    /// Registers every agent named in either trace.
    pub fn from_traces(
        config: SimConfig,
        contacts: &[ContactEvent],
        contents: &[ContentEvent],
    ) -> Result<Self, SimError> {
        let mut ids: Vec<&str> = contacts.iter().flat_map(|c| [c.a.as_str(), c.b.as_str()]).collect();
        ids.extend(contents.iter().map(|c| c.creator.as_str()));
        Self::new(config, &ids)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: &str) -> Option<&Agent> {
        self.index.get(id).map(|&i| &self.agents[i])
    }

    pub fn gkg(&self) -> &FolksonomyGraph {
        &self.gkg
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    fn agent_index(&self, id: &str) -> Result<usize, SimError> {
        self.index.get(id).copied().ok_or_else(|| SimError::UnknownAgent(id.to_owned()))
    }

    /// Adds a created content to its creator's LKG and to the GKG.
    pub fn create_content(&mut self, event: &ContentEvent) -> Result<(), SimError> {
        let idx = self.agent_index(&event.creator)?;
        self.agents[idx]
            .lkg
            .add_content(&event.creator, &event.item, &event.tags, event.time)?;
        self.gkg.add_content(&event.creator, &event.item, &event.tags, event.time)?;
        Ok(())
    }

    /// Symmetric knowledge exchange between two agents, followed by scoring
    /// of the items each side discovered.
    pub fn encounter(&mut self, a: &str, b: &str, now: Timestamp) -> Result<EncounterOutcome, SimError> {
        let (ia, ib) = (self.agent_index(a)?, self.agent_index(b)?);
        Ok(self.encounter_at(ia, ib, now))
    }

    fn encounter_at(&mut self, ia: usize, ib: usize, now: Timestamp) -> EncounterOutcome {
        if ia == ib {
            return EncounterOutcome::default();
        }
        let (x, y) = pair_mut(&mut self.agents, ia, ib);
        let new_x: Vec<ItemId> = y.lkg.items().filter(|&i| !x.lkg.contains_item(i)).collect();
        let new_y: Vec<ItemId> = x.lkg.items().filter(|&i| !y.lkg.contains_item(i)).collect();
        if new_x.is_empty() && new_y.is_empty() && x.lkg.edge_count() == y.lkg.edge_count() && x.lkg == y.lkg {
            return EncounterOutcome::default();
        }
        // Union is symmetric, so merging y into x and then x into y leaves
        // both holding the union of the two pre-contact snapshots.
        x.lkg.merge(&y.lkg);
        y.lkg.merge(&x.lkg);
        let lambda = self.config.lambda;
        EncounterOutcome {
            a: discover(x, &new_x, lambda, now),
            b: discover(y, &new_y, lambda, now),
        }
    }

    /// Metrics for the current state, with `now` the end of the step.
    pub fn metrics(&self, step: usize, now: Timestamp) -> StepMetrics {
        compute_step_metrics(&self.agents, &self.gkg, &self.config, step, now)
    }

    /// Replays both traces and returns one row per sampled step.
    pub fn run(
        &mut self,
        contacts: &[ContactEvent],
        contents: &[ContentEvent],
    ) -> Result<Vec<StepMetrics>, SimError> {
        validate_events(contacts, contents)?;
        let step = self.config.step_length;
        let step_of = |t: Timestamp| (t / step) as usize;
        let last_event = contacts
            .iter()
            .map(|c| c.time)
            .chain(contents.iter().map(|c| c.time))
            .max();
        let mut n_steps = last_event.map_or(0, |t| step_of(t) + 1);
        if let Some(d) = self.config.duration {
            n_steps = n_steps.max(((d + step - 1) / step) as usize);
        }

        let mut content_by_step: Vec<Vec<&ContentEvent>> = vec![Vec::new(); n_steps];
        for c in contents {
            content_by_step[step_of(c.time)].push(c);
        }
        for bucket in &mut content_by_step {
            bucket.sort_by_key(|c| c.time);
        }
        let mut contact_by_step: Vec<Vec<(usize, usize, Timestamp)>> = vec![Vec::new(); n_steps];
        for c in contacts {
            let pair = (self.agent_index(&c.a)?, self.agent_index(&c.b)?, c.time);
            contact_by_step[step_of(c.time)].push(pair);
        }

        let mut rows = Vec::new();
        let (mut pending_contacts, mut pending_contents) = (0, 0);
        for k in 0..n_steps {
            for c in &content_by_step[k] {
                self.create_content(c)?;
            }
            for &(a, b, t) in &contact_by_step[k] {
                self.encounter_at(a, b, t);
            }
            pending_contents += content_by_step[k].len();
            pending_contacts += contact_by_step[k].len();
            if k % self.config.metric_cadence == 0 || k + 1 == n_steps {
                let now = (k as Timestamp + 1) * step;
                let mut m = self.metrics(k, now);
                m.sim_time = k as Timestamp * step;
                m.n_contacts = pending_contacts;
                m.n_contents = pending_contents;
                rows.push(m);
                pending_contacts = 0;
                pending_contents = 0;
            }
        }
        Ok(rows)
    }
}

/// Builds a simulator from the traces and replays them.
pub fn run(
    config: SimConfig,
    contacts: &[ContactEvent],
    contents: &[ContentEvent],
) -> Result<Vec<StepMetrics>, SimError> {
    Simulator::from_traces(config, contacts, contents)?.run(contacts, contents)
}

fn validate_events(contacts: &[ContactEvent], contents: &[ContentEvent]) -> Result<(), SimError> {
    for (index, c) in contacts.iter().enumerate() {
        let reason = if c.a == c.b {
            Some(format!("self-contact of `{}`", c.a))
        } else if c.time < 0 {
            Some(format!("negative time {}", c.time))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(SimError::InvalidEvent { kind: "contact", index, reason });
        }
    }
    let mut seen = std::collections::HashSet::new();
    for (index, c) in contents.iter().enumerate() {
        let reason = if c.tags.is_empty() {
            Some(format!("item `{}` has no tags", c.item))
        } else if c.time < 0 {
            Some(format!("negative time {}", c.time))
        } else if !seen.insert(c.item.as_str()) {
            Some(format!("duplicate item `{}`", c.item))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(SimError::InvalidEvent { kind: "content", index, reason });
        }
    }
    Ok(())
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

fn discover(agent: &mut Agent, new_items: &[ItemId], lambda: f64, now: Timestamp) -> Discovery {
    if new_items.is_empty() {
        return Discovery::default();
    }
    agent.discovered += new_items.len();
    let scores = pliers_tripartite(&agent.lkg, agent.user, lambda);
    let scored: Vec<(ItemId, f64)> = new_items
        .iter()
        .map(|&i| (i, scores.get(i).unwrap_or(0.0)))
        .collect();
    let mut decisions = Vec::new();
    if let Some(policy) = agent.policy.as_mut() {
        for &(item, score) in &scored {
            let d = policy.observe(&agent.lkg.item_key(item), score, now);
            if d == Decision::Download {
                agent.downloads += 1;
            }
            decisions.push(d);
        }
    }
    Discovery { scored, decisions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(g: &FolksonomyGraph) -> Vec<String> {
        g.items().map(|i| g.item_key(i).to_string()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    #[test]
    fn identical_lkgs_exchange_nothing() {
        let mut sim = Simulator::new(SimConfig::default(), &["a", "b"]).unwrap();
        let out = sim.encounter("a", "b", 0).unwrap();
        assert_eq!(out, EncounterOutcome::default());
    }

    #[test]
    fn encounter_unions_both_sides() {
        let mut sim = Simulator::new(SimConfig::default(), &["a", "b"]).unwrap();
        sim.create_content(&ContentEvent::new(0, "a", "i1", ["x"])).unwrap();
        sim.create_content(&ContentEvent::new(0, "b", "i2", ["x"])).unwrap();
        let out = sim.encounter("a", "b", 10).unwrap();
        let name = |i: ItemId| sim.vocabulary().item_key(i).to_string();
        assert_eq!(out.a.scored.iter().map(|s| name(s.0)).collect::<Vec<_>>(), ["i2"]);
        assert_eq!(out.b.scored.iter().map(|s| name(s.0)).collect::<Vec<_>>(), ["i1"]);
        // a owns i1 tagged x, i2 shares x: similarity 1/(2*1) * 1/1, affinity 0
        assert!((out.a.scored[0].1 - 0.25).abs() < 1e-12);
        assert_eq!(keys(&sim.agent("a").unwrap().lkg), ["i1", "i2"]);
        assert_eq!(sim.agent("a").unwrap().lkg, sim.agent("b").unwrap().lkg);
        assert_eq!(sim.agent("a").unwrap().lkg, *sim.gkg());
    }

    #[test]
    fn encounter_is_commutative() {
        let build = || {
            let mut sim = Simulator::new(SimConfig::default(), &["a", "b"]).unwrap();
            sim.create_content(&ContentEvent::new(5, "a", "i1", ["x", "y"])).unwrap();
            sim.create_content(&ContentEvent::new(9, "b", "i2", ["y"])).unwrap();
            sim
        };
        let mut ab = build();
        let mut ba = build();
        let o1 = ab.encounter("a", "b", 60).unwrap();
        let o2 = ba.encounter("b", "a", 60).unwrap();
        assert_eq!(o1.a, o2.b);
        assert_eq!(o1.b, o2.a);
        for id in ["a", "b"] {
            assert_eq!(ab.agent(id).unwrap().lkg, ba.agent(id).unwrap().lkg);
        }
    }

    #[test]
    fn chain_contacts_forward_within_a_step() {
        let contacts = vec![ContactEvent::new(0, "a", "b"), ContactEvent::new(30, "b", "c")];
        let contents = vec![ContentEvent::new(0, "a", "i1", ["t"])];
        let mut sim = Simulator::from_traces(SimConfig::default(), &contacts, &contents).unwrap();
        let rows = sim.run(&contacts, &contents).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(keys(&sim.agent("c").unwrap().lkg), ["i1"]);
        assert_eq!(rows[0].avg_graph_jaccard, 1.0);
    }

    #[test]
    fn download_policy_sees_discoveries() {
        let config = SimConfig {
            download_policy: Some(PolicySpec::new(PolicyKind::BoundedBuffer(1))),
            ..SimConfig::default()
        };
        let mut sim = Simulator::new(config, &["a", "b"]).unwrap();
        sim.create_content(&ContentEvent::new(0, "a", "mine", ["x"])).unwrap();
        sim.create_content(&ContentEvent::new(0, "b", "i1", ["x"])).unwrap();
        sim.create_content(&ContentEvent::new(0, "b", "i2", ["y"])).unwrap();
        let out = sim.encounter("a", "b", 0).unwrap();
        assert_eq!(out.a.decisions.len(), 2);
        let a = sim.agent("a").unwrap();
        assert_eq!(a.discovered, 2);
        assert_eq!(a.policy.as_ref().unwrap().buffer().len(), 1);
        assert_eq!(&*a.policy.as_ref().unwrap().buffer()[0].0, "i1");
    }

    #[test]
    fn unknown_agent_and_bad_events() {
        let mut sim = Simulator::new(SimConfig::default(), &["a", "b"]).unwrap();
        assert_eq!(sim.encounter("a", "z", 0), Err(SimError::UnknownAgent("z".into())));
        let contacts = vec![ContactEvent::new(0, "a", "a")];
        assert!(matches!(
            sim.run(&contacts, &[]),
            Err(SimError::InvalidEvent { kind: "contact", index: 0, .. })
        ));
        let contents = vec![ContentEvent::new(0, "a", "i", ["t"]), ContentEvent::new(1, "b", "i", ["t"])];
        assert!(matches!(
            sim.run(&[], &contents),
            Err(SimError::InvalidEvent { kind: "content", index: 1, .. })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = [
            SimConfig { step_length: 0, ..SimConfig::default() },
            SimConfig { metric_cadence: 0, ..SimConfig::default() },
            SimConfig { lambda: 1.5, ..SimConfig::default() },
            SimConfig { expiry_window: Some(0), ..SimConfig::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(SimError::Config(_))), "{c:?}");
        }
        assert!(SimConfig::default().validate().is_ok());
    }

    #[test]
    fn cadence_accumulates_counts() {
        let contacts: Vec<_> = (0..5).map(|k| ContactEvent::new(k * 60, "a", "b")).collect();
        let contents = vec![ContentEvent::new(0, "a", "i", ["t"])];
        let config = SimConfig { metric_cadence: 2, ..SimConfig::default() };
        let rows = run(config, &contacts, &contents).unwrap();
        let steps: Vec<_> = rows.iter().map(|r| r.step).collect();
        assert_eq!(steps, [0, 2, 4]);
        let counts: Vec<_> = rows.iter().map(|r| r.n_contacts).collect();
        assert_eq!(counts, [1, 2, 2]);
    }
}
