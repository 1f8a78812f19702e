// SPDX-License-Identifier: Apache-2.0

//! Diffusion recommenders on folksonomy graphs and their baselines.
//!
//! Every scorer is a pure function of the graph and the target user and
//! returns a [`ScoreVector`] with one entry per item of the graph, owned
//! items included. [`rank`] turns a score vector into a recommendation list.
//!
//! A target that owns no items (or is absent from the graph) is a cold
//! start: every scorer returns an all-zero vector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::graph::{FolksonomyGraph, ItemId, TagId, UserId};

/// Default weight of the affinity index in the tripartite score.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Raw per-item scores for one target user.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub target: UserId,
    scores: BTreeMap<ItemId, f64>,
}

impl ScoreVector {
    fn from_dense(graph: &FolksonomyGraph, target: UserId, dense: &[f64]) -> Self {
        let scores = graph
            .items()
            .map(|i| (i, dense.get(i.index()).copied().unwrap_or(0.0)))
            .collect();
        Self { target, scores }
    }

    fn zeros(graph: &FolksonomyGraph, target: UserId) -> Self {
        Self {
            target,
            scores: graph.items().map(|i| (i, 0.0)).collect(),
        }
    }

    pub fn get(&self, item: ItemId) -> Option<f64> {
        self.scores.get(&item).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, f64)> + '_ {
        self.scores.iter().map(|(&i, &s)| (i, s))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.scores.values().sum()
    }

    /// Elementwise `a * self + b * other`; both vectors must cover the same
    /// items.
    fn combine(&self, a: f64, other: &ScoreVector, b: f64) -> ScoreVector {
        let scores = self
            .scores
            .iter()
            .map(|(&i, &x)| (i, a * x + b * other.scores.get(&i).copied().unwrap_or(0.0)))
            .collect();
        ScoreVector { target: self.target, scores }
    }
}

/// One ranked entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub item: ItemId,
    pub key: Arc<str>,
    pub score: f64,
}

/// Unowned, nonzero-score items in `(score desc, key asc)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationVector {
    pub target: UserId,
    pub ranked: Vec<Recommendation>,
}

impl RecommendationVector {
    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Arc<str>> + '_ {
        self.ranked.iter().map(|r| &r.key)
    }

    pub fn items(&self) -> Vec<ItemId> {
        self.ranked.iter().map(|r| r.item).collect()
    }
}

/// Removes target-owned and zero-score items, sorts by score then key, and
/// truncates to `top_n` when given. Adjacent scores within
/// [`SCORE_TIE_TOLERANCE`] (relative) are tied.
pub fn rank(scores: &ScoreVector, graph: &FolksonomyGraph, top_n: Option<usize>) -> RecommendationVector {
    let mut ranked: Vec<Recommendation> = scores
        .iter()
        .filter(|&(i, s)| s > 0.0 && !graph.has_user_item(scores.target, i))
        .map(|(item, score)| Recommendation { item, key: graph.item_key(item), score })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key)));
    // scores that differ only by rounding are ties, ordered by key
    let mut start = 0;
    for end in 1..=ranked.len() {
        if end == ranked.len() || !same_score(ranked[end - 1].score, ranked[end].score) {
            if end - start > 1 {
                ranked[start..end].sort_by(|a, b| a.key.cmp(&b.key));
            }
            start = end;
        }
    }
    if let Some(n) = top_n {
        ranked.truncate(n);
    }
    RecommendationVector { target: scores.target, ranked }
}

/// Relative tolerance under which two scores count as equal when ranking.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-12;

fn same_score(a: f64, b: f64) -> bool {
    (a - b).abs() <= SCORE_TIE_TOLERANCE * a.abs().max(b.abs())
}

/// One side of the tripartite graph seen as an item bipartite projection:
/// items connect through "middle" nodes (users or tags).
trait Projection {
    fn mids(&self, item: ItemId) -> impl Iterator<Item = u32> + '_;
    fn items(&self, mid: u32) -> impl Iterator<Item = ItemId> + '_;
    fn mid_degree(&self, mid: u32) -> usize;
    fn item_degree(&self, item: ItemId) -> usize;
}

struct ViaUsers<'a>(&'a FolksonomyGraph);
struct ViaTags<'a>(&'a FolksonomyGraph);

impl Projection for ViaUsers<'_> {
    fn mids(&self, item: ItemId) -> impl Iterator<Item = u32> + '_ {
        self.0.users_of_item(item).map(|u| u.0)
    }
    fn items(&self, mid: u32) -> impl Iterator<Item = ItemId> + '_ {
        self.0.items_of_user(UserId(mid))
    }
    fn mid_degree(&self, mid: u32) -> usize {
        self.0.user_degree(UserId(mid))
    }
    fn item_degree(&self, item: ItemId) -> usize {
        self.0.item_popularity(item)
    }
}

impl Projection for ViaTags<'_> {
    fn mids(&self, item: ItemId) -> impl Iterator<Item = u32> + '_ {
        self.0.tags_of_item(item).map(|t| t.0)
    }
    fn items(&self, mid: u32) -> impl Iterator<Item = ItemId> + '_ {
        self.0.items_of_tag(TagId(mid))
    }
    fn mid_degree(&self, mid: u32) -> usize {
        self.0.tag_degree(TagId(mid))
    }
    fn item_degree(&self, item: ItemId) -> usize {
        self.0.item_tag_degree(item)
    }
}

fn inv(degree: usize) -> f64 {
    assert!(degree > 0, "zero degree on a traversed node");
    1.0 / degree as f64
}

fn target_items(graph: &FolksonomyGraph, target: UserId) -> Vec<ItemId> {
    graph.items_of_user(target).collect()
}

/// Overlap-weighted two-step diffusion: for every source item `s` and every
/// candidate `j` reachable through a shared middle node `m`,
/// `f_j += [sum_m 1/(k(m) k(s))] * |M_s ∩ M_j| / k(j)`.
fn overlap_diffusion<P: Projection>(proj: &P, sources: &[ItemId], item_capacity: usize) -> Vec<f64> {
    let mut out = vec![0.0; item_capacity];
    let mut weight = vec![0.0; item_capacity];
    let mut overlap = vec![0u32; item_capacity];
    let mut touched = Vec::new();
    for &s in sources {
        let k_s = proj.item_degree(s);
        if k_s == 0 {
            continue;
        }
        let inv_s = inv(k_s);
        for m in proj.mids(s) {
            let w = inv(proj.mid_degree(m));
            for j in proj.items(m) {
                let idx = j.index();
                if overlap[idx] == 0 {
                    touched.push(idx);
                }
                weight[idx] += w;
                overlap[idx] += 1;
            }
        }
        for &idx in &touched {
            let k_j = proj.item_degree(ItemId(idx as u32));
            out[idx] += weight[idx] * inv_s * f64::from(overlap[idx]) * inv(k_j);
            weight[idx] = 0.0;
            overlap[idx] = 0;
        }
        touched.clear();
    }
    out
}

/// Mass diffusion: each target item splits a unit resource equally among
/// its users, each user splits what it received equally among its items.
pub fn probs_scores(graph: &FolksonomyGraph, target: UserId) -> ScoreVector {
    let sources = target_items(graph, target);
    if sources.is_empty() {
        return ScoreVector::zeros(graph, target);
    }
    let mut acc = vec![0.0; graph.vocabulary().item_capacity()];
    for &s in &sources {
        let share = inv(graph.item_popularity(s));
        for l in graph.users_of_item(s) {
            let per = share * inv(graph.user_degree(l));
            for j in graph.items_of_user(l) {
                acc[j.index()] += per;
            }
        }
    }
    ScoreVector::from_dense(graph, target, &acc)
}

/// Heat spreading: every transfer is divided by the degree of the node
/// receiving it.
pub fn heats_scores(graph: &FolksonomyGraph, target: UserId) -> ScoreVector {
    let sources = target_items(graph, target);
    if sources.is_empty() {
        return ScoreVector::zeros(graph, target);
    }
    let mut heat: BTreeMap<UserId, f64> = BTreeMap::new();
    for &s in &sources {
        for l in graph.users_of_item(s) {
            *heat.entry(l).or_default() += inv(graph.user_degree(l));
        }
    }
    let mut acc = vec![0.0; graph.vocabulary().item_capacity()];
    for (&l, &h) in &heat {
        for j in graph.items_of_user(l) {
            acc[j.index()] += h;
        }
    }
    for j in graph.items() {
        let slot = &mut acc[j.index()];
        if *slot > 0.0 {
            *slot *= inv(graph.item_popularity(j));
        }
    }
    ScoreVector::from_dense(graph, target, &acc)
}

fn sum_normalized(v: &ScoreVector) -> ScoreVector {
    let total = v.total();
    if total > 0.0 {
        ScoreVector {
            target: v.target,
            scores: v.scores.iter().map(|(&i, &s)| (i, s / total)).collect(),
        }
    } else {
        v.clone()
    }
}

/// `lambda_h * ProbS + (1 - lambda_h) * HeatS`, each sum-normalized first.
pub fn hybrid_scores(graph: &FolksonomyGraph, target: UserId, lambda_h: f64) -> ScoreVector {
    let probs = sum_normalized(&probs_scores(graph, target));
    let heats = sum_normalized(&heats_scores(graph, target));
    probs.combine(lambda_h, &heats, 1.0 - lambda_h)
}

/// PLIERS on the user–item bipartite graph: ProbS path mass scaled by the
/// user overlap between source and candidate, over the candidate's
/// popularity.
pub fn pliers_bipartite(graph: &FolksonomyGraph, target: UserId) -> ScoreVector {
    affinity_scores(graph, target)
}

/// Affinity index: PLIERS over user–item links.
pub fn affinity_scores(graph: &FolksonomyGraph, target: UserId) -> ScoreVector {
    let sources = target_items(graph, target);
    if sources.is_empty() {
        return ScoreVector::zeros(graph, target);
    }
    let proj = ViaUsers(graph);
    let acc = overlap_diffusion(&proj, &sources, graph.vocabulary().item_capacity());
    ScoreVector::from_dense(graph, target, &acc)
}

/// Similarity index: PLIERS over item–tag links, seeded by the target's
/// items.
pub fn similarity_scores(graph: &FolksonomyGraph, target: UserId) -> ScoreVector {
    let sources = target_items(graph, target);
    if sources.is_empty() {
        return ScoreVector::zeros(graph, target);
    }
    let proj = ViaTags(graph);
    let acc = overlap_diffusion(&proj, &sources, graph.vocabulary().item_capacity());
    ScoreVector::from_dense(graph, target, &acc)
}

/// `lambda * affinity + (1 - lambda) * similarity`, raw.
pub fn pliers_tripartite(graph: &FolksonomyGraph, target: UserId, lambda: f64) -> ScoreVector {
    let affinity = affinity_scores(graph, target);
    let similarity = similarity_scores(graph, target);
    affinity.combine(lambda, &similarity, 1.0 - lambda)
}

/// Cosine similarity of two users' binary item vectors.
pub fn user_cosine(graph: &FolksonomyGraph, a: UserId, b: UserId) -> f64 {
    let (ka, kb) = (graph.user_degree(a), graph.user_degree(b));
    if ka == 0 || kb == 0 {
        return 0.0;
    }
    let shared = graph.items_of_user(a).filter(|&i| graph.has_user_item(b, i)).count();
    shared as f64 / ((ka * kb) as f64).sqrt()
}

/// User-based collaborative filtering with the `k` most cosine-similar
/// users as neighbourhood.
pub fn cf_user_based(graph: &FolksonomyGraph, target: UserId, k: usize) -> ScoreVector {
    assert!(k >= 1, "neighbourhood size must be positive");
    let k_t = graph.user_degree(target);
    if k_t == 0 {
        return ScoreVector::zeros(graph, target);
    }
    let mut shared: BTreeMap<UserId, usize> = BTreeMap::new();
    for s in graph.items_of_user(target) {
        for l in graph.users_of_item(s).filter(|&l| l != target) {
            *shared.entry(l).or_default() += 1;
        }
    }
    let mut neighbours: Vec<(UserId, Arc<str>, f64)> = graph
        .users()
        .filter(|&l| l != target)
        .map(|l| {
            let overlap = shared.get(&l).copied().unwrap_or(0);
            let sim = overlap as f64 / ((k_t * graph.user_degree(l)) as f64).sqrt();
            (l, graph.user_key(l), sim)
        })
        .collect();
    neighbours.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.1.cmp(&b.1)));
    neighbours.truncate(k);

    let mut acc = vec![0.0; graph.vocabulary().item_capacity()];
    for (n, _, sim) in neighbours.into_iter().filter(|n| n.2 > 0.0) {
        for j in graph.items_of_user(n) {
            acc[j.index()] += sim;
        }
    }
    ScoreVector::from_dense(graph, target, &acc)
}

/// Tag expansion: the target's tags plus the `k` tags that co-occur most
/// with them; an item scores the number of its tags in that expanded set.
pub fn tag_expansion(graph: &FolksonomyGraph, target: UserId, k: usize) -> ScoreVector {
    assert!(k >= 1, "expansion size must be positive");
    let own = graph.user_tags(target);
    if own.is_empty() {
        return ScoreVector::zeros(graph, target);
    }
    let expanded = expanded_tags(graph, &own, k);
    let mut acc = vec![0.0; graph.vocabulary().item_capacity()];
    for &t in &expanded {
        for j in graph.items_of_tag(t) {
            acc[j.index()] += 1.0;
        }
    }
    ScoreVector::from_dense(graph, target, &acc)
}

/// The target tag set extended with the `k` highest co-occurrence tags,
/// ties by tag key.
pub fn expanded_tags(
    graph: &FolksonomyGraph,
    own: &BTreeSet<TagId>,
    k: usize,
) -> BTreeSet<TagId> {
    let mut cooc: BTreeMap<TagId, usize> = BTreeMap::new();
    for &t in own {
        for i in graph.items_of_tag(t) {
            for other in graph.tags_of_item(i).filter(|o| !own.contains(o)) {
                *cooc.entry(other).or_default() += 1;
            }
        }
    }
    let mut candidates: Vec<_> = graph
        .tags()
        .filter(|t| !own.contains(t))
        .map(|t| (cooc.get(&t).copied().unwrap_or(0), graph.tag_key(t), t))
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut out = own.clone();
    out.extend(candidates.into_iter().take(k).map(|c| c.2));
    out
}

/// A scorer with its parameters, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Tripartite PLIERS with the affinity weight.
    Pliers { lambda: f64 },
    PliersBipartite,
    ProbS,
    HeatS,
    Hybrid { lambda_h: f64 },
    UserCf { k: usize },
    TagExpansion { k: usize },
}

impl Algorithm {
    pub fn score(&self, graph: &FolksonomyGraph, target: UserId) -> ScoreVector {
        match *self {
            Algorithm::Pliers { lambda } => pliers_tripartite(graph, target, lambda),
            Algorithm::PliersBipartite => pliers_bipartite(graph, target),
            Algorithm::ProbS => probs_scores(graph, target),
            Algorithm::HeatS => heats_scores(graph, target),
            Algorithm::Hybrid { lambda_h } => hybrid_scores(graph, target, lambda_h),
            Algorithm::UserCf { k } => cf_user_based(graph, target, k),
            Algorithm::TagExpansion { k } => tag_expansion(graph, target, k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Pliers { .. } => "pliers-tri",
            Algorithm::PliersBipartite => "pliers",
            Algorithm::ProbS => "probs",
            Algorithm::HeatS => "heats",
            Algorithm::Hybrid { .. } => "hybrid",
            Algorithm::UserCf { .. } => "cf",
            Algorithm::TagExpansion { .. } => "tagexp",
        }
    }

    /// Neighbourhood or expansion size, for the algorithms that take one.
    pub fn k(&self) -> Option<usize> {
        match *self {
            Algorithm::UserCf { k } | Algorithm::TagExpansion { k } => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k() {
            Some(k) => write!(f, "{}(k={k})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Algorithm family names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Pliers,
    PliersBipartite,
    ProbS,
    HeatS,
    Hybrid,
    UserCf,
    TagExpansion,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown algorithm `{0}`")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for AlgorithmKind {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "pliers-tri" => AlgorithmKind::Pliers,
            "pliers" => AlgorithmKind::PliersBipartite,
            "probs" => AlgorithmKind::ProbS,
            "heats" => AlgorithmKind::HeatS,
            "hybrid" => AlgorithmKind::Hybrid,
            "cf" => AlgorithmKind::UserCf,
            "tagexp" => AlgorithmKind::TagExpansion,
            other => return Err(UnknownAlgorithm(other.to_owned())),
        })
    }
}

impl AlgorithmKind {
    pub fn takes_k(self) -> bool {
        matches!(self, AlgorithmKind::UserCf | AlgorithmKind::TagExpansion)
    }

    /// Instantiates the family; `lambda` feeds both PLIERS and Hybrid.
    pub fn with_params(self, lambda: f64, k: usize) -> Algorithm {
        match self {
            AlgorithmKind::Pliers => Algorithm::Pliers { lambda },
            AlgorithmKind::PliersBipartite => Algorithm::PliersBipartite,
            AlgorithmKind::ProbS => Algorithm::ProbS,
            AlgorithmKind::HeatS => Algorithm::HeatS,
            AlgorithmKind::Hybrid => Algorithm::Hybrid { lambda_h: lambda },
            AlgorithmKind::UserCf => Algorithm::UserCf { k },
            AlgorithmKind::TagExpansion => Algorithm::TagExpansion { k },
        }
    }
}

/// Compares two rankings by their item order only.
pub fn same_ranking(a: &RecommendationVector, b: &RecommendationVector) -> bool {
    a.ranked.len() == b.ranked.len()
        && a.ranked.iter().zip(&b.ranked).all(|(x, y)| x.item == y.item)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FolksonomyGraph;

    const EPS: f64 = 1e-12;

    /// u_t–i1, u2–i1, u2–i2.
    fn hand_graph(with_tags: bool) -> FolksonomyGraph {
        let mut g = FolksonomyGraph::new();
        g.add_content("u_t", "i1", &["t1"], 0).unwrap();
        g.add_content("u2", "i2", &["t1"], 0).unwrap();
        let u2 = g.user("u2").unwrap();
        let i1 = g.item("i1").unwrap();
        g.insert_user_item(u2, i1, 0);
        if !with_tags {
            // rebuild without item-tag edges
            let mut bare = FolksonomyGraph::new();
            for (u, i) in [("u_t", "i1"), ("u2", "i1"), ("u2", "i2")] {
                let u = bare.vocabulary().intern_user(u);
                let i = bare.vocabulary().intern_item(i);
                bare.insert_user_item(u, i, 0);
            }
            return bare;
        }
        g
    }

    fn score_of(g: &FolksonomyGraph, v: &ScoreVector, key: &str) -> f64 {
        v.get(g.item(key).unwrap()).unwrap()
    }

    #[test]
    fn probs_hand_case() {
        let g = hand_graph(false);
        let t = g.user("u_t").unwrap();
        let v = probs_scores(&g, t);
        assert!((score_of(&g, &v, "i1") - 0.75).abs() < EPS);
        assert!((score_of(&g, &v, "i2") - 0.25).abs() < EPS);
        assert!((v.total() - 1.0).abs() < EPS);
    }

    #[test]
    fn heats_hand_case() {
        let g = hand_graph(false);
        let t = g.user("u_t").unwrap();
        let v = heats_scores(&g, t);
        assert!((score_of(&g, &v, "i1") - 0.75).abs() < EPS);
        assert!((score_of(&g, &v, "i2") - 0.5).abs() < EPS);
    }

    #[test]
    fn heats_single_edge() {
        let mut g = FolksonomyGraph::new();
        g.add_content("u", "i", &["t"], 0).unwrap();
        let v = heats_scores(&g, g.user("u").unwrap());
        assert_eq!(score_of(&g, &v, "i"), 1.0);
    }

    #[test]
    fn hybrid_hand_case() {
        let g = hand_graph(false);
        let t = g.user("u_t").unwrap();
        let v = hybrid_scores(&g, t, 0.5);
        assert!((score_of(&g, &v, "i2") - 0.325).abs() < EPS);
    }

    #[test]
    fn pliers_bipartite_hand_case() {
        let g = hand_graph(false);
        let t = g.user("u_t").unwrap();
        let v = pliers_bipartite(&g, t);
        assert!((score_of(&g, &v, "i2") - 0.25).abs() < EPS);
        let ranked = rank(&v, &g, Some(1));
        assert_eq!(ranked.ranked.len(), 1);
        assert_eq!(&*ranked.ranked[0].key, "i2");
        assert!((ranked.ranked[0].score - 0.25).abs() < EPS);
    }

    #[test]
    fn pliers_no_shared_user_scores_zero() {
        let mut g = hand_graph(false);
        let u3 = g.vocabulary().intern_user("u3");
        let i3 = g.vocabulary().intern_item("i3");
        g.insert_user_item(u3, i3, 0);
        let v = pliers_bipartite(&g, g.user("u_t").unwrap());
        assert_eq!(score_of(&g, &v, "i3"), 0.0);
    }

    #[test]
    fn affinity_ignores_tags() {
        let tagged = hand_graph(true);
        let bare = hand_graph(false);
        let a = affinity_scores(&tagged, tagged.user("u_t").unwrap());
        let b = pliers_bipartite(&bare, bare.user("u_t").unwrap());
        for key in ["i1", "i2"] {
            assert_eq!(score_of(&tagged, &a, key), score_of(&bare, &b, key));
        }
        assert!((score_of(&tagged, &a, "i2") - 0.25).abs() < EPS);
    }

    #[test]
    fn similarity_hand_case() {
        let g = hand_graph(true);
        let v = similarity_scores(&g, g.user("u_t").unwrap());
        assert!((score_of(&g, &v, "i2") - 0.5).abs() < EPS);
    }

    #[test]
    fn similarity_no_shared_tag_scores_zero() {
        let mut g = hand_graph(true);
        g.add_content("u9", "i9", &["other"], 0).unwrap();
        let v = similarity_scores(&g, g.user("u_t").unwrap());
        assert_eq!(score_of(&g, &v, "i9"), 0.0);
    }

    #[test]
    fn tripartite_combination() {
        let g = hand_graph(true);
        let t = g.user("u_t").unwrap();
        let v = pliers_tripartite(&g, t, 0.5);
        assert!((score_of(&g, &v, "i2") - 0.375).abs() < EPS);
        assert_eq!(pliers_tripartite(&g, t, 1.0), affinity_scores(&g, t));
        assert_eq!(pliers_tripartite(&g, t, 0.0), similarity_scores(&g, t));
    }

    #[test]
    fn cold_start_is_all_zero() {
        let g = hand_graph(true);
        let ghost = g.vocabulary().intern_user("ghost");
        for alg in [
            Algorithm::Pliers { lambda: 0.5 },
            Algorithm::ProbS,
            Algorithm::HeatS,
            Algorithm::Hybrid { lambda_h: 0.5 },
            Algorithm::UserCf { k: 3 },
            Algorithm::TagExpansion { k: 3 },
        ] {
            let v = alg.score(&g, ghost);
            assert_eq!(v.len(), g.item_count(), "{alg}");
            assert_eq!(v.total(), 0.0, "{alg}");
            assert!(rank(&v, &g, None).is_empty());
        }
    }

    #[test]
    fn cf_hand_case() {
        let g = hand_graph(false);
        let t = g.user("u_t").unwrap();
        let v = cf_user_based(&g, t, 1);
        assert!((score_of(&g, &v, "i2") - 1.0 / 2f64.sqrt()).abs() < EPS);
        assert!((user_cosine(&g, t, g.user("u2").unwrap()) - 1.0 / 2f64.sqrt()).abs() < EPS);
    }

    #[test]
    fn cf_identical_users_have_cosine_one() {
        let mut g = FolksonomyGraph::new();
        for u in ["a", "b"] {
            for i in ["x", "y", "z"] {
                let u = g.vocabulary().intern_user(u);
                let i = g.vocabulary().intern_item(i);
                g.insert_user_item(u, i, 0);
            }
        }
        let c = user_cosine(&g, g.user("a").unwrap(), g.user("b").unwrap());
        assert!((c - 1.0).abs() < EPS);
    }

    #[test]
    fn cf_without_other_users_is_zero() {
        let mut g = FolksonomyGraph::new();
        g.add_content("solo", "i", &["t"], 0).unwrap();
        let v = cf_user_based(&g, g.user("solo").unwrap(), 5);
        assert_eq!(v.total(), 0.0);
    }

    fn cooc_graph() -> FolksonomyGraph {
        let mut g = FolksonomyGraph::new();
        g.add_content("me", "mine", &["t1"], 0).unwrap();
        for n in 0..3 {
            g.add_content("o", &format!("a{n}"), &["t1", "t2"], 0).unwrap();
        }
        g.add_content("o", "b", &["t1", "t3"], 0).unwrap();
        g.add_content("o", "c", &["t4"], 0).unwrap();
        g
    }

    #[test]
    fn tag_expansion_picks_top_cooccurrence() {
        let g = cooc_graph();
        let me = g.user("me").unwrap();
        let own = g.user_tags(me);
        let expanded: Vec<_> = expanded_tags(&g, &own, 1)
            .into_iter()
            .map(|t| g.tag_key(t).to_string())
            .collect();
        assert_eq!(expanded, ["t1", "t2"]);
        let v = tag_expansion(&g, me, 1);
        assert_eq!(score_of(&g, &v, "a0"), 2.0);
        assert_eq!(score_of(&g, &v, "b"), 1.0);
        assert_eq!(score_of(&g, &v, "c"), 0.0);
    }

    #[test]
    fn tag_expansion_full_covers_every_item() {
        let g = cooc_graph();
        let v = tag_expansion(&g, g.user("me").unwrap(), g.tag_count());
        assert!(v.iter().all(|(_, s)| s > 0.0));
    }

    #[test]
    fn tag_expansion_own_tags_only_item() {
        let g = cooc_graph();
        let v = tag_expansion(&g, g.user("me").unwrap(), 1);
        assert_eq!(score_of(&g, &v, "mine"), 1.0);
    }

    #[test]
    fn rank_filters_and_breaks_ties_by_key() {
        let mut g = FolksonomyGraph::new();
        g.add_content("me", "own", &["t"], 0).unwrap();
        g.add_content("x", "i_b", &["t"], 0).unwrap();
        g.add_content("x", "i_a", &["t"], 0).unwrap();
        g.add_content("y", "i_z", &["q"], 0).unwrap();
        let me = g.user("me").unwrap();
        let v = similarity_scores(&g, me);
        let r = rank(&v, &g, None);
        let keys: Vec<_> = r.keys().map(|k| k.to_string()).collect();
        assert_eq!(keys, ["i_a", "i_b"]);
        assert_eq!(r.ranked[0].score, r.ranked[1].score);
        assert!(rank(&v, &g, Some(0)).is_empty());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for name in ["pliers", "pliers-tri", "probs", "heats", "hybrid", "cf", "tagexp"] {
            let kind: AlgorithmKind = name.parse().unwrap();
            assert_eq!(kind.with_params(0.5, 3).name(), name);
        }
        assert_eq!("mf".parse::<AlgorithmKind>(), Err(UnknownAlgorithm("mf".into())));
    }
}
