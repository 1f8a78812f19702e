// SPDX-License-Identifier: Apache-2.0

//! Link-prediction benchmark and similarity statistics.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{FolksonomyGraph, ItemId, UserId};
use crate::recommend::{rank, Algorithm};

/// Minimum number of removable links a user needs to lose one.
pub const MIN_ELIGIBLE_ITEMS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("user `{0}` has an empty removal set")]
    EmptyRemovalSet(String),
    #[error("user `{0}` has removals but no recommendation list")]
    MissingList(String),
    #[error("series lengths differ: y={y}, x1={x1}, x2={x2}")]
    LengthMismatch { y: usize, x1: usize, x2: usize },
    #[error("need at least 3 observations, got {0}")]
    TooShort(usize),
}

/// Links held out by [`prune_for_link_prediction`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRemovalSet {
    pub removals: BTreeMap<UserId, ItemId>,
    pub removed_fraction: f64,
}

impl LinkRemovalSet {
    pub fn len(&self) -> usize {
        self.removals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removals.is_empty()
    }
}

/// Removes one uniformly chosen link from every user that still has at
/// least [`MIN_ELIGIBLE_ITEMS`] items of popularity above one. Users are
/// visited in key order and popularity is read from the partially pruned
/// graph, so no removal ever orphans an item.
pub fn prune_for_link_prediction(graph: &FolksonomyGraph, seed: u64) -> (FolksonomyGraph, LinkRemovalSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pruned = graph.clone();
    let mut users: Vec<(Arc<str>, UserId)> = graph.users().map(|u| (graph.user_key(u), u)).collect();
    users.sort();
    let mut removals = BTreeMap::new();
    for (_, user) in users {
        let mut candidates: Vec<(Arc<str>, ItemId)> = pruned
            .items_of_user(user)
            .filter(|&i| pruned.item_popularity(i) > 1)
            .map(|i| (pruned.item_key(i), i))
            .collect();
        if candidates.len() < MIN_ELIGIBLE_ITEMS {
            continue;
        }
        candidates.sort();
        let (_, item) = candidates[rng.random_range(0..candidates.len())].clone();
        pruned.remove_user_item(user, item);
        removals.insert(user, item);
    }
    let total = graph.user_item_count();
    let removed_fraction = if total == 0 { 0.0 } else { removals.len() as f64 / total as f64 };
    (pruned, LinkRemovalSet { removals, removed_fraction })
}

/// Per-user detail behind an [`EvalReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct UserEval {
    /// 1-based position of each removed item in the list, `None` if absent.
    pub positions: Vec<Option<usize>>,
    pub list_len: usize,
    pub removed_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<K: Ord> {
    pub precision: f64,
    pub recall: f64,
    pub per_user: BTreeMap<K, UserEval>,
}

/// Scores recommendation lists `L(u)` against held-out sets `T(u)`. The
/// evaluated population is the set of users with removals.
pub fn evaluate<K, I>(
    lists: &BTreeMap<K, Vec<I>>,
    removed: &BTreeMap<K, BTreeSet<I>>,
) -> Result<EvalReport<K>, EvalError>
where
    K: Ord + Clone + ToString,
    I: Ord,
{
    let mut per_user = BTreeMap::new();
    let mut precision = 0.0;
    let mut recall = 0.0;
    for (user, held_out) in removed {
        if held_out.is_empty() {
            return Err(EvalError::EmptyRemovalSet(user.to_string()));
        }
        let list = lists.get(user).ok_or_else(|| EvalError::MissingList(user.to_string()))?;
        let positions: Vec<Option<usize>> = held_out
            .iter()
            .map(|t| list.iter().position(|x| x == t).map(|p| p + 1))
            .collect();
        let n = held_out.len() as f64;
        precision += positions.iter().flatten().map(|&p| 1.0 / p as f64).sum::<f64>() / n;
        recall += positions.iter().flatten().count() as f64 / n;
        per_user.insert(
            user.clone(),
            UserEval { positions, list_len: list.len(), removed_len: held_out.len() },
        );
    }
    let users = removed.len().max(1) as f64;
    Ok(EvalReport { precision: precision / users, recall: recall / users, per_user })
}

/// Mean reciprocal position of the held-out items; a missing item adds 0.
pub fn precision<K, I>(lists: &BTreeMap<K, Vec<I>>, removed: &BTreeMap<K, BTreeSet<I>>) -> Result<f64, EvalError>
where
    K: Ord + Clone + ToString,
    I: Ord,
{
    evaluate(lists, removed).map(|r| r.precision)
}

/// Mean fraction of held-out items present in the list.
pub fn recall<K, I>(lists: &BTreeMap<K, Vec<I>>, removed: &BTreeMap<K, BTreeSet<I>>) -> Result<f64, EvalError>
where
    K: Ord + Clone + ToString,
    I: Ord,
{
    evaluate(lists, removed).map(|r| r.recall)
}

/// One algorithm's outcome on a link-prediction run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPredictionRow {
    pub algorithm: Algorithm,
    pub precision: f64,
    pub recall: f64,
    pub removed_fraction: f64,
    pub evaluated_users: usize,
}

/// Prune, then score, rank, and evaluate every algorithm on the pruned
/// graph. Lists are unbounded unless `top_n` is set.
pub fn run_link_prediction(
    graph: &FolksonomyGraph,
    algorithms: &[Algorithm],
    seed: u64,
    top_n: Option<usize>,
) -> Vec<LinkPredictionRow> {
    let (pruned, removal) = prune_for_link_prediction(graph, seed);
    evaluate_removals(&pruned, &removal, algorithms, top_n)
}

/// Evaluates algorithms against an existing removal set.
pub fn evaluate_removals(
    pruned: &FolksonomyGraph,
    removal: &LinkRemovalSet,
    algorithms: &[Algorithm],
    top_n: Option<usize>,
) -> Vec<LinkPredictionRow> {
    let held_out: BTreeMap<UserId, BTreeSet<ItemId>> = removal
        .removals
        .iter()
        .map(|(&u, &i)| (u, BTreeSet::from([i])))
        .collect();
    let users: Vec<UserId> = held_out.keys().copied().collect();
    algorithms
        .iter()
        .map(|alg| {
            let lists: BTreeMap<UserKey, Vec<ItemId>> = users
                .par_iter()
                .map(|&u| (UserKey(u), rank(&alg.score(pruned, u), pruned, top_n).items()))
                .collect();
            let removed: BTreeMap<UserKey, BTreeSet<ItemId>> =
                held_out.iter().map(|(&u, s)| (UserKey(u), s.clone())).collect();
            let report = evaluate(&lists, &removed).expect("every removal has a list");
            LinkPredictionRow {
                algorithm: *alg,
                precision: report.precision,
                recall: report.recall,
                removed_fraction: removal.removed_fraction,
                evaluated_users: users.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct UserKey(UserId);

impl std::fmt::Display for UserKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0.index())
    }
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counting as identical.
pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpearmanMode {
    /// Displacement summed over shared elements only, normalized by the
    /// longer list length. Disjoint lists score 1.
    Literal,
    /// Non-shared elements count with the maximum displacement and the sum
    /// is normalized to `[0, 1]`.
    #[default]
    Corrected,
}

impl FromStr for SpearmanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(SpearmanMode::Literal),
            "corrected" => Ok(SpearmanMode::Corrected),
            other => Err(format!("unknown spearman mode `{other}`")),
        }
    }
}

/// Footrule-based similarity of two ranked lists (1-based positions).
pub fn spearman_similarity<T: Eq + Hash>(r1: &[T], r2: &[T], mode: SpearmanMode) -> f64 {
    if r1.is_empty() && r2.is_empty() {
        return 1.0;
    }
    let pos2: std::collections::HashMap<&T, usize> = r2.iter().enumerate().map(|(p, x)| (x, p)).collect();
    let max_len = r1.len().max(r2.len()) as f64;
    let mut shared = 0usize;
    let mut displacement = 0.0;
    for (p1, x) in r1.iter().enumerate() {
        if let Some(&p2) = pos2.get(x) {
            shared += 1;
            displacement += p1.abs_diff(p2) as f64;
        }
    }
    match mode {
        SpearmanMode::Literal => 1.0 - displacement / max_len,
        SpearmanMode::Corrected => {
            let union = r1.len() + r2.len() - shared;
            let unshared = (union - shared) as f64;
            let total = displacement + unshared * max_len;
            1.0 - total / (union as f64 * max_len)
        }
    }
}

/// Degenerate inputs met by [`correlation_analysis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorrelationFlags {
    pub y_constant: bool,
    pub x1_constant: bool,
    pub x2_constant: bool,
    /// The two regressors are collinear; the fit used a single regressor.
    pub collinear: bool,
    /// `R²` came out negative (possible without an intercept) and was
    /// clamped to zero.
    pub r_squared_clamped: bool,
}

impl CorrelationFlags {
    pub fn any(&self) -> bool {
        self.y_constant || self.x1_constant || self.x2_constant || self.collinear || self.r_squared_clamped
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.y_constant {
            out.push("y_constant");
        }
        if self.x1_constant {
            out.push("x1_constant");
        }
        if self.x2_constant {
            out.push("x2_constant");
        }
        if self.collinear {
            out.push("collinear");
        }
        if self.r_squared_clamped {
            out.push("r_squared_clamped");
        }
        out
    }
}

/// Pearson correlations of `y` with each regressor and the no-intercept
/// least-squares fit `y = beta1 * x1 + beta2 * x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub n: usize,
    pub r_yx1: f64,
    pub r_yx2: f64,
    pub r_squared: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub flags: CorrelationFlags,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson's r, or `None` when either series has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

pub fn correlation_analysis(y: &[f64], x1: &[f64], x2: &[f64]) -> Result<CorrelationReport, EvalError> {
    if y.len() != x1.len() || y.len() != x2.len() {
        return Err(EvalError::LengthMismatch { y: y.len(), x1: x1.len(), x2: x2.len() });
    }
    if y.len() < 3 {
        return Err(EvalError::TooShort(y.len()));
    }
    let mut flags = CorrelationFlags::default();
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    flags.y_constant = constant(y);
    flags.x1_constant = constant(x1);
    flags.x2_constant = constant(x2);
    let r_yx1 = pearson(y, x1).unwrap_or(0.0);
    let r_yx2 = pearson(y, x2).unwrap_or(0.0);

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let (s11, s22, s12) = (dot(x1, x1), dot(x2, x2), dot(x1, x2));
    let (s1y, s2y) = (dot(x1, y), dot(x2, y));
    let det = s11 * s22 - s12 * s12;
    let (beta1, beta2) = if det.abs() > 1e-12 * (s11 * s22).max(f64::MIN_POSITIVE) {
        ((s22 * s1y - s12 * s2y) / det, (s11 * s2y - s12 * s1y) / det)
    } else {
        flags.collinear = s11 > 0.0 && s22 > 0.0;
        if s11 >= s22 && s11 > 0.0 {
            (s1y / s11, 0.0)
        } else if s22 > 0.0 {
            (0.0, s2y / s22)
        } else {
            (0.0, 0.0)
        }
    };

    let my = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = y
        .iter()
        .zip(x1.iter().zip(x2))
        .map(|(v, (a, b))| (v - beta1 * a - beta2 * b).powi(2))
        .sum();
    let mut r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    if r_squared < 0.0 {
        flags.r_squared_clamped = true;
        r_squared = 0.0;
    }
    Ok(CorrelationReport { n: y.len(), r_yx1, r_yx2, r_squared, beta1, beta2, flags })
}

/// First differences `v[t] - v[t-1]`.
pub fn deltas(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}
