// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic inputs: community contact traces, long-tailed content
//! streams and static folksonomies.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Zipf};

use crate::graph::{FolksonomyGraph, Timestamp};
use crate::trace::{ContactEvent, ContentEvent};

/// Upper bound on tags attached to one item.
pub const MAX_TAGS_PER_ITEM: usize = 13;

const MINUTE: Timestamp = 60;

/// `a000`, `a001`, ... wide enough to sort numerically.
pub fn agent_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(3);
    (0..n).map(|i| format!("a{i:0width$}")).collect()
}

/// Community of agent `index` under round-robin assignment.
pub fn community_of(index: usize, n_communities: usize) -> usize {
    index % n_communities
}

/// Every minute each agent contacts one partner: from its own community with
/// probability `1 - rewiring_p`, otherwise uniformly from the other
/// communities. When the chosen pool is empty the other one is used.
///
/// Panics when `n_communities` is zero or exceeds `n_agents`, or when
/// `rewiring_p` is outside `[0, 1]`.
pub fn generate_synthetic_contacts(
    n_agents: usize,
    n_communities: usize,
    rewiring_p: f64,
    duration: Timestamp,
    seed: u64,
) -> Vec<ContactEvent> {
    assert!(n_communities >= 1 && n_communities <= n_agents, "need 1 <= n_communities <= n_agents");
    assert!((0.0..=1.0).contains(&rewiring_p), "rewiring_p outside [0, 1]");
    let ids = agent_ids(n_agents);
    let members: Vec<Vec<usize>> = (0..n_communities)
        .map(|c| (0..n_agents).filter(|&i| community_of(i, n_communities) == c).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut t = 0;
    while t < duration {
        for a in 0..n_agents {
            let own = community_of(a, n_communities);
            let inside = members[own].len() - 1;
            let outside = n_agents - members[own].len();
            let go_out = rng.random_bool(rewiring_p);
            if inside == 0 && outside == 0 {
                continue;
            }
            let cross = match (inside, outside) {
                (0, _) => true,
                (_, 0) => false,
                _ => go_out,
            };
            let partner = if cross {
                let k = rng.random_range(0..outside);
                (0..n_agents).filter(|&b| community_of(b, n_communities) != own).nth(k).expect("in range")
            } else {
                let k = rng.random_range(0..inside);
                members[own].iter().copied().filter(|&m| m != a).nth(k).expect("in range")
            };
            out.push(ContactEvent::new(t, ids[a].clone(), ids[partner].clone()));
        }
        t += MINUTE;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentStreamParams {
    /// Mean number of items created per second.
    pub rate: f64,
    pub start: Timestamp,
    /// Items are created in `[start, end)`.
    pub end: Timestamp,
    /// Zipf exponent of per-agent creation counts.
    pub creator_exponent: f64,
    /// Size of the tag vocabulary.
    pub n_tags: usize,
    /// Zipf exponent of tag popularity.
    pub tag_exponent: f64,
    /// Power-law exponent of tags per item on `[1, 13]`.
    pub tags_per_item_exponent: f64,
}

impl Default for ContentStreamParams {
    fn default() -> Self {
        Self {
            rate: 1.0 / 60.0,
            start: 0,
            end: 3600,
            creator_exponent: 1.0,
            n_tags: 200,
            tag_exponent: 1.0,
            tags_per_item_exponent: 2.0,
        }
    }
}

/// Poisson content stream over `creators`. Item keys are `c00000`, ... in
/// creation order.
pub fn generate_content_stream(creators: &[String], params: &ContentStreamParams, seed: u64) -> Vec<ContentEvent> {
    assert!(!creators.is_empty(), "no creators");
    assert!(params.rate > 0.0 && params.n_tags >= 1, "invalid content parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(params.rate).expect("positive rate");
    let creator_dist = Zipf::new(creators.len() as f64, params.creator_exponent).expect("creator exponent");
    let tag_dist = Zipf::new(params.n_tags as f64, params.tag_exponent).expect("tag exponent");
    let count_dist = Zipf::new(MAX_TAGS_PER_ITEM as f64, params.tags_per_item_exponent).expect("tags per item exponent");
    // creator ranks are shuffled so popularity does not follow key order
    let mut order: Vec<usize> = (0..creators.len()).collect();
    order.shuffle(&mut rng);

    let mut out = Vec::new();
    let mut clock = params.start as f64;
    loop {
        clock += rng.sample(gap);
        let time = clock.floor() as Timestamp;
        if time >= params.end {
            break;
        }
        let creator = &creators[order[rng.sample(creator_dist) as usize - 1]];
        let n = (rng.sample(count_dist) as usize).min(params.n_tags);
        let tags = distinct_draws(&mut rng, &tag_dist, n)
            .into_iter()
            .map(|t| format!("t{:04}", t - 1))
            .collect::<Vec<_>>();
        out.push(ContentEvent::new(time, creator.clone(), format!("c{:05}", out.len()), tags));
    }
    out
}

fn distinct_draws<R: Rng>(rng: &mut R, dist: &Zipf<f64>, n: usize) -> BTreeSet<usize> {
    let mut set = BTreeSet::new();
    while set.len() < n {
        set.insert(rng.sample(dist) as usize);
    }
    set
}

#[derive(Debug, Clone, PartialEq)]
pub struct FolksonomyParams {
    pub n_users: usize,
    pub n_items: usize,
    pub n_tags: usize,
    /// Broad interest groups. Item, tag and niche `x` belong to topic
    /// `x % n_topics`.
    pub n_topics: usize,
    /// Narrow interest groups; item and tag `x` belong to niche
    /// `x % n_niches`. Must be a multiple of `n_topics`.
    pub n_niches: usize,
    /// Zipf exponent of item popularity.
    pub item_exponent: f64,
    /// Exponent applied to item popularity when picking inside a niche:
    /// 1 follows global popularity, 0 picks niche items uniformly.
    pub niche_popularity_bias: f64,
    /// Zipf exponent of tag popularity inside each pool.
    pub tag_exponent: f64,
    /// Items per user: `min_user_items` plus a Zipf draw on `[1, max_extra]`.
    pub min_user_items: usize,
    pub max_extra_items: usize,
    pub user_items_exponent: f64,
    /// Probability that a user pick or an item tag comes from its niche.
    pub niche_affinity: f64,
    /// Probability that it comes from the wider topic otherwise.
    pub topic_affinity: f64,
    /// Niche probability used for item tags instead of `niche_affinity`.
    pub tag_niche_affinity: f64,
    pub tags_per_item_exponent: f64,
}

impl Default for FolksonomyParams {
    fn default() -> Self {
        Self {
            n_users: 500,
            n_items: 800,
            n_tags: 300,
            n_topics: 10,
            n_niches: 100,
            item_exponent: 1.0,
            niche_popularity_bias: 0.0,
            tag_exponent: 1.0,
            min_user_items: 5,
            max_extra_items: 60,
            user_items_exponent: 1.5,
            niche_affinity: 0.8,
            topic_affinity: 0.5,
            tag_niche_affinity: 0.9,
            tags_per_item_exponent: 2.0,
        }
    }
}

/// Members of one group with their sampling weights.
struct Pool {
    members: Vec<usize>,
    weights: WeightedIndex<f64>,
}

impl Pool {
    fn new(members: Vec<usize>, weight: impl Fn(usize, usize) -> f64) -> Self {
        let weights = WeightedIndex::new(members.iter().enumerate().map(|(r, &m)| weight(r, m))).expect("weights");
        Self { members, weights }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.members[self.weights.sample(rng)]
    }
}

/// Pools for `n` entities split by `x % groups`.
fn pools(n: usize, groups: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<Pool> {
    (0..groups)
        .map(|g| Pool::new((0..n).filter(|&x| x % groups == g).collect(), &weight))
        .collect()
}

/// Picks from the niche pool, else the topic pool, else the global pool.
fn layered<R: Rng>(rng: &mut R, p: &FolksonomyParams, affinity: f64, niche: &Pool, topic: &Pool, global: &Pool) -> usize {
    if rng.random_bool(affinity) {
        niche.sample(rng)
    } else if rng.random_bool(p.topic_affinity) {
        topic.sample(rng)
    } else {
        global.sample(rng)
    }
}

/// Static long-tailed folksonomy with latent topics and niches. Users are
/// `u000`, items `i000`, tags `t000`; all timestamps are zero. Items nobody
/// picked are absent.
pub fn generate_folksonomy(params: &FolksonomyParams, seed: u64) -> FolksonomyGraph {
    let p = params;
    assert!(
        p.n_topics >= 1 && p.n_niches.is_multiple_of(p.n_topics) && p.n_niches <= p.n_items.min(p.n_tags),
        "invalid topic or niche count"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // item popularity weights follow a shuffled Zipf profile
    let mut popularity: Vec<f64> = (1..=p.n_items).map(|r| (r as f64).powf(-p.item_exponent)).collect();
    popularity.shuffle(&mut rng);
    let by_popularity = |_: usize, i: usize| popularity[i];
    let by_rank = |r: usize, _: usize| ((r + 1) as f64).powf(-p.tag_exponent);
    let item_pools = (
        pools(p.n_items, p.n_niches, |_, i| popularity[i].powf(p.niche_popularity_bias)),
        pools(p.n_items, p.n_topics, by_popularity),
        Pool::new((0..p.n_items).collect(), by_popularity),
    );
    let tag_pools = (
        pools(p.n_tags, p.n_niches, by_rank),
        pools(p.n_tags, p.n_topics, by_rank),
        Pool::new((0..p.n_tags).collect(), by_rank),
    );
    let extra = Zipf::new(p.max_extra_items as f64, p.user_items_exponent).expect("user item exponent");
    let count_dist = Zipf::new(MAX_TAGS_PER_ITEM as f64, p.tags_per_item_exponent).expect("tags per item exponent");

    let width = |n: usize| n.saturating_sub(1).to_string().len().max(3);
    let (wu, wi, wt) = (width(p.n_users), width(p.n_items), width(p.n_tags));

    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); p.n_items];
    for u in 0..p.n_users {
        let niche = rng.random_range(0..p.n_niches);
        let topic = niche % p.n_topics;
        let want = (p.min_user_items + rng.sample(extra) as usize - 1).min(p.n_items);
        let mut picked = BTreeSet::new();
        while picked.len() < want {
            picked.insert(layered(&mut rng, p, p.niche_affinity, &item_pools.0[niche], &item_pools.1[topic], &item_pools.2));
        }
        for i in picked {
            holders[i].push(u);
        }
    }

    let mut graph = FolksonomyGraph::new();
    let vocab = graph.vocabulary().clone();
    for (i, users) in holders.iter().enumerate() {
        let (niche, topic) = (i % p.n_niches, i % p.n_topics);
        let n_tags = (rng.sample(count_dist) as usize).min(p.n_tags);
        let mut tags = BTreeSet::new();
        while tags.len() < n_tags {
            tags.insert(layered(&mut rng, p, p.tag_niche_affinity, &tag_pools.0[niche], &tag_pools.1[topic], &tag_pools.2));
        }
        let Some(&first) = users.first() else { continue };
        let tag_keys: Vec<String> = tags.iter().map(|t| format!("t{t:0wt$}")).collect();
        let item_key = format!("i{i:0wi$}");
        graph
            .add_content(&format!("u{first:0wu$}"), &item_key, &tag_keys, 0)
            .expect("non-empty tags");
        let item = vocab.intern_item(&item_key);
        for &u in &users[1..] {
            graph.insert_user_item(vocab.intern_user(&format!("u{u:0wu$}")), item, 0);
        }
    }
    graph
}
