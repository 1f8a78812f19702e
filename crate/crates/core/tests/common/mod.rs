// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures and brute-force reference implementations for the
//! integration tests. Nothing here calls the library's scorers.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use ppliers_core::graph::FolksonomyGraph;
use ppliers_core::recommend::ScoreVector;
use rand::prelude::*;

/// String-keyed edge lists of a folksonomy.
#[derive(Debug, Clone, Default)]
pub struct Edges {
    pub ui: BTreeSet<(String, String)>,
    pub it: BTreeSet<(String, String)>,
}

impl Edges {
    pub fn graph(&self) -> FolksonomyGraph {
        let mut g = FolksonomyGraph::new();
        let v = g.vocabulary().clone();
        for (u, i) in &self.ui {
            g.insert_user_item(v.intern_user(u), v.intern_item(i), 0);
        }
        for (i, t) in &self.it {
            g.insert_item_tag(v.intern_item(i), v.intern_tag(t), 0);
        }
        g
    }

    pub fn users(&self) -> BTreeSet<String> {
        self.ui.iter().map(|e| e.0.clone()).collect()
    }
}

/// Random folksonomy where every item has at least one user. Some items
/// may have no tags.
pub fn random_edges<R: Rng>(rng: &mut R, max_users: usize, max_items: usize, max_tags: usize) -> Edges {
    let n_users = rng.random_range(1..=max_users);
    let n_items = rng.random_range(1..=max_items);
    let n_tags = rng.random_range(1..=max_tags);
    let p_ui = rng.random_range(0.1..0.5);
    let p_it = rng.random_range(0.1..0.4);
    let mut e = Edges::default();
    for i in 0..n_items {
        let item = format!("i{i:02}");
        e.ui.insert((format!("u{:02}", rng.random_range(0..n_users)), item.clone()));
        for u in 0..n_users {
            if rng.random_bool(p_ui) {
                e.ui.insert((format!("u{u:02}"), item.clone()));
            }
        }
        for t in 0..n_tags {
            if rng.random_bool(p_it) {
                e.it.insert((item.clone(), format!("t{t:02}")));
            }
        }
    }
    e
}

/// Dense 0/1 matrices over sorted keys.
pub struct Dense {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub tags: Vec<String>,
    /// `a[l][j]`: user `l` holds item `j`.
    pub a: Vec<Vec<f64>>,
    /// `b[z][j]`: tag `z` marks item `j`.
    pub b: Vec<Vec<f64>>,
}

impl Dense {
    pub fn new(e: &Edges) -> Self {
        let users: Vec<String> = e.ui.iter().map(|x| x.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let items: Vec<String> = e
            .ui
            .iter()
            .map(|x| x.1.clone())
            .chain(e.it.iter().map(|x| x.0.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let tags: Vec<String> = e.it.iter().map(|x| x.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let pos = |v: &[String], k: &str| v.iter().position(|x| x == k).unwrap();
        let mut a = vec![vec![0.0; items.len()]; users.len()];
        for (u, i) in &e.ui {
            a[pos(&users, u)][pos(&items, i)] = 1.0;
        }
        let mut b = vec![vec![0.0; items.len()]; tags.len()];
        for (i, t) in &e.it {
            b[pos(&tags, t)][pos(&items, i)] = 1.0;
        }
        Self { users, items, tags, a, b }
    }

    pub fn user_index(&self, key: &str) -> usize {
        self.users.iter().position(|x| x == key).unwrap()
    }

    fn k_user(&self, l: usize) -> f64 {
        self.a[l].iter().sum()
    }

    fn k_item_users(&self, j: usize) -> f64 {
        self.a.iter().map(|row| row[j]).sum()
    }

    fn k_item_tags(&self, j: usize) -> f64 {
        self.b.iter().map(|row| row[j]).sum()
    }

    fn k_tag(&self, z: usize) -> f64 {
        self.b[z].iter().sum()
    }

    /// Mass diffusion as two explicit resource transfers.
    pub fn probs(&self, t: usize) -> Vec<f64> {
        let (n, m) = (self.users.len(), self.items.len());
        let mut user_res = vec![0.0; n];
        for s in 0..m {
            for l in 0..n {
                if self.a[l][s] * self.a[t][s] > 0.0 {
                    user_res[l] += 1.0 / self.k_item_users(s);
                }
            }
        }
        (0..m)
            .map(|j| (0..n).filter(|&l| self.a[l][j] > 0.0).map(|l| user_res[l] / self.k_user(l)).sum())
            .collect()
    }

    /// Heat spreading as two explicit averaging steps.
    pub fn heats(&self, t: usize) -> Vec<f64> {
        let (n, m) = (self.users.len(), self.items.len());
        let user_heat: Vec<f64> = (0..n)
            .map(|l| (0..m).map(|s| self.a[l][s] * self.a[t][s]).sum::<f64>() / self.k_user(l))
            .collect();
        (0..m)
            .map(|j| {
                let k = self.k_item_users(j);
                if k == 0.0 {
                    0.0
                } else {
                    (0..n).map(|l| self.a[l][j] * user_heat[l]).sum::<f64>() / k
                }
            })
            .collect()
    }

    /// Literal double sum over users `l` and target items `s`.
    pub fn affinity(&self, t: usize) -> Vec<f64> {
        let (n, m) = (self.users.len(), self.items.len());
        (0..m)
            .map(|j| {
                let mut f = 0.0;
                for l in 0..n {
                    for s in 0..m {
                        let num = self.a[l][j] * self.a[l][s] * self.a[t][s];
                        if num == 0.0 {
                            continue;
                        }
                        let shared: f64 = (0..n).map(|x| self.a[x][s] * self.a[x][j]).sum();
                        f += num / (self.k_user(l) * self.k_item_users(s)) * shared / self.k_item_users(j);
                    }
                }
                f
            })
            .collect()
    }

    /// Literal double sum over tags `z` and target items `s`.
    pub fn similarity(&self, t: usize) -> Vec<f64> {
        let m = self.items.len();
        (0..m)
            .map(|j| {
                let mut f = 0.0;
                for z in 0..self.tags.len() {
                    for s in 0..m {
                        let num = self.b[z][j] * self.b[z][s] * self.a[t][s];
                        if num == 0.0 {
                            continue;
                        }
                        let shared: f64 = (0..self.tags.len()).map(|y| self.b[y][s] * self.b[y][j]).sum();
                        f += num / (self.k_tag(z) * self.k_item_tags(s)) * shared / self.k_item_tags(j);
                    }
                }
                f
            })
            .collect()
    }

    /// Cosine-weighted votes of the `k` most similar users (ties by key).
    pub fn cf(&self, t: usize, k: usize) -> Vec<f64> {
        let (n, m) = (self.users.len(), self.items.len());
        let cos = |x: usize| {
            let dot: f64 = (0..m).map(|j| self.a[t][j] * self.a[x][j]).sum();
            dot / (self.k_user(t) * self.k_user(x)).sqrt()
        };
        let mut others: Vec<(f64, &String, usize)> =
            (0..n).filter(|&x| x != t).map(|x| (cos(x), &self.users[x], x)).collect();
        others.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(q.1)));
        let mut f = vec![0.0; m];
        for &(sim, _, x) in others.iter().take(k) {
            for j in 0..m {
                f[j] += sim * self.a[x][j];
            }
        }
        f
    }

    /// Number of each item's tags inside the expanded target tag set; zero
    /// everywhere when the target's items carry no tags.
    pub fn tag_expansion(&self, t: usize, k: usize) -> Vec<f64> {
        let m = self.items.len();
        let own: BTreeSet<usize> = (0..self.tags.len())
            .filter(|&z| (0..m).any(|s| self.a[t][s] * self.b[z][s] > 0.0))
            .collect();
        if own.is_empty() {
            return vec![0.0; m];
        }
        let mut cooc: Vec<(usize, &String, usize)> = (0..self.tags.len())
            .filter(|z| !own.contains(z))
            .map(|z| {
                let c: f64 = own
                    .iter()
                    .map(|&o| (0..m).map(|j| self.b[o][j] * self.b[z][j]).sum::<f64>())
                    .sum();
                (c as usize, &self.tags[z], z)
            })
            .collect();
        cooc.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(q.1)));
        let expanded: BTreeSet<usize> = own.iter().copied().chain(cooc.iter().take(k).map(|c| c.2)).collect();
        (0..m).map(|j| expanded.iter().map(|&z| self.b[z][j]).sum()).collect()
    }
}

/// Library scores re-keyed by item key.
pub fn by_key(g: &FolksonomyGraph, v: &ScoreVector) -> BTreeMap<String, f64> {
    v.iter().map(|(i, s)| (g.item_key(i).to_string(), s)).collect()
}

/// Largest absolute difference between library and oracle scores; panics
/// if the item sets differ.
pub fn max_abs_diff(g: &FolksonomyGraph, lib: &ScoreVector, d: &Dense, oracle: &[f64]) -> f64 {
    let lib = by_key(g, lib);
    assert_eq!(lib.len(), d.items.len(), "item sets differ");
    d.items
        .iter()
        .zip(oracle)
        .map(|(k, o)| (lib[k] - o).abs())
        .fold(0.0, f64::max)
}

/// `u_t–i1, u2–i1, u2–i2` with optional tags `i1:{x}`, `i2:{y}`.
pub fn hand_graph() -> FolksonomyGraph {
    let mut g = FolksonomyGraph::new();
    g.add_content("u_t", "i1", &["x"], 0).unwrap();
    g.add_content("u2", "i2", &["y"], 0).unwrap();
    let v = g.vocabulary().clone();
    g.insert_user_item(v.intern_user("u2"), v.intern_item("i1"), 0);
    g
}
