// SPDX-License-Identifier: Apache-2.0

//! Timestamped tripartite folksonomy graph.
//!
//! A graph holds three node sets (users, items, tags) and two edge sets:
//! user–item links (`E`) and item–tag links (`F`). The user–tag relation is
//! never stored; [`FolksonomyGraph::user_tags`] derives it on demand.
//!
//! String keys are interned into a [`Vocabulary`] that can be shared by many
//! graphs. Graphs sharing a vocabulary merge and compare on integer handles;
//! graphs with distinct vocabularies fall back to key translation.
//!
//! Node sets are exactly the endpoints of the stored edges: a user or tag
//! with no incident edge is not part of the graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use parking_lot::RwLock;
use thiserror::Error;

/// Seconds since the simulation epoch.
pub type Timestamp = i64;

macro_rules! handle {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

handle!(
    /// Interned user handle.
    UserId
);
handle!(
    /// Interned item handle.
    ItemId
);
handle!(
    /// Interned tag handle.
    TagId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    User,
    Item,
    Tag,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::User => "user",
            EntityKind::Item => "item",
            EntityKind::Tag => "tag",
        })
    }
}

/// A node named by kind and key. The same key may exist under two kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId {
    pub kind: EntityKind,
    pub key: Arc<str>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("content `{0}` has no tags")]
    EmptyTags(String),
    #[error("expiry window must be positive, got {0}")]
    NonPositiveWindow(Timestamp),
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: item `{item}` has tag records but no user record")]
    Dangling { line: usize, item: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Default)]
struct Interner {
    ids: HashMap<Arc<str>, u32>,
    keys: Vec<Arc<str>>,
}

impl Interner {
    fn intern(&mut self, key: &str) -> u32 {
        if let Some(&id) = self.ids.get(key) {
            return id;
        }
        let id = u32::try_from(self.keys.len()).expect("interner overflow");
        let key: Arc<str> = Arc::from(key);
        self.keys.push(key.clone());
        self.ids.insert(key, id);
        id
    }
}

/// Append-only string interner shared between graphs. Handles stay valid for
/// the lifetime of the vocabulary.
#[derive(Default)]
pub struct Vocabulary {
    users: RwLock<Interner>,
    items: RwLock<Interner>,
    tags: RwLock<Interner>,
}

impl fmt::Debug for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Vocabulary")
            .field("users", &self.users.read().keys.len())
            .field("items", &self.items.read().keys.len())
            .field("tags", &self.tags.read().keys.len())
            .finish()
    }
}

impl Vocabulary {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn intern_user(&self, key: &str) -> UserId {
        if let Some(&id) = self.users.read().ids.get(key) {
            return UserId(id);
        }
        UserId(self.users.write().intern(key))
    }

    pub fn intern_item(&self, key: &str) -> ItemId {
        if let Some(&id) = self.items.read().ids.get(key) {
            return ItemId(id);
        }
        ItemId(self.items.write().intern(key))
    }

    pub fn intern_tag(&self, key: &str) -> TagId {
        if let Some(&id) = self.tags.read().ids.get(key) {
            return TagId(id);
        }
        TagId(self.tags.write().intern(key))
    }

    pub fn lookup_user(&self, key: &str) -> Option<UserId> {
        self.users.read().ids.get(key).copied().map(UserId)
    }

    pub fn lookup_item(&self, key: &str) -> Option<ItemId> {
        self.items.read().ids.get(key).copied().map(ItemId)
    }

    pub fn lookup_tag(&self, key: &str) -> Option<TagId> {
        self.tags.read().ids.get(key).copied().map(TagId)
    }

    pub fn user_key(&self, id: UserId) -> Arc<str> {
        self.users.read().keys[id.index()].clone()
    }

    pub fn item_key(&self, id: ItemId) -> Arc<str> {
        self.items.read().keys[id.index()].clone()
    }

    pub fn tag_key(&self, id: TagId) -> Arc<str> {
        self.tags.read().keys[id.index()].clone()
    }

    /// Upper bound (exclusive) on item handle indices issued so far.
    pub fn item_capacity(&self) -> usize {
        self.items.read().keys.len()
    }

    pub fn user_capacity(&self) -> usize {
        self.users.read().keys.len()
    }

    pub fn tag_capacity(&self) -> usize {
        self.tags.read().keys.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ItemNode {
    created_at: Timestamp,
    users: BTreeMap<UserId, Timestamp>,
    tags: BTreeMap<TagId, Timestamp>,
}

/// One edge of the flattened graph, on interned handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlatEdge {
    UserItem(UserId, ItemId),
    ItemTag(ItemId, TagId),
}

/// One edge of the flattened graph as a canonical `(kind, key, kind, key)`
/// tuple, comparable across vocabularies.
pub type KeyedEdge = (EntityKind, Arc<str>, EntityKind, Arc<str>);

#[derive(Clone)]
pub struct FolksonomyGraph {
    vocab: Arc<Vocabulary>,
    user_items: BTreeMap<UserId, BTreeSet<ItemId>>,
    items: BTreeMap<ItemId, ItemNode>,
    tag_items: BTreeMap<TagId, BTreeSet<ItemId>>,
    n_user_item: usize,
    n_item_tag: usize,
}

impl Default for FolksonomyGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for FolksonomyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FolksonomyGraph")
            .field("users", &self.user_items.len())
            .field("items", &self.items.len())
            .field("tags", &self.tag_items.len())
            .field("user_item_edges", &self.n_user_item)
            .field("item_tag_edges", &self.n_item_tag)
            .finish()
    }
}

impl FolksonomyGraph {
    /// Empty graph with a private vocabulary.
    pub fn new() -> Self {
        Self::with_vocabulary(Vocabulary::new())
    }

    /// Empty graph interning into `vocab`.
    pub fn with_vocabulary(vocab: Arc<Vocabulary>) -> Self {
        Self {
            vocab,
            user_items: BTreeMap::new(),
            items: BTreeMap::new(),
            tag_items: BTreeMap::new(),
            n_user_item: 0,
            n_item_tag: 0,
        }
    }

    /// Empty graph sharing this graph's vocabulary.
    pub fn empty_like(&self) -> Self {
        Self::with_vocabulary(self.vocab.clone())
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn shares_vocabulary(&self, other: &FolksonomyGraph) -> bool {
        Arc::ptr_eq(&self.vocab, &other.vocab)
    }

    /// Records that `creator` created `item` with `tags` at `time`.
    ///
    /// Re-announcing known content is idempotent; an earlier timestamp for
    /// an already known item or edge replaces the later one.
    pub fn add_content<S: AsRef<str>>(
        &mut self,
        creator: &str,
        item: &str,
        tags: &[S],
        time: Timestamp,
    ) -> Result<(), GraphError> {
        if tags.is_empty() {
            return Err(GraphError::EmptyTags(item.to_owned()));
        }
        let user = self.vocab.intern_user(creator);
        let item_id = self.vocab.intern_item(item);
        self.insert_user_item(user, item_id, time);
        for tag in tags {
            let tag = self.vocab.intern_tag(tag.as_ref());
            self.insert_item_tag(item_id, tag, time);
        }
        Ok(())
    }

    /// Inserts a user–item edge, creating the item if needed. Returns true
    /// when the edge is new.
    pub fn insert_user_item(&mut self, user: UserId, item: ItemId, time: Timestamp) -> bool {
        let node = self.items.entry(item).or_insert_with(|| ItemNode {
            created_at: time,
            users: BTreeMap::new(),
            tags: BTreeMap::new(),
        });
        node.created_at = node.created_at.min(time);
        let fresh = match node.users.get_mut(&user) {
            Some(t) => {
                *t = (*t).min(time);
                false
            }
            None => {
                node.users.insert(user, time);
                true
            }
        };
        if fresh {
            self.user_items.entry(user).or_default().insert(item);
            self.n_user_item += 1;
        }
        fresh
    }

    /// Inserts an item–tag edge, creating the item if needed.
    pub fn insert_item_tag(&mut self, item: ItemId, tag: TagId, time: Timestamp) -> bool {
        let node = self.items.entry(item).or_insert_with(|| ItemNode {
            created_at: time,
            users: BTreeMap::new(),
            tags: BTreeMap::new(),
        });
        node.created_at = node.created_at.min(time);
        let fresh = match node.tags.get_mut(&tag) {
            Some(t) => {
                *t = (*t).min(time);
                false
            }
            None => {
                node.tags.insert(tag, time);
                true
            }
        };
        if fresh {
            self.tag_items.entry(tag).or_default().insert(item);
            self.n_item_tag += 1;
        }
        fresh
    }

    /// Removes a user–item edge. The item itself is kept even if it loses
    /// its last user; a user left without items disappears.
    pub fn remove_user_item(&mut self, user: UserId, item: ItemId) -> bool {
        let Some(node) = self.items.get_mut(&item) else {
            return false;
        };
        if node.users.remove(&user).is_none() {
            return false;
        }
        if let Some(set) = self.user_items.get_mut(&user) {
            set.remove(&item);
            if set.is_empty() {
                self.user_items.remove(&user);
            }
        }
        self.n_user_item -= 1;
        true
    }

    /// Component-wise union; on timestamp conflicts the earlier one wins.
    pub fn merge(&mut self, other: &FolksonomyGraph) {
        if self.shares_vocabulary(other) {
            for (&item, node) in &other.items {
                for (&user, &t) in &node.users {
                    self.insert_user_item(user, item, t);
                }
                for (&tag, &t) in &node.tags {
                    self.insert_item_tag(item, tag, t);
                }
                let mine = self.items.get_mut(&item).expect("item inserted above");
                mine.created_at = mine.created_at.min(node.created_at);
            }
            return;
        }
        for (&item, node) in &other.items {
            let local = self.vocab.intern_item(&other.vocab.item_key(item));
            for (&user, &t) in &node.users {
                let user = self.vocab.intern_user(&other.vocab.user_key(user));
                self.insert_user_item(user, local, t);
            }
            for (&tag, &t) in &node.tags {
                let tag = self.vocab.intern_tag(&other.vocab.tag_key(tag));
                self.insert_item_tag(local, tag, t);
            }
            let mine = self.items.entry(local).or_insert_with(|| ItemNode {
                created_at: node.created_at,
                users: BTreeMap::new(),
                tags: BTreeMap::new(),
            });
            mine.created_at = mine.created_at.min(node.created_at);
        }
    }

    /// Copy keeping only items created at or after `now - window`, with
    /// their incident edges; users and tags left without edges are dropped.
    pub fn prune_older_than(&self, now: Timestamp, window: Timestamp) -> Result<Self, GraphError> {
        if window <= 0 {
            return Err(GraphError::NonPositiveWindow(window));
        }
        let cutoff = now.saturating_sub(window);
        if self.items.values().all(|n| n.created_at >= cutoff) {
            return Ok(self.clone());
        }
        let mut out = self.empty_like();
        for (&item, node) in self.items.iter().filter(|(_, n)| n.created_at >= cutoff) {
            for &user in node.users.keys() {
                out.user_items.entry(user).or_default().insert(item);
            }
            for &tag in node.tags.keys() {
                out.tag_items.entry(tag).or_default().insert(item);
            }
            out.n_user_item += node.users.len();
            out.n_item_tag += node.tags.len();
            out.items.insert(item, node.clone());
        }
        Ok(out)
    }

    /// The flattened adjacency list, `|E| + |F|` edges.
    pub fn flatten(&self) -> HashSet<FlatEdge> {
        let mut out = HashSet::with_capacity(self.edge_count());
        for (&item, node) in &self.items {
            out.extend(node.users.keys().map(|&u| FlatEdge::UserItem(u, item)));
            out.extend(node.tags.keys().map(|&t| FlatEdge::ItemTag(item, t)));
        }
        out
    }

    /// The flattened adjacency list with string keys.
    pub fn flatten_keyed(&self) -> BTreeSet<KeyedEdge> {
        let mut out = BTreeSet::new();
        for (&item, node) in &self.items {
            let ik = self.vocab.item_key(item);
            for &u in node.users.keys() {
                out.insert((EntityKind::User, self.vocab.user_key(u), EntityKind::Item, ik.clone()));
            }
            for &t in node.tags.keys() {
                out.insert((EntityKind::Item, ik.clone(), EntityKind::Tag, self.vocab.tag_key(t)));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn user_count(&self) -> usize {
        self.user_items.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn tag_count(&self) -> usize {
        self.tag_items.len()
    }

    /// `|E|`
    pub fn user_item_count(&self) -> usize {
        self.n_user_item
    }

    /// `|F|`
    pub fn item_tag_count(&self) -> usize {
        self.n_item_tag
    }

    pub fn edge_count(&self) -> usize {
        self.n_user_item + self.n_item_tag
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_items.keys().copied()
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.items.keys().copied()
    }

    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.tag_items.keys().copied()
    }

    pub fn contains_user(&self, user: UserId) -> bool {
        self.user_items.contains_key(&user)
    }

    pub fn contains_item(&self, item: ItemId) -> bool {
        self.items.contains_key(&item)
    }

    pub fn has_user_item(&self, user: UserId, item: ItemId) -> bool {
        self.items.get(&item).is_some_and(|n| n.users.contains_key(&user))
    }

    /// Handle of a user present in this graph.
    pub fn user(&self, key: &str) -> Option<UserId> {
        self.vocab.lookup_user(key).filter(|u| self.contains_user(*u))
    }

    /// Handle of an item present in this graph.
    pub fn item(&self, key: &str) -> Option<ItemId> {
        self.vocab.lookup_item(key).filter(|i| self.contains_item(*i))
    }

    /// Handle of a tag present in this graph.
    pub fn tag(&self, key: &str) -> Option<TagId> {
        self.vocab.lookup_tag(key).filter(|t| self.tag_items.contains_key(t))
    }

    pub fn user_key(&self, user: UserId) -> Arc<str> {
        self.vocab.user_key(user)
    }

    pub fn item_key(&self, item: ItemId) -> Arc<str> {
        self.vocab.item_key(item)
    }

    pub fn tag_key(&self, tag: TagId) -> Arc<str> {
        self.vocab.tag_key(tag)
    }

    pub fn items_of_user(&self, user: UserId) -> impl Iterator<Item = ItemId> + '_ {
        self.user_items.get(&user).into_iter().flatten().copied()
    }

    pub fn users_of_item(&self, item: ItemId) -> impl Iterator<Item = UserId> + '_ {
        self.items.get(&item).into_iter().flat_map(|n| n.users.keys().copied())
    }

    pub fn tags_of_item(&self, item: ItemId) -> impl Iterator<Item = TagId> + '_ {
        self.items.get(&item).into_iter().flat_map(|n| n.tags.keys().copied())
    }

    pub fn items_of_tag(&self, tag: TagId) -> impl Iterator<Item = ItemId> + '_ {
        self.tag_items.get(&tag).into_iter().flatten().copied()
    }

    /// `k_i(u)`: number of items linked to the user.
    pub fn user_degree(&self, user: UserId) -> usize {
        self.user_items.get(&user).map_or(0, BTreeSet::len)
    }

    /// `k_u(i)`: item popularity, the number of linked users.
    pub fn item_popularity(&self, item: ItemId) -> usize {
        self.items.get(&item).map_or(0, |n| n.users.len())
    }

    /// `k_t(i)`: number of tags on the item.
    pub fn item_tag_degree(&self, item: ItemId) -> usize {
        self.items.get(&item).map_or(0, |n| n.tags.len())
    }

    /// `k_i(t)`: number of items carrying the tag.
    pub fn tag_degree(&self, tag: TagId) -> usize {
        self.tag_items.get(&tag).map_or(0, BTreeSet::len)
    }

    pub fn item_created_at(&self, item: ItemId) -> Option<Timestamp> {
        self.items.get(&item).map(|n| n.created_at)
    }

    pub fn user_item_time(&self, user: UserId, item: ItemId) -> Option<Timestamp> {
        self.items.get(&item).and_then(|n| n.users.get(&user).copied())
    }

    pub fn item_tag_time(&self, item: ItemId, tag: TagId) -> Option<Timestamp> {
        self.items.get(&item).and_then(|n| n.tags.get(&tag).copied())
    }

    /// Derived user–tag relation: tags carried by any item of the user.
    pub fn user_tags(&self, user: UserId) -> BTreeSet<TagId> {
        self.items_of_user(user).flat_map(|i| self.tags_of_item(i)).collect()
    }

    /// Writes the snapshot TSV: `UI` records then `IT` records, each sorted
    /// by key.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut ui = Vec::with_capacity(self.n_user_item);
        let mut it = Vec::with_capacity(self.n_item_tag);
        for (&item, node) in &self.items {
            let ik = self.item_key(item);
            for (&u, &t) in &node.users {
                ui.push((self.user_key(u), ik.clone(), t));
            }
            for (&tag, &t) in &node.tags {
                it.push((ik.clone(), self.tag_key(tag), t));
            }
        }
        ui.sort();
        it.sort();
        for (u, i, t) in ui {
            writeln!(out, "UI\t{u}\t{i}\t{t}")?;
        }
        for (i, tag, t) in it {
            writeln!(out, "IT\t{i}\t{tag}\t{t}")?;
        }
        Ok(())
    }

    /// Parses a snapshot TSV. Every item referenced by an `IT` record must
    /// also appear in some `UI` record.
    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self, SnapshotError> {
        let mut graph = FolksonomyGraph::new();
        let mut tag_records = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parse_err = |message: String| SnapshotError::Parse { line: lineno, message };
            if fields.len() != 4 {
                return Err(parse_err(format!("expected 4 tab-separated fields, got {}", fields.len())));
            }
            if fields[1].is_empty() || fields[2].is_empty() {
                return Err(parse_err("empty key".into()));
            }
            let time: Timestamp = fields[3]
                .parse()
                .map_err(|_| parse_err(format!("invalid time `{}`", fields[3])))?;
            match fields[0] {
                "UI" => {
                    let u = graph.vocab.intern_user(fields[1]);
                    let i = graph.vocab.intern_item(fields[2]);
                    graph.insert_user_item(u, i, time);
                }
                "IT" => tag_records.push((lineno, fields[1].to_owned(), fields[2].to_owned(), time)),
                other => return Err(parse_err(format!("unknown record type `{other}`"))),
            }
        }
        for (line, item, tag, time) in tag_records {
            let Some(i) = graph.item(&item) else {
                return Err(SnapshotError::Dangling { line, item });
            };
            let t = graph.vocab.intern_tag(&tag);
            graph.insert_item_tag(i, t, time);
        }
        Ok(graph)
    }

    fn canonical(&self) -> Canonical {
        let mut c = Canonical::default();
        for (&item, node) in &self.items {
            let ik = self.item_key(item);
            c.items.insert(ik.clone(), node.created_at);
            for (&u, &t) in &node.users {
                c.user_items.insert((self.user_key(u), ik.clone()), t);
            }
            for (&tag, &t) in &node.tags {
                c.item_tags.insert((ik.clone(), self.tag_key(tag)), t);
            }
        }
        c
    }
}

#[derive(Default, PartialEq)]
struct Canonical {
    items: BTreeMap<Arc<str>, Timestamp>,
    user_items: BTreeMap<(Arc<str>, Arc<str>), Timestamp>,
    item_tags: BTreeMap<(Arc<str>, Arc<str>), Timestamp>,
}

impl PartialEq for FolksonomyGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.edge_count() != other.edge_count() || self.item_count() != other.item_count() {
            return false;
        }
        if self.shares_vocabulary(other) {
            self.items == other.items
        } else {
            self.canonical() == other.canonical()
        }
    }
}
