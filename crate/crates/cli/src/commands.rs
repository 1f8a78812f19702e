// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use ppliers_core::eval::{run_link_prediction, SpearmanMode};
use ppliers_core::format::format_float;
use ppliers_core::graph::{FolksonomyGraph, Timestamp};
use ppliers_core::recommend::{rank, Algorithm, AlgorithmKind};
use ppliers_core::sim::synth::{
    agent_ids, generate_content_stream, generate_folksonomy, generate_synthetic_contacts, ContentStreamParams,
    FolksonomyParams,
};
use ppliers_core::sim::{correlation_for_run, write_correlation_csv, write_metrics_csv, SimConfig, SimError, Simulator};
use ppliers_core::trace::{read_contacts, read_contents, write_contacts, write_contents};

use crate::config;
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(CliError::from)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(CliError::from)
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Other(anyhow::anyhow!("writing {}: {e}", path.display()))
}

pub fn read_graph(path: &Path) -> CliResult<FolksonomyGraph> {
    FolksonomyGraph::read_tsv(open(path)?).map_err(|e| CliError::snapshot(path, e))
}

pub struct SimulateArgs {
    pub contacts: PathBuf,
    pub contents: PathBuf,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = match &args.config {
        Some(p) => config::load(p)?,
        None => SimConfig::default(),
    };
    let contacts = read_contacts(open(&args.contacts)?).map_err(|e| CliError::trace(&args.contacts, e))?;
    let contents = read_contents(open(&args.contents)?).map_err(|e| CliError::trace(&args.contents, e))?;
    info!("{} contacts, {} contents", contacts.len(), contents.len());

    let mut manifest = Manifest::new("simulate", cfg.rng_seed);
    for (k, v) in config::entries(&cfg) {
        manifest.config(k, v);
    }
    manifest.input("contacts", &args.contacts)?.input("contents", &args.contents)?;
    if let Some(p) = &args.config {
        manifest.input("config", p)?;
    }

    let event_error = |e: SimError| match e {
        SimError::InvalidEvent { kind, index, reason } => {
            let file = if kind == "contact" { &args.contacts } else { &args.contents };
            CliError::Parse(format!("{}: {kind} event {}: {reason}", file.display(), index + 1))
        }
        SimError::Config(m) => CliError::Config(m),
        other => CliError::Parse(format!("{}: {other}", args.contents.display())),
    };
    let mut sim = Simulator::from_traces(cfg.clone(), &contacts, &contents).map_err(event_error)?;
    let rows = sim.run(&contacts, &contents).map_err(event_error)?;
    info!("{} metric rows", rows.len());

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let metrics = args.out.join("metrics.csv");
    let mut w = create(&metrics)?;
    write_metrics_csv(&mut w, &rows).and_then(|_| w.flush()).map_err(io(&metrics))?;
    let correlation = args.out.join("correlation.csv");
    let mut w = create(&correlation)?;
    write_correlation_csv(&mut w, &correlation_for_run(&rows)).and_then(|_| w.flush()).map_err(io(&correlation))?;

    manifest.output("metrics", &metrics)?.output("correlation", &correlation)?;
    let conventions = [
        ("empty_graph_view", "the Jaccard index of two empty edge sets is 1"),
        (
            "empty_recommendations",
            "agents whose local and global lists are both empty are left out of the recommendation averages; \
             with no qualifying agent the averages are 1",
        ),
        (
            "recommendation_lists",
            if cfg.top_n.is_some() { "truncated to top_n" } else { "untruncated" },
        ),
        ("spearman_mode", if cfg.spearman_mode == SpearmanMode::Literal { "literal" } else { "corrected" }),
        (
            "recommendation_metrics",
            if cfg.recommendation_metrics { "computed" } else { "skipped and reported as 1" },
        ),
    ];
    for (k, v) in conventions {
        manifest.conventions.insert(k.into(), v.into());
    }
    manifest.write(&args.out.join("manifest.json"))?;
    Ok(())
}

/// Parses a comma-separated list of algorithm names.
pub fn algorithm_kinds(list: &str) -> CliResult<Vec<AlgorithmKind>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<AlgorithmKind>().map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

pub struct LinkPredArgs {
    pub graph: PathBuf,
    pub algorithms: String,
    pub k: Vec<usize>,
    pub lambda: f64,
    pub seed: u64,
    pub top_n: Option<usize>,
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

pub fn linkpred(args: &LinkPredArgs) -> CliResult<()> {
    let kinds = algorithm_kinds(&args.algorithms)?;
    if kinds.is_empty() {
        return Err(CliError::Config("no algorithm given".into()));
    }
    if !(0.0..=1.0).contains(&args.lambda) {
        return Err(CliError::Config(format!("lambda must be in [0, 1], got {}", args.lambda)));
    }
    if args.k.contains(&0) || (args.k.is_empty() && kinds.iter().any(|k| k.takes_k())) {
        return Err(CliError::Config("k values must be positive".into()));
    }
    let algorithms: Vec<Algorithm> = kinds
        .iter()
        .flat_map(|&kind| {
            let ks = if kind.takes_k() { args.k.clone() } else { vec![0] };
            ks.into_iter().map(move |k| kind.with_params(args.lambda, k))
        })
        .collect();
    let graph = read_graph(&args.graph)?;
    info!("{} users, {} items, {} tags", graph.user_count(), graph.item_count(), graph.tag_count());
    let rows = run_link_prediction(&graph, &algorithms, args.seed, args.top_n);

    let mut text = String::from("algorithm,k,precision,recall,removed_fraction\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.algorithm.name(),
            r.algorithm.k().map(|k| k.to_string()).unwrap_or_default(),
            format_float(r.precision),
            format_float(r.recall),
            format_float(r.removed_fraction)
        ));
    }
    match &args.output {
        Some(p) => std::fs::write(p, &text).map_err(io(p))?,
        None => std::io::stdout().write_all(text.as_bytes()).context("writing standard output")?,
    }
    if let Some(path) = &args.manifest {
        let mut m = Manifest::new("linkpred", args.seed);
        m.config("algorithms", &args.algorithms)
            .config("k", args.k.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
            .config("lambda", args.lambda)
            .config("top_n", args.top_n.map_or("none".into(), |n| n.to_string()));
        m.input("graph", &args.graph)?;
        if let Some(p) = &args.output {
            m.output("report", p)?;
        }
        m.write(path)?;
    }
    Ok(())
}

pub struct RecommendArgs {
    pub graph: PathBuf,
    pub user: String,
    pub algorithm: String,
    pub lambda: f64,
    pub k: usize,
    pub top_n: Option<usize>,
}

pub fn recommend(args: &RecommendArgs) -> CliResult<String> {
    let kind: AlgorithmKind = args.algorithm.parse().map_err(|e: ppliers_core::recommend::UnknownAlgorithm| {
        CliError::Config(e.to_string())
    })?;
    if !(0.0..=1.0).contains(&args.lambda) {
        return Err(CliError::Config(format!("lambda must be in [0, 1], got {}", args.lambda)));
    }
    if kind.takes_k() && args.k == 0 {
        return Err(CliError::Config("k must be positive".into()));
    }
    let graph = read_graph(&args.graph)?;
    let user = graph.user(&args.user).ok_or_else(|| CliError::UnknownUser(args.user.clone()))?;
    let ranked = rank(&kind.with_params(args.lambda, args.k).score(&graph, user), &graph, args.top_n);
    let mut out = String::from("rank,item,score\n");
    for (pos, r) in ranked.ranked.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", pos + 1, r.key, format_float(r.score)));
    }
    Ok(out)
}

pub struct GenTracesArgs {
    pub agents: usize,
    pub communities: usize,
    pub rewiring: f64,
    pub duration: Timestamp,
    pub seed: u64,
    pub out: PathBuf,
    pub contents: bool,
    pub content_rate: f64,
    pub tags: usize,
    pub creator_exponent: f64,
    pub tag_exponent: f64,
    pub tags_per_item_exponent: f64,
    pub folksonomy: bool,
}

pub fn gen_traces(args: &GenTracesArgs) -> CliResult<()> {
    let bad = |m: String| Err(CliError::Config(m));
    if args.agents < 2 {
        return bad("need at least 2 agents".into());
    }
    if args.communities == 0 || args.communities > args.agents {
        return bad(format!("communities must be in [1, {}], got {}", args.agents, args.communities));
    }
    if !(0.0..=1.0).contains(&args.rewiring) {
        return bad(format!("rewiring must be in [0, 1], got {}", args.rewiring));
    }
    if args.duration < 0 {
        return bad(format!("duration must be non-negative, got {}", args.duration));
    }
    if args.contents && (args.content_rate <= 0.0 || args.tags == 0) {
        return bad("content rate and tag count must be positive".into());
    }
    for (name, x) in [
        ("creator", args.creator_exponent),
        ("tag", args.tag_exponent),
        ("tags per item", args.tags_per_item_exponent),
    ] {
        if !(x > 0.0 && x.is_finite()) {
            return bad(format!("{name} exponent must be positive, got {x}"));
        }
    }

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = Manifest::new("gen-traces", args.seed);
    manifest
        .config("agents", args.agents)
        .config("communities", args.communities)
        .config("rewiring", args.rewiring)
        .config("duration", args.duration);

    let contacts = generate_synthetic_contacts(args.agents, args.communities, args.rewiring, args.duration, args.seed);
    let path = args.out.join("contacts.csv");
    let mut w = create(&path)?;
    write_contacts(&mut w, &contacts).and_then(|_| w.flush()).map_err(io(&path))?;
    manifest.output("contacts", &path)?;
    info!("{} contacts", contacts.len());

    if args.contents {
        let params = ContentStreamParams {
            rate: args.content_rate,
            start: 0,
            end: args.duration,
            creator_exponent: args.creator_exponent,
            n_tags: args.tags,
            tag_exponent: args.tag_exponent,
            tags_per_item_exponent: args.tags_per_item_exponent,
        };
        manifest
            .config("content_rate", params.rate)
            .config("tags", params.n_tags)
            .config("creator_exponent", params.creator_exponent)
            .config("tag_exponent", params.tag_exponent)
            .config("tags_per_item_exponent", params.tags_per_item_exponent);
        // a derived seed keeps the two streams independent
        let contents = generate_content_stream(&agent_ids(args.agents), &params, args.seed.wrapping_add(1));
        let path = args.out.join("contents.csv");
        let mut w = create(&path)?;
        write_contents(&mut w, &contents).and_then(|_| w.flush()).map_err(io(&path))?;
        manifest.output("contents", &path)?;
        info!("{} contents", contents.len());
    }

    if args.folksonomy {
        let graph = generate_folksonomy(&FolksonomyParams::default(), args.seed);
        let path = args.out.join("folksonomy.tsv");
        let mut w = create(&path)?;
        graph.write_tsv(&mut w).and_then(|_| w.flush()).map_err(io(&path))?;
        manifest.output("folksonomy", &path)?;
    }
    manifest.write(&args.out.join("manifest.json"))?;
    Ok(())
}
