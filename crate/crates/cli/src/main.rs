// SPDX-License-Identifier: Apache-2.0

//! `ppliers`: trace replay, link prediction, one-shot recommendation and
//! synthetic trace generation.
//!
//! Exit status: 0 success, 1 I/O failure, 2 malformed input, 3 bad
//! configuration or algorithm name, 4 unknown user.

mod commands;
mod config;
mod error;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::*;
use ppliers_core::graph::Timestamp;

#[derive(Parser)]
#[command(name = "ppliers", version, about = "Tag-based recommendation and opportunistic-network knowledge simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay contact and content traces; writes metrics.csv, correlation.csv and manifest.json.
    Simulate {
        #[arg(long)]
        contacts: PathBuf,
        #[arg(long)]
        contents: PathBuf,
        /// `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Hide one link per eligible user and report precision and recall.
    Linkpred {
        /// Graph snapshot (TSV).
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated: pliers, pliers-tri, probs, heats, hybrid, cf, tagexp.
        #[arg(long, default_value = "pliers,cf,tagexp")]
        algorithms: String,
        /// Neighbourhood sizes for cf and tagexp.
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        k: Vec<usize>,
        /// Affinity weight of pliers-tri, or the ProbS weight of hybrid.
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Truncate each list to its first N items.
        #[arg(long)]
        top_n: Option<usize>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write a run manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Ranked recommendations for one user.
    Recommend {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        user: String,
        #[arg(long, default_value = "pliers")]
        algorithm: String,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        top_n: Option<usize>,
    },
    /// Community contact trace, optionally with a content stream and a static folksonomy.
    GenTraces {
        #[arg(long, default_value_t = 100)]
        agents: usize,
        #[arg(long, default_value_t = 10)]
        communities: usize,
        /// Probability that a contact leaves the agent's community.
        #[arg(long, default_value_t = 0.1)]
        rewiring: f64,
        /// Seconds.
        #[arg(long, default_value_t = 3600)]
        duration: Timestamp,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write contents.csv.
        #[arg(long)]
        contents: bool,
        /// Contents per second.
        #[arg(long, default_value_t = 1.0 / 60.0)]
        content_rate: f64,
        #[arg(long, default_value_t = 200)]
        tags: usize,
        #[arg(long, default_value_t = 1.0)]
        creator_exponent: f64,
        #[arg(long, default_value_t = 1.0)]
        tag_exponent: f64,
        #[arg(long, default_value_t = 2.0)]
        tags_per_item_exponent: f64,
        /// Also write folksonomy.tsv, a static long-tail folksonomy.
        #[arg(long)]
        folksonomy: bool,
    },
}

fn dispatch(cmd: Command) -> error::CliResult<()> {
    match cmd {
        Command::Simulate { contacts, contents, config, out } => {
            simulate(&SimulateArgs { contacts, contents, config, out })
        }
        Command::Linkpred { graph, algorithms, k, lambda, seed, top_n, output, manifest } => {
            linkpred(&LinkPredArgs { graph, algorithms, k, lambda, seed, top_n, output, manifest })
        }
        Command::Recommend { graph, user, algorithm, lambda, k, top_n } => {
            let text = recommend(&RecommendArgs { graph, user, algorithm, lambda, k, top_n })?;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| anyhow::anyhow!("writing standard output: {e}"))?;
            Ok(())
        }
        Command::GenTraces {
            agents,
            communities,
            rewiring,
            duration,
            seed,
            out,
            contents,
            content_rate,
            tags,
            creator_exponent,
            tag_exponent,
            tags_per_item_exponent,
            folksonomy,
        } => gen_traces(&GenTracesArgs {
            agents,
            communities,
            rewiring,
            duration,
            seed,
            out,
            contents,
            content_rate,
            tags,
            creator_exponent,
            tag_exponent,
            tags_per_item_exponent,
            folksonomy,
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
