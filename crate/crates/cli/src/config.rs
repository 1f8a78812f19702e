// SPDX-License-Identifier: Apache-2.0

//! `key = value` simulation config files. Blank lines and `#` comments are
//! ignored; unknown or repeated keys are errors.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use ppliers_core::eval::SpearmanMode;
use ppliers_core::graph::Timestamp;
use ppliers_core::sim::policy::DEFAULT_HISTORY_SPAN;
use ppliers_core::sim::{PolicyKind, PolicySpec, SimConfig};

use crate::error::{CliError, CliResult};

pub const KEYS: &[&str] = &[
    "step_length",
    "lambda",
    "expiry_window",
    "metric_cadence",
    "top_n",
    "spearman_mode",
    "rng_seed",
    "download_policy",
    "download_history_span",
    "duration",
    "recommendation_metrics",
];

pub fn load(path: &Path) -> CliResult<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

fn value<T: FromStr>(raw: &str) -> Result<T, String> {
    raw.parse().map_err(|_| format!("invalid value `{raw}`"))
}

/// `none` (or an empty value) means unset.
fn optional<T: FromStr>(raw: &str) -> Result<Option<T>, String> {
    if raw.is_empty() || raw == "none" {
        Ok(None)
    } else {
        value(raw).map(Some)
    }
}

pub fn parse(text: &str, origin: &str) -> CliResult<SimConfig> {
    let mut cfg = SimConfig::default();
    let mut policy: Option<PolicyKind> = None;
    let mut span: Option<Timestamp> = None;
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| CliError::Config(format!("{origin}:{}: {msg}", idx + 1));
        let (key, val) = line.split_once('=').ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
        let (key, val) = (key.trim(), val.trim());
        if !KEYS.contains(&key) {
            return Err(fail(format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_owned()) {
            return Err(fail(format!("duplicate key `{key}`")));
        }
        let set = match key {
            "step_length" => value(val).map(|v| cfg.step_length = v),
            "lambda" => value(val).map(|v| cfg.lambda = v),
            "expiry_window" => optional(val).map(|v| cfg.expiry_window = v),
            "metric_cadence" => value(val).map(|v| cfg.metric_cadence = v),
            "top_n" => optional(val).map(|v| cfg.top_n = v),
            "spearman_mode" => val.parse().map(|v| cfg.spearman_mode = v),
            "rng_seed" => value(val).map(|v| cfg.rng_seed = v),
            "download_policy" => {
                if val.is_empty() || val == "none" {
                    policy = None;
                    Ok(())
                } else {
                    val.parse().map(|v| policy = Some(v))
                }
            }
            "download_history_span" => optional(val).map(|v| span = v),
            "duration" => optional(val).map(|v| cfg.duration = v),
            "recommendation_metrics" => value(val).map(|v| cfg.recommendation_metrics = v),
            _ => unreachable!("key list checked above"),
        };
        set.map_err(fail)?;
    }
    cfg.download_policy = policy.map(|kind| PolicySpec { kind, history_span: span.unwrap_or(DEFAULT_HISTORY_SPAN) });
    if cfg.download_policy.is_none() && span.is_some() {
        return Err(CliError::Config(format!("{origin}: download_history_span set without download_policy")));
    }
    cfg.validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    Ok(cfg)
}

/// Every resolved setting, in key order, for the run manifest.
pub fn entries(cfg: &SimConfig) -> Vec<(&'static str, String)> {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
    let mode = match cfg.spearman_mode {
        SpearmanMode::Corrected => "corrected",
        SpearmanMode::Literal => "literal",
    };
    vec![
        ("step_length", cfg.step_length.to_string()),
        ("lambda", cfg.lambda.to_string()),
        ("expiry_window", opt(cfg.expiry_window.map(|w| w.to_string()))),
        ("metric_cadence", cfg.metric_cadence.to_string()),
        ("top_n", opt(cfg.top_n.map(|n| n.to_string()))),
        ("spearman_mode", mode.into()),
        ("rng_seed", cfg.rng_seed.to_string()),
        ("download_policy", opt(cfg.download_policy.map(|p| p.kind.to_string()))),
        ("download_history_span", opt(cfg.download_policy.map(|p| p.history_span.to_string()))),
        ("duration", opt(cfg.duration.map(|d| d.to_string()))),
        ("recommendation_metrics", cfg.recommendation_metrics.to_string()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(text: &str) -> u8 {
        parse(text, "c").unwrap_err().exit_code()
    }

    #[test]
    fn full_file() {
        let text = "# comment\nstep_length = 30\nlambda = 0.7  # trailing\nexpiry_window = 3600\n\
                    metric_cadence = 5\ntop_n = 10\nspearman_mode = literal\nrng_seed = 9\n\
                    download_policy = percentile:90\ndownload_history_span = 600\nduration = 7200\n\
                    recommendation_metrics = false\n";
        let c = parse(text, "c").unwrap();
        assert_eq!((c.step_length, c.lambda, c.expiry_window, c.metric_cadence), (30, 0.7, Some(3600), 5));
        assert_eq!((c.top_n, c.spearman_mode, c.rng_seed), (Some(10), SpearmanMode::Literal, 9));
        assert_eq!(c.download_policy, Some(PolicySpec { kind: PolicyKind::PercentileThreshold(90.0), history_span: 600 }));
        assert_eq!((c.duration, c.recommendation_metrics), (Some(7200), false));
        assert_eq!(parse(&entries(&c).iter().map(|(k, v)| format!("{k} = {v}\n")).collect::<String>(), "c").unwrap(), c);
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(parse("\n# nothing\n", "c").unwrap(), SimConfig::default());
        let defaults = entries(&SimConfig::default());
        let text: String = defaults.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(parse(&text, "c").unwrap(), SimConfig::default());
    }

    #[test]
    fn errors_cite_lines() {
        let err = parse("lambda = 0.5\nbogus = 1\n", "cfg.txt").unwrap_err();
        assert_eq!(err.to_string(), "cfg.txt:2: unknown key `bogus`");
        assert_eq!(code("step_length = 0\n"), 3);
        assert_eq!(code("lambda = 2\n"), 3);
        assert_eq!(code("lambda\n"), 3);
        assert_eq!(code("lambda = 0.1\nlambda = 0.2\n"), 3);
        assert_eq!(code("download_policy = maybe\n"), 3);
        assert_eq!(code("download_history_span = 10\n"), 3);
    }
}
