// SPDX-License-Identifier: Apache-2.0

//! Run manifests: everything needed to replay a command and check its
//! outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, FileDigest>,
    pub outputs: BTreeMap<String, FileDigest>,
    pub conventions: BTreeMap<String, String>,
    pub started_at_unix_ms: u128,
    pub finished_at_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

pub fn digest(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            config: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            conventions: BTreeMap::new(),
            started_at_unix_ms: now_ms(),
            finished_at_unix_ms: 0,
        }
    }

    pub fn config<K: ToString, V: ToString>(&mut self, key: K, value: V) -> &mut Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, role: &str, path: &Path) -> anyhow::Result<&mut Self> {
        self.inputs.insert(role.to_owned(), digest(path)?);
        Ok(self)
    }

    pub fn output(&mut self, role: &str, path: &Path) -> anyhow::Result<&mut Self> {
        self.outputs.insert(role.to_owned(), digest(path)?);
        Ok(self)
    }

    pub fn write(&mut self, path: &Path) -> anyhow::Result<()> {
        self.finished_at_unix_ms = now_ms();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
