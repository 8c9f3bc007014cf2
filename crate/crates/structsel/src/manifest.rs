//! Run manifests written next to every command's outputs.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use structsel_core::rng::purpose;

use crate::error::Result;
use crate::json::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct SeedInfo {
    pub seed: u64,
    /// ChaCha20 stream ids combined with `seed` for each purpose.
    pub streams: Vec<(String, u64)>,
}

impl SeedInfo {
    pub fn new(seed: u64) -> Self {
        let streams = [
            ("sketch", purpose::SKETCH),
            ("iter_init", purpose::ITER_INIT),
            ("random_designs", purpose::RANDOM_DESIGNS),
            ("noise", purpose::NOISE),
            ("lowrank", purpose::LOWRANK),
        ]
        .into_iter()
        .map(|(n, id)| (n.to_string(), id))
        .collect();
        Self { seed, streams }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub seeds: SeedInfo,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Per-step wall-clock seconds.
    pub timings: Vec<(String, f64)>,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl Manifest {
    pub fn start(command: &str, config: Value, seed: u64) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            seeds: SeedInfo::new(seed),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            started_unix_s: now(),
            finished_unix_s: 0.0,
        }
    }

    pub fn finish(mut self, dir: &Path) -> Result<()> {
        self.finished_unix_s = now();
        self.outputs.push(MANIFEST_FILE.into());
        write_json(&dir.join(MANIFEST_FILE), &self)
    }
}
