//! On-disk problem format: `problem.json` header plus `problem.bin`, a
//! little-endian `f64` payload with each block stored column-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use structsel_core::nalgebra::DVector;
use structsel_core::oed::{DesignProblem, Forward, GeneratorConfig};
use structsel_core::Matrix;

use crate::error::{Error, Result};
use crate::json::{read_json, write_json};

pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_FILE: &str = "problem.json";
pub const PAYLOAD_FILE: &str = "problem.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Byte offset into the payload.
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemHeader {
    pub format_version: u32,
    pub kind: String,
    pub parameter_dim: usize,
    pub observation_dim: usize,
    pub mode_sizes: Vec<usize>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub payload: String,
    pub blocks: Vec<Block>,
}

/// Writes `p` into `dir` and returns the header.
pub fn save_problem(dir: &Path, p: &DesignProblem) -> Result<ProblemHeader> {
    let forward = p
        .forward
        .as_dense()
        .ok_or_else(|| Error::Format("only dense forward operators can be saved".into()))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut blocks = Vec::new();
    let mut bytes: Vec<u8> = Vec::new();
    let mut push = |name: &str, rows: usize, cols: usize, values: &[f64]| {
        blocks.push(Block {
            name: name.into(),
            rows,
            cols,
            offset: bytes.len() as u64,
        });
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    };
    push("forward", forward.nrows(), forward.ncols(), forward.as_slice());
    push(
        "prior_sqrt",
        p.prior_sqrt.nrows(),
        p.prior_sqrt.ncols(),
        p.prior_sqrt.as_slice(),
    );
    if let (Some(u), Some(d)) = (&p.u_true, &p.data) {
        push("u_true", u.len(), 1, u.as_slice());
        push("data", d.len(), 1, d.as_slice());
    }
    let header = ProblemHeader {
        format_version: FORMAT_VERSION,
        kind: p.generator.kind().into(),
        parameter_dim: p.parameter_dim(),
        observation_dim: p.observation_dim(),
        mode_sizes: p.mode_sizes().to_vec(),
        noise_sigma: p.noise_sigma,
        seed: p.seed,
        generator: p.generator.clone(),
        payload: PAYLOAD_FILE.into(),
        blocks,
    };
    let bin = dir.join(PAYLOAD_FILE);
    fs::write(&bin, bytes).map_err(|e| Error::io(bin, e))?;
    write_json(&dir.join(HEADER_FILE), &header)?;
    Ok(header)
}

/// Reads a problem directory (or the path of its `problem.json`).
pub fn load_problem(path: &Path) -> Result<DesignProblem> {
    let header_path = if path.is_dir() {
        path.join(HEADER_FILE)
    } else {
        path.to_path_buf()
    };
    let header: ProblemHeader = read_json(&header_path)?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported problem format version {}",
            header.format_version
        )));
    }
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let bin_path = dir.join(&header.payload);
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let block = |name: &str| -> Result<Option<Matrix>> {
        let Some(b) = header.blocks.iter().find(|b| b.name == name) else {
            return Ok(None);
        };
        let start = b.offset as usize;
        let end = start + 8 * b.rows * b.cols;
        if end > bytes.len() {
            return Err(Error::Format(format!("block {name} runs past the end of the payload")));
        }
        let values = bytes[start..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Some(Matrix::from_vec(b.rows, b.cols, values)))
    };
    let forward = block("forward")?.ok_or_else(|| Error::Format("missing forward block".into()))?;
    let prior_sqrt = block("prior_sqrt")?.ok_or_else(|| Error::Format("missing prior_sqrt block".into()))?;
    let mut p = DesignProblem::new(
        Forward::Dense(forward),
        prior_sqrt,
        header.noise_sigma,
        header.mode_sizes,
    )?;
    if let (Some(u), Some(d)) = (block("u_true")?, block("data")?) {
        p = p.with_truth(
            DVector::from_column_slice(u.as_slice()),
            DVector::from_column_slice(d.as_slice()),
        )?;
    }
    Ok(p.with_generator(header.generator, header.seed))
}
