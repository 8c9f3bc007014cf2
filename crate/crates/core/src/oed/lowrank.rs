//! Synthetic problems with a prescribed spectrum of `A`.

use alloc::vec::Vec;

use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};

use super::{DesignProblem, Forward, GeneratorConfig};
use crate::error::{Error, Result};
use crate::math::{exp, ln};
use crate::rng::{purpose, stream};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowRankConfig {
    pub n: usize,
    pub mode_sizes: Vec<usize>,
    pub rank: usize,
    pub decay: f64,
}

impl Default for LowRankConfig {
    fn default() -> Self {
        Self {
            n: 60,
            mode_sizes: alloc::vec![8, 10],
            rank: 10,
            decay: 0.8,
        }
    }
}

impl LowRankConfig {
    /// `σ_i = decay^i` for `i < rank`.
    pub fn singular_values(&self) -> Vec<f64> {
        (0..self.rank)
            .map(|i| {
                if i == 0 {
                    1.0
                } else if self.decay == 0.0 {
                    0.0
                } else {
                    exp(i as f64 * ln(self.decay.abs()))
                }
            })
            .collect()
    }
}

fn orthonormal(rows: usize, cols: usize, rng: &mut rand_chacha::ChaCha20Rng) -> Matrix {
    let g = Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Builds a problem with `A = U diag(σ) Vᵀ`, `F = Aᵀ`, `Γ_pr = I`, `σ_R = 1`.
pub fn lowrank_problem(cfg: &LowRankConfig, seed: u64) -> Result<DesignProblem> {
    let m: usize = cfg.mode_sizes.iter().product();
    if cfg.mode_sizes.is_empty() || cfg.mode_sizes.contains(&0) || cfg.n == 0 {
        return Err(Error::InvalidConfig("lowrank: sizes must be positive".into()));
    }
    if cfg.rank == 0 || cfg.rank > cfg.n.min(m) {
        return Err(Error::InvalidConfig("lowrank: rank must lie in 1..=min(n, M)".into()));
    }
    if !(cfg.decay.is_finite() && cfg.decay >= 0.0) {
        return Err(Error::InvalidConfig(
            "lowrank: decay must be finite and nonnegative".into(),
        ));
    }
    let mut rng = stream(seed, purpose::LOWRANK);
    let u = orthonormal(cfg.n, cfg.rank, &mut rng);
    let v = orthonormal(m, cfg.rank, &mut rng);
    let s = DVector::from_vec(cfg.singular_values());
    let a = &u * Matrix::from_diagonal(&s) * v.transpose();
    let problem = DesignProblem::new(
        Forward::Dense(a.transpose()),
        Matrix::identity(cfg.n, cfg.n),
        1.0,
        cfg.mode_sizes.clone(),
    )?;
    Ok(problem.with_generator(GeneratorConfig::Lowrank(cfg.clone()), seed))
}
