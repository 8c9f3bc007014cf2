//! Straight-ray travel-time tomography on the unit square. Sources sit on
//! the right edge `x = 1`, receivers on the top edge `y = 1`.

use alloc::vec::Vec;

use nalgebra::DVector;

use super::{add_noise, DesignProblem, Forward, GeneratorConfig};
use crate::error::{Error, Result};
use crate::linalg::sym_sqrt;
use crate::math::{ceil, exp, floor, sqrt};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TomoConfig {
    /// Pixels per side.
    pub grid: usize,
    pub sources: usize,
    pub receivers: usize,
    pub length_scale: f64,
    pub variance: f64,
    /// Diagonal jitter added to the kernel matrix, relative to `variance`.
    pub nugget: f64,
    pub noise_level: f64,
}

impl Default for TomoConfig {
    fn default() -> Self {
        Self {
            grid: 32,
            sources: 16,
            receivers: 20,
            length_scale: 0.12,
            variance: 1.0,
            nugget: 1e-6,
            noise_level: 0.02,
        }
    }
}

impl TomoConfig {
    fn validate(&self) -> Result<()> {
        if self.grid == 0 || self.sources == 0 || self.receivers == 0 {
            return Err(Error::InvalidConfig(
                "tomo: grid, sources and receivers must be positive".into(),
            ));
        }
        if !(self.length_scale > 0.0 && self.variance > 0.0 && self.nugget >= 0.0 && self.noise_level > 0.0) {
            return Err(Error::InvalidConfig(
                "tomo: prior and noise parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn source_point(&self, i: usize) -> (f64, f64) {
        (1.0, (i as f64 + 0.5) / self.sources as f64)
    }

    pub fn receiver_point(&self, j: usize) -> (f64, f64) {
        ((j as f64 + 0.5) / self.receivers as f64, 1.0)
    }

    /// Center of pixel `ix + grid * iy`.
    pub fn pixel_center(&self, p: usize) -> (f64, f64) {
        let h = 1.0 / self.grid as f64;
        (
            (p % self.grid) as f64 * h + 0.5 * h,
            (p / self.grid) as f64 * h + 0.5 * h,
        )
    }

    pub fn prior_covariance(&self) -> Matrix {
        let n = self.grid * self.grid;
        let two_l2 = 2.0 * self.length_scale * self.length_scale;
        let mut cov = Matrix::from_fn(n, n, |a, b| {
            let (xa, ya) = self.pixel_center(a);
            let (xb, yb) = self.pixel_center(b);
            let r2 = (xa - xb) * (xa - xb) + (ya - yb) * (ya - yb);
            self.variance * exp(-r2 / two_l2)
        });
        for i in 0..n {
            cov[(i, i)] += self.nugget * self.variance;
        }
        cov
    }

    /// Two smooth blobs of opposite sign inside the triangle `x + y > 1`
    /// crossed by the rays.
    pub fn phantom(&self) -> DVector<f64> {
        let n = self.grid * self.grid;
        DVector::from_iterator(
            n,
            (0..n).map(|p| {
                let (x, y) = self.pixel_center(p);
                let b1 = exp(-((x - 0.75) * (x - 0.75) + (y - 0.6) * (y - 0.6)) / 0.02);
                let b2 = exp(-((x - 0.5) * (x - 0.5) + (y - 0.8) * (y - 0.8)) / 0.01);
                b1 - 0.7 * b2
            }),
        )
    }
}

/// Pixel weights of the segment from `from` to `to` on a `grid × grid`
/// pixelation of the unit square, by midpoint quadrature with step at most
/// half a pixel width. Weights sum to the segment length.
pub fn ray_weights(grid: usize, from: (f64, f64), to: (f64, f64)) -> Vec<f64> {
    let mut w = alloc::vec![0.0; grid * grid];
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let len = sqrt(dx * dx + dy * dy);
    if len == 0.0 || grid == 0 {
        return w;
    }
    let h = 1.0 / grid as f64;
    let steps = (ceil(len / (0.5 * h)) as usize).max(1);
    let ds = len / steps as f64;
    let last = (grid - 1) as f64;
    for t in 0..steps {
        let s = (t as f64 + 0.5) / steps as f64;
        let x = from.0 + s * dx;
        let y = from.1 + s * dy;
        let ix = floor(x * grid as f64).clamp(0.0, last) as usize;
        let iy = floor(y * grid as f64).clamp(0.0, last) as usize;
        w[ix + grid * iy] += ds;
    }
    w
}

/// Builds the tomography problem. Ray `(source i, receiver j)` is row
/// `i + s j` of `F`.
pub fn tomo_problem(cfg: &TomoConfig, seed: u64) -> Result<DesignProblem> {
    cfg.validate()?;
    let n = cfg.grid * cfg.grid;
    let m = cfg.sources * cfg.receivers;
    let mut forward = Matrix::zeros(m, n);
    for j in 0..cfg.receivers {
        for i in 0..cfg.sources {
            let w = ray_weights(cfg.grid, cfg.source_point(i), cfg.receiver_point(j));
            let row = i + cfg.sources * j;
            for (p, v) in w.into_iter().enumerate() {
                forward[(row, p)] = v;
            }
        }
    }
    let prior_sqrt = sym_sqrt(&cfg.prior_covariance())?;
    let u_true = cfg.phantom();
    let clean = &forward * &u_true;
    let (data, sigma) = add_noise(&clean, cfg.noise_level, seed);
    let problem = DesignProblem::new(
        Forward::Dense(forward),
        prior_sqrt,
        sigma,
        alloc::vec![cfg.sources, cfg.receivers],
    )?;
    Ok(problem
        .with_truth(u_true, data)?
        .with_generator(GeneratorConfig::Tomo(cfg.clone()), seed))
}
