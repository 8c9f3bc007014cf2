//! Initial-condition inversion for the 1-D heat equation on `(0, 1)` with
//! homogeneous Dirichlet boundaries, linear finite elements in space and
//! implicit Euler in time.

use alloc::vec::Vec;

use nalgebra::DVector;

use super::{add_noise, DesignProblem, Forward, GeneratorConfig};
use crate::error::{Error, Result};
use crate::linalg::sym_sqrt;
use crate::math::exp;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatConfig {
    /// Interior mesh nodes (the parameter dimension).
    pub dof: usize,
    pub kappa: f64,
    /// Time between snapshots; one implicit Euler step each.
    pub dt: f64,
    pub snapshots: usize,
    pub sensors: usize,
    pub gamma: f64,
    /// Noise standard deviation relative to the RMS of the clean data.
    pub noise_level: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            dof: 401,
            kappa: 1.732_050_807_568_877_2,
            dt: 4e-3,
            snapshots: 10,
            sensors: 28,
            gamma: 0.1,
            noise_level: 0.02,
        }
    }
}

impl HeatConfig {
    fn validate(&self) -> Result<()> {
        if self.dof < 3 || self.snapshots == 0 || self.sensors == 0 {
            return Err(Error::InvalidConfig(
                "heat: dof >= 3, snapshots >= 1, sensors >= 1".into(),
            ));
        }
        if self.sensors > self.dof - 2 {
            return Err(Error::InvalidConfig("heat: sensors must be at most dof - 2".into()));
        }
        if !(self.kappa > 0.0 && self.gamma > 0.0 && self.noise_level > 0.0 && self.dt >= 0.0) {
            return Err(Error::InvalidConfig(
                "heat: kappa, gamma, noise must be positive and dt >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Mesh width `h = 1 / (dof + 1)`.
    pub fn mesh_width(&self) -> f64 {
        1.0 / (self.dof + 1) as f64
    }

    /// Zero-based interior node index of each sensor, spread uniformly.
    pub fn sensor_nodes(&self) -> Vec<usize> {
        let n = self.dof + 1;
        let m = self.sensors + 1;
        (0..self.sensors).map(|s| (2 * (s + 1) * n + m) / (2 * m) - 1).collect()
    }

    /// Tridiagonal mass and stiffness matrices.
    pub fn mass_stiffness(&self) -> (Matrix, Matrix) {
        let n = self.dof;
        let h = self.mesh_width();
        let mut mass = Matrix::zeros(n, n);
        let mut stiff = Matrix::zeros(n, n);
        for i in 0..n {
            mass[(i, i)] = 2.0 * h / 3.0;
            stiff[(i, i)] = 2.0 / h;
            if i + 1 < n {
                mass[(i, i + 1)] = h / 6.0;
                mass[(i + 1, i)] = h / 6.0;
                stiff[(i, i + 1)] = -1.0 / h;
                stiff[(i + 1, i)] = -1.0 / h;
            }
        }
        (mass, stiff)
    }

    /// One implicit Euler step `(N + Δt κ K)^{-1} N`.
    pub fn propagator(&self) -> Result<Matrix> {
        let (mass, stiff) = self.mass_stiffness();
        let lhs = &mass + &stiff * (self.dt * self.kappa);
        let chol = nalgebra::Cholesky::new(lhs).ok_or(Error::InvalidConfig("heat: singular step".into()))?;
        Ok(chol.solve(&mass))
    }

    /// `Γ_pr = (γK + N)^{-1} N (γK + N)^{-1}`.
    pub fn prior_covariance(&self) -> Result<Matrix> {
        let (mass, stiff) = self.mass_stiffness();
        let q = &stiff * self.gamma + &mass;
        let q_inv = nalgebra::Cholesky::new(q)
            .ok_or(Error::InvalidConfig("heat: singular prior operator".into()))?
            .inverse();
        let cov = &q_inv * mass * &q_inv;
        Ok((&cov + cov.transpose()) * 0.5)
    }
}

/// Builds the heat problem. Observation `(sensor s, snapshot ℓ)` is row
/// `s + n_s ℓ` of `F`, snapshot `ℓ = 0` being the initial state.
pub fn heat_problem(cfg: &HeatConfig, seed: u64) -> Result<DesignProblem> {
    cfg.validate()?;
    let n = cfg.dof;
    let ns = cfg.sensors;
    let nodes = cfg.sensor_nodes();
    let step = cfg.propagator()?;
    let m = ns * cfg.snapshots;
    let mut forward = Matrix::zeros(m, n);
    // rows of H M_{0,ℓ}
    let mut rows = Matrix::zeros(ns, n);
    for (s, &node) in nodes.iter().enumerate() {
        rows[(s, node)] = 1.0;
    }
    for l in 0..cfg.snapshots {
        forward.view_mut((ns * l, 0), (ns, n)).copy_from(&rows);
        if l + 1 < cfg.snapshots {
            rows = &rows * &step;
        }
    }
    let prior_sqrt = sym_sqrt(&cfg.prior_covariance()?)?;
    let h = cfg.mesh_width();
    let u_true = DVector::from_iterator(
        n,
        (1..=n).map(|i| {
            let x = i as f64 * h;
            exp(-60.0 * (x - 0.35) * (x - 0.35)) + 0.6 * exp(-120.0 * (x - 0.72) * (x - 0.72))
        }),
    );
    let clean = &forward * &u_true;
    let (data, sigma) = add_noise(&clean, cfg.noise_level, seed);
    let problem = DesignProblem::new(
        Forward::Dense(forward),
        prior_sqrt,
        sigma,
        alloc::vec![ns, cfg.snapshots],
    )?;
    Ok(problem
        .with_truth(u_true, data)?
        .with_generator(GeneratorConfig::Heat(cfg.clone()), seed))
}
