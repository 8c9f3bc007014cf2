//! Linear-Gaussian Bayesian inverse problems and the design criteria built
//! on them.

mod heat;
mod lowrank;
mod tomo;

pub use heat::{heat_problem, HeatConfig};
pub use lowrank::{lowrank_problem, LowRankConfig};
pub use tomo::{ray_weights, tomo_problem, TomoConfig};

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, psi};
use crate::selection::SelectionOperator;
use crate::tensor::{matrix_to_tensor, tensor_to_matrix, ModeShape};
use crate::Matrix;

/// A parameter-to-observable map given only through its action.
pub trait LinearOperator: Send + Sync {
    /// Number of observations.
    fn nrows(&self) -> usize;
    /// Number of parameters.
    fn ncols(&self) -> usize;
    /// `F X` for a block of parameter vectors.
    fn apply(&self, x: &Matrix) -> Matrix;
    fn has_adjoint(&self) -> bool {
        false
    }
    /// `Fᵀ Y`, when the adjoint is available.
    fn apply_adjoint(&self, _y: &Matrix) -> Option<Matrix> {
        None
    }
}

#[derive(Clone)]
pub enum Forward {
    Dense(Matrix),
    Operator(Arc<dyn LinearOperator>),
}

impl core::fmt::Debug for Forward {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Forward::Dense(m) => write!(f, "Dense({}x{})", m.nrows(), m.ncols()),
            Forward::Operator(op) => write!(f, "Operator({}x{})", op.nrows(), op.ncols()),
        }
    }
}

impl Forward {
    pub fn nrows(&self) -> usize {
        match self {
            Forward::Dense(m) => m.nrows(),
            Forward::Operator(op) => op.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Forward::Dense(m) => m.ncols(),
            Forward::Operator(op) => op.ncols(),
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        match self {
            Forward::Dense(m) => m * x,
            Forward::Operator(op) => op.apply(x),
        }
    }

    pub fn as_dense(&self) -> Option<&Matrix> {
        match self {
            Forward::Dense(m) => Some(m),
            Forward::Operator(_) => None,
        }
    }

    /// Dense `F`, built column by column through `apply` if needed.
    pub fn to_dense(&self) -> Matrix {
        match self {
            Forward::Dense(m) => m.clone(),
            Forward::Operator(op) => op.apply(&Matrix::identity(op.ncols(), op.ncols())),
        }
    }
}

/// Configuration of the generator that produced a problem.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum GeneratorConfig {
    Heat(HeatConfig),
    Tomo(TomoConfig),
    Lowrank(LowRankConfig),
    Custom,
}

impl GeneratorConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorConfig::Heat(_) => "heat",
            GeneratorConfig::Tomo(_) => "tomo",
            GeneratorConfig::Lowrank(_) => "lowrank",
            GeneratorConfig::Custom => "custom",
        }
    }
}

/// An OED instance: forward map, prior square root, noise level and the
/// mode structure of the observations.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub forward: Forward,
    /// Symmetric `Γ_pr^{1/2}` (`n × n`).
    pub prior_sqrt: Matrix,
    pub noise_sigma: f64,
    pub mode_shape: ModeShape,
    pub u_true: Option<DVector<f64>>,
    pub data: Option<DVector<f64>>,
    pub generator: GeneratorConfig,
    pub seed: u64,
}

impl DesignProblem {
    pub fn new(forward: Forward, prior_sqrt: Matrix, noise_sigma: f64, mode_sizes: Vec<usize>) -> Result<Self> {
        if !noise_sigma.is_finite() || noise_sigma <= 0.0 {
            return Err(Error::InvalidConfig("noise sigma must be positive".into()));
        }
        let n = forward.ncols();
        if prior_sqrt.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                context: "prior square root",
                expected: n,
                found: prior_sqrt.nrows(),
            });
        }
        let scale = prior_sqrt.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let asym = (&prior_sqrt - prior_sqrt.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric { deviation: asym });
        }
        let mode_shape = ModeShape::new(mode_sizes, n)?;
        if mode_shape.columns() != forward.nrows() {
            return Err(Error::DimensionMismatch {
                context: "observation count vs mode sizes",
                expected: mode_shape.columns(),
                found: forward.nrows(),
            });
        }
        Ok(Self {
            forward,
            prior_sqrt,
            noise_sigma,
            mode_shape,
            u_true: None,
            data: None,
            generator: GeneratorConfig::Custom,
            seed: 0,
        })
    }

    pub fn with_truth(mut self, u_true: DVector<f64>, data: DVector<f64>) -> Result<Self> {
        if u_true.len() != self.parameter_dim() {
            return Err(Error::DimensionMismatch {
                context: "true parameter length",
                expected: self.parameter_dim(),
                found: u_true.len(),
            });
        }
        if data.len() != self.observation_dim() {
            return Err(Error::DimensionMismatch {
                context: "data length",
                expected: self.observation_dim(),
                found: data.len(),
            });
        }
        self.u_true = Some(u_true);
        self.data = Some(data);
        Ok(self)
    }

    pub fn with_generator(mut self, generator: GeneratorConfig, seed: u64) -> Self {
        self.generator = generator;
        self.seed = seed;
        self
    }

    pub fn parameter_dim(&self) -> usize {
        self.forward.ncols()
    }

    pub fn observation_dim(&self) -> usize {
        self.forward.nrows()
    }

    pub fn mode_sizes(&self) -> &[usize] {
        self.mode_shape.mode_sizes()
    }

    /// Whether `A` can be formed (dense `F` or an operator with adjoint).
    pub fn is_materializable(&self) -> bool {
        match &self.forward {
            Forward::Dense(_) => true,
            Forward::Operator(op) => op.has_adjoint(),
        }
    }

    /// `A = σ_R^{-1} Γ_pr^{1/2} Fᵀ`, of shape `n × M`.
    pub fn build_a(&self) -> Result<Matrix> {
        let ft = match &self.forward {
            Forward::Dense(f) => f.transpose(),
            Forward::Operator(op) => op
                .apply_adjoint(&Matrix::identity(op.nrows(), op.nrows()))
                .ok_or(Error::AdjointUnavailable)?,
        };
        Ok(&self.prior_sqrt * ft / self.noise_sigma)
    }

    /// Rows of `F` picked by a selection (in column-index order).
    pub fn forward_rows(&self, sel: &SelectionOperator) -> Result<Matrix> {
        self.check_selection(sel)?;
        let rows = sel.column_indices();
        Ok(match &self.forward {
            Forward::Dense(f) => f.select_rows(rows.iter()),
            Forward::Operator(_) => self.forward.to_dense().select_rows(rows.iter()),
        })
    }

    fn check_selection(&self, sel: &SelectionOperator) -> Result<()> {
        if sel.mode_sizes() != self.mode_sizes() {
            return Err(Error::DimensionMismatch {
                context: "selection vs problem modes",
                expected: self.mode_shape.columns(),
                found: sel.mode_sizes().iter().product(),
            });
        }
        Ok(())
    }
}

/// `φ_EIG(S) = log det(I + (AS)(AS)ᵀ)` with `AS` gathered mode by mode.
pub fn subsampled_eig(a: &Matrix, sel: &SelectionOperator) -> Result<f64> {
    let shape = ModeShape::new(sel.mode_sizes().to_vec(), a.nrows())?;
    let x = matrix_to_tensor(a, &shape)?;
    let sub = x.apply_selection(sel)?;
    psi(&tensor_to_matrix(&sub))
}

/// Posterior mean `u_post(S)` for a zero prior mean.
///
/// Uses the whitened form `u = Γ^{1/2} w`, which equals
/// `Γ_post(S) σ_R^{-2} Fᵀ S Sᵀ d` but never inverts `Γ_pr`:
/// `w = Bᵀ (I + B Bᵀ)^{-1} d_S / σ_R` with `B = σ_R^{-1} F_S Γ^{1/2}`.
pub fn posterior_mean(p: &DesignProblem, sel: &SelectionOperator, data: &DVector<f64>) -> Result<DVector<f64>> {
    if data.len() != p.observation_dim() {
        return Err(Error::DimensionMismatch {
            context: "data length",
            expected: p.observation_dim(),
            found: data.len(),
        });
    }
    let rows = sel.column_indices();
    let f_s = p.forward_rows(sel)?;
    let b = f_s * &p.prior_sqrt / p.noise_sigma;
    let d_s = DVector::from_iterator(rows.len(), rows.iter().map(|&r| data[r] / p.noise_sigma));
    let (k, n) = b.shape();
    let w = if k <= n {
        let mut sys = &b * b.transpose();
        for i in 0..k {
            sys[(i, i)] += 1.0;
        }
        let chol = nalgebra::Cholesky::new(sys).ok_or(Error::SingularPosterior)?;
        b.transpose() * chol.solve(&d_s)
    } else {
        let mut sys = b.tr_mul(&b);
        for i in 0..n {
            sys[(i, i)] += 1.0;
        }
        let chol = nalgebra::Cholesky::new(sys).ok_or(Error::SingularPosterior)?;
        chol.solve(&(b.transpose() * d_s))
    };
    let u = &p.prior_sqrt * w;
    if u.iter().all(|x| x.is_finite()) {
        Ok(u)
    } else {
        Err(Error::SingularPosterior)
    }
}

/// Posterior precision `Γ_pr^{-1} + σ_R^{-2} Fᵀ S Sᵀ F`, formed literally.
pub fn posterior_precision(p: &DesignProblem, sel: &SelectionOperator) -> Result<Matrix> {
    let prior = &p.prior_sqrt * &p.prior_sqrt;
    let prior_inv = nalgebra::Cholesky::new(prior)
        .ok_or(Error::SingularPosterior)?
        .inverse();
    let f_s = p.forward_rows(sel)?;
    let s2 = p.noise_sigma * p.noise_sigma;
    let prec = prior_inv + f_s.tr_mul(&f_s) / s2;
    Ok((&prec + prec.transpose()) * 0.5)
}

/// `log det(Γ^{1/2} Γ_post(S)^{-1} Γ^{1/2})` from the posterior precision;
/// a second route to `φ_EIG(S)` that needs an invertible prior.
pub fn eig_via_posterior(p: &DesignProblem, sel: &SelectionOperator) -> Result<f64> {
    let prec = posterior_precision(p, sel)?;
    let m = &p.prior_sqrt * prec * &p.prior_sqrt;
    logdet_spd(&((&m + m.transpose()) * 0.5)).ok_or(Error::SingularPosterior)
}

/// `‖u − u_ref‖ / ‖u_ref‖`.
pub fn relative_error(u: &DVector<f64>, u_ref: &DVector<f64>) -> f64 {
    (u - u_ref).norm() / u_ref.norm()
}

/// Noisy data `F u + σ z` with `σ = level · max|F u|`; returns `(data, σ)`.
pub(crate) fn add_noise(clean: &DVector<f64>, level: f64, seed: u64) -> (DVector<f64>, f64) {
    use rand_distr::{Distribution, StandardNormal};
    let m = clean.len();
    let sigma = level * clean.amax();
    let mut rng = crate::rng::stream(seed, crate::rng::purpose::NOISE);
    let data = DVector::from_iterator(
        m,
        clean.iter().map(|&c| {
            let z: f64 = StandardNormal.sample(&mut rng);
            c + sigma * z
        }),
    );
    (data, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn identity_problem(sigma: f64) -> DesignProblem {
        DesignProblem::new(
            Forward::Dense(Matrix::identity(3, 3)),
            Matrix::identity(3, 3),
            sigma,
            vec![3],
        )
        .unwrap()
    }

    #[test]
    fn identity_problem_gives_identity_a() {
        let a = identity_problem(1.0).build_a().unwrap();
        assert_eq!(a, Matrix::identity(3, 3));
        let a2 = identity_problem(2.0).build_a().unwrap();
        assert_eq!(a2, Matrix::identity(3, 3) * 0.5);
    }

    #[test]
    fn posterior_mean_limits() {
        let p = identity_problem(1.0);
        let d = DVector::from_vec(vec![2.0, -4.0, 6.0]);
        let u = posterior_mean(&p, &SelectionOperator::identity(&[3]), &d).unwrap();
        assert!((u - &d / 2.0).norm() < 1e-14);
        let p = identity_problem(1e9);
        let u = posterior_mean(&p, &SelectionOperator::identity(&[3]), &d).unwrap();
        assert!(u.norm() < 1e-12);
    }

    #[test]
    fn single_column_eig() {
        let a = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 4.0, 1.0]);
        let sel = SelectionOperator::new(vec![2], vec![vec![0]]).unwrap();
        let v = subsampled_eig(&a, &sel).unwrap();
        assert!((v - libm::log(26.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_inconsistent_problems() {
        let f = Forward::Dense(Matrix::identity(3, 3));
        assert!(DesignProblem::new(f.clone(), Matrix::identity(3, 3), 0.0, vec![3]).is_err());
        assert!(DesignProblem::new(f.clone(), Matrix::identity(2, 2), 1.0, vec![3]).is_err());
        assert!(DesignProblem::new(f, Matrix::identity(3, 3), 1.0, vec![2, 2]).is_err());
    }

    struct NoAdjoint(Matrix);

    impl LinearOperator for NoAdjoint {
        fn nrows(&self) -> usize {
            self.0.nrows()
        }
        fn ncols(&self) -> usize {
            self.0.ncols()
        }
        fn apply(&self, x: &Matrix) -> Matrix {
            &self.0 * x
        }
    }

    #[test]
    fn operator_without_adjoint_cannot_build_a() {
        let op = Arc::new(NoAdjoint(Matrix::identity(2, 2)));
        let p = DesignProblem::new(Forward::Operator(op), Matrix::identity(2, 2), 1.0, vec![2]).unwrap();
        assert!(!p.is_materializable());
        assert_eq!(p.build_a(), Err(Error::AdjointUnavailable));
    }
}
