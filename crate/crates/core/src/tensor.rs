//! Dense tensors with mode unfoldings and mode products.
//!
//! Storage is column-major (first index fastest). The mode-`j` unfolding maps
//! entry `(i_1, …, i_P)` to row `i_j` and column `Σ_{ℓ≠j} i_ℓ J_ℓ` with
//! `J_ℓ = Π_{m<ℓ, m≠j} n_m`. Modes are zero-based in this API.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrixView;

use crate::error::{Error, Result};
use crate::selection::SelectionOperator;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

/// Mode sizes `(m_1, …, m_d)` of a design together with the ambient
/// (parameter) dimension `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeShape {
    mode_sizes: Vec<usize>,
    ambient_dim: usize,
}

impl ModeShape {
    pub fn new(mode_sizes: Vec<usize>, ambient_dim: usize) -> Result<Self> {
        if mode_sizes.is_empty() || mode_sizes.contains(&0) || ambient_dim == 0 {
            return Err(Error::InvalidConfig(
                "mode shape needs d >= 1 positive mode sizes and N >= 1".into(),
            ));
        }
        Ok(Self {
            mode_sizes,
            ambient_dim,
        })
    }

    pub fn mode_sizes(&self) -> &[usize] {
        &self.mode_sizes
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn design_dim(&self) -> usize {
        self.mode_sizes.len()
    }

    /// `M = Π m_j`.
    pub fn columns(&self) -> usize {
        self.mode_sizes.iter().product()
    }

    /// Tensor dims `(m_1, …, m_d, N)`.
    pub fn tensor_dims(&self) -> Vec<usize> {
        let mut dims = self.mode_sizes.clone();
        dims.push(self.ambient_dim);
        dims
    }
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidConfig("tensor dims must be positive".into()));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                context: "tensor data",
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for (i, &n) in idx.iter_mut().zip(&dims) {
                *i += 1;
                if *i < n {
                    break;
                }
                *i = 0;
            }
        }
        Self::new(dims, data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            lin += i * stride;
            stride *= n;
        }
        self.data[lin]
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// (product of dims before `mode`, dim of `mode`, product after).
    fn split(&self, mode: usize) -> (usize, usize, usize) {
        let left = self.dims[..mode].iter().product();
        let right = self.dims[mode + 1..].iter().product();
        (left, self.dims[mode], right)
    }

    /// Mode-`mode` unfolding `X_(j)` of shape `n_j × Π_{ℓ≠j} n_ℓ`.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, nj, right) = self.split(mode);
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..right {
            for a in 0..left {
                let base = a + left * nj * c;
                out.extend((0..nj).map(|b| self.data[base + left * b]));
            }
        }
        Ok(Matrix::from_vec(nj, left * right, out))
    }

    /// Inverse of [`Tensor::unfold`].
    pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Tensor> {
        if mode >= dims.len() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: dims.len(),
            });
        }
        let left: usize = dims[..mode].iter().product();
        let nj = dims[mode];
        let right: usize = dims[mode + 1..].iter().product();
        if m.nrows() != nj || m.ncols() != left * right {
            return Err(Error::DimensionMismatch {
                context: "fold",
                expected: nj * left * right,
                found: m.nrows() * m.ncols(),
            });
        }
        let mut data = vec![0.0; nj * left * right];
        for c in 0..right {
            for a in 0..left {
                let col = a + left * c;
                let base = a + left * nj * c;
                for b in 0..nj {
                    data[base + left * b] = m[(b, col)];
                }
            }
        }
        Tensor::new(dims.to_vec(), data)
    }

    /// Mode product `X ×_j S`, i.e. `Y_(j) = S X_(j)`.
    pub fn mode_product(&self, s: &Matrix, mode: usize) -> Result<Tensor> {
        self.check_mode(mode)?;
        let (left, nj, right) = self.split(mode);
        if s.ncols() != nj {
            return Err(Error::DimensionMismatch {
                context: "mode product",
                expected: nj,
                found: s.ncols(),
            });
        }
        let t = s.nrows();
        let mut dims = self.dims.clone();
        dims[mode] = t;
        let mut data = vec![0.0; left * t * right];
        let st = s.transpose();
        for c in 0..right {
            let slab = DMatrixView::from_slice(&self.data[left * nj * c..left * nj * (c + 1)], left, nj);
            let prod = slab * &st;
            data[left * t * c..left * t * (c + 1)].copy_from_slice(prod.as_slice());
        }
        Tensor::new(dims, data)
    }

    /// Keeps the listed slices of one mode (in the given order); this is the
    /// mode product with `S_jᵀ` computed as a gather.
    pub fn select_mode(&self, mode: usize, indices: &[usize]) -> Result<Tensor> {
        self.check_mode(mode)?;
        let (left, nj, right) = self.split(mode);
        if let Some(&bad) = indices.iter().find(|&&i| i >= nj) {
            return Err(Error::IndexOutOfRange { index: bad, size: nj });
        }
        let mut dims = self.dims.clone();
        dims[mode] = indices.len();
        let mut data = Vec::with_capacity(left * indices.len() * right);
        for c in 0..right {
            for &i in indices {
                let start = left * (i + nj * c);
                data.extend_from_slice(&self.data[start..start + left]);
            }
        }
        Tensor::new(dims, data)
    }

    /// `X ×_1 S_1ᵀ ⋯ ×_d S_dᵀ` over the first `d` modes.
    pub fn apply_selection(&self, sel: &SelectionOperator) -> Result<Tensor> {
        let d = sel.order();
        if d > self.order() {
            return Err(Error::DimensionMismatch {
                context: "selection order",
                expected: self.order(),
                found: d,
            });
        }
        for (j, &m) in sel.mode_sizes().iter().enumerate() {
            if self.dims[j] != m {
                return Err(Error::DimensionMismatch {
                    context: "selection mode size",
                    expected: self.dims[j],
                    found: m,
                });
            }
        }
        let mut out: Option<Tensor> = None;
        for j in 0..d {
            if sel.mode(j).len() == self.dims[j] {
                continue;
            }
            let src = out.as_ref().unwrap_or(self);
            out = Some(src.select_mode(j, sel.mode(j))?);
        }
        Ok(out.unwrap_or_else(|| self.clone()))
    }
}

/// Reshapes `A ∈ R^{N×M}` into `X ∈ R^{m_1×⋯×m_d×N}` with `X_(d+1) = A`.
pub fn matrix_to_tensor(a: &Matrix, shape: &ModeShape) -> Result<Tensor> {
    if a.ncols() != shape.columns() {
        return Err(Error::DimensionMismatch {
            context: "matrix columns vs mode sizes",
            expected: shape.columns(),
            found: a.ncols(),
        });
    }
    if a.nrows() != shape.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "matrix rows vs ambient dim",
            expected: shape.ambient_dim(),
            found: a.nrows(),
        });
    }
    let d = shape.design_dim();
    Tensor::fold(a, d, &shape.tensor_dims())
}

/// Last-mode unfolding, the inverse of [`matrix_to_tensor`].
pub fn tensor_to_matrix(t: &Tensor) -> Matrix {
    let last = t.order() - 1;
    t.unfold(last).expect("last mode is always in range")
}
