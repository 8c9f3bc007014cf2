//! Structured selection operators `S = S_d ⊗ … ⊗ S_1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::Matrix;

/// Per-mode index sets selecting a Cartesian product of design variables.
///
/// Indices are zero-based and stored in ascending order. The induced column
/// set of the reshaped design matrix follows the column-major convention used
/// throughout the crate: mode 1 varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectionOperator {
    mode_sizes: Vec<usize>,
    per_mode: Vec<Vec<usize>>,
}

impl SelectionOperator {
    pub fn new(mode_sizes: Vec<usize>, mut per_mode: Vec<Vec<usize>>) -> Result<Self> {
        if mode_sizes.is_empty() {
            return Err(Error::InvalidConfig("selection needs at least one mode".into()));
        }
        if per_mode.len() != mode_sizes.len() {
            return Err(Error::DimensionMismatch {
                context: "selection modes",
                expected: mode_sizes.len(),
                found: per_mode.len(),
            });
        }
        for (mode, (set, &m)) in per_mode.iter_mut().zip(&mode_sizes).enumerate() {
            if set.is_empty() {
                return Err(Error::CountOutOfRange { k: 0, max: m });
            }
            set.sort_unstable();
            for w in set.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::DuplicateIndex { index: w[0], mode });
                }
            }
            if let Some(&last) = set.last() {
                if last >= m {
                    return Err(Error::IndexOutOfRange { index: last, size: m });
                }
            }
        }
        Ok(Self { mode_sizes, per_mode })
    }

    /// Selects every index of every mode.
    pub fn identity(mode_sizes: &[usize]) -> Self {
        Self {
            mode_sizes: mode_sizes.to_vec(),
            per_mode: mode_sizes.iter().map(|&m| (0..m).collect()).collect(),
        }
    }

    pub fn mode_sizes(&self) -> &[usize] {
        &self.mode_sizes
    }

    pub fn per_mode(&self) -> &[Vec<usize>] {
        &self.per_mode
    }

    pub fn mode(&self, j: usize) -> &[usize] {
        &self.per_mode[j]
    }

    pub fn order(&self) -> usize {
        self.mode_sizes.len()
    }

    /// `(k_1, …, k_d)`.
    pub fn counts(&self) -> Vec<usize> {
        self.per_mode.iter().map(Vec::len).collect()
    }

    /// Total number of selected columns `K = Π k_j`.
    pub fn total(&self) -> usize {
        self.per_mode.iter().map(Vec::len).product()
    }

    pub fn is_identity(&self) -> bool {
        self.per_mode.iter().zip(&self.mode_sizes).all(|(s, &m)| s.len() == m)
    }

    /// Linear column indices of the selected columns, mode 1 fastest.
    pub fn column_indices(&self) -> Vec<usize> {
        let d = self.order();
        let mut strides = Vec::with_capacity(d);
        let mut acc = 1;
        for &m in &self.mode_sizes {
            strides.push(acc);
            acc *= m;
        }
        let mut cols = Vec::with_capacity(self.total());
        let mut counter = alloc::vec![0usize; d];
        loop {
            cols.push(
                counter
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| self.per_mode[j][c] * strides[j])
                    .sum(),
            );
            let mut j = 0;
            loop {
                if j == d {
                    return cols;
                }
                counter[j] += 1;
                if counter[j] < self.per_mode[j].len() {
                    break;
                }
                counter[j] = 0;
                j += 1;
            }
        }
    }

    /// Dense `m_j × k_j` selection matrix `I(:, S^{(j)})`.
    pub fn selection_matrix(&self, j: usize) -> Matrix {
        let m = self.mode_sizes[j];
        let set = &self.per_mode[j];
        let mut s = Matrix::zeros(m, set.len());
        for (c, &i) in set.iter().enumerate() {
            s[(i, c)] = 1.0;
        }
        s
    }

    /// Replaces the index set of one mode, keeping the others.
    pub fn with_mode(&self, j: usize, indices: Vec<usize>) -> Result<Self> {
        let mut per_mode = self.per_mode.clone();
        per_mode[j] = indices;
        Self::new(self.mode_sizes.clone(), per_mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_sets() {
        assert!(matches!(
            SelectionOperator::new(vec![3], vec![vec![0, 0]]),
            Err(Error::DuplicateIndex { index: 0, mode: 0 })
        ));
        assert!(matches!(
            SelectionOperator::new(vec![3], vec![vec![3]]),
            Err(Error::IndexOutOfRange { index: 3, size: 3 })
        ));
        assert!(SelectionOperator::new(vec![3, 2], vec![vec![1]]).is_err());
        assert!(SelectionOperator::new(vec![3], vec![vec![]]).is_err());
    }

    #[test]
    fn sorts_and_enumerates_columns() {
        let s = SelectionOperator::new(vec![3, 4], vec![vec![2, 0], vec![3, 1]]).unwrap();
        assert_eq!(s.mode(0), &[0, 2]);
        assert_eq!(s.column_indices(), vec![3, 5, 9, 11]);
        assert_eq!(s.total(), 4);
        assert!(SelectionOperator::identity(&[2, 2]).is_identity());
    }
}
