use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Sparse vector with strictly increasing indices and nonzero finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector<T> {
    dimension: usize,
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            entries: Vec::new(),
        }
    }

    /// Builds from arbitrary `(index, value)` pairs: sorts by index, sums
    /// duplicates and drops zeros.
    ///
    /// Panics if an index is out of range or a value is not finite.
    pub fn from_pairs(dimension: usize, mut pairs: Vec<(usize, T)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, T)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            assert!(i < dimension, "index {i} out of range for dimension {dimension}");
            assert!(v.is_finite(), "non-finite sparse value at index {i}");
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != T::zero());
        Self { dimension, entries }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> T {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(T::zero(), |k| self.entries[k].1)
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dimension];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

/// A document's feature vector in whichever layout its featurizer produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureVector<T> {
    Sparse(SparseVector<T>),
    Dense(Vec<T>),
}

impl<T: Scalar> FeatureVector<T> {
    pub fn dimension(&self) -> usize {
        match self {
            FeatureVector::Sparse(s) => s.dimension(),
            FeatureVector::Dense(d) => d.len(),
        }
    }

    /// `row · x`, accumulated in increasing index order for both layouts.
    #[inline]
    pub fn dot(&self, row: &[T]) -> T {
        match self {
            FeatureVector::Sparse(s) => s
                .entries
                .iter()
                .fold(T::zero(), |acc, &(i, v)| acc + row[i] * v),
            FeatureVector::Dense(d) => d
                .iter()
                .zip(row)
                .fold(T::zero(), |acc, (&v, &w)| if v == T::zero() { acc } else { acc + w * v }),
        }
    }

    /// `row += scale * x`.
    #[inline]
    pub fn axpy_into(&self, scale: T, row: &mut [T]) {
        match self {
            FeatureVector::Sparse(s) => {
                for &(i, v) in &s.entries {
                    row[i] += scale * v;
                }
            }
            FeatureVector::Dense(d) => {
                for (r, &v) in row.iter_mut().zip(d) {
                    *r += scale * v;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        match self {
            FeatureVector::Sparse(s) => s.to_dense(),
            FeatureVector::Dense(d) => d.clone(),
        }
    }
}

impl<T> From<SparseVector<T>> for FeatureVector<T> {
    fn from(s: SparseVector<T>) -> Self {
        FeatureVector::Sparse(s)
    }
}

impl<T> From<Vec<T>> for FeatureVector<T> {
    fn from(d: Vec<T>) -> Self {
        FeatureVector::Dense(d)
    }
}
