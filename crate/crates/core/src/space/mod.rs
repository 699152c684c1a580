//! State spaces: flat vectors in R^d and symmetric d×d matrices under the
//! trace inner product `⟨A, B⟩ = tr(AB)`.
//!
//! Symmetric matrices are stored once, as the packed upper triangle in
//! row-major order, so `M[i][j] == M[j][i]` holds by construction.

mod eigen;
mod rng;

pub use eigen::{
    conjugate_by, random_orthogonal, spectral_apply, sym_eigendecomposition, Cholesky,
    DenseSymmetric, EigenDecomposition,
};
pub use rng::RngStream;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    FlatVector,
    SymmetricMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub kind: SpaceKind,
    /// Vector length, or matrix side length.
    pub d: usize,
}

impl SpaceDescriptor {
    pub fn flat(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        Self {
            kind: SpaceKind::FlatVector,
            d,
        }
    }

    pub fn symmetric(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        Self {
            kind: SpaceKind::SymmetricMatrix,
            d,
        }
    }

    /// Number of free real coordinates.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::FlatVector => self.d,
            SpaceKind::SymmetricMatrix => self.d * (self.d + 1) / 2,
        }
    }

    pub fn is_matrix(&self) -> bool {
        self.kind == SpaceKind::SymmetricMatrix
    }

    /// Inner-product weight of a stored coordinate: off-diagonal matrix
    /// entries appear twice in `tr(AB)`.
    pub(crate) fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        let d = self.d;
        let matrix = self.is_matrix();
        let rows = if matrix { d } else { 1 };
        (0..rows).flat_map(move |i| {
            let len = if matrix { d - i } else { d };
            (0..len).map(move |k| if matrix && k != 0 { 2.0 } else { 1.0 })
        })
    }
}

/// Offset of `(i, j)`, `i <= j`, in packed upper-triangular storage.
#[inline]
pub(crate) fn packed_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

#[cfg(test)]
fn packed_is_diagonal(d: usize, k: usize) -> bool {
    let mut start = 0;
    for i in 0..d {
        if k == start {
            return true;
        }
        start += d - i;
        if k < start {
            return false;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacePoint {
    desc: SpaceDescriptor,
    data: Vec<f64>,
}

impl SpacePoint {
    pub fn zeros(desc: SpaceDescriptor) -> Self {
        Self {
            desc,
            data: vec![0.0; desc.ambient_dim()],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Self {
            desc: SpaceDescriptor::flat(data.len()),
            data,
        }
    }

    pub fn scalar(x: f64) -> Self {
        Self::from_vec(vec![x])
    }

    /// Builds a point from raw stored coordinates (packed upper triangle for matrices).
    pub fn from_coords(desc: SpaceDescriptor, data: Vec<f64>) -> Result<Self> {
        if data.len() != desc.ambient_dim() {
            return invalid(format!(
                "expected {} coordinates, got {}",
                desc.ambient_dim(),
                data.len()
            ));
        }
        Ok(Self { desc, data })
    }

    /// Builds a symmetric matrix from a row-major dense `d×d` slice.
    /// Entries must be exactly symmetric.
    pub fn from_dense(d: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != d * d {
            return invalid(format!("expected {} entries, got {}", d * d, dense.len()));
        }
        let mut data = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                if dense[i * d + j] != dense[j * d + i] {
                    return invalid(format!("matrix not symmetric at ({i}, {j})"));
                }
                data.push(dense[i * d + j]);
            }
        }
        Ok(Self {
            desc: SpaceDescriptor::symmetric(d),
            data,
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(SpaceDescriptor::symmetric(d));
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn identity(d: usize) -> Self {
        Self::from_diagonal(&vec![1.0; d])
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        self.desc
    }

    pub fn coords(&self) -> &[f64] {
        &self.data
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.data
    }

    /// Matrix entry `(i, j)`; for flat vectors `j` must be 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.desc.kind {
            SpaceKind::FlatVector => {
                assert_eq!(j, 0);
                self.data[i]
            }
            SpaceKind::SymmetricMatrix => self.data[packed_index(self.desc.d, i, j)],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        match self.desc.kind {
            SpaceKind::FlatVector => {
                assert_eq!(j, 0);
                self.data[i] = v;
            }
            SpaceKind::SymmetricMatrix => {
                let k = packed_index(self.desc.d, i, j);
                self.data[k] = v;
            }
        }
    }

    /// Row-major dense copy of a symmetric matrix.
    pub fn to_dense(&self) -> DenseSymmetric {
        assert!(self.desc.is_matrix(), "to_dense on a flat vector");
        let d = self.desc.d;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.data[packed_index(d, i, j)];
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
        DenseSymmetric::new(d, out)
    }

    pub fn trace(&self) -> f64 {
        assert!(self.desc.is_matrix());
        (0..self.desc.d).map(|i| self.get(i, i)).sum()
    }

    /// Coordinates in an orthonormal basis: flat vectors unchanged, matrix
    /// off-diagonals scaled by √2. Euclidean geometry on the result equals
    /// the trace geometry on the matrix.
    pub fn isometric_coords(&self) -> Vec<f64> {
        self.data
            .iter()
            .zip(self.desc.weights())
            .map(|(&v, w)| v * w.sqrt())
            .collect()
    }

    pub fn inner(&self, other: &SpacePoint) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &SpacePoint) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .zip(self.desc.weights())
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner_unchecked(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &SpacePoint) -> f64 {
        self.assert_same(other);
        self.data
            .iter()
            .zip(&other.data)
            .zip(self.desc.weights())
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_same(&self, other: &SpacePoint) -> Result<()> {
        if self.desc != other.desc {
            return Err(Error::DescriptorMismatch {
                left: self.desc,
                right: other.desc,
            });
        }
        Ok(())
    }

    fn assert_same(&self, other: &SpacePoint) {
        assert_eq!(self.desc, other.desc, "descriptor mismatch");
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SpacePoint) {
        self.assert_same(other);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.data {
            *s *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpacePoint {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn sub(&self, other: &SpacePoint) -> SpacePoint {
        self.assert_same(other);
        SpacePoint {
            desc: self.desc,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &SpacePoint) -> SpacePoint {
        self.assert_same(other);
        SpacePoint {
            desc: self.desc,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpacePoint {
        SpacePoint {
            desc: self.desc,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Free-function form of [`SpacePoint::inner`].
pub fn inner(a: &SpacePoint, b: &SpacePoint) -> Result<f64> {
    a.inner(b)
}

/// Standard Gaussian with respect to the space's inner product.
///
/// Flat vectors get i.i.d. N(0, 1) coordinates. Symmetric matrices get
/// N(0, 1) diagonals and N(0, 1/2) off-diagonals, which is standard normal in
/// the orthonormal basis `E_ii`, `(E_ij + E_ji)/√2` of the trace inner
/// product. Using unit variance off the diagonal would double the effective
/// temperature along those directions.
pub fn gaussian_standard(desc: SpaceDescriptor, rng: &mut RngStream) -> SpacePoint {
    let mut out = SpacePoint::zeros(desc);
    fill_gaussian(&mut out, rng);
    out
}

pub(crate) fn fill_gaussian(out: &mut SpacePoint, rng: &mut RngStream) {
    let desc = out.desc;
    for (v, w) in out.data.iter_mut().zip(desc.weights()) {
        let z = rng.standard_normal();
        *v = if w == 1.0 {
            z
        } else {
            z * std::f64::consts::FRAC_1_SQRT_2
        };
    }
}
