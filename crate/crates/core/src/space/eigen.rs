//! Dense symmetric linear algebra: cyclic Jacobi eigendecomposition,
//! spectral functions, and Cholesky factorization.

use super::{packed_index, RngStream, SpaceDescriptor, SpacePoint};
use crate::error::{invalid, Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Row-major dense `d×d` matrix used as workspace for symmetric algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    d: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn new(d: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), d * d);
        Self { d, data }
    }

    pub fn identity(d: usize) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        Self { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d);
        (0..self.d)
            .map(|i| (0..self.d).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseSymmetric) -> DenseSymmetric {
        let d = self.d;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.get(k, j);
                }
            }
        }
        DenseSymmetric::new(d, out)
    }

    pub fn transpose(&self) -> DenseSymmetric {
        let d = self.d;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.get(i, j);
            }
        }
        DenseSymmetric::new(d, out)
    }

    /// Packs the upper triangle into a symmetric [`SpacePoint`], ignoring
    /// whatever is stored below the diagonal.
    pub fn upper_to_point(&self) -> SpacePoint {
        let d = self.d;
        let mut p = SpacePoint::zeros(SpaceDescriptor::symmetric(d));
        for i in 0..d {
            for j in i..d {
                p.coords_mut()[packed_index(d, i, j)] = self.get(i, j);
            }
        }
        p
    }

    /// Lower-triangular `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let d = self.d;
        let mut l = vec![0.0; d * d];
        for j in 0..d {
            let mut diag = self.get(j, j);
            for k in 0..j {
                diag -= l[j * d + k] * l[j * d + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = diag.sqrt();
            l[j * d + j] = ljj;
            for i in (j + 1)..d {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                l[i * d + j] = s / ljj;
            }
        }
        Ok(Cholesky { d, l })
    }
}

#[derive(Debug, Clone)]
pub struct Cholesky {
    d: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.d)
            .map(|i| self.l[i * self.d + i].ln())
            .sum::<f64>()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut y = b.to_vec();
        for i in 0..d {
            for k in 0..i {
                y[i] -= self.l[i * d + k] * y[k];
            }
            y[i] /= self.l[i * d + i];
        }
        for i in (0..d).rev() {
            for k in (i + 1)..d {
                y[i] -= self.l[k * d + i] * y[k];
            }
            y[i] /= self.l[i * d + i];
        }
        y
    }

    pub fn inverse(&self) -> DenseSymmetric {
        let d = self.d;
        let mut out = DenseSymmetric::new(d, vec![0.0; d * d]);
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..d {
                out.set(i, j, col[i]);
            }
        }
        out
    }
}

/// `M = Q diag(λ) Qᵀ` with ascending eigenvalues and orthonormal columns in `Q`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Row-major `d×d`; column `k` is the eigenvector of `eigenvalues[k]`.
    pub basis: DenseSymmetric,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q diag(f(λ)) Qᵀ`, assembled directly into symmetric storage.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SpacePoint {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.reconstruct_from(&mapped)
    }

    pub fn reconstruct_from(&self, values: &[f64]) -> SpacePoint {
        let d = self.dim();
        assert_eq!(values.len(), d);
        let q = &self.basis;
        let mut out = SpacePoint::zeros(SpaceDescriptor::symmetric(d));
        let coords = out.coords_mut();
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for (k, &v) in values.iter().enumerate() {
                    s += q.get(i, k) * v * q.get(j, k);
                }
                coords[packed_index(d, i, j)] = s;
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖M‖_F`, giving up after 100 sweeps.
pub fn sym_eigendecomposition(m: &SpacePoint) -> Result<EigenDecomposition> {
    if !m.descriptor().is_matrix() {
        return invalid("eigendecomposition requires a symmetric matrix");
    }
    jacobi(m.to_dense())
}

pub(crate) fn jacobi(mut a: DenseSymmetric) -> Result<EigenDecomposition> {
    let d = a.dim();
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNotConverged {
            sweeps: 0,
            off_norm: f64::NAN,
        });
    }
    let tol = JACOBI_REL_TOL * a.frobenius();
    let mut v = DenseSymmetric::identity(d);
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)));
    let eigenvalues = order.iter().map(|&i| a.get(i, i)).collect();
    let mut basis = DenseSymmetric::new(d, vec![0.0; d * d]);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..d {
            basis.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        basis,
        sweeps,
    })
}

fn off_diagonal_norm(a: &DenseSymmetric) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a.get(i, j) * a.get(i, j);
            }
        }
    }
    s.sqrt()
}

// A <- Jᵀ A J, V <- V J for the plane rotation J in coordinates (p, q).
fn rotate(a: &mut DenseSymmetric, v: &mut DenseSymmetric, p: usize, q: usize, c: f64, s: f64) {
    let d = a.dim();
    for k in 0..d {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, c * akp - s * akq);
        a.set(k, q, s * akp + c * akq);
    }
    for k in 0..d {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, c * apk - s * aqk);
        a.set(q, k, s * apk + c * aqk);
    }
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// `Q f(Λ) Qᵀ` for a symmetric matrix `M = Q Λ Qᵀ`.
pub fn spectral_apply(f: impl Fn(f64) -> f64, m: &SpacePoint) -> Result<SpacePoint> {
    Ok(sym_eigendecomposition(m)?.reconstruct_with(f))
}

/// Haar-ish random orthogonal matrix (Gram-Schmidt on a Gaussian matrix).
pub fn random_orthogonal(d: usize, rng: &mut RngStream) -> DenseSymmetric {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= dot * ci;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let mut q = DenseSymmetric::new(d, vec![0.0; d * d]);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            q.set(i, j, c[i]);
        }
    }
    q
}

/// `Q M Qᵀ`.
pub fn conjugate_by(q: &DenseSymmetric, m: &SpacePoint) -> SpacePoint {
    q.matmul(&m.to_dense())
        .matmul(&q.transpose())
        .upper_to_point()
}
