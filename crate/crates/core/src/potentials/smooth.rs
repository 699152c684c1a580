use super::SmoothPotential;
use crate::error::{invalid, Result};
use crate::space::{sym_eigendecomposition, DenseSymmetric, SpaceDescriptor, SpacePoint};

/// `F(x) = Σ_i ‖x - D_i‖² / 2`.
#[derive(Debug, Clone)]
pub struct QuadraticSum {
    data: Vec<SpacePoint>,
    sum: SpacePoint,
}

pub fn build_quadratic_sum(data: Vec<SpacePoint>) -> Result<QuadraticSum> {
    let Some(first) = data.first() else {
        return invalid("quadratic sum needs at least one datum");
    };
    let mut sum = SpacePoint::zeros(first.descriptor());
    for d in &data {
        d.check_same(first)?;
        sum.axpy(1.0, d);
    }
    Ok(QuadraticSum { data, sum })
}

impl QuadraticSum {
    pub fn data(&self) -> &[SpacePoint] {
        &self.data
    }
}

impl SmoothPotential for QuadraticSum {
    fn descriptor(&self) -> SpaceDescriptor {
        self.sum.descriptor()
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        self.data.iter().map(|d| x.dist_sq(d)).sum::<f64>() / 2.0
    }

    fn full_gradient(&self, x: &SpacePoint) -> SpacePoint {
        let mut g = x.scaled(self.data.len() as f64);
        g.axpy(-1.0, &self.sum);
        g
    }

    fn num_terms(&self) -> usize {
        self.data.len()
    }

    fn term_gradient(&self, x: &SpacePoint, i: usize) -> SpacePoint {
        let mut g = x.sub(&self.data[i]);
        g.scale(self.data.len() as f64);
        g
    }

    fn smoothness(&self) -> f64 {
        self.data.len() as f64
    }

    fn strong_convexity(&self) -> f64 {
        self.data.len() as f64
    }
}

/// Negative Gaussian log-likelihood in the precision matrix,
/// `F(x) = Σ_i tr(D_i D_iᵀ x) / 2`, which is linear in `x`.
///
/// With `d = 1` the state space is a flat vector of length one.
#[derive(Debug, Clone)]
pub struct PrecisionLikelihood {
    outer: Vec<SpacePoint>,
    sum: SpacePoint,
}

pub fn build_precision_likelihood(data: &[Vec<f64>]) -> Result<PrecisionLikelihood> {
    let Some(first) = data.first() else {
        return invalid("precision likelihood needs at least one datum");
    };
    let d = first.len();
    if d == 0 {
        return invalid("data vectors must be nonempty");
    }
    let desc = if d == 1 {
        SpaceDescriptor::flat(1)
    } else {
        SpaceDescriptor::symmetric(d)
    };
    let mut outer = Vec::with_capacity(data.len());
    let mut sum = SpacePoint::zeros(desc);
    for v in data {
        if v.len() != d {
            return invalid(format!("data vectors have lengths {d} and {}", v.len()));
        }
        let mut o = SpacePoint::zeros(desc);
        for i in 0..d {
            for j in i..d {
                o.set(i, if desc.is_matrix() { j } else { 0 }, v[i] * v[j] / 2.0);
            }
        }
        sum.axpy(1.0, &o);
        outer.push(o);
    }
    Ok(PrecisionLikelihood { outer, sum })
}

impl PrecisionLikelihood {
    /// `Σ_i D_i D_iᵀ / 2`, the (constant) gradient.
    pub fn scatter_half(&self) -> &SpacePoint {
        &self.sum
    }
}

impl SmoothPotential for PrecisionLikelihood {
    fn descriptor(&self) -> SpaceDescriptor {
        self.sum.descriptor()
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        self.sum.inner_unchecked(x)
    }

    fn full_gradient(&self, _x: &SpacePoint) -> SpacePoint {
        self.sum.clone()
    }

    fn num_terms(&self) -> usize {
        self.outer.len()
    }

    fn term_gradient(&self, _x: &SpacePoint, i: usize) -> SpacePoint {
        self.outer[i].scaled(self.outer.len() as f64)
    }

    /// Linear: the `γ ≤ 1/L` step-size condition is vacuous.
    fn smoothness(&self) -> f64 {
        0.0
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }
}

/// `F(x) = (x - c)ᵀ A (x - c) / 2` on flat vectors, `A` symmetric positive
/// semidefinite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: DenseSymmetric,
    center: SpacePoint,
    lambda_min: f64,
    lambda_max: f64,
}

impl Quadratic {
    pub fn new(a: DenseSymmetric, center: Vec<f64>) -> Result<Self> {
        if a.dim() != center.len() {
            return invalid("matrix and center dimensions differ");
        }
        let eig = sym_eigendecomposition(&a.upper_to_point())?;
        let lambda_min = eig.eigenvalues[0];
        let lambda_max = *eig.eigenvalues.last().unwrap();
        if lambda_min < -1e-12 * lambda_max.abs().max(1.0) {
            return invalid("quadratic form is not positive semidefinite");
        }
        Ok(Self {
            a,
            center: SpacePoint::from_vec(center),
            lambda_min: lambda_min.max(0.0),
            lambda_max,
        })
    }

    pub fn center(&self) -> &SpacePoint {
        &self.center
    }
}

impl SmoothPotential for Quadratic {
    fn descriptor(&self) -> SpaceDescriptor {
        self.center.descriptor()
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        let r = x.sub(&self.center);
        let ar = self.a.matvec(r.coords());
        r.coords().iter().zip(&ar).map(|(u, v)| u * v).sum::<f64>() / 2.0
    }

    fn full_gradient(&self, x: &SpacePoint) -> SpacePoint {
        let r = x.sub(&self.center);
        SpacePoint::from_vec(self.a.matvec(r.coords()))
    }

    fn num_terms(&self) -> usize {
        1
    }

    fn term_gradient(&self, x: &SpacePoint, _i: usize) -> SpacePoint {
        self.full_gradient(x)
    }

    fn smoothness(&self) -> f64 {
        self.lambda_max
    }

    fn strong_convexity(&self) -> f64 {
        self.lambda_min
    }
}
