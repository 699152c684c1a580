use super::{EmpiricalMeasure, QuantileOracle};
use crate::error::{invalid, Result};
use crate::space::{gaussian_standard, RngStream, SpacePoint};

pub const DEFAULT_PROJECTIONS: usize = 128;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn sorted_w2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

/// Exact squared 2-Wasserstein distance between two equal-size 1-D
/// empirical measures (sorted matching).
pub fn wasserstein2_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    if a.len() != b.len() {
        return invalid(format!("sample sizes differ: {} vs {}", a.len(), b.len()));
    }
    Ok(sorted_w2(&sorted(a.scalars()?), &sorted(b.scalars()?)))
}

/// `(1/N) Σ_i (x_(i) - q((i - 1/2)/N))²` for order statistics `x_(i)`.
pub fn wasserstein2_1d_oracle(a: &EmpiricalMeasure, q: &dyn QuantileOracle) -> Result<f64> {
    let xs = sorted(a.scalars()?);
    Ok(w2_sorted_vs_oracle(&xs, &oracle_grid(q, xs.len())))
}

pub(crate) fn oracle_grid(q: &dyn QuantileOracle, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| q.quantile((i as f64 + 0.5) / n as f64))
        .collect()
}

fn w2_sorted_vs_oracle(xs: &[f64], grid: &[f64]) -> f64 {
    sorted_w2(xs, grid)
}

/// Bootstrap standard error (over resampled points) of
/// [`wasserstein2_1d_oracle`].
pub fn wasserstein2_1d_oracle_stderr(
    a: &EmpiricalMeasure,
    q: &dyn QuantileOracle,
    replicates: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if replicates < 2 {
        return invalid("bootstrap needs at least 2 replicates");
    }
    let xs = a.scalars()?;
    let n = xs.len();
    let grid = oracle_grid(q, n);
    let stats: Vec<f64> = (0..replicates)
        .map(|_| {
            let resample = sorted((0..n).map(|_| xs[rng.index(n)]).collect());
            w2_sorted_vs_oracle(&resample, &grid)
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / replicates as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
    Ok(var.sqrt())
}

/// Average of [`wasserstein2_1d`] over random unit directions `u` of the
/// projected samples `⟨u, x⟩` (trace inner product on matrices).
pub fn sliced_wasserstein2(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    num_projections: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if a.len() != b.len() {
        return invalid(format!("sample sizes differ: {} vs {}", a.len(), b.len()));
    }
    if a.descriptor() != b.descriptor() {
        return invalid("measures live on different spaces");
    }
    if num_projections == 0 {
        return invalid("need at least one projection");
    }
    let project = |m: &EmpiricalMeasure, u: &SpacePoint| {
        sorted(m.points().iter().map(|x| u.inner_unchecked(x)).collect())
    };
    let mut total = 0.0;
    for _ in 0..num_projections {
        let mut u = gaussian_standard(a.descriptor(), rng);
        let norm = u.norm();
        u.scale(1.0 / norm);
        total += sorted_w2(&project(a, &u), &project(b, &u));
    }
    Ok(total / num_projections as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::w2_by_assignment;
    use crate::space::SpaceDescriptor;

    fn m(v: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(v).unwrap()
    }

    #[derive(Debug)]
    struct Uniform01;

    impl QuantileOracle for Uniform01 {
        fn quantile(&self, u: f64) -> f64 {
            u
        }
    }

    #[test]
    fn examples() {
        assert_eq!(
            wasserstein2_1d(&m(&[0.0, 1.0]), &m(&[0.0, 1.0])).unwrap(),
            0.0
        );
        assert_eq!(
            wasserstein2_1d(&m(&[0.0, 1.0]), &m(&[1.0, 2.0])).unwrap(),
            1.0
        );
        assert_eq!(
            wasserstein2_1d(&m(&[0.0, 1.0]), &m(&[2.0, 0.0])).unwrap(),
            0.5
        );
        assert_eq!(w2_by_assignment(&[0.0, 1.0], &[2.0, 0.0]), 0.5);
        assert!(wasserstein2_1d(&m(&[0.0]), &m(&[0.0, 1.0])).is_err());
        let flat2 = EmpiricalMeasure::new(vec![SpacePoint::from_vec(vec![0.0, 1.0])]).unwrap();
        assert!(wasserstein2_1d(&flat2, &flat2).is_err());
    }

    #[test]
    fn matches_assignment_oracle() {
        let mut rng = RngStream::new(31, 0);
        for n in 1..=6 {
            for _ in 0..50 {
                let a: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
                let b: Vec<f64> = (0..n).map(|_| 2.0 * rng.standard_normal() + 0.5).collect();
                let fast = wasserstein2_1d(&m(&a), &m(&b)).unwrap();
                let slow = w2_by_assignment(&a, &b);
                assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0));
            }
        }
    }

    #[test]
    fn metric_sanity() {
        let mut rng = RngStream::new(32, 0);
        for _ in 0..200 {
            let draw =
                |rng: &mut RngStream| m(&(0..5).map(|_| rng.standard_normal()).collect::<Vec<_>>());
            let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let ab = wasserstein2_1d(&a, &b).unwrap();
            assert_eq!(ab, wasserstein2_1d(&b, &a).unwrap());
            assert!(ab > 0.0);
            let bc = wasserstein2_1d(&b, &c).unwrap();
            let ac = wasserstein2_1d(&a, &c).unwrap();
            assert!(ac.sqrt() <= ab.sqrt() + bc.sqrt() + 1e-12);
        }
        assert_eq!(
            wasserstein2_1d(&m(&[3.0, 1.0, 2.0]), &m(&[1.0, 2.0, 3.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn oracle_uses_midpoint_quantiles() {
        let w = wasserstein2_1d_oracle(&m(&[0.25, 0.75]), &Uniform01).unwrap();
        assert_eq!(w, 0.0);
        let w = wasserstein2_1d_oracle(&m(&[0.0, 1.0]), &Uniform01).unwrap();
        assert!((w - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_error_shrinks_with_n() {
        let mut rng = RngStream::new(33, 0);
        let mut se = Vec::new();
        for n in [100, 10_000] {
            let pts: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            se.push(wasserstein2_1d_oracle_stderr(&m(&pts), &Uniform01, 100, &mut rng).unwrap());
        }
        assert!(se[1] < se[0] / 10.0, "{se:?}");
    }

    #[test]
    fn sliced_shift() {
        let mut rng = RngStream::new(34, 0);
        let desc = SpaceDescriptor::flat(3);
        let pts: Vec<SpacePoint> = (0..200)
            .map(|_| gaussian_standard(desc, &mut rng))
            .collect();
        let a = EmpiricalMeasure::new(pts.clone()).unwrap();
        assert_eq!(sliced_wasserstein2(&a, &a, 16, &mut rng).unwrap(), 0.0);
        let v = SpacePoint::from_vec(vec![1.0, -2.0, 0.5]);
        let b = EmpiricalMeasure::new(pts.iter().map(|p| p.add(&v)).collect()).unwrap();
        let s = sliced_wasserstein2(&a, &b, 4000, &mut rng).unwrap();
        let want = v.norm_sq() / 3.0;
        // Var of ⟨u, v⟩² for uniform u on S² is 4‖v‖⁴/45.
        let se = (4.0 * v.norm_sq().powi(2) / 45.0 / 4000.0).sqrt();
        assert!((s - want).abs() < 4.0 * se, "{s} vs {want}");

        let mut rev = pts.clone();
        rev.reverse();
        let c = EmpiricalMeasure::new(rev).unwrap();
        let mut r1 = RngStream::new(35, 0);
        let mut r2 = RngStream::new(35, 0);
        assert_eq!(
            sliced_wasserstein2(&a, &b, 8, &mut r1).unwrap(),
            sliced_wasserstein2(&c, &b, 8, &mut r2).unwrap()
        );
    }

    #[test]
    fn sliced_shift_on_matrices() {
        let mut rng = RngStream::new(36, 0);
        let desc = SpaceDescriptor::symmetric(2);
        let pts: Vec<SpacePoint> = (0..100)
            .map(|_| gaussian_standard(desc, &mut rng))
            .collect();
        let a = EmpiricalMeasure::new(pts.clone()).unwrap();
        let v = SpacePoint::from_dense(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let b = EmpiricalMeasure::new(pts.iter().map(|p| p.add(&v)).collect()).unwrap();
        let s = sliced_wasserstein2(&a, &b, 4000, &mut rng).unwrap();
        // ‖v‖² = 2 in the trace geometry, ambient dimension 3.
        assert!((s - 2.0 / 3.0).abs() < 0.06, "{s}");
    }
}
