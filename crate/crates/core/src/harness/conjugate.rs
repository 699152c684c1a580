//! Dual iterates computed from the conjugate `G*` alone:
//! `prox_{G*/γ}(x/γ)` by closed forms for each conjugate. No primal prox
//! is called here, so the Moreau identity
//! `x = prox_{γG}(x) + γ prox_{G*/γ}(x/γ)` can be checked between two
//! independent routes.

use std::sync::Arc;

use crate::error::Result;
use crate::potentials::{
    BoxIndicator, L1Norm, LogBarrier, NonsmoothPotential, PsdIndicator, ZeroPotential,
};
use crate::space::{sym_eigendecomposition, SpaceDescriptor, SpacePoint};

#[derive(Debug, Clone)]
pub(crate) enum CatalogEntry {
    /// `G* = ι_{0}`.
    Zero(SpaceDescriptor),
    /// `G*(y) = Σ max(lo_i y_i, hi_i y_i)`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `G* = ι` of the negative semidefinite cone.
    Psd(usize),
    /// `G*(y) = Σ α log(α/(β - y_i)) - α` on `y < β` (spectrally on
    /// matrices).
    LogBarrier {
        desc: SpaceDescriptor,
        alpha: f64,
        beta: f64,
    },
    /// `G* = ι_{|y_ij| ≤ w}`.
    L1 { desc: SpaceDescriptor, weight: f64 },
}

impl CatalogEntry {
    pub(crate) fn standard() -> Vec<CatalogEntry> {
        vec![
            CatalogEntry::Zero(SpaceDescriptor::flat(3)),
            CatalogEntry::Zero(SpaceDescriptor::symmetric(3)),
            CatalogEntry::Box {
                lo: vec![-1.0, 0.0, -2.5],
                hi: vec![1.0, 0.5, 3.0],
            },
            CatalogEntry::Psd(3),
            CatalogEntry::Psd(5),
            CatalogEntry::LogBarrier {
                desc: SpaceDescriptor::flat(4),
                alpha: 1.5,
                beta: 0.5,
            },
            CatalogEntry::LogBarrier {
                desc: SpaceDescriptor::flat(2),
                alpha: 0.0,
                beta: 0.5,
            },
            CatalogEntry::LogBarrier {
                desc: SpaceDescriptor::symmetric(3),
                alpha: 2.0,
                beta: 0.5,
            },
            CatalogEntry::L1 {
                desc: SpaceDescriptor::flat(3),
                weight: 0.7,
            },
            CatalogEntry::L1 {
                desc: SpaceDescriptor::symmetric(3),
                weight: 0.3,
            },
        ]
    }

    pub(crate) fn descriptor(&self) -> SpaceDescriptor {
        match self {
            CatalogEntry::Zero(desc)
            | CatalogEntry::LogBarrier { desc, .. }
            | CatalogEntry::L1 { desc, .. } => *desc,
            CatalogEntry::Box { lo, .. } => SpaceDescriptor::flat(lo.len()),
            CatalogEntry::Psd(d) => SpaceDescriptor::symmetric(*d),
        }
    }

    pub(crate) fn label(&self) -> String {
        let desc = self.descriptor();
        let space = if desc.is_matrix() {
            format!("sym{}", desc.d)
        } else {
            format!("R{}", desc.d)
        };
        let name = match self {
            CatalogEntry::Zero(_) => "zero",
            CatalogEntry::Box { .. } => "box",
            CatalogEntry::Psd(_) => "psd",
            CatalogEntry::LogBarrier { alpha, .. } if *alpha == 0.0 => "logbarrier(α=0)",
            CatalogEntry::LogBarrier { desc, .. } if desc.is_matrix() => "logdet",
            CatalogEntry::LogBarrier { .. } => "logbarrier",
            CatalogEntry::L1 { .. } => "l1",
        };
        format!("{name}/{space}")
    }

    pub(crate) fn potential(&self) -> Result<Arc<dyn NonsmoothPotential>> {
        Ok(match self {
            CatalogEntry::Zero(desc) => Arc::new(ZeroPotential::new(*desc)),
            CatalogEntry::Box { lo, hi } => Arc::new(BoxIndicator::new(lo.clone(), hi.clone())?),
            CatalogEntry::Psd(d) => Arc::new(PsdIndicator::new(*d)),
            CatalogEntry::LogBarrier { desc, alpha, beta } => {
                Arc::new(LogBarrier::new(*desc, *alpha, *beta)?)
            }
            CatalogEntry::L1 { desc, weight } => Arc::new(L1Norm::new(*desc, *weight)?),
        })
    }

    /// `prox_{G*/γ}(x/γ)`.
    pub(crate) fn conjugate_dual(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        let v = x.scaled(1.0 / gamma);
        match self {
            CatalogEntry::Zero(desc) => Ok(SpacePoint::zeros(*desc)),
            CatalogEntry::Box { lo, hi } => {
                let mut y = v.clone();
                for (i, c) in y.coords_mut().iter_mut().enumerate() {
                    let (a, b) = (lo[i] / gamma, hi[i] / gamma);
                    *c = if *c > b {
                        *c - b
                    } else if *c < a {
                        *c - a
                    } else {
                        0.0
                    };
                }
                Ok(y)
            }
            CatalogEntry::Psd(_) => {
                Ok(sym_eigendecomposition(&v)?.reconstruct_with(|l| l.min(0.0)))
            }
            CatalogEntry::LogBarrier { desc, alpha, beta } => {
                let f = |t: f64| logbarrier_conjugate_prox(gamma, t, *alpha, *beta);
                if desc.is_matrix() {
                    Ok(sym_eigendecomposition(&v)?.reconstruct_with(f))
                } else {
                    Ok(v.map(f))
                }
            }
            CatalogEntry::L1 { weight, .. } => Ok(v.map(|c| c.clamp(-weight, *weight))),
        }
    }
}

/// Minimizer over `y < β` of `g*(y)/γ + (y - v)²/2` with
/// `g*(y) = -α - α log((β - y)/α)`. Writing `s = β - y > 0`, the optimality
/// condition is `s² - (β - v)s - α/γ = 0`.
fn logbarrier_conjugate_prox(gamma: f64, v: f64, alpha: f64, beta: f64) -> f64 {
    let b = beta - v;
    let c = alpha / gamma;
    if c == 0.0 {
        return beta - b.max(0.0);
    }
    let disc = (b * b + 4.0 * c).sqrt();
    let s = if b >= 0.0 {
        (b + disc) / 2.0
    } else {
        2.0 * c / (disc - b)
    };
    beta - s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::golden_section;

    #[test]
    fn scalar_conjugate_prox_by_search() {
        // Direct minimization of g*(y)/γ + (y - v)²/2 over y < β.
        for &(gamma, v, alpha, beta) in &[
            (0.5, 1.0, 1.5, 0.5),
            (2.0, -3.0, 0.7, 0.5),
            (0.01, 40.0, 2.0, 1.0),
        ] {
            let obj = |y: f64| {
                (-alpha - alpha * ((beta - y) / alpha).ln()) / gamma + (y - v).powi(2) / 2.0
            };
            let lo = v.min(beta) - 10.0 - (alpha / gamma).sqrt();
            let found = golden_section(lo, beta, 1e-14, |a, b| obj(a) < obj(b));
            let closed = logbarrier_conjugate_prox(gamma, v, alpha, beta);
            assert!(
                (found - closed).abs() < 1e-6 * closed.abs().max(1.0),
                "{found} vs {closed}"
            );
        }
    }

    #[test]
    fn box_dual_examples() {
        let e = CatalogEntry::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        };
        assert_eq!(
            e.conjugate_dual(1.0, &SpacePoint::scalar(3.0))
                .unwrap()
                .coords(),
            &[2.0]
        );
        assert_eq!(
            e.conjugate_dual(0.5, &SpacePoint::scalar(-1.0))
                .unwrap()
                .coords(),
            &[-2.0]
        );
        assert_eq!(
            e.conjugate_dual(0.5, &SpacePoint::scalar(0.3))
                .unwrap()
                .coords(),
            &[0.0]
        );
    }

    #[test]
    fn psd_dual_is_negative_part() {
        let e = CatalogEntry::Psd(2);
        let y = e
            .conjugate_dual(2.0, &SpacePoint::from_diagonal(&[4.0, -6.0]))
            .unwrap();
        assert!(y.dist_sq(&SpacePoint::from_diagonal(&[0.0, -3.0])) < 1e-28);
    }

    #[test]
    fn every_entry_builds() {
        for e in CatalogEntry::standard() {
            assert_eq!(
                e.potential().unwrap().descriptor(),
                e.descriptor(),
                "{}",
                e.label()
            );
        }
    }
}
