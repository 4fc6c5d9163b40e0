use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::higgs_bundle::{random, MetricField};
use crate::kahler_grid::{EndoField, KahlerTorus};
use crate::linalg;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// h + t·k
    #[default]
    Linear,
    /// h·exp(t·h⁻¹k)
    Exponential,
}

/// A one-parameter family of metrics through `base` with tangent k at t = 0.
#[derive(Clone, Debug)]
pub struct MetricPath {
    base: MetricField,
    k: EndoField,
    v: EndoField,
    kind: PathKind,
    t_max: f64,
}

pub const DIRECTION_HERMITIAN_TOL: f64 = 1e-12;

impl MetricPath {
    pub fn new(base: MetricField, k: EndoField, kind: PathKind) -> Result<Self> {
        if k.rank() != base.rank() || k.npts() != base.npts() {
            return Err(Error::ShapeMismatch("direction does not match metric".into()));
        }
        let r = k.rank();
        let scale = k.max_norm().max(1.0);
        for p in 0..k.npts() {
            let defect = linalg::hermitian_defect(k.at(p), r);
            if defect > DIRECTION_HERMITIAN_TOL * scale {
                return Err(Error::invariant(format!("direction Hermitian at point {p}"), defect, DIRECTION_HERMITIAN_TOL));
            }
        }
        let v = base.endomorphism_of(&k);
        let t_max = match kind {
            PathKind::Exponential => f64::INFINITY,
            PathKind::Linear => {
                // eigenvalues of h⁻¹k are those of L⁻¹ k L^{-†}
                let mut lam: f64 = 0.0;
                for p in 0..k.npts() {
                    let l = linalg::cholesky(base.h().at(p), r).ok_or(Error::SingularMetric { point: p })?;
                    let li = linalg::inverse(&l, r).ok_or(Error::SingularMetric { point: p })?;
                    let s = linalg::mul3(&li, k.at(p), &linalg::conj_transpose(&li, r), r);
                    let (ev, _) = linalg::hermitian_eigen(&s, r);
                    lam = ev.iter().fold(lam, |m, x| m.max(x.abs()));
                }
                if lam == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / lam
                }
            }
        };
        Ok(MetricPath { base, k, v, kind, t_max })
    }

    pub fn linear(base: MetricField, k: EndoField) -> Result<Self> {
        Self::new(base, k, PathKind::Linear)
    }

    pub fn exponential(base: MetricField, k: EndoField) -> Result<Self> {
        Self::new(base, k, PathKind::Exponential)
    }

    pub fn base(&self) -> &MetricField {
        &self.base
    }
    pub fn k(&self) -> &EndoField {
        &self.k
    }
    /// v = h⁻¹k.
    pub fn v(&self) -> &EndoField {
        &self.v
    }
    pub fn kind(&self) -> PathKind {
        self.kind
    }
    /// Paths stay in Herm⁺ for |t| < t_max.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn at(&self, t: f64) -> Result<MetricField> {
        if t.abs() >= self.t_max {
            return Err(Error::InvalidPath { t });
        }
        match self.kind {
            PathKind::Linear => {
                MetricField::new(self.base.h().axpy(linalg::C64::new(t, 0.0), &self.k)).map_err(|_| Error::InvalidPath { t })
            }
            PathKind::Exponential => self.base.exp_update(&self.k, t),
        }
    }

    /// Finite-difference step 10⁻³·‖h‖/‖k‖ (sup norms).
    pub fn default_step(&self) -> f64 {
        let kn = self.k.max_norm();
        if kn == 0.0 {
            1e-3
        } else {
            1e-3 * self.base.h().max_norm() / kn
        }
    }
}

/// Seeded band-limited Hermitian direction field.
pub fn random_direction(torus: &KahlerTorus, rank: usize, amplitude: f64, modes: usize, seed: u64) -> Result<EndoField> {
    let mut rng = random::rng(seed);
    let s = random::hermitian_field(torus, &mut rng, rank, amplitude, modes)?;
    // include a constant part so directions are not mean-free
    let c = random::hermitian_field(torus, &mut rng, rank, amplitude, 1)?;
    Ok(s.add(&EndoField::constant(c.at(0), rank, torus.npts())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, ONE, ZERO};

    #[test]
    fn linear_window() {
        let h = MetricField::identity(2, 3);
        let k = EndoField::constant(&[C64::new(2.0, 0.0), ZERO, ZERO, -ONE], 2, 3);
        let p = MetricPath::linear(h, k).unwrap();
        assert!((p.t_max() - 0.5).abs() < 1e-14);
        assert!(p.at(0.49).is_ok());
        assert!(matches!(p.at(0.5), Err(Error::InvalidPath { .. })));
    }

    #[test]
    fn rejects_non_hermitian_direction() {
        let k = EndoField::constant(&[ONE, ONE, ZERO, ONE], 2, 3);
        assert!(MetricPath::linear(MetricField::identity(2, 3), k).is_err());
    }

    #[test]
    fn exponential_path_derivative_is_k() {
        let h = MetricField::constant(&[C64::new(2.0, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), ONE], 2, 1).unwrap();
        let k = EndoField::constant(&[ONE, C64::new(0.0, 0.5), C64::new(0.0, -0.5), -ONE], 2, 1);
        let p = MetricPath::exponential(h.clone(), k.clone()).unwrap();
        let t = 1e-4;
        let d = p.at(t).unwrap().h().sub(p.at(-t).unwrap().h()).scale(C64::new(0.5 / t, 0.0));
        assert!(d.sub(&k).max_norm() < 1e-7);
    }
}
