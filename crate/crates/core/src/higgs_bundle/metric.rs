use crate::error::{Error, Result};
use crate::kahler_grid::{EndoField, KahlerTorus};
use crate::linalg::{self, C64};

/// Pointwise Hermitian positive-definite metric H, relative to the reference
/// metric h₀ of the twisted background. The inverse is cached.
#[derive(Clone, Debug)]
pub struct MetricField {
    h: EndoField,
    h_inv: EndoField,
}

pub const HERMITIAN_TOL: f64 = 1e-12;

impl MetricField {
    pub fn new(h: EndoField) -> Result<Self> {
        let r = h.rank();
        let scale = h.max_norm().max(1.0);
        let mut inv = Vec::with_capacity(h.data().len());
        for p in 0..h.npts() {
            let m = h.at(p);
            if linalg::hermitian_defect(m, r) > HERMITIAN_TOL * scale {
                return Err(Error::invariant(
                    format!("metric Hermitian at point {p}"),
                    linalg::hermitian_defect(m, r),
                    HERMITIAN_TOL,
                ));
            }
            if !(linalg::min_hermitian_eigenvalue(m, r) > 0.0) {
                return Err(Error::SingularMetric { point: p });
            }
            let mi = linalg::inverse(m, r).ok_or(Error::SingularMetric { point: p })?;
            inv.extend(mi);
        }
        let h_inv = EndoField::from_data(r, inv)?;
        Ok(MetricField { h, h_inv })
    }

    pub fn identity(rank: usize, npts: usize) -> Self {
        let h = EndoField::identity(rank, npts);
        MetricField {
            h_inv: h.clone(),
            h,
        }
    }

    pub fn constant(matrix: &[C64], rank: usize, npts: usize) -> Result<Self> {
        Self::new(EndoField::constant(matrix, rank, npts))
    }

    /// e^u · I.
    pub fn conformal(u: &[f64], rank: usize) -> Result<Self> {
        let vals: Vec<C64> = u.iter().map(|&x| C64::new(x.exp(), 0.0)).collect();
        Self::new(EndoField::scalar_multiple_of_identity(&vals, rank))
    }

    pub fn rank(&self) -> usize {
        self.h.rank()
    }
    pub fn npts(&self) -> usize {
        self.h.npts()
    }
    pub fn h(&self) -> &EndoField {
        &self.h
    }
    pub fn h_inv(&self) -> &EndoField {
        &self.h_inv
    }

    pub fn fits(&self, torus: &KahlerTorus, rank: usize) -> Result<()> {
        if self.rank() != rank || self.npts() != torus.npts() {
            return Err(Error::ShapeMismatch(format!(
                "metric has rank {} on {} points, expected rank {rank} on {}",
                self.rank(),
                self.npts(),
                torus.npts()
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let r = self.rank();
        (0..self.npts())
            .map(|p| linalg::min_hermitian_eigenvalue(self.h.at(p), r))
            .fold(f64::INFINITY, f64::min)
    }

    /// Constant rescaling λH.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput("metric scale must be positive".into()));
        }
        Ok(MetricField {
            h: self.h.scale(C64::new(lambda, 0.0)),
            h_inv: self.h_inv.scale(C64::new(1.0 / lambda, 0.0)),
        })
    }

    /// h-adjoint H⁻¹ M^† H of an endomorphism field.
    pub fn adjoint(&self, m: &EndoField) -> EndoField {
        let r = self.rank();
        m.map(|p, a| linalg::h_adjoint(a, self.h.at(p), self.h_inv.at(p), r))
    }

    /// max |H M − M^† H|, zero iff M is h-Hermitian.
    pub fn hermitian_residual(&self, m: &EndoField) -> f64 {
        let r = self.rank();
        (0..self.npts())
            .map(|p| {
                let hm = linalg::mul(self.h.at(p), m.at(p), r);
                linalg::hermitian_defect(&hm, r)
            })
            .fold(0.0, f64::max)
    }

    /// The endomorphism v = H⁻¹k of a Hermitian form k.
    pub fn endomorphism_of(&self, k: &EndoField) -> EndoField {
        self.h_inv.mul(k)
    }

    /// H·exp(t H⁻¹k), computed as L exp(t L⁻¹ k L^{-†}) L^† with H = L L^†.
    pub fn exp_update(&self, k: &EndoField, t: f64) -> Result<Self> {
        let r = self.rank();
        let mut out = Vec::with_capacity(self.h.data().len());
        for p in 0..self.npts() {
            let l = linalg::cholesky(self.h.at(p), r).ok_or(Error::SingularMetric { point: p })?;
            let l_inv = linalg::inverse(&l, r).ok_or(Error::SingularMetric { point: p })?;
            let s = linalg::mul3(&l_inv, k.at(p), &linalg::conj_transpose(&l_inv, r), r);
            let e = linalg::hermitian_function(&s, r, |x| (t * x).exp());
            let mut hn = linalg::mul3(&l, &e, &linalg::conj_transpose(&l, r), r);
            // restore exact Hermitian symmetry lost to rounding
            let ht = linalg::conj_transpose(&hn, r);
            for (a, b) in hn.iter_mut().zip(ht) {
                *a = (*a + b) * 0.5;
            }
            out.extend(hn);
        }
        Self::new(EndoField::from_data(r, out)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn rejects_indefinite_and_non_hermitian() {
        let bad = EndoField::constant(&[ONE, ZERO, ZERO, -ONE], 2, 3);
        assert!(matches!(MetricField::new(bad), Err(Error::SingularMetric { .. })));
        let skew = EndoField::constant(&[ONE, ONE, ZERO, ONE], 2, 3);
        assert!(matches!(MetricField::new(skew), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn exp_update_matches_closed_form_for_diagonal() {
        let h = MetricField::constant(&[C64::new(2.0, 0.0), ZERO, ZERO, C64::new(0.5, 0.0)], 2, 1).unwrap();
        // k = H diag(1, -3) so v = diag(1, -3)
        let k = EndoField::constant(&[C64::new(2.0, 0.0), ZERO, ZERO, C64::new(-1.5, 0.0)], 2, 1);
        let out = h.exp_update(&k, 0.1).unwrap();
        let m = out.h().at(0);
        assert!((m[0].re - 2.0 * 0.1f64.exp()).abs() < 1e-14);
        assert!((m[3].re - 0.5 * (-0.3f64).exp()).abs() < 1e-14);
        assert!(m[1].norm() < 1e-15);
    }
}
