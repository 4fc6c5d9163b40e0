use crate::error::{Error, Result};
use crate::kahler_grid::{EndoField, EndoFormField, KahlerTorus};
use crate::linalg::{self, C64};

use super::metric::MetricField;
use super::twist::TwistData;

/// Higgs field φ = Σ φ_α dz^α, an End E-valued (1,0)-form.
#[derive(Clone, Debug)]
pub struct HiggsField {
    phi: EndoFormField,
}

impl HiggsField {
    pub fn new(phi: EndoFormField) -> Result<Self> {
        phi.expect_bidegree(1, 0)?;
        Ok(HiggsField { phi })
    }

    pub fn zero(n: usize, rank: usize, npts: usize) -> Self {
        HiggsField {
            phi: EndoFormField::zeros(n, 1, 0, rank, npts).expect("(1,0) fits every dimension"),
        }
    }

    /// Constant field Σ_α direction[α]·M dz^α.
    pub fn constant(n: usize, matrix: &[C64], direction: &[C64], rank: usize, npts: usize) -> Result<Self> {
        if direction.len() != n || matrix.len() != rank * rank {
            return Err(Error::ShapeMismatch("Higgs direction or matrix size".into()));
        }
        let comps = direction
            .iter()
            .map(|&c| {
                let m: Vec<C64> = matrix.iter().map(|x| x * c).collect();
                EndoField::constant(&m, rank, npts)
            })
            .collect();
        Self::new(EndoFormField::from_components(n, 1, 0, comps)?)
    }

    /// φ_α as a matrix field.
    pub fn component(&self, alpha: usize) -> &EndoField {
        &self.phi.components()[alpha]
    }

    pub fn form(&self) -> &EndoFormField {
        &self.phi
    }

    pub fn rank(&self) -> usize {
        self.phi.rank()
    }

    /// Conjugation g⁻¹φg by a gauge transformation.
    pub fn conjugated(&self, g: &EndoField) -> Result<Self> {
        let r = g.rank();
        let mut inv = Vec::with_capacity(g.data().len());
        for p in 0..g.npts() {
            inv.extend(
                linalg::inverse(g.at(p), r)
                    .ok_or_else(|| Error::InvalidInput(format!("gauge not invertible at point {p}")))?,
            );
        }
        let g_inv = EndoField::from_data(r, inv)?;
        Self::new(self.phi.left_mul(&g_inv).right_mul(g))
    }

    /// Sup norm of ∂̄_E φ.
    pub fn holomorphy_residual(&self, torus: &KahlerTorus, twist: &TwistData) -> Result<f64> {
        Ok(twist.d_bar_e(torus, &self.phi)?.max_norm())
    }

    /// Sup norm of φ∧φ, i.e. of [φ₁, φ₂] when n = 2.
    pub fn commuting_residual(&self) -> Result<f64> {
        if self.phi.n() < 2 {
            return Ok(0.0);
        }
        Ok(self.phi.wedge(&self.phi)?.max_norm())
    }
}

/// φ*_h = Σ H⁻¹ φ_β^† H dz̄^β.
pub fn adjoint_higgs(phi: &HiggsField, h: &MetricField) -> Result<EndoFormField> {
    if phi.rank() != h.rank() || phi.form().npts() != h.npts() {
        return Err(Error::ShapeMismatch("Higgs field and metric disagree in rank or grid".into()));
    }
    phi.form().h_adjoint(h.h(), h.h_inv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs_bundle::random;
    use crate::linalg::{ONE, ZERO};
    use rand::Rng;

    #[test]
    fn identity_metric_adjoint_is_conjugate_transpose() {
        let m = [ZERO, C64::new(1.0, 2.0), C64::new(0.5, 0.0), ZERO];
        let phi = HiggsField::constant(1, &m, &[ONE], 2, 3).unwrap();
        let adj = adjoint_higgs(&phi, &MetricField::identity(2, 3)).unwrap();
        assert_eq!(adj.bidegree(), (0, 1));
        let a = adj.components()[0].at(1);
        assert_eq!(a, linalg::conj_transpose(&m, 2).as_slice());
    }

    #[test]
    fn pairing_identity_random_metric() {
        let t = KahlerTorus::new(1, &[1.0], 8).unwrap();
        let mut rng = random::rng(11);
        let s = random::hermitian_field(&t, &mut rng, 2, 0.4, 1).unwrap();
        let h = MetricField::new(EndoField::identity(2, t.npts()).add(&s)).unwrap();
        let c = random::complex_field(&t, &mut rng, 2, 1.0, 1).unwrap();
        let phi = HiggsField::new(EndoFormField::from_components(1, 1, 0, vec![c]).unwrap()).unwrap();
        let adj = adjoint_higgs(&phi, &h).unwrap();
        for p in 0..t.npts() {
            let v: Vec<C64> = (0..2).map(|_| C64::new(rng.random(), rng.random())).collect();
            let w: Vec<C64> = (0..2).map(|_| C64::new(rng.random(), rng.random())).collect();
            // h(x, y) = y^† H x
            let pair = |x: &[C64], y: &[C64]| {
                let hx = linalg::mul_vec(h.h().at(p), x, 2);
                y.iter().zip(&hx).map(|(a, b)| a.conj() * b).sum::<C64>()
            };
            let lhs = pair(&linalg::mul_vec(adj.components()[0].at(p), &v, 2), &w);
            let rhs = pair(&v, &linalg::mul_vec(phi.component(0).at(p), &w, 2));
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}
