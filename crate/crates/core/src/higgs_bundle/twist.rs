use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kahler_grid::{factorial, Coupling, EndoField, EndoFormField, KahlerTorus};
use crate::linalg::{self, C64};

/// Reference holomorphic structure: a uniform line-bundle twist of degree `d`
/// per summand (constant curvature F₀ = f·g_{αβ̄} ⊗ I) and an optional
/// (0,1) deformation a, so that ∂̄_E = ∂̄ + a.
#[derive(Clone, Debug)]
pub struct TwistData {
    degree: i64,
    background: f64,
    deformation: Option<EndoFormField>,
    gauge: Option<EndoField>,
}

impl TwistData {
    pub fn untwisted() -> Self {
        TwistData {
            degree: 0,
            background: 0.0,
            deformation: None,
            gauge: None,
        }
    }

    /// Twist of degree `d` on each line summand: f = 2πd / (n!·Vol).
    pub fn new(torus: &KahlerTorus, degree: i64) -> Self {
        TwistData {
            degree,
            background: 2.0 * PI * degree as f64 / (factorial(torus.n()) * torus.volume()),
            deformation: None,
            gauge: None,
        }
    }

    /// Adds a deformation a: (0,1)-form of endomorphisms.
    pub fn with_deformation(mut self, a: EndoFormField) -> Result<Self> {
        a.expect_bidegree(0, 1)?;
        self.deformation = Some(a);
        Ok(self)
    }

    /// Deformation gauge-equivalent to the reference structure: a = g⁻¹∂̄g.
    /// The gauge g is retained so Higgs fields can be carried along.
    pub fn gauged(mut self, torus: &KahlerTorus, g: EndoField) -> Result<Self> {
        let r = g.rank();
        let mut g_inv = Vec::with_capacity(g.data().len());
        for p in 0..g.npts() {
            let m = linalg::inverse(g.at(p), r)
                .ok_or_else(|| Error::InvalidInput(format!("gauge not invertible at point {p}")))?;
            g_inv.extend(m);
        }
        let g_inv = EndoField::from_data(r, g_inv)?;
        let dg = torus.d_bar(&EndoFormField::from_endo(torus.n(), g.clone()), Coupling::None)?;
        let a = dg.left_mul(&g_inv);
        self.deformation = Some(a);
        self.gauge = Some(g);
        Ok(self)
    }

    /// Degree d of each line summand.
    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// The scalar f in F₀ = f·g_{αβ̄} dz^α∧dz̄^β.
    pub fn background_scalar(&self) -> f64 {
        self.background
    }

    pub fn deformation(&self) -> Option<&EndoFormField> {
        self.deformation.as_ref()
    }

    pub fn gauge(&self) -> Option<&EndoField> {
        self.gauge.as_ref()
    }

    /// F₀ ⊗ I as a (1,1)-form.
    pub fn background_form(&self, torus: &KahlerTorus, rank: usize) -> Result<EndoFormField> {
        let coeffs: Vec<C64> = torus.metric().iter().map(|g| g * self.background).collect();
        EndoFormField::constant_scalar(torus.n(), 1, 1, &coeffs, rank, torus.npts())
    }

    /// ∂̄_E ψ on End E-valued forms.
    pub fn d_bar_e(&self, torus: &KahlerTorus, psi: &EndoFormField) -> Result<EndoFormField> {
        match &self.deformation {
            Some(a) => torus.d_bar(psi, Coupling::Bracket(a)),
            None => torus.d_bar(psi, Coupling::None),
        }
    }

    /// Sup norm of the (0,2) part ∂̄a + a∧a; identically zero when n = 1.
    pub fn integrability_residual(&self, torus: &KahlerTorus) -> Result<f64> {
        let Some(a) = &self.deformation else {
            return Ok(0.0);
        };
        if torus.n() < 2 {
            return Ok(0.0);
        }
        let f = torus.d_bar(a, Coupling::None)?.add(&a.wedge(a)?)?;
        Ok(f.max_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs_bundle::random;

    #[test]
    fn background_matches_degree_on_curve() {
        let t = KahlerTorus::with_volume(1, 2.0, 8).unwrap();
        let tw = TwistData::new(&t, 3);
        assert!((tw.background_scalar() - 3.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn gauge_deformation_is_integrable() {
        let t = KahlerTorus::new(2, &[1.0, 1.0], 12).unwrap();
        let b = random::complex_field(&t, &mut random::rng(9), 2, 0.03, 1).unwrap();
        let g = EndoField::identity(2, t.npts()).add(&b);
        let tw = TwistData::untwisted().gauged(&t, g).unwrap();
        let res = tw.integrability_residual(&t).unwrap();
        assert!(res < 1e-8, "residual {res}");
        assert!(tw.deformation().unwrap().max_norm() > 1e-2);
    }
}
