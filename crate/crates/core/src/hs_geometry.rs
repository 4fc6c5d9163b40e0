//! Chern connection, Hitchin–Simpson operators and curvature decomposition.

use crate::error::{Error, Result};
use crate::higgs_bundle::{adjoint_higgs, HiggsBundleScenario, MetricField};
use crate::kahler_grid::{Coupling, EndoField, EndoFormField, KahlerTorus, MixedForm};
use crate::linalg::{self, C64, I};

/// (1,0) part A′ = H⁻¹∂H − a*_h of the Chern connection of ∂̄_E and h.
pub fn chern_connection_form(h: &MetricField, s: &HiggsBundleScenario) -> Result<EndoFormField> {
    h.fits(s.torus(), s.rank())?;
    let torus = s.torus();
    let dh = torus.d(&EndoFormField::from_endo(torus.n(), h.h().clone()), Coupling::None)?;
    let a_prime = dh.left_mul(h.h_inv());
    match s.twist().deformation() {
        Some(a) => a_prime.sub(&a.h_adjoint(h.h(), h.h_inv())?),
        None => Ok(a_prime),
    }
}

/// R_h = F₀·I + ∂̄A′ + ∂a + [a, A′].
///
/// ∂̄A′ is expanded with the Leibniz rule so that only derivatives of H
/// itself and a single ∂a enter; the ∂̄(a^†) term is taken as (∂a)^†. The
/// result is Hermitian to rounding. Its trace is then replaced by the
/// determinant-line expression r·F₀ + ∂̄∂ log det H + ∂ tr a − (∂ tr a)^†,
/// which is an exact spectral derivative, so ∫ tr R_h ∧ ω^{n−1} does not
/// drift when H stops being band-limited (e.g. along a flow).
pub fn chern_curvature(h: &MetricField, s: &HiggsBundleScenario) -> Result<EndoFormField> {
    h.fits(s.torus(), s.rank())?;
    let torus = s.torus();
    let n = torus.n();
    let hh = EndoFormField::from_endo(n, h.h().clone());
    let dh = torus.d(&hh, Coupling::None)?;
    let dbh = torus.d_bar(&hh, Coupling::None)?;
    let ddbh = torus.d_bar(&dh, Coupling::None)?;
    // X = H⁻¹ ∂̄H H⁻¹ = −∂̄(H⁻¹)
    let x = dbh.left_mul(h.h_inv()).right_mul(h.h_inv());
    let dbar_p = ddbh.left_mul(h.h_inv()).sub(&x.wedge(&dh)?)?;
    let mut r = s.twist().background_form(torus, s.rank())?.add(&dbar_p)?;
    if let Some(a) = s.twist().deformation() {
        let id = EndoField::identity(s.rank(), torus.npts());
        let a_dag = a.h_adjoint(&id, &id)?;
        let da = torus.d(a, Coupling::None)?;
        let dbar_a_dag = da.h_adjoint(&id, &id)?;
        // ∂̄(H⁻¹ a^† H) = −X∧a^†H + H⁻¹ ∂̄(a^†) H − H⁻¹a^†∧∂̄H
        let dbar_q = dbar_a_dag
            .left_mul(h.h_inv())
            .right_mul(h.h())
            .sub(&x.wedge(&a_dag.right_mul(h.h()))?)?
            .sub(&a_dag.left_mul(h.h_inv()).wedge(&dbh)?)?;
        let a_prime = chern_connection_form(h, s)?;
        r = r.sub(&dbar_q)?.add(&da)?.add(&a.bracket(&a_prime)?)?;
    }
    let exact = trace_curvature(h, s)?;
    let defect = exact.sub(&r.trace())?.scale(C64::new(1.0 / s.rank() as f64, 0.0));
    r.add(&defect.scalar_times_identity(s.rank())?)
}

/// tr R_h from the induced metric det H on the determinant line.
fn trace_curvature(h: &MetricField, s: &HiggsBundleScenario) -> Result<EndoFormField> {
    let torus = s.torus();
    let n = torus.n();
    let r = s.rank();
    let log_det: Vec<C64> = (0..torus.npts())
        .map(|p| C64::new(linalg::determinant(h.h().at(p), r).re.ln(), 0.0))
        .collect();
    let f = EndoFormField::from_endo(n, EndoField::from_data(1, log_det)?);
    let mut t = torus.d_bar(&torus.d(&f, Coupling::None)?, Coupling::None)?;
    t = t.add(&s.twist().background_form(torus, 1)?.scale(C64::new(r as f64, 0.0)))?;
    if let Some(a) = s.twist().deformation() {
        let one = EndoField::identity(1, torus.npts());
        let dtr = torus.d(&a.trace(), Coupling::None)?;
        t = t.add(&dtr)?.sub(&dtr.h_adjoint(&one, &one)?)?;
    }
    Ok(t)
}

/// R_h with ∂̄_E applied spectrally to the assembled connection form A′.
/// Agrees with [`chern_curvature`] up to aliasing of the product H⁻¹∂H.
pub fn chern_curvature_direct(h: &MetricField, s: &HiggsBundleScenario) -> Result<EndoFormField> {
    let torus = s.torus();
    let a_prime = chern_connection_form(h, s)?;
    let mut r = s.twist().background_form(torus, s.rank())?;
    r = r.add(&s.twist().d_bar_e(torus, &a_prime)?)?;
    if let Some(a) = s.twist().deformation() {
        r = r.add(&torus.d(a, Coupling::None)?)?;
    }
    Ok(r)
}

/// The operators 𝒟′_h = D′_h + [φ*_h, ·] and 𝒟″ = ∂̄_E + [φ, ·] on End E-valued forms.
#[derive(Clone, Debug)]
pub struct HsOperators<'a> {
    scenario: &'a HiggsBundleScenario,
    a_prime: EndoFormField,
    phi: EndoFormField,
    phi_star: EndoFormField,
}

pub fn hs_operators<'a>(h: &MetricField, s: &'a HiggsBundleScenario) -> Result<HsOperators<'a>> {
    Ok(HsOperators {
        scenario: s,
        a_prime: chern_connection_form(h, s)?,
        phi: s.higgs().form().clone(),
        phi_star: adjoint_higgs(s.higgs(), h)?,
    })
}

impl HsOperators<'_> {
    fn torus(&self) -> &KahlerTorus {
        self.scenario.torus()
    }

    fn check(&self, v: &EndoFormField) -> Result<()> {
        if v.rank() != self.scenario.rank() {
            return Err(Error::ShapeMismatch(format!(
                "operand rank {} but bundle rank {}",
                v.rank(),
                self.scenario.rank()
            )));
        }
        Ok(())
    }

    pub fn connection_form(&self) -> &EndoFormField {
        &self.a_prime
    }
    pub fn phi(&self) -> &EndoFormField {
        &self.phi
    }
    pub fn phi_star(&self) -> &EndoFormField {
        &self.phi_star
    }

    /// D′_h v = ∂v + [A′, v].
    pub fn d_prime_h(&self, v: &EndoFormField) -> Result<EndoFormField> {
        self.check(v)?;
        self.torus().d(v, Coupling::Bracket(&self.a_prime))
    }

    /// ∂̄_E v.
    pub fn d_second_e(&self, v: &EndoFormField) -> Result<EndoFormField> {
        self.check(v)?;
        self.scenario.twist().d_bar_e(self.torus(), v)
    }

    /// 𝒟′_h v; the parts of bidegree above n are dropped.
    pub fn hs_prime(&self, v: &EndoFormField) -> Result<MixedForm> {
        let mut out = MixedForm::new();
        let (p, q) = v.bidegree();
        let n = self.torus().n();
        if p < n {
            out.push(self.d_prime_h(v)?)?;
        }
        if q < n {
            out.push(self.phi_star.bracket(v)?)?;
        }
        Ok(out)
    }

    /// 𝒟″ v; the parts of bidegree above n are dropped.
    pub fn hs_second(&self, v: &EndoFormField) -> Result<MixedForm> {
        let mut out = MixedForm::new();
        let (p, q) = v.bidegree();
        let n = self.torus().n();
        if q < n {
            out.push(self.d_second_e(v)?)?;
        }
        if p < n {
            out.push(self.phi.bracket(v)?)?;
        }
        Ok(out)
    }

    pub fn hs_prime_mixed(&self, v: &MixedForm) -> Result<MixedForm> {
        let mut out = MixedForm::new();
        for part in v.parts() {
            for piece in self.hs_prime(part)?.parts() {
                out.push(piece.clone())?;
            }
        }
        Ok(out)
    }

    pub fn hs_second_mixed(&self, v: &MixedForm) -> Result<MixedForm> {
        let mut out = MixedForm::new();
        for part in v.parts() {
            for piece in self.hs_second(part)?.parts() {
                out.push(piece.clone())?;
            }
        }
        Ok(out)
    }
}

/// Curvature of the Hitchin–Simpson connection, split by type.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    /// Chern curvature including the background.
    pub r_h: EndoFormField,
    /// [φ, φ*_h] = φ∧φ* + φ*∧φ.
    pub bracket: EndoFormField,
    pub r11: EndoFormField,
    /// D′_h φ; absent when n = 1.
    pub r20: Option<EndoFormField>,
    /// ∂̄_E φ* + φ*∧φ*; absent when n = 1.
    pub r02: Option<EndoFormField>,
    /// ∂̄_E φ + D′_h φ*, zero for holomorphic φ.
    pub r11_minus: EndoFormField,
    /// 𝒦_h = √−1 Λ ℛ¹ᐧ¹.
    pub k: EndoField,
    /// σ_h = tr 𝒦_h (real part).
    pub sigma: Vec<f64>,
    /// The metric the bundle was computed for.
    pub h: MetricField,
}

pub fn hs_curvature(h: &MetricField, s: &HiggsBundleScenario) -> Result<CurvatureBundle> {
    let ops = hs_operators(h, s)?;
    let torus = s.torus();
    let r_h = chern_curvature(h, s)?;
    let bracket = ops.phi.bracket(&ops.phi_star)?;
    let r11 = r_h.add(&bracket)?;
    let (r20, r02) = if torus.n() >= 2 {
        let r20 = ops.d_prime_h(&ops.phi)?;
        let r02 = ops.d_second_e(&ops.phi_star)?.add(&ops.phi_star.wedge(&ops.phi_star)?)?;
        (Some(r20), Some(r02))
    } else {
        (None, None)
    };
    let r11_minus = ops.d_second_e(&ops.phi)?.add(&ops.d_prime_h(&ops.phi_star)?)?;
    let k = torus.lambda_contract(&r11)?;
    let sigma = k.trace().iter().map(|z| z.re).collect();
    Ok(CurvatureBundle {
        r_h,
        bracket,
        r11,
        r20,
        r02,
        r11_minus,
        k,
        sigma,
        h: h.clone(),
    })
}

impl CurvatureBundle {
    /// Sup norm of ℛ¹ᐧ¹ + (ℛ¹ᐧ¹)*_h; zero iff ℛ¹ᐧ¹ has Hermitian coefficients
    /// (H R_{βᾱ} = R_{αβ̄}^† H).
    pub fn r11_hermitian_residual(&self) -> Result<f64> {
        Ok(self.r11.add(&self.r11.h_adjoint(self.h.h(), self.h.h_inv())?)?.max_norm())
    }

    /// Sup norm of H𝒦 − 𝒦^†H.
    pub fn k_hermitian_residual(&self) -> f64 {
        self.h.hermitian_residual(&self.k)
    }

    pub fn r11_minus_residual(&self) -> f64 {
        self.r11_minus.max_norm()
    }
}

/// Sup norm of 𝒦ωⁿ − √−1 n ℛ¹ᐧ¹∧ω^{n−1}.
pub fn verify_mean_curvature_identity(cb: &CurvatureBundle, s: &HiggsBundleScenario) -> Result<f64> {
    let torus = s.torus();
    let n = torus.n();
    let (r, npts) = (s.rank(), torus.npts());
    let lhs = EndoFormField::from_endo(n, cb.k.clone()).wedge(&torus.omega_power(n, r, npts)?)?;
    let rhs = cb
        .r11
        .wedge(&torus.omega_power(n - 1, r, npts)?)?
        .scale(I * C64::new(n as f64, 0.0));
    Ok(lhs.sub(&rhs)?.max_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs_bundle::{build_named, ManifoldSpec, TwistData};
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn conformal_connection_is_log_derivative() {
        let s = build_named("CONFORMAL(0.3)", &ManifoldSpec::unit(1, 32), 4).unwrap();
        let torus = s.torus();
        let a = chern_connection_form(s.metric(), &s).unwrap();
        let u: Vec<C64> = s.metric().h().data().iter().map(|x| C64::new(x.re.ln(), 0.0)).collect();
        let (du, _) = torus.engine().partials(&u);
        let err = a.components()[0]
            .data()
            .iter()
            .zip(&du[0])
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn constant_metric_is_flat() {
        let s = build_named("NILPOTENT", &ManifoldSpec::unit(2, 8), 1).unwrap();
        let m = [C64::new(2.0, 0.0), C64::new(0.3, 0.4), C64::new(0.3, -0.4), ONE];
        let h = MetricField::constant(&m, 2, s.torus().npts()).unwrap();
        assert!(chern_curvature(&h, &s).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn nilpotent_mean_curvature() {
        let s = build_named("NILPOTENT(1)", &ManifoldSpec::unit(1, 8), 1).unwrap();
        let cb = hs_curvature(s.metric(), &s).unwrap();
        // unit area, g = 1: K = 2·[E12, E21] = diag(1, −1) in this convention
        let k = cb.k.at(0);
        let expect = [ONE, ZERO, ZERO, -ONE];
        for (x, y) in k.iter().zip(expect) {
            assert!((x - y).norm() < 1e-12, "{k:?}");
        }
        assert!(verify_mean_curvature_identity(&cb, &s).unwrap() < 1e-12);
    }

    #[test]
    fn twisted_reference_has_constant_curvature() {
        let t = KahlerTorus::with_volume(1, 1.0, 8).unwrap();
        let tw = TwistData::new(&t, 1);
        assert!((tw.background_scalar() - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        let s = build_named("TWISTED(1)", &ManifoldSpec::unit(1, 8), 1).unwrap();
        let cb = hs_curvature(s.metric(), &s).unwrap();
        let c = 2.0 * std::f64::consts::PI;
        assert!(cb.k.data().iter().all(|z| (z - c).norm() < 1e-12));
        assert!(verify_mean_curvature_identity(&cb, &s).unwrap() < 1e-10);
    }

    #[test]
    fn dbar_of_adjoint_is_adjoint_of_d() {
        let t = KahlerTorus::new(2, &[1.0, 0.9], 8).unwrap();
        let mut rng = crate::higgs_bundle::random::rng(3);
        let comps = (0..2)
            .map(|_| crate::higgs_bundle::random::complex_field(&t, &mut rng, 2, 0.5, 2).unwrap())
            .collect();
        let a = EndoFormField::from_components(2, 0, 1, comps).unwrap();
        let id = EndoField::identity(2, t.npts());
        let lhs = t.d_bar(&a.h_adjoint(&id, &id).unwrap(), Coupling::None).unwrap();
        let rhs = t.d(&a, Coupling::None).unwrap().h_adjoint(&id, &id).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-11);
    }

    #[test]
    fn leibniz_and_direct_curvature_agree() {
        for (name, n, grid) in [("PERTURBED_NILPOTENT", 1, 32), ("GAUGED_NILPOTENT", 1, 32), ("GAUGED_NILPOTENT", 2, 12)] {
            let s = build_named(name, &ManifoldSpec::unit(n, grid), 8).unwrap();
            let a = chern_curvature(s.metric(), &s).unwrap();
            let b = chern_curvature_direct(s.metric(), &s).unwrap();
            let err = a.sub(&b).unwrap().max_norm() / a.max_norm().max(1.0);
            assert!(err < 1e-9, "{name} n={n}: {err}");
        }
    }
}
