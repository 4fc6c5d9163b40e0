use serde::Serialize;

use crate::error::{Error, Result};
use crate::higgs_bundle::{adjoint_higgs, HiggsBundleScenario, MetricField};
use crate::hs_geometry::{hs_curvature, hs_operators, CurvatureBundle};
use crate::functionals::kobayashi_j_from;
use crate::kahler_grid::{factorial, EndoField, EndoFormField, KahlerTorus, MixedForm};
use crate::linalg::{C64, ZERO};

use super::path::MetricPath;

/// ⟨ψ, η⟩ summed over matching bidegrees.
pub fn mixed_inner(torus: &KahlerTorus, a: &MixedForm, b: &MixedForm, h: &MetricField) -> Result<C64> {
    let mut acc = ZERO;
    for part in a.parts() {
        let (p, q) = part.bidegree();
        if let Some(other) = b.part(p, q) {
            acc += torus.l2_inner(part, other, h.h(), h.h_inv())?;
        }
    }
    Ok(acc)
}

/// Symmetric difference quotient (f(t) − f(−t)) / 2t.
pub fn central_difference(mut f: impl FnMut(f64) -> Result<Vec<C64>>, t: f64) -> Result<Vec<C64>> {
    let plus = f(t)?;
    let minus = f(-t)?;
    Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * t)).collect())
}

/// (4·D(t/2) − D(t)) / 3 with D the central difference.
pub fn richardson(mut f: impl FnMut(f64) -> Result<Vec<C64>>, t: f64) -> Result<Vec<C64>> {
    let coarse = central_difference(&mut f, t)?;
    let fine = central_difference(&mut f, t / 2.0)?;
    Ok(fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect())
}

fn difference(f: impl FnMut(f64) -> Result<Vec<C64>>, t: f64, extrapolate: bool) -> Result<Vec<C64>> {
    if extrapolate {
        richardson(f, t)
    } else {
        central_difference(f, t)
    }
}

/// n!·Re⟨𝒟′_h v, 𝒟′_h 𝒦_h⟩ at the base of the path.
pub fn analytic_first_variation(s: &HiggsBundleScenario, path: &MetricPath) -> Result<f64> {
    let h = path.base();
    let cb = hs_curvature(h, s)?;
    let ops = hs_operators(h, s)?;
    let n = s.torus().n();
    let dv = ops.hs_prime(&EndoFormField::from_endo(n, path.v().clone()))?;
    let dk = ops.hs_prime(&EndoFormField::from_endo(n, cb.k.clone()))?;
    Ok(factorial(n) * mixed_inner(s.torus(), &dv, &dk, h)?.re)
}

/// Difference quotient of 𝒥 along the path, Richardson-extrapolated over
/// {t, t/2} when `extrapolate` is set.
pub fn fd_first_variation(s: &HiggsBundleScenario, path: &MetricPath, t_step: f64, extrapolate: bool) -> Result<f64> {
    if !(t_step > 0.0) || t_step >= path.t_max() {
        return Err(Error::InvalidPath { t: t_step });
    }
    let j = |t: f64| -> Result<Vec<C64>> {
        let h = path.at(t)?;
        Ok(vec![C64::new(kobayashi_j_from(s, &hs_curvature(&h, s)?)?, 0.0)])
    };
    Ok(difference(j, t_step, extrapolate)?[0].re)
}

/// √−1 Λ 𝒟″𝒟′_h v.
pub fn mean_curvature_derivative(s: &HiggsBundleScenario, h: &MetricField, v: &EndoField) -> Result<EndoField> {
    let ops = hs_operators(h, s)?;
    let n = s.torus().n();
    let first = ops.hs_prime(&EndoFormField::from_endo(n, v.clone()))?;
    let second = ops.hs_second_mixed(&first)?;
    match second.part(1, 1) {
        Some(f) => s.torus().lambda_contract(f),
        None => Ok(EndoField::zeros(s.rank(), s.torus().npts())),
    }
}

#[derive(Clone, Debug)]
pub struct MeanCurvatureVariation {
    pub analytic: EndoField,
    pub fd: EndoField,
    /// Sup norm of analytic − fd.
    pub residual: f64,
    /// residual / max(1, sup |fd|).
    pub relative: f64,
}

pub fn variation_of_mean_curvature(s: &HiggsBundleScenario, path: &MetricPath, t_step: f64) -> Result<MeanCurvatureVariation> {
    let analytic = mean_curvature_derivative(s, path.base(), path.v())?;
    let k = |t: f64| -> Result<Vec<C64>> { Ok(hs_curvature(&path.at(t)?, s)?.k.into_data()) };
    let fd = EndoField::from_data(s.rank(), richardson(k, t_step)?)?;
    let residual = analytic.sub(&fd).max_norm();
    Ok(MeanCurvatureVariation {
        relative: residual / fd.max_norm().max(1.0),
        analytic,
        fd,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdjointVariation {
    /// Sup norm of ∂_t φ*_t − [φ*, v].
    pub residual: f64,
    /// Sup norm of [φ*, v].
    pub scale: f64,
}

pub fn verify_adjoint_variation(s: &HiggsBundleScenario, path: &MetricPath, t_step: f64) -> Result<AdjointVariation> {
    let star = |t: f64| -> Result<Vec<C64>> {
        let f = adjoint_higgs(s.higgs(), &path.at(t)?)?;
        Ok(f.components().iter().flat_map(|c| c.data().iter().copied()).collect())
    };
    let fd = richardson(star, t_step)?;
    let phi_star = adjoint_higgs(s.higgs(), path.base())?;
    let v = EndoFormField::from_endo(s.torus().n(), path.v().clone());
    let exact = phi_star.bracket(&v)?;
    let flat: Vec<C64> = exact.components().iter().flat_map(|c| c.data().iter().copied()).collect();
    let residual = fd.iter().zip(&flat).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(AdjointVariation {
        residual,
        scale: exact.max_norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InnerProductLemma {
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs − rhs| over the complex values.
    pub residual: f64,
    pub sub_lhs: f64,
    pub sub_rhs: f64,
    pub sub_residual: f64,
    /// Sup over the grid of the pointwise density difference in the Higgs sub-identity.
    pub sub_pointwise: f64,
}

/// ⟨√−1Λ𝒟″𝒟′v, 𝒦⟩ against ⟨𝒟′v, 𝒟′𝒦⟩, and the Higgs-only parts
/// ⟨√−1Λ[φ,[φ*,v]], 𝒦⟩ against ⟨[φ*,v], [φ*,𝒦]⟩.
pub fn verify_inner_product_lemma(s: &HiggsBundleScenario, h: &MetricField, v: &EndoField) -> Result<InnerProductLemma> {
    let torus = s.torus();
    let n = torus.n();
    let cb = hs_curvature(h, s)?;
    let ops = hs_operators(h, s)?;
    let kf = EndoFormField::from_endo(n, cb.k.clone());
    let vf = EndoFormField::from_endo(n, v.clone());

    let lhs_field = EndoFormField::from_endo(n, mean_curvature_derivative(s, h, v)?);
    let lhs = torus.l2_inner(&lhs_field, &kf, h.h(), h.h_inv())?;
    let rhs = mixed_inner(torus, &ops.hs_prime(&vf)?, &ops.hs_prime(&kf)?, h)?;

    let phi_star_v = ops.phi_star().bracket(&vf)?;
    let phi_star_k = ops.phi_star().bracket(&kf)?;
    let inner = ops.phi().bracket(&phi_star_v)?;
    let sub_field = EndoFormField::from_endo(n, torus.lambda_contract(&inner)?);
    let dens_l = torus.pointwise_inner(&sub_field, &kf, h.h(), h.h_inv())?;
    let dens_r = torus.pointwise_inner(&phi_star_v, &phi_star_k, h.h(), h.h_inv())?;
    let sub_pointwise = dens_l.iter().zip(&dens_r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let sub_lhs = torus.l2_inner(&sub_field, &kf, h.h(), h.h_inv())?;
    let sub_rhs = torus.l2_inner(&phi_star_v, &phi_star_k, h.h(), h.h_inv())?;
    Ok(InnerProductLemma {
        lhs: lhs.re,
        rhs: rhs.re,
        residual: (lhs - rhs).norm(),
        sub_lhs: sub_lhs.re,
        sub_rhs: sub_rhs.re,
        sub_residual: (sub_lhs - sub_rhs).norm(),
        sub_pointwise,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElResidual {
    /// ‖𝒟′_h 𝒦_h‖²
    pub prime: f64,
    /// ‖𝒟″ 𝒦_h‖²
    pub second: f64,
    pub total: f64,
}

impl ElResidual {
    /// |‖𝒟′𝒦‖² − ‖𝒟″𝒦‖²|; the two halves agree since (𝒟′𝒦)* = 𝒟″𝒦.
    pub fn halves_mismatch(&self) -> f64 {
        (self.prime - self.second).abs()
    }
}

pub fn euler_lagrange_residual(s: &HiggsBundleScenario, h: &MetricField) -> Result<ElResidual> {
    euler_lagrange_residual_from(s, &hs_curvature(h, s)?)
}

pub fn euler_lagrange_residual_from(s: &HiggsBundleScenario, cb: &CurvatureBundle) -> Result<ElResidual> {
    let torus = s.torus();
    let ops = hs_operators(&cb.h, s)?;
    let kf = EndoFormField::from_endo(torus.n(), cb.k.clone());
    let dp = ops.hs_prime(&kf)?;
    let ds = ops.hs_second(&kf)?;
    let prime = mixed_inner(torus, &dp, &dp, &cb.h)?.re;
    let second = mixed_inner(torus, &ds, &ds, &cb.h)?.re;
    Ok(ElResidual {
        prime,
        second,
        total: prime + second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs_bundle::{build_named, ManifoldSpec};
    use crate::linalg::ONE;

    #[test]
    fn differencing_is_exact_on_quadratics() {
        let f = |t: f64| -> Result<Vec<C64>> { Ok(vec![C64::new(3.0 + 2.0 * t - 5.0 * t * t, t * t)]) };
        let d = central_difference(f, 0.1).unwrap();
        assert!((d[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        let cubic = |t: f64| -> Result<Vec<C64>> { Ok(vec![C64::new(t * t * t + t, 0.0)]) };
        let r = richardson(cubic, 0.1).unwrap();
        assert!((r[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_el_halves() {
        let s = build_named("NILPOTENT(1)", &ManifoldSpec::unit(1, 8), 0).unwrap();
        let el = euler_lagrange_residual(&s, s.metric()).unwrap();
        assert!((el.prime - 4.0).abs() < 1e-12 && (el.second - 4.0).abs() < 1e-12, "{el:?}");
    }

    #[test]
    fn identity_direction_is_flat() {
        let s = build_named("PERTURBED_NILPOTENT", &ManifoldSpec::unit(1, 16), 2).unwrap();
        let k = s.metric().h().clone();
        let path = MetricPath::exponential(s.metric().clone(), k).unwrap();
        assert!(path.v().sub(&EndoField::identity(2, s.torus().npts())).max_norm() < 1e-13);
        assert!(analytic_first_variation(&s, &path).unwrap().abs() < 1e-9);
        assert!(fd_first_variation(&s, &path, 1e-3, true).unwrap().abs() < 1e-9);
    }

    #[test]
    fn adjoint_variation_constant_case() {
        // h = I, k = diag(1, −1), φ = E12 dz: [φ*, v] = E21·v − v·E21 = 2E21 dz̄
        let s = build_named("NILPOTENT(1)", &ManifoldSpec::unit(1, 8), 0).unwrap();
        let npts = s.torus().npts();
        let k = EndoField::constant(&[ONE, ZERO, ZERO, -ONE], 2, npts);
        let path = MetricPath::linear(s.metric().clone(), k).unwrap();
        let phi_star = adjoint_higgs(s.higgs(), path.base()).unwrap();
        let b = phi_star.bracket(&EndoFormField::from_endo(1, path.v().clone())).unwrap();
        let expect = [ZERO, ZERO, C64::new(2.0, 0.0), ZERO];
        assert_eq!(b.components()[0].at(3), &expect);
        let a = verify_adjoint_variation(&s, &path, 1e-3).unwrap();
        assert!(a.residual < 1e-10, "{a:?}");
    }
}
