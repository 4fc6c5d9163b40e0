//! 𝒥, ℐ, the constants c and 𝒞, and the verifiers built on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::higgs_bundle::{self, HiggsBundleScenario, MetricField};
use crate::hs_geometry::{hs_curvature, CurvatureBundle};
use crate::kahler_grid::{factorial, EndoField, EndoFormField, KahlerTorus, VolumeWeight};
use crate::linalg::{self, C64, I};
use crate::variation_flow::euler_lagrange_residual_from;

/// Agreement required between the two routes to c.
pub const C_ROUTE_TOL: f64 = 1e-8;
/// Agreement required between the closed forms of 𝒞 and between the
/// pointwise and L² routes to 𝒥.
pub const ROUTE_TOL: f64 = 1e-10;

/// c = 2πn·deg / (r·n!·Vol).
pub fn constant_c_closed_form(n: usize, rank: usize, deg: f64, volume: f64) -> f64 {
    2.0 * PI * n as f64 * deg / (rank as f64 * factorial(n) * volume)
}

/// 𝒞 = 2n(π·deg)² / (r·(n−1)!·Vol).
pub fn lower_bound_closed_form(n: usize, rank: usize, deg: f64, volume: f64) -> f64 {
    2.0 * n as f64 * (PI * deg).powi(2) / (rank as f64 * factorial(n - 1) * volume)
}

/// Both routes to c: the closed form and ∫σωⁿ / (r∫ωⁿ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantC {
    pub closed_form: f64,
    pub sigma_route: f64,
    pub sigma_integral: f64,
}

fn constant_c_routes(s: &HiggsBundleScenario, cb: &CurvatureBundle) -> Result<ConstantC> {
    let torus = s.torus();
    let n = torus.n();
    let deg = higgs_bundle::degree(s, &cb.h)?;
    let sigma_integral = torus.integrate_real(&cb.sigma, VolumeWeight::OmegaN);
    let omega_n = factorial(n) * torus.volume();
    Ok(ConstantC {
        closed_form: constant_c_closed_form(n, s.rank(), deg, torus.volume()),
        sigma_route: sigma_integral / (s.rank() as f64 * omega_n),
        sigma_integral,
    })
}

/// c, after checking that both routes agree to [`C_ROUTE_TOL`].
pub fn constant_c(s: &HiggsBundleScenario, h: &MetricField) -> Result<f64> {
    constant_c_from(s, &hs_curvature(h, s)?)
}

pub fn constant_c_from(s: &HiggsBundleScenario, cb: &CurvatureBundle) -> Result<f64> {
    let c = constant_c_routes(s, cb)?;
    let gap = (c.closed_form - c.sigma_route).abs();
    if gap > C_ROUTE_TOL * c.closed_form.abs().max(1.0) {
        return Err(Error::invariant("constant c: closed form vs σ-integral", gap, C_ROUTE_TOL));
    }
    Ok(c.closed_form)
}

pub fn constant_c_detail(s: &HiggsBundleScenario, h: &MetricField) -> Result<ConstantC> {
    constant_c_routes(s, &hs_curvature(h, s)?)
}

/// 𝒞 for the prescribed degree, cross-checked against (r c²/2)·n!·Vol.
pub fn lower_bound_c(s: &HiggsBundleScenario) -> Result<f64> {
    let torus = s.torus();
    let (n, r, vol) = (torus.n(), s.rank(), torus.volume());
    let deg = (r as i64 * s.twist().degree()) as f64;
    let bound = lower_bound_closed_form(n, r, deg, vol);
    let c = constant_c_closed_form(n, r, deg, vol);
    let other = r as f64 * c * c / 2.0 * factorial(n) * vol;
    let gap = (bound - other).abs();
    if gap > ROUTE_TOL * bound.max(1.0) {
        return Err(Error::invariant("lower bound: two closed forms", gap, ROUTE_TOL));
    }
    Ok(bound)
}

/// Pointwise tr(A∘B).
fn trace_product(a: &EndoField, b: &EndoField) -> Vec<f64> {
    let r = a.rank();
    (0..a.npts())
        .map(|p| linalg::trace(&linalg::mul(a.at(p), b.at(p), r), r).re)
        .collect()
}

/// 𝒥 = ½∫|𝒦|²ωⁿ, also computed as (n!/2)‖𝒦‖² and checked to [`ROUTE_TOL`].
pub fn kobayashi_j(s: &HiggsBundleScenario, h: &MetricField) -> Result<f64> {
    kobayashi_j_from(s, &hs_curvature(h, s)?)
}

pub fn kobayashi_j_from(s: &HiggsBundleScenario, cb: &CurvatureBundle) -> Result<f64> {
    let torus = s.torus();
    let j = 0.5 * torus.integrate_real(&trace_product(&cb.k, &cb.k), VolumeWeight::OmegaN);
    let kf = EndoFormField::from_endo(torus.n(), cb.k.clone());
    let l2 = torus.l2_inner(&kf, &kf, cb.h.h(), cb.h.h_inv())?.re * factorial(torus.n()) / 2.0;
    let gap = (j - l2).abs();
    if gap > ROUTE_TOL * j.abs().max(1.0) {
        return Err(Error::invariant("J: pointwise vs L² route", gap, ROUTE_TOL));
    }
    Ok(j)
}

/// Pointwise Σ g^{αβ̄} g^{γδ̄} tr(R_{αδ̄} R_{γβ̄}).
pub fn curvature_square_density(torus: &KahlerTorus, r11: &EndoFormField) -> Result<Vec<f64>> {
    r11.expect_bidegree(1, 1)?;
    let n = torus.n();
    let mut out = vec![0.0; r11.npts()];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let w = torus.inv_metric(a, b) * torus.inv_metric(c, d);
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let x = r11.c11(a, d);
                    let y = r11.c11(c, b);
                    let rk = r11.rank();
                    for (p, o) in out.iter_mut().enumerate() {
                        *o += (w * linalg::trace(&linalg::mul(x.at(p), y.at(p), rk), rk)).re;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// ℐ = ½∫|ℛ¹ᐧ¹|²ωⁿ.
pub fn energy_i(s: &HiggsBundleScenario, h: &MetricField) -> Result<f64> {
    energy_i_from(s, &hs_curvature(h, s)?)
}

pub fn energy_i_from(s: &HiggsBundleScenario, cb: &CurvatureBundle) -> Result<f64> {
    let torus = s.torus();
    let dens = curvature_square_density(torus, &cb.r11)?;
    Ok(0.5 * torus.integrate_real(&dens, VolumeWeight::OmegaN))
}

/// ℐ through the L² product: (n!/2)⟨ℛ¹ᐧ¹, ℛ¹ᐧ¹⟩.
pub fn energy_i_l2(s: &HiggsBundleScenario, cb: &CurvatureBundle) -> Result<f64> {
    let torus = s.torus();
    Ok(torus.l2_inner(&cb.r11, &cb.r11, cb.h.h(), cb.h.h_inv())?.re * factorial(torus.n()) / 2.0)
}

fn require_surface(torus: &KahlerTorus, what: &str) -> Result<()> {
    if torus.n() < 2 {
        return Err(Error::InvalidInput(format!("{what} needs complex dimension 2")));
    }
    Ok(())
}

/// Pointwise top-degree coefficient of tr(F∧F) ∧ ω^{n−2} minus
/// (|F|² − |ΛF|²)/(n(n−1)), in units of ωⁿ, for a (1,1)-form F with F* = −F.
pub fn trace_square_defect(torus: &KahlerTorus, f: &EndoFormField) -> Result<Vec<f64>> {
    require_surface(torus, "trace-square lemma")?;
    let n = torus.n();
    let wedge = f.wedge(f)?.trace().wedge(&torus.omega_power(n - 2, 1, f.npts())?)?;
    let lhs = torus.top_ratio(&wedge)?;
    let norm = curvature_square_density(torus, f)?;
    let k = torus.lambda_contract(f)?;
    let k2 = trace_product(&k, &k);
    let nn = (n * (n - 1)) as f64;
    Ok(lhs
        .data()
        .iter()
        .zip(norm.iter().zip(&k2))
        .map(|(l, (a, b))| (l - C64::new((a - b) / nn, 0.0)).norm())
        .collect())
}

/// Sup of [`trace_square_defect`] for ℛ¹ᐧ¹ of the scenario at `h`.
pub fn verify_trace_square_lemma(s: &HiggsBundleScenario, h: &MetricField) -> Result<f64> {
    require_surface(s.torus(), "trace-square lemma")?;
    let cb = hs_curvature(h, s)?;
    Ok(trace_square_defect(s.torus(), &cb.r11)?.into_iter().fold(0.0, f64::max))
}

/// ℐ − 𝒥 split into its Chern–Weil and Higgs parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IMinusJ {
    pub topological: f64,
    pub higgs_coupling: f64,
    pub lhs: f64,
    pub residual: f64,
}

fn integrate_top(torus: &KahlerTorus, f: &EndoFormField) -> Result<C64> {
    let ratio = torus.top_ratio(f)?;
    Ok(torus.integrate_scalar(ratio.data(), VolumeWeight::OmegaN))
}

/// c₁ = (√−1/2π) tr R and c₂ = −(1/4π²) Σ_{i<j} (R_ii∧R_jj − R_ij∧R_ji).
pub fn chern_forms(r: &EndoFormField) -> Result<(EndoFormField, EndoFormField)> {
    let c1 = r.trace().scale(I / (2.0 * PI));
    let rank = r.rank();
    let mut c2 = EndoFormField::zeros(r.n(), 2, 2, 1, r.npts())?;
    for i in 0..rank {
        for j in i + 1..rank {
            let minor = r.entry(i, i).wedge(&r.entry(j, j))?.sub(&r.entry(i, j).wedge(&r.entry(j, i))?)?;
            c2 = c2.add(&minor)?;
        }
    }
    Ok((c1, c2.scale(C64::new(-1.0 / (4.0 * PI * PI), 0.0))))
}

pub fn i_minus_j_decomposition(s: &HiggsBundleScenario, h: &MetricField) -> Result<IMinusJ> {
    let torus = s.torus();
    require_surface(torus, "I − J decomposition")?;
    let n = torus.n();
    let cb = hs_curvature(h, s)?;
    let lhs = energy_i_from(s, &cb)? - kobayashi_j_from(s, &cb)?;
    let w = torus.omega_power(n - 2, 1, torus.npts())?;
    let (c1, c2) = chern_forms(&cb.r_h)?;
    let chern = c2.scale(C64::new(2.0, 0.0)).sub(&c1.wedge(&c1)?)?;
    let nn = (n * (n - 1)) as f64;
    let topological = 2.0 * PI * PI * nn * integrate_top(torus, &chern.wedge(&w)?)?.re;
    let coupling = cb.r11.wedge(&cb.bracket)?.trace().wedge(&w)?;
    let higgs_coupling = nn * integrate_top(torus, &coupling)?.re;
    Ok(IMinusJ {
        topological,
        higgs_coupling,
        lhs,
        residual: (lhs - topological - higgs_coupling).abs(),
    })
}

/// Sup of tr([φ,φ*]∧[φ,φ*]) over the grid; vanishes identically.
pub fn bracket_square_trace(cb: &CurvatureBundle) -> Result<f64> {
    if cb.bracket.n() < 2 {
        return Ok(0.0);
    }
    Ok(cb.bracket.wedge(&cb.bracket)?.trace().max_norm())
}

/// Aggregated functionals of one scenario at one metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub label: String,
    pub n: usize,
    pub rank: usize,
    pub deg: f64,
    pub volume: f64,
    pub c: f64,
    pub c_bound: f64,
    pub j: f64,
    pub i: f64,
    pub gap: f64,
    pub hym_residual: f64,
    pub el_residual: f64,
    pub sigma_integral: f64,
}

/// Slack for J ≥ 𝒞 and for J − 𝒞 = ½·hym_residual.
pub const QUAD_TOL: f64 = 1e-8;

pub fn functional_report(s: &HiggsBundleScenario, h: &MetricField) -> Result<FunctionalReport> {
    let torus = s.torus();
    let cb = hs_curvature(h, s)?;
    let routes = constant_c_routes(s, &cb)?;
    let c = constant_c_from(s, &cb)?;
    let c_bound = lower_bound_c(s)?;
    let j = kobayashi_j_from(s, &cb)?;
    let i = energy_i_from(s, &cb)?;
    let r = s.rank();
    let shifted = cb.k.sub(&EndoField::identity(r, torus.npts()).scale(C64::new(c, 0.0)));
    let hym_residual = torus.integrate_real(&trace_product(&shifted, &shifted), VolumeWeight::OmegaN);
    let el = euler_lagrange_residual_from(s, &cb)?;
    let report = FunctionalReport {
        label: s.label().to_string(),
        n: torus.n(),
        rank: r,
        deg: higgs_bundle::degree(s, h)?,
        volume: torus.volume(),
        c,
        c_bound,
        j,
        i,
        gap: j - c_bound,
        hym_residual,
        el_residual: el.total,
        sigma_integral: routes.sigma_integral,
    };
    report.check()?;
    Ok(report)
}

impl FunctionalReport {
    pub const CSV_HEADER: &'static str = "label,n,rank,deg,Vol,c,C_bound,J,I,gap,hym_residual,el_residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.label.replace(',', ";"),
            self.n,
            self.rank,
            self.deg,
            self.volume,
            self.c,
            self.c_bound,
            self.j,
            self.i,
            self.gap,
            self.hym_residual,
            self.el_residual
        )
    }

    /// J, I, 𝒞 ≥ 0, J ≥ 𝒞 and J − 𝒞 = ½·hym_residual, all up to [`QUAD_TOL`].
    pub fn check(&self) -> Result<()> {
        let scale = self.j.abs().max(1.0);
        if self.j < -QUAD_TOL || self.i < -QUAD_TOL || self.c_bound < 0.0 {
            return Err(Error::invariant("report: nonnegative functionals", self.j.min(self.i), QUAD_TOL));
        }
        if self.gap < -QUAD_TOL * scale {
            return Err(Error::invariant("report: J ≥ C", -self.gap, QUAD_TOL));
        }
        let defect = (self.gap - 0.5 * self.hym_residual).abs();
        if defect > QUAD_TOL * scale {
            return Err(Error::invariant("report: J − C = hym/2", defect, QUAD_TOL));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs_bundle::{build_named, ManifoldSpec};

    #[test]
    fn closed_forms() {
        assert!((constant_c_closed_form(1, 1, 3.0, 1.0) - 6.0 * PI).abs() < 1e-13);
        assert!((constant_c_closed_form(2, 2, 2.0, PI * PI) - 2.0 / PI).abs() < 1e-15);
        assert!((lower_bound_closed_form(1, 1, 1.0, 1.0) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((lower_bound_closed_form(1, 1, 2.0, 2.0) - 4.0 * PI * PI).abs() < 1e-13);
        assert_eq!(constant_c_closed_form(2, 3, 0.0, 5.0), 0.0);
    }

    #[test]
    fn nilpotent_report() {
        let s = build_named("NILPOTENT(1)", &ManifoldSpec::unit(1, 8), 0).unwrap();
        let r = functional_report(&s, s.metric()).unwrap();
        assert!((r.j - 1.0).abs() < 1e-12);
        assert_eq!(r.c_bound, 0.0);
        assert!((r.gap - 1.0).abs() < 1e-12);
        assert!((r.el_residual - 8.0).abs() < 1e-11, "{}", r.el_residual);
    }

    #[test]
    fn twisted_reference_attains_bound() {
        for d in 1..=3 {
            let s = build_named(&format!("TWISTED({d})"), &ManifoldSpec::unit(1, 8), 0).unwrap();
            let r = functional_report(&s, s.metric()).unwrap();
            let expect = 2.0 * PI * PI * (d * d) as f64;
            assert!((r.c_bound - expect).abs() < 1e-10);
            assert!((r.j - r.c_bound).abs() < 1e-8 * expect);
            assert!(r.hym_residual < 1e-8);
        }
    }

    #[test]
    fn flat_surface_decomposition_vanishes() {
        let s = build_named("FLAT", &ManifoldSpec::unit(2, 4), 0).unwrap();
        let d = i_minus_j_decomposition(&s, s.metric()).unwrap();
        assert_eq!((d.topological, d.higgs_coupling, d.lhs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn surface_only_verifiers_reject_curves() {
        let s = build_named("FLAT", &ManifoldSpec::unit(1, 8), 0).unwrap();
        assert!(verify_trace_square_lemma(&s, s.metric()).is_err());
        assert!(i_minus_j_decomposition(&s, s.metric()).is_err());
    }
}
