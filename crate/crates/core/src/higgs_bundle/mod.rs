//! Hermitian Higgs bundles over flat tori: metric, reference holomorphic
//! structure, Higgs field, and the scenario catalog.

mod catalog;
mod higgs;
mod metric;
pub mod random;
mod scenario;
mod twist;

pub use catalog::{build_named, catalog_spec, scenario_catalog, CatalogEntry};
pub use higgs::{adjoint_higgs, HiggsField};
pub use metric::MetricField;
pub use scenario::{
    BundleSpec, DeformationKind, DeformationSpec, HiggsBundleScenario, HiggsKind, HiggsParams, HiggsSpec,
    ManifoldSpec, MetricKind, MetricParams, MetricSpec, ScenarioSpec, Tolerances, ValidationReport,
};
pub use twist::TwistData;

use std::f64::consts::PI;

use crate::error::Result;
use crate::kahler_grid::VolumeWeight;

/// deg = ∫ c₁(E, h) ∧ ω^{n−1} with c₁ = (√−1/2π) tr R_h.
pub fn degree(s: &HiggsBundleScenario, h: &MetricField) -> Result<f64> {
    let torus = s.torus();
    let r = crate::hs_geometry::chern_curvature(h, s)?;
    let c1 = r.trace();
    let top = c1.wedge(&torus.omega_power(torus.n() - 1, 1, torus.npts())?)?;
    let ratio = torus.top_ratio(&top)?;
    let integral = torus.integrate_scalar(ratio.data(), VolumeWeight::OmegaN);
    Ok((integral * crate::linalg::I).re / (2.0 * PI))
}

/// μ = deg / rank.
pub fn slope(s: &HiggsBundleScenario, h: &MetricField) -> Result<f64> {
    Ok(degree(s, h)? / s.rank() as f64)
}
