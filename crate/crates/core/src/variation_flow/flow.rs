use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{constant_c_from, kobayashi_j_from};
use crate::higgs_bundle::{HiggsBundleScenario, MetricField};
use crate::hs_geometry::{hs_curvature, CurvatureBundle};
use crate::kahler_grid::{EndoField, VolumeWeight};
use crate::linalg::{self, C64};

use super::variation::euler_lagrange_residual_from;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub max_steps: usize,
    /// Initial step; `None` means 0.1 / (1 + |c|).
    pub step0: Option<f64>,
    pub shrink: f64,
    /// Stop once the Euler–Lagrange residual drops below this.
    pub tol: f64,
    pub max_backtracks: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            max_steps: 500,
            step0: None,
            shrink: 0.5,
            tol: 1e-6,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowRow {
    pub step: usize,
    pub t: f64,
    pub j: f64,
    pub hym_residual: f64,
    pub el_residual: f64,
    pub step_size: f64,
    pub backtracks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    MaxSteps,
    /// No step size in the backtracking range decreased 𝒥.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTrace {
    pub rows: Vec<FlowRow>,
    pub status: FlowStatus,
    pub c: f64,
}

impl FlowTrace {
    pub const CSV_HEADER: &'static str = "step,t,J,hym_residual,el_residual,step_size,backtracks";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{}",
                r.step, r.t, r.j, r.hym_residual, r.el_residual, r.step_size, r.backtracks
            );
        }
        out
    }

    pub fn last(&self) -> &FlowRow {
        self.rows.last().expect("trace has an initial row")
    }

    /// Largest increase J_{k+1} − J_k over the trace (≤ 0 for a monotone run).
    pub fn max_increase(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].j - w[0].j).fold(f64::NEG_INFINITY, f64::max)
    }
}

struct State {
    h: MetricField,
    cb: CurvatureBundle,
    j: f64,
    hym: f64,
    el: f64,
}

fn evaluate(s: &HiggsBundleScenario, h: MetricField, c: f64) -> Result<State> {
    let cb = hs_curvature(&h, s)?;
    let j = kobayashi_j_from(s, &cb)?;
    let torus = s.torus();
    let shifted = cb.k.sub(&EndoField::identity(s.rank(), torus.npts()).scale(C64::new(c, 0.0)));
    let r = s.rank();
    let dens: Vec<f64> = (0..torus.npts())
        .map(|p| linalg::trace(&linalg::mul(shifted.at(p), shifted.at(p), r), r).re)
        .collect();
    let hym = torus.integrate_real(&dens, VolumeWeight::OmegaN);
    let el = euler_lagrange_residual_from(s, &cb)?.total;
    Ok(State { h, cb, j, hym, el })
}

/// Hermitian form H(𝒦 − cI), symmetrized against rounding.
fn direction(state: &State, c: f64) -> EndoField {
    let r = state.h.rank();
    state.cb.k.map(|p, k| {
        let mut hk = linalg::mul(state.h.h().at(p), k, r);
        for (x, hv) in hk.iter_mut().zip(state.h.h().at(p)) {
            *x -= hv * c;
        }
        let t = linalg::conj_transpose(&hk, r);
        hk.iter().zip(t).map(|(a, b)| (a + b) * 0.5).collect()
    })
}

/// Descends 𝒥 along h ← h·exp(−ε(𝒦_h − cI)) with backtracking on ε.
pub fn descend_j(s: &HiggsBundleScenario, h0: &MetricField, params: &FlowParams) -> Result<(MetricField, FlowTrace)> {
    if !(params.shrink > 0.0 && params.shrink < 1.0) {
        return Err(Error::InvalidInput("shrink factor must lie in (0, 1)".into()));
    }
    h0.fits(s.torus(), s.rank())?;
    let cb0 = hs_curvature(h0, s)?;
    let c = constant_c_from(s, &cb0)?;
    let step0 = params.step0.unwrap_or(0.1 / (1.0 + c.abs()));
    if !(step0 > 0.0) {
        return Err(Error::InvalidInput("initial step must be positive".into()));
    }
    let mut state = evaluate(s, h0.clone(), c)?;
    let mut rows = vec![FlowRow {
        step: 0,
        t: 0.0,
        j: state.j,
        hym_residual: state.hym,
        el_residual: state.el,
        step_size: 0.0,
        backtracks: 0,
    }];
    let mut t = 0.0;
    let mut eps = step0;
    let mut status = FlowStatus::MaxSteps;
    for step in 1..=params.max_steps {
        if state.el < params.tol {
            status = FlowStatus::Converged;
            break;
        }
        let k = direction(&state, c);
        let mut trial = eps;
        let mut backtracks = 0;
        let next = loop {
            let candidate = state.h.exp_update(&k, -trial).and_then(|h| evaluate(s, h, c));
            match candidate {
                Ok(next) if next.j <= state.j => break Some(next),
                _ => {
                    backtracks += 1;
                    trial *= params.shrink;
                    if backtracks > params.max_backtracks {
                        break None;
                    }
                }
            }
        };
        let Some(next) = next else {
            status = FlowStatus::Stalled;
            break;
        };
        t += trial;
        // let the step recover after a backtrack, never beyond step0
        eps = (trial / params.shrink).min(step0);
        state = next;
        rows.push(FlowRow {
            step,
            t,
            j: state.j,
            hym_residual: state.hym,
            el_residual: state.el,
            step_size: trial,
            backtracks,
        });
    }
    if status == FlowStatus::MaxSteps && state.el < params.tol {
        status = FlowStatus::Converged;
    }
    Ok((state.h, FlowTrace { rows, status, c }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higgs_bundle::{build_named, ManifoldSpec};

    #[test]
    fn critical_start_stops_immediately() {
        let s = build_named("TWISTED(1)", &ManifoldSpec::unit(1, 8), 0).unwrap();
        let (_, trace) = descend_j(&s, s.metric(), &FlowParams::default()).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.status, FlowStatus::Converged);
    }

    #[test]
    fn nilpotent_decreases() {
        let s = build_named("NILPOTENT(1)", &ManifoldSpec::unit(1, 8), 0).unwrap();
        let params = FlowParams {
            max_steps: 20,
            ..FlowParams::default()
        };
        let (_, trace) = descend_j(&s, s.metric(), &params).unwrap();
        assert!((trace.rows[0].j - 1.0).abs() < 1e-12);
        assert!(trace.last().j < 1.0);
        assert!(trace.max_increase() <= 0.0);
        // constant K: φ* scales by e^{−2ε} per step, so J = e^{−4t}
        let r = trace.rows[1];
        assert!((r.j - (-4.0 * r.t).exp()).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn csv_header_and_rows() {
        let s = build_named("FLAT", &ManifoldSpec::unit(1, 8), 0).unwrap();
        let (_, trace) = descend_j(&s, s.metric(), &FlowParams::default()).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("step,t,J,hym_residual,el_residual,step_size,backtracks\n0,"));
        assert_eq!(csv.lines().count(), 2);
    }
}
