use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::functionals::{
    bracket_square_trace, constant_c_detail, energy_i_from, functional_report, i_minus_j_decomposition,
    kobayashi_j_from, lower_bound_c, verify_trace_square_lemma, FunctionalReport,
};
use crate::higgs_bundle::{degree, HiggsBundleScenario};
use crate::hs_geometry::{hs_curvature, verify_mean_curvature_identity};
use crate::variation_flow::{
    analytic_first_variation, descend_j, euler_lagrange_residual_from, fd_first_variation, random_direction,
    variation_of_mean_curvature, verify_adjoint_variation, verify_inner_product_lemma, FlowStatus, MetricPath,
};

use super::config::{Command, RunConfig};
use super::output::{slug, write_atomic};
use super::snapshot::Snapshot;

/// Why a run did not succeed.
#[derive(Debug)]
pub enum RunError {
    /// Unreadable config, malformed or invalid scenario.
    Input(Error),
    /// A computation failed or left its tolerance.
    Numeric(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 2,
            RunError::Numeric(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(e) => write!(f, "{e}"),
            RunError::Numeric(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// False when some check left its tolerance.
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable table for stdout.
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// |a − b| / max(|a|, |b|, 1).
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn numeric<T>(r: crate::Result<T>) -> Result<T, RunError> {
    r.map_err(RunError::Numeric)
}

pub fn build_scenarios(cfg: &RunConfig, seed: u64) -> Result<Vec<HiggsBundleScenario>, RunError> {
    let specs = cfg.scenario_specs().map_err(RunError::Input)?;
    specs
        .iter()
        .map(|s| s.build(seed, cfg.summation).map_err(RunError::Input))
        .collect()
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let cmd = cfg.resolve_command(cmd).map_err(RunError::Input)?;
    let scenarios = build_scenarios(cfg, cfg.seed)?;
    std::fs::create_dir_all(out).map_err(|e| RunError::Input(e.into()))?;
    match cmd {
        Command::Verify => verify(cfg, &scenarios, out),
        Command::Evaluate => evaluate(&scenarios, out),
        Command::Flow => flow(cfg, &scenarios, out),
        Command::Variation => variation(cfg, &scenarios, out),
        Command::Sweep => sweep(cfg, out),
    }
}

fn write(out: &Path, name: &str, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    let path = out.join(name);
    write_atomic(&path, bytes).map_err(RunError::Numeric)?;
    files.push(path);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub scenario: String,
    pub identity: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Every identity applicable to the scenario, evaluated at its metric.
pub fn verify_rows(cfg: &RunConfig, s: &HiggsBundleScenario) -> crate::Result<Vec<CheckRow>> {
    let tol = &cfg.tolerances;
    let torus = s.torus();
    let n = torus.n();
    let h = s.metric();
    let mut rows = Vec::new();
    let mut push = |identity, residual: f64, tolerance| {
        rows.push(CheckRow {
            scenario: s.label().to_string(),
            identity,
            residual,
            tolerance,
        })
    };

    let cb = hs_curvature(h, s)?;
    let expected = (s.rank() as i64 * s.twist().degree()) as f64;
    let deg = degree(s, h)?;
    push("degree", (deg - expected).abs(), tol.identity);

    let vcfg = &cfg.variation;
    let k = random_direction(torus, s.rank(), vcfg.amplitude, vcfg.modes, cfg.seed ^ 0xd1)?;
    let moved = h.exp_update(&k, 1.0)?;
    push("degree_metric_independence", (degree(s, &moved)? - deg).abs(), tol.identity);

    let c = constant_c_detail(s, h)?;
    push("constant_c_routes", relative_error(c.closed_form, c.sigma_route), tol.identity);
    push("mean_curvature_identity", verify_mean_curvature_identity(&cb, s)?, tol.identity);
    push("curvature_hermitian", cb.r11_hermitian_residual()?, tol.hermitian);
    push("mean_curvature_hermitian", cb.k_hermitian_residual(), tol.hermitian);
    push("curvature_antihermitian_part", cb.r11_minus_residual(), s.tolerances().holomorphy);

    let j = kobayashi_j_from(s, &cb)?;
    let i = energy_i_from(s, &cb)?;
    push("j_lower_bound", (lower_bound_c(s)? - j).max(0.0), tol.identity * j.abs().max(1.0));
    if n == 1 {
        push("i_equals_j", relative_error(i, j), tol.n1_remark);
    } else {
        push("trace_square_lemma", verify_trace_square_lemma(s, h)?, tol.identity);
        let d = i_minus_j_decomposition(s, h)?;
        push("i_minus_j_decomposition", d.residual / d.lhs.abs().max(1.0), tol.identity);
        push("bracket_square_trace", bracket_square_trace(&cb)?, tol.algebraic);
    }

    let el = euler_lagrange_residual_from(s, &cb)?;
    push("el_halves", el.halves_mismatch() / el.total.max(1.0), tol.el_halves);

    let path = MetricPath::new(h.clone(), k, vcfg.path)?;
    let t = path.default_step();
    let lemma = verify_inner_product_lemma(s, h, path.v())?;
    push("inner_product_lemma", lemma.residual / lemma.rhs.abs().max(1.0), tol.identity);
    push("higgs_sub_identity", lemma.sub_pointwise, tol.identity);
    let fv = relative_error(analytic_first_variation(s, &path)?, fd_first_variation(s, &path, t, true)?);
    push("first_variation", fv, tol.variation);
    push("mean_curvature_variation", variation_of_mean_curvature(s, &path, t)?.relative, tol.variation);
    let adj = verify_adjoint_variation(s, &path, t)?;
    push("adjoint_variation", adj.residual / adj.scale.max(1.0), tol.adjoint_variation);
    Ok(rows)
}

fn verify(cfg: &RunConfig, scenarios: &[HiggsBundleScenario], out: &Path) -> Result<Outcome, RunError> {
    let rows: Vec<CheckRow> = numeric(
        scenarios
            .par_iter()
            .map(|s| verify_rows(cfg, s))
            .collect::<crate::Result<Vec<_>>>(),
    )?
    .concat();
    let mut csv = String::from("scenario,identity,residual,tolerance,status\n");
    let mut summary = String::new();
    for r in &rows {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(csv, "{},{},{:e},{:e},{status}", r.scenario.replace(',', ";"), r.identity, r.residual, r.tolerance);
        let _ = writeln!(summary, "{status}  {:<24} {:<30} {:>10.3e} <= {:.1e}", r.scenario, r.identity, r.residual, r.tolerance);
    }
    let mut files = Vec::new();
    write(out, "verify.csv", csv.as_bytes(), &mut files)?;
    Ok(Outcome {
        passed: rows.iter().all(CheckRow::passed),
        files,
        summary,
    })
}

fn evaluate(scenarios: &[HiggsBundleScenario], out: &Path) -> Result<Outcome, RunError> {
    let reports = numeric(
        scenarios
            .par_iter()
            .map(|s| functional_report(s, s.metric()))
            .collect::<crate::Result<Vec<_>>>(),
    )?;
    let mut csv = format!("{}\n", FunctionalReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let mut files = Vec::new();
    write(out, "evaluate.csv", csv.as_bytes(), &mut files)?;
    Ok(Outcome {
        passed: true,
        files,
        summary: csv,
    })
}

fn flow(cfg: &RunConfig, scenarios: &[HiggsBundleScenario], out: &Path) -> Result<Outcome, RunError> {
    // each item writes its own files as soon as its run ends
    let items = scenarios
        .par_iter()
        .map(|s| -> Result<(bool, String, Vec<PathBuf>), RunError> {
            let (h, trace) = numeric(descend_j(s, s.metric(), &cfg.flow))?;
            let name = slug(s.label());
            let mut files = Vec::new();
            write(out, &format!("flow_{name}.csv"), trace.to_csv().as_bytes(), &mut files)?;
            write(out, &format!("metric_{name}.bin"), &Snapshot::of(s.torus(), &h).to_bytes(), &mut files)?;
            let first = trace.rows[0];
            let last = *trace.last();
            // a run that stops short of the tolerance is still useful if J went down
            let ok = trace.status == FlowStatus::Converged || last.j < first.j;
            let line = format!(
                "{:<24} {:?} steps={} J: {:.6e} -> {:.6e} c={:.6e} el={:.3e}\n",
                s.label(),
                trace.status,
                last.step,
                first.j,
                last.j,
                trace.c,
                last.el_residual
            );
            Ok((ok, line, files))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut outcome = Outcome {
        passed: true,
        ..Outcome::default()
    };
    for (ok, line, files) in items {
        outcome.passed &= ok;
        outcome.summary.push_str(&line);
        outcome.files.extend(files);
    }
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationRow {
    pub scenario: String,
    pub direction_seed: u64,
    pub analytic: f64,
    pub fd: f64,
    pub relative_error: f64,
}

/// First variation along `directions` random paths through the scenario metric.
pub fn variation_rows(cfg: &RunConfig, s: &HiggsBundleScenario) -> crate::Result<Vec<VariationRow>> {
    let v = &cfg.variation;
    (0..v.directions as u64)
        .map(|i| {
            let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(i);
            let k = random_direction(s.torus(), s.rank(), v.amplitude, v.modes, seed)?;
            let path = MetricPath::new(s.metric().clone(), k, v.path)?;
            let analytic = analytic_first_variation(s, &path)?;
            let fd = fd_first_variation(s, &path, path.default_step(), true)?;
            Ok(VariationRow {
                scenario: s.label().to_string(),
                direction_seed: seed,
                analytic,
                fd,
                relative_error: relative_error(analytic, fd),
            })
        })
        .collect()
}

fn variation(cfg: &RunConfig, scenarios: &[HiggsBundleScenario], out: &Path) -> Result<Outcome, RunError> {
    let rows: Vec<VariationRow> = numeric(
        scenarios
            .par_iter()
            .map(|s| variation_rows(cfg, s))
            .collect::<crate::Result<Vec<_>>>(),
    )?
    .concat();
    let mut csv = String::from("scenario,direction_seed,analytic,fd,relative_error\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:e},{:e},{:e}",
            r.scenario.replace(',', ";"),
            r.direction_seed,
            r.analytic,
            r.fd,
            r.relative_error
        );
    }
    let mut files = Vec::new();
    write(out, "variation.csv", csv.as_bytes(), &mut files)?;
    Ok(Outcome {
        passed: rows.iter().all(|r| r.relative_error <= cfg.variation.tolerance),
        files,
        summary: csv,
    })
}

fn sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let seeds = if cfg.sweep.seeds.is_empty() { vec![cfg.seed] } else { cfg.sweep.seeds.clone() };
    let specs = cfg.scenario_specs().map_err(RunError::Input)?;
    let jobs: Vec<_> = seeds.iter().flat_map(|&seed| specs.iter().map(move |s| (seed, s))).collect();
    // built up front so invalid input is reported before any work starts
    let built = jobs
        .iter()
        .map(|&(seed, spec)| spec.build(seed, cfg.summation).map(|s| (seed, s)).map_err(RunError::Input))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = built
        .par_iter()
        .map(|(seed, s)| functional_report(s, s.metric()).map(|r| (*seed, r)))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(RunError::Numeric)?;
    let mut csv = format!("seed,{}\n", FunctionalReport::CSV_HEADER);
    for (seed, r) in &reports {
        let _ = writeln!(csv, "{seed},{}", r.csv_row());
    }
    let mut files = Vec::new();
    write(out, "sweep.csv", csv.as_bytes(), &mut files)?;
    Ok(Outcome {
        passed: true,
        files,
        summary: csv,
    })
}
