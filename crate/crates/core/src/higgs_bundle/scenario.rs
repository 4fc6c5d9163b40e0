use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahler_grid::{DerivativeScheme, EndoField, KahlerTorus};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::summation::Summation;

use super::higgs::HiggsField;
use super::metric::MetricField;
use super::random;
use super::twist::TwistData;

/// Validation thresholds carried with each scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub holomorphy: f64,
    pub commuting: f64,
    pub integrability: f64,
    pub degree: f64,
    pub hermitian: f64,
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            holomorphy: 1e-8,
            commuting: 1e-10,
            integrability: 1e-8,
            degree: 1e-8,
            hermitian: 1e-10,
            identity: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    /// Alternative to `lengths`: a square torus of this volume.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_diag: Option<Vec<f64>>,
    #[serde(default)]
    pub derivative: DerivativeScheme,
}

impl ManifoldSpec {
    pub fn unit(n: usize, grid_points: usize) -> Self {
        ManifoldSpec {
            n,
            lengths: None,
            volume: Some(1.0),
            grid_points,
            metric_diag: None,
            derivative: DerivativeScheme::Spectral,
        }
    }

    pub fn build(&self, summation: Summation) -> Result<KahlerTorus> {
        let n = self.n;
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidInput(format!("complex dimension {n} not in {{1,2}}")));
        }
        let diag = match &self.metric_diag {
            Some(d) if d.len() != n => {
                return Err(Error::InvalidInput(format!("metric_diag needs {n} entries")));
            }
            Some(d) => d.clone(),
            None => vec![1.0; n],
        };
        let lengths = match (&self.lengths, self.volume) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput("give either lengths or volume, not both".into()));
            }
            (Some(l), None) => l.clone(),
            (None, v) => {
                let v = v.unwrap_or(1.0);
                let det: f64 = diag.iter().product();
                if !(v > 0.0) || !(det > 0.0) {
                    return Err(Error::InvalidInput("volume and metric_diag must be positive".into()));
                }
                // Vol = 2ⁿ det g L^{2n}
                let l = (v / (2f64.powi(n as i32) * det)).powf(1.0 / (2.0 * n as f64));
                vec![l; n]
            }
        };
        let mut g = vec![ZERO; n * n];
        for (a, d) in diag.iter().enumerate() {
            g[a * n + a] = C64::new(*d, 0.0);
        }
        Ok(KahlerTorus::with_metric(n, &lengths, self.grid_points, &g, self.derivative)?.with_summation(summation))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeformationKind {
    #[default]
    None,
    /// a = g⁻¹∂̄g with g = I + (band-limited random matrix).
    Gauge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    #[serde(default)]
    pub kind: DeformationKind,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub rank: usize,
    /// Degree of each line summand; the bundle has degree rank × twist_degree.
    #[serde(default)]
    pub twist_degree: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationSpec>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    #[default]
    Identity,
    /// value · I
    Scalar,
    /// diag(values)
    Diagonal,
    /// e^u · I with u band-limited
    Conformal,
    /// I + S with S band-limited Hermitian
    Perturbed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub value: f64,
    pub values: Vec<f64>,
    pub amplitude: f64,
    pub modes: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            value: 1.0,
            values: Vec::new(),
            amplitude: default_amplitude(),
            modes: default_modes(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    #[serde(default)]
    pub kind: MetricKind,
    #[serde(default)]
    pub params: MetricParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiggsKind {
    #[default]
    Zero,
    /// c₀ · (Σ E_{i,i+1}) · Σ direction_α dz^α
    Nilpotent,
    /// c₀ · I · Σ direction_α dz^α
    Scalar,
    /// diag(values) · Σ direction_α dz^α
    Diagonal,
    /// nilpotent field multiplied by 1 + u, u band-limited; not holomorphic
    Modulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HiggsParams {
    pub c0: f64,
    pub direction: Vec<f64>,
    pub values: Vec<f64>,
    pub amplitude: f64,
    pub modes: usize,
}

impl Default for HiggsParams {
    fn default() -> Self {
        HiggsParams {
            c0: 1.0,
            direction: Vec::new(),
            values: Vec::new(),
            amplitude: default_amplitude(),
            modes: default_modes(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiggsSpec {
    #[serde(default)]
    pub kind: HiggsKind,
    #[serde(default)]
    pub params: HiggsParams,
}

fn default_amplitude() -> f64 {
    0.1
}
fn default_modes() -> usize {
    1
}

/// Serializable description of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub label: String,
    pub manifold: ManifoldSpec,
    pub bundle: BundleSpec,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default)]
    pub higgs: HiggsSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ScenarioSpec {
    /// Builds and validates. `seed` is used wherever the document does not
    /// fix one.
    pub fn build(&self, seed: u64, summation: Summation) -> Result<HiggsBundleScenario> {
        let torus = self.manifold.build(summation)?;
        let npts = torus.npts();
        let rank = self.bundle.rank;
        if rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }

        let mut twist = TwistData::new(&torus, self.bundle.twist_degree);
        if let Some(def) = &self.bundle.deformation {
            if def.kind == DeformationKind::Gauge {
                let mut rng = random::rng(seed ^ 0x5eed_0001);
                let b = random::complex_field(&torus, &mut rng, rank, def.amplitude, def.modes)?;
                twist = twist.gauged(&torus, EndoField::identity(rank, npts).add(&b))?;
            }
        }

        let metric = self.metric.build(&torus, rank, self.metric.seed.unwrap_or(seed))?;
        let mut higgs = self.higgs.build(&torus, rank, seed)?;
        if let Some(g) = twist.gauge() {
            higgs = higgs.conjugated(g)?;
        }
        HiggsBundleScenario::new(&self.label, torus, twist, rank, metric, higgs, self.tolerances)
    }
}

impl MetricSpec {
    pub fn build(&self, torus: &KahlerTorus, rank: usize, seed: u64) -> Result<MetricField> {
        let npts = torus.npts();
        let p = &self.params;
        match self.kind {
            MetricKind::Identity => Ok(MetricField::identity(rank, npts)),
            MetricKind::Scalar => {
                let m: Vec<C64> = linalg::identity(rank).iter().map(|x| x * p.value).collect();
                MetricField::constant(&m, rank, npts)
            }
            MetricKind::Diagonal => {
                if p.values.len() != rank {
                    return Err(Error::InvalidInput(format!("diagonal metric needs {rank} values")));
                }
                let mut m = vec![ZERO; rank * rank];
                for (i, v) in p.values.iter().enumerate() {
                    m[i * rank + i] = C64::new(*v, 0.0);
                }
                MetricField::constant(&m, rank, npts)
            }
            MetricKind::Conformal => {
                let u = random::real_field(torus, &mut random::rng(seed), p.amplitude, p.modes)?;
                MetricField::conformal(&u, rank)
            }
            MetricKind::Perturbed => {
                let s = random::hermitian_field(torus, &mut random::rng(seed), rank, p.amplitude, p.modes)?;
                MetricField::new(EndoField::identity(rank, npts).add(&s))
            }
        }
    }
}

impl HiggsSpec {
    pub fn build(&self, torus: &KahlerTorus, rank: usize, seed: u64) -> Result<HiggsField> {
        let n = torus.n();
        let npts = torus.npts();
        let p = &self.params;
        let direction: Vec<C64> = if p.direction.is_empty() {
            (0..n).map(|a| if a == 0 { ONE } else { ZERO }).collect()
        } else if p.direction.len() == n {
            p.direction.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            return Err(Error::InvalidInput(format!("Higgs direction needs {n} entries")));
        };
        let nilpotent = || {
            let mut m = vec![ZERO; rank * rank];
            for i in 0..rank.saturating_sub(1) {
                m[i * rank + i + 1] = C64::new(p.c0, 0.0);
            }
            m
        };
        match self.kind {
            HiggsKind::Zero => Ok(HiggsField::zero(n, rank, npts)),
            HiggsKind::Nilpotent => {
                if rank < 2 {
                    return Err(Error::InvalidInput("nilpotent Higgs field needs rank ≥ 2".into()));
                }
                HiggsField::constant(n, &nilpotent(), &direction, rank, npts)
            }
            HiggsKind::Scalar => {
                let m: Vec<C64> = linalg::identity(rank).iter().map(|x| x * p.c0).collect();
                HiggsField::constant(n, &m, &direction, rank, npts)
            }
            HiggsKind::Diagonal => {
                if p.values.len() != rank {
                    return Err(Error::InvalidInput(format!("diagonal Higgs field needs {rank} values")));
                }
                let mut m = vec![ZERO; rank * rank];
                for (i, v) in p.values.iter().enumerate() {
                    m[i * rank + i] = C64::new(*v, 0.0);
                }
                HiggsField::constant(n, &m, &direction, rank, npts)
            }
            HiggsKind::Modulated => {
                if rank < 2 {
                    return Err(Error::InvalidInput("modulated Higgs field needs rank ≥ 2".into()));
                }
                let u = random::real_field(torus, &mut random::rng(seed ^ 0x5eed_0002), p.amplitude, p.modes)?;
                let base = HiggsField::constant(n, &nilpotent(), &direction, rank, npts)?;
                let w: Vec<C64> = u.iter().map(|x| C64::new(1.0 + x, 0.0)).collect();
                let scale = EndoField::scalar_multiple_of_identity(&w, rank);
                HiggsField::new(base.form().left_mul(&scale))
            }
        }
    }
}

/// Measured invariants of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub degree: f64,
    pub expected_degree: f64,
    pub integrability: f64,
    pub holomorphy: f64,
    pub commuting: f64,
}

/// A validated Hermitian Higgs bundle over a flat torus.
#[derive(Clone, Debug)]
pub struct HiggsBundleScenario {
    label: String,
    torus: KahlerTorus,
    twist: TwistData,
    rank: usize,
    metric: MetricField,
    higgs: HiggsField,
    tolerances: Tolerances,
}

impl HiggsBundleScenario {
    /// Assembles and validates; any failed invariant is an error.
    pub fn new(
        label: &str,
        torus: KahlerTorus,
        twist: TwistData,
        rank: usize,
        metric: MetricField,
        higgs: HiggsField,
        tolerances: Tolerances,
    ) -> Result<Self> {
        let s = Self::assemble(label, torus, twist, rank, metric, higgs, tolerances)?;
        s.validate()?;
        Ok(s)
    }

    /// Assembles after shape checks only.
    pub fn assemble(
        label: &str,
        torus: KahlerTorus,
        twist: TwistData,
        rank: usize,
        metric: MetricField,
        higgs: HiggsField,
        tolerances: Tolerances,
    ) -> Result<Self> {
        metric.fits(&torus, rank)?;
        let phi = higgs.form();
        if phi.rank() != rank || phi.npts() != torus.npts() || phi.n() != torus.n() {
            return Err(Error::ShapeMismatch("Higgs field does not match bundle".into()));
        }
        if let Some(a) = twist.deformation() {
            if a.rank() != rank || a.npts() != torus.npts() || a.n() != torus.n() {
                return Err(Error::ShapeMismatch("deformation does not match bundle".into()));
            }
        }
        Ok(HiggsBundleScenario {
            label: label.to_string(),
            torus,
            twist,
            rank,
            metric,
            higgs,
            tolerances,
        })
    }

    pub fn report(&self) -> Result<ValidationReport> {
        Ok(ValidationReport {
            degree: super::degree(self, &self.metric)?,
            expected_degree: (self.rank as i64 * self.twist.degree()) as f64,
            integrability: self.twist.integrability_residual(&self.torus)?,
            holomorphy: self.higgs.holomorphy_residual(&self.torus, &self.twist)?,
            commuting: self.higgs.commuting_residual()?,
        })
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let r = self.report()?;
        let t = &self.tolerances;
        let checks = [
            ("degree", (r.degree - r.expected_degree).abs(), t.degree),
            ("integrability", r.integrability, t.integrability),
            ("holomorphy", r.holomorphy, t.holomorphy),
            ("commuting", r.commuting, t.commuting),
        ];
        for (name, value, tol) in checks {
            if !(value <= tol) {
                return Err(Error::invariant(format!("{}: {name}", self.label), value, tol));
            }
        }
        Ok(r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn torus(&self) -> &KahlerTorus {
        &self.torus
    }
    pub fn twist(&self) -> &TwistData {
        &self.twist
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn metric(&self) -> &MetricField {
        &self.metric
    }
    pub fn higgs(&self) -> &HiggsField {
        &self.higgs
    }
    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Same bundle and Higgs field with a different initial metric.
    pub fn with_metric(&self, metric: MetricField) -> Result<Self> {
        metric.fits(&self.torus, self.rank)?;
        let mut s = self.clone();
        s.metric = metric;
        Ok(s)
    }
}
