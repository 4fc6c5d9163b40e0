use crate::error::{Error, Result};
use crate::summation::Summation;

use super::scenario::{
    BundleSpec, DeformationKind, DeformationSpec, HiggsBundleScenario, HiggsKind, HiggsParams, HiggsSpec,
    ManifoldSpec, MetricKind, MetricParams, MetricSpec, ScenarioSpec, Tolerances,
};

/// A named scenario family with one real parameter.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub parameter: &'static str,
    pub default: f64,
    /// Default on complex surfaces, where amplitudes are kept smaller.
    pub default_surface: f64,
    pub summary: &'static str,
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "FLAT",
        parameter: "-",
        default: 0.0,
        default_surface: 0.0,
        summary: "trivial line bundle, φ = 0, h = I",
    },
    CatalogEntry {
        name: "CONFORMAL",
        parameter: "amplitude of u",
        default: 0.2,
        default_surface: 0.02,
        summary: "trivial line bundle, h = e^u with u band-limited",
    },
    CatalogEntry {
        name: "TWISTED",
        parameter: "degree d",
        default: 1.0,
        default_surface: 1.0,
        summary: "degree-d line bundle with its reference metric",
    },
    CatalogEntry {
        name: "NILPOTENT",
        parameter: "c0",
        default: 1.0,
        default_surface: 1.0,
        summary: "trivial rank 2, φ = c0·E12 dz¹, h = I; semistable, not polystable",
    },
    CatalogEntry {
        name: "NILPOTENT_MIXED",
        parameter: "c0",
        default: 1.0,
        default_surface: 1.0,
        summary: "trivial rank 2, φ = c0·E12 (dz¹ + ½dz²) on surfaces",
    },
    CatalogEntry {
        name: "PERTURBED_FLAT",
        parameter: "amplitude of S",
        default: 0.2,
        default_surface: 0.02,
        summary: "trivial rank 2, φ = 0, h = I + S",
    },
    CatalogEntry {
        name: "PERTURBED_TWISTED",
        parameter: "degree d",
        default: 1.0,
        default_surface: 1.0,
        summary: "rank 2 uniform twist d, φ = 0, h = I + S",
    },
    CatalogEntry {
        name: "PERTURBED_NILPOTENT",
        parameter: "c0",
        default: 1.0,
        default_surface: 1.0,
        summary: "trivial rank 2, φ = c0·E12 dz¹, h = I + S",
    },
    CatalogEntry {
        name: "GAUGED_NILPOTENT",
        parameter: "c0",
        default: 1.0,
        default_surface: 1.0,
        summary: "rank 2, ∂̄_E = ∂̄ + g⁻¹∂̄g, φ = g⁻¹(c0·E12 dz¹)g, h = I + S",
    },
    CatalogEntry {
        name: "MODULATED",
        parameter: "c0",
        default: 1.0,
        default_surface: 1.0,
        summary: "non-holomorphic φ = (1 + u)c0·E12 dz¹; rejected by validation",
    },
];

pub fn scenario_catalog() -> &'static [CatalogEntry] {
    ENTRIES
}

/// Splits `NAME` or `NAME(x)`.
fn parse(name: &str) -> Result<(&'static CatalogEntry, Option<f64>)> {
    let name = name.trim();
    let (head, arg) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
        Some(_) => return Err(Error::UnknownScenario(name.to_string())),
        None => (name, None),
    };
    let entry = ENTRIES
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(head.trim()))
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    let value = match arg {
        Some(a) => Some(
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad parameter in `{name}`")))?,
        ),
        None => None,
    };
    Ok((entry, value))
}

/// Scenario document for a catalog name on the given manifold.
pub fn catalog_spec(name: &str, manifold: &ManifoldSpec) -> Result<ScenarioSpec> {
    let (entry, x) = parse(name)?;
    let n = manifold.n;
    let x = x.unwrap_or(if n == 1 { entry.default } else { entry.default_surface });
    // one Fourier mode keeps aliasing of H⁻¹-products near rounding level
    let modes = 1;
    let amp = if n == 1 { 0.2 } else { 0.02 };
    let degree = || -> Result<i64> {
        if x.fract() != 0.0 {
            return Err(Error::InvalidInput(format!("degree in `{name}` must be an integer")));
        }
        Ok(x as i64)
    };
    let perturbed = |a: f64| MetricSpec {
        kind: MetricKind::Perturbed,
        params: MetricParams {
            amplitude: a,
            modes,
            ..MetricParams::default()
        },
        seed: None,
    };
    let nilpotent = |c0: f64, direction: Vec<f64>| HiggsSpec {
        kind: HiggsKind::Nilpotent,
        params: HiggsParams {
            c0,
            direction,
            ..HiggsParams::default()
        },
    };
    let mut spec = ScenarioSpec {
        label: if name.contains('(') { name.trim().to_string() } else { format!("{}({})", entry.name, x) },
        manifold: manifold.clone(),
        bundle: BundleSpec {
            rank: 2,
            twist_degree: 0,
            deformation: None,
        },
        metric: MetricSpec::default(),
        higgs: HiggsSpec::default(),
        tolerances: Tolerances::default(),
    };
    if entry.name == "FLAT" {
        spec.label = "FLAT".into();
    }
    match entry.name {
        "FLAT" => spec.bundle.rank = 1,
        "CONFORMAL" => {
            spec.bundle.rank = 1;
            spec.metric = MetricSpec {
                kind: MetricKind::Conformal,
                params: MetricParams {
                    amplitude: x,
                    modes,
                    ..MetricParams::default()
                },
                seed: None,
            };
        }
        "TWISTED" => {
            spec.bundle.rank = 1;
            spec.bundle.twist_degree = degree()?;
        }
        "NILPOTENT" => spec.higgs = nilpotent(x, Vec::new()),
        "NILPOTENT_MIXED" => {
            let dir = if n == 2 { vec![1.0, 0.5] } else { vec![1.0] };
            spec.higgs = nilpotent(x, dir);
        }
        "PERTURBED_FLAT" => spec.metric = perturbed(x),
        "PERTURBED_TWISTED" => {
            spec.bundle.twist_degree = degree()?;
            spec.metric = perturbed(amp);
        }
        "PERTURBED_NILPOTENT" => {
            spec.higgs = nilpotent(x, Vec::new());
            spec.metric = perturbed(amp);
        }
        "GAUGED_NILPOTENT" => {
            spec.bundle.deformation = Some(DeformationSpec {
                kind: DeformationKind::Gauge,
                amplitude: if n == 1 { 0.1 } else { 0.02 },
                modes: 1,
            });
            spec.higgs = nilpotent(x, Vec::new());
            spec.metric = perturbed(amp);
        }
        "MODULATED" => {
            spec.higgs = HiggsSpec {
                kind: HiggsKind::Modulated,
                params: HiggsParams {
                    c0: x,
                    amplitude: 0.1,
                    modes: 1,
                    ..HiggsParams::default()
                },
            };
        }
        _ => unreachable!("catalog entry without builder"),
    }
    Ok(spec)
}

/// Builds and validates a catalog scenario.
pub fn build_named(name: &str, manifold: &ManifoldSpec, seed: u64) -> Result<HiggsBundleScenario> {
    catalog_spec(name, manifold)?.build(seed, Summation::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names_and_parameters() {
        assert_eq!(parse("TWISTED(2)").unwrap().1, Some(2.0));
        assert_eq!(parse("nilpotent").unwrap().1, None);
        assert!(matches!(parse("HYPERBOLIC"), Err(Error::UnknownScenario(_))));
        assert!(matches!(parse("TWISTED(2"), Err(Error::UnknownScenario(_))));
        assert!(parse("TWISTED(x)").is_err());
    }

    #[test]
    fn every_valid_entry_builds() {
        for n in 1..=2 {
            let m = ManifoldSpec::unit(n, if n == 1 { 32 } else { 12 });
            for e in scenario_catalog() {
                let r = build_named(e.name, &m, 3);
                if e.name == "MODULATED" {
                    assert!(matches!(r, Err(Error::InvariantViolation { .. })), "{}", e.name);
                } else {
                    r.unwrap_or_else(|err| panic!("{} on n={n}: {err}", e.name));
                }
            }
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = catalog_spec("GAUGED_NILPOTENT(0.5)", &ManifoldSpec::unit(1, 16)).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: ScenarioSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
