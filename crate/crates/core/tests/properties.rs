use higgsflow::functionals::{kobayashi_j, lower_bound_c, trace_square_defect};
use higgsflow::harness::Snapshot;
use higgsflow::higgs_bundle::{build_named, degree, random, HiggsBundleScenario, ManifoldSpec, MetricField};
use higgsflow::hs_geometry::{hs_curvature, hs_operators};
use higgsflow::kahler_grid::{DerivativeScheme, EndoField, EndoFormField, KahlerTorus, MixedForm};
use higgsflow::linalg::C64;
use higgsflow::variation_flow::random_direction;
use proptest::prelude::*;

fn moved(s: &HiggsBundleScenario, seed: u64, amp: f64) -> MetricField {
    let k = random_direction(s.torus(), s.rank(), amp, 1, seed).unwrap();
    s.metric().exp_update(&k, 1.0).unwrap()
}

fn mixed_distance(a: &MixedForm, b: &MixedForm) -> f64 {
    a.axpy(C64::new(-1.0, 0.0), b).unwrap().parts().iter().map(|p| p.max_norm()).fold(0.0, f64::max)
}

fn one_form(torus: &KahlerTorus, rank: usize, p: usize, q: usize, seed: u64) -> EndoFormField {
    let mut rng = random::rng(seed);
    let n = torus.n();
    let comps = (0..higgsflow::kahler_grid::basis(n, p, q).len())
        .map(|_| random::complex_field(torus, &mut rng, rank, 1.0, 1).unwrap())
        .collect();
    EndoFormField::from_components(n, p, q, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn form_adjoint_is_an_involution(seed in any::<u64>(), amp in 0.0..0.4f64, p in 0usize..2, q in 0usize..2) {
        let s = build_named("PERTURBED_FLAT", &ManifoldSpec::unit(2, 4), seed).unwrap();
        let h = moved(&s, seed ^ 1, amp);
        let f = one_form(s.torus(), 2, p, q, seed);
        let back = f.h_adjoint(h.h(), h.h_inv()).unwrap().h_adjoint(h.h(), h.h_inv()).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn mean_curvature_ignores_constant_rescaling(seed in any::<u64>(), lambda in 0.1..10.0f64) {
        let s = build_named("GAUGED_NILPOTENT", &ManifoldSpec::unit(1, 32), seed).unwrap();
        let h = moved(&s, seed, 0.3);
        let k0 = hs_curvature(&h, &s).unwrap().k;
        let k1 = hs_curvature(&h.scaled(lambda).unwrap(), &s).unwrap().k;
        prop_assert!(k0.sub(&k1).max_norm() < 1e-9 * k0.max_norm().max(1.0));
    }

    #[test]
    fn j_is_bounded_below(seed in any::<u64>(), amp in 0.0..0.6f64, d in 0i64..3) {
        for name in [format!("TWISTED({d})"), format!("PERTURBED_TWISTED({d})"), "PERTURBED_NILPOTENT".to_string()] {
            let s = build_named(&name, &ManifoldSpec::unit(1, 8), seed).unwrap();
            let j = kobayashi_j(&s, &moved(&s, seed ^ 7, amp)).unwrap();
            prop_assert!(j >= lower_bound_c(&s).unwrap() - 1e-8);
        }
    }

    #[test]
    fn degree_does_not_depend_on_the_metric(seed in any::<u64>(), amp in 0.0..0.6f64, d in -2i64..3) {
        let s = build_named(&format!("PERTURBED_TWISTED({d})"), &ManifoldSpec::unit(1, 8), seed).unwrap();
        let deg = degree(&s, &moved(&s, seed, amp)).unwrap();
        prop_assert!((deg - 2.0 * d as f64).abs() < 1e-9);
    }

    #[test]
    fn hs_operators_are_linear(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let s = build_named("PERTURBED_NILPOTENT", &ManifoldSpec::unit(2, 4), seed).unwrap();
        let ops = hs_operators(s.metric(), &s).unwrap();
        let v = EndoFormField::from_endo(2, random_direction(s.torus(), 2, 0.5, 1, seed).unwrap());
        let w = EndoFormField::from_endo(2, random_direction(s.torus(), 2, 0.5, 1, seed ^ 3).unwrap());
        let (ca, cb) = (C64::new(a, 0.0), C64::new(0.0, b));
        let combo = v.scale(ca).add(&w.scale(cb)).unwrap();
        let lhs = ops.hs_prime(&combo).unwrap();
        let rhs = MixedForm::new().axpy(ca, &ops.hs_prime(&v).unwrap()).unwrap().axpy(cb, &ops.hs_prime(&w).unwrap()).unwrap();
        prop_assert!(mixed_distance(&lhs, &rhs) < 1e-10);
        let lhs = ops.hs_second(&combo).unwrap();
        let rhs = MixedForm::new().axpy(ca, &ops.hs_second(&v).unwrap()).unwrap().axpy(cb, &ops.hs_second(&w).unwrap()).unwrap();
        prop_assert!(mixed_distance(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn trace_square_lemma_on_random_forms(seed in any::<u64>(), g12 in -0.5..0.5f64, g22 in 0.8..2.0f64, rank in 1usize..4) {
        let g = [C64::new(1.0, 0.0), C64::new(g12, 0.0), C64::new(g12, 0.0), C64::new(g22, 0.0)];
        let torus = KahlerTorus::with_metric(2, &[1.0, 0.7], 4, &g, DerivativeScheme::Spectral).unwrap();
        // curvature type: F* = −F
        let a = one_form(&torus, rank, 1, 1, seed);
        let id = EndoField::identity(rank, torus.npts());
        let f = a.sub(&a.h_adjoint(&id, &id).unwrap()).unwrap();
        let worst = trace_square_defect(&torus, &f).unwrap().into_iter().fold(0.0, f64::max);
        prop_assert!(worst < 1e-12);
    }

    #[test]
    fn snapshot_round_trips(seed in any::<u64>(), amp in 0.0..0.4f64, rank in 1usize..4) {
        let torus = ManifoldSpec::unit(1, 4).build(Default::default()).unwrap();
        let s = random::hermitian_field(&torus, &mut random::rng(seed), rank, amp, 1).unwrap();
        let h = MetricField::new(EndoField::identity(rank, torus.npts()).add(&s)).unwrap();
        let snap = Snapshot::of(&torus, &h);
        let back = Snapshot::from_bytes(&snap.to_bytes()).unwrap();
        prop_assert_eq!(&back.lengths, &snap.lengths);
        let err = back.data.iter().zip(&snap.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-6);
    }
}
