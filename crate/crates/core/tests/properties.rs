use std::f64::consts::PI;

use hsearch_core::closedform::{self, CSource};
use hsearch_core::linalg::{mat2_adjoint, mat2_identity, mat2_max_diff, mat2_mul};
use hsearch_core::*;
use proptest::prelude::*;

fn arb_params() -> impl Strategy<Value = SearchParams> {
    (0.2f64..3.0, -2.0f64..2.0, -2.0f64..2.0, 0.0f64..2.0, -PI..2.0 * PI)
        .prop_map(|(e, a, d, r, phi)| SearchParams::new(e, a, d, r, phi).unwrap())
}

fn arb_x() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn couplings_conjugate(p in arb_params()) {
        prop_assert_eq!(p.b().conj(), p.c());
    }

    #[test]
    fn reduced_matrix_invariants(p in arb_params(), x in arb_x()) {
        let h = reduced_matrix(&p, x).unwrap();
        let tol = 1e-12 * h.scale();
        prop_assert!((h.m[0][1] - h.m[1][0].conj()).norm() <= tol);
        prop_assert!(h.m[0][0].im.abs() <= tol && h.m[1][1].im.abs() <= tol);
        let e = p.energy();
        let trace = e * (p.a() + p.d() + 2.0 * p.r() * p.phi().cos() * x);
        prop_assert!((h.trace() - trace).norm() <= tol);
        let det = e * e * (p.a() * p.d() - p.r() * p.r()) * (1.0 - x * x);
        prop_assert!((h.det() - det).norm() <= tol * h.scale());
    }

    #[test]
    fn propagator_unitary_and_composes(p in arb_params(), x in arb_x(), t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
        let h = reduced_matrix(&p, x).unwrap();
        let u1 = propagator_2x2(&h, t1);
        let u2 = propagator_2x2(&h, t2);
        prop_assert!(mat2_max_diff(&mat2_mul(&u1, &mat2_adjoint(&u1)), &mat2_identity()) < 1e-12);
        prop_assert!(mat2_max_diff(&propagator_2x2(&h, t1 + t2), &mat2_mul(&u2, &u1)) < 1e-11);
        let (w, r) = evolve_reduced(&p, x, t1).unwrap();
        prop_assert!(((w.norm_sqr() + r.norm_sqr()).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn readout_identity(p in arb_params(), x in arb_x()) {
        let t = readout_time(&p, x).unwrap();
        let exact = success_probability(&p, x, t).unwrap();
        let (_, d) = qd_values(&p, x).unwrap();
        let m = m_value(&p, x).unwrap();
        prop_assert!((exact - m.norm_sqr() / (d * d)).abs() < 1e-9);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&exact));
    }

    #[test]
    fn perfect_search_theorem(e in 0.2f64..3.0, a in -2.0f64..2.0, r in 0.0f64..2.0, n in -3i32..4, x in arb_x()) {
        let p = SearchParams::new(e, a, a, r, n as f64 * PI).unwrap();
        let (_, d) = qd_values(&p, x).unwrap();
        let m = m_value(&p, x).unwrap();
        prop_assert!((m.norm_sqr() - d * d).abs() <= 1e-12 * (d * d + 1.0));
        prop_assert!(is_perfect(&p, &Tolerances::default()));
    }

    #[test]
    fn near_perfect_identity(e in 0.2f64..3.0, a in -2.0f64..2.0, r in 0.0f64..2.0, phi in -PI..PI, x in arb_x()) {
        let p = SearchParams::new(e, a, a, r, phi).unwrap();
        prop_assume!(qd_values(&p, x).unwrap().1 > 1e-3);
        let t = readout_time(&p, x).unwrap();
        let deficit = 1.0 - success_probability(&p, x, t).unwrap();
        prop_assert!((deficit - near_perfect_deficit(&p, x).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn printed_forms_agree_with_derived(p in arb_params(), x in arb_x()) {
        let (_, d) = qd_values(&p, x).unwrap();
        prop_assume!(d > 1e-2);
        let derived = closedform::c_squared(&p, x, CSource::Derived).unwrap();
        if let Ok(eq2) = probability_eq2(&p, x) {
            let den: f64 = coefficients_eq3(&p).l.iter().enumerate().map(|(i, l)| l * x.powi(i as i32)).sum();
            prop_assume!(den.abs() > 1e-3);
            prop_assert!((eq2 - derived).abs() < 1e-9 * (1.0 + derived), "eq2 {} vs {}", eq2, derived);
        }
        if let Ok(c) = c_paper(&p, x) {
            let c_dx = (p.c() + p.d() * x).norm();
            prop_assume!(c_dx > 1e-3);
            prop_assert!((c.norm_sqr() - derived).abs() < 1e-9 * (1.0 + derived));
        }
    }

    #[test]
    fn eigenvalues_are_q_plus_minus_d(p in arb_params(), x in arb_x()) {
        let h = reduced_matrix(&p, x).unwrap();
        let (q, d) = qd_values(&p, x).unwrap();
        let e = p.energy();
        let eig = hsearch_core::verify::jacobi_eigenvalues(&h.m);
        prop_assert!((eig[0] - e * (q - d)).abs() < 1e-10 * h.scale());
        prop_assert!((eig[1] - e * (q + d)).abs() < 1e-10 * h.scale());
    }

    #[test]
    fn eq1_exact_when_phase_real(p in arb_params(), x in arb_x(), t in 0.0f64..30.0, n in 0i32..2) {
        let p = p.with_phi(n as f64 * PI).unwrap();
        prop_assume!(qd_values(&p, x).unwrap().1 > 1e-3);
        let eq1 = probability_eq1(&p, x, t, CSource::Derived).unwrap();
        prop_assert!((eq1 - success_probability(&p, x, t).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn eq1_misses_exactly_the_interference_term(p in arb_params(), x in arb_x(), t in 0.0f64..30.0) {
        prop_assume!(qd_values(&p, x).unwrap().1 > 1e-3);
        let eq1 = probability_eq1(&p, x, t, CSource::Derived).unwrap();
        let exact = success_probability(&p, x, t).unwrap();
        let cross = interference_term(&p, x, t).unwrap();
        prop_assert!((exact - (eq1 + cross)).abs() < 1e-9);
    }

    #[test]
    fn problem_construction_invariants(seed in any::<u64>(), dim in 2usize..40, frac in 0.0f64..1.0) {
        let mut rng = hsearch_core::rng::seeded_rng(seed);
        let v = hsearch_core::rng::draw_unit_vector(&mut rng, dim);
        let m = ((dim - 1) as f64 * frac) as usize + 1;
        let targets: Vec<usize> = (0..m.min(dim - 1)).collect();
        let prob = make_problem(dim, &targets, &v).unwrap();
        prop_assert!(prob.overlap() > 0.0 && prob.overlap() < 1.0);
        prop_assert!((prob.target_state().norm() - 1.0).abs() < 1e-12);
        for (i, z) in prob.target_state().amps().iter().enumerate() {
            if !prob.targets().contains(&i) {
                prop_assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
        let again = make_problem(dim, &targets, prob.initial().amps()).unwrap();
        prop_assert_eq!(again.targets(), prob.targets());
        prop_assert!((again.overlap() - prob.overlap()).abs() < 1e-14);
        for (u, v) in again.initial().amps().iter().zip(prob.initial().amps()) {
            prop_assert!((u - v).norm() < 1e-14);
        }
    }
}

#[test]
fn small_overlap_limit_of_rational_form() {
    for &(a, d, r, phi) in &[(0.0, 2.0, 1.0, 0.0), (1.0, -1.0, 0.5, 1.0), (2.0, 2.0, 1.5, 2.0)] {
        let p = SearchParams::new(1.0, a, d, r, phi).unwrap();
        let limit = r * r / (0.25 * (a - d) * (a - d) + r * r);
        assert!((probability_eq2(&p, 1e-6).unwrap() - limit).abs() < 1e-4);
        // And the exact read-out probability approaches the same value.
        let t = readout_time(&p, 1e-3).unwrap();
        assert!((success_probability(&p, 1e-3, t).unwrap() - limit).abs() < 1e-2);
    }
}

#[test]
fn perfect_trace_peaks_at_one() {
    let p = SearchParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
    let x = 0.2;
    let t = readout_time(&p, x).unwrap();
    let trace = probability_trace(&p, x, 2.0 * t, 201).unwrap();
    let max = trace.probs.iter().copied().fold(0.0, f64::max);
    assert!((max - 1.0).abs() < 1e-9);
    assert_eq!(trace.len(), 201);
    assert!(trace.times.windows(2).all(|w| w[1] > w[0]));
}
