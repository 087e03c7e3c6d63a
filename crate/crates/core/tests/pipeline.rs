use std::f64::consts::PI;

use approx::assert_relative_eq;
use hflow_core::euler::{build_steady, euler_residual};
use hflow_core::geometry::DiskPoint;
use hflow_core::harmonic::{harmonic_extend, BallPotential3D, BoundaryData, KernelRule};
use hflow_core::navier_stokes::{energy_report, leray_hopf_admissible, ns_residual_terms, NsSolution, TimeProfile};
use hflow_core::quadrature::{truncated_energy_growth, ShellRule};
use proptest::prelude::*;

fn data() -> impl Strategy<Value = BoundaryData> {
    (1usize..=8).prop_flat_map(|n| {
        (-1.0..1.0f64, prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-1.0..1.0f64, n))
            .prop_map(|(a0, a, b)| BoundaryData::new(a0, a, b).unwrap())
    })
}

fn point() -> impl Strategy<Value = DiskPoint<2>> {
    (0.0..0.9f64, 0.0..2.0 * PI).prop_map(|(r, t)| DiskPoint::polar(r, t).unwrap())
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steady_flow_is_stationary(d in data(), p in point()) {
        let r = euler_residual(&build_steady(&d), &p).unwrap();
        prop_assert!(norm(r) <= 1e-10);
    }

    #[test]
    fn decaying_flow_solves_navier_stokes(d in data(), p in point(), t in 0.0..3.0f64, rate in 0.5..10.0f64) {
        let sol = NsSolution::new(harmonic_extend(&d), TimeProfile::exponential(1.5, rate).unwrap());
        let terms = ns_residual_terms(&sol, t, &p).unwrap();
        prop_assert!(norm(terms.sum) <= 1e-10);
    }

    #[test]
    fn admissibility_threshold(rate in 0.1..20.0f64) {
        let adm = leray_hopf_admissible(&TimeProfile::exponential(1.0, rate).unwrap(), 3.0, 30).unwrap();
        prop_assert_eq!(adm.pass, rate >= 2.0);
    }
}

#[test]
fn sampled_profile_tracks_its_exponential() {
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
    let values: Vec<f64> = times.iter().map(|t| (-3.0 * t).exp()).collect();
    let pot = harmonic_extend(&BoundaryData::mode(1, 1.0, 0.0));
    let sampled = NsSolution::new(pot.clone(), TimeProfile::sampled(times, values).unwrap());
    let exact = NsSolution::new(pot, TimeProfile::exponential(1.0, 3.0).unwrap());
    let a = energy_report(&sampled, 2.0, 10).unwrap();
    let b = energy_report(&exact, 2.0, 10).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(x.lhs, y.lhs, max_relative = 1e-7);
        assert!(x.margin >= -1e-8);
    }
}

#[test]
#[allow(clippy::excessive_precision)]
fn ball_energy_is_rotation_invariant() {
    // E(10) for ξ₃, frozen from an mpmath quadrature
    let want = 75.398_218_126_026_359;
    let rule = ShellRule::<3>::new(10.0, 20, 8, 3).unwrap();
    let tilted = |xi: &[f64; 3]| (xi[0] + xi[1] + xi[2]) / 3f64.sqrt();
    let pot = BallPotential3D::new(tilted, KernelRule::default()).unwrap();
    let c = truncated_energy_growth(&pot, &rule).unwrap();
    assert_relative_eq!(c.last_energy(), want, max_relative = 1e-8);
}
