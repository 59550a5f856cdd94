use std::f64::consts::PI;

use holder_core::measures::{
    decay_exponent, energy, fourier, local_dimension, pair_energy, project, sobolev_integral, DyadicBands, Measure1,
    Measure2,
};
use proptest::prelude::*;

fn atoms1() -> impl Strategy<Value = Measure1> {
    prop::collection::vec((-2.0f64..2.0, 0.01f64..1.0), 2..40).prop_map(|v| {
        let (p, w): (Vec<_>, Vec<_>) = v.into_iter().map(|(x, w)| ([x], w)).unzip();
        Measure1::new(p, w).unwrap()
    })
}

fn atoms2() -> impl Strategy<Value = Measure2> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0), 2..40).prop_map(|v| {
        let (p, w): (Vec<_>, Vec<_>) = v.into_iter().map(|(x, y, w)| ([x, y], w)).unzip();
        Measure2::new(p, w).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_keeps_the_mass(mu in atoms2(), theta in 0.0f64..PI) {
        let nu = project(&mu, theta);
        prop_assert_eq!(nu.total_mass(), mu.total_mass());
        prop_assert_eq!(nu.len(), mu.len());
    }

    #[test]
    fn transform_is_bounded_by_the_mass(mu in atoms1(), xi in -500.0f64..500.0) {
        prop_assert_eq!(fourier(&mu, 0.0).re, mu.total_mass());
        prop_assert!(fourier(&mu, xi).norm() <= mu.total_mass() * (1.0 + 1e-12));
    }

    #[test]
    fn energy_ignores_atom_order(
        (mu, idx) in atoms2().prop_flat_map(|mu| {
            let order = Just((0..mu.len()).collect::<Vec<usize>>()).prop_shuffle();
            (Just(mu), order)
        }),
        s in 0.1f64..1.9,
    ) {
        let shuffled = Measure2::new(
            idx.iter().map(|&i| mu.points()[i]).collect(),
            idx.iter().map(|&i| mu.weights()[i]).collect(),
        )
        .unwrap();
        let (a, b) = (pair_energy(&mu, s), pair_energy(&shuffled, s));
        prop_assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn energy_scales_homogeneously(mu in atoms1(), s in 0.1f64..0.95, a in 0.1f64..10.0) {
        let base = pair_energy(&mu, s);
        prop_assume!(base.is_finite());
        let scaled = pair_energy(&mu.dilate(a), s);
        let expected = a.powf(-s) * base;
        prop_assert!((scaled - expected).abs() <= 1e-10 * expected, "{scaled} vs {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lebesgue_has_local_dimension_one(y in 0.2f64..0.8, n in 4096usize..16384) {
        let mu = Measure1::uniform_grid(n);
        let radii: Vec<f64> = (0..6).map(|k| 0.1 * 2f64.powi(-k)).collect();
        let est = local_dimension(&mu, y, &radii).unwrap().estimate().unwrap();
        prop_assert!((est - 1.0).abs() < 0.1, "{est}");
    }

    #[test]
    fn decay_and_sobolev_agree_on_lebesgue(beta in 0.1f64..0.8, log_n in 10u32..13) {
        let n = 1usize << log_n;
        let mu = Measure1::uniform_grid(n);
        let fit = decay_exponent(&mu, &DyadicBands { start: 2.0 * PI, count: 6 }, n).unwrap();
        prop_assert!(!fit.rejected);
        // fast enough decay makes the Sobolev integral converge
        prop_assert!(fit.eta > 1.0 + beta, "eta {}", fit.eta);
        let trace = sobolev_integral(&mu, beta, 16.0, 5).unwrap();
        prop_assert!(trace.last_ratio().unwrap() < 1.1, "{:?}", trace.ratios);
    }
}

#[test]
fn half_energy_of_lebesgue() {
    let e = energy(&Measure1::uniform_grid(4096), 0.5).unwrap();
    // ∬ |x-y|^{-1/2} over the unit square is 8/3
    assert!((e.value - 8.0 / 3.0).abs() < 0.02 * 8.0 / 3.0, "{}", e.value);
    assert!(!e.diverging);
}

#[test]
fn coincident_atoms_have_infinite_energy() {
    let mu = Measure1::new(vec![[0.5], [0.5], [0.1]], vec![1.0, 1.0, 1.0]).unwrap();
    assert!(energy(&mu, 0.5).unwrap().value.is_infinite());
}
