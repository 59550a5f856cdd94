use holder_core::dimension::{dim_fit, dyadic_ladder, graph_dim, pack_count, LevelSampler, PointSet};
use holder_core::functions::{HolderFunction, PeriodicGenerator, TrigTerm, WeierstrassParams};
use holder_core::measures::{lift_measure, local_dimension, project};
use proptest::prelude::*;

// Every maximal packing is at least a quarter of any other in the max-norm
// plane, since each centre of the larger one sits within 2r of a greedy centre
// and a 4r square holds at most four 2r-separated points.
const PLANE_SLACK: usize = 4;

fn line_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..200)
}

fn plane_points() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0).prop_map(|(x, y)| [x, y]), 1..200)
}

/// Brute-force optimal packing for tiny sets.
fn optimal_line(points: &[f64], r: f64) -> usize {
    let n = points.len();
    (0u32..1 << n)
        .filter(|mask| {
            let chosen: Vec<f64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| points[i]).collect();
            chosen
                .iter()
                .enumerate()
                .all(|(i, a)| chosen[i + 1..].iter().all(|b| (a - b).abs() >= 2.0 * r))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn line_packing_is_optimal(points in prop::collection::vec(0.0f64..1.0, 1..12), r in 0.005f64..0.3) {
        prop_assert_eq!(pack_count(&PointSet::line(points.clone()), r).unwrap(), optimal_line(&points, r));
    }

    #[test]
    fn line_packing_shrinks_with_radius(points in line_points(), r in 0.001f64..0.5, k in 1.0f64..4.0) {
        let a = PointSet::line(points);
        prop_assert!(pack_count(&a, k * r).unwrap() <= pack_count(&a, r).unwrap());
    }

    #[test]
    fn line_packing_grows_with_the_set(points in line_points(), extra in line_points(), r in 0.001f64..0.5) {
        let small = pack_count(&PointSet::line(points.clone()), r).unwrap();
        let big = pack_count(&PointSet::line([points, extra].concat()), r).unwrap();
        prop_assert!(small <= big);
    }

    #[test]
    fn plane_packing_shrinks_with_radius(points in plane_points(), r in 0.005f64..0.5, k in 1.0f64..4.0) {
        let a = PointSet::plane(points);
        let coarse = pack_count(&a, k * r).unwrap();
        let fine = pack_count(&a, r).unwrap();
        prop_assert!(coarse <= PLANE_SLACK * fine, "{coarse} vs {fine}");
    }

    #[test]
    fn plane_packing_grows_with_the_set(points in plane_points(), extra in plane_points(), r in 0.005f64..0.5) {
        let small = pack_count(&PointSet::plane(points.clone()), r).unwrap();
        let big = pack_count(&PointSet::plane([points, extra].concat()), r).unwrap();
        prop_assert!(small <= PLANE_SLACK * big, "{small} vs {big}");
    }

    #[test]
    fn plane_packing_is_separated_and_maximal(points in plane_points(), r in 0.01f64..0.5) {
        let a = PointSet::plane(points.clone());
        let count = pack_count(&a, r).unwrap();
        prop_assert!(count >= 1 && count <= a.len());
        // disjoint max-norm balls of radius r inside [-r, 1+r]^2
        let cells = ((1.0 + 2.0 * r) / (2.0 * r)).ceil() as usize + 1;
        prop_assert!(count <= cells * cells);
    }

    #[test]
    fn fit_recovers_exact_power_laws(a in 1u32..5, b in 1u32..5, len in 4usize..12) {
        let scales: Vec<f64> = (0..len).map(|j| 2f64.powi(-((b as usize * j) as i32))).collect();
        let counts: Vec<usize> = (0..len).map(|j| 1usize << (a as usize * j).min(60)).collect();
        prop_assume!(a as usize * len <= 60);
        let fit = dim_fit(&scales, &counts, Some(0..len)).unwrap();
        prop_assert!((fit.slope - a as f64 / b as f64).abs() < 1e-12, "{}", fit.slope);
        prop_assert!(!fit.undefined && !fit.degenerate);
    }
}

fn certified_function() -> impl Strategy<Value = HolderFunction> {
    (
        2u32..5,
        0.2f64..0.8,
        prop::collection::vec((1u32..4, -1.0f64..1.0, -1.0f64..1.0), 1..3),
    )
        .prop_map(|(base, alpha, terms)| {
            let g = PeriodicGenerator::TrigPolynomial {
                terms: terms
                    .into_iter()
                    .map(|(frequency, cos, sin)| TrigTerm { frequency, cos, sin })
                    .collect(),
            };
            HolderFunction::weierstrass(WeierstrassParams::new(base, alpha, g).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn graph_dimension_respects_the_holder_bound(f in certified_function()) {
        let fit = graph_dim(&f, 1 << 15, &dyadic_ladder(3, 11), None).unwrap();
        prop_assert!(fit.slope <= 2.0 - f.alpha() + 0.1, "{} for alpha {}", fit.slope, f.alpha());
    }

    #[test]
    fn level_dimension_is_bounded_by_the_vertical_projection(
        alpha in 0.3f64..0.7,
        y in 0.3f64..0.6,
    ) {
        let f = HolderFunction::takagi(2, alpha).unwrap();
        let ladder = dyadic_ladder(6, 14);
        let c = holder_core::functions::estimate_holder_constant(&f, 1024, alpha);
        let sampler = LevelSampler::from_function(&f, &ladder).unwrap();
        let level = sampler.level_dim(y, c, None).unwrap();
        prop_assume!(!level.undefined);
        let mu = project(&lift_measure(&f, 1 << 16), std::f64::consts::FRAC_PI_2);
        let radii: Vec<f64> = ladder[2..8].iter().map(|&m| c * (m as f64).powf(-alpha)).collect();
        let Some(ldim) = local_dimension(&mu, y, &radii).unwrap().estimate() else {
            return Ok(());
        };
        let bound = 1.0 - alpha * ldim + 0.15;
        prop_assert!(level.slope <= bound, "slope {} > {bound} (ldim {ldim})", level.slope);
    }
}

#[test]
fn cantor_set_has_log2_over_log3() {
    fn endpoints(depth: u32) -> Vec<f64> {
        (0u64..1 << depth)
            .map(|bits| {
                (0..depth)
                    .map(|k| {
                        if bits >> k & 1 == 1 {
                            2.0 * 3f64.powi(-(k as i32 + 1))
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }
    let set = PointSet::line(endpoints(14));
    let scales: Vec<f64> = (1..10).map(|j| 0.5 * 3f64.powi(-j)).collect();
    let counts: Vec<usize> = scales.iter().map(|&r| pack_count(&set, r).unwrap()).collect();
    for (j, &c) in counts.iter().enumerate() {
        assert_eq!(c, 1 << (j + 1));
    }
    let fit = dim_fit(&scales, &counts, Some(0..scales.len())).unwrap();
    assert!((fit.slope - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
}

#[test]
fn hand_counted_packings() {
    let line = PointSet::line(vec![0.0, 0.1, 0.25, 0.5, 0.55, 1.0]);
    assert_eq!(pack_count(&line, 0.1).unwrap(), 4);
    assert_eq!(pack_count(&line, 0.25).unwrap(), 3);
    let plane = PointSet::plane(vec![[0.0, 0.0], [0.1, 0.9], [0.15, 0.1], [0.5, 0.5], [0.9, 0.9]]);
    assert_eq!(pack_count(&plane, 0.2).unwrap(), 4);
    assert!(pack_count(&plane, 0.0).is_err());
}
