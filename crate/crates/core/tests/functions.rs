use std::f64::consts::PI;
use std::sync::Arc;

use holder_core::embedding::build_lacunary;
use holder_core::functions::{
    estimate_holder_constant, eval_weierstrass, perturb, proj, shear, tail_bound, HolderFunction, PeriodicGenerator,
    Perturbation, TrigTerm, WeierstrassParams,
};
use proptest::prelude::*;

fn generator() -> impl Strategy<Value = PeriodicGenerator> {
    prop_oneof![
        Just(PeriodicGenerator::TriangleDistance),
        Just(PeriodicGenerator::Cosine),
        prop::collection::vec((1u32..6, -1.0f64..1.0, -1.0f64..1.0), 1..4).prop_map(|terms| {
            PeriodicGenerator::TrigPolynomial {
                terms: terms
                    .into_iter()
                    .map(|(frequency, cos, sin)| TrigTerm { frequency, cos, sin })
                    .collect(),
            }
        }),
    ]
}

fn params() -> impl Strategy<Value = WeierstrassParams> {
    (2u32..9, 0.05f64..0.95, generator()).prop_map(|(b, a, g)| WeierstrassParams::new(b, a, g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn truncation_is_within_the_tail_bound(p in params(), depth in 0usize..30, x in 0.0f64..=1.0) {
        let short = p.clone().with_depth(depth);
        let long = p.with_depth(depth + 10);
        let gap = (eval_weierstrass(&short, x) - eval_weierstrass(&long, x)).abs();
        prop_assert!(gap <= tail_bound(&short) * (1.0 + 1e-12) + 1e-15, "{gap} > {}", tail_bound(&short));
    }

    #[test]
    fn periodic_series_agree_at_both_ends(p in params()) {
        prop_assert_eq!(eval_weierstrass(&p, 0.0), eval_weierstrass(&p, 1.0));
    }

    #[test]
    fn perturbation_is_linear_in_t(
        t1 in prop::collection::vec(-3.0f64..3.0, 64),
        t2 in prop::collection::vec(-3.0f64..3.0, 64),
        alpha in 0.1f64..0.9,
    ) {
        let phi = Arc::new(build_lacunary(alpha, 4, 1.0 / 64.0).unwrap());
        let d = phi.dim();
        let (t1, t2) = (t1[..d].to_vec(), t2[..d].to_vec());
        let f = HolderFunction::takagi(2, alpha).unwrap();
        let sum: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a + b).collect();
        let direct = perturb(&f, &Perturbation::new(sum, phi.clone()).unwrap()).unwrap();
        let stepped = perturb(
            &perturb(&f, &Perturbation::new(t1, phi.clone()).unwrap()).unwrap(),
            &Perturbation::new(t2, phi).unwrap(),
        )
        .unwrap();
        for (a, b) in direct.sample(256).iter().zip(stepped.sample(256)) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn shear_matches_the_projection(theta in 0.01f64..(PI - 0.01), x in 0.0f64..=1.0, alpha in 0.1f64..0.9) {
        let f = HolderFunction::takagi(3, alpha).unwrap();
        let g = shear(&f, theta).unwrap();
        let residual = theta.sin() * g.eval(x) - proj(theta, x, f.eval(x));
        prop_assert!(residual.abs() <= 1e-12, "{residual}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_constant_respects_the_certificate(p in params(), depth in 0usize..40, n in 16usize..400) {
        let alpha = p.alpha();
        let f = HolderFunction::weierstrass(p.with_depth(depth));
        let certified = f.holder_constant().unwrap();
        let sampled = estimate_holder_constant(&f, n, alpha);
        prop_assert!(sampled <= certified * (1.0 + 1e-9), "{sampled} > {certified}");
    }
}

#[test]
fn takagi_half_at_one_half() {
    let f = HolderFunction::takagi(2, 0.5).unwrap();
    assert_eq!(f.eval(0.5), 0.5);
}
