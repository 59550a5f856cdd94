use holder_core::embedding::{
    build_koch, build_lacunary, certify_biholder, lacunary_upper_bound, reverse_holder_fraction, search_embedding_with,
    KochCurve, SearchConfig,
};
use holder_core::functions::HolderFunction;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lacunary_upper_constant_is_below_the_bound(alpha in 0.2f64..0.9, lambda in 2u32..9) {
        let phi = build_lacunary(alpha, lambda, 1.0 / 256.0).unwrap();
        let cert = certify_biholder(&phi, alpha, &[64, 256]).unwrap();
        let bound = lacunary_upper_bound(alpha, lambda);
        prop_assert!(cert.c2 <= bound, "{} > {bound}", cert.c2);
        prop_assert!(cert.c1 > 0.0);
    }

    #[test]
    fn certificate_trace_is_monotone(alpha in 0.2f64..0.9, lambda in 2u32..6) {
        let phi = build_lacunary(alpha, lambda, 1.0 / 1024.0).unwrap();
        let cert = certify_biholder(&phi, alpha, &[16, 64, 256, 1024]).unwrap();
        for w in cert.trace.windows(2) {
            prop_assert!(w[1].c1 <= w[0].c1);
            prop_assert!(w[1].c2 >= w[0].c2);
        }
        let last = cert.trace.last().unwrap();
        prop_assert_eq!((last.c1, last.c2), (cert.c1, cert.c2));
    }

    #[test]
    fn koch_curve_is_self_similar(alpha in 0.51f64..0.99, x in 0.0f64..1.0, piece in 0usize..4) {
        let k = KochCurve::new(alpha, 20).unwrap();
        let (a, b) = k.eval((piece as f64 + x) / 4.0);
        let (c, d) = k.apply(piece, k.eval(x));
        prop_assert!((a - c).abs() < 1e-5 && (b - d).abs() < 1e-5, "({a},{b}) vs ({c},{d})");
    }

    #[test]
    fn reverse_holder_fraction_shrinks_as_eps_grows(
        alpha in 0.2f64..0.9,
        eps in 0.01f64..2.0,
        x in 0.0f64..1.0,
    ) {
        let w = HolderFunction::takagi(2, alpha).unwrap();
        let lo = (x - 0.25).max(0.0);
        let hi = (x + 0.25).min(1.0);
        let small = reverse_holder_fraction(&w, alpha, eps, x, (lo, hi), 512).unwrap();
        let large = reverse_holder_fraction(&w, alpha, 2.0 * eps, x, (lo, hi), 512).unwrap();
        prop_assert!(large <= small);
        prop_assert!((0.0..=1.0).contains(&small));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn search_never_loses_its_best(seed in any::<u64>(), alpha in 0.3f64..0.7) {
        let cfg = SearchConfig {
            frequency_cutoff: 3,
            offspring: 3,
            working_grid: 64,
            certify_grids: vec![64],
            initial_step: 0.3,
            stagnation: 2,
            depth: 12,
        };
        let out = search_embedding_with(2, alpha, 2, 6, seed, &cfg).unwrap();
        prop_assert_eq!(out.best_trace.len(), 6);
        prop_assert_eq!(out.best_trace[0], out.initial_c1);
        for w in out.best_trace.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }
}

#[test]
fn koch_control_is_not_lower_holder_at_the_wrong_exponent() {
    // the classical curve is bi-Hölder at log 3 / log 4; one notch below, the
    // lower constant must collapse with refinement
    let alpha = 3f64.ln() / 4f64.ln();
    let phi = build_koch(alpha).unwrap();
    let fine = certify_biholder(&phi, alpha, &[256, 4096]).unwrap();
    assert!(fine.c1 > 0.05, "{}", fine.c1);
    let wrong = certify_biholder(&phi, alpha - 0.1, &[256, 4096]).unwrap();
    assert!(wrong.trace[1].c1 < wrong.trace[0].c1);
}
