use std::sync::OnceLock;

use holder_core::dimension::dyadic_ladder;
use holder_core::experiments::{
    sample_probe, verify_energy_finiteness, verify_part1, verify_part2, verify_sobolev, ExperimentRecord, FunctionSpec,
    Part1Report, ProbeConfig,
};
use proptest::prelude::*;

fn small(alpha: f64) -> ProbeConfig {
    ProbeConfig {
        samples: 4,
        ladder: dyadic_ladder(6, 12),
        levels: 12,
        thetas: vec![1.0, std::f64::consts::FRAC_PI_2],
        theta_levels: 4,
        ..ProbeConfig::takagi(alpha)
    }
}

fn part1() -> &'static Part1Report {
    static REPORT: OnceLock<Part1Report> = OnceLock::new();
    REPORT.get_or_init(|| verify_part1(&small(0.4)).unwrap())
}

proptest! {
    #[test]
    fn pass_fraction_grows_with_the_tolerance(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let report = part1();
        prop_assert!(report.pass_fraction_at(lo) <= report.pass_fraction_at(hi));
    }

    #[test]
    fn probe_points_stay_in_the_ball(seed in any::<u64>(), rho in 0.1f64..10.0, dim in 1usize..20) {
        let config = ProbeConfig { seed, rho, samples: 8, ..ProbeConfig::takagi(0.4) };
        let points = sample_probe(&config, dim).unwrap();
        prop_assert_eq!(points.len(), 8);
        for t in &points {
            prop_assert_eq!(t.len(), dim);
            prop_assert!(t.iter().all(|v| v.abs() <= rho));
        }
        prop_assert_eq!(points, sample_probe(&config, dim).unwrap());
    }
}

#[test]
fn stored_pass_fraction_matches_its_tolerance() {
    let report = part1();
    assert_eq!(report.pass_fraction_at(report.tolerance), report.pass_fraction);
}

#[test]
fn reports_state_their_scope() {
    let config = small(0.4);
    let summaries = [
        serde_json::to_value(part1()).unwrap(),
        serde_json::to_value(verify_part2(&config).unwrap()).unwrap(),
        serde_json::to_value(verify_sobolev(&config, 1.1).unwrap()).unwrap(),
        serde_json::to_value(verify_energy_finiteness(&config, 0.75).unwrap()).unwrap(),
    ];
    for s in &summaries {
        assert_eq!(s["samples"], 4, "{s}");
        assert_eq!(s["rho"], 4.0, "{s}");
        assert!(!s.to_string().to_lowercase().contains("almost all"));
    }
    assert_eq!(summaries[0]["ladder"], serde_json::json!(config.ladder));
    assert_eq!(summaries[1]["ladder"], serde_json::json!(config.ladder));
}

#[test]
fn identical_configs_give_identical_records() {
    let config = small(0.4);
    let record = |c: &ProbeConfig| {
        let r = verify_part2(c).unwrap();
        let levels = r.levels.clone();
        ExperimentRecord::new("verify-part2", c.seed, c, &r)
            .unwrap()
            .with_table(levels)
    };
    let (a, b) = (record(&config), record(&config));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.config_hash(), b.config_hash());

    let root = tempfile::tempdir().unwrap();
    let dir = a.persist(root.path()).unwrap();
    let first = std::fs::read(dir.join("summary.json")).unwrap();
    let table = std::fs::read(dir.join("levels.csv")).unwrap();
    b.persist(root.path()).unwrap();
    assert_eq!(first, std::fs::read(dir.join("summary.json")).unwrap());
    assert_eq!(table, std::fs::read(dir.join("levels.csv")).unwrap());

    let other = ProbeConfig { seed: 1, ..config };
    assert_ne!(record(&other).config_hash(), a.config_hash());
}

#[test]
fn lipschitz_controls_fail_the_energy_check() {
    // graphs of dimension one carry no finite (2-β)-energy for β < 1
    for base in [FunctionSpec::Zero, FunctionSpec::Identity] {
        let config = ProbeConfig {
            ladder: dyadic_ladder(6, 13),
            ..ProbeConfig::control(base, 0.5)
        };
        let report = verify_energy_finiteness(&config, 0.25).unwrap();
        assert!(!report.stable || report.divergence_flags > 0, "{report:?}");
    }
}

#[test]
fn perturbed_takagi_has_finite_energy_above_its_exponent() {
    let config = ProbeConfig {
        samples: 4,
        ladder: dyadic_ladder(6, 13),
        ..ProbeConfig::takagi(0.5)
    };
    let report = verify_energy_finiteness(&config, 0.75).unwrap();
    assert!(report.stable, "{}", report.stability_ratio);
}
