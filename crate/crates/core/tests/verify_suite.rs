use triggered_hb::objectives::{Benchmark, DEFAULT_DATASET_SEED};
use triggered_hb::verify::{run_suite, trigger_soundness, SuiteConfig};

fn light() -> SuiteConfig {
    SuiteConfig {
        soundness_states: 60,
        ordering_states: 40,
        miet_states: 200,
        hoh_states: 10,
        integral_samples: 30,
        g_grid: 20_000,
        ..SuiteConfig::default()
    }
}

#[test]
fn suite_passes_on_benchmarks() {
    for b in Benchmark::ALL {
        let oracle = b.oracle(DEFAULT_DATASET_SEED).unwrap();
        let report = run_suite(b.name(), &oracle, &light()).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.checks.len(), 7);
        assert!(report.checks.iter().all(|c| c.evaluated > 0));
        let table = report.to_string();
        assert!(table.contains(b.name()));
    }
}

#[test]
fn overstated_strong_convexity_breaks_soundness() {
    let oracle = Benchmark::Quadratic.oracle(DEFAULT_DATASET_SEED).unwrap();
    let corrupted = oracle.with_claimed_mu(2.0 * oracle.mu()).unwrap();
    let check = trigger_soundness(&corrupted, &light()).unwrap();
    assert!(!check.passed, "{check:?}");
    assert!(check.worst > 1.0);
}

#[test]
fn suite_is_deterministic() {
    let oracle = Benchmark::Logistic.oracle(DEFAULT_DATASET_SEED).unwrap();
    let cfg = SuiteConfig { seed: 11, ..light() };
    let a = trigger_soundness(&oracle, &cfg).unwrap();
    let b = trigger_soundness(&oracle, &cfg).unwrap();
    assert_eq!(a.worst.to_bits(), b.worst.to_bits());
    assert_eq!(a.evaluated, b.evaluated);
}

#[test]
fn exclusion_radius_skips_states() {
    let oracle = Benchmark::Quadratic.oracle(DEFAULT_DATASET_SEED).unwrap();
    let cfg = SuiteConfig {
        exclusion_radius: 1e9,
        ..light()
    };
    let check = trigger_soundness(&oracle, &cfg).unwrap();
    assert_eq!(check.evaluated, 0);
    assert!(check.skipped > 0);
}
