mod common;

use common::problems;
use triggered_hb::algorithms::{
    run_adaptive, run_adaptive_dg, run_adaptive_hoh, run_continuous_reference, run_displaced_gradient, run_heavy_ball_discrete,
    run_nesterov, AlgoConfig, RunSetup, RunTrace, CSV_FIXED_COLUMNS,
};
use triggered_hb::dynamics::{hoh_trajectory, zoh_trajectory, FlowParams, State};
use triggered_hb::objectives::{make_quadratic, start_state, Benchmark};
use triggered_hb::triggers::{Design, Hold, Mode};
use triggered_hb::Vector;

fn short(design: Design, mode: Mode, a0: f64) -> AlgoConfig {
    AlgoConfig {
        trigger: design,
        mode,
        a0,
        max_iters: 300,
        ..AlgoConfig::default()
    }
}

fn check_times(trace: &RunTrace) {
    for w in trace.records.windows(2) {
        let delta = w[0].delta.expect("only the last record lacks a step");
        assert!(delta > 0.0);
        assert_eq!(w[1].t, w[0].t + delta);
        assert_eq!(w[1].k, w[0].k + 1);
    }
    assert!(trace.last().unwrap().delta.is_none());
}

#[test]
fn triggered_runs_keep_time_and_step_floor() {
    for p in problems() {
        let p0 = start_state(&p.oracle, &p.params);
        let a = p.benchmark.default_a();
        for design in [Design::Derivative, Design::Performance] {
            for mode in [Mode::Et, Mode::St] {
                let cfg = short(design, mode, a);
                let setup = RunSetup::new(&cfg, &p.oracle).unwrap();
                let fixed = run_displaced_gradient(&p0, &short(design, mode, setup.constants.a2_star), &p.oracle).unwrap();
                check_times(&fixed);
                let miet = setup.constants.miet(setup.constants.a2_star);
                assert!(fixed.steps().iter().all(|&d| d >= miet * (1.0 - 1e-9)));

                for trace in [run_adaptive_dg(&p0, &cfg, &p.oracle), run_adaptive_hoh(&p0, &cfg, &p.oracle)] {
                    let Ok(trace) = trace else { continue };
                    check_times(&trace);
                    assert!(trace.steps().iter().all(|&d| d >= setup.tau), "{}", trace.algorithm);
                }
            }
        }
    }
}

#[test]
fn each_step_lands_on_the_hold_trajectory() {
    for p in problems() {
        let p0 = start_state(&p.oracle, &p.params);
        let cfg = short(Design::Performance, Mode::Et, p.benchmark.default_a());
        let cfg = AlgoConfig { max_iters: 40, ..cfg };
        for (trace, hoh) in [
            (run_adaptive_dg(&p0, &cfg, &p.oracle).unwrap(), false),
            (run_adaptive_hoh(&p0, &cfg, &p.oracle).unwrap(), true),
        ] {
            for w in trace.records.windows(2) {
                let params = p.params.with_a(w[0].a);
                let delta = w[0].delta.unwrap();
                let expected = if hoh {
                    hoh_trajectory(&w[0].state, delta, &params, &p.oracle)
                } else {
                    zoh_trajectory(&w[0].state, delta, &params, &p.oracle)
                };
                let err = (&expected - &w[1].state).norm();
                assert!(err <= 1e-12 * (1.0 + expected.norm()), "{} k = {}: {err:e}", trace.algorithm, w[0].k);
            }
        }
    }
}

#[test]
fn start_at_minimizer_terminates_immediately() {
    for p in problems() {
        let x_star = p.oracle.minimizer().unwrap().clone();
        let n = x_star.len();
        let p0 = State::new(x_star.clone(), Vector::zeros(n));
        let cfg = AlgoConfig::default();
        let traces = [
            run_displaced_gradient(&p0, &cfg, &p.oracle).unwrap(),
            run_adaptive_dg(&p0, &cfg, &p.oracle).unwrap(),
            run_adaptive_hoh(&p0, &cfg, &p.oracle).unwrap(),
            run_nesterov(&x_star, 1.0 / p.oracle.lipschitz(), &p.oracle, 10, 1e-6).unwrap(),
            run_heavy_ball_discrete(&x_star, &p.oracle, 10, 1e-6).unwrap(),
        ];
        for trace in traces {
            assert!(trace.converged, "{}", trace.algorithm);
            assert_eq!(trace.iterations(), 0, "{}", trace.algorithm);
            assert_eq!(trace.records.len(), 1);
        }
    }
}

#[test]
fn baselines_solve_isotropic_quadratic_in_one_step() {
    let oracle = make_quadratic(&[1.5, 1.5]).unwrap();
    let x0 = Vector::from_vec(vec![4.0, -7.0]);
    let nesterov = run_nesterov(&x0, 1.0 / 3.0, &oracle, 10, 1e-12).unwrap();
    let heavy = run_heavy_ball_discrete(&x0, &oracle, 10, 1e-12).unwrap();
    for trace in [nesterov, heavy] {
        assert!(trace.converged);
        assert_eq!(trace.iterations(), 1, "{}", trace.algorithm);
        assert!(trace.last().unwrap().state.x.norm() < 1e-14);
        // Baselines count iterations as time.
        assert_eq!(trace.last().unwrap().t, 1.0);
        assert!((&trace.last().unwrap().state.v + &x0).norm() < 1e-14);
    }
}

#[test]
fn nesterov_rejects_long_steps() {
    let oracle = make_quadratic(&[1.0, 10.0]).unwrap();
    let x0 = Vector::from_vec(vec![1.0, 1.0]);
    assert!(run_nesterov(&x0, 0.2, &oracle, 10, 1e-6).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let p = &problems()[0];
    let p0 = start_state(&p.oracle, &p.params);
    let bad = [
        AlgoConfig { epsilon: 0.0, ..AlgoConfig::default() },
        AlgoConfig { r_i: 1.0, ..AlgoConfig::default() },
        AlgoConfig { r_d: 1.0, ..AlgoConfig::default() },
        AlgoConfig { tau: Some(-1.0), ..AlgoConfig::default() },
        AlgoConfig { a0: f64::NAN, ..AlgoConfig::default() },
        AlgoConfig { alpha: 1.0, ..AlgoConfig::default() },
    ];
    for cfg in bad {
        assert!(run_adaptive_hoh(&p0, &cfg, &p.oracle).is_err(), "{cfg:?}");
    }
    let wrong_dim = State::zeros(p0.dim() + 1);
    assert!(run_adaptive_dg(&wrong_dim, &AlgoConfig::default(), &p.oracle).is_err());
}

fn sign_changes(trace: &RunTrace, coord: usize) -> usize {
    let signs: Vec<bool> = trace.records.iter().map(|r| r.state.v[coord] > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn total_variation(trace: &RunTrace, coord: usize) -> f64 {
    trace
        .records
        .windows(2)
        .map(|w| (w[1].state.x[coord] - w[0].state.x[coord]).abs())
        .sum()
}

// The high-order hold settles the stiff coordinate within a few steps and then
// flips sign around it with a tiny amplitude, so a raw sign-change count ranks
// it worse than the straight-line hold; the path length of that coordinate
// measures the swing that is actually removed.
#[test]
fn high_order_hold_damps_stiff_oscillation() {
    let p = problems().into_iter().find(|p| p.benchmark == Benchmark::Quadratic).unwrap();
    let p0 = start_state(&p.oracle, &p.params);
    let cfg = AlgoConfig {
        trigger: Design::Performance,
        mode: Mode::Et,
        a0: p.benchmark.default_a(),
        ..AlgoConfig::default()
    };
    let dg = run_displaced_gradient(&p0, &cfg, &p.oracle).unwrap();
    let hoh = run_adaptive_hoh(&p0, &cfg, &p.oracle).unwrap();
    assert!(dg.converged && hoh.converged);
    let (tv_dg, tv_hoh) = (total_variation(&dg, 1), total_variation(&hoh, 1));
    println!(
        "stiff coordinate: path length hoh {tv_hoh:.3e} dg {tv_dg:.3e}; velocity sign changes hoh {} dg {}",
        sign_changes(&hoh, 1),
        sign_changes(&dg, 1)
    );
    assert!(tv_hoh < 0.1 * tv_dg, "path length: hoh {tv_hoh}, dg {tv_dg}");
    // Initial distance along the stiff coordinate is 50; the high-order hold
    // travels barely more than that.
    assert!(tv_hoh < 2.0 * p0.x[1].abs());
}

#[test]
fn lyapunov_decreases_under_certified_fixed_displacement() {
    for p in problems() {
        let p0 = start_state(&p.oracle, &p.params);
        let setup = RunSetup::new(&AlgoConfig::default(), &p.oracle).unwrap();
        let cfg = short(Design::Derivative, Mode::St, setup.constants.a2_star);
        let trace = run_displaced_gradient(&p0, &cfg, &p.oracle).unwrap();
        let values: Vec<f64> = trace.records.iter().map(|r| r.lyapunov.unwrap()).collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn continuous_reference_decays() {
    let p = problems().into_iter().find(|p| p.benchmark == Benchmark::Logistic).unwrap();
    let p0 = start_state(&p.oracle, &p.params);
    let trace = run_continuous_reference(&p0, 0.0, &p.params, &p.oracle, 5.0, 1e-2).unwrap();
    let kappa = p.params.decay_rate();
    let first = trace.records[0].lyapunov.unwrap();
    for r in &trace.records {
        assert!(r.lyapunov.unwrap() <= first * (-kappa * r.t).exp() * (1.0 + 1e-6));
    }
    assert!((trace.last().unwrap().t - 5.0).abs() < 1e-9);
}

#[test]
fn csv_layout() {
    let p = &problems()[0];
    let p0 = start_state(&p.oracle, &p.params);
    let trace = run_adaptive_dg(&p0, &short(Design::Performance, Mode::Et, 0.1), &p.oracle).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..CSV_FIXED_COLUMNS.len()], CSV_FIXED_COLUMNS);
    assert_eq!(header.len(), CSV_FIXED_COLUMNS.len() + 2 * p0.dim());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), trace.records.len());
    assert_eq!(&rows.last().unwrap()[2], "");
    let min_csv = rows
        .iter()
        .filter(|r| !r[2].is_empty())
        .map(|r| r[2].parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(Some(min_csv), trace.summary(0.0).min_delta);
}

#[test]
fn default_setup_matches_problem() {
    for p in problems() {
        let setup = RunSetup::new(&AlgoConfig::default(), &p.oracle).unwrap();
        assert_eq!(setup.params, FlowParams::new(&p.oracle, FlowParams::default_s(&p.oracle), 0.0).unwrap());
        assert!(setup.tau > 0.0 && setup.tau < setup.t_max);
        assert!((setup.t_max - 10.0 / p.oracle.mu().sqrt()).abs() < 1e-12 * setup.t_max);
    }
}

#[test]
fn performance_steps_dominate_derivative_steps_at_start() {
    for p in problems() {
        let p0 = start_state(&p.oracle, &p.params);
        let a = p.benchmark.default_a();
        let first = |design| {
            let cfg = AlgoConfig { max_iters: 1, ..short(design, Mode::Et, a) };
            run_displaced_gradient(&p0, &cfg, &p.oracle).unwrap().steps()[0]
        };
        let (d, perf) = (first(Design::Derivative), first(Design::Performance));
        assert!(perf >= d * (1.0 - 1e-9), "{}: performance {perf} derivative {d}", p.benchmark.name());
    }
}

#[test]
fn adaptive_dispatch_follows_hold() {
    let p = &problems()[0];
    let p0 = start_state(&p.oracle, &p.params);
    for hold in [Hold::Zoh, Hold::Hoh] {
        let cfg = AlgoConfig { hold, max_iters: 5, ..AlgoConfig::default() };
        let direct = match hold {
            Hold::Zoh => run_adaptive_dg(&p0, &cfg, &p.oracle).unwrap(),
            Hold::Hoh => run_adaptive_hoh(&p0, &cfg, &p.oracle).unwrap(),
        };
        let dispatched = run_adaptive(&p0, &cfg, &p.oracle).unwrap();
        assert_eq!(dispatched.algorithm, direct.algorithm);
        assert_eq!(dispatched.records, direct.records);
    }
}
