//! Recovery rates on planted instances.

use std::f64::consts::PI;

use wigner_cs::experiments::{run_trial, NonzeroModel, TrialConfig};
use wigner_cs::l1_solver::SolverConfig;
use wigner_cs::nearfield::{pattern_cut, simulate, NearfieldConfig};
use wigner_cs::sampling::{MeasureKind, MeasureSpec};

#[test]
fn wigner_trials_at_moderate_sparsity() {
    let cfg = TrialConfig {
        bandwidth: 5,
        m: 80,
        s: 3,
        measure: MeasureKind::Product,
        trials: 50,
        base_seed: 314,
        success_threshold: 1e-3,
        noise_epsilon: 0.0,
        nonzero_model: NonzeroModel::RealGaussian,
        solver: SolverConfig::default(),
    };
    let spec = MeasureSpec::product();
    let successes = (0..cfg.trials as u64)
        .filter(|&t| run_trial(&cfg, t, &spec).unwrap().success)
        .count();
    eprintln!("B=5 s=3 m=80 product: {successes}/50");
    assert!(successes >= 48, "{successes}/50");
}

#[test]
fn nearfield_recovery_rate_and_pattern() {
    let spec = MeasureSpec::product();
    let grid: Vec<f64> = (0..=180).map(|d| d as f64 * PI / 180.0).collect();
    let mut good = 0;
    for seed in 0..50u64 {
        let run = simulate(&NearfieldConfig::new(5, 8, 120, seed), &spec).unwrap();
        if run.rel_error_l1 <= 1e-3 {
            good += 1;
            let a = pattern_cut(&run.t_true, 0.0, &grid, 0.0).unwrap();
            let b = pattern_cut(&run.t_l1, 0.0, &grid, 0.0).unwrap();
            for (x, y) in a.db.iter().zip(&b.db) {
                assert!(x == y || (x - y).abs() <= 0.1, "seed {seed}: {x} vs {y}");
            }
        }
    }
    assert!(good >= 45, "{good}/50");
}
