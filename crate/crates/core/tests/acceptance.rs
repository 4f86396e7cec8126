//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line to
//! standard error, bypassing the test harness's output capture.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wigner_cs::experiments::{
    bound_scan, degree_profile, gaussian_matrix, gen_sparse, noise_scaling_errors, phase_transition, NonzeroModel,
    PhaseTransitionSpec, TrialConfig,
};
use wigner_cs::l1_solver::{basis_pursuit, check_optimality, SolverConfig};
use wigner_cs::nearfield::{simulate, NearfieldConfig};
use wigner_cs::sampling::{MeasureKind, MeasureSpec, SamplePoint};
use wigner_cs::special_functions::{
    associated_legendre, gram_matrix, identity_deviation, ln_factorial, spherical_harmonic, wigner_D, wigner_d,
    Bandwidth, GramWeight, WignerIndex,
};

fn report(id: u32, pass: bool, detail: &str) {
    let line = format!("criterion {id}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_1_orthonormality() {
    let start = Instant::now();
    let bw = Bandwidth::new(5).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, w) in [
        ("haar", GramWeight::Haar),
        ("product", GramWeight::Preconditioned(MeasureKind::Product)),
        ("tan13", GramWeight::Preconditioned(MeasureKind::TanThird)),
    ] {
        let (diag, off) = identity_deviation(&gram_matrix(bw, w));
        worst = worst.max(diag).max(off);
        parts.push(format!("{name} {:.1e}", diag.max(off)));
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst < 1e-8 && secs < 30.0,
        &format!("max |G - I| at B=5: {} (< 1e-8); {secs:.2} s (< 30 s)", parts.join(", ")),
    );
}

#[test]
fn criterion_2_reduction_identities() {
    let mut legendre: f64 = 0.0;
    for l in 0..=10u32 {
        for k in 0..=l {
            let idx = WignerIndex::new(l, k as i32, 0).unwrap();
            let ratio = (ln_factorial(l - k) - ln_factorial(l + k)).exp().sqrt();
            for i in 0..101 {
                let theta = PI * i as f64 / 100.0;
                let want = ratio * associated_legendre(l, k, theta.cos()).unwrap();
                legendre = legendre.max((wigner_d(idx, theta) - want).abs());
            }
        }
    }
    let mut harmonic: f64 = 0.0;
    for l in 0..=5u32 {
        for k in -(l as i32)..=l as i32 {
            let idx = WignerIndex::new(l, -k, 0).unwrap();
            let norm = idx.jacobi_params().norm;
            for i in 0..21 {
                let theta = PI * i as f64 / 20.0;
                let phi = 0.37 * i as f64;
                let d = wigner_D(idx, &SamplePoint::new(theta, phi, 1.3, MeasureKind::Product)) / norm;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let want = d * (sign * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt());
                harmonic = harmonic.max((spherical_harmonic(l, k, theta, phi).unwrap() - want).norm());
            }
        }
    }
    report(
        2,
        legendre < 1e-10 && harmonic < 1e-10,
        &format!("d vs Legendre (l <= 10, 101 pts) {legendre:.1e}; D vs Y (l <= 5) {harmonic:.1e} (< 1e-10)"),
    );
}

#[test]
fn criterion_3_degree_scaled_bound() {
    let profile = degree_profile(50);
    let low = profile[..=2].iter().cloned().fold(0.0, f64::max);
    let all = profile.iter().cloned().fold(0.0, f64::max);
    report(
        3,
        all <= 1.2 * low,
        &format!("max over l <= 50 = {all:.6}, 1.2 x max over l <= 2 = {:.6}", 1.2 * low),
    );
}

#[test]
fn criterion_4_sup_growth_exponent() {
    let start = Instant::now();
    let scan = bound_scan(&[4, 8, 16, 32]).unwrap();
    let slope = scan.slope.unwrap();
    let secs = start.elapsed().as_secs_f64();
    let limit = 1.0 / 12.0 + 0.03;
    report(
        4,
        slope <= limit && secs < 300.0,
        &format!("log-log slope {slope:.4} (<= {limit:.4}); {secs:.1} s (< 300 s)"),
    );
}

#[test]
fn criterion_5_solver_certificates() {
    let cfg = SolverConfig::default();
    let (mut successes, mut worst) = (0, 0.0f64);
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let a = gaussian_matrix(&mut rng, 40, 100);
        let g = gen_sparse(100, 5, NonzeroModel::ComplexGaussian, &mut rng).unwrap();
        let y = &a * &g;
        let r = basis_pursuit(&a, &y, &cfg).unwrap();
        if (&r.x - &g).norm() <= 1e-5 * g.norm() {
            successes += 1;
            worst = worst.max(check_optimality(&a, &y, &r.x, 0.0).unwrap().dual_violation);
        }
    }
    report(
        5,
        successes >= 48 && worst < 1e-5,
        &format!("{successes}/50 exact recoveries (>= 48); worst dual violation {worst:.1e} (< 1e-5)"),
    );
}

#[test]
fn criterion_6_phase_transition() {
    let start = Instant::now();
    let mut m_values: Vec<usize> = (1..=16).map(|i| 10 * i).collect();
    m_values.push(165);
    let s_values: Vec<usize> = (1..=40).step_by(3).collect();
    let mut grids = Vec::new();
    for kind in [MeasureKind::Product, MeasureKind::TanThird] {
        let mut spec = PhaseTransitionSpec::default_grid(kind, 2024);
        spec.m_values = m_values.clone();
        spec.s_values = s_values.clone();
        grids.push(phase_transition(&spec, &MeasureSpec::for_kind(kind).unwrap()).unwrap());
    }
    let last = m_values.len() - 1;
    let full_column = grids.iter().all(|g| g.success_rate[last].iter().all(|&r| r == 1.0));
    let violations: usize = grids.iter().map(|g| g.monotonicity_violations(2.576).len()).sum();
    let step = grids[0].m_step();
    let (prod, tan) = (grids[0].contour(), grids[1].contour());
    let mut contour_ok = true;
    for (p, t) in prod.iter().zip(&tan) {
        contour_ok &= match (p, t) {
            (_, None) => p.is_none(),
            (None, Some(_)) => true,
            (Some(p), Some(t)) => *t <= *p + step,
        };
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        6,
        full_column && violations == 0 && contour_ok,
        &format!(
            "m=N column all 1.0: {full_column}; monotonicity violations {violations}; tan13 contour <= product + {step}: {contour_ok}; {secs:.0} s"
        ),
    );
}

#[test]
fn criterion_7_noise_scaling() {
    let spec = MeasureSpec::product();
    let mut worst = f64::INFINITY;
    for trial in 0..5u64 {
        let cfg = TrialConfig {
            bandwidth: 5,
            m: 100,
            s: 5,
            measure: MeasureKind::Product,
            trials: 1,
            base_seed: 77,
            success_threshold: 1e-3,
            noise_epsilon: 1e-2,
            nonzero_model: NonzeroModel::RealGaussian,
            solver: SolverConfig::default(),
        };
        let e = noise_scaling_errors(&cfg, trial, &spec, &[1e-2, 1e-3, 1e-4]).unwrap();
        worst = worst.min(e[0] / e[1]).min(e[1] / e[2]);
    }
    report(7, worst >= 5.0, &format!("smallest error reduction per 10x drop in epsilon: {worst:.3} (>= 5)"));
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    0.5 * (v[(n - 1) / 2] + v[n / 2])
}

#[test]
fn criterion_8_nearfield_separation() {
    let spec = MeasureSpec::product();
    let runs: Vec<_> = (0..20u64)
        .map(|seed| simulate(&NearfieldConfig::new(5, 8, 120, seed), &spec).unwrap())
        .collect();
    let l1 = median(runs.iter().map(|r| r.rel_error_l1).collect());
    let ls = median(runs.iter().map(|r| r.rel_error_ls).collect());
    report(
        8,
        l1 <= 1e-3 && ls >= 1e-2,
        &format!("B=5 s=8 m=120 (70 unknowns): median l1 error {l1:.2e} (<= 1e-3), median least-squares error {ls:.2e} (>= 1e-2)"),
    );
}

fn cli(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_wigner-cs")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_9_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    std::fs::write(
        root.join("pt.json"),
        r#"{"B": 3, "m_values": [10, 20, 35], "s_values": [1, 3, 6], "measures": ["product", "tan13"],
            "trials": 6, "base_seed": 9}"#,
    )
    .unwrap();
    let jobs: Vec<(&str, Vec<String>)> = vec![
        ("gram", vec!["gram".into(), "--B".into(), "3".into(), "--weight".into(), "all".into(), "--out".into(), p("gram")]),
        ("bound", vec!["bound-scan".into(), "--B-list".into(), "2,4,6".into(), "--l-max".into(), "6".into(), "--out".into(), p("bound")]),
        ("pt", vec!["phase-transition".into(), "--config".into(), p("pt.json"), "--out".into(), p("pt")]),
        ("prob", vec![
            "make-problem".into(), "--B".into(), "4".into(), "--m".into(), "40".into(), "--s".into(), "4".into(),
            "--measure".into(), "tan13".into(), "--seed".into(), "3".into(), "--epsilon".into(), "1e-3".into(),
            "--out".into(), p("prob"),
        ]),
        ("rec", vec!["recover".into(), "--problem".into(), p("prob"), "--out".into(), p("rec")]),
        ("nf", vec![
            "nearfield-sim".into(), "--B".into(), "3".into(), "--s".into(), "4".into(), "--m".into(), "30".into(),
            "--seed".into(), "2".into(), "--out".into(), p("nf"),
        ]),
    ];
    let mut identical = true;
    let mut checked = Vec::new();
    for (name, args) in &jobs {
        let mut first: Vec<&str> = vec!["--threads", "1"];
        first.extend(args.iter().map(String::as_str));
        cli(&first);
        let original = csv_files(&root.join(name));
        assert!(!original.is_empty());
        let manifest = p(&format!("{name}/manifest.json"));
        for threads in ["1", "4"] {
            let out = p(&format!("{name}_rerun_{threads}"));
            cli(&["--threads", threads, "rerun", "--manifest", &manifest, "--out", &out]);
            let same = csv_files(Path::new(&out)) == original;
            identical &= same;
            checked.push(format!("{name}@{threads}:{}", if same { "ok" } else { "differs" }));
        }
    }
    report(9, identical, &format!("rerun from manifest, 1 and 4 threads: {}", checked.join(" ")));
}

#[test]
fn supplementary_nearfield_separation_underdetermined() {
    let spec = MeasureSpec::product();
    let runs: Vec<_> = (0..20u64)
        .map(|seed| simulate(&NearfieldConfig::new(5, 8, 40, seed), &spec).unwrap())
        .collect();
    let l1 = median(runs.iter().map(|r| r.rel_error_l1).collect());
    let ls = median(runs.iter().map(|r| r.rel_error_ls).collect());
    let line = format!("supplement: B=5 s=8 m=40: median l1 error {l1:.2e}, median least-squares error {ls:.2e}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(l1 <= 1e-3 && ls >= 1e-2 && ls >= 10.0 * l1);
}
