//! Command-line front end.
//!
//! Every subcommand that writes files also writes `manifest.json`, which
//! holds the fully resolved job. `rerun` replays a manifest and reproduces
//! the same CSV bytes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::experiments::{
    bound_scan, degree_profile, gen_sparse, phase_transition, trial_rng, NonzeroModel, PhaseTransitionSpec,
};
use crate::io::{fmt_real, prepare_output, read_json, write_complex_csv, write_csv, write_json};
use crate::l1_solver::{solve_factored, Factorization, SolverConfig, SolverStatus};
use crate::nearfield::{column_index, pattern_cut, simulate, NearfieldConfig, ProbeModel, TransmissionCoefficients};
use crate::sampling::{CdfTable, MeasureKind, MeasureSpec, DEFAULT_TABLE_RESOLUTION};
use crate::sensing::{add_noise, precondition, SensingProblem};
use crate::special_functions::{gram_matrix, identity_deviation, wigner_D, Bandwidth, GramWeight, WignerIndex};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "wigner-cs", version, about = "Sparse recovery of Wigner-D expansions on SO(3)")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one Wigner-D function, printed as "re,im".
    Eval(EvalArgs),
    /// Quadrature Gram matrices and their deviation from the identity.
    Gram(GramArgs),
    /// Sup norms of preconditioned Wigner-D functions.
    BoundScan(BoundScanArgs),
    /// Success-rate grid over (m, s) from a JSON config.
    PhaseTransition(PhaseTransitionArgs),
    /// Sample a random sparse recovery problem into a directory.
    MakeProblem(MakeProblemArgs),
    /// Solve a saved problem with ℓ1 minimization.
    Recover(RecoverArgs),
    /// Simulated spherical near-field measurement and recovery.
    NearfieldSim(NearfieldArgs),
    /// Replay a manifest.json.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub l: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub k: i32,
    #[arg(long, allow_hyphen_values = true)]
    pub n: i32,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GramChoice {
    Haar,
    Product,
    Tan13,
    All,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[arg(long = "B")]
    pub bandwidth: u32,
    #[arg(long, value_enum, default_value = "haar")]
    pub weight: GramChoice,
    /// Also write gram.csv and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundScanArgs {
    #[arg(long = "B-list", value_delimiter = ',', default_value = "4,8,16,32")]
    pub b_list: Vec<u32>,
    /// Largest degree in the per-degree profile.
    #[arg(long, default_value_t = 50)]
    pub l_max: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhaseTransitionArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MakeProblemArgs {
    #[arg(long = "B")]
    pub bandwidth: u32,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value = "product")]
    pub measure: MeasureKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long)]
    pub complex: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Directory written by make-problem.
    #[arg(long)]
    pub problem: PathBuf,
    /// ℓ2 radius of the preconditioned constraint (default: ε of the problem).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NearfieldArgs {
    #[arg(long = "B", default_value_t = 5)]
    pub bandwidth: u32,
    #[arg(long, default_value_t = 8)]
    pub s: usize,
    #[arg(long, default_value_t = 120)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// JSON probe model: {"v": [re, im], "v_max": 1, "weights": [{"n": -1, "c": [[re, im], [re, im]]}, ...]}
    #[arg(long)]
    pub probe_weights: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (default: the manifest's own directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Phase-transition config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionConfig {
    #[serde(rename = "B")]
    pub bandwidth: u32,
    pub m_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub measures: Vec<MeasureKind>,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    #[serde(default)]
    pub noise_epsilon: f64,
    #[serde(default)]
    pub nonzero_model: NonzeroModel,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_resolution")]
    pub cdf_resolution: usize,
}

fn default_threshold() -> f64 {
    1e-3
}

fn default_resolution() -> usize {
    DEFAULT_TABLE_RESOLUTION
}

impl PhaseTransitionConfig {
    fn spec(&self, measure: MeasureKind) -> PhaseTransitionSpec {
        PhaseTransitionSpec {
            bandwidth: self.bandwidth,
            m_values: self.m_values.clone(),
            s_values: self.s_values.clone(),
            measure,
            trials: self.trials,
            base_seed: self.base_seed,
            success_threshold: self.success_threshold,
            noise_epsilon: self.noise_epsilon,
            nonzero_model: self.nonzero_model,
            solver: self.solver,
        }
    }
}

/// A fully resolved unit of work; this is what a manifest stores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Job {
    Gram {
        #[serde(rename = "B")]
        bandwidth: u32,
        weight: GramChoice,
    },
    BoundScan {
        b_list: Vec<u32>,
        l_max: u32,
    },
    PhaseTransition(PhaseTransitionConfig),
    MakeProblem {
        #[serde(rename = "B")]
        bandwidth: u32,
        m: usize,
        s: usize,
        measure: MeasureKind,
        seed: u64,
        epsilon: f64,
        nonzero_model: NonzeroModel,
    },
    Recover {
        problem: PathBuf,
        radius: Option<f64>,
        solver: SolverConfig,
    },
    NearfieldSim(NearfieldConfig),
}

impl Job {
    fn seed(&self) -> Option<u64> {
        match self {
            Job::PhaseTransition(c) => Some(c.base_seed),
            Job::MakeProblem { seed, .. } => Some(*seed),
            Job::NearfieldSim(c) => Some(c.seed),
            _ => None,
        }
    }

    fn outputs(&self) -> &'static [&'static str] {
        match self {
            Job::Gram { .. } => &["gram.csv"],
            Job::BoundScan { .. } => &["bounds.csv", "degree_profile.csv", "bounds_report.json"],
            Job::PhaseTransition(_) => &["grid.csv", "contour.csv"],
            Job::MakeProblem { .. } => &["points.csv", "y.csv", "meta.json", "g_true.csv"],
            Job::Recover { .. } => &["x.csv", "solve_report.json"],
            Job::NearfieldSim(_) => &["T_true.csv", "T_l1.csv", "T_ls.csv", "pattern_cut.csv", "report.json"],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub job: Job,
    pub seed: Option<u64>,
    pub version: String,
    pub threads: usize,
    pub wall_time_s: f64,
}

/// Turns parsed arguments into a job, reading any referenced config files.
fn resolve(command: Command) -> Result<Resolved> {
    Ok(match command {
        Command::Eval(a) => Resolved::Eval(a),
        Command::Gram(a) => {
            Bandwidth::new(a.bandwidth)?;
            let job = Job::Gram {
                bandwidth: a.bandwidth,
                weight: a.weight,
            };
            match a.out {
                Some(out) => Resolved::Job(job, out),
                None => Resolved::Print(job),
            }
        }
        Command::BoundScan(a) => Resolved::Job(
            Job::BoundScan {
                b_list: a.b_list,
                l_max: a.l_max,
            },
            a.out,
        ),
        Command::PhaseTransition(a) => {
            let mut cfg: PhaseTransitionConfig = read_json(&a.config).map_err(config_error)?;
            if let Some(seed) = a.seed {
                cfg.base_seed = seed;
            }
            Resolved::Job(Job::PhaseTransition(cfg), a.out)
        }
        Command::MakeProblem(a) => Resolved::Job(
            Job::MakeProblem {
                bandwidth: a.bandwidth,
                m: a.m,
                s: a.s,
                measure: a.measure,
                seed: a.seed,
                epsilon: a.epsilon,
                nonzero_model: if a.complex {
                    NonzeroModel::ComplexGaussian
                } else {
                    NonzeroModel::RealGaussian
                },
            },
            a.out,
        ),
        Command::Recover(a) => {
            let mut solver = SolverConfig::default();
            if let Some(it) = a.max_iter {
                solver.max_iterations = it;
            }
            if let Some(tol) = a.tol {
                solver.primal_tolerance = tol;
                solver.dual_tolerance = tol;
                solver.relative_tolerance = tol;
            }
            solver.validate().map_err(config_error)?;
            let problem = std::path::absolute(&a.problem).map_err(|e| Error::io(&a.problem, e))?;
            Resolved::Job(
                Job::Recover {
                    problem,
                    radius: a.radius,
                    solver,
                },
                a.out,
            )
        }
        Command::NearfieldSim(a) => {
            let mut cfg = NearfieldConfig::new(a.bandwidth, a.s, a.m, a.seed);
            cfg.epsilon = a.epsilon;
            if let Some(p) = a.probe_weights {
                cfg.probe = read_json::<ProbeModel>(&p).map_err(config_error)?;
            }
            cfg.probe.validate().map_err(config_error)?;
            Resolved::Job(Job::NearfieldSim(cfg), a.out)
        }
        Command::Rerun(a) => {
            let manifest: Manifest = read_json(&a.manifest).map_err(config_error)?;
            let out = match a.out {
                Some(o) => o,
                None => a.manifest.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
            };
            Resolved::Job(manifest.job, out)
        }
    })
}

enum Resolved {
    Eval(EvalArgs),
    Print(Job),
    Job(Job, PathBuf),
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Json(j) => Error::Config(j.to_string()),
        other => other,
    }
}

/// Runs a parsed command line inside a pool of the requested size.
pub fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let force = cli.force;
    pool.install(|| match resolve(cli.command)? {
        Resolved::Eval(a) => {
            let idx = WignerIndex::new(a.l, a.k, a.n)?;
            let v = wigner_D(idx, &crate::sampling::SamplePoint::new(a.theta, a.phi, a.chi, MeasureKind::Product));
            println!("{},{}", fixed6(v.re), fixed6(v.im));
            Ok(())
        }
        Resolved::Print(job) => {
            execute(&job, None)?;
            Ok(())
        }
        Resolved::Job(job, out) => {
            let mut files: Vec<&str> = job.outputs().to_vec();
            files.push("manifest.json");
            let paths = prepare_output(&out, &files, force)?;
            let start = Instant::now();
            execute(&job, Some(&out))?;
            let manifest = Manifest {
                seed: job.seed(),
                job,
                version: env!("CARGO_PKG_VERSION").to_string(),
                threads,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            write_json(paths.last().expect("manifest path"), &manifest)
        }
    })
}

fn execute(job: &Job, out: Option<&Path>) -> Result<()> {
    match job {
        Job::Gram { bandwidth, weight } => run_gram(*bandwidth, *weight, out),
        Job::BoundScan { b_list, l_max } => run_bound_scan(b_list, *l_max, out.expect("output dir")),
        Job::PhaseTransition(cfg) => run_phase_transition(cfg, out.expect("output dir")),
        Job::MakeProblem {
            bandwidth,
            m,
            s,
            measure,
            seed,
            epsilon,
            nonzero_model,
        } => run_make_problem(*bandwidth, *m, *s, *measure, *seed, *epsilon, *nonzero_model, out.expect("output dir")),
        Job::Recover { problem, radius, solver } => run_recover(problem, *radius, solver, out.expect("output dir")),
        Job::NearfieldSim(cfg) => run_nearfield(cfg, out.expect("output dir")),
    }
}

fn run_gram(bandwidth: u32, choice: GramChoice, out: Option<&Path>) -> Result<()> {
    let bw = Bandwidth::new(bandwidth)?;
    let weights: Vec<(&str, GramWeight)> = match choice {
        GramChoice::Haar => vec![("haar", GramWeight::Haar)],
        GramChoice::Product => vec![("product", GramWeight::Preconditioned(MeasureKind::Product))],
        GramChoice::Tan13 => vec![("tan13", GramWeight::Preconditioned(MeasureKind::TanThird))],
        GramChoice::All => vec![
            ("haar", GramWeight::Haar),
            ("product", GramWeight::Preconditioned(MeasureKind::Product)),
            ("tan13", GramWeight::Preconditioned(MeasureKind::TanThird)),
        ],
    };
    let mut rows = Vec::new();
    for (name, w) in weights {
        let (diag, off) = identity_deviation(&gram_matrix(bw, w));
        println!("{name},max_offdiag={off:.3e},max_diag_dev={diag:.3e}");
        rows.push([name.to_string(), fmt_real(diag), fmt_real(off)]);
    }
    if let Some(dir) = out {
        write_csv(&dir.join("gram.csv"), &["weight", "max_diag_dev", "max_offdiag"], rows)?;
    }
    Ok(())
}

fn run_bound_scan(b_list: &[u32], l_max: u32, out: &Path) -> Result<()> {
    let scan = bound_scan(b_list)?;
    write_csv(
        &out.join("bounds.csv"),
        &["B", "N", "sup"],
        scan.rows
            .iter()
            .map(|r| [r.bandwidth.to_string(), r.count.to_string(), fmt_real(r.sup)]),
    )?;
    let profile = degree_profile(l_max);
    write_csv(
        &out.join("degree_profile.csv"),
        &["l", "c_l"],
        profile.iter().enumerate().map(|(l, c)| [l.to_string(), fmt_real(*c)]),
    )?;
    let low = profile.iter().take(3).cloned().fold(0.0, f64::max);
    let all = profile.iter().cloned().fold(0.0, f64::max);
    write_json(
        &out.join("bounds_report.json"),
        &serde_json::json!({
            "slope": scan.slope,
            "profile_max_low_degree": low,
            "profile_max": all,
        }),
    )?;
    if let Some(s) = scan.slope {
        println!("slope={s:.6}");
    }
    Ok(())
}

fn measure_for(kind: MeasureKind, resolution: usize) -> Result<MeasureSpec> {
    match kind {
        MeasureKind::Product => Ok(MeasureSpec::product()),
        MeasureKind::TanThird => Ok(MeasureSpec::tan_third(CdfTable::build(resolution)?)),
    }
}

fn run_phase_transition(cfg: &PhaseTransitionConfig, out: &Path) -> Result<()> {
    if cfg.measures.is_empty() {
        return Err(Error::Config("no measures listed".into()));
    }
    let mut grid_rows = Vec::new();
    let mut contour_rows = Vec::new();
    for &kind in &cfg.measures {
        let spec = cfg.spec(kind);
        let grid = phase_transition(&spec, &measure_for(kind, cfg.cdf_resolution)?)?;
        for (i, &m) in grid.m_values.iter().enumerate() {
            for (j, &s) in grid.s_values.iter().enumerate() {
                grid_rows.push([kind.to_string(), m.to_string(), s.to_string(), fmt_real(grid.rate(i, j))]);
            }
        }
        for (s, m50) in grid.s_values.iter().zip(grid.contour()) {
            contour_rows.push([kind.to_string(), s.to_string(), fmt_real(m50.unwrap_or(f64::NAN))]);
        }
    }
    write_csv(&out.join("grid.csv"), &["measure", "m", "s", "success_rate"], grid_rows)?;
    write_csv(&out.join("contour.csv"), &["measure", "s", "m50"], contour_rows)
}

#[allow(clippy::too_many_arguments)]
fn run_make_problem(
    bandwidth: u32,
    m: usize,
    s: usize,
    measure: MeasureKind,
    seed: u64,
    epsilon: f64,
    model: NonzeroModel,
    out: &Path,
) -> Result<()> {
    let bw = Bandwidth::new(bandwidth)?;
    let spec = measure_for(measure, DEFAULT_TABLE_RESOLUTION)?;
    let points = spec.sample(&mut trial_rng(seed, 0, 0), m)?;
    let g = gen_sparse(bw.count(), s, model, &mut trial_rng(seed, 0, 1))?;
    let matrix = crate::sensing::build_matrix(&points, bw)?;
    let mut y = &matrix * &g;
    if epsilon > 0.0 {
        y = add_noise(&y, epsilon, &mut trial_rng(seed, 0, 2))?;
    }
    let mut problem = SensingProblem::with_matrix(bw, measure, points, matrix, y, epsilon)?;
    problem.seed = Some(seed);
    problem.save(out)?;
    write_complex_csv(&out.join("g_true.csv"), g.iter())
}

fn run_recover(dir: &Path, radius: Option<f64>, solver: &SolverConfig, out: &Path) -> Result<()> {
    let problem = SensingProblem::load(dir)?;
    let pre = precondition(&problem);
    let radius = radius.unwrap_or(pre.radius);
    let start = Instant::now();
    let f = Factorization::new(&pre.matrix)?;
    let res = solve_factored(&f, &pre.observations, radius, solver)?;
    let wall = start.elapsed().as_secs_f64();
    if res.status == SolverStatus::Infeasible {
        return Err(Error::Solver(format!(
            "infeasible: residual {:.3e} outside radius {radius:.3e}",
            res.primal_residual
        )));
    }
    write_complex_csv(&out.join("x.csv"), res.x.iter())?;
    write_json(
        &out.join("solve_report.json"),
        &serde_json::json!({
            "status": res.status,
            "iterations": res.iterations,
            "primal_residual": res.primal_residual,
            "dual_residual": res.dual_residual,
            "objective": res.objective(),
            "radius": radius,
            "wall_time_s": wall,
        }),
    )
}

fn write_transmission(path: &Path, t: &TransmissionCoefficients) -> Result<()> {
    write_csv(
        path,
        &["h", "l", "k", "re", "im"],
        t.values.iter().enumerate().map(|(col, v)| {
            let (h, l, k) = column_index(t.bandwidth, col);
            [h.to_string(), l.to_string(), k.to_string(), fmt_real(v.re), fmt_real(v.im)]
        }),
    )
}

fn run_nearfield(cfg: &NearfieldConfig, out: &Path) -> Result<()> {
    let measure = measure_for(cfg.measure, DEFAULT_TABLE_RESOLUTION)?;
    let run = simulate(cfg, &measure)?;
    if run.l1_status == SolverStatus::Infeasible {
        return Err(Error::Solver("near-field recovery infeasible".into()));
    }
    write_transmission(&out.join("T_true.csv"), &run.t_true)?;
    write_transmission(&out.join("T_l1.csv"), &run.t_l1)?;
    write_transmission(&out.join("T_ls.csv"), &run.t_ls)?;
    let grid: Vec<f64> = (0..=180).map(|d| d as f64 * PI / 180.0).collect();
    let cuts = [&run.t_true, &run.t_l1, &run.t_ls].map(|t| pattern_cut(t, 0.0, &grid, 0.0));
    let [a, b, c] = cuts;
    let (a, b, c) = (a?, b?, c?);
    write_csv(
        &out.join("pattern_cut.csv"),
        &["theta_deg", "dB_true", "dB_l1", "dB_ls"],
        (0..grid.len()).map(|i| [i.to_string(), fmt_real(a.db[i]), fmt_real(b.db[i]), fmt_real(c.db[i])]),
    )?;
    write_json(
        &out.join("report.json"),
        &serde_json::json!({
            "rel_error_l1": run.rel_error_l1,
            "rel_error_ls": run.rel_error_ls,
            "l1_status": run.l1_status,
            "l1_iterations": run.l1_iterations,
            "probe_weight_condition": cfg.probe.weight_condition(),
            "probe": cfg.probe,
            "pattern_defined": [a.defined, b.defined, c.defined],
        }),
    )?;
    println!("rel_error_l1={:.3e},rel_error_ls={:.3e}", run.rel_error_l1, run.rel_error_ls);
    Ok(())
}

/// Six-decimal form without a negative sign on values that round to zero.
fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        s[1..].to_string()
    } else {
        s
    }
}

/// Exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// One-line machine-parsable description for standard error.
pub fn error_line(e: &Error) -> String {
    let kind = if e.is_numerical() { "numerical" } else { "config" };
    let msg = e.to_string().replace('\n', " ");
    format!("error kind={kind} message={msg:?}")
}

