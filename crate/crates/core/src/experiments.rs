//! Recovery trials, phase-transition grids and sup-norm scans.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::l1_solver::{solve_factored, Factorization, SolverConfig, SolverStatus};
use crate::sampling::{MeasureKind, MeasureSpec};
use crate::sensing::{add_noise, build_matrix, precondition, SensingProblem};
use crate::special_functions::{basis_count, wigner_d_with, Bandwidth, JacobiParams, WignerIndex};
use crate::{Error, Result};

const POINT_STREAM: u64 = 0;
const COEFF_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Seeded generator for one trial and one purpose. Points, coefficients and
/// noise use separate streams, so the first `m` points of a trial do not
/// depend on `s` and are a prefix of the points drawn for any larger `m`.
pub fn trial_rng(base_seed: u64, trial_index: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(trial_index));
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NonzeroModel {
    #[default]
    RealGaussian,
    ComplexGaussian,
}

/// An `s`-sparse vector of length `n` with uniformly random support.
pub fn gen_sparse<R: Rng + ?Sized>(n: usize, s: usize, model: NonzeroModel, rng: &mut R) -> Result<DVector<Complex64>> {
    if s > n {
        return Err(Error::InvalidArgument(format!("sparsity {s} exceeds dimension {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let (support, _) = idx.partial_shuffle(rng, s);
    let mut g = DVector::zeros(n);
    for &j in support.iter() {
        g[j] = match model {
            NonzeroModel::RealGaussian => Complex64::new(StandardNormal.sample(rng), 0.0),
            NonzeroModel::ComplexGaussian => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        };
    }
    Ok(g)
}

/// ℓp error of the best `s`-term approximation, `p ∈ {1, 2}`.
pub fn sigma_s(g: &DVector<Complex64>, s: usize, p: u32) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(Error::InvalidArgument(format!("p = {p} must be 1 or 2")));
    }
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g[b].norm().total_cmp(&g[a].norm()).then(a.cmp(&b)));
    let tail = order.iter().skip(s).map(|&j| g[j].norm());
    Ok(if p == 1 {
        tail.sum()
    } else {
        tail.map(|v| v * v).sum::<f64>().sqrt()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    #[serde(rename = "B")]
    pub bandwidth: u32,
    pub m: usize,
    pub s: usize,
    pub measure: MeasureKind,
    pub trials: usize,
    pub base_seed: u64,
    /// Relative ℓ2 error below which a trial counts as a success.
    pub success_threshold: f64,
    pub noise_epsilon: f64,
    #[serde(default)]
    pub nonzero_model: NonzeroModel,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<usize> {
        let n = basis_count(self.bandwidth)?;
        if self.s > n {
            return Err(Error::InvalidArgument(format!("sparsity {} exceeds N = {n}", self.s)));
        }
        if self.m == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("m and trials must be at least 1".into()));
        }
        if !(self.success_threshold > 0.0) || !(self.noise_epsilon >= 0.0) {
            return Err(Error::InvalidArgument("threshold must be positive and epsilon non-negative".into()));
        }
        self.solver.validate()?;
        Ok(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    pub rel_error: f64,
    pub status: SolverStatus,
}

/// Everything of a trial that does not depend on `s`.
struct TrialSetup {
    problem: SensingProblem,
    factorization: Factorization,
    scale_rows: DVector<f64>,
}

fn setup_trial(cfg: &TrialConfig, trial_index: u64, spec: &MeasureSpec) -> Result<TrialSetup> {
    let bw = Bandwidth::new(cfg.bandwidth)?;
    if spec.kind != cfg.measure {
        return Err(Error::InvalidArgument(format!(
            "measure spec {} does not match config {}",
            spec.kind, cfg.measure
        )));
    }
    let points = spec.sample(&mut trial_rng(cfg.base_seed, trial_index, POINT_STREAM), cfg.m)?;
    let matrix = build_matrix(&points, bw)?;
    let y = DVector::zeros(cfg.m);
    let problem = SensingProblem::with_matrix(bw, cfg.measure, points, matrix, y, cfg.noise_epsilon)?;
    let pre = precondition(&problem);
    let factorization = Factorization::new(&pre.matrix)?;
    let scale_rows = DVector::from_iterator(cfg.m, problem.weights.iter().map(|w| w * pre.scale));
    Ok(TrialSetup {
        problem,
        factorization,
        scale_rows,
    })
}

fn solve_setup(cfg: &TrialConfig, trial_index: u64, setup: &TrialSetup, epsilon: f64) -> Result<(DVector<Complex64>, TrialOutcome)> {
    let n = setup.problem.matrix.ncols();
    let g = gen_sparse(n, cfg.s, cfg.nonzero_model, &mut trial_rng(cfg.base_seed, trial_index, COEFF_STREAM))?;
    let mut y = &setup.problem.matrix * &g;
    if epsilon > 0.0 {
        y = add_noise(&y, epsilon, &mut trial_rng(cfg.base_seed, trial_index, NOISE_STREAM))?;
    }
    let observations = y.zip_map(&setup.scale_rows, |v, w| v * w);
    let radius = epsilon;
    let res = solve_factored(&setup.factorization, &observations, radius, &cfg.solver)?;
    let gnorm = g.norm();
    let err = (&res.x - &g).norm();
    let rel_error = if gnorm > 0.0 { err / gnorm } else { err };
    let success = res.status != SolverStatus::Infeasible && rel_error <= cfg.success_threshold;
    Ok((
        res.x,
        TrialOutcome {
            success,
            rel_error,
            status: res.status,
        },
    ))
}

/// One recovery trial: sample, precondition, plant `g`, solve, compare.
pub fn run_trial(cfg: &TrialConfig, trial_index: u64, spec: &MeasureSpec) -> Result<TrialOutcome> {
    cfg.validate()?;
    let setup = setup_trial(cfg, trial_index, spec)?;
    Ok(solve_setup(cfg, trial_index, &setup, cfg.noise_epsilon)?.1)
}

/// Recovery errors of a single planted instance under several noise levels.
///
/// The noise draw is shared, so the noise vectors are exact multiples of one
/// another.
pub fn noise_scaling_errors(cfg: &TrialConfig, trial_index: u64, spec: &MeasureSpec, epsilons: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    let setup = setup_trial(cfg, trial_index, spec)?;
    epsilons
        .iter()
        .map(|&eps| {
            let (_, out) = solve_setup(cfg, trial_index, &setup, eps)?;
            let g = gen_sparse(
                setup.problem.matrix.ncols(),
                cfg.s,
                cfg.nonzero_model,
                &mut trial_rng(cfg.base_seed, trial_index, COEFF_STREAM),
            )?;
            Ok(out.rel_error * g.norm().max(f64::MIN_POSITIVE))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionSpec {
    #[serde(rename = "B")]
    pub bandwidth: u32,
    pub m_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub measure: MeasureKind,
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
}

fn default_threshold() -> f64 {
    1e-3
}

impl PhaseTransitionSpec {
    /// The default B = 5 grid: `m ∈ {10, 20, …, 160}`, `s ∈ {1, …, 40}`.
    pub fn default_grid(measure: MeasureKind, base_seed: u64) -> Self {
        PhaseTransitionSpec {
            bandwidth: 5,
            m_values: (1..=16).map(|i| 10 * i).collect(),
            s_values: (1..=40).collect(),
            measure,
            trials: 50,
            base_seed,
            success_threshold: default_threshold(),
            noise_epsilon: 0.0,
            nonzero_model: NonzeroModel::RealGaussian,
            solver: SolverConfig::default(),
        }
    }

    pub fn trial_config(&self, m: usize, s: usize) -> TrialConfig {
        TrialConfig {
            bandwidth: self.bandwidth,
            m,
            s,
            measure: self.measure,
            trials: self.trials,
            base_seed: self.base_seed,
            success_threshold: self.success_threshold,
            noise_epsilon: self.noise_epsilon,
            nonzero_model: self.nonzero_model,
            solver: self.solver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionGrid {
    pub m_values: Vec<usize>,
    pub s_values: Vec<usize>,
    /// `success_rate[i][j]` for `m_values[i]`, `s_values[j]`.
    pub success_rate: Vec<Vec<f64>>,
    pub config: PhaseTransitionSpec,
}

/// Runs every `(m, s, trial)` cell. The matrix of a `(m, trial)` pair is
/// factored once and reused for all `s`.
pub fn phase_transition(spec: &PhaseTransitionSpec, measure: &MeasureSpec) -> Result<PhaseTransitionGrid> {
    if spec.m_values.is_empty() || spec.s_values.is_empty() {
        return Err(Error::InvalidArgument("phase transition needs non-empty m and s lists".into()));
    }
    for &m in &spec.m_values {
        for &s in &spec.s_values {
            spec.trial_config(m, s).validate()?;
        }
    }
    let jobs: Vec<(usize, u64)> = (0..spec.m_values.len())
        .flat_map(|i| (0..spec.trials as u64).map(move |t| (i, t)))
        .collect();
    let outcomes: Vec<Vec<bool>> = jobs
        .par_iter()
        .map(|&(i, t)| -> Result<Vec<bool>> {
            let m = spec.m_values[i];
            let base = spec.trial_config(m, spec.s_values[0]);
            let setup = setup_trial(&base, t, measure)?;
            spec.s_values
                .iter()
                .map(|&s| {
                    let cfg = spec.trial_config(m, s);
                    Ok(solve_setup(&cfg, t, &setup, cfg.noise_epsilon)?.1.success)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut success_rate = vec![vec![0.0; spec.s_values.len()]; spec.m_values.len()];
    for (&(i, _), row) in jobs.iter().zip(&outcomes) {
        for (j, &ok) in row.iter().enumerate() {
            if ok {
                success_rate[i][j] += 1.0;
            }
        }
    }
    for row in success_rate.iter_mut() {
        for r in row.iter_mut() {
            *r /= spec.trials as f64;
        }
    }
    Ok(PhaseTransitionGrid {
        m_values: spec.m_values.clone(),
        s_values: spec.s_values.clone(),
        success_rate,
        config: spec.clone(),
    })
}

impl PhaseTransitionGrid {
    pub fn rate(&self, m_index: usize, s_index: usize) -> f64 {
        self.success_rate[m_index][s_index]
    }

    /// Interpolated smallest `m` reaching 50% success, per `s`.
    pub fn contour(&self) -> Vec<Option<f64>> {
        (0..self.s_values.len())
            .map(|j| {
                let first = (0..self.m_values.len()).find(|&i| self.success_rate[i][j] >= 0.5)?;
                if first == 0 {
                    return Some(self.m_values[0] as f64);
                }
                let (m0, m1) = (self.m_values[first - 1] as f64, self.m_values[first] as f64);
                let (r0, r1) = (self.success_rate[first - 1][j], self.success_rate[first][j]);
                Some(m0 + (0.5 - r0) / (r1 - r0) * (m1 - m0))
            })
            .collect()
    }

    /// Cells `(s, m_lo, m_hi)` where the rate at the larger `m` falls below
    /// the rate at the smaller `m` by more than a two-sample binomial band
    /// with quantile `z`.
    pub fn monotonicity_violations(&self, z: f64) -> Vec<(usize, usize, usize)> {
        let t = self.config.trials as f64;
        let mut out = Vec::new();
        for j in 0..self.s_values.len() {
            for a in 0..self.m_values.len() {
                for b in a + 1..self.m_values.len() {
                    let (ra, rb) = (self.success_rate[a][j], self.success_rate[b][j]);
                    let p = 0.5 * (ra + rb);
                    let band = z * (2.0 * p * (1.0 - p) / t).sqrt();
                    if ra - rb > band {
                        out.push((self.s_values[j], self.m_values[a], self.m_values[b]));
                    }
                }
            }
        }
        out
    }

    /// Largest spacing between consecutive `m` values.
    pub fn m_step(&self) -> f64 {
        self.m_values
            .windows(2)
            .map(|w| w[1] as f64 - w[0] as f64)
            .fold(0.0, f64::max)
    }
}

const SCAN_GRID: usize = 4096;

/// `max_θ (sin θ)^{1/2} |d_l^{k,n}(cos θ)|` on a midpoint grid of `[0, π]`,
/// refined by golden-section search around the best grid cell.
pub fn sup_preconditioned_d(idx: WignerIndex) -> f64 {
    let p = idx.jacobi_params();
    let f = |t: f64| t.sin().max(0.0).sqrt() * wigner_d_with(&p, t).abs();
    let h = PI / SCAN_GRID as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..SCAN_GRID {
        let v = f((i as f64 + 0.5) * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let centre = (best_i as f64 + 0.5) * h;
    let (mut a, mut b) = ((centre - h).max(0.0), (centre + h).min(PI));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    best.max(f1).max(f2)
}

/// `max_{k,n} sup_θ (sin θ)^{1/2} |d_l^{k,n}|` for each `l ≤ l_max`.
///
/// `|d_l^{k,n}|` is invariant under swapping and jointly negating the orders,
/// and negating one order reflects θ to π − θ, so `0 ≤ n ≤ k ≤ l` suffices.
pub fn sup_profile(l_max: u32) -> Vec<f64> {
    (0..=l_max)
        .into_par_iter()
        .map(|l| {
            let mut best: f64 = 0.0;
            for k in 0..=l as i32 {
                for n in 0..=k {
                    let idx = WignerIndex { l, k, n };
                    best = best.max(sup_preconditioned_d(idx));
                }
            }
            best
        })
        .collect()
}

/// `c_l = (2l+1)^{1/4} max_{k,n} sup_θ (sin θ)^{1/2} |d_l^{k,n}|`, `l ≤ l_max`.
pub fn degree_profile(l_max: u32) -> Vec<f64> {
    sup_profile(l_max)
        .into_iter()
        .enumerate()
        .map(|(l, v)| v * ((2 * l + 1) as f64).powf(0.25))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "B")]
    pub bandwidth: u32,
    #[serde(rename = "N")]
    pub count: usize,
    /// `max (sin θ)^{1/2} |D_l^{k,n}|` over `l < B`.
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundScan {
    pub rows: Vec<BoundRow>,
    /// Least-squares slope of `ln sup` against `ln N`; `None` for fewer than
    /// two distinct `N`.
    pub slope: Option<f64>,
}

pub fn bound_scan(b_list: &[u32]) -> Result<BoundScan> {
    let b_max = *b_list
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidArgument("empty bandwidth list".into()))?;
    for &b in b_list {
        Bandwidth::new(b)?;
    }
    let per_l = sup_profile(b_max - 1);
    let normalized: Vec<f64> = per_l
        .iter()
        .enumerate()
        .map(|(l, v)| v * JacobiParams::new(WignerIndex { l: l as u32, k: 0, n: 0 }).norm)
        .collect();
    let rows: Vec<BoundRow> = b_list
        .iter()
        .map(|&b| BoundRow {
            bandwidth: b,
            count: basis_count(b).expect("validated"),
            sup: normalized[..b as usize].iter().cloned().fold(0.0, f64::max),
        })
        .collect();
    Ok(BoundScan {
        slope: log_log_slope(&rows),
        rows,
    })
}

fn log_log_slope(rows: &[BoundRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.count as f64).ln(), r.sup.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Dense complex Gaussian matrix with `N(0, 1/m)` entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> DMatrix<Complex64> {
    let sd = (0.5 / m as f64).sqrt();
    DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * sd
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn sigma_s_examples() {
        let g = DVector::from_vec(vec![c(3.0), c(-1.0), c(2.0)]);
        assert_eq!(sigma_s(&g, 1, 1).unwrap(), 3.0);
        assert_eq!(sigma_s(&g, 3, 1).unwrap(), 0.0);
        assert_eq!(sigma_s(&g, 5, 2).unwrap(), 0.0);
        assert!((sigma_s(&g, 1, 2).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        let tie = DVector::from_vec(vec![c(1.0), c(-1.0), Complex64::new(0.0, 1.0)]);
        assert_eq!(sigma_s(&tie, 2, 1).unwrap(), 1.0);
        assert!(sigma_s(&g, 1, 3).is_err());
    }

    #[test]
    fn sigma_s_matches_subset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = gen_sparse(7, 7, NonzeroModel::ComplexGaussian, &mut rng).unwrap();
            let mut best = f64::INFINITY;
            for a in 0..7 {
                for b in a + 1..7 {
                    let rest: f64 = (0..7).filter(|&j| j != a && j != b).map(|j| g[j].norm_sqr()).sum();
                    best = best.min(rest.sqrt());
                }
            }
            assert!((sigma_s(&g, 2, 2).unwrap() - best).abs() < 1e-14);
        }
    }

    #[test]
    fn gen_sparse_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = gen_sparse(12, 12, NonzeroModel::RealGaussian, &mut rng).unwrap();
        assert!(g.iter().all(|v| v.norm() > 0.0 && v.im == 0.0));
        assert!(gen_sparse(12, 13, NonzeroModel::RealGaussian, &mut rng).is_err());
        assert!(gen_sparse(12, 0, NonzeroModel::RealGaussian, &mut rng).unwrap().iter().all(|v| v.norm() == 0.0));
        let a = gen_sparse(30, 4, NonzeroModel::ComplexGaussian, &mut trial_rng(9, 3, 1)).unwrap();
        let b = gen_sparse(30, 4, NonzeroModel::ComplexGaussian, &mut trial_rng(9, 3, 1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|v| v.norm() > 0.0).count(), 4);
    }

    #[test]
    fn support_is_uniform() {
        let (n, draws) = (20usize, 20_000usize);
        let mut counts = vec![0usize; n];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..draws {
            let g = gen_sparse(n, 1, NonzeroModel::RealGaussian, &mut rng).unwrap();
            counts[g.iter().position(|v| v.norm() > 0.0).unwrap()] += 1;
        }
        let p = 1.0 / n as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for &k in &counts {
            assert!((k as f64 - draws as f64 * p).abs() < 4.0 * sd, "{counts:?}");
        }
    }

    fn small_config(m: usize, s: usize) -> TrialConfig {
        TrialConfig {
            bandwidth: 3,
            m,
            s,
            measure: MeasureKind::Product,
            trials: 4,
            base_seed: 42,
            success_threshold: 1e-3,
            noise_epsilon: 0.0,
            nonzero_model: NonzeroModel::RealGaussian,
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn trial_edge_cases() {
        let spec = MeasureSpec::product();
        let square = run_trial(&small_config(35, 10), 0, &spec).unwrap();
        assert!(square.success, "{square:?}");
        let zero = run_trial(&small_config(10, 0), 0, &spec).unwrap();
        assert!(zero.success && zero.rel_error == 0.0);
        let again = run_trial(&small_config(20, 3), 1, &spec).unwrap();
        assert_eq!(again, run_trial(&small_config(20, 3), 1, &spec).unwrap());
        let mut bad = small_config(20, 3);
        bad.measure = MeasureKind::TanThird;
        assert!(run_trial(&bad, 0, &spec).is_err());
    }

    #[test]
    fn small_grid_is_reproducible() {
        let spec = PhaseTransitionSpec {
            bandwidth: 3,
            m_values: vec![10, 20, 35],
            s_values: vec![1, 4],
            measure: MeasureKind::Product,
            trials: 4,
            base_seed: 3,
            success_threshold: 1e-3,
            noise_epsilon: 0.0,
            nonzero_model: NonzeroModel::RealGaussian,
            solver: SolverConfig::default(),
        };
        let a = phase_transition(&spec, &MeasureSpec::product()).unwrap();
        let b = phase_transition(&spec, &MeasureSpec::product()).unwrap();
        assert_eq!(a, b);
        assert!(a.success_rate[2].iter().all(|&r| r == 1.0));
        assert_eq!(a.contour()[0], Some(10.0).filter(|_| a.rate(0, 0) >= 0.5).or(a.contour()[0]));
    }

    #[test]
    fn contour_interpolates() {
        let spec = PhaseTransitionSpec::default_grid(MeasureKind::Product, 0);
        let grid = PhaseTransitionGrid {
            m_values: vec![10, 20, 30],
            s_values: vec![1, 2, 3],
            success_rate: vec![vec![0.6, 0.2, 0.0], vec![1.0, 0.4, 0.1], vec![1.0, 0.8, 0.2]],
            config: spec,
        };
        let c = grid.contour();
        assert_eq!(c[0], Some(10.0));
        assert!((c[1].unwrap() - 22.5).abs() < 1e-12);
        assert_eq!(c[2], None);
        assert_eq!(grid.m_step(), 10.0);
        assert!(grid.monotonicity_violations(2.576).is_empty());
    }

    #[test]
    fn bound_scan_trivial_bandwidth() {
        let scan = bound_scan(&[1]).unwrap();
        let expected = 1.0 / (8.0 * PI * PI).sqrt();
        assert!((scan.rows[0].sup - expected).abs() < 1e-12);
        assert_eq!(scan.slope, None);
        assert!(bound_scan(&[]).is_err());
    }

    #[test]
    fn sup_matches_closed_form() {
        // d_1^{1,0} = -sin θ/√2, so sup (sin θ)^{3/2}/√2 = 1/√2.
        let v = sup_preconditioned_d(WignerIndex { l: 1, k: 1, n: 0 });
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        // d_1^{1,1} = (1+cos θ)/2: √(sin θ)(1+cos θ)/2 peaks where tan(θ/2) = 1/√5.
        let v = sup_preconditioned_d(WignerIndex { l: 1, k: 1, n: 1 });
        let t = 2.0 * (1.0 / 5f64.sqrt()).atan();
        let want = t.sin().sqrt() * (1.0 + t.cos()) / 2.0;
        assert!((v - want).abs() < 1e-12);
    }
}
