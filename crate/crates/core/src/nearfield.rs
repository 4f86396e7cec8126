//! Spherical near-field measurement simulation.
//!
//! Measurements follow the transmission formula
//!
//! ```text
//! y(θ, φ, χ) = v Σ_n Σ_h Σ_{l=1}^{B} Σ_{k=-l}^{l} c_{h,n} T_{hlk} D_l^{k,n}(θ, φ, χ)
//! ```
//!
//! with probe orders `n` and per-mode probe weights `c_{h,n}`. Without the
//! weights the `h = 1` and `h = 2` columns would coincide.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::experiments::{gen_sparse, trial_rng, NonzeroModel};
use crate::l1_solver::{solve_factored, Factorization, SolverConfig, SolverResult, SolverStatus};
use crate::sampling::{preconditioner_weight, MeasureKind, MeasureSpec, SamplePoint};
use crate::sensing::add_noise;
use crate::special_functions::{wigner_D, WignerIndex, MAX_DEGREE};
use crate::{Error, Result};

/// Number of transmission coefficients `2 B (B + 2)`.
pub fn coefficient_count(bandwidth: u32) -> usize {
    2 * (bandwidth * (bandwidth + 2)) as usize
}

/// Column of `T_{hlk}`: `(h−1) B(B+2) + l² − 1 + k + l`.
pub fn column(bandwidth: u32, h: u8, l: u32, k: i32) -> usize {
    let block = (bandwidth * (bandwidth + 2)) as usize;
    (h as usize - 1) * block + (l * l - 1) as usize + (k + l as i32) as usize
}

/// Inverse of [`column`].
pub fn column_index(bandwidth: u32, col: usize) -> (u8, u32, i32) {
    let block = (bandwidth * (bandwidth + 2)) as usize;
    let h = (col / block) as u8 + 1;
    let r = col % block + 1;
    let l = (r as f64).sqrt() as u32;
    let l = if (l + 1) * (l + 1) <= r as u32 { l + 1 } else { l };
    (h, l, r as i32 - (l * l) as i32 - l as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeWeight {
    pub n: i32,
    /// `[c_{1,n}, c_{2,n}]`
    pub c: [Complex64; 2],
}

/// Probe response: global constant `v` and weights `c_{h,n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    pub v: Complex64,
    pub v_max: u32,
    pub weights: Vec<ProbeWeight>,
}

impl Default for ProbeModel {
    /// `v = 1`, orders `n = ±1`, `c_{1,n} = 1`, `c_{2,n} = n j`.
    fn default() -> Self {
        ProbeModel {
            v: Complex64::new(1.0, 0.0),
            v_max: 1,
            weights: [-1, 1]
                .iter()
                .map(|&n| ProbeWeight {
                    n,
                    c: [Complex64::new(1.0, 0.0), Complex64::new(0.0, n as f64)],
                })
                .collect(),
        }
    }
}

impl ProbeModel {
    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidArgument("probe model has no orders".into()));
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.n.unsigned_abs() > self.v_max {
                return Err(Error::InvalidArgument(format!("probe order {} exceeds v_max {}", w.n, self.v_max)));
            }
            if self.weights[..i].iter().any(|o| o.n == w.n) {
                return Err(Error::InvalidArgument(format!("probe order {} repeated", w.n)));
            }
        }
        if self.v.norm() == 0.0 {
            return Err(Error::InvalidArgument("probe constant v is zero".into()));
        }
        if !self.weight_condition().is_finite() {
            return Err(Error::InvalidArgument(
                "probe weights do not separate the two modes".into(),
            ));
        }
        Ok(())
    }

    /// Condition number of the 2 × (#orders) weight matrix; infinite when
    /// the two modes are indistinguishable.
    pub fn weight_condition(&self) -> f64 {
        let w = DMatrix::from_fn(2, self.weights.len(), |h, j| self.weights[j].c[h]);
        let sv = w.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = if sv.len() < 2 { 0.0 } else { sv.iter().cloned().fold(f64::INFINITY, f64::min) };
        if smin <= 1e-14 * smax {
            f64::INFINITY
        } else {
            smax / smin
        }
    }
}

/// Coefficients `T_{hlk}` with the probe model they were measured under.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionCoefficients {
    pub bandwidth: u32,
    pub values: DVector<Complex64>,
    pub probe: ProbeModel,
}

impl TransmissionCoefficients {
    pub fn new(bandwidth: u32, values: DVector<Complex64>, probe: ProbeModel) -> Result<Self> {
        if bandwidth == 0 || bandwidth > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!("bandwidth {bandwidth} out of range")));
        }
        if values.len() != coefficient_count(bandwidth) {
            return Err(Error::DimensionMismatch {
                expected: coefficient_count(bandwidth),
                found: values.len(),
            });
        }
        Ok(TransmissionCoefficients {
            bandwidth,
            values,
            probe,
        })
    }

    pub fn zeros(bandwidth: u32, probe: ProbeModel) -> Result<Self> {
        Self::new(bandwidth, DVector::zeros(coefficient_count(bandwidth)), probe)
    }
}

/// Measurement positions with the probe rotation `χ` from a fixed set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSchedule {
    pub points: Vec<SamplePoint>,
    pub chi_set: Vec<f64>,
}

impl ProbeSchedule {
    pub fn new(points: Vec<SamplePoint>, chi_set: Vec<f64>) -> Result<Self> {
        if chi_set.is_empty() {
            return Err(Error::InvalidArgument("empty χ set".into()));
        }
        if let Some(p) = points.iter().find(|p| !chi_set.contains(&p.chi)) {
            return Err(Error::InvalidArgument(format!("χ = {} not in the declared set", p.chi)));
        }
        Ok(ProbeSchedule { points, chi_set })
    }

    /// `m` random positions from `spec`, each `χ` chosen uniformly from
    /// `chi_set`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, spec: &MeasureSpec, chi_set: &[f64]) -> Result<Self> {
        if chi_set.is_empty() {
            return Err(Error::InvalidArgument("empty χ set".into()));
        }
        let mut points = spec.sample(rng, m)?;
        for p in points.iter_mut() {
            p.chi = chi_set[rng.random_range(0..chi_set.len())];
        }
        Self::new(points, chi_set.to_vec())
    }

    pub fn default_chi_set() -> Vec<f64> {
        vec![0.0, std::f64::consts::FRAC_PI_2]
    }
}

/// Atom of `T_{hlk}` at one point: `v Σ_n c_{h,n} D_l^{k,n}`.
fn atom(probe: &ProbeModel, h: u8, l: u32, k: i32, point: &SamplePoint) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for w in &probe.weights {
        if w.n.unsigned_abs() > l {
            continue;
        }
        acc += w.c[h as usize - 1] * wigner_D(WignerIndex { l, k, n: w.n }, point);
    }
    probe.v * acc
}

/// The `m × 2B(B+2)` dictionary of the transmission formula.
pub fn dictionary(bandwidth: u32, probe: &ProbeModel, points: &[SamplePoint]) -> DMatrix<Complex64> {
    let cols = coefficient_count(bandwidth);
    let mut a = DMatrix::zeros(points.len(), cols);
    for (i, p) in points.iter().enumerate() {
        for col in 0..cols {
            let (h, l, k) = column_index(bandwidth, col);
            a[(i, col)] = atom(probe, h, l, k, p);
        }
    }
    a
}

pub fn transmission_forward(t: &TransmissionCoefficients, schedule: &ProbeSchedule) -> DVector<Complex64> {
    dictionary(t.bandwidth, &t.probe, &schedule.points) * &t.values
}

fn preconditioned_system(
    bandwidth: u32,
    probe: &ProbeModel,
    schedule: &ProbeSchedule,
    y: &DVector<Complex64>,
) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let m = schedule.points.len();
    if m == 0 {
        return Err(Error::InvalidArgument("no measurements".into()));
    }
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    probe.validate()?;
    let mut a = dictionary(bandwidth, probe, &schedule.points);
    let mut b = y.clone();
    let scale = 1.0 / (m as f64).sqrt();
    for (i, p) in schedule.points.iter().enumerate() {
        let w = preconditioner_weight(p.measure, p.theta) * scale;
        a.row_mut(i).scale_mut(w);
        b[i] *= w;
    }
    Ok((a, b))
}

/// ℓ1 recovery: `min ‖T‖₁` subject to `‖P(A T − y)‖₂ ≤ √m ε` with rows
/// scaled by `1/√m`.
pub fn recover_transmission(
    y: &DVector<Complex64>,
    schedule: &ProbeSchedule,
    bandwidth: u32,
    probe: &ProbeModel,
    cfg: &SolverConfig,
    epsilon: f64,
) -> Result<(TransmissionCoefficients, SolverResult)> {
    let (a, b) = preconditioned_system(bandwidth, probe, schedule, y)?;
    let f = Factorization::new(&a)?;
    let res = solve_factored(&f, &b, epsilon, cfg)?;
    let t = TransmissionCoefficients::new(bandwidth, res.x.clone(), probe.clone())?;
    Ok((t, res))
}

/// Minimum-norm least squares on the same preconditioned system, singular
/// values below `1e-10 σ_max` discarded.
pub fn baseline_least_squares(
    y: &DVector<Complex64>,
    schedule: &ProbeSchedule,
    bandwidth: u32,
    probe: &ProbeModel,
) -> Result<TransmissionCoefficients> {
    let (a, b) = preconditioned_system(bandwidth, probe, schedule, y)?;
    let f = Factorization::new(&a)?;
    TransmissionCoefficients::new(bandwidth, f.pseudo_inverse_apply(&b, 1e-10), probe.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternCut {
    /// `20 log10 |y|` relative to the peak; NaN when undefined.
    pub db: Vec<f64>,
    /// False when the pattern vanishes on the whole cut.
    pub defined: bool,
}

/// Normalized pattern magnitude along `φ = phi_cut` at fixed `χ`.
pub fn pattern_cut(t: &TransmissionCoefficients, phi_cut: f64, theta_grid: &[f64], chi: f64) -> Result<PatternCut> {
    if theta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty θ grid".into()));
    }
    let points: Vec<SamplePoint> = theta_grid
        .iter()
        .map(|&th| SamplePoint::new(th, phi_cut, chi, MeasureKind::Product))
        .collect();
    let y = dictionary(t.bandwidth, &t.probe, &points) * &t.values;
    let peak = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(PatternCut {
            db: vec![f64::NAN; y.len()],
            defined: false,
        });
    }
    Ok(PatternCut {
        db: y.iter().map(|v| 20.0 * (v.norm() / peak).log10()).collect(),
        defined: true,
    })
}

/// Configuration of one simulated measurement campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearfieldConfig {
    #[serde(rename = "B")]
    pub bandwidth: u32,
    pub s: usize,
    pub m: usize,
    pub seed: u64,
    pub epsilon: f64,
    #[serde(default = "product")]
    pub measure: MeasureKind,
    #[serde(default)]
    pub probe: ProbeModel,
    #[serde(default = "ProbeSchedule::default_chi_set")]
    pub chi_set: Vec<f64>,
    #[serde(default)]
    pub nonzero_model: NonzeroModel,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn product() -> MeasureKind {
    MeasureKind::Product
}

impl NearfieldConfig {
    pub fn new(bandwidth: u32, s: usize, m: usize, seed: u64) -> Self {
        NearfieldConfig {
            bandwidth,
            s,
            m,
            seed,
            epsilon: 0.0,
            measure: MeasureKind::Product,
            probe: ProbeModel::default(),
            chi_set: ProbeSchedule::default_chi_set(),
            nonzero_model: NonzeroModel::RealGaussian,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NearfieldRun {
    pub schedule: ProbeSchedule,
    pub t_true: TransmissionCoefficients,
    pub t_l1: TransmissionCoefficients,
    pub t_ls: TransmissionCoefficients,
    pub y: DVector<Complex64>,
    pub l1_status: SolverStatus,
    pub l1_iterations: usize,
    pub rel_error_l1: f64,
    pub rel_error_ls: f64,
}

/// Plants a sparse `T`, measures it at random positions and recovers it with
/// ℓ1 and with least squares.
pub fn simulate(cfg: &NearfieldConfig, measure: &MeasureSpec) -> Result<NearfieldRun> {
    cfg.probe.validate()?;
    if measure.kind != cfg.measure {
        return Err(Error::InvalidArgument("measure spec does not match config".into()));
    }
    if !(cfg.epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
    }
    let schedule = ProbeSchedule::random(&mut trial_rng(cfg.seed, 0, 0), cfg.m, measure, &cfg.chi_set)?;
    let n = coefficient_count(cfg.bandwidth);
    let values = gen_sparse(n, cfg.s, cfg.nonzero_model, &mut trial_rng(cfg.seed, 0, 1))?;
    let t_true = TransmissionCoefficients::new(cfg.bandwidth, values, cfg.probe.clone())?;
    let mut y = transmission_forward(&t_true, &schedule);
    if cfg.epsilon > 0.0 {
        y = add_noise(&y, cfg.epsilon, &mut trial_rng(cfg.seed, 0, 2))?;
    }
    let (t_l1, res) = recover_transmission(&y, &schedule, cfg.bandwidth, &cfg.probe, &cfg.solver, cfg.epsilon)?;
    let t_ls = baseline_least_squares(&y, &schedule, cfg.bandwidth, &cfg.probe)?;
    let norm = t_true.values.norm().max(f64::MIN_POSITIVE);
    Ok(NearfieldRun {
        rel_error_l1: (&t_l1.values - &t_true.values).norm() / norm,
        rel_error_ls: (&t_ls.values - &t_true.values).norm() / norm,
        schedule,
        t_true,
        t_l1,
        t_ls,
        y,
        l1_status: res.status,
        l1_iterations: res.iterations,
    })
}
