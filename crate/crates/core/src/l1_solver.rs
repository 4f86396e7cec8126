//! Complex basis pursuit and ℓ2-ball-constrained ℓ1 minimization.
//!
//! Both programs are solved with the same over-relaxed ADMM splitting
//!
//! ```text
//! minimize ‖z‖₁ + I_C(x)   subject to   x = z,     C = { x : ‖Ax − y‖₂ ≤ r }
//! ```
//!
//! alternating an exact Euclidean projection onto `C` with complex
//! soft-thresholding. The projection uses one SVD of `A`, cached in a
//! [`Factorization`] that can be shared across right-hand sides. For `r = 0`
//! the projection is the least-norm correction onto `{Ax = y}`; for `r > 0` it
//! solves the secular equation of the ball constraint along the singular
//! directions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Absolute primal tolerance (per √N).
    pub primal_tolerance: f64,
    /// Absolute dual tolerance (per √N).
    pub dual_tolerance: f64,
    pub relative_tolerance: f64,
    /// Initial augmented-Lagrangian penalty ρ.
    pub penalty: f64,
    pub over_relaxation: f64,
    /// Residual balancing: ρ is doubled or halved when one residual exceeds
    /// the other by this factor. `None` keeps ρ fixed.
    pub balance_ratio: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 50_000,
            primal_tolerance: 1e-8,
            dual_tolerance: 1e-8,
            relative_tolerance: 1e-8,
            penalty: 1.0,
            over_relaxation: 1.6,
            balance_ratio: Some(10.0),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.primal_tolerance > 0.0 && self.dual_tolerance > 0.0 && self.relative_tolerance >= 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.penalty > 0.0) {
            return bad("penalty must be positive");
        }
        if !(1.0..=1.9).contains(&self.over_relaxation) {
            return bad("over_relaxation must lie in [1, 1.9]");
        }
        if matches!(self.balance_ratio, Some(r) if !(r > 1.0)) {
            return bad("balance_ratio must exceed 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: DVector<Complex64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SolverStatus,
}

impl SolverResult {
    pub fn objective(&self) -> f64 {
        l1_norm(&self.x)
    }
}

pub fn l1_norm(x: &DVector<Complex64>) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

/// Proximal map of `τ|·|` on ℂ: shrinks the modulus by `τ`, keeps the phase.
pub fn soft_threshold(z: Complex64, tau: f64) -> Complex64 {
    let r = z.norm();
    if r <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        z * (1.0 - tau / r)
    }
}

/// Thin SVD of a measurement matrix, reusable across observation vectors.
#[derive(Debug, Clone)]
pub struct Factorization {
    u: DMatrix<Complex64>,
    vt: DMatrix<Complex64>,
    sigma: Vec<f64>,
    nrows: usize,
    ncols: usize,
}

impl Factorization {
    pub fn new(a: &DMatrix<Complex64>) -> Result<Self> {
        let (nrows, ncols) = a.shape();
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidArgument("empty measurement matrix".into()));
        }
        let svd = a.clone().svd(true, true);
        let u = svd.u.ok_or_else(|| Error::Solver("SVD failed to produce U".into()))?;
        let vt = svd.v_t.ok_or_else(|| Error::Solver("SVD failed to produce V*".into()))?;
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-12 * smax && svd.singular_values[i] > 0.0)
            .collect();
        let u = u.select_columns(keep.iter());
        let vt = vt.select_rows(keep.iter());
        let sigma = keep.iter().map(|&i| svd.singular_values[i]).collect();
        Ok(Factorization {
            u,
            vt,
            sigma,
            nrows,
            ncols,
        })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// Minimum-norm least-squares solution, ignoring singular values below
    /// `rel_cutoff · σ_max`.
    pub fn pseudo_inverse_apply(&self, y: &DVector<Complex64>, rel_cutoff: f64) -> DVector<Complex64> {
        let smax = self.sigma.iter().cloned().fold(0.0, f64::max);
        let mut b = self.u.ad_mul(y);
        for (i, s) in self.sigma.iter().enumerate() {
            b[i] = if *s > rel_cutoff * smax { b[i] / *s } else { Complex64::new(0.0, 0.0) };
        }
        self.vt.ad_mul(&b)
    }
}

/// Euclidean projector onto `{x : ‖Ax − y‖₂ ≤ r}`.
struct BallProjector<'a> {
    f: &'a Factorization,
    b: DVector<Complex64>,
    radius_sq: f64,
    lambda: f64,
    t: DVector<Complex64>,
    delta: DVector<Complex64>,
}

impl<'a> BallProjector<'a> {
    /// Returns the projector and the part of `‖y‖` outside the range of `A`.
    fn new(f: &'a Factorization, y: &DVector<Complex64>, radius: f64) -> (Self, f64) {
        let b = f.u.ad_mul(y);
        let outside = (y - &f.u * &b).norm();
        let r = f.rank();
        let proj = BallProjector {
            f,
            b,
            radius_sq: (radius * radius - outside * outside).max(0.0),
            lambda: 0.0,
            t: DVector::zeros(r),
            delta: DVector::zeros(r),
        };
        (proj, outside)
    }

    fn project(&mut self, v: &DVector<Complex64>, out: &mut DVector<Complex64>) {
        let sigma = &self.f.sigma;
        self.t.gemv(Complex64::new(1.0, 0.0), &self.f.vt, v, Complex64::new(0.0, 0.0));
        for i in 0..sigma.len() {
            self.t[i] = self.t[i] * sigma[i] - self.b[i];
        }
        let tnorm_sq = self.t.norm_squared();
        out.copy_from(v);
        if tnorm_sq <= self.radius_sq {
            return;
        }
        if self.radius_sq == 0.0 {
            for i in 0..sigma.len() {
                self.delta[i] = -self.t[i] / sigma[i];
            }
        } else {
            let lambda = self.solve_secular();
            for i in 0..sigma.len() {
                self.delta[i] = -self.t[i] * (lambda * sigma[i] / (1.0 + lambda * sigma[i] * sigma[i]));
            }
        }
        out.gemv_ad(Complex64::new(1.0, 0.0), &self.f.vt, &self.delta, Complex64::new(1.0, 0.0));
    }

    // Finds λ > 0 with Σ |t_i|² / (1 + λσ_i²)² = r² by safeguarded Newton on
    // 1/‖res(λ)‖ − 1/r, which is close to linear in λ.
    fn solve_secular(&mut self) -> f64 {
        let sigma = &self.f.sigma;
        let target = 1.0 / self.radius_sq.sqrt();
        let eval = |lam: f64| -> (f64, f64) {
            let mut s = 0.0;
            let mut ds = 0.0;
            for i in 0..sigma.len() {
                let a = self.t[i].norm_sqr();
                let q = 1.0 + lam * sigma[i] * sigma[i];
                s += a / (q * q);
                ds -= 2.0 * a * sigma[i] * sigma[i] / (q * q * q);
            }
            let psi = 1.0 / s.sqrt() - target;
            (psi, -0.5 * ds / (s * s.sqrt()))
        };
        let mut lo = 0.0;
        let mut hi = f64::INFINITY;
        let mut lam = self.lambda.max(0.0);
        for _ in 0..100 {
            let (psi, dpsi) = eval(lam);
            if psi.abs() <= 1e-14 * target {
                break;
            }
            if psi < 0.0 {
                lo = lam;
            } else {
                hi = lam;
            }
            let mut next = lam - psi / dpsi;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lam.max(1.0) };
            }
            if (next - lam).abs() <= 1e-15 * lam.max(1e-300) {
                lam = next;
                break;
            }
            lam = next;
        }
        self.lambda = lam;
        lam
    }
}

/// `min ‖x‖₁ s.t. Ax = y`.
pub fn basis_pursuit(a: &DMatrix<Complex64>, y: &DVector<Complex64>, cfg: &SolverConfig) -> Result<SolverResult> {
    bpdn_ball(a, y, 0.0, cfg)
}

/// `min ‖x‖₁ s.t. ‖Ax − y‖₂ ≤ radius`.
pub fn bpdn_ball(
    a: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
    radius: f64,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    let f = Factorization::new(a)?;
    solve_factored(&f, y, radius, cfg)
}

/// [`bpdn_ball`] on a precomputed factorization.
pub fn solve_factored(
    f: &Factorization,
    y: &DVector<Complex64>,
    radius: f64,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    if y.len() != f.nrows {
        return Err(Error::DimensionMismatch {
            expected: f.nrows,
            found: y.len(),
        });
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be non-negative")));
    }
    let n = f.ncols;
    let (mut proj, outside) = BallProjector::new(f, y, radius);
    let mut x = DVector::<Complex64>::zeros(n);
    let mut z = DVector::<Complex64>::zeros(n);
    let mut u = DVector::<Complex64>::zeros(n);

    if outside > radius + cfg.primal_tolerance * (1.0 + y.norm()) {
        proj.project(&z, &mut x);
        return Ok(SolverResult {
            x,
            iterations: 0,
            primal_residual: outside - radius,
            dual_residual: 0.0,
            status: SolverStatus::Infeasible,
        });
    }

    let sqrt_n = (n as f64).sqrt();
    let alpha = cfg.over_relaxation;
    let mut rho = cfg.penalty;
    let mut v = DVector::<Complex64>::zeros(n);
    let mut z_old = DVector::<Complex64>::zeros(n);
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        v.copy_from(&z);
        v -= &u;
        proj.project(&v, &mut x);
        z_old.copy_from(&z);
        let tau = 1.0 / rho;
        for j in 0..n {
            let xh = alpha * x[j] + (1.0 - alpha) * z_old[j];
            z[j] = soft_threshold(xh + u[j], tau);
            u[j] += xh - z[j];
        }
        primal = (&x - &z).norm();
        dual = rho * (&z - &z_old).norm();
        let eps_pri = sqrt_n * cfg.primal_tolerance + cfg.relative_tolerance * x.norm().max(z.norm());
        let eps_dual = sqrt_n * cfg.dual_tolerance + cfg.relative_tolerance * rho * u.norm();
        if primal <= eps_pri && dual <= eps_dual {
            return Ok(SolverResult {
                x: z,
                iterations: it,
                primal_residual: primal,
                dual_residual: dual,
                status: SolverStatus::Converged,
            });
        }
        if let Some(ratio) = cfg.balance_ratio {
            if primal > ratio * dual {
                rho *= 2.0;
                u /= Complex64::new(2.0, 0.0);
            } else if dual > ratio * primal {
                rho /= 2.0;
                u *= Complex64::new(2.0, 0.0);
            }
        }
    }
    Ok(SolverResult {
        x: z,
        iterations: cfg.max_iterations,
        primal_residual: primal,
        dual_residual: dual,
        status: SolverStatus::MaxIter,
    })
}

/// First-order optimality diagnostics of a candidate `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// `max(0, ‖Ax − y‖₂ − radius)`.
    pub feasibility_gap: f64,
    /// Distance from a valid dual certificate: the larger of the sign-fit
    /// residual on the support and the off-support excess of `|A*u|` over 1.
    pub dual_violation: f64,
    pub support_size: usize,
}

/// Checks the subgradient condition `A*u ∈ ∂‖x‖₁` for some `u`.
///
/// The support is `{j : |x_j| > 1e-6 · max|x|}`. Among the `u` solving
/// `(A*u)_S = sign(x_S)` in the least-squares sense, one is sought with
/// `|A*u| ≤ 1` off the support by alternating projections between the
/// affine solution family and the unit polydisc.
pub fn check_optimality(
    a: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
    x: &DVector<Complex64>,
    radius: f64,
) -> Result<OptimalityReport> {
    let (m, n) = a.shape();
    if y.len() != m || x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let feasibility_gap = ((a * x - y).norm() - radius).max(0.0);
    let xmax = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..n).filter(|&j| xmax > 0.0 && x[j].norm() > 1e-6 * xmax).collect();
    let off: Vec<usize> = (0..n).filter(|j| !support.contains(j)).collect();
    if support.is_empty() {
        return Ok(OptimalityReport {
            feasibility_gap,
            dual_violation: 0.0,
            support_size: 0,
        });
    }
    let sgn = DVector::from_iterator(support.len(), support.iter().map(|&j| x[j] / x[j].norm()));
    let a_s_adj = a.select_columns(support.iter()).adjoint();
    let fs = Factorization::new(&a_s_adj)?;
    let u0 = fs.pseudo_inverse_apply(&sgn, 1e-12);
    let fit = (&a_s_adj * &u0 - &sgn).camax();
    if off.is_empty() {
        return Ok(OptimalityReport {
            feasibility_gap,
            dual_violation: fit,
            support_size: support.len(),
        });
    }
    let a_off_adj = a.select_columns(off.iter()).adjoint();
    let c = &a_off_adj * &u0;
    let excess = |q: &DVector<Complex64>| q.iter().map(|v| v.norm() - 1.0).fold(0.0, f64::max);
    let mut best = excess(&c);

    // Null space of A_S* parametrizes every other sign-fitting u; it is the
    // orthogonal complement of the column space of A_S.
    let col = a_s_adj.adjoint().svd(true, false);
    let cu = col.u.expect("requested U");
    let smax = col.singular_values.iter().cloned().fold(0.0, f64::max);
    let range_cols: Vec<usize> = (0..col.singular_values.len())
        .filter(|&i| col.singular_values[i] > 1e-12 * smax)
        .collect();
    if best > 0.0 && range_cols.len() < m {
        let q_s = cu.select_columns(range_cols.iter());
        let null_proj = DMatrix::<Complex64>::identity(m, m) - &q_s * q_s.adjoint();
        let mm = &a_off_adj * null_proj;
        let msvd = mm.svd(true, false);
        let um = msvd.u.expect("requested U");
        let mmax = msvd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..msvd.singular_values.len())
            .filter(|&i| msvd.singular_values[i] > 1e-12 * mmax)
            .collect();
        let range = um.select_columns(keep.iter());
        let mut p = c.clone();
        let mut w = DVector::<Complex64>::zeros(c.len());
        for _ in 0..5000 {
            let d = &p - &w - &c;
            let q = &c + &range * range.ad_mul(&d);
            best = best.min(excess(&q));
            if best <= 0.0 {
                break;
            }
            let qw = &q + &w;
            p = qw.map(|v| if v.norm() > 1.0 { v / v.norm() } else { v });
            w = qw - &p;
        }
    }
    Ok(OptimalityReport {
        feasibility_gap,
        dual_violation: fit.max(best.max(0.0)),
        support_size: support.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(rows, cols, &data.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>())
    }

    fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im) / (2.0 * m as f64).sqrt()
        })
    }

    // Enumerates basic feasible solutions of a full-row-rank real system.
    fn brute_force_l1(a: &[[f64; 3]; 2], y: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let det = a[0][i] * a[1][j] - a[0][j] * a[1][i];
            if det.abs() < 1e-12 {
                continue;
            }
            let xi = (y[0] * a[1][j] - y[1] * a[0][j]) / det;
            let xj = (a[0][i] * y[1] - a[1][i] * y[0]) / det;
            best = best.min(xi.abs() + xj.abs());
        }
        best
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(c(3.0, 4.0), 5.0), c(0.0, 0.0));
        assert_eq!(soft_threshold(c(3.0, 4.0), 0.0), c(3.0, 4.0));
        let s = soft_threshold(c(3.0, 4.0), 2.5);
        assert!((s - c(1.5, 2.0)).norm() < 1e-15);
        assert!((s.norm() - 2.5).abs() < 1e-15);
        assert_eq!(soft_threshold(c(0.0, 0.0), 1.0), c(0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn soft_threshold_is_the_prox(re in -5.0..5.0f64, im in -5.0..5.0f64, tau in 0.0..4.0f64) {
            let z = c(re, im);
            let w = soft_threshold(z, tau);
            let obj = |v: Complex64| tau * v.norm() + 0.5 * (v - z).norm_sqr();
            let best = obj(w);
            for i in -20..=20 {
                for j in -20..=20 {
                    let cand = w + c(i as f64 * 0.01, j as f64 * 0.01);
                    prop_assert!(obj(cand) >= best - 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_and_square_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 6;
        let y = DVector::from_fn(n, |i, _| c(i as f64 - 2.5, 0.3 * i as f64));
        let r = basis_pursuit(&DMatrix::identity(n, n), &y, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Converged);
        assert!((&r.x - &y).norm() < 1e-7);

        let a = gaussian(&mut rng, n, n);
        let x_true = DVector::from_fn(n, |i, _| c(1.0 / (i + 1) as f64, -0.5));
        let yb = &a * &x_true;
        let r = basis_pursuit(&a, &yb, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Converged);
        assert!((&r.x - &x_true).norm() < 1e-6 * x_true.norm());
    }

    #[test]
    fn two_by_three_example() {
        // Every point of the segment between (1,1,0) and (0,0,2) costs 2.
        let rows = [[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]];
        let a = real_matrix(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.5]);
        let y = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let oracle = brute_force_l1(&rows, [1.0, 1.0]);
        assert!((oracle - 2.0).abs() < 1e-15);
        let r = basis_pursuit(&a, &y, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Converged);
        assert!((r.objective() - oracle).abs() < 1e-6);
        assert!((&a * &r.x - &y).norm() < 1e-6);
        let vertex = DVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let rep = check_optimality(&a, &y, &vertex, 0.0).unwrap();
        assert!(rep.dual_violation < 1e-6 && rep.feasibility_gap < 1e-12);
        let rep = check_optimality(&a, &y, &r.x, 0.0).unwrap();
        assert!(rep.dual_violation < 1e-6, "{rep:?}");

        // With weight 0.6 the lone third column becomes the unique optimum.
        let rows = [[1.0, 0.0, 0.6], [0.0, 1.0, 0.6]];
        let a = real_matrix(2, 3, &[1.0, 0.0, 0.6, 0.0, 1.0, 0.6]);
        let oracle = brute_force_l1(&rows, [1.0, 1.0]);
        let r = basis_pursuit(&a, &y, &SolverConfig::default()).unwrap();
        assert!((r.objective() - oracle).abs() < 1e-6);
        assert!((r.x[2] - c(1.0 / 0.6, 0.0)).norm() < 1e-6 && r.x[0].norm() < 1e-6);
        // a perturbed feasible point is not optimal
        let bad = DVector::from_vec(vec![c(0.3, 0.0), c(0.3, 0.0), c(0.7 / 0.6, 0.0)]);
        assert!((&a * &bad - &y).norm() < 1e-12);
        assert!(check_optimality(&a, &y, &bad, 0.0).unwrap().dual_violation > 1e-2);
    }

    #[test]
    fn ball_radius_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = gaussian(&mut rng, 10, 25);
        let y = DVector::from_fn(10, |i, _| c((i as f64).sin(), 0.2));
        let r = bpdn_ball(&a, &y, y.norm() * 1.01, &SolverConfig::default()).unwrap();
        assert!(r.x.norm() < 1e-12);
        let r0 = bpdn_ball(&a, &y, 0.0, &SolverConfig::default()).unwrap();
        let bp = basis_pursuit(&a, &y, &SolverConfig::default()).unwrap();
        assert!((&r0.x - &bp.x).norm() <= 1e-6 * bp.x.norm());
        let rr = bpdn_ball(&a, &y, 0.3, &SolverConfig::default()).unwrap();
        assert_eq!(rr.status, SolverStatus::Converged);
        assert!((&a * &rr.x - &y).norm() <= 0.3 + 1e-6);
        assert!(rr.objective() < bp.objective());
    }

    #[test]
    fn planted_one_sparse_real_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(20, 50, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            c(v, 0.0)
        });
        let mut x = DVector::<Complex64>::zeros(50);
        x[17] = c(-1.4, 0.0);
        let y = &a * &x;
        let r = bpdn_ball(&a, &y, 0.0, &SolverConfig::default()).unwrap();
        assert!((&r.x - &x).norm() < 1e-5);
        assert!(r.objective() <= l1_norm(&x) + 1e-8);
        let rep = check_optimality(&a, &y, &x, 0.0).unwrap();
        assert!(rep.dual_violation < 1e-5);
    }

    #[test]
    fn scaling_equivariance_and_reduction() {
        let cfg = SolverConfig::default();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let a = gaussian(&mut rng, 8, 16);
            let y = DVector::from_fn(8, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                c(re, 0.5 * re)
            });
            let bp = basis_pursuit(&a, &y, &cfg).unwrap();
            let ball = bpdn_ball(&a, &y, 0.0, &cfg).unwrap();
            assert!((&bp.x - &ball.x).norm() <= 1e-6 * bp.x.norm(), "seed {seed}");
            if seed < 5 {
                let k = c(3.7, 0.0);
                let scaled = basis_pursuit(&(&a * k), &(&y * k), &cfg).unwrap();
                assert!((&scaled.x - &bp.x).norm() <= 1e-6 * bp.x.norm());
            }
        }
    }

    #[test]
    fn infeasible_and_bad_input() {
        // Overdetermined, inconsistent.
        let a = real_matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let y = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(5.0, 0.0)]);
        let r = basis_pursuit(&a, &y, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Infeasible);
        let r = bpdn_ball(&a, &y, 10.0, &SolverConfig::default()).unwrap();
        assert_ne!(r.status, SolverStatus::Infeasible);
        assert!(bpdn_ball(&a, &y, -1.0, &SolverConfig::default()).is_err());
        assert!(basis_pursuit(&a, &DVector::zeros(2), &SolverConfig::default()).is_err());
        let cfg = SolverConfig {
            over_relaxation: 2.5,
            ..SolverConfig::default()
        };
        assert!(basis_pursuit(&a, &y, &cfg).is_err());
    }
}
