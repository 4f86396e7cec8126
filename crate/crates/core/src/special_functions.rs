//! Jacobi polynomials, Wigner-d and Wigner-D functions.
//!
//! The Wigner-D function of degree `l` and orders `k`, `n` is
//!
//! ```text
//! D_l^{k,n}(θ, φ, χ) = N_l · e^{-jkφ} · d_l^{k,n}(cos θ) · e^{-jnχ},   N_l = √((2l+1)/(8π²))
//! d_l^{k,n}(cos θ)   = ω √γ sin^μ(θ/2) cos^λ(θ/2) P_α^{(μ,λ)}(cos θ)
//! ```
//!
//! with `μ = |k-n|`, `λ = |k+n|`, `α = l - (μ+λ)/2` and the sign/ratio `ω`, `γ`
//! described on [`JacobiParams`]. The functions are orthonormal on SO(3) with
//! respect to `sin θ dθ dφ dχ`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::quadrature::gauss_legendre;
use crate::sampling::{preconditioner_weight, theta_density_unnormalized, MeasureKind, SamplePoint};
use crate::{Error, Result};

/// Largest degree supported by the factorial tables.
pub const MAX_DEGREE: u32 = 127;

/// Truncation bandwidth `B`: the basis holds every `D_l^{k,n}` with `l < B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bandwidth(u32);

impl Bandwidth {
    pub fn new(b: u32) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidArgument("bandwidth must be at least 1".into()));
        }
        if b > MAX_DEGREE + 1 {
            return Err(Error::InvalidArgument(format!(
                "bandwidth {b} exceeds the supported maximum {}",
                MAX_DEGREE + 1
            )));
        }
        Ok(Bandwidth(b))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of basis functions, `B(2B-1)(2B+1)/3`.
    pub fn count(self) -> usize {
        basis_offset(self.0)
    }

    /// Unpacks a column index into its `(l, k, n)` triple.
    pub fn index(self, column: usize) -> Result<WignerIndex> {
        if column >= self.count() {
            return Err(Error::InvalidArgument(format!(
                "column {column} outside basis of size {}",
                self.count()
            )));
        }
        Ok(WignerIndex::from_column(column))
    }

    /// All indices in canonical column order.
    pub fn indices(self) -> impl Iterator<Item = WignerIndex> {
        (0..self.0 as i32).flat_map(|l| {
            (-l..=l).flat_map(move |k| (-l..=l).map(move |n| WignerIndex { l: l as u32, k, n }))
        })
    }
}

/// Number of basis functions of degree below `b`.
fn basis_offset(b: u32) -> usize {
    let b = b as usize;
    b * (2 * b).saturating_sub(1) * (2 * b + 1) / 3
}

/// `N = B(2B-1)(2B+1)/3`, the number of Wigner-D functions of degree below `b`.
pub fn basis_count(b: u32) -> Result<usize> {
    Ok(Bandwidth::new(b)?.count())
}

/// Degree and orders of one Wigner-D basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WignerIndex {
    pub l: u32,
    pub k: i32,
    pub n: i32,
}

impl WignerIndex {
    pub fn new(l: u32, k: i32, n: i32) -> Result<Self> {
        if l > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!("degree {l} exceeds {MAX_DEGREE}")));
        }
        let li = l as i32;
        if k.abs() > li || n.abs() > li {
            return Err(Error::InvalidArgument(format!(
                "orders (k={k}, n={n}) must lie in [-{l}, {l}]"
            )));
        }
        Ok(WignerIndex { l, k, n })
    }

    /// Degree-major column index `l(2l-1)(2l+1)/3 + (k+l)(2l+1) + (n+l)`.
    pub fn column(&self) -> usize {
        let l = self.l as i64;
        let width = 2 * l + 1;
        basis_offset(self.l) + ((self.k as i64 + l) * width + (self.n as i64 + l)) as usize
    }

    pub fn from_column(column: usize) -> Self {
        let mut l = 0u32;
        while basis_offset(l + 1) <= column {
            l += 1;
        }
        let rem = column - basis_offset(l);
        let width = 2 * l as usize + 1;
        let li = l as i32;
        WignerIndex {
            l,
            k: (rem / width) as i32 - li,
            n: (rem % width) as i32 - li,
        }
    }

    pub fn jacobi_params(&self) -> JacobiParams {
        JacobiParams::new(*self)
    }
}

/// Parameters of the Jacobi-polynomial form of `d_l^{k,n}`.
///
/// * `mu = |k-n|`, `lambda = |k+n|` (same parity, so `alpha` is integral)
/// * `alpha = l - (mu+lambda)/2`
/// * `omega = 1` if `n >= k`, `(-1)^{n-k}` otherwise
/// * `gamma = α!(α+μ+λ)! / ((α+μ)!(α+λ)!)`
/// * `norm = √((2l+1)/(8π²))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub mu: u32,
    pub lambda: u32,
    pub alpha: u32,
    pub omega: f64,
    pub gamma: f64,
    pub norm: f64,
    sqrt_gamma: f64,
}

impl JacobiParams {
    pub fn new(idx: WignerIndex) -> Self {
        let mu = (idx.k - idx.n).unsigned_abs();
        let lambda = (idx.k + idx.n).unsigned_abs();
        let alpha = idx.l - (mu + lambda) / 2;
        let omega = if idx.n >= idx.k || (idx.n - idx.k) % 2 == 0 { 1.0 } else { -1.0 };
        // γ = 1 exactly when either order sum vanishes
        let log_gamma = if mu == 0 || lambda == 0 {
            0.0
        } else {
            ln_factorial(alpha) + ln_factorial(alpha + mu + lambda) - ln_factorial(alpha + mu) - ln_factorial(alpha + lambda)
        };
        JacobiParams {
            mu,
            lambda,
            alpha,
            omega,
            gamma: log_gamma.exp(),
            norm: ((2 * idx.l + 1) as f64 / (8.0 * PI * PI)).sqrt(),
            sqrt_gamma: (0.5 * log_gamma).exp(),
        }
    }

    pub fn sqrt_gamma(&self) -> f64 {
        self.sqrt_gamma
    }
}

/// `ln(n!)` from a table built once by summing logarithms.
pub fn ln_factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(4 * MAX_DEGREE as usize + 8);
        t.push(0.0);
        for i in 1..(4 * MAX_DEGREE as usize + 8) {
            t.push(t[i - 1] + (i as f64).ln());
        }
        t
    });
    table[n as usize]
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [-1, 1]")));
    }
    Ok(())
}

/// Jacobi polynomial `P_α^{(μ,λ)}(x)` by the ascending three-term recurrence in degree.
pub fn jacobi_eval(alpha: u32, mu: f64, lambda: f64, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    if mu < 0.0 || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Jacobi parameters must be non-negative, got ({mu}, {lambda})"
        )));
    }
    Ok(jacobi_unchecked(alpha, mu, lambda, x))
}

pub(crate) fn jacobi_unchecked(alpha: u32, a: f64, b: f64, x: f64) -> f64 {
    if alpha == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    let ab2 = a * a - b * b;
    for n in 2..=alpha {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c0 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + ab2);
        let c2 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Wigner-d function `d_l^{k,n}(cos θ)` for `θ ∈ [0, π]`.
pub fn wigner_d(idx: WignerIndex, theta: f64) -> f64 {
    wigner_d_with(&idx.jacobi_params(), theta)
}

/// Same as [`wigner_d`] with precomputed parameters.
pub fn wigner_d_with(p: &JacobiParams, theta: f64) -> f64 {
    let half = 0.5 * theta;
    let (s, c) = half.sin_cos();
    let jac = jacobi_unchecked(p.alpha, p.mu as f64, p.lambda as f64, theta.cos());
    p.omega * p.sqrt_gamma * s.powi(p.mu as i32) * c.powi(p.lambda as i32) * jac
}

/// Normalized Wigner-D function `D_l^{k,n}(θ, φ, χ)`.
#[allow(non_snake_case)]
pub fn wigner_D(idx: WignerIndex, point: &SamplePoint) -> Complex64 {
    let p = idx.jacobi_params();
    let d = wigner_d_with(&p, point.theta);
    let phase = -(idx.k as f64 * point.phi + idx.n as f64 * point.chi);
    Complex64::from_polar(p.norm * d, phase)
}

/// Associated Legendre function `P_l^m(x)` with the Condon–Shortley phase,
/// by the classical recurrence in degree (independent of the Jacobi route).
pub fn associated_legendre(l: u32, m: u32, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    if m > l {
        return Err(Error::InvalidArgument(format!("order {m} exceeds degree {l}")));
    }
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let pll = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    Ok(pmmp1)
}

/// Spherical harmonic `Y_l^k(θ, φ)` obtained from the generalized-harmonic identity
/// `Y_l^k = (-1)^k √((2l+1)/(4π)) e^{jkφ} d_l^{-k,0}(cos θ)`.
pub fn spherical_harmonic(l: u32, k: i32, theta: f64, phi: f64) -> Result<Complex64> {
    let idx = WignerIndex::new(l, -k, 0)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let amp = sign * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * wigner_d(idx, theta);
    Ok(Complex64::from_polar(amp, k as f64 * phi))
}

/// All `d_l^{k,n}(cos θ)` with `l < B` in canonical column order.
pub fn wigner_d_all(bandwidth: Bandwidth, theta: f64) -> Vec<f64> {
    bandwidth.indices().map(|idx| wigner_d(idx, theta)).collect()
}

/// One matrix row: every basis function evaluated at `point`.
pub fn wigner_row(bandwidth: Bandwidth, point: &SamplePoint) -> Vec<Complex64> {
    let b = bandwidth.get() as i32;
    // e^{-jkφ} and e^{-jnχ} for orders in [-(B-1), B-1]
    let phases = |angle: f64| -> Vec<Complex64> {
        (-(b - 1)..b).map(|m| Complex64::from_polar(1.0, -(m as f64) * angle)).collect()
    };
    let ephi = phases(point.phi);
    let echi = phases(point.chi);
    let off = (b - 1) as usize;
    let mut row = Vec::with_capacity(bandwidth.count());
    for idx in bandwidth.indices() {
        let p = idx.jacobi_params();
        let d = p.norm * wigner_d_with(&p, point.theta);
        row.push(ephi[(idx.k + off as i32) as usize] * echi[(idx.n + off as i32) as usize] * d);
    }
    row
}

/// Which inner product a Gram matrix is taken under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramWeight {
    /// Raw Wigner-D functions under `sin θ dθ dφ dχ`.
    Haar,
    /// Preconditioned functions under the (unnormalized) sampling measure density.
    Preconditioned(MeasureKind),
}

/// Quadrature Gram matrix `G_{ij} = ∫ f_i conj(f_j) dν` of the whole basis.
///
/// Uses `B+1` Gauss–Legendre nodes in `x = cos θ` and uniform `4B`-point grids
/// in φ and χ, which integrate every product of two basis functions exactly.
pub fn gram_matrix(bandwidth: Bandwidth, weight: GramWeight) -> DMatrix<Complex64> {
    let b = bandwidth.get() as usize;
    let n_funcs = bandwidth.count();
    let (xs, ws) = gauss_legendre(b + 1);
    let n_ang = 4 * b;
    let dang = 2.0 * PI / n_ang as f64;
    let n_pts = xs.len() * n_ang * n_ang;
    let mut f = DMatrix::<Complex64>::zeros(n_pts, n_funcs);
    let mut r = 0;
    for (&x, &w) in xs.iter().zip(&ws) {
        let theta = x.acos();
        // dθ = dx / sin θ; the measure factor is divided back out of sin θ
        let factor = match weight {
            GramWeight::Haar => 1.0,
            GramWeight::Preconditioned(kind) => {
                let pw = preconditioner_weight(kind, theta);
                pw * pw * theta_density_unnormalized(kind, theta) / theta.sin()
            }
        };
        let scale = (w * factor * dang * dang).sqrt();
        for i in 0..n_ang {
            for j in 0..n_ang {
                let point = SamplePoint::new(theta, i as f64 * dang, j as f64 * dang, MeasureKind::Product);
                for (c, v) in wigner_row(bandwidth, &point).into_iter().enumerate() {
                    f[(r, c)] = v * scale;
                }
                r += 1;
            }
        }
    }
    f.adjoint() * f
}

/// Largest entry of `|G - I|`, split into (diagonal, off-diagonal).
pub fn identity_deviation(g: &DMatrix<Complex64>) -> (f64, f64) {
    let mut diag = 0.0f64;
    let mut off = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i == j {
                diag = diag.max((g[(i, j)] - Complex64::new(1.0, 0.0)).norm());
            } else {
                off = off.max(g[(i, j)].norm());
            }
        }
    }
    (diag, off)
}
