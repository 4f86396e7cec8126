//! Sampling measures on SO(3) and their preconditioners.
//!
//! Two measures are supported, both uniform in φ and χ:
//!
//! * `Product`: `dθ dφ dχ`, preconditioned by `(sin θ)^{1/2}`;
//! * `TanThird`: `|tan θ|^{1/3} dθ dφ dχ`, preconditioned by `(sin²θ |cos θ|)^{1/6}`.
//!
//! In both cases `weight(θ)² · density(θ) = sin θ`, which turns the raw
//! Wigner-D system (orthonormal under `sin θ dθ dφ dχ`) into an orthonormal
//! system under the sampling measure.
//!
//! The θ-marginal of `TanThird` has an integrable pole at π/2 and is drawn by
//! inverting a tabulated CDF. The table is built on nodes uniform in
//! `s = (π/2 - θ)^{2/3}`, a variable in which the pole disappears.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::quadrature::integrate_adaptive;
use crate::{Error, Result};

/// Default number of intervals of the inverse-CDF table.
pub const DEFAULT_TABLE_RESOLUTION: usize = 4096;

const CDF_MAGIC: &[u8; 8] = b"WCSCDF01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "tan13")]
    TanThird,
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::Product => "product",
            MeasureKind::TanThird => "tan13",
        })
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(MeasureKind::Product),
            "tan13" => Ok(MeasureKind::TanThird),
            other => Err(Error::InvalidArgument(format!(
                "unknown measure '{other}' (expected product or tan13)"
            ))),
        }
    }
}

/// Euler angles of one sample together with the measure that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub theta: f64,
    pub phi: f64,
    pub chi: f64,
    pub measure: MeasureKind,
}

impl SamplePoint {
    pub fn new(theta: f64, phi: f64, chi: f64, measure: MeasureKind) -> Self {
        SamplePoint {
            theta,
            phi,
            chi,
            measure,
        }
    }
}

/// Preconditioner `P(θ)` matched to the measure.
pub fn preconditioner_weight(kind: MeasureKind, theta: f64) -> f64 {
    let s = theta.sin().max(0.0);
    match kind {
        MeasureKind::Product => s.sqrt(),
        MeasureKind::TanThird => (s * s * theta.cos().abs()).powf(1.0 / 6.0),
    }
}

/// θ-density of the measure up to normalization: `1` or `|tan θ|^{1/3}`.
pub fn theta_density_unnormalized(kind: MeasureKind, theta: f64) -> f64 {
    match kind {
        MeasureKind::Product => 1.0,
        MeasureKind::TanThird => theta.tan().abs().cbrt(),
    }
}

/// Total mass of `|tan θ|^{1/3}` on `[0, π]`, `2π/√3`.
pub fn tan_third_mass() -> f64 {
    2.0 * PI / 3f64.sqrt()
}

/// Normalized θ-density on `[0, π]`.
pub fn theta_density(kind: MeasureKind, theta: f64) -> f64 {
    match kind {
        MeasureKind::Product => 1.0 / PI,
        MeasureKind::TanThird => theta_density_unnormalized(kind, theta) / tan_third_mass(),
    }
}

/// Total mass of the (unnormalized) measure on SO(3): `4π² ∫ density dθ`.
///
/// Multiplying preconditioned rows by the square root of this constant makes
/// the system orthonormal with respect to the sampling *probability* measure.
pub fn measure_mass(kind: MeasureKind) -> f64 {
    let theta_mass = match kind {
        MeasureKind::Product => PI,
        MeasureKind::TanThird => tan_third_mass(),
    };
    4.0 * PI * PI * theta_mass
}

/// Tabulated CDF of the `|tan θ|^{1/3}` θ-marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    theta: Vec<f64>,
    cdf: Vec<f64>,
    // first half only (θ ≤ π/2): s coordinate, G = F^{3/4} and dG/ds
    s: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
}

// Integrand of ∫ tan^{1/3} in s = (π/2 - θ)^{2/3}: (3/2)(w cot w)^{1/3}, w = s^{3/2}.
fn s_integrand(s: f64) -> f64 {
    let w = s.max(0.0).powf(1.5);
    if w < 1e-8 {
        1.5
    } else {
        1.5 * (w / w.tan()).max(0.0).cbrt()
    }
}

fn s_of_theta(theta: f64) -> f64 {
    (FRAC_PI_2 - theta).max(0.0).powf(2.0 / 3.0)
}

fn theta_of_s(s: f64) -> f64 {
    FRAC_PI_2 - s.powf(1.5)
}

impl CdfTable {
    /// Integrates the density onto `resolution` intervals (rounded up to even).
    pub fn build(resolution: usize) -> Result<Self> {
        if resolution < 256 {
            return Err(Error::InvalidArgument(format!(
                "CDF table resolution {resolution} below the minimum of 256"
            )));
        }
        let half = resolution.div_ceil(2);
        let s_max = s_of_theta(0.0);
        let s: Vec<f64> = (0..=half).map(|i| s_max * (1.0 - i as f64 / half as f64)).collect();
        let mut cum = vec![0.0; half + 1];
        for i in 1..=half {
            let piece = integrate_adaptive(s_integrand, s[i], s[i - 1], 1e-17, 1e-13)?;
            cum[i] = cum[i - 1] + piece;
        }
        let half_mass = cum[half];
        let exact = 0.5 * tan_third_mass();
        if ((half_mass - exact) / exact).abs() > 1e-10 {
            return Err(Error::Quadrature(format!(
                "half mass {half_mass} deviates from {exact} beyond relative 1e-10"
            )));
        }
        let mut theta: Vec<f64> = s.iter().map(|&s| theta_of_s(s)).collect();
        theta[0] = 0.0;
        theta[half] = FRAC_PI_2;
        let mut cdf: Vec<f64> = cum.iter().map(|c| 0.5 * c / half_mass).collect();
        cdf[half] = 0.5;
        Self::from_half(theta, cdf)
    }

    // Completes the table by mirror symmetry and prepares interpolation data.
    fn from_half(theta_half: Vec<f64>, cdf_half: Vec<f64>) -> Result<Self> {
        let half = theta_half.len() - 1;
        let total = tan_third_mass();
        let s: Vec<f64> = theta_half.iter().map(|&t| s_of_theta(t)).collect();
        let g: Vec<f64> = cdf_half.iter().map(|f| f.powf(0.75)).collect();
        let dg: Vec<f64> = (0..=half)
            .map(|i| {
                if i == 0 {
                    // F ≈ (3/(4Z)) θ^{4/3} near θ = 0, so G is linear in θ there
                    -(0.75 / total).powf(0.75) * 1.5 * s[0].sqrt()
                } else {
                    let df = -s_integrand(s[i]) / total;
                    0.75 * cdf_half[i].powf(-0.25) * df
                }
            })
            .collect();
        let mut theta = theta_half.clone();
        let mut cdf = cdf_half.clone();
        for i in (0..half).rev() {
            theta.push(PI - theta_half[i]);
            cdf.push(1.0 - cdf_half[i]);
        }
        let table = CdfTable {
            theta,
            cdf,
            s,
            g,
            dg,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.theta.len();
        if n < 257 || n != self.cdf.len() || n % 2 == 0 {
            return Err(Error::CdfTable(format!("bad table length {n}")));
        }
        if self.theta[0] != 0.0 || self.cdf[0] != 0.0 || self.theta[n - 1] != PI || self.cdf[n - 1] != 1.0 {
            return Err(Error::CdfTable("endpoints must be (0, 0) and (π, 1)".into()));
        }
        for i in 1..n {
            if !(self.theta[i] > self.theta[i - 1]) || !(self.cdf[i] > self.cdf[i - 1]) {
                return Err(Error::CdfTable(format!("not strictly increasing at entry {i}")));
            }
        }
        Ok(())
    }

    /// Number of intervals.
    pub fn resolution(&self) -> usize {
        self.theta.len() - 1
    }

    /// `(θ, F(θ))` pairs in ascending order.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta.iter().copied().zip(self.cdf.iter().copied())
    }

    fn half(&self) -> usize {
        self.s.len() - 1
    }

    // Monotone cubic Hermite pieces of G(s) on [s_i, s_{i+1}].
    fn hermite(&self, i: usize, t: f64) -> f64 {
        let h = self.s[i + 1] - self.s[i];
        let (g0, g1) = (self.g[i], self.g[i + 1]);
        let slope = (g1 - g0) / h;
        let (mut d0, mut d1) = (self.dg[i], self.dg[i + 1]);
        // Fritsch–Carlson limiter
        if d0 * slope <= 0.0 {
            d0 = 0.0;
        }
        if d1 * slope <= 0.0 {
            d1 = 0.0;
        }
        let (a, b) = (d0 / slope, d1 / slope);
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d0 *= tau;
            d1 *= tau;
        }
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * g0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * g1
            + (t3 - t2) * h * d1
    }

    fn cdf_lower_half(&self, theta: f64) -> f64 {
        let half = self.half();
        let i = self.theta[..=half].partition_point(|&t| t <= theta).clamp(1, half) - 1;
        let s = s_of_theta(theta);
        let t = ((s - self.s[i]) / (self.s[i + 1] - self.s[i])).clamp(0.0, 1.0);
        self.hermite(i, t).max(0.0).powf(4.0 / 3.0)
    }

    /// Interpolated CDF.
    pub fn cdf(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, PI);
        if theta <= FRAC_PI_2 {
            self.cdf_lower_half(theta)
        } else {
            1.0 - self.cdf_lower_half(PI - theta)
        }
    }

    fn inverse_lower_half(&self, u: f64) -> f64 {
        let half = self.half();
        let target = u.max(0.0).powf(0.75);
        let i = self.g[..=half].partition_point(|&g| g <= target).clamp(1, half) - 1;
        // G is increasing in t on this piece: safeguarded Newton inside [0, 1]
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = ((target - self.g[i]) / (self.g[i + 1] - self.g[i])).clamp(0.0, 1.0);
        for _ in 0..60 {
            let f = self.hermite(i, t) - target;
            if f.abs() < 1e-16 {
                break;
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let eps = 1e-7;
            let df = (self.hermite(i, (t + eps).min(1.0)) - self.hermite(i, (t - eps).max(0.0)))
                / ((t + eps).min(1.0) - (t - eps).max(0.0));
            let next = t - f / df;
            t = if df > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 {
                break;
            }
        }
        let s = self.s[i] + t * (self.s[i + 1] - self.s[i]);
        theta_of_s(s).clamp(0.0, FRAC_PI_2)
    }

    /// Interpolated inverse CDF.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u <= 0.5 {
            self.inverse_lower_half(u)
        } else {
            PI - self.inverse_lower_half(1.0 - u)
        }
    }

    /// Writes the table as `WCSCDF01`, the resolution as little-endian u64, then
    /// `resolution + 1` little-endian `(θ, F)` f64 pairs.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 16 * self.theta.len());
        buf.extend_from_slice(CDF_MAGIC);
        buf.extend_from_slice(&(self.resolution() as u64).to_le_bytes());
        for (t, f) in self.entries() {
            buf.extend_from_slice(&t.to_le_bytes());
            buf.extend_from_slice(&f.to_le_bytes());
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != CDF_MAGIC {
            return Err(Error::CdfTable("missing WCSCDF01 header".into()));
        }
        let resolution = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = &bytes[16..];
        if body.len() != 16 * (resolution + 1) || resolution % 2 == 1 {
            return Err(Error::CdfTable(format!(
                "payload of {} bytes does not match resolution {resolution}",
                body.len()
            )));
        }
        let read = |i: usize| f64::from_le_bytes(body[8 * i..8 * i + 8].try_into().unwrap());
        let theta: Vec<f64> = (0..=resolution).map(|i| read(2 * i)).collect();
        let cdf: Vec<f64> = (0..=resolution).map(|i| read(2 * i + 1)).collect();
        let half = resolution / 2;
        for i in 0..=half {
            let j = resolution - i;
            if (theta[j] - (PI - theta[i])).abs() > 1e-12 || (cdf[j] - (1.0 - cdf[i])).abs() > 1e-12 {
                return Err(Error::CdfTable(format!("entries {i} and {j} are not mirror images")));
            }
        }
        if theta[half] != FRAC_PI_2 {
            return Err(Error::CdfTable("middle entry must sit at π/2".into()));
        }
        let table = Self::from_half(theta[..=half].to_vec(), cdf[..=half].to_vec())?;
        if table.theta != theta || table.cdf != cdf {
            return Err(Error::CdfTable("table is not symmetric about π/2".into()));
        }
        Ok(table)
    }
}

/// A sampling measure, with its CDF table when one is needed.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub cdf_table: Option<Arc<CdfTable>>,
}

impl MeasureSpec {
    pub fn product() -> Self {
        MeasureSpec {
            kind: MeasureKind::Product,
            cdf_table: None,
        }
    }

    pub fn tan_third(table: CdfTable) -> Self {
        MeasureSpec {
            kind: MeasureKind::TanThird,
            cdf_table: Some(Arc::new(table)),
        }
    }

    /// Builds whatever the measure needs at the default table resolution.
    pub fn for_kind(kind: MeasureKind) -> Result<Self> {
        match kind {
            MeasureKind::Product => Ok(Self::product()),
            MeasureKind::TanThird => build_cdf_table(DEFAULT_TABLE_RESOLUTION),
        }
    }

    pub fn table_resolution(&self) -> Option<usize> {
        self.cdf_table.as_ref().map(|t| t.resolution())
    }

    pub fn weight(&self, theta: f64) -> f64 {
        preconditioner_weight(self.kind, theta)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Result<Vec<SamplePoint>> {
        match self.kind {
            MeasureKind::Product => Ok(sample_product(rng, m)),
            MeasureKind::TanThird => sample_tan_measure(rng, m, self),
        }
    }
}

/// Tabulates the `|tan θ|^{1/3}` CDF.
pub fn build_cdf_table(resolution: usize) -> Result<MeasureSpec> {
    Ok(MeasureSpec::tan_third(CdfTable::build(resolution)?))
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * PI * rng.random::<f64>()
}

/// i.i.d. draws from `dθ dφ dχ` on `[0, π] × [0, 2π)²`.
pub fn sample_product<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<SamplePoint> {
    (0..m)
        .map(|_| {
            let theta = PI * rng.random::<f64>();
            let phi = uniform_angle(rng);
            let chi = uniform_angle(rng);
            SamplePoint::new(theta, phi, chi, MeasureKind::Product)
        })
        .collect()
}

/// i.i.d. draws from `|tan θ|^{1/3} dθ dφ dχ` by inverse-CDF lookup.
pub fn sample_tan_measure<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    spec: &MeasureSpec,
) -> Result<Vec<SamplePoint>> {
    let table = match (&spec.kind, &spec.cdf_table) {
        (MeasureKind::TanThird, Some(t)) => t,
        _ => return Err(Error::CdfTable("tan13 sampling requires a CDF table".into())),
    };
    table.validate()?;
    Ok((0..m)
        .map(|_| {
            let theta = table.inverse_cdf(rng.random::<f64>());
            let phi = uniform_angle(rng);
            let chi = uniform_angle(rng);
            SamplePoint::new(theta, phi, chi, MeasureKind::TanThird)
        })
        .collect())
}
