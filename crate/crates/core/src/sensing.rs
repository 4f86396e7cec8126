//! Measurement matrices, the forward model and bounded noise.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{fmt_real, parse_real, read_csv, read_json, write_complex_csv, write_csv, write_json};
use crate::sampling::{preconditioner_weight, MeasureKind, SamplePoint};
use crate::special_functions::{wigner_row, Bandwidth};
use crate::{Error, Result};

/// Expansion coefficients over the full bandwidth-`B` basis, in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub bandwidth: Bandwidth,
    pub values: DVector<Complex64>,
}

impl CoefficientVector {
    pub fn new(bandwidth: Bandwidth, values: DVector<Complex64>) -> Result<Self> {
        if values.len() != bandwidth.count() {
            return Err(Error::DimensionMismatch {
                expected: bandwidth.count(),
                found: values.len(),
            });
        }
        Ok(CoefficientVector { bandwidth, values })
    }

    pub fn zeros(bandwidth: Bandwidth) -> Self {
        CoefficientVector {
            bandwidth,
            values: DVector::zeros(bandwidth.count()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `m × N` matrix of raw Wigner-D evaluations, one row per point.
pub fn build_matrix(points: &[SamplePoint], bandwidth: Bandwidth) -> Result<DMatrix<Complex64>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot build a matrix from zero points".into()));
    }
    let rows: Vec<Vec<Complex64>> = points.par_iter().map(|p| wigner_row(bandwidth, p)).collect();
    let n = bandwidth.count();
    Ok(DMatrix::from_fn(points.len(), n, |i, j| rows[i][j]))
}

/// Noiseless samples `y = A g` of the expansion `g` at `points`.
pub fn forward(g: &CoefficientVector, points: &[SamplePoint]) -> Result<DVector<Complex64>> {
    let a = build_matrix(points, g.bandwidth)?;
    Ok(a * &g.values)
}

/// Adds i.i.d. noise drawn uniformly on the complex disk of radius `epsilon`.
pub fn add_noise<R: Rng + ?Sized>(y: &DVector<Complex64>, epsilon: f64, rng: &mut R) -> Result<DVector<Complex64>> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise bound {epsilon} must be non-negative")));
    }
    if epsilon == 0.0 {
        return Ok(y.clone());
    }
    Ok(y.map(|v| {
        let r = epsilon * rng.random::<f64>().sqrt();
        let a = 2.0 * PI * rng.random::<f64>();
        v + Complex64::from_polar(r, a)
    }))
}

/// Raw measurements together with everything needed to precondition them.
#[derive(Debug, Clone)]
pub struct SensingProblem {
    pub bandwidth: Bandwidth,
    pub measure: MeasureKind,
    pub points: Vec<SamplePoint>,
    /// Raw basis evaluations `A`.
    pub matrix: DMatrix<Complex64>,
    /// Preconditioner diagonal `P`.
    pub weights: Vec<f64>,
    pub y: DVector<Complex64>,
    /// Entrywise noise bound `‖η‖_∞ ≤ ε`.
    pub epsilon: f64,
    pub seed: Option<u64>,
}

impl SensingProblem {
    pub fn new(
        bandwidth: Bandwidth,
        measure: MeasureKind,
        points: Vec<SamplePoint>,
        y: DVector<Complex64>,
        epsilon: f64,
    ) -> Result<Self> {
        let matrix = build_matrix(&points, bandwidth)?;
        Self::with_matrix(bandwidth, measure, points, matrix, y, epsilon)
    }

    pub fn with_matrix(
        bandwidth: Bandwidth,
        measure: MeasureKind,
        points: Vec<SamplePoint>,
        matrix: DMatrix<Complex64>,
        y: DVector<Complex64>,
        epsilon: f64,
    ) -> Result<Self> {
        if y.len() != points.len() || matrix.nrows() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: y.len(),
            });
        }
        if matrix.ncols() != bandwidth.count() {
            return Err(Error::DimensionMismatch {
                expected: bandwidth.count(),
                found: matrix.ncols(),
            });
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise bound {epsilon} must be non-negative")));
        }
        let weights = points.iter().map(|p| preconditioner_weight(measure, p.theta)).collect();
        Ok(SensingProblem {
            bandwidth,
            measure,
            points,
            matrix,
            weights,
            y,
            epsilon,
            seed: None,
        })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Writes `points.csv`, `y.csv` and `meta.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_csv(
            &dir.join("points.csv"),
            &["theta", "phi", "chi", "measure"],
            self.points
                .iter()
                .map(|p| [fmt_real(p.theta), fmt_real(p.phi), fmt_real(p.chi), p.measure.to_string()]),
        )?;
        write_complex_csv(&dir.join("y.csv"), self.y.iter())?;
        let meta = ProblemMeta {
            bandwidth: self.bandwidth.get(),
            m: self.m(),
            epsilon: self.epsilon,
            seed: self.seed,
            measure: self.measure,
            scale: 1.0 / (self.m() as f64).sqrt(),
        };
        write_json(&dir.join("meta.json"), &meta)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta: ProblemMeta = read_json(&dir.join("meta.json"))?;
        let points = read_csv(&dir.join("points.csv"), 4)?
            .iter()
            .map(|r| {
                Ok(SamplePoint::new(
                    parse_real(&r[0])?,
                    parse_real(&r[1])?,
                    parse_real(&r[2])?,
                    r[3].parse()?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        if points.len() != meta.m {
            return Err(Error::DimensionMismatch {
                expected: meta.m,
                found: points.len(),
            });
        }
        let y = crate::io::read_complex_csv(&dir.join("y.csv"))?;
        let mut p = SensingProblem::new(
            Bandwidth::new(meta.bandwidth)?,
            meta.measure,
            points,
            DVector::from_vec(y),
            meta.epsilon,
        )?;
        p.seed = meta.seed;
        Ok(p)
    }
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    #[serde(rename = "B")]
    pub bandwidth: u32,
    pub m: usize,
    pub epsilon: f64,
    pub seed: Option<u64>,
    pub measure: MeasureKind,
    pub scale: f64,
}

/// The scaled program handed to the ℓ1 solver.
#[derive(Debug, Clone)]
pub struct Preconditioned {
    /// `scale · P A`
    pub matrix: DMatrix<Complex64>,
    /// `scale · P y`
    pub observations: DVector<Complex64>,
    /// `scale · √m · ε`
    pub radius: f64,
    pub scale: f64,
}

/// Applies `P` and the `1/√m` scaling.
///
/// The constraint `‖PAz − Py‖₂ ≤ √m ε` is kept verbatim on the unscaled system;
/// after scaling by `1/√m` its radius is `ε`. Since every weight is at most
/// one, noise with `‖η‖_∞ ≤ ε` keeps the true coefficients feasible.
pub fn precondition(problem: &SensingProblem) -> Preconditioned {
    let m = problem.m() as f64;
    let scale = 1.0 / m.sqrt();
    let mut matrix = problem.matrix.clone();
    let mut observations = problem.y.clone();
    for (i, &w) in problem.weights.iter().enumerate() {
        let f = w * scale;
        matrix.row_mut(i).scale_mut(f);
        observations[i] *= f;
    }
    Preconditioned {
        matrix,
        observations,
        radius: scale * m.sqrt() * problem.epsilon,
        scale,
    }
}
