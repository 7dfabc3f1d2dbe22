//! Rotation sensing: overlap decay `|<psi| exp(-i theta n.S) |psi>|^2`,
//! orthogonality angles and the directional variance of `n.S`.
//!
//! For pure states the quantum Fisher information about `theta` is
//! `4 Var(n.S)`; the variance is what is reported.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::random_euler;
use crate::spinstate::{stokes_expectation, stokes_matrices, SpinState};

/// Rotation by `angle` about the unit vector `axis`, acting as `exp(-i angle n.S)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    axis: [f64; 3],
    angle: f64,
}

impl AxisAngle {
    pub fn new(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = Vector3::from(axis).norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("axis has norm {n}, expected 1")));
        }
        Ok(Self { axis, angle })
    }

    /// Normalizes `axis` first.
    pub fn from_direction(axis: [f64; 3], angle: f64) -> Result<Self> {
        let v = Vector3::from(axis);
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Invalid(
                "axis must be a nonzero finite vector".into(),
            ));
        }
        Ok(Self {
            axis: (v / n).into(),
            angle,
        })
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

fn check_unit(axis: [f64; 3]) -> Result<Vector3<f64>> {
    AxisAngle::new(axis, 0.0).map(|a| Vector3::from(a.axis))
}

/// `n.S` as a matrix.
pub fn generator(state: &SpinState, axis: &Vector3<f64>) -> DMatrix<Complex64> {
    let [sx, sy, sz] = stokes_matrices(state.spin()).expect("state spin is valid");
    sx.matrix * Complex64::new(axis.x, 0.0)
        + sy.matrix * Complex64::new(axis.y, 0.0)
        + sz.matrix * Complex64::new(axis.z, 0.0)
}

/// Eigenvalues of `n.S` with the weights `|<v_k|psi>|^2`.
struct Spectrum {
    levels: Vec<(f64, f64)>,
}

impl Spectrum {
    fn new(state: &SpinState, axis: &Vector3<f64>) -> Self {
        let eig = nalgebra::SymmetricEigen::new(generator(state, axis));
        let psi = state.to_vector();
        let levels = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lambda)| (lambda, eig.eigenvectors.column(k).dotc(&psi).norm_sqr()))
            .collect();
        Self { levels }
    }

    /// `f(theta) = <psi| U |psi>` and `f'(theta)`.
    fn amplitude(&self, theta: f64) -> (Complex64, Complex64) {
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        for &(lambda, w) in &self.levels {
            let e = Complex64::from_polar(w, -theta * lambda);
            f += e;
            df += e * Complex64::new(0.0, -lambda);
        }
        (f, df)
    }

    fn overlap(&self, theta: f64) -> f64 {
        self.amplitude(theta).0.norm_sqr()
    }

    fn slope(&self, theta: f64) -> f64 {
        let (f, df) = self.amplitude(theta);
        2.0 * (f.conj() * df).re
    }
}

pub fn rotation_overlap(state: &SpinState, r: &AxisAngle) -> f64 {
    Spectrum::new(state, &Vector3::from(r.axis)).overlap(r.angle)
}

/// Smallest local minimum of the overlap in `(0, 2 pi]` that lies below `eps`.
pub fn orthogonality_angle(state: &SpinState, axis: [f64; 3], eps: f64) -> Result<Option<f64>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
    }
    let spec = Spectrum::new(state, &check_unit(axis)?);
    let steps = 256 * state.dim();
    let h = TAU / steps as f64;
    let mut prev_slope = spec.slope(0.0);
    for j in 1..=steps {
        let t = j as f64 * h;
        let slope = spec.slope(t);
        if prev_slope < 0.0 && slope >= 0.0 {
            let (mut lo, mut hi) = (t - h, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if spec.slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_min = if spec.overlap(lo) < spec.overlap(hi) {
                lo
            } else {
                hi
            };
            if spec.overlap(t_min) < eps {
                return Ok(Some(t_min));
            }
        }
        prev_slope = slope;
    }
    Ok(None)
}

/// `Var(n.S) = <(n.S)^2> - <n.S>^2`.
pub fn sensitivity(state: &SpinState, axis: [f64; 3]) -> Result<f64> {
    let n = check_unit(axis)?;
    Ok(covariance(state).quadratic(&n))
}

/// `Re <S_i S_j>` and `<S_i>`; `Var(n.S) = n^T C n - (n.s)^2`.
struct Covariance {
    second: Matrix3<f64>,
    mean: Vector3<f64>,
}

impl Covariance {
    fn quadratic(&self, n: &Vector3<f64>) -> f64 {
        (n.transpose() * self.second * n)[(0, 0)] - n.dot(&self.mean).powi(2)
    }
}

fn covariance(state: &SpinState) -> Covariance {
    let ops = stokes_matrices(state.spin()).expect("state spin is valid");
    let psi = state.to_vector();
    let applied: Vec<_> = ops.iter().map(|op| &op.matrix * &psi).collect();
    let second = Matrix3::from_fn(|i, j| applied[i].dotc(&applied[j]).re);
    Covariance {
        second,
        mean: Vector3::from(stokes_expectation(state)),
    }
}

/// The twelve proper rotations preserving a regular tetrahedron.
fn tetrahedral_group() -> Vec<Matrix3<f64>> {
    let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];
    let signs = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let mut out = Vec::with_capacity(12);
    for p in perms {
        for s in signs {
            out.push(Matrix3::from_fn(|i, j| if p[i] == j { s[i] } else { 0.0 }));
        }
    }
    out
}

/// `12 * ceil(n_axes / 12)` unit axes: tetrahedral orbits of a Fibonacci
/// lattice, rotated as a whole by a rotation drawn from `seed`. Every
/// quadratic form averages over them to a third of its trace.
pub fn scan_axes(n_axes: usize, seed: u64) -> Vec<Vector3<f64>> {
    let base = n_axes.div_ceil(12).max(1);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let spin = random_euler(&mut ChaCha8Rng::seed_from_u64(seed)).matrix();
    let group = tetrahedral_group();
    (0..base)
        .flat_map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / base as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            let b = Vector3::new(r * a.cos(), r * a.sin(), z);
            group.iter().map(move |g| spin * g * b).collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSample {
    pub axis: [f64; 3],
    pub sensitivity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityScan {
    pub axes: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_axis: Option<Vec<AxisSample>>,
}

pub fn sensitivity_scan(state: &SpinState, n_axes: usize, seed: u64) -> Result<SensitivityScan> {
    sensitivity_scan_with(state, n_axes, seed, false)
}

/// As [`sensitivity_scan`], optionally keeping the per-axis table.
pub fn sensitivity_scan_with(
    state: &SpinState,
    n_axes: usize,
    seed: u64,
    keep_axes: bool,
) -> Result<SensitivityScan> {
    if n_axes == 0 {
        return Err(Error::Invalid("n_axes must be at least 1".into()));
    }
    let cov = covariance(state);
    let samples: Vec<AxisSample> = scan_axes(n_axes, seed)
        .iter()
        .map(|n| AxisSample {
            axis: (*n).into(),
            sensitivity: cov.quadratic(n),
        })
        .collect();
    let values = samples.iter().map(|s| s.sensitivity);
    let min = values.clone().fold(f64::INFINITY, f64::min);
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.sum::<f64>() / samples.len() as f64;
    Ok(SensitivityScan {
        axes: samples.len(),
        min,
        max,
        mean,
        per_axis: keep_axes.then_some(samples),
    })
}
