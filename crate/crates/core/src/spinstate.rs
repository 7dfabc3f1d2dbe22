//! Spin-S pure states in the `|S, m>` basis and the Stokes operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{self, EulerAngles};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;

const NORM_TOL: f64 = 1e-12;

/// Normalized pure state `sum_m psi_m |S, m>`; `amps[i]` holds `m = i - S`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    spin: HalfInt,
    amps: Vec<Complex64>,
}

impl SpinState {
    /// Takes amplitudes that are already normalized to within `1e-12`.
    pub fn new(spin: HalfInt, amps: Vec<Complex64>) -> Result<Self> {
        check_spin(spin)?;
        if amps.len() != spin.dim() {
            return Err(Error::Length {
                expected: spin.dim(),
                got: amps.len(),
            });
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!(
                "state norm^2 is {norm2}, expected 1"
            )));
        }
        Ok(Self { spin, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn new_normalized(spin: HalfInt, mut amps: Vec<Complex64>) -> Result<Self> {
        check_spin(spin)?;
        if amps.len() != spin.dim() {
            return Err(Error::Length {
                expected: spin.dim(),
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroState);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { spin, amps })
    }

    pub fn spin(&self) -> HalfInt {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// Amplitude `psi_m`; zero when `|m| > S` or `m` has the wrong parity.
    pub fn amp(&self, m: HalfInt) -> Complex64 {
        index_of(self.spin, m).map_or(Complex64::new(0.0, 0.0), |i| self.amps[i])
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`; 1 when the states agree up to a global phase.
    pub fn fidelity(&self, other: &SpinState) -> f64 {
        if self.spin != other.spin {
            return 0.0;
        }
        self.inner(other).norm()
    }

    /// Projector `|psi><psi|`.
    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let v = self.to_vector();
        &v * v.adjoint()
    }

    /// Multiplies every amplitude by `e^{i phase}`.
    pub fn with_global_phase(&self, phase: f64) -> SpinState {
        let f = Complex64::from_polar(1.0, phase);
        Self {
            spin: self.spin,
            amps: self.amps.iter().map(|a| a * f).collect(),
        }
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Complex64 {
        let v = self.to_vector();
        (v.adjoint() * &op.matrix * &v)[(0, 0)]
    }
}

fn check_spin(spin: HalfInt) -> Result<()> {
    if spin.twice() < 1 {
        return Err(Error::Spin(spin));
    }
    Ok(())
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn index_of(spin: HalfInt, m: HalfInt) -> Option<usize> {
    if m.abs() > spin || !m.same_parity(spin) {
        return None;
    }
    Some(((m.twice() + spin.twice()) / 2) as usize)
}

pub(crate) fn projection_at(spin: HalfInt, index: usize) -> HalfInt {
    HalfInt::from_twice(2 * index as i32 - spin.twice())
}

/// Operator on the spin-S multiplet; rows are `m'`, columns `m`, both from `-S`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub spin: HalfInt,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, mp: HalfInt, m: HalfInt) -> Complex64 {
        match (index_of(self.spin, mp), index_of(self.spin, m)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.matrix - self.matrix.adjoint())) <= tol
    }
}

/// `|S, m>`.
pub fn basis_state(spin: HalfInt, m: HalfInt) -> Result<SpinState> {
    check_spin(spin)?;
    let i = index_of(spin, m).ok_or(Error::Projection { j: spin, m })?;
    let mut amps = vec![Complex64::new(0.0, 0.0); spin.dim()];
    amps[i] = Complex64::new(1.0, 0.0);
    Ok(SpinState { spin, amps })
}

/// Raising operator `S_+` with `<m+1|S_+|m> = sqrt(S(S+1) - m(m+1))`.
pub fn raising(spin: HalfInt) -> OperatorMatrix {
    let n = spin.dim();
    let s = spin.value();
    let mut matrix = DMatrix::zeros(n, n);
    for col in 0..n.saturating_sub(1) {
        let m = projection_at(spin, col).value();
        matrix[(col + 1, col)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    OperatorMatrix { spin, matrix }
}

/// `(S_x, S_y, S_z)` in the `|S, m>` basis.
pub fn stokes_matrices(spin: HalfInt) -> Result<[OperatorMatrix; 3]> {
    check_spin(spin)?;
    let plus = raising(spin).matrix;
    let minus = plus.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let sx = (&plus + &minus) * half;
    let sy = (&plus - &minus) * Complex64::new(0.0, -0.5);
    let n = spin.dim();
    let sz = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(projection_at(spin, i).value(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok([sx, sy, sz].map(|matrix| OperatorMatrix { spin, matrix }))
}

fn binomial(n: i32, k: i32) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sqrt(C(2S, S+m))` for each `m = -S..S`.
pub(crate) fn sqrt_binomials(spin: HalfInt) -> Vec<f64> {
    let n = spin.twice();
    (0..=n).map(|k| binomial(n, k).sqrt()).collect()
}

/// SU(2) coherent state `(1+|a|^2)^{-S} exp(a S_+)|S,-S>` with
/// `a = tan(theta/2) e^{-i phi}`, evaluated from its binomial amplitudes.
pub fn coherent_state(spin: HalfInt, theta: f64, phi: f64) -> Result<SpinState> {
    check_spin(spin)?;
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Invalid(format!("theta = {theta} outside [0, pi]")));
    }
    let (c, s) = half_angle(theta);
    let n = spin.twice();
    let amps = sqrt_binomials(spin)
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            let k = k as i32;
            let mag = b * c.powi(n - k) * s.powi(k);
            Complex64::from_polar(mag, -(k as f64) * phi)
        })
        .collect();
    SpinState::new_normalized(spin, amps)
}

pub(crate) fn half_angle(theta: f64) -> (f64, f64) {
    if theta == std::f64::consts::PI {
        (0.0, 1.0)
    } else {
        let h = 0.5 * theta;
        (h.cos(), h.sin())
    }
}

/// `(|S,S> - |S,-S>) / sqrt(2)`.
pub fn noon_state(spin: HalfInt) -> Result<SpinState> {
    check_spin(spin)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); spin.dim()];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(-r, 0.0);
    amps[spin.dim() - 1] = Complex64::new(r, 0.0);
    Ok(SpinState { spin, amps })
}

/// `psi'_{m'} = sum_m D^S_{m'm}(R) psi_m`.
pub fn rotate(state: &SpinState, r: &EulerAngles) -> SpinState {
    let d = angular::wigner_matrix(state.spin, r);
    let out = d * state.to_vector();
    SpinState {
        spin: state.spin,
        amps: out.iter().copied().collect(),
    }
}

/// `(<S_x>, <S_y>, <S_z>)`.
pub fn stokes_expectation(state: &SpinState) -> [f64; 3] {
    let ops = stokes_matrices(state.spin).expect("state spin is valid");
    ops.map(|op| state.expectation(&op).re)
}

#[derive(Serialize, Deserialize)]
struct AmpRecord {
    m: HalfInt,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateRecord {
    #[serde(rename = "S")]
    spin: HalfInt,
    amps: Vec<AmpRecord>,
}

impl Serialize for SpinState {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        StateRecord {
            spin: self.spin,
            amps: self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| AmpRecord {
                    m: projection_at(self.spin, i),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpinState {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = StateRecord::deserialize(deserializer)?;
        if rec.amps.len() != rec.spin.dim() {
            return Err(D::Error::custom(format!(
                "expected {} amplitudes for S = {}, got {}",
                rec.spin.dim(),
                rec.spin,
                rec.amps.len()
            )));
        }
        for (i, a) in rec.amps.iter().enumerate() {
            let want = projection_at(rec.spin, i);
            if a.m != want {
                return Err(D::Error::custom(format!(
                    "amplitude {i} has m = {}, expected {want}",
                    a.m
                )));
            }
        }
        let amps = rec
            .amps
            .iter()
            .map(|a| Complex64::new(a.re, a.im))
            .collect();
        SpinState::new(rec.spin, amps).map_err(D::Error::custom)
    }
}
