//! Clebsch-Gordan coefficients and Wigner rotation matrices.
//!
//! CG coefficients come from the Racah sum evaluated in exact rational
//! arithmetic; only the final `sqrt` is done in floating point.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use nalgebra::Matrix3;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;

const FACTORIAL_CACHE: usize = 256;

fn big_factorials() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(FACTORIAL_CACHE);
        v.push(BigUint::one());
        for n in 1..FACTORIAL_CACHE {
            let next = &v[n - 1] * BigUint::from(n);
            v.push(next);
        }
        v
    })
}

pub(crate) fn big_factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let n = n as usize;
    let table = big_factorials();
    if n < table.len() {
        BigInt::from(table[n].clone())
    } else {
        let mut acc = table[table.len() - 1].clone();
        for k in table.len()..=n {
            acc *= BigUint::from(k);
        }
        BigInt::from(acc)
    }
}

fn float_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = vec![1.0f64; 171];
        for n in 1..v.len() {
            v[n] = v[n - 1] * n as f64;
        }
        v
    })
}

fn check_projection(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 || m.abs() > j || !j.same_parity(m) {
        return Err(Error::Projection { j, m });
    }
    Ok(())
}

/// Clebsch-Gordan coefficient `<j1 m1, j2 m2 | J M>`.
///
/// Returns an exact `0.0` whenever `M != m1 + m2` or the triangle rule fails.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j, m)?;
    Ok(clebsch_gordan_exact(j1, m1, j2, m2, j, m)
        .map(|(sign, square)| {
            let v = square.to_f64().unwrap_or(0.0).sqrt();
            if sign < 0 {
                -v
            } else {
                v
            }
        })
        .unwrap_or(0.0))
}

/// Sign and exact square of a CG coefficient, or `None` when it vanishes by
/// selection rules or by cancellation.
pub fn clebsch_gordan_exact(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Option<(i8, BigRational)> {
    if m1 + m2 != m {
        return None;
    }
    // All of these are integers once the parities are consistent.
    let a = (j1 + j2 - j).as_int()?;
    let b = (j1 - j2 + j).as_int()?;
    let c = (-j1 + j2 + j).as_int()?;
    if a < 0 || b < 0 || c < 0 {
        return None;
    }
    let int = |h: HalfInt| h.as_int().expect("parity checked");
    let total = int(j1 + j2 + j) + 1;
    let (j1pm1, j1mm1) = (int(j1 + m1), int(j1 - m1));
    let (j2pm2, j2mm2) = (int(j2 + m2), int(j2 - m2));
    let (jpm, jmm) = (int(j + m), int(j - m));

    let prefactor_num = BigInt::from(j.twice() + 1)
        * big_factorial(a)
        * big_factorial(b)
        * big_factorial(c)
        * big_factorial(j1pm1)
        * big_factorial(j1mm1)
        * big_factorial(j2pm2)
        * big_factorial(j2mm2)
        * big_factorial(jpm)
        * big_factorial(jmm);
    let prefactor = BigRational::new(prefactor_num, big_factorial(total));

    let t1 = int(j - j2 + m1);
    let t2 = int(j - j1 - m2);
    let k_min = 0.max(-t1).max(-t2);
    let k_max = a.min(j1mm1).min(j2pm2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = big_factorial(k)
            * big_factorial(a - k)
            * big_factorial(j1mm1 - k)
            * big_factorial(j2pm2 - k)
            * big_factorial(t1 + k)
            * big_factorial(t2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return None;
    }
    let sign = if sum.is_negative() { -1 } else { 1 };
    Some((sign, prefactor * &sum * &sum))
}

/// Wigner small-d element `d^j_{m' m}(beta)`.
pub fn wigner_d_small(j: HalfInt, mp: HalfInt, m: HalfInt, beta: f64) -> Result<f64> {
    check_projection(j, mp)?;
    check_projection(j, m)?;
    Ok(small_d_unchecked(j, mp, m, beta))
}

pub(crate) fn small_d_unchecked(j: HalfInt, mp: HalfInt, m: HalfInt, beta: f64) -> f64 {
    if beta == 0.0 {
        return if mp == m { 1.0 } else { 0.0 };
    }
    if beta == PI {
        // d^j_{m'm}(pi) = (-1)^{j-m} delta_{m',-m}
        return match (mp == -m, (j - m).as_int().map(|e| e % 2 == 0)) {
            (true, Some(true)) => 1.0,
            (true, _) => -1.0,
            _ => 0.0,
        };
    }
    let (c, s) = half_angle_cos_sin(beta);
    let fact = float_factorials();
    let int = |h: HalfInt| h.as_int().expect("integer combination");
    let (jpmp, jmmp, jpm, jmm) = (int(j + mp), int(j - mp), int(j + m), int(j - m));
    let dm = int(mp - m);
    let norm = (fact[jpmp as usize] * fact[jmmp as usize]).sqrt()
        * (fact[jpm as usize] * fact[jmm as usize]).sqrt();
    let k_min = 0.max(-dm);
    let k_max = jpm.min(jmmp);
    let two_j = j.twice();
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = fact[(jpm - k) as usize]
            * fact[k as usize]
            * fact[(jmmp - k) as usize]
            * fact[(k + dm) as usize];
        let cos_pow = two_j + int(m - mp) - 2 * k;
        let sin_pow = 2 * k + dm;
        let sign = if (k + dm) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den * c.powi(cos_pow) * s.powi(sin_pow);
    }
    norm * sum
}

/// `cos(beta/2)`, `sin(beta/2)` with exact values at the identity and at `pi`.
fn half_angle_cos_sin(beta: f64) -> (f64, f64) {
    if beta == 0.0 {
        (1.0, 0.0)
    } else if beta == PI {
        (0.0, 1.0)
    } else {
        let h = 0.5 * beta;
        (h.cos(), h.sin())
    }
}

/// Wigner D element `e^{-i m' alpha} d^j_{m' m}(beta) e^{-i m gamma}`.
pub fn wigner_big_d(j: HalfInt, mp: HalfInt, m: HalfInt, r: &EulerAngles) -> Result<Complex64> {
    check_projection(j, mp)?;
    check_projection(j, m)?;
    Ok(big_d_unchecked(j, mp, m, r))
}

pub(crate) fn big_d_unchecked(j: HalfInt, mp: HalfInt, m: HalfInt, r: &EulerAngles) -> Complex64 {
    let d = small_d_unchecked(j, mp, m, r.beta);
    let phase = -(mp.value() * r.alpha + m.value() * r.gamma);
    Complex64::from_polar(d, phase)
}

/// Dense `(2j+1) x (2j+1)` matrix of `D^j(R)`, rows `m'` and columns `m`
/// both running from `-j` to `j`.
pub fn wigner_matrix(j: HalfInt, r: &EulerAngles) -> nalgebra::DMatrix<Complex64> {
    let n = j.dim();
    nalgebra::DMatrix::from_fn(n, n, |row, col| {
        let mp = HalfInt::from_twice(2 * row as i32 - j.twice());
        let m = HalfInt::from_twice(2 * col as i32 - j.twice());
        big_d_unchecked(j, mp, m, r)
    })
}

/// ZYZ Euler angles of an active rotation `Rz(alpha) Ry(beta) Rz(gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// Brings `beta` into `[0, pi]` and `alpha`, `gamma` into `[0, 2pi)`
    /// without changing the SO(3) rotation.
    pub fn normalized(self) -> Self {
        let mut beta = self.beta.rem_euclid(TAU);
        let (mut alpha, mut gamma) = (self.alpha, self.gamma);
        if beta > PI {
            beta = TAU - beta;
            alpha += PI;
            gamma -= PI;
        }
        Self {
            alpha: alpha.rem_euclid(TAU),
            beta,
            gamma: gamma.rem_euclid(TAU),
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }

    /// Euler angles of a proper orthogonal matrix.
    pub fn from_matrix(r: &Matrix3<f64>) -> Self {
        let cb = r[(2, 2)].clamp(-1.0, 1.0);
        let beta = cb.acos();
        let sb = beta.sin();
        let out = if sb > 1e-12 {
            Self {
                alpha: r[(1, 2)].atan2(r[(0, 2)]),
                beta,
                gamma: r[(2, 1)].atan2(-r[(2, 0)]),
            }
        } else if cb > 0.0 {
            Self {
                alpha: r[(1, 0)].atan2(r[(0, 0)]),
                beta: 0.0,
                gamma: 0.0,
            }
        } else {
            Self {
                alpha: (-r[(1, 0)]).atan2(-r[(0, 0)]),
                beta: PI,
                gamma: 0.0,
            }
        };
        out.normalized()
    }

    /// Rotation by `angle` about the unit vector `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = nalgebra::Unit::new_normalize(nalgebra::Vector3::from(axis));
        let r = nalgebra::Rotation3::from_axis_angle(&n, angle);
        Self::from_matrix(r.matrix())
    }

    /// The rotation `self * other` (`other` acts first).
    pub fn compose(&self, other: &EulerAngles) -> Self {
        Self::from_matrix(&(self.matrix() * other.matrix()))
    }

    pub fn inverse(&self) -> Self {
        Self::from_matrix(&self.matrix().transpose())
    }
}

pub(crate) fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub(crate) fn rot_y(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}
