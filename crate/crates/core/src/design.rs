//! Spherical t-design certification by harmonic moments.
//!
//! A point set is a t-design when `sum_i Y_l^m(p_i) = 0` for every
//! `1 <= l <= t` and `|m| <= l`. Polynomial averaging is available as an
//! independent witness.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorana::{Constellation, SpherePoint};

pub const DEFAULT_EPS: f64 = 1e-8;

/// `Y_l^m` for all `l <= l_max`, flattened at index `l^2 + l + m`.
pub fn spherical_harmonics_upto(l_max: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let (s, x) = theta.sin_cos();
    let mut out = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)];
    // normalized associated Legendre values for m >= 0, Condon-Shortley phase
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= -s * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        let phase = Complex64::from_polar(1.0, m as f64 * phi);
        let mut prev2 = 0.0;
        let mut prev = pmm;
        for l in m..=l_max {
            let p = if l == m {
                pmm
            } else {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let p = a * (x * prev - b * prev2);
                prev2 = prev;
                prev = p;
                p
            };
            let y = phase * p;
            out[l * l + l + m] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[l * l + l - m] = y.conj() * sign;
            }
        }
    }
    out
}

/// Orthonormal `Y_l^m(theta, phi)` with the Condon-Shortley phase.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Invalid(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    let index = (l * l + l) as i64 + m;
    Ok(spherical_harmonics_upto(l, theta, phi)[index as usize])
}

/// `max_m |sum_i Y_l^m(p_i)| / N` for `l = 1..=l_max`.
pub fn moment_residuals(c: &Constellation, l_max: usize) -> Vec<f64> {
    let n = c.len() as f64;
    let mut sums = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)];
    for p in c.points() {
        for (acc, y) in sums
            .iter_mut()
            .zip(spherical_harmonics_upto(l_max, p.theta, p.phi))
        {
            *acc += y;
        }
    }
    (1..=l_max)
        .map(|l| {
            (l * l..(l + 1) * (l + 1))
                .map(|i| sums[i].norm())
                .fold(0.0, f64::max)
                / n
        })
        .collect()
}

/// Largest `t <= t_max` whose harmonic moments all lie below `eps` (per point).
pub fn design_order(c: &Constellation, t_max: usize, eps: f64) -> usize {
    moment_residuals(c, t_max)
        .iter()
        .take_while(|&&r| r < eps)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentResidual {
    pub l: usize,
    pub max_abs_moment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub points: usize,
    pub design_order: usize,
    pub residuals: Vec<MomentResidual>,
}

pub fn design_report(c: &Constellation, t_max: usize, eps: f64) -> DesignReport {
    let residuals = moment_residuals(c, t_max);
    DesignReport {
        points: c.len(),
        design_order: residuals.iter().take_while(|&&r| r < eps).count(),
        residuals: residuals
            .into_iter()
            .enumerate()
            .map(|(i, r)| MomentResidual {
                l: i + 1,
                max_abs_moment: r,
            })
            .collect(),
    }
}

fn double_factorial(n: i64) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

/// Average of `x^a y^b z^c` over the unit sphere.
pub fn sphere_monomial_average(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let (a, b, c) = (a as i64, b as i64, c as i64);
    double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1)
        / double_factorial(a + b + c + 1)
}

fn monomials(degree: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for d in 0..=degree {
        for a in 0..=d {
            for b in 0..=d - a {
                out.push((a, b, d - a - b));
            }
        }
    }
    out
}

/// Largest `|point average - sphere average|` over `trials` polynomials of
/// total degree `<= degree` with standard normal coefficients.
pub fn polynomial_average_check(c: &Constellation, degree: u32, trials: usize, seed: u64) -> f64 {
    let terms = monomials(degree);
    let vs = c.vectors();
    let n = vs.len() as f64;
    let point_avg: Vec<f64> = terms
        .iter()
        .map(|&(a, b, e)| {
            vs.iter()
                .map(|v| v.x.powi(a as i32) * v.y.powi(b as i32) * v.z.powi(e as i32))
                .sum::<f64>()
                / n
        })
        .collect();
    let sphere_avg: Vec<f64> = terms
        .iter()
        .map(|&(a, b, e)| sphere_monomial_average(a, b, e))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            terms
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    w * (point_avg[i] - sphere_avg[i])
                })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

fn from_vectors(vs: &[[f64; 3]]) -> Constellation {
    let vs: Vec<_> = vs.iter().map(|v| Vector3::from(*v)).collect();
    Constellation::from_vectors(&vs).expect("nonempty vertex list")
}

/// Regular tetrahedron with one vertex on the north pole.
pub fn tetrahedron() -> Constellation {
    let z = -1.0 / 3.0;
    let theta = f64::acos(z);
    let mut points = vec![SpherePoint::new(0.0, 0.0)];
    points.extend((0..3).map(|k| SpherePoint::new(theta, 2.0 * PI * k as f64 / 3.0)));
    Constellation::new(points).expect("four points")
}

pub fn octahedron() -> Constellation {
    from_vectors(&[
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ])
}

pub fn cube() -> Constellation {
    let vs: Vec<[f64; 3]> = (0..8)
        .map(|i| {
            let s = |bit: i32| if i & bit == 0 { 1.0 } else { -1.0 };
            [s(1), s(2), s(4)]
        })
        .collect();
    from_vectors(&vs)
}

fn cyclic(v: [f64; 3]) -> [[f64; 3]; 3] {
    [v, [v[2], v[0], v[1]], [v[1], v[2], v[0]]]
}

pub fn icosahedron() -> Constellation {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vs = Vec::new();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            vs.extend(cyclic([0.0, s1, s2 * g]));
        }
    }
    from_vectors(&vs)
}

pub fn dodecahedron() -> Constellation {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vs: Vec<[f64; 3]> = (0..8)
        .map(|i| {
            let s = |bit: i32| if i & bit == 0 { 1.0 } else { -1.0 };
            [s(1), s(2), s(4)]
        })
        .collect();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            vs.extend(cyclic([0.0, s1 / g, s2 * g]));
        }
    }
    from_vectors(&vs)
}
