//! Majorana polynomial, stellar constellation and SU(2) Q-function.
//!
//! A root `z` of the polynomial maps to the sphere point
//! `theta = 2 atan(1/|z|)`, `phi = arg(-z)`; roots at infinity land on the
//! north pole `theta = 0` and the root `z = 0` on the south pole. With this
//! map the constellation of `coherent_state(S, theta, phi)` is `2S` copies of
//! `(theta, phi)`, and the zeros of the Q-function are the antipodes of the
//! constellation points.
//!
//! The map is a mirror image of the Bloch-sphere picture, so `rotate(psi, R)`
//! moves the constellation by [`constellation_rotation`]`(R)` rather than by
//! `R` itself.

mod roots;

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::EulerAngles;
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::spinstate::{coherent_state, rotate, sqrt_binomials, SpinState};

/// Reconstruction fidelity below which the constellation is recomputed in
/// rotated charts.
const CHART_TARGET: f64 = 1.0 - 1e-12;

/// Points closer than this to a pole are recomputed in a chart whose poles
/// avoid the constellation.
const POLAR_CAP: f64 = 0.3;

/// `sum_k c_k z^k` with `c_{S+m} = sqrt(C(2S, S+m)) psi_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaPolynomial {
    coeffs: Vec<Complex64>,
}

impl MajoranaPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Invalid(
                "polynomial needs nominal degree 2S >= 1".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn spin(&self) -> HalfInt {
        HalfInt::from_twice(self.coeffs.len() as i32 - 1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Inverts the binomial weights and normalizes.
    pub fn to_state(&self) -> Result<SpinState> {
        let amps = self
            .coeffs
            .iter()
            .zip(sqrt_binomials(self.spin()))
            .map(|(c, b)| c / b)
            .collect();
        SpinState::new_normalized(self.spin(), amps)
    }
}

pub fn state_to_polynomial(state: &SpinState) -> MajoranaPolynomial {
    let coeffs = state
        .amps()
        .iter()
        .zip(sqrt_binomials(state.spin()))
        .map(|(a, b)| a * b)
        .collect();
    MajoranaPolynomial { coeffs }
}

/// A point on the unit sphere, `theta` in `[0, pi]`, `phi` in `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta,
            phi: phi.rem_euclid(TAU),
        }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let u = v.normalize();
        let theta = u.z.clamp(-1.0, 1.0).acos();
        let phi = if u.x == 0.0 && u.y == 0.0 {
            0.0
        } else {
            u.y.atan2(u.x)
        };
        Self::new(theta, phi)
    }

    pub fn antipode(self) -> Self {
        Self::new(PI - self.theta, self.phi + PI)
    }

    /// Great-circle distance.
    pub fn angle_to(self, other: SpherePoint) -> f64 {
        let (a, b) = (self.to_vector(), other.to_vector());
        a.cross(&b).norm().atan2(a.dot(&b))
    }

    fn from_root(z: Complex64) -> Self {
        if z.norm() == 0.0 {
            return Self::new(PI, 0.0);
        }
        Self::new(2.0 * (1.0 / z.norm()).atan(), (-z).arg())
    }
}

/// Multiset of `2S` sphere points.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    points: Vec<SpherePoint>,
}

impl Constellation {
    pub fn new(points: Vec<SpherePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid(
                "constellation needs at least one point".into(),
            ));
        }
        if points
            .iter()
            .any(|p| !(p.theta.is_finite() && p.phi.is_finite()))
        {
            return Err(Error::Invalid("non-finite constellation point".into()));
        }
        Ok(Self {
            points: points
                .into_iter()
                .map(|p| SpherePoint::new(p.theta, p.phi))
                .collect(),
        })
    }

    /// Points given as (not necessarily unit) Cartesian vectors.
    pub fn from_vectors(vs: &[Vector3<f64>]) -> Result<Self> {
        Self::new(vs.iter().map(SpherePoint::from_vector).collect())
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spin(&self) -> HalfInt {
        HalfInt::from_twice(self.points.len() as i32)
    }

    pub fn vectors(&self) -> Vec<Vector3<f64>> {
        self.points.iter().map(|p| p.to_vector()).collect()
    }

    /// Applies the proper rotation `r` to every point.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Constellation {
        let points = self
            .points
            .iter()
            .map(|p| SpherePoint::from_vector(&(r * p.to_vector())))
            .collect();
        Constellation { points }
    }

    /// Greedy multiset distance: each point of `self` in turn claims the
    /// nearest unclaimed point of `other`. Returns the largest claimed angle.
    pub fn greedy_distance(&self, other: &Constellation) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        Some(
            greedy_assignment(&self.vectors(), &other.vectors(), f64::INFINITY).expect("no cutoff"),
        )
    }
}

/// The rotation that `rotate(psi, r)` induces on constellations:
/// `Rz(alpha) Ry(-beta) Rz(gamma)`.
pub fn constellation_rotation(r: &EulerAngles) -> Matrix3<f64> {
    EulerAngles::new(r.alpha, -r.beta, r.gamma).matrix()
}

/// Euler angles `r` with `constellation_rotation(r) == m`.
pub fn state_rotation_for(m: &Matrix3<f64>) -> EulerAngles {
    let e = EulerAngles::from_matrix(m);
    EulerAngles::new(e.alpha, -e.beta, e.gamma)
}

/// Constellation in the standard chart, and whether it is trustworthy there.
fn constellation_in_chart(p: &MajoranaPolynomial) -> Result<(Constellation, bool)> {
    let set = roots::find_roots(&p.coeffs)?;
    let mut points = vec![SpherePoint::new(0.0, 0.0); set.at_infinity];
    points.extend(set.finite.into_iter().map(SpherePoint::from_root));
    let near_pole = points.iter().any(|q| {
        (q.theta > 0.0 && q.theta < POLAR_CAP) || (q.theta < PI && q.theta > PI - POLAR_CAP)
    });
    Ok((Constellation { points }, set.exact_trim && !near_pole))
}

/// Among a fixed lattice of directions, the one farthest from every point
/// and every antipode.
fn clear_axis(c: &Constellation) -> Vector3<f64> {
    let n = 64;
    let golden = PI * (3.0 - 5f64.sqrt());
    let vs = c.vectors();
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            Vector3::new(r * a.cos(), r * a.sin(), z)
        })
        .max_by(|a, b| {
            let clearance = |u: &Vector3<f64>| {
                vs.iter()
                    .map(|v| 1.0 - u.dot(v).abs())
                    .fold(f64::INFINITY, f64::min)
            };
            clearance(a).total_cmp(&clearance(b))
        })
        .expect("lattice is nonempty")
}

/// Constellation of `state` computed after moving the constellation by `m`.
fn constellation_via(state: &SpinState, m: &Matrix3<f64>) -> Result<Constellation> {
    let moved = rotate(state, &state_rotation_for(m));
    let (found, _) = constellation_in_chart(&state_to_polynomial(&moved))?;
    Ok(found.rotated(&m.transpose()))
}

fn charts() -> [EulerAngles; 4] {
    [
        EulerAngles::new(0.0, PI / 2.0, 0.0),
        EulerAngles::new(PI / 2.0, PI / 2.0, 0.0),
        EulerAngles::new(0.7, 1.1, 0.3),
        EulerAngles::new(2.1, 2.3, -0.9),
    ]
}

/// All `2S` roots with multiplicity, mapped onto the sphere.
pub fn polynomial_to_constellation(p: &MajoranaPolynomial) -> Result<Constellation> {
    let state = p.to_state()?;
    let (mut best, trusted) = constellation_in_chart(p)?;
    if !trusted {
        let axis = clear_axis(&best);
        best = constellation_via(&state, &align(&axis, &Vector3::z()))?;
    }
    let mut best_fid = constellation_to_state(&best).fidelity(&state);
    if best_fid >= CHART_TARGET {
        return Ok(best);
    }
    for chart in charts() {
        let back = constellation_via(&state, &constellation_rotation(&chart))?;
        let fid = constellation_to_state(&back).fidelity(&state);
        if fid > best_fid {
            best = back;
            best_fid = fid;
            if fid >= CHART_TARGET {
                break;
            }
        }
    }
    Ok(best)
}

pub fn state_constellation(state: &SpinState) -> Constellation {
    polynomial_to_constellation(&state_to_polynomial(state)).expect("normalized state is nonzero")
}

/// Expands `prod_i (sin(theta_i/2) z + cos(theta_i/2) e^{i phi_i})` and
/// divides out the binomial weights.
pub fn constellation_to_state(c: &Constellation) -> SpinState {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for p in &c.points {
        let (ch, sh) = crate::spinstate::half_angle(p.theta);
        let a = Complex64::new(sh, 0.0);
        let b = Complex64::from_polar(ch, p.phi);
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, x) in coeffs.iter().enumerate() {
            next[k] += x * b;
            next[k + 1] += x * a;
        }
        coeffs = next;
    }
    MajoranaPolynomial { coeffs }
        .to_state()
        .expect("product of unit-norm factors is nonzero")
}

/// `|<theta, phi|psi>|^2`.
pub fn q_function(state: &SpinState, theta: f64, phi: f64) -> Result<f64> {
    let coh = coherent_state(state.spin(), theta, phi)?;
    Ok(coh.inner(state).norm_sqr())
}

/// Q-function sampled at `theta_j = pi (j + 1/2) / n_theta`, `phi_k = 2 pi k / n_phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// `values[j][k]` at `(thetas[j], phis[k])`.
    pub values: Vec<Vec<f64>>,
}

impl QGrid {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(2S+1)/(4 pi) * integral of Q` by the midpoint rule in `theta`.
    pub fn normalization(&self, spin: HalfInt) -> f64 {
        let dt = PI / self.thetas.len() as f64;
        let dp = TAU / self.phis.len() as f64;
        let integral: f64 = self
            .thetas
            .iter()
            .zip(&self.values)
            .map(|(t, row)| t.sin() * row.iter().sum::<f64>())
            .sum::<f64>()
            * dt
            * dp;
        spin.dim() as f64 / (4.0 * PI) * integral
    }
}

pub fn q_grid(state: &SpinState, n_theta: usize, n_phi: usize) -> Result<QGrid> {
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::Invalid(format!(
            "grid {n_theta}x{n_phi} is smaller than 2x2"
        )));
    }
    let thetas: Vec<f64> = (0..n_theta)
        .map(|j| PI * (j as f64 + 0.5) / n_theta as f64)
        .collect();
    let phis: Vec<f64> = (0..n_phi).map(|k| TAU * k as f64 / n_phi as f64).collect();
    let values = thetas
        .par_iter()
        .map(|&t| {
            phis.iter()
                .map(|&p| q_function(state, t, p).expect("theta in range"))
                .collect()
        })
        .collect();
    Ok(QGrid {
        thetas,
        phis,
        values,
    })
}

/// Greedy nearest assignment of `a` (rotated already) onto `b`; `None` as
/// soon as some point has no partner within `tol`.
fn greedy_assignment(a: &[Vector3<f64>], b: &[Vector3<f64>], tol: f64) -> Option<f64> {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for u in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, v)| (j, u.cross(v).norm().atan2(u.dot(v))))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        if d > tol {
            return None;
        }
        used[j] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

fn frame(u: &Vector3<f64>, v: &Vector3<f64>) -> Option<Matrix3<f64>> {
    let w = v - u * u.dot(v);
    let n = w.norm();
    if n < 1e-9 {
        return None;
    }
    let w = w / n;
    Some(Matrix3::from_columns(&[*u, w, u.cross(&w)]))
}

/// Shortest rotation taking unit `u` to unit `v`.
fn align(u: &Vector3<f64>, v: &Vector3<f64>) -> Matrix3<f64> {
    nalgebra::Rotation3::rotation_between(u, v)
        .unwrap_or_else(|| {
            // antiparallel: half turn about any axis orthogonal to u
            let helper = if u.x.abs() < 0.9 {
                Vector3::x()
            } else {
                Vector3::y()
            };
            let axis = nalgebra::Unit::new_normalize(u.cross(&helper));
            nalgebra::Rotation3::from_axis_angle(&axis, PI)
        })
        .into_inner()
}

/// A rotation `R` with `R a = b` as multisets, each point within angle `tol`.
///
/// Candidate rotations align an anchor pair of `a` with every pair of `b`
/// at a matching separation; the first candidate that passes greedy
/// assignment wins. When all points of `a` are collinear, the anchor is
/// aligned by the shortest rotation instead.
pub fn constellation_match(a: &Constellation, b: &Constellation, tol: f64) -> Option<EulerAngles> {
    if a.len() != b.len() {
        return None;
    }
    let (va, vb) = (a.vectors(), b.vectors());
    let u0 = va[0];
    let partner = (1..va.len())
        .max_by(|&i, &j| u0.cross(&va[i]).norm().total_cmp(&u0.cross(&va[j]).norm()))
        .filter(|&i| u0.cross(&va[i]).norm() > 1e-6);
    let slack = 2.0 * tol + 1e-12;
    for (j, w0) in vb.iter().enumerate() {
        match partner {
            None => {
                let r = align(&u0, w0);
                let rotated: Vec<_> = va.iter().map(|u| r * u).collect();
                if greedy_assignment(&rotated, &vb, tol).is_some() {
                    return Some(EulerAngles::from_matrix(&r));
                }
            }
            Some(i) => {
                let u1 = va[i];
                let fa = frame(&u0, &u1).expect("partner is not collinear");
                let target = u0.dot(&u1);
                for (k, w1) in vb.iter().enumerate() {
                    if k == j || (w0.dot(w1) - target).abs() > slack {
                        continue;
                    }
                    let Some(fb) = frame(w0, w1) else { continue };
                    let r = fb * fa.transpose();
                    let rotated: Vec<_> = va.iter().map(|u| r * u).collect();
                    if greedy_assignment(&rotated, &vb, tol).is_some() {
                        return Some(EulerAngles::from_matrix(&r));
                    }
                }
            }
        }
    }
    None
}

/// Largest point displacement after rotating `a` by `r` and matching onto `b`.
pub fn match_residual(a: &Constellation, b: &Constellation, r: &EulerAngles) -> Option<f64> {
    a.rotated(&r.matrix()).greedy_distance(b)
}

#[derive(Serialize, Deserialize)]
struct ConstellationRecord {
    #[serde(rename = "S")]
    spin: HalfInt,
    points: Vec<SpherePoint>,
}

impl Serialize for Constellation {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ConstellationRecord {
            spin: self.spin(),
            points: self.points.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Constellation {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = ConstellationRecord::deserialize(deserializer)?;
        if rec.spin.twice() as usize != rec.points.len() {
            return Err(D::Error::custom(format!(
                "S = {} needs {} points, got {}",
                rec.spin,
                rec.spin.twice(),
                rec.points.len()
            )));
        }
        for p in &rec.points {
            if !(0.0..=PI).contains(&p.theta) {
                return Err(D::Error::custom(format!(
                    "theta = {} outside [0, pi]",
                    p.theta
                )));
            }
        }
        Constellation::new(rec.points).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests;
