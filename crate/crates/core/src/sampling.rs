//! Random states and rotations.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::angular::EulerAngles;
use crate::halfint::HalfInt;
use crate::spinstate::SpinState;

/// Haar-random rotation.
pub fn random_euler<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let alpha = rng.random::<f64>() * TAU;
    let gamma = rng.random::<f64>() * TAU;
    let cos_beta: f64 = rng.random_range(-1.0..=1.0);
    EulerAngles::new(alpha, cos_beta.acos(), gamma)
}

/// Unitarily invariant random pure state.
pub fn random_state<R: Rng + ?Sized>(s: HalfInt, rng: &mut R) -> SpinState {
    let amps = random_gaussian_vector(s.dim(), rng);
    SpinState::new_normalized(s, amps).expect("gaussian vector is nonzero")
}

pub(crate) fn random_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Uniform random point on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
