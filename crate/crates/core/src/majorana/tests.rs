use super::*;
use crate::multipole::cumulative_pure;
use crate::sampling::{random_euler, random_state};
use crate::spinstate::{basis_state, noon_state};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn polynomial_examples() {
    let top = state_to_polynomial(&basis_state(h(2), h(2)).unwrap());
    assert_eq!(top.coeffs(), &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let noon = state_to_polynomial(&noon_state(h(2)).unwrap());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (a, b) in noon
        .coeffs()
        .iter()
        .zip([c(-r, 0.0), c(0.0, 0.0), c(r, 0.0)])
    {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn coherent_polynomial_is_a_binomial_power() {
    let (theta, phi) = (1.0_f64, 2.0_f64);
    let spin = h(6);
    let p = state_to_polynomial(&coherent_state(spin, theta, phi).unwrap());
    let alpha = Complex64::from_polar((theta / 2.0).tan(), -phi);
    // (1 + alpha z)^{2S} up to an overall factor
    let ratio = p.coeffs()[0];
    let mut binom = 1.0;
    for (k, ck) in p.coeffs().iter().enumerate() {
        let expect = ratio * binom * alpha.powi(k as i32);
        assert!((ck - expect).norm() < 1e-13);
        binom = binom * (6 - k) as f64 / (k + 1) as f64;
    }
}

#[test]
fn lowest_weight_sits_on_the_north_pole() {
    for two_s in 1..=12 {
        let con = state_constellation(&basis_state(h(two_s), -h(two_s)).unwrap());
        assert_eq!(con.len(), two_s as usize);
        assert!(con.points().iter().all(|p| p.theta == 0.0));
    }
    let con = state_constellation(&basis_state(h(4), h(4)).unwrap());
    assert!(con.points().iter().all(|p| p.theta == PI));
}

#[test]
fn noon_examples() {
    let con = state_constellation(&noon_state(h(2)).unwrap());
    let mut phis: Vec<f64> = con.points().iter().map(|p| p.phi).collect();
    phis.sort_by(f64::total_cmp);
    assert!(con
        .points()
        .iter()
        .all(|p| (p.theta - PI / 2.0).abs() < 1e-12));
    assert!(phis[0].abs() < 1e-12 && (phis[1] - PI).abs() < 1e-12);
}

#[test]
fn noon_ring() {
    for two_s in 2..=20 {
        let spin = h(two_s);
        let con = state_constellation(&noon_state(spin).unwrap());
        assert_eq!(con.len(), two_s as usize);
        let mut phis: Vec<f64> = con.points().iter().map(|p| p.phi).collect();
        phis.sort_by(f64::total_cmp);
        for p in con.points() {
            assert!((p.theta - PI / 2.0).abs() < 1e-10);
        }
        let gap = TAU / two_s as f64;
        for w in phis.windows(2) {
            assert!((w[1] - w[0] - gap).abs() < 1e-9, "2S={two_s}");
        }
    }
}

#[test]
fn coherent_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for two_s in 1..=20 {
        for _ in 0..20 {
            let theta = rng.random::<f64>() * PI;
            let phi = rng.random::<f64>() * TAU;
            let target = SpherePoint::new(theta, phi);
            let con = state_constellation(&coherent_state(h(two_s), theta, phi).unwrap());
            assert_eq!(con.len(), two_s as usize);
            for p in con.points() {
                assert!(
                    p.angle_to(target) < 1e-8,
                    "2S={two_s} theta={theta} off by {}",
                    p.angle_to(target)
                );
            }
        }
    }
    let con = state_constellation(&coherent_state(h(6), 1.0, 2.0).unwrap());
    for p in con.points() {
        assert!((p.theta - 1.0).abs() < 1e-8 && (p.phi - 2.0).abs() < 1e-8);
    }
}

#[test]
fn roundtrip_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for two_s in 1..=20 {
        for _ in 0..50 {
            let st = random_state(h(two_s), &mut rng);
            let back = constellation_to_state(&state_constellation(&st));
            assert!(
                back.fidelity(&st) > 1.0 - 1e-9,
                "2S={two_s} {}",
                back.fidelity(&st)
            );
        }
    }
}

#[test]
fn equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for two_s in 1..=10 {
        let st = random_state(h(two_s), &mut rng);
        let con = state_constellation(&st);
        for _ in 0..5 {
            let r = random_euler(&mut rng);
            let moved = state_constellation(&rotate(&st, &r));
            let expect = con.rotated(&constellation_rotation(&r));
            assert!(moved.greedy_distance(&expect).unwrap() < 1e-7);
        }
    }
}

#[test]
fn state_rotation_inverts_constellation_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..20 {
        let r = random_euler(&mut rng);
        let m = constellation_rotation(&r);
        let back = constellation_rotation(&state_rotation_for(&m));
        assert!((back - m).amax() < 1e-12);
    }
}

#[test]
fn q_zeros_sit_at_antipodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for two_s in 1..=8 {
        let st = random_state(h(two_s), &mut rng);
        for p in state_constellation(&st).points() {
            let a = p.antipode();
            assert!(q_function(&st, a.theta, a.phi).unwrap() < 1e-15);
        }
    }
}

#[test]
fn q_function_examples() {
    let st = coherent_state(h(5), 0.8, 4.0).unwrap();
    assert!((q_function(&st, 0.8, 4.0).unwrap() - 1.0).abs() < 1e-14);
    assert!(q_function(&st, 4.0, 0.0).is_err());
}

#[test]
fn q_normalization_by_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for two_s in [1, 4, 9] {
        let st = random_state(h(two_s), &mut rng);
        let grid = q_grid(&st, 200, 400).unwrap();
        assert!((grid.normalization(st.spin()) - 1.0).abs() < 1e-3);
    }
}

#[test]
fn q_grid_shape_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let st = random_state(h(3), &mut rng);
    let grid = q_grid(&st, 7, 5).unwrap();
    assert_eq!(grid.values.len(), 7);
    assert!(grid.values.iter().all(|r| r.len() == 5));
    assert!(grid.max() <= 1.0 + 1e-12);
    assert!(q_grid(&st, 1, 5).is_err());
}

#[test]
fn rotated_grid_spot_check() {
    // rotating the state about z by alpha shifts the Q-function in phi by alpha
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    let st = random_state(h(4), &mut rng);
    let n_phi = 16;
    let shift = TAU / n_phi as f64 * 3.0;
    let moved = rotate(&st, &EulerAngles::new(shift, 0.0, 0.0));
    let a = q_grid(&st, 8, n_phi).unwrap();
    let b = q_grid(&moved, 8, n_phi).unwrap();
    for j in 0..8 {
        for k in 0..n_phi {
            let a_val = a.values[j][k];
            let b_val = b.values[j][(k + 3) % n_phi];
            assert!((a_val - b_val).abs() < 1e-2);
        }
    }
}

#[test]
fn inversion_of_tetrahedron() {
    let z: f64 = -1.0 / 3.0;
    let r = (1.0 - z * z).sqrt();
    let points: Vec<_> = std::iter::once(Vector3::new(0.0, 0.0, 1.0))
        .chain((0..3).map(|k| {
            let a = TAU * k as f64 / 3.0;
            Vector3::new(r * a.cos(), r * a.sin(), z)
        }))
        .collect();
    let st = constellation_to_state(&Constellation::from_vectors(&points).unwrap());
    assert!(cumulative_pure(&st, 2).unwrap() < 1e-12);
    assert!(cumulative_pure(&st, 3).unwrap() > 1e-3);
}

#[test]
fn match_finds_the_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    for two_s in [2, 5, 8, 13] {
        let a = state_constellation(&random_state(h(two_s), &mut rng));
        let r = random_euler(&mut rng);
        let b = a.rotated(&r.matrix());
        let found = constellation_match(&a, &b, 1e-6).unwrap();
        assert!(match_residual(&a, &b, &found).unwrap() < 1e-8);
    }
}

#[test]
fn match_rejects_unrelated_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let cube: Vec<_> = (0..8)
        .map(|i| {
            Vector3::new(
                if i & 1 == 0 { 1.0 } else { -1.0 },
                if i & 2 == 0 { 1.0 } else { -1.0 },
                if i & 4 == 0 { 1.0 } else { -1.0 },
            )
        })
        .collect();
    let cube = Constellation::from_vectors(&cube).unwrap();
    let random = state_constellation(&random_state(h(8), &mut rng));
    assert!(constellation_match(&cube, &random, 1e-6).is_none());
    let short = state_constellation(&random_state(h(4), &mut rng));
    assert!(constellation_match(&cube, &short, 1e-6).is_none());
}

#[test]
fn match_handles_collinear_sets() {
    let a = state_constellation(&coherent_state(h(4), 0.3, 0.2).unwrap());
    let b = state_constellation(&coherent_state(h(4), 2.0, 5.0).unwrap());
    let r = constellation_match(&a, &b, 1e-6).unwrap();
    assert!(match_residual(&a, &b, &r).unwrap() < 1e-6);
}

#[test]
fn json_roundtrip_and_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let con = state_constellation(&random_state(h(3), &mut rng));
    let text = serde_json::to_string(&con).unwrap();
    assert!(text.starts_with(r#"{"S":"3/2","points":[{"theta":"#));
    let back: Constellation = serde_json::from_str(&text).unwrap();
    assert_eq!(back, con);
    let bad = r#"{"S":"1","points":[{"theta":0.1,"phi":0.0}]}"#;
    assert!(serde_json::from_str::<Constellation>(bad).is_err());
    let bad = r#"{"S":"1/2","points":[{"theta":4.0,"phi":0.0}]}"#;
    assert!(serde_json::from_str::<Constellation>(bad).is_err());
}
