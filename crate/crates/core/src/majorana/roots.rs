//! Roots of complex polynomials of modest degree, with multiplicities.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients smaller than this fraction of the largest one count as zero
/// when trimming the ends of the coefficient vector.
pub(crate) const DEFICIENCY_THRESHOLD: f64 = 1e-14;

const MERGE_RADII: [f64; 9] = [1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3];

/// Roots of `sum_k c_k z^k` counted against the nominal degree `c.len() - 1`.
#[derive(Clone, Debug)]
pub(crate) struct RootSet {
    /// Finite roots with multiplicity; exact zeros included.
    pub finite: Vec<Complex64>,
    /// Nominal degree minus the numerical degree.
    pub at_infinity: usize,
    /// Whether every trimmed coefficient was exactly zero.
    pub exact_trim: bool,
}

pub(crate) fn find_roots(coeffs: &[Complex64]) -> Result<RootSet> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroState);
    }
    let cut = DEFICIENCY_THRESHOLD * scale;
    let hi = coeffs
        .iter()
        .rposition(|c| c.norm() >= cut)
        .expect("some coefficient is nonzero");
    let lo = coeffs
        .iter()
        .position(|c| c.norm() >= cut)
        .expect("some coefficient is nonzero");
    let at_infinity = coeffs.len() - 1 - hi;
    let exact_trim = coeffs[..lo]
        .iter()
        .chain(&coeffs[hi + 1..])
        .all(|c| c.norm() == 0.0);
    let mut finite = vec![Complex64::new(0.0, 0.0); lo];
    let core = &coeffs[lo..=hi];
    let degree = core.len() - 1;
    if degree == 0 {
        return Ok(RootSet {
            finite,
            at_infinity,
            exact_trim,
        });
    }

    // z = s w equalizes the outer coefficients of the scaled polynomial
    let s = (core[0].norm() / core[degree].norm()).powf(1.0 / degree as f64);
    let q: Vec<Complex64> = core
        .iter()
        .enumerate()
        .map(|(k, c)| c * s.powi(k as i32))
        .collect();

    let roots = merge_clusters(&q, companion_eigenvalues(&q));
    let roots = polish_isolated(&q, &roots);
    finite.extend(roots.into_iter().map(|w| w * s));
    Ok(RootSet {
        finite,
        at_infinity,
        exact_trim,
    })
}

fn companion_eigenvalues(q: &[Complex64]) -> Vec<Complex64> {
    let n = q.len() - 1;
    let lead = q[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -q[i] / lead;
    }
    let limit = 200 * n;
    if let Some(schur) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, limit) {
        return triangular_eigenvalues(schur);
    }
    // Shifted QR can cycle on companion matrices of z^n - c. A fixed unitary
    // similarity breaks the cyclic Hessenberg structure.
    for seed in 1..=8 {
        let u = deterministic_unitary(n, seed as f64);
        let conjugated = &u * &m * u.adjoint();
        if let Some(schur) = nalgebra::Schur::try_new(conjugated, f64::EPSILON, limit) {
            return triangular_eigenvalues(schur);
        }
    }
    triangular_eigenvalues(nalgebra::Schur::new(m))
}

fn triangular_eigenvalues(schur: nalgebra::Schur<Complex64, nalgebra::Dyn>) -> Vec<Complex64> {
    schur
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

fn deterministic_unitary(n: usize, seed: f64) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |i, j| {
        let t = seed * (1.0 + i as f64) + 0.618_033_988_75 * (1.0 + j as f64) * (2.0 + seed);
        Complex64::new((7.1 * t).sin(), (3.7 * t + 0.5 * seed).cos())
    });
    a.qr().q()
}

fn horner(q: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in q.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// One Newton step per root, kept only if it lowers `|q|` and moves the
/// root by less than a tenth of the gap to its nearest neighbour.
fn polish_isolated(q: &[Complex64], roots: &[Complex64]) -> Vec<Complex64> {
    roots
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let gap = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| (r - z).norm())
                .fold(f64::INFINITY, f64::min);
            let (p, dp) = horner(q, z);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                return z;
            }
            let step = p / dp;
            let candidate = z - step;
            let improves = candidate.is_finite() && horner(q, candidate).0.norm() < p.norm();
            if improves && step.norm() < 0.1 * gap {
                candidate
            } else {
                z
            }
        })
        .collect()
}

/// Relative coefficient mismatch between `q` and `q_n prod (w - r_i)`.
fn backward_error(q: &[Complex64], roots: &[Complex64]) -> f64 {
    let mut expanded = vec![Complex64::new(0.0, 0.0); roots.len() + 1];
    expanded[0] = q[q.len() - 1];
    for (d, r) in roots.iter().enumerate() {
        for k in (1..=d + 1).rev() {
            expanded[k] = expanded[k] - expanded[k - 1] * r;
        }
    }
    // expanded holds coefficients highest-first
    let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    q.iter()
        .rev()
        .zip(&expanded)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale
}

fn chordal(a: Complex64, b: Complex64) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

fn clusters(roots: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if chordal(roots[i], roots[j]) < radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut label, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Replaces numerically split multiple roots by their centroid whenever the
/// coalesced factorization still reproduces the coefficients.
fn merge_clusters(q: &[Complex64], mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let bound = (10.0 * backward_error(q, &roots)).max(1e-10);
    for radius in MERGE_RADII {
        for group in clusters(&roots, radius) {
            if group.len() < 2 || group.iter().all(|&i| roots[i] == roots[group[0]]) {
                continue;
            }
            let centroid = group.iter().map(|&i| roots[i]).sum::<Complex64>() / group.len() as f64;
            let mut candidate = roots.clone();
            for &i in &group {
                candidate[i] = centroid;
            }
            if backward_error(q, &candidate) <= bound {
                roots = candidate;
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn expand(roots: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![c(0.0, 0.0); out.len() + 1];
            for (k, a) in out.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            out = next;
        }
        out
    }

    #[test]
    fn simple_roots() {
        let roots = [c(1.0, 0.0), c(-2.0, 0.5), c(0.3, -0.7)];
        let found = find_roots(&expand(&roots)).unwrap();
        assert_eq!(found.at_infinity, 0);
        for r in roots {
            assert!(found.finite.iter().any(|f| (f - r).norm() < 1e-13));
        }
    }

    #[test]
    fn deficiency_and_zeros() {
        let mut coeffs = vec![c(0.0, 0.0), c(0.0, 0.0)];
        coeffs.extend(expand(&[c(2.0, 1.0)]));
        coeffs.push(c(0.0, 0.0));
        let found = find_roots(&coeffs).unwrap();
        assert_eq!(found.at_infinity, 1);
        assert_eq!(found.finite.len(), 3);
        assert_eq!(found.finite.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(find_roots(&[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn multiple_root_is_merged() {
        for k in 2..=20 {
            let a = c(0.6, -1.3);
            let found = find_roots(&expand(&vec![a; k])).unwrap();
            for f in &found.finite {
                assert!((f - a).norm() < 1e-9, "k={k} {f}");
            }
        }
    }

    #[test]
    fn close_distinct_roots_stay_apart() {
        let roots = [c(1.0, 0.0), c(1.001, 0.0), c(-1.0, 0.0)];
        let found = find_roots(&expand(&roots)).unwrap();
        for r in roots {
            assert!(found.finite.iter().any(|f| (f - r).norm() < 1e-10));
        }
    }
}
