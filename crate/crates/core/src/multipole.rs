//! State multipoles, the cumulative distribution `A_M` and its maximum.
//!
//! `A_M = sum_{K=1..M} sum_q |rho_Kq|^2` can be evaluated along three
//! independent routes, each registered as a [`CumulativeRoute`]:
//!
//! * `spectrum`: build the tensor operators as matrices, take traces;
//! * `double-sum`: the closed CG double sum over amplitude pairs;
//! * `projector`: couple `|psi>|tilde psi>` into total spin `K` and measure
//!   the weight in each irreducible block.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::angular::{big_factorial, clebsch_gordan};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::spinstate::{index_of, projection_at, OperatorMatrix, SpinState};

/// CG coefficients `C^{S m'}_{S m, K q}` of one multipole shell, grouped by `q`.
#[derive(Debug)]
pub(crate) struct TensorShell {
    /// `by_q[q + K]` lists `(index of m, index of m', C)` with `m' = m + q`.
    pub(crate) by_q: Vec<Vec<(usize, usize, f64)>>,
}

/// CG coefficients `C^{K Q}_{S m, S m'}` coupling two copies of spin S.
#[derive(Debug)]
struct CoupledShell {
    /// `by_q[Q + K]` lists `(index of m, index of m', C)` with `m + m' = Q`.
    by_q: Vec<Vec<(usize, usize, f64)>>,
}

type ShellKey = (i32, i64);

pub(crate) fn tensor_shell(spin: HalfInt, k: i64) -> Arc<TensorShell> {
    static CACHE: OnceLock<RwLock<HashMap<ShellKey, Arc<TensorShell>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (spin.twice(), k);
    if let Some(shell) = cache.read().expect("cache lock").get(&key) {
        return shell.clone();
    }
    let kk = HalfInt::from_int(k as i32);
    let by_q = (-k..=k)
        .map(|q| {
            let qh = HalfInt::from_int(q as i32);
            spin.projections()
                .filter_map(|m| {
                    let mp = m + qh;
                    let j = index_of(spin, mp)?;
                    let c = clebsch_gordan(spin, m, kk, qh, spin, mp).expect("valid projections");
                    (c != 0.0).then(|| (index_of(spin, m).expect("in range"), j, c))
                })
                .collect()
        })
        .collect();
    let shell = Arc::new(TensorShell { by_q });
    cache
        .write()
        .expect("cache lock")
        .insert(key, shell.clone());
    shell
}

fn coupled_shell(spin: HalfInt, k: i64) -> Arc<CoupledShell> {
    static CACHE: OnceLock<RwLock<HashMap<ShellKey, Arc<CoupledShell>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (spin.twice(), k);
    if let Some(shell) = cache.read().expect("cache lock").get(&key) {
        return shell.clone();
    }
    let kk = HalfInt::from_int(k as i32);
    let by_q = (-k..=k)
        .map(|q| {
            let qh = HalfInt::from_int(q as i32);
            spin.projections()
                .filter_map(|m| {
                    let mp = qh - m;
                    let j = index_of(spin, mp)?;
                    let c = clebsch_gordan(spin, m, spin, mp, kk, qh).expect("valid projections");
                    (c != 0.0).then(|| (index_of(spin, m).expect("in range"), j, c))
                })
                .collect()
        })
        .collect();
    let shell = Arc::new(CoupledShell { by_q });
    cache
        .write()
        .expect("cache lock")
        .insert(key, shell.clone());
    shell
}

fn check_tensor_index(spin: HalfInt, k: i64, q: i64) -> Result<()> {
    if k < 0 || k > spin.twice() as i64 || q.abs() > k {
        return Err(Error::TensorIndex { s: spin, k, q });
    }
    Ok(())
}

pub(crate) fn check_order(spin: HalfInt, order: i64) -> Result<()> {
    let max = spin.twice() as i64;
    if order < 1 || order > max {
        return Err(Error::Order { order, max });
    }
    Ok(())
}

/// `T_Kq` with entries `sqrt((2K+1)/(2S+1)) C^{S m'}_{S m, K q}` at `(m', m)`.
pub fn tensor_operator(spin: HalfInt, k: i64, q: i64) -> Result<OperatorMatrix> {
    if spin.twice() < 1 {
        return Err(Error::Spin(spin));
    }
    check_tensor_index(spin, k, q)?;
    let n = spin.dim();
    let scale = ((2 * k + 1) as f64 / n as f64).sqrt();
    let mut matrix = DMatrix::zeros(n, n);
    for &(i, j, c) in &tensor_shell(spin, k).by_q[(q + k) as usize] {
        matrix[(j, i)] = Complex64::new(scale * c, 0.0);
    }
    Ok(OperatorMatrix { spin, matrix })
}

/// Multipoles `rho_Kq` for `K = 0..2S`, stored densely shell by shell.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleSpectrum {
    spin: HalfInt,
    shells: Vec<Vec<Complex64>>,
}

impl MultipoleSpectrum {
    pub fn spin(&self) -> HalfInt {
        self.spin
    }

    pub fn max_order(&self) -> i64 {
        self.shells.len() as i64 - 1
    }

    pub fn get(&self, k: i64, q: i64) -> Option<Complex64> {
        if k < 0 || q.abs() > k {
            return None;
        }
        self.shells.get(k as usize).map(|s| s[(q + k) as usize])
    }

    /// `sum_q |rho_Kq|^2` for a single order `K`.
    pub fn shell_weight(&self, k: i64) -> f64 {
        self.shells
            .get(k as usize)
            .map_or(0.0, |s| s.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `sum_{K,q} |rho_Kq|^2`, equal to `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        (0..self.shells.len() as i64)
            .map(|k| self.shell_weight(k))
            .sum()
    }

    /// `sum_{Kq} rho_Kq T_Kq`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.spin.dim();
        let mut out = DMatrix::zeros(n, n);
        for (k, shell) in self.shells.iter().enumerate() {
            let k = k as i64;
            for (qi, rho) in shell.iter().enumerate() {
                let t = tensor_operator(self.spin, k, qi as i64 - k).expect("index in range");
                out += t.matrix * *rho;
            }
        }
        out
    }

    /// `(K, q, rho_Kq)` in order of increasing `K`, then `q`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        self.shells.iter().enumerate().flat_map(|(k, shell)| {
            let k = k as i64;
            shell
                .iter()
                .enumerate()
                .map(move |(qi, z)| (k, qi as i64 - k, *z))
        })
    }
}

/// `rho_Kq = <psi| T_Kq^dagger |psi>` for every `K, q`.
pub fn multipoles(state: &SpinState) -> MultipoleSpectrum {
    multipoles_of_density(state.spin(), &state.density_matrix()).expect("dimensions match")
}

/// `rho_Kq = Tr[rho T_Kq^dagger]` for an arbitrary density matrix.
pub fn multipoles_of_density(spin: HalfInt, rho: &DMatrix<Complex64>) -> Result<MultipoleSpectrum> {
    let n = spin.dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::Length {
            expected: n,
            got: rho.nrows(),
        });
    }
    let shells = (0..=spin.twice() as i64)
        .map(|k| {
            (-k..=k)
                .map(|q| {
                    let t = tensor_operator(spin, k, q).expect("index in range");
                    (rho * t.matrix.adjoint()).trace()
                })
                .collect()
        })
        .collect();
    Ok(MultipoleSpectrum { spin, shells })
}

/// `A_M` from a precomputed spectrum.
pub fn cumulative(spectrum: &MultipoleSpectrum, order: i64) -> Result<f64> {
    check_order(spectrum.spin, order)?;
    Ok((1..=order).map(|k| spectrum.shell_weight(k)).sum())
}

/// `A_M` from the amplitude double sum
/// `sum_{K,q} (2K+1)/(2S+1) |sum_m C^{S,m+q}_{S m, K q} psi_{m+q} psi_m^*|^2`.
pub fn cumulative_pure(state: &SpinState, order: i64) -> Result<f64> {
    let spin = state.spin();
    check_order(spin, order)?;
    let amps = state.amps();
    let n = spin.dim() as f64;
    let mut total = 0.0;
    for k in 1..=order {
        let shell = tensor_shell(spin, k);
        let weight = (2 * k + 1) as f64 / n;
        let shell_sum: f64 = shell
            .by_q
            .iter()
            .map(|entries| {
                entries
                    .iter()
                    .map(|&(i, j, c)| amps[j] * amps[i].conj() * c)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum();
        total += weight * shell_sum;
    }
    Ok(total)
}

/// `(-1)^m psi^*_{-m}` (integer S) or `(-1)^{S+m} psi^*_{-m}` (half-integer S).
pub fn tilde_state(state: &SpinState) -> SpinState {
    let spin = state.spin();
    let amps = state
        .amps()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let m = projection_at(spin, i);
            let exponent = if spin.is_integer() { m } else { spin + m };
            let sign = if exponent.as_int().expect("integer exponent") % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            state.amp(-m).conj() * sign
        })
        .collect();
    SpinState::new_normalized(spin, amps).expect("nonzero state")
}

/// Dense projector onto total spin `K` inside `H_S (x) H_S`, with the
/// product basis ordered as `index(m) * (2S+1) + index(m')`.
pub fn coupled_projector(spin: HalfInt, k: i64) -> Result<DMatrix<f64>> {
    check_tensor_index(spin, k, 0)?;
    let n = spin.dim();
    let mut out = DMatrix::zeros(n * n, n * n);
    for entries in &coupled_shell(spin, k).by_q {
        let mut v = nalgebra::DVector::zeros(n * n);
        for &(i, j, c) in entries {
            v[i * n + j] = c;
        }
        out += &v * v.transpose();
    }
    Ok(out)
}

/// `A_M = sum_{K=1..M} <tilde psi|<psi| Pi_K |psi>|tilde psi>`.
pub fn cumulative_projector(state: &SpinState, order: i64) -> Result<f64> {
    let spin = state.spin();
    check_order(spin, order)?;
    let tilde = tilde_state(state);
    let (a, b) = (state.amps(), tilde.amps());
    let mut total = 0.0;
    for k in 1..=order {
        for entries in &coupled_shell(spin, k).by_q {
            let amp: Complex64 = entries.iter().map(|&(i, j, c)| a[i] * b[j] * c).sum();
            total += amp.norm_sqr();
        }
    }
    Ok(total)
}

/// Largest value of `A_M` over pure states:
/// `2S/(2S+1) - Gamma(2S+1)^2 / (Gamma(2S-M) Gamma(2S+M+2))`,
/// with the second term taken as 0 at the pole `M = 2S`.
pub fn max_value(spin: HalfInt, order: i64) -> Result<f64> {
    check_order(spin, order)?;
    let two_s = spin.twice();
    let order = order as i32;
    let ceiling = BigRational::new(BigInt::from(two_s), BigInt::from(two_s + 1));
    if order == two_s {
        return Ok(ceiling.to_f64().expect("finite"));
    }
    let num = big_factorial(two_s) * big_factorial(two_s);
    let den = big_factorial(two_s - order - 1) * big_factorial(two_s + order + 1);
    let value = ceiling - BigRational::new(num, den);
    Ok(value.to_f64().expect("finite"))
}

/// `sum_{K=1..M} (2K+1)/(2S+1) |C^{S S}_{S S, K 0}|^2`, the value of `A_M` on `|S, S>`.
pub fn highest_weight_cumulative(spin: HalfInt, order: i64) -> Result<f64> {
    check_order(spin, order)?;
    let n = spin.dim() as f64;
    Ok((1..=order)
        .map(|k| {
            let c = clebsch_gordan(
                spin,
                spin,
                HalfInt::from_int(k as i32),
                HalfInt::ZERO,
                spin,
                spin,
            )
            .expect("valid projections");
            (2 * k + 1) as f64 / n * c * c
        })
        .sum())
}

/// Largest `M` with `A_M < eps`, or 0 when already `A_1 >= eps`.
pub fn unpolarization_order(state: &SpinState, eps: f64) -> Result<i64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
    }
    let mut order = 0;
    for m in 1..=state.spin().twice() as i64 {
        if cumulative_pure(state, m)? < eps {
            order = m;
        } else {
            break;
        }
    }
    Ok(order)
}

/// One way of evaluating `A_M` for a pure state.
pub trait CumulativeRoute: Send + Sync {
    fn name(&self) -> &'static str;
    fn cumulative(&self, state: &SpinState, order: i64) -> Result<f64>;
}

pub struct SpectrumRoute;
pub struct DoubleSumRoute;
pub struct ProjectorRoute;

impl CumulativeRoute for SpectrumRoute {
    fn name(&self) -> &'static str {
        "spectrum"
    }
    fn cumulative(&self, state: &SpinState, order: i64) -> Result<f64> {
        check_order(state.spin(), order)?;
        cumulative(&multipoles(state), order)
    }
}

impl CumulativeRoute for DoubleSumRoute {
    fn name(&self) -> &'static str {
        "double-sum"
    }
    fn cumulative(&self, state: &SpinState, order: i64) -> Result<f64> {
        cumulative_pure(state, order)
    }
}

impl CumulativeRoute for ProjectorRoute {
    fn name(&self) -> &'static str {
        "projector"
    }
    fn cumulative(&self, state: &SpinState, order: i64) -> Result<f64> {
        cumulative_projector(state, order)
    }
}

/// Every registered route, in a fixed order.
pub fn cumulative_routes() -> Vec<Box<dyn CumulativeRoute>> {
    vec![
        Box::new(DoubleSumRoute),
        Box::new(SpectrumRoute),
        Box::new(ProjectorRoute),
    ]
}

pub fn cumulative_route(name: &str) -> Result<Box<dyn CumulativeRoute>> {
    cumulative_routes()
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| {
            let known: Vec<_> = cumulative_routes().iter().map(|r| r.name()).collect();
            Error::Invalid(format!(
                "unknown method {name:?}; known: {}",
                known.join(", ")
            ))
        })
}

#[derive(Serialize, Deserialize)]
struct MultipoleRecord {
    #[serde(rename = "K")]
    k: i64,
    q: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRecord {
    #[serde(rename = "S")]
    spin: HalfInt,
    multipoles: Vec<MultipoleRecord>,
}

impl Serialize for MultipoleSpectrum {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SpectrumRecord {
            spin: self.spin,
            multipoles: self
                .iter()
                .map(|(k, q, z)| MultipoleRecord {
                    k,
                    q,
                    re: z.re,
                    im: z.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultipoleSpectrum {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = SpectrumRecord::deserialize(deserializer)?;
        let max_k = rec.spin.twice() as i64;
        let mut shells: Vec<Vec<Option<Complex64>>> = (0..=max_k)
            .map(|k| vec![None; (2 * k + 1) as usize])
            .collect();
        for r in rec.multipoles {
            if r.k < 0 || r.k > max_k || r.q.abs() > r.k {
                return Err(D::Error::custom(format!(
                    "multipole K={} q={} out of range",
                    r.k, r.q
                )));
            }
            shells[r.k as usize][(r.q + r.k) as usize] = Some(Complex64::new(r.re, r.im));
        }
        let shells = shells
            .into_iter()
            .map(|s| s.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| D::Error::custom("spectrum is missing entries"))?;
        Ok(MultipoleSpectrum {
            spin: rec.spin,
            shells,
        })
    }
}

/// One row of the `M, A_M, max_value` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulativeRow {
    #[serde(rename = "M")]
    pub order: i64,
    #[serde(rename = "A_M")]
    pub value: f64,
    pub max_value: f64,
}

pub fn cumulative_table(state: &SpinState) -> Vec<CumulativeRow> {
    (1..=state.spin().twice() as i64)
        .map(|m| CumulativeRow {
            order: m,
            value: cumulative_pure(state, m).expect("order in range"),
            max_value: max_value(state.spin(), m).expect("order in range"),
        })
        .collect()
}
