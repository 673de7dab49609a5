//! Characteristic functions `F(θ) = ⟨e^{iθX}⟩` and cumulants.
//!
//! For magnetization and kinks, the numerator of `F` is the partition
//! function at deformed couplings:
//!
//! | observable    | deformation            | prefactor    |
//! |---------------|------------------------|--------------|
//! | magnetization | `h̃ = h + iθ/β`         | `1`          |
//! | kink number   | `J̃ = J − iθ/(2β)`      | `e^{iθN/2}`  |
//!
//! The all-to-all model cannot deform a single bond, so its kink
//! characteristic function is a reweighting of the joint
//! magnetization/kink counts of the ring.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::partition::{ln_binomial, partition_model, ComplexParams, Scaled};
use crate::reconstruct::{invert_dft, Distribution};
use crate::spin::{ModelKind, ModelParams, ObservableKind, ObservableSpec};

/// Largest all-to-all chain whose kink statistics go through [`joint_counts`].
pub const LONG_RANGE_KINK_MAX_N: usize = 64;

/// Largest chain for which the floating-point [`joint_counts_spectral`]
/// still rounds to exact integers.
pub const SPECTRAL_COUNTS_MAX_N: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    ProbeExact,
    ProbeShots,
}

/// `F(θ_j)` on an ordered grid of phases in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharFunctionSamples {
    pub thetas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
}

impl CharFunctionSamples {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

pub fn deform_params(model: &ModelParams, obs: &ObservableSpec, theta: f64) -> Result<ComplexParams> {
    model.validate(false)?;
    let mut p = ComplexParams::from_model(model);
    match obs.kind {
        ObservableKind::Magnetization => p.ht += Complex64::new(0.0, theta / model.beta),
        ObservableKind::KinkNumber => p.jt -= Complex64::new(0.0, theta / (2.0 * model.beta)),
        ObservableKind::Custom => return Err(Error::UnsupportedDeformation(obs.kind.name())),
    }
    Ok(p)
}

/// A characteristic function prepared for repeated evaluation: the
/// physical partition function (or the normalized weights) is computed once.
#[derive(Clone, Debug)]
pub struct CharFunction {
    model: ModelParams,
    kind: ObservableKind,
    engine: Engine,
}

#[derive(Clone, Debug)]
enum Engine {
    /// Ring: deformed over physical partition function.
    Ring { z: Scaled },
    /// `F(θ) = Σ_x p_x e^{iθx}` with exact normalized weights.
    Weights { offset: i64, stride: i64, probs: Vec<f64> },
}

impl CharFunction {
    pub fn new(model: &ModelParams, obs: &ObservableSpec) -> Result<Self> {
        model.validate(false)?;
        obs.validate_for(model.n)?;
        let engine = match (model.kind, obs.kind) {
            (_, ObservableKind::Custom) => return Err(Error::UnsupportedDeformation(obs.kind.name())),
            (ModelKind::NearestNeighborRing, _) => Engine::Ring {
                z: partition_model(model, (model.beta * model.j).into(), (model.beta * model.h).into()),
            },
            (ModelKind::LongRangeAllToAll, ObservableKind::Magnetization) => {
                // g(n) over down-spin count n, M = N − 2n
                let probs = normalize_log_weights(&longrange_log_g(model));
                Engine::Weights {
                    offset: model.n as i64,
                    stride: -2,
                    probs,
                }
            }
            (ModelKind::LongRangeAllToAll, ObservableKind::KinkNumber) => Engine::Weights {
                offset: 0,
                stride: 1,
                probs: longrange_kink_probs(model)?,
            },
        };
        Ok(CharFunction {
            model: *model,
            kind: obs.kind,
            engine,
        })
    }

    /// `F(θ) = Σ_x P(x) e^{iθx}` from a known distribution, e.g. the
    /// enumeration oracle for observables without a deformation.
    pub fn from_distribution(model: &ModelParams, kind: ObservableKind, dist: &Distribution) -> Self {
        CharFunction {
            model: *model,
            kind,
            engine: Engine::Weights {
                offset: dist.support.min,
                stride: 1,
                probs: dist.probs.clone(),
            },
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let m = &self.model;
        match &self.engine {
            Engine::Ring { z } => {
                let (bj, bh, prefactor) = match self.kind {
                    ObservableKind::Magnetization => (
                        Complex64::from(m.beta * m.j),
                        Complex64::new(m.beta * m.h, theta),
                        Complex64::from(1.0),
                    ),
                    _ => (
                        Complex64::new(m.beta * m.j, -theta / 2.0),
                        Complex64::from(m.beta * m.h),
                        Complex64::from_polar(1.0, theta * m.n as f64 / 2.0),
                    ),
                };
                prefactor * partition_model(m, bj, bh).ratio(z)
            }
            Engine::Weights {
                offset,
                stride,
                probs,
            } => probs
                .iter()
                .enumerate()
                .map(|(i, &p)| Complex64::from_polar(p, theta * (offset + stride * i as i64) as f64))
                .sum(),
        }
    }

    /// Evaluates on every phase; the output order follows `thetas`.
    pub fn sample(&self, thetas: &[f64]) -> CharFunctionSamples {
        CharFunctionSamples {
            thetas: thetas.to_vec(),
            values: thetas.par_iter().map(|&t| self.eval(t)).collect(),
            provenance: Provenance::Analytic,
        }
    }
}

/// `F(θ) = e^{iθa} Z(deformed)/Z(physical)`.
pub fn charfunc(model: &ModelParams, obs: &ObservableSpec, theta: f64) -> Result<Complex64> {
    Ok(CharFunction::new(model, obs)?.eval(theta))
}

pub fn charfunc_samples(model: &ModelParams, obs: &ObservableSpec, thetas: &[f64]) -> Result<CharFunctionSamples> {
    Ok(CharFunction::new(model, obs)?.sample(thetas))
}

/// `ln g(n) = ln C(N,n) − 2βhn + 2βJ(n² − Nn)` for `n = 0..=N`.
fn longrange_log_g(model: &ModelParams) -> Vec<f64> {
    let nf = model.n as f64;
    (0..=model.n)
        .map(|k| {
            let kf = k as f64;
            ln_binomial(model.n, k) - 2.0 * model.beta * model.h * kf
                + 2.0 * model.beta * model.j * (kf * kf - nf * kf)
        })
        .collect()
}

fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - shift).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Exact `P(k)` of the all-to-all model from the joint counts `Q(m, k)`,
/// `Σ_m Q(m,k) e^{β[J(m²−N)/2 + hm]}` normalized over `k`.
fn longrange_kink_probs(model: &ModelParams) -> Result<Vec<f64>> {
    if model.n > LONG_RANGE_KINK_MAX_N {
        return Err(Error::Size {
            n: model.n,
            max: LONG_RANGE_KINK_MAX_N,
            what: "all-to-all kink statistics",
        });
    }
    if model.n == 1 {
        // the lone self-bond is always satisfied
        return Ok(vec![1.0]);
    }
    let counts = joint_counts(model.n)?;
    let n = model.n as i64;
    let mut log_w = vec![f64::NEG_INFINITY; model.n + 1];
    let mut terms: Vec<(usize, f64)> = Vec::new();
    for k in 0..=n {
        for m in -n..=n {
            let q = counts.get(m, k);
            if q == 0 {
                continue;
            }
            let mf = m as f64;
            let e = (q as f64).ln() + model.beta * (model.j * (mf * mf - n as f64) / 2.0 + model.h * mf);
            terms.push((k as usize, e));
        }
    }
    let shift = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let mut w = vec![0.0; model.n + 1];
    for (k, e) in terms {
        w[k] += (e - shift).exp();
    }
    for (lw, &x) in log_w.iter_mut().zip(&w) {
        if x > 0.0 {
            *lw = x.ln();
        }
    }
    Ok(normalize_log_weights(&log_w))
}

/// `Q(m, k)`: number of ring configurations with magnetization `m` and kink
/// number `k`, stored on the full `(2N+1) × (N+1)` grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCounts {
    n: usize,
    counts: Vec<u128>,
}

impl JointCounts {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Zero outside `m ∈ [−N, N]`, `k ∈ [0, N]`.
    pub fn get(&self, m: i64, k: i64) -> u128 {
        let n = self.n as i64;
        if m.abs() > n || !(0..=n).contains(&k) {
            return 0;
        }
        self.counts[self.index(m, k)]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    fn index(&self, m: i64, k: i64) -> usize {
        (m + self.n as i64) as usize * (self.n + 1) + k as usize
    }
}

/// Exact joint counts by a transfer-matrix recursion over generating
/// polynomials: state `(first spin, current spin, up count, kink count)`,
/// one site per step, the wrap bond added at the end.
pub fn joint_counts(n: usize) -> Result<JointCounts> {
    if n < 2 {
        return input("joint counts need N ≥ 2");
    }
    if n > 120 {
        return Err(Error::Size {
            n,
            max: 120,
            what: "exact joint counts",
        });
    }
    let dim = n + 1;
    let idx = |first: usize, cur: usize, ups: usize, kinks: usize| ((first * 2 + cur) * dim + ups) * dim + kinks;
    // spin state 0 = up, 1 = down
    let mut state = vec![0u128; 4 * dim * dim];
    state[idx(0, 0, 1, 0)] = 1;
    state[idx(1, 1, 0, 0)] = 1;
    for _ in 1..n {
        let mut next = vec![0u128; state.len()];
        for first in 0..2 {
            for cur in 0..2 {
                for ups in 0..dim {
                    for kinks in 0..dim {
                        let c = state[idx(first, cur, ups, kinks)];
                        if c == 0 {
                            continue;
                        }
                        for s in 0..2 {
                            let ups2 = ups + (s == 0) as usize;
                            let kinks2 = kinks + (s != cur) as usize;
                            next[idx(first, s, ups2, kinks2)] += c;
                        }
                    }
                }
            }
        }
        state = next;
    }
    let mut out = JointCounts {
        n,
        counts: vec![0; (2 * n + 1) * dim],
    };
    for first in 0..2 {
        for cur in 0..2 {
            for ups in 0..dim {
                for kinks in 0..dim {
                    let c = state[idx(first, cur, ups, kinks)];
                    if c == 0 {
                        continue;
                    }
                    let k = kinks + (first != cur) as usize;
                    let m = 2 * ups as i64 - n as i64;
                    let i = out.index(m, k as i64);
                    out.counts[i] += c;
                }
            }
        }
    }
    Ok(out)
}

/// Joint counts from phase-deformed traces: `Tr T(φ,ψ)^N` with
/// `T_{σσ'} = e^{iψσσ'} e^{iφ(σ+σ')/2}` on a `(2N+1) × (N+1)` phase grid,
/// inverted by a two-dimensional DFT and rounded.
pub fn joint_counts_spectral(n: usize) -> Result<JointCounts> {
    if n < 2 {
        return input("joint counts need N ≥ 2");
    }
    if n > SPECTRAL_COUNTS_MAX_N {
        return Err(Error::Size {
            n,
            max: SPECTRAL_COUNTS_MAX_N,
            what: "floating-point joint counts",
        });
    }
    let (pm, pk) = (2 * n + 1, n + 1);
    let nf = n as f64;
    // ψ_b = −πb/(N+1) turns e^{iψ(N−2k)} into e^{2πibk/(N+1)} up to a b-phase
    let traces: Vec<Complex64> = (0..pm * pk)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / pk, ab % pk);
            let phi = 2.0 * PI * a as f64 / pm as f64;
            let psi = -PI * b as f64 / pk as f64;
            let t = [
                [Complex64::from_polar(1.0, psi + phi), Complex64::from_polar(1.0, -psi)],
                [Complex64::from_polar(1.0, -psi), Complex64::from_polar(1.0, psi - phi)],
            ];
            let p = mat_pow(t, n);
            (p[0][0] + p[1][1]) * Complex64::from_polar(1.0, PI * b as f64 * nf / pk as f64)
        })
        .collect();

    let mut out = JointCounts {
        n,
        counts: vec![0; pm * pk],
    };
    for m in -(n as i64)..=n as i64 {
        for k in 0..=n as i64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..pm {
                let phi = 2.0 * PI * a as f64 / pm as f64;
                for b in 0..pk {
                    let ang = -phi * m as f64 - 2.0 * PI * (b as i64 * k) as f64 / pk as f64;
                    acc += traces[a * pk + b] * Complex64::from_polar(1.0, ang);
                }
            }
            let q = acc.re / (pm * pk) as f64;
            let rounded = q.round();
            if (q - rounded).abs() > 1e-6 || acc.im.abs() / ((pm * pk) as f64) > 1e-6 || rounded < 0.0 {
                return input(format!("joint count at (m={m}, k={k}) is not an integer: {q}"));
            }
            let i = out.index(m, k);
            out.counts[i] = rounded as u128;
        }
    }
    Ok(out)
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat_pow(mut base: Mat2, mut e: usize) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = [[one, zero], [zero, one]];
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    acc
}

/// Auxiliary quantities of the large-`N` ring cumulants at the physical
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantContext {
    /// `√(1 + e^{4βJ} sinh²βh)`
    pub u: f64,
    /// `1 − e^{4βJ}[2 + cosh 2βh]`
    pub v: f64,
    /// `1 − 8 e^{8βJ} sinh⁴βh`
    pub w: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl CumulantContext {
    pub fn new(model: &ModelParams) -> Self {
        let (bj, bh) = (model.beta * model.j, model.beta * model.h);
        let e4 = (4.0 * bj).exp();
        let sh = bh.sinh();
        let u = (1.0 + e4 * sh * sh).sqrt();
        CumulantContext {
            u,
            v: 1.0 - e4 * (2.0 + (2.0 * bh).cosh()),
            w: 1.0 - 8.0 * (8.0 * bj).exp() * sh.powi(4),
            lambda_plus: bj.exp() * bh.cosh() + (-bj).exp() * u,
            lambda_minus: bj.exp() * bh.cosh() - (-bj).exp() * u,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CumulantFlavor {
    /// Ring formulas keeping only `λ+^N`; exact up to `O((λ−/λ+)^N)`.
    ClosedLargeN,
    /// Finite-`N` closed forms with no truncation (all-to-all magnetization).
    ClosedExact,
    NumericalFromF,
}

/// `κ_1, κ_2, …` in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    pub kappas: Vec<f64>,
    pub flavor: CumulantFlavor,
}

impl CumulantSet {
    /// `κ_j`, one-based.
    pub fn kappa(&self, j: usize) -> f64 {
        self.kappas[j - 1]
    }

    pub fn mean(&self) -> f64 {
        self.kappa(1)
    }

    pub fn variance(&self) -> f64 {
        self.kappa(2)
    }
}

/// First three cumulants in closed form.
///
/// * ring magnetization and ring kinks: large-`N` forms from `λ+` alone;
/// * all-to-all magnetization: exact moment sums `G_α = Σ n^α g(n)`;
/// * all-to-all kinks: no closed form, use [`numerical_cumulants`].
pub fn closed_cumulants(model: &ModelParams, obs: &ObservableSpec) -> Result<CumulantSet> {
    model.validate(false)?;
    let nf = model.n as f64;
    let (bj, bh) = (model.beta * model.j, model.beta * model.h);
    match (model.kind, obs.kind) {
        (_, ObservableKind::Custom) => Err(Error::NoClosedForm("custom observables")),
        (ModelKind::LongRangeAllToAll, ObservableKind::KinkNumber) => {
            Err(Error::NoClosedForm("kinks in the all-to-all model"))
        }
        (ModelKind::NearestNeighborRing, ObservableKind::Magnetization) => {
            let ctx = CumulantContext::new(model);
            let e2 = (2.0 * bj).exp();
            let u = ctx.u;
            Ok(CumulantSet {
                kappas: vec![
                    nf * e2 * bh.sinh() / u,
                    nf * e2 * bh.cosh() / u.powi(3),
                    nf * ctx.v * e2 * bh.sinh() / u.powi(5),
                ],
                flavor: CumulantFlavor::ClosedLargeN,
            })
        }
        (ModelKind::NearestNeighborRing, ObservableKind::KinkNumber) => {
            let CumulantContext {
                u,
                w,
                lambda_plus: lp,
                lambda_minus: lm,
                ..
            } = CumulantContext::new(model);
            let (e1, e2, e3) = (bj.exp(), (2.0 * bj).exp(), (3.0 * bj).exp());
            let sh2 = bh.sinh().powi(2);
            let k1 = nf / (u * lp * e1);
            let k2 = nf * (bh.cosh() + 2.0 * e3 * sh2 * lp) / (u.powi(3) * lp * lp);
            let k3 = nf
                * (-bj).exp()
                * (5.0 * e2 - (2.0 + w) * e2 * (2.0 * bh).cosh() - 2.0 * u * w * bh.cosh()
                    + 4.0 * (u * u - 1.0) * lm * e1 * bh.cosh())
                / (2.0 * u.powi(5) * lp.powi(3));
            Ok(CumulantSet {
                kappas: vec![k1, k2, k3],
                flavor: CumulantFlavor::ClosedLargeN,
            })
        }
        (ModelKind::LongRangeAllToAll, ObservableKind::Magnetization) => {
            // ratios G_α/G_0 as expectations of n under normalized g
            let p = normalize_log_weights(&longrange_log_g(model));
            let moment = |alpha: i32| -> f64 { p.iter().enumerate().map(|(k, &pk)| pk * (k as f64).powi(alpha)).sum() };
            let (r1, r2, r3) = (moment(1), moment(2), moment(3));
            Ok(CumulantSet {
                kappas: vec![
                    nf - 2.0 * r1,
                    4.0 * (r2 - r1 * r1),
                    -8.0 * (r3 - 3.0 * r1 * r2 + 2.0 * r1.powi(3)),
                ],
                flavor: CumulantFlavor::ClosedExact,
            })
        }
    }
}

/// Exact finite-`N` mean kink number on the ring at zero field,
/// `(N/2) e^{−βJ} [cosh^{N−1}βJ − sinh^{N−1}βJ] / [cosh^N βJ + sinh^N βJ]`,
/// evaluated through `tanh βJ` so it never overflows.
pub fn exact_kink_mean(model: &ModelParams) -> Result<f64> {
    model.validate(false)?;
    if model.kind != ModelKind::NearestNeighborRing || model.h != 0.0 {
        return input("the exact kink mean formula applies to the ring at h = 0");
    }
    let bj = model.beta * model.j;
    let t = bj.tanh();
    let n = model.n as i32;
    Ok(model.n as f64 / 2.0 * (-bj).exp() / bj.cosh() * (1.0 - t.powi(n - 1)) / (1.0 + t.powi(n)))
}

/// Cumulants `κ_1..κ_max_order` of the distribution reconstructed from `F`.
pub fn numerical_cumulants(
    samples: &CharFunctionSamples,
    obs: &ObservableSpec,
    n: usize,
    max_order: usize,
) -> Result<CumulantSet> {
    let f0 = samples.values.first().copied().unwrap_or_default();
    if samples.thetas.first() != Some(&0.0) || (f0.re - 1.0).abs() > 1e-6 {
        return input(format!("characteristic function is not normalized: F(0) = {f0}"));
    }
    let dist = invert_dft(samples, obs, n)?;
    Ok(CumulantSet {
        kappas: cumulants_of(&dist, max_order),
        flavor: CumulantFlavor::NumericalFromF,
    })
}

/// Cumulants from central moments through the moment–cumulant recursion.
pub fn cumulants_of(dist: &Distribution, max_order: usize) -> Vec<f64> {
    if max_order == 0 {
        return Vec::new();
    }
    let mean = dist.mean();
    let mu: Vec<f64> = (0..=max_order).map(|k| dist.central_moment(mean, k as i32)).collect();
    let mut kappa = vec![0.0; max_order + 1];
    for order in 2..=max_order {
        let mut acc = mu[order];
        let mut binom = 1.0; // C(order−1, m−1)
        for m in 1..order {
            acc -= binom * kappa[m] * mu[order - m];
            binom *= (order - m) as f64 / m as f64;
        }
        kappa[order] = acc;
    }
    kappa[1] = mean;
    kappa.split_off(1)
}
