//! Equilibrium sampling of classical configurations.
//!
//! The ring is sampled exactly: `σ₁` from the diagonal of `T^N`, then each
//! following spin from `T_{σ_k σ_{k+1}} [T^{N−k}]_{σ_{k+1} σ₁}`, where
//! `N − k` counts the transfer steps still needed to close the ring.
//! The all-to-all model uses single-spin-flip Metropolis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spin::{ModelKind, ModelParams, SpinConfig};

type Mat2 = [[f64; 2]; 2];

/// Burn-in and thinning of the Metropolis chain, in sweeps of `N` flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetropolisSchedule {
    pub burn_in_sweeps: usize,
    pub thinning_sweeps: usize,
}

impl MetropolisSchedule {
    pub fn for_size(n: usize) -> Self {
        MetropolisSchedule {
            burn_in_sweeps: 100 * n,
            thinning_sweeps: n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GibbsSampler {
    model: ModelParams,
    inner: Inner,
}

#[derive(Clone, Debug)]
enum Inner {
    Ring {
        t: Mat2,
        /// `T^k / c_k` for `k = 0..=N`
        powers: Vec<Mat2>,
    },
    LongRange {
        schedule: MetropolisSchedule,
        state: Option<(Vec<i8>, i64)>,
    },
}

fn spin_of(index: usize) -> f64 {
    if index == 0 {
        1.0
    } else {
        -1.0
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    let scale = c.iter().flatten().copied().fold(0.0, f64::max);
    if scale > 0.0 {
        c.iter_mut().flatten().for_each(|x| *x /= scale);
    }
    c
}

impl GibbsSampler {
    pub fn new(model: &ModelParams) -> Result<Self> {
        model.validate(true)?;
        let inner = match model.kind {
            ModelKind::NearestNeighborRing => {
                let (bj, bh) = (model.beta * model.j, model.beta * model.h);
                let shift = bj.abs() + bh.abs();
                let mut t = [[0.0; 2]; 2];
                for (i, row) in t.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        let (s, s2) = (spin_of(i), spin_of(j));
                        *cell = (bj * s * s2 + bh * (s + s2) / 2.0 - shift).exp();
                    }
                }
                let mut powers = vec![[[1.0, 0.0], [0.0, 1.0]]];
                for k in 1..=model.n {
                    let next = mat_mul(&powers[k - 1], &t);
                    powers.push(next);
                }
                Inner::Ring { t, powers }
            }
            ModelKind::LongRangeAllToAll => Inner::LongRange {
                schedule: MetropolisSchedule::for_size(model.n),
                state: None,
            },
        };
        Ok(GibbsSampler { model: *model, inner })
    }

    /// `None` for the exactly sampled ring.
    pub fn schedule(&self) -> Option<MetropolisSchedule> {
        match &self.inner {
            Inner::Ring { .. } => None,
            Inner::LongRange { schedule, .. } => Some(*schedule),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SpinConfig {
        let model = self.model;
        match &mut self.inner {
            Inner::Ring { t, powers } => ring_sample(model.n, t, powers, rng),
            Inner::LongRange { schedule, state } => {
                let sweeps = if state.is_none() {
                    let spins: Vec<i8> = (0..model.n)
                        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                        .collect();
                    let m = spins.iter().map(|&s| s as i64).sum();
                    *state = Some((spins, m));
                    schedule.burn_in_sweeps
                } else {
                    schedule.thinning_sweeps
                };
                let (spins, m) = state.as_mut().expect("chain initialized above");
                metropolis(&model, spins, m, sweeps, rng);
                SpinConfig::new(spins.clone()).expect("chain keeps unit spins")
            }
        }
    }
}

fn ring_sample<R: Rng + ?Sized>(n: usize, t: &Mat2, powers: &[Mat2], rng: &mut R) -> SpinConfig {
    let pick = |w0: f64, w1: f64, rng: &mut R| -> usize {
        if rng.random::<f64>() * (w0 + w1) < w0 {
            0
        } else {
            1
        }
    };
    let full = &powers[n];
    let first = pick(full[0][0], full[1][1], rng);
    let mut spins = Vec::with_capacity(n);
    spins.push(spin_of(first) as i8);
    let mut prev = first;
    for k in 1..n {
        let rest = &powers[n - k];
        let next = pick(t[prev][0] * rest[0][first], t[prev][1] * rest[1][first], rng);
        spins.push(spin_of(next) as i8);
        prev = next;
    }
    SpinConfig::new(spins).expect("sampled spins are ±1")
}

fn metropolis<R: Rng + ?Sized>(model: &ModelParams, spins: &mut [i8], m: &mut i64, sweeps: usize, rng: &mut R) {
    let n = spins.len();
    for _ in 0..sweeps * n {
        let site = rng.random_range(0..n);
        let s = spins[site] as i64;
        let m_new = *m - 2 * s;
        let d_energy =
            -model.j * ((m_new * m_new - *m * *m) as f64) / 2.0 - model.h * (m_new - *m) as f64;
        let accept = d_energy <= 0.0 || rng.random::<f64>() < (-model.beta * d_energy).exp();
        if accept {
            spins[site] = -spins[site];
            *m = m_new;
        }
    }
}

/// One equilibrium configuration; builds a fresh sampler per call, so the
/// all-to-all chain burns in every time.
pub fn gibbs_sample<R: Rng + ?Sized>(model: &ModelParams, rng: &mut R) -> Result<SpinConfig> {
    Ok(GibbsSampler::new(model)?.sample(rng))
}
