//! From characteristic-function samples back to probabilities.
//!
//! For an integer-valued observable with support width `W`, sampling `F` at
//! `θ_j = 2πj/M` with `M ≥ W` makes the Fourier integral an exact finite sum:
//!
//! ```text
//! P(x) = (1/M) Σ_j F(θ_j) e^{−ixθ_j}
//! ```
//!
//! When every controlled rotation over-rotates by `1 + η`, the probe reads
//! `F((1+η)θ)` at the nominal phase `θ = 2εt`; [`invert_with_gate_error`]
//! undoes the rescaling.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfunc::{closed_cumulants, CharFunctionSamples};
use crate::error::{input, Error, Result};
use crate::probe::ProbeRecord;
use crate::spin::{ModelKind, ModelParams, ObservableSpec, Support};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Enumeration,
    Dft,
    GateErrorCorrectedDft,
    Gaussian,
}

/// Probabilities on every integer of `support.min..=support.max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub support: Support,
    pub probs: Vec<f64>,
    /// Largest imaginary part dropped during the inversion.
    pub residual_imag: f64,
    pub method: Method,
}

impl Distribution {
    pub fn new(support: Support, probs: Vec<f64>, residual_imag: f64, method: Method) -> Self {
        debug_assert_eq!(probs.len(), support.width());
        Distribution {
            support,
            probs,
            residual_imag,
            method,
        }
    }

    /// `P(x)`, zero outside the support.
    pub fn prob(&self, x: i64) -> f64 {
        if x < self.support.min || x > self.support.max {
            return 0.0;
        }
        self.probs[(x - self.support.min) as usize]
    }

    pub fn support_iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support.values().zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.support_iter().map(|(x, p)| x as f64 * p).sum::<f64>() / self.total()
    }

    pub fn central_moment(&self, mean: f64, order: i32) -> f64 {
        self.support_iter().map(|(x, p)| (x as f64 - mean).powi(order) * p).sum::<f64>() / self.total()
    }

    pub fn variance(&self) -> f64 {
        self.central_moment(self.mean(), 2)
    }

    /// `½ Σ_x |P(x) − Q(x)|` over the union of both supports.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        let lo = self.support.min.min(other.support.min);
        let hi = self.support.max.max(other.support.max);
        0.5 * (lo..=hi).map(|x| (self.prob(x) - other.prob(x)).abs()).sum::<f64>()
    }

    /// Negative entries set to zero, then renormalized.
    pub fn clipped(&self) -> Distribution {
        let mut probs: Vec<f64> = self.probs.iter().map(|&p| p.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Distribution {
            probs,
            ..self.clone()
        }
    }
}

/// Uniform phases `θ_j = 2πj/M`, `j = 0..M`, for a given support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub thetas: Vec<f64>,
    pub support: Support,
}

impl ThetaGrid {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// The minimal alias-free grid: one phase per integer in the support.
pub fn build_theta_grid(obs: &ObservableSpec, n: usize) -> Result<ThetaGrid> {
    let support = obs.support(n)?;
    build_theta_grid_with(obs, n, support.width())
}

/// An oversampled grid with `points ≥` support width.
pub fn build_theta_grid_with(obs: &ObservableSpec, n: usize, points: usize) -> Result<ThetaGrid> {
    let support = obs.support(n)?;
    if points < support.width() {
        return Err(Error::GridMismatch(format!(
            "{points} phases cannot resolve {} support points",
            support.width()
        )));
    }
    Ok(ThetaGrid {
        thetas: uniform_phases(points),
        support,
    })
}

pub(crate) fn uniform_phases(points: usize) -> Vec<f64> {
    (0..points).map(|j| 2.0 * PI * j as f64 / points as f64).collect()
}

/// `P(x) = (1/M) Σ_j F(θ_j) e^{−ixθ_j}` over the observable's support.
pub fn invert_dft(samples: &CharFunctionSamples, obs: &ObservableSpec, n: usize) -> Result<Distribution> {
    invert_scaled(samples, obs, n, 1.0, Method::Dft)
}

/// Inversion of samples taken at nominal phases `θ_j/(1+η)` whose values
/// are `F(θ_j)`:
/// `P(x) = (1/M) Σ_j F_j e^{−ix θ_nom,j (1+η)}`.
/// With `η = 0` this is exactly [`invert_dft`].
pub fn invert_with_gate_error(
    samples: &CharFunctionSamples,
    eta: f64,
    obs: &ObservableSpec,
    n: usize,
) -> Result<Distribution> {
    if !(eta > -1.0) || !eta.is_finite() {
        return input(format!("gate error η must exceed −1, got {eta}"));
    }
    let method = if eta == 0.0 { Method::Dft } else { Method::GateErrorCorrectedDft };
    invert_scaled(samples, obs, n, 1.0 + eta, method)
}

fn invert_scaled(
    samples: &CharFunctionSamples,
    obs: &ObservableSpec,
    n: usize,
    scale: f64,
    method: Method,
) -> Result<Distribution> {
    let support = obs.support(n)?;
    let m = samples.len();
    if samples.values.len() != m {
        return Err(Error::GridMismatch("phase and value counts differ".into()));
    }
    if m < support.width() {
        return Err(Error::GridMismatch(format!(
            "{m} samples cannot resolve {} support points",
            support.width()
        )));
    }
    for (j, &theta) in samples.thetas.iter().enumerate() {
        let expected = 2.0 * PI * j as f64 / m as f64;
        if (theta * scale - expected).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "phase {j} is {theta}, expected {}",
                expected / scale
            )));
        }
    }
    let mut residual = 0.0f64;
    let probs = support
        .values()
        .map(|x| {
            let p: Complex64 = samples
                .thetas
                .iter()
                .zip(&samples.values)
                .map(|(&t, &f)| f * Complex64::from_polar(1.0, -(x as f64) * t * scale))
                .sum::<Complex64>()
                / m as f64;
            residual = residual.max(p.im.abs());
            p.re
        })
        .collect();
    Ok(Distribution::new(support, probs, residual, method))
}

/// Recovers `η` from the stretch of the coherence period: `|F|` returns to
/// one at `θ_rec = 2π/stride` of the true phase, i.e. at nominal phase
/// `θ_rec/(1+η)`. The recurrence is located as the largest `|F|` in the
/// window `[θ_rec/2, 3θ_rec/2]`, refined by a parabola through `ln|F|`.
pub fn estimate_gate_error(record: &ProbeRecord) -> Result<f64> {
    let support = record.obs.support(record.model.n)?;
    let recurrence = 2.0 * PI / support.stride as f64;
    let len = record.times.len();
    if len < 3 || record.sx.len() != len || record.sy.len() != len {
        return Err(Error::Estimation("record too short".into()));
    }
    let theta: Vec<f64> = record.times.iter().map(|t| 2.0 * record.epsilon * t).collect();
    let modulus: Vec<f64> = record.sx.iter().zip(&record.sy).map(|(x, y)| x.hypot(*y)).collect();

    let window: Vec<usize> = (0..len)
        .filter(|&j| theta[j] >= recurrence / 2.0 && theta[j] <= 1.5 * recurrence)
        .collect();
    if window.len() < 3 {
        return Err(Error::Estimation("record does not reach the first recurrence".into()));
    }
    let (&first, &last) = (window.first().unwrap(), window.last().unwrap());
    let peak = window
        .iter()
        .copied()
        .max_by(|&a, &b| modulus[a].total_cmp(&modulus[b]))
        .unwrap();
    let dip = modulus.iter().copied().fold(f64::INFINITY, f64::min);
    if modulus[peak] - dip < 1e-6 {
        return Err(Error::Estimation("coherence shows no contrast".into()));
    }
    if peak == first || peak == last {
        return Err(Error::Estimation("recurrence peak lies outside the record".into()));
    }

    let (x0, x1, x2) = (theta[peak - 1], theta[peak], theta[peak + 1]);
    let ln = |j: usize| modulus[j].max(f64::MIN_POSITIVE).ln();
    let (y0, y1, y2) = (ln(peak - 1), ln(peak), ln(peak + 1));
    // vertex of the parabola through three (possibly unevenly spaced) points
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    let vertex = if den.abs() > 0.0 { x1 - 0.5 * num / den } else { x1 };
    let vertex = vertex.clamp(x0, x2);
    Ok(recurrence / vertex - 1.0)
}

/// `P(m) = C exp[−(m − κ1)²/(2κ2)]` on the parity-allowed magnetizations.
pub fn gaussian_approx(model: &ModelParams) -> Result<Distribution> {
    if model.kind != ModelKind::NearestNeighborRing {
        return input("the Gaussian comparison curve is defined for the ring");
    }
    let obs = ObservableSpec::magnetization(model.n);
    let k = closed_cumulants(model, &obs)?;
    let support = obs.support(model.n)?;
    let (mean, var) = (k.kappa(1), k.kappa(2));
    let mut probs: Vec<f64> = support
        .values()
        .map(|m| {
            if support.allows(m) {
                (-(m as f64 - mean).powi(2) / (2.0 * var)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(Distribution::new(support, probs, 0.0, Method::Gaussian))
}

/// Defects of a reconstructed distribution. Reported, never raised.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `|Σ P − 1|`
    pub normalization_defect: f64,
    /// Smallest probability, or zero when none is negative.
    pub most_negative: f64,
    /// `Σ |P(x)|` over support points of forbidden parity.
    pub parity_violation_mass: f64,
    pub residual_imag: f64,
}

impl ValidationReport {
    pub fn worst_defect(&self) -> f64 {
        self.normalization_defect
            .max(-self.most_negative)
            .max(self.parity_violation_mass)
            .max(self.residual_imag)
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.worst_defect() <= tolerance
    }
}

pub fn validate_distribution(dist: &Distribution) -> ValidationReport {
    ValidationReport {
        normalization_defect: (dist.total() - 1.0).abs(),
        most_negative: dist.probs.iter().copied().fold(0.0, f64::min),
        parity_violation_mass: dist
            .support_iter()
            .filter(|&(x, _)| !dist.support.allows(x))
            .map(|(_, p)| p.abs())
            .sum(),
        residual_imag: dist.residual_imag,
    }
}
