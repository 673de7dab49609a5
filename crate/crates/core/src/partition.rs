//! Partition functions at real and complex couplings.
//!
//! Every value is returned as a [`Scaled`] number `mantissa · e^{log_scale}`
//! so that chains of thousands of spins, or `|βJ|` in the hundreds, never
//! overflow. Only ratios are physically meaningful; [`Scaled::ratio`]
//! subtracts the scales before exponentiating.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{input, Result};
use crate::spin::{ModelKind, ModelParams};

/// Complex number stored as `mantissa · e^{log_scale}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        Scaled {
            mantissa,
            log_scale,
        }
    }

    /// The plain complex value; overflows to infinity when it does not fit.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    /// `self / other` as a plain complex number.
    pub fn ratio(&self, other: &Scaled) -> Complex64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// Analytically continued parameters `J̃`, `h̃` at real inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexParams {
    pub jt: Complex64,
    pub ht: Complex64,
    pub beta: f64,
    pub n: usize,
}

impl ComplexParams {
    pub fn new(jt: Complex64, ht: Complex64, beta: f64, n: usize) -> Self {
        ComplexParams { jt, ht, beta, n }
    }

    pub fn from_model(model: &ModelParams) -> Self {
        ComplexParams {
            jt: model.j.into(),
            ht: model.h.into(),
            beta: model.beta,
            n: model.n,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return input("N must be at least 1");
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return input(format!("beta must be positive, got {}", self.beta));
        }
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.jt) || !finite(self.ht) {
            return input("complex couplings must be finite");
        }
        Ok(())
    }
}

/// Eigenvalues of the symmetric 2×2 ring transfer matrix, both divided by
/// `e^{log_scale}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSpectrum {
    pub lambda_minus: Complex64,
    pub lambda_plus: Complex64,
    pub log_scale: f64,
}

impl TransferSpectrum {
    /// `(λ−, λ+)` without the scale factor.
    pub fn unscaled(&self) -> (Complex64, Complex64) {
        let s = self.log_scale.exp();
        (self.lambda_minus * s, self.lambda_plus * s)
    }

    fn swapped(self) -> Self {
        TransferSpectrum {
            lambda_minus: self.lambda_plus,
            lambda_plus: self.lambda_minus,
            log_scale: self.log_scale,
        }
    }
}

/// `λ± = e^{βJ̃} cosh(βh̃) ± e^{−βJ̃} √(1 + e^{4βJ̃} sinh²(βh̃))` with the
/// principal square root.
///
/// The smaller-modulus eigenvalue is recomputed from the determinant
/// `λ+λ− = 2 sinh(2βJ̃)` to avoid cancellation.
pub fn transfer_spectrum(p: &ComplexParams) -> Result<TransferSpectrum> {
    p.validate()?;
    Ok(spectrum_unchecked(p.beta * p.jt, p.beta * p.ht))
}

fn spectrum_unchecked(x: Complex64, y: Complex64) -> TransferSpectrum {
    let i = Complex64::i();
    // cosh y = e^c·ch, sinh y = e^c·sh with |ch|, |sh| ≤ 1
    let c = y.re.abs();
    let (ep, em) = ((y - c).exp(), (-y - c).exp());
    let ch = (ep + em) * 0.5;
    let sh = (ep - em) * 0.5;

    let cosh_part_exp = x.re + c;
    let cosh_part = (i * x.im).exp() * ch;

    // 1 + e^{4x} sinh²y = e^{2m}·bracket
    let q = 4.0 * x.re + 2.0 * c;
    let m = q.max(0.0) / 2.0;
    let bracket = Complex64::from((-2.0 * m).exp()) + (q - 2.0 * m).exp() * (4.0 * i * x.im).exp() * sh * sh;
    let root_part_exp = -x.re + m;
    let root_part = (-i * x.im).exp() * bracket.sqrt();

    let s = cosh_part_exp.max(root_part_exp);
    let a = cosh_part * (cosh_part_exp - s).exp();
    let b = root_part * (root_part_exp - s).exp();
    let mut plus = a + b;
    let mut minus = a - b;

    let det = (2.0 * x - 2.0 * s).exp() - (-2.0 * x - 2.0 * s).exp();
    if plus.norm() >= minus.norm() {
        if plus.norm() > 0.0 {
            minus = det / plus;
        }
    } else {
        plus = det / minus;
    }
    TransferSpectrum {
        lambda_minus: minus,
        lambda_plus: plus,
        log_scale: s,
    }
}

/// `Z = λ−^N + λ+^N` for the periodic nearest-neighbour chain, evaluated as
/// `λ_big^N (1 + (λ_small/λ_big)^N)`.
pub fn partition_nn(p: &ComplexParams) -> Result<Scaled> {
    let spectrum = transfer_spectrum(p)?;
    Ok(power_trace(&spectrum, p.n))
}

/// Same as [`partition_nn`] with the other square-root branch, which swaps
/// `λ+ ↔ λ−`.
pub fn partition_nn_other_branch(p: &ComplexParams) -> Result<Scaled> {
    let spectrum = transfer_spectrum(p)?.swapped();
    Ok(power_trace(&spectrum, p.n))
}

fn power_trace(spectrum: &TransferSpectrum, n: usize) -> Scaled {
    let (big, small) = if spectrum.lambda_plus.norm() >= spectrum.lambda_minus.norm() {
        (spectrum.lambda_plus, spectrum.lambda_minus)
    } else {
        (spectrum.lambda_minus, spectrum.lambda_plus)
    };
    let nf = n as f64;
    let tail = (small / big).powu(n as u32);
    let phase = Complex64::from_polar(1.0, nf * big.arg());
    Scaled::new(phase * (1.0 + tail), nf * (spectrum.log_scale + big.norm().ln()))
}

/// All-to-all model, real `J`, complex field:
/// `Z = e^{N(N−1)βJ/2} e^{Nβh̃} Σ_n C(N,n) e^{−2βh̃n} e^{2βJ(n²−Nn)}`,
/// summed in the log domain with a shared max-exponent shift.
pub fn partition_longrange(n: usize, j: f64, ht: Complex64, beta: f64) -> Result<Scaled> {
    ComplexParams::new(j.into(), ht, beta, n).validate()?;
    Ok(longrange_sum(n, Complex64::from(beta * j), beta * ht))
}

/// `ln C(n, k)` through log-gamma.
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Long-range partition sum for complex `βJ` and `βh`; `n` counts down spins.
pub(crate) fn longrange_sum(n: usize, beta_j: Complex64, beta_h: Complex64) -> Scaled {
    let nf = n as f64;
    let prefactor = beta_j * (nf * (nf - 1.0) / 2.0) + beta_h * nf;
    let exponents: Vec<Complex64> = (0..=n)
        .map(|k| {
            let kf = k as f64;
            ln_binomial(n, k) + beta_j * (2.0 * (kf * kf - nf * kf)) - beta_h * (2.0 * kf) + prefactor
        })
        .collect();
    let shift = exponents.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let sum: Complex64 = exponents
        .iter()
        .map(|e| Complex64::from_polar((e.re - shift).exp(), e.im))
        .sum();
    Scaled::new(sum, shift)
}

pub(crate) fn partition_model(model: &ModelParams, beta_j: Complex64, beta_h: Complex64) -> Scaled {
    match model.kind {
        ModelKind::NearestNeighborRing => power_trace(&spectrum_unchecked(beta_j, beta_h), model.n),
        ModelKind::LongRangeAllToAll => longrange_sum(model.n, beta_j, beta_h),
    }
}

/// Survival amplitude `⟨ψ(0)|ψ(t)⟩ = Z(β+it)/Z(β)` of the thermally weighted
/// superposition `Σ √p_n |n⟩`.
pub fn loschmidt_amplitude(model: &ModelParams, t: f64) -> Result<Complex64> {
    model.validate(false)?;
    if !t.is_finite() {
        return input("time must be finite");
    }
    let shifted = Complex64::new(model.beta, t);
    let num = partition_model(model, shifted * model.j, shifted * model.h);
    let den = partition_model(model, (model.beta * model.j).into(), (model.beta * model.h).into());
    Ok(num.ratio(&den))
}
