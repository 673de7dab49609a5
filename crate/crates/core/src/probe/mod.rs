//! The measurement protocol: a probe qubit in `|+⟩` couples to the system
//! through `ε X σ_z`, so after time `t` its coherence is
//! `⟨σ_x⟩ + i⟨σ_y⟩ = ⟨e^{iΩt}⟩ = F(2εt)` with `Ω = 2εX`.
//!
//! Three emulations are provided:
//!
//! - [`simulate_probe_exact`] evaluates the expectation directly.
//! - [`simulate_probe_shots`] draws equilibrium configurations, accumulates
//!   the circuit phase gate by gate and samples single-shot outcomes.
//! - [`quantum`] runs the ancilla on a dense state vector, reading
//!   `(⟨σ_z⟩, ⟨σ_y⟩)` after a final Hadamard instead of `(⟨σ_x⟩, ⟨σ_y⟩)`.
//!
//! A miscalibrated controlled rotation uses `ε′ = (1+η)ε` in every gate.

pub mod gibbs;
pub mod quantum;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfunc::{CharFunction, CharFunctionSamples, Provenance};
use crate::error::{input, Result};
use crate::reconstruct::uniform_phases;
use crate::spin::{enumerate_oracle, value_unchecked, ModelParams, ObservableKind, ObservableSpec, SpinConfig};

pub use gibbs::{gibbs_sample, GibbsSampler, MetropolisSchedule};

/// Relative over-rotation of every controlled gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GateErrorModel {
    pub eta: f64,
}

impl GateErrorModel {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= -1.0 {
            return input(format!("gate error η must exceed −1, got {eta}"));
        }
        Ok(GateErrorModel { eta })
    }

    pub fn ideal() -> Self {
        GateErrorModel { eta: 0.0 }
    }

    /// `ε′ = (1+η)ε`
    pub fn effective_epsilon(&self, epsilon: f64) -> f64 {
        if self.eta == 0.0 {
            epsilon
        } else {
            (1.0 + self.eta) * epsilon
        }
    }
}

/// Probe readouts on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub model: ModelParams,
    pub obs: ObservableSpec,
    pub epsilon: f64,
    pub eta: f64,
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    /// Shots per basis and time point; `None` for exact expectations.
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    /// Present when configurations came from a Metropolis chain.
    pub sampler: Option<MetropolisSchedule>,
}

impl ProbeRecord {
    /// Nominal phases `2εt`, ignoring any gate error.
    pub fn thetas(&self) -> Vec<f64> {
        self.times.iter().map(|t| 2.0 * self.epsilon * t).collect()
    }

    pub fn coherence(&self) -> Vec<Complex64> {
        self.sx.iter().zip(&self.sy).map(|(&x, &y)| Complex64::new(x, y)).collect()
    }

    /// The readouts as characteristic-function samples at nominal phases.
    pub fn samples(&self) -> CharFunctionSamples {
        CharFunctionSamples {
            thetas: self.thetas(),
            values: self.coherence(),
            provenance: if self.shots.is_some() {
                Provenance::ProbeShots
            } else {
                Provenance::ProbeExact
            },
        }
    }
}

/// `t_j = θ_j / (2ε(1+η))` for the uniform phases `θ_j = 2πj/M`. The
/// default `M` is the support width; pass `points` to oversample.
pub fn default_time_grid(
    obs: &ObservableSpec,
    n: usize,
    epsilon: f64,
    eta_known: f64,
    points: Option<usize>,
) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let gate = GateErrorModel::new(eta_known)?;
    let width = obs.support(n)?.width();
    let points = points.unwrap_or(width);
    if points < width {
        return input(format!("a grid of {points} points cannot resolve {width} support values"));
    }
    let scale = 2.0 * gate.effective_epsilon(epsilon);
    Ok(uniform_phases(points).into_iter().map(|th| th / scale).collect())
}

/// `points` equally spaced times on `[0, t_max]`.
pub fn linear_time_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|j| t_max * j as f64 / (points - 1) as f64).collect(),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return input(format!("ε must be positive, got {epsilon}"));
    }
    Ok(())
}

/// The characteristic function the exact probe reads. Observables without
/// a parameter deformation fall back to the enumeration oracle.
fn exact_charfunction(model: &ModelParams, obs: &ObservableSpec) -> Result<CharFunction> {
    match obs.kind {
        ObservableKind::Custom => {
            model.validate(false)?;
            let oracle = enumerate_oracle(model, obs)?;
            Ok(CharFunction::from_distribution(model, obs.kind, &oracle.distribution))
        }
        _ => CharFunction::new(model, obs),
    }
}

/// `sx + i·sy = F(2ε′t)` at every time.
pub fn simulate_probe_exact(
    model: &ModelParams,
    obs: &ObservableSpec,
    epsilon: f64,
    times: &[f64],
    gate: &GateErrorModel,
) -> Result<ProbeRecord> {
    check_epsilon(epsilon)?;
    GateErrorModel::new(gate.eta)?;
    let f = exact_charfunction(model, obs)?;
    let eps = gate.effective_epsilon(epsilon);
    let thetas: Vec<f64> = times.iter().map(|t| 2.0 * eps * t).collect();
    let values = f.sample(&thetas).values;
    Ok(ProbeRecord {
        model: *model,
        obs: obs.clone(),
        epsilon,
        eta: gate.eta,
        times: times.to_vec(),
        sx: values.iter().map(|v| v.re).collect(),
        sy: values.iter().map(|v| v.im).collect(),
        shots: None,
        seed: None,
        sampler: None,
    })
}

/// Relative phase `Ωt` between the probe's `|↓⟩` and `|↑⟩` after the
/// circuit for a fixed classical configuration.
///
/// The circuit is a global rotation by `2ε′ta`, then for each term a
/// rotation by `±2ε′tb` whose sign is the classical product of the term's
/// spins. All term rotations share one magnitude, so they are accumulated
/// as an integer count of signed rotations before scaling.
pub fn circuit_phase(
    config: &SpinConfig,
    obs: &ObservableSpec,
    epsilon: f64,
    t: f64,
    gate: &GateErrorModel,
) -> f64 {
    2.0 * gate.effective_epsilon(epsilon) * t * value_unchecked(config, obs)
}

/// Gates in one circuit: an `l`-body term takes `l` CNOTs to load the
/// product, one controlled rotation and `l` CNOTs to unload, counted as
/// `2l + 1`; a nonzero offset adds one global rotation. Single-spin terms
/// give three gates per spin.
pub fn gate_count(obs: &ObservableSpec) -> usize {
    let terms: usize = obs.terms.iter().map(|t| 2 * t.len() + 1).sum();
    terms + usize::from(obs.a != 0.0)
}

/// Shot-noise emulation. For each time point and each shot a fresh
/// equilibrium configuration sets the phase `Ωt`; a `σ_x` shot reads `+1`
/// with probability `(1 + cos Ωt)/2`, a `σ_y` shot (from a separate pool of
/// the same size) with `(1 + sin Ωt)/2`.
///
/// Time point `j` uses the ChaCha8 stream `j` of `seed`, so results do not
/// depend on thread scheduling.
pub fn simulate_probe_shots(
    model: &ModelParams,
    obs: &ObservableSpec,
    epsilon: f64,
    times: &[f64],
    shots: u64,
    gate: &GateErrorModel,
    seed: u64,
) -> Result<ProbeRecord> {
    check_epsilon(epsilon)?;
    GateErrorModel::new(gate.eta)?;
    obs.validate_for(model.n)?;
    if shots == 0 {
        return input("shots must be at least 1");
    }
    let template = GibbsSampler::new(model)?;
    let readouts: Vec<(f64, f64)> = times
        .par_iter()
        .enumerate()
        .map(|(j, &t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let mut sampler = template.clone();
            let mut average = |rng: &mut ChaCha8Rng, readout: fn(f64) -> f64| {
                let mut plus = 0u64;
                for _ in 0..shots {
                    let config = sampler.sample(rng);
                    let phase = circuit_phase(&config, obs, epsilon, t, gate);
                    if rng.random::<f64>() < 0.5 * (1.0 + readout(phase)) {
                        plus += 1;
                    }
                }
                (2.0 * plus as f64 - shots as f64) / shots as f64
            };
            let sx = average(&mut rng, f64::cos);
            let sy = average(&mut rng, f64::sin);
            (sx, sy)
        })
        .collect();
    Ok(ProbeRecord {
        model: *model,
        obs: obs.clone(),
        epsilon,
        eta: gate.eta,
        times: times.to_vec(),
        sx: readouts.iter().map(|r| r.0).collect(),
        sy: readouts.iter().map(|r| r.1).collect(),
        shots: Some(shots),
        seed: Some(seed),
        sampler: template.schedule(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfunc::charfunc;
    use crate::reconstruct::{invert_dft, invert_with_gate_error};
    use crate::spin::{observable_value, ObservableSpec};
    use proptest::prelude::*;

    #[test]
    fn exact_record_starts_at_one() {
        let model = ModelParams::ring(10, 1.0, 0.3, 1.0);
        let obs = ObservableSpec::magnetization(10);
        let rec = simulate_probe_exact(&model, &obs, 0.01, &[0.0, 5.0], &GateErrorModel::ideal()).unwrap();
        assert_eq!((rec.sx[0], rec.sy[0]), (1.0, 0.0));
        let f = charfunc(&model, &obs, 2.0 * 0.01 * 5.0).unwrap();
        assert_eq!((rec.sx[1], rec.sy[1]), (f.re, f.im));
    }

    #[test]
    fn exact_record_is_bit_consistent_with_charfunc() {
        for (model, obs) in [
            (ModelParams::ring(50, 1.0, 0.0, 1.0), ObservableSpec::magnetization(50)),
            (ModelParams::ring(50, 1.0, 10.0, 0.1), ObservableSpec::kink_number(50)),
            (ModelParams::long_range(20, 0.1, 0.1, 1.0), ObservableSpec::magnetization(20)),
        ] {
            let eps = 0.01;
            let times = default_time_grid(&obs, model.n, eps, 0.0, None).unwrap();
            let rec = simulate_probe_exact(&model, &obs, eps, &times, &GateErrorModel::ideal()).unwrap();
            for (j, &t) in times.iter().enumerate() {
                let f = charfunc(&model, &obs, 2.0 * eps * t).unwrap();
                assert_eq!(rec.sx[j], f.re);
                assert_eq!(rec.sy[j], f.im);
            }
        }
    }

    #[test]
    fn custom_observable_goes_through_the_oracle() {
        let model = ModelParams::ring(6, 0.8, 0.1, 1.0);
        let obs = ObservableSpec::open_kink_number(6);
        let times = default_time_grid(&obs, 6, 0.05, 0.0, None).unwrap();
        let rec = simulate_probe_exact(&model, &obs, 0.05, &times, &GateErrorModel::ideal()).unwrap();
        let dist = invert_dft(&rec.samples(), &obs, 6).unwrap();
        let oracle = enumerate_oracle(&model, &obs).unwrap().distribution;
        assert!(dist.total_variation(&oracle) < 1e-12);
    }

    #[test]
    fn pre_warped_grid_recovers_the_distribution() {
        let model = ModelParams::ring(20, 1.0, 0.1, 1.0);
        let obs = ObservableSpec::magnetization(20);
        let gate = GateErrorModel::new(0.02).unwrap();
        let times = default_time_grid(&obs, 20, 0.01, 0.02, None).unwrap();
        let rec = simulate_probe_exact(&model, &obs, 0.01, &times, &gate).unwrap();
        let fixed = invert_with_gate_error(&rec.samples(), 0.02, &obs, 20).unwrap();
        let oracle = enumerate_oracle(&model, &obs).unwrap().distribution;
        assert!(fixed.total_variation(&oracle) < 1e-9);
    }

    #[test]
    fn circuit_phase_examples() {
        let ideal = GateErrorModel::ideal();
        let up = SpinConfig::all_up(7);
        let m = ObservableSpec::magnetization(7);
        assert_eq!(circuit_phase(&up, &m, 0.3, 2.0, &ideal), 2.0 * 0.3 * 2.0 * 7.0);
        let alt = SpinConfig::new(vec![1, -1, 1, -1]).unwrap();
        let k = ObservableSpec::kink_number(4);
        assert_eq!(circuit_phase(&alt, &k, 0.01, 3.0, &ideal), 2.0 * 0.01 * 3.0 * 4.0);
        let bad = GateErrorModel::new(0.02).unwrap();
        let phase = circuit_phase(&up, &m, 0.01, 1.0, &bad);
        assert!((phase - 2.0 * 0.01 * 1.02 * 7.0).abs() < 1e-15);
    }

    #[test]
    fn gate_counts() {
        assert_eq!(gate_count(&ObservableSpec::magnetization(9)), 27);
        assert_eq!(gate_count(&ObservableSpec::kink_number(4)), 21);
    }

    #[test]
    fn gate_error_must_exceed_minus_one() {
        assert!(GateErrorModel::new(-1.0).is_err());
        assert!(GateErrorModel::new(f64::NAN).is_err());
        assert!(GateErrorModel::new(-0.5).is_ok());
    }

    #[test]
    fn many_shots_approach_the_expectation() {
        let model = ModelParams::ring(8, 1.0, 0.2, 1.0);
        let obs = ObservableSpec::magnetization(8);
        let t = [7.0];
        let shots = simulate_probe_shots(&model, &obs, 0.05, &t, 1_000_000, &GateErrorModel::ideal(), 1).unwrap();
        let exact = simulate_probe_exact(&model, &obs, 0.05, &t, &GateErrorModel::ideal()).unwrap();
        let bound = 4.0 / 1e3;
        assert!((shots.sx[0] - exact.sx[0]).abs() < bound);
        assert!((shots.sy[0] - exact.sy[0]).abs() < bound);
    }

    #[test]
    fn shots_are_deterministic() {
        let model = ModelParams::ring(6, 1.0, 0.1, 1.0);
        let obs = ObservableSpec::kink_number(6);
        let times = default_time_grid(&obs, 6, 0.02, 0.0, None).unwrap();
        let run = || simulate_probe_shots(&model, &obs, 0.02, &times, 500, &GateErrorModel::ideal(), 42).unwrap();
        assert_eq!(run(), run());
        let other = simulate_probe_shots(&model, &obs, 0.02, &times, 500, &GateErrorModel::ideal(), 43).unwrap();
        assert_ne!(run().sx, other.sx);
    }

    #[test]
    fn long_range_shot_record_carries_its_schedule() {
        let model = ModelParams::long_range(4, 0.2, 0.0, 1.0);
        let obs = ObservableSpec::magnetization(4);
        let rec = simulate_probe_shots(&model, &obs, 0.1, &[0.0, 1.0], 10, &GateErrorModel::ideal(), 0).unwrap();
        assert_eq!(rec.sampler, Some(MetropolisSchedule::for_size(4)));
        assert_eq!(rec.sx[0], 1.0);
    }

    proptest! {
        #[test]
        fn ideal_phase_is_exactly_two_eps_t_x(index in 0u64..4096, eps in 1e-3f64..1.0, t in 0.0f64..100.0) {
            let config = SpinConfig::from_index(index, 12);
            for obs in [ObservableSpec::magnetization(12), ObservableSpec::kink_number(12)] {
                let x = observable_value(&config, &obs).unwrap();
                prop_assert_eq!(circuit_phase(&config, &obs, eps, t, &GateErrorModel::ideal()), 2.0 * eps * t * x);
            }
        }
    }
}
