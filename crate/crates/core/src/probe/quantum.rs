//! Probing a quantum register: the ancilla starts in `|+⟩`, the system in
//! `ρ`. The controlled unitary `|↑⟩⟨↑| ⊗ e^{iθX} + |↓⟩⟨↓| ⊗ 𝕀` followed
//! by a Hadamard on the ancilla leaves it in
//! `[𝕀 + σ_z Re F(θ) + σ_y Im F(θ)]/2`.
//!
//! Unlike the classical readout of `(σ_x, σ_y)`, the Hadamard maps the
//! real part onto `σ_z`.
//!
//! Basis index `s` of the system follows [`SpinConfig::from_index`]: bit `i`
//! set means qubit `i` is `|↓⟩`. The ancilla is the bit above the system
//! and `|↑⟩ = |0⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::spin::{enumerate_oracle, energy_unchecked, value_unchecked, ModelParams, ObservableSpec, SpinConfig};

/// Largest system the dense register simulates.
pub const REGISTER_MAX_N: usize = 14;

/// Largest system for the operator-norm Trotter probe.
pub const TROTTER_PROBE_MAX_N: usize = 6;

const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trotter {
    Exact,
    Steps(usize),
}

/// State of the probed system before coupling.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemState {
    /// `2^N` amplitudes.
    Pure(Vec<Complex64>),
    /// Probabilities of a state diagonal in the computational basis.
    Diagonal(Vec<f64>),
}

fn qubits_for(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return input(format!("state length {len} is not 2^N with N ≥ 1"));
    }
    let n = len.trailing_zeros() as usize;
    if n > REGISTER_MAX_N {
        return Err(Error::Size {
            n,
            max: REGISTER_MAX_N,
            what: "the dense quantum register",
        });
    }
    Ok(n)
}

impl SystemState {
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        let len = 1usize << n;
        qubits_for(len)?;
        if index as usize >= len {
            return input(format!("basis index {index} out of range for {n} qubits"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(SystemState::Pure(amps))
    }

    /// `ρ = e^{−βH}/Z` as a diagonal ensemble.
    pub fn thermal_ensemble(model: &ModelParams) -> Result<Self> {
        Ok(SystemState::Diagonal(gibbs_weights(model)?))
    }

    /// `Σ_s √p_s |s⟩`, the thermally weighted superposition.
    pub fn thermal_superposition(model: &ModelParams) -> Result<Self> {
        Ok(SystemState::Pure(
            gibbs_weights(model)?
                .into_iter()
                .map(|p| Complex64::new(p.sqrt(), 0.0))
                .collect(),
        ))
    }

    pub fn n(&self) -> Result<usize> {
        match self {
            SystemState::Pure(a) => qubits_for(a.len()),
            SystemState::Diagonal(p) => qubits_for(p.len()),
        }
    }

    fn validate(&self) -> Result<usize> {
        let n = self.n()?;
        let total = match self {
            SystemState::Pure(a) => a.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            SystemState::Diagonal(p) => {
                if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                    return input("ensemble probabilities must be non-negative");
                }
                p.iter().sum::<f64>()
            }
        };
        if (total - 1.0).abs() > NORM_TOL {
            return input(format!("state is not normalized: total {total}"));
        }
        Ok(n)
    }
}

fn gibbs_weights(model: &ModelParams) -> Result<Vec<f64>> {
    model.validate(true)?;
    if model.n > REGISTER_MAX_N {
        return Err(Error::Size {
            n: model.n,
            max: REGISTER_MAX_N,
            what: "the dense quantum register",
        });
    }
    let ln_z = enumerate_oracle(model, &ObservableSpec::magnetization(model.n))?.ln_z;
    Ok((0..1u64 << model.n)
        .map(|s| (-model.beta * energy_unchecked(model, &SpinConfig::from_index(s, model.n)) - ln_z).exp())
        .collect())
}

/// Ancilla plus `N` system qubits, `2^{N+1}` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRegister {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumRegister {
    /// `|+⟩ ⊗ ψ`
    pub fn with_plus_ancilla(system: &[Complex64]) -> Result<Self> {
        let n = qubits_for(system.len())?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut amplitudes: Vec<Complex64> = system.iter().map(|a| a * r).collect();
        amplitudes.extend(system.iter().map(|a| a * r));
        Ok(QuantumRegister { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies the ancilla-`|↑⟩` half by `e^{i·phase(s)}`.
    pub fn controlled_phase(&mut self, phase: impl Fn(u64) -> f64) {
        let half = 1usize << self.n;
        for (s, a) in self.amplitudes[..half].iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, phase(s as u64));
        }
    }

    pub fn hadamard_ancilla(&mut self) {
        let half = 1usize << self.n;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (up, down) = self.amplitudes.split_at_mut(half);
        for (a0, a1) in up.iter_mut().zip(down.iter_mut()) {
            let (x, y) = (*a0, *a1);
            *a0 = (x + y) * r;
            *a1 = (x - y) * r;
        }
    }

    /// `(⟨σ_z⟩, ⟨σ_y⟩)` of the ancilla.
    pub fn ancilla_expectations(&self) -> (f64, f64) {
        let half = 1usize << self.n;
        let (up, down) = self.amplitudes.split_at(half);
        up.iter().zip(down).fold((0.0, 0.0), |(z, y), (a0, a1)| {
            (z + a0.norm_sqr() - a1.norm_sqr(), y + 2.0 * (a0.conj() * a1).im)
        })
    }
}

/// Trotter steps, zero for the exact unitary.
fn controlled_gates(trotter: Trotter) -> Result<usize> {
    match trotter {
        Trotter::Exact => Ok(0),
        Trotter::Steps(0) => input("a Trotter product needs at least one step"),
        Trotter::Steps(m) => Ok(m),
    }
}

fn term_sign(s: u64, term: &[usize]) -> f64 {
    let flips = term.iter().filter(|&&i| (s >> i) & 1 == 1).count();
    if flips % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(⟨σ_z⟩, ⟨σ_y⟩) = (Re F(θ), Im F(θ))` of the ancilla after the controlled
/// evolution and a Hadamard.
///
/// With `Trotter::Steps(m)` the controlled unitary is applied gate by gate:
/// a global rotation by `θa`, then `m` rounds of one rotation by
/// `θb·P_term(s)/m` per term.
pub fn quantum_probe(state: &SystemState, obs: &ObservableSpec, theta: f64, trotter: Trotter) -> Result<(f64, f64)> {
    let n = state.validate()?;
    obs.validate_for(n)?;
    let steps = controlled_gates(trotter)?;
    let exact_phase = |s: u64| theta * value_unchecked(&SpinConfig::from_index(s, n), obs);

    match state {
        SystemState::Pure(system) => {
            let mut reg = QuantumRegister::with_plus_ancilla(system)?;
            if steps == 0 {
                reg.controlled_phase(exact_phase);
            } else {
                reg.controlled_phase(|_| theta * obs.a);
                let angle = theta * obs.b / steps as f64;
                for _ in 0..steps {
                    for term in &obs.terms {
                        reg.controlled_phase(|s| angle * term_sign(s, term));
                    }
                }
            }
            reg.hadamard_ancilla();
            Ok(reg.ancilla_expectations())
        }
        SystemState::Diagonal(probs) => {
            // a basis state stays put, so only the ancilla pair evolves
            let angle = theta * obs.b / steps.max(1) as f64;
            let mut z = 0.0;
            let mut y = 0.0;
            for (s, &p) in probs.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let s = s as u64;
                let phase = if steps == 0 {
                    Complex64::from_polar(1.0, exact_phase(s))
                } else {
                    let mut acc = Complex64::from_polar(1.0, theta * obs.a);
                    for _ in 0..steps {
                        for term in &obs.terms {
                            acc *= Complex64::from_polar(1.0, angle * term_sign(s, term));
                        }
                    }
                    acc
                };
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let (a0, a1) = (phase * r, Complex64::new(r, 0.0));
                let (h0, h1) = ((a0 + a1) * r, (a0 - a1) * r);
                z += p * (h0.norm_sqr() - h1.norm_sqr());
                y += p * 2.0 * (h0.conj() * h1).im;
            }
            Ok((z, y))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `X = a + b Σ_terms P_term` with each term a product of single-qubit
/// Pauli operators on distinct sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliObservable {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Vec<(usize, Pauli)>>,
}

impl PauliObservable {
    pub fn from_diagonal(obs: &ObservableSpec, n: usize) -> Result<Self> {
        obs.validate_for(n)?;
        Ok(PauliObservable {
            n,
            a: obs.a,
            b: obs.b,
            terms: obs
                .terms
                .iter()
                .map(|t| t.iter().map(|&i| (i, Pauli::Z)).collect())
                .collect(),
        })
    }

    /// `Σ_i Z_i Z_{i+1} + Σ_i X_i` on an open chain; neighbouring terms
    /// anticommute.
    pub fn mixed_axis_chain(n: usize) -> Self {
        let mut terms: Vec<Vec<(usize, Pauli)>> = (0..n.saturating_sub(1))
            .map(|i| vec![(i, Pauli::Z), (i + 1, Pauli::Z)])
            .collect();
        terms.extend((0..n).map(|i| vec![(i, Pauli::X)]));
        PauliObservable { n, a: 0.0, b: 1.0, terms }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > TROTTER_PROBE_MAX_N {
            return Err(Error::Size {
                n: self.n,
                max: TROTTER_PROBE_MAX_N,
                what: "the Trotter error probe",
            });
        }
        for term in &self.terms {
            let mut seen = vec![false; self.n];
            for &(i, _) in term {
                if i >= self.n || seen[i] {
                    return input(format!("Pauli term {term:?} has a bad or repeated site"));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }

    fn term_matrix(&self, term: &[(usize, Pauli)]) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            let mut target = s;
            let mut coeff = Complex64::new(1.0, 0.0);
            for &(i, p) in term {
                let bit = (s >> i) & 1;
                match p {
                    Pauli::X => target ^= 1 << i,
                    Pauli::Y => {
                        target ^= 1 << i;
                        coeff *= if bit == 0 { Complex64::i() } else { -Complex64::i() };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            coeff = -coeff;
                        }
                    }
                }
            }
            m[(target, s)] = coeff;
        }
        m
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::from(self.a);
        for term in &self.terms {
            m += self.term_matrix(term) * Complex64::from(self.b);
        }
        m
    }
}

/// `‖e^{iθX} − e^{iθa}(Π_terms e^{iθbP/m})^m‖` in the operator norm.
pub fn trotter_error_probe(obs: &PauliObservable, theta: f64, m: usize) -> Result<f64> {
    obs.validate()?;
    if m == 0 {
        return input("a Trotter product needs at least one step");
    }
    let dim = 1usize << obs.n;
    let exact = (obs.matrix() * Complex64::new(0.0, theta)).exp();

    // e^{iφP} = cos φ 𝕀 + i sin φ P for P² = 𝕀
    let phi = theta * obs.b / m as f64;
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    let mut step = identity.clone();
    for term in &obs.terms {
        let factor = &identity * Complex64::from(phi.cos()) + obs.term_matrix(term) * Complex64::new(0.0, phi.sin());
        step = factor * step;
    }
    let mut product = identity * Complex64::from_polar(1.0, theta * obs.a);
    for _ in 0..m {
        product = &step * product;
    }
    let diff = exact - product;
    Ok(diff.singular_values().max())
}
