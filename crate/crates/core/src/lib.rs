//! Full counting statistics of classical Ising-chain observables.
//!
//! The distribution of an observable `X` follows from its characteristic
//! function `F(θ) = ⟨e^{iθX}⟩`, which for the magnetization and the kink
//! number is a ratio of partition functions at complex couplings. A probe
//! qubit coupled to the chain measures the same `F(θ)` as its coherence.
//!
//! ```
//! use kinkprobe::{build_theta_grid, charfunc_samples, invert_dft, ModelParams, ObservableSpec};
//!
//! let model = ModelParams::ring(12, 1.0, 0.2, 1.0);
//! let obs = ObservableSpec::magnetization(12);
//! let grid = build_theta_grid(&obs, 12)?;
//! let samples = charfunc_samples(&model, &obs, &grid.thetas)?;
//! let dist = invert_dft(&samples, &obs, 12)?;
//! assert!((dist.total() - 1.0).abs() < 1e-12);
//! assert!(dist.prob(3).abs() < 1e-12); // wrong parity
//! # Ok::<(), kinkprobe::Error>(())
//! ```

pub mod charfunc;
pub mod error;
pub mod partition;
pub mod probe;
pub mod reconstruct;
pub mod spin;

pub use charfunc::{
    charfunc, charfunc_samples, closed_cumulants, cumulants_of, exact_kink_mean, joint_counts, numerical_cumulants,
    CharFunction, CharFunctionSamples, CumulantFlavor, CumulantSet, Provenance,
};
pub use error::{Error, Result};
pub use partition::{loschmidt_amplitude, partition_longrange, partition_nn, transfer_spectrum, ComplexParams, Scaled};
pub use probe::quantum::{quantum_probe, trotter_error_probe, PauliObservable, SystemState, Trotter};
pub use probe::{
    circuit_phase, default_time_grid, gibbs_sample, simulate_probe_exact, simulate_probe_shots, GateErrorModel,
    ProbeRecord,
};
pub use reconstruct::{
    build_theta_grid, estimate_gate_error, gaussian_approx, invert_dft, invert_with_gate_error, validate_distribution,
    Distribution, Method, ValidationReport,
};
pub use spin::{
    enumerate_oracle, observable_value, ModelKind, ModelParams, ObservableKind, ObservableSpec, SpinConfig, Support,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/charfunc.md")]
    mod charfunc {}
    #[doc = include_str!("../../../book/src/reconstruct.md")]
    mod reconstruct {}
    #[doc = include_str!("../../../book/src/probe.md")]
    mod probe {}
    #[doc = include_str!("../../../book/src/quantum.md")]
    mod quantum {}
}
