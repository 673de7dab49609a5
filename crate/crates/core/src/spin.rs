//! Classical spin configurations, the two Ising Hamiltonians, diagonal
//! observables built from spin products, and the exhaustive-enumeration
//! oracle every other module is checked against.
//!
//! Site indices are zero-based throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::reconstruct::{Distribution, Method};

/// Largest chain the enumeration oracle accepts (2^24 configurations).
pub const ORACLE_MAX_N: usize = 24;

const INTEGER_TOL: f64 = 1e-12;

/// A configuration of `N` classical spins, each `-1` or `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return input("a spin configuration needs at least one spin");
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return input(format!("spin value {bad} is not -1 or +1"));
        }
        Ok(SpinConfig(spins))
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n])
    }

    /// Configuration number `index` of the `2^n` enumeration order: bit `i`
    /// set means spin `i` points down.
    pub fn from_index(index: u64, n: usize) -> Self {
        SpinConfig(
            (0..n)
                .map(|i| if (index >> i) & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flip(&mut self, site: usize) {
        self.0[site] = -self.0[site];
    }

    pub fn magnetization(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    /// Sum of `σ_n σ_{n+1}` over the periodic ring, wrap bond included.
    pub fn ring_bond_sum(&self) -> i64 {
        let n = self.0.len();
        (0..n)
            .map(|i| (self.0[i] * self.0[(i + 1) % n]) as i64)
            .sum()
    }

    pub fn product(&self, sites: &[usize]) -> i8 {
        sites.iter().fold(1, |acc, &i| acc * self.0[i])
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;

    fn try_from(spins: Vec<i8>) -> Result<Self> {
        SpinConfig::new(spins)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(config: SpinConfig) -> Self {
        config.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Nearest-neighbour chain with periodic boundary, `σ_{N+1} = σ_1`.
    #[serde(alias = "ring")]
    NearestNeighborRing,
    /// Equal-strength pair coupling between every two spins.
    #[serde(alias = "long-range")]
    LongRangeAllToAll,
}

/// Real couplings of a classical Ising model at inverse temperature `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub n: usize,
    pub j: f64,
    pub h: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn ring(n: usize, j: f64, h: f64, beta: f64) -> Self {
        ModelParams {
            kind: ModelKind::NearestNeighborRing,
            n,
            j,
            h,
            beta,
        }
    }

    pub fn long_range(n: usize, j: f64, h: f64, beta: f64) -> Self {
        ModelParams {
            kind: ModelKind::LongRangeAllToAll,
            n,
            j,
            h,
            beta,
        }
    }

    /// Checks `N ≥ 1`, finite couplings and `beta > 0` (or `beta ≥ 0` when
    /// the infinite-temperature limit is meaningful to the caller).
    pub fn validate(&self, allow_zero_beta: bool) -> Result<()> {
        if self.n == 0 {
            return input("N must be at least 1");
        }
        if !self.j.is_finite() || !self.h.is_finite() || !self.beta.is_finite() {
            return input("couplings and beta must be finite");
        }
        if self.beta < 0.0 || (self.beta == 0.0 && !allow_zero_beta) {
            return input(format!("beta must be positive, got {}", self.beta));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    Magnetization,
    KinkNumber,
    Custom,
}

impl ObservableKind {
    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Magnetization => "magnetization",
            ObservableKind::KinkNumber => "kink number",
            ObservableKind::Custom => "custom observable",
        }
    }
}

/// `X = a + b Σ_terms σ_{n1}···σ_{nl}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub kind: ObservableKind,
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Vec<usize>>,
}

/// Integer lattice `{min, min + stride, …, max}` that contains every value
/// an observable can take. `min` and `max` bound the declared support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub min: i64,
    pub max: i64,
    pub stride: i64,
}

impl Support {
    pub fn width(&self) -> usize {
        (self.max - self.min) as usize + 1
    }

    pub fn values(&self) -> impl Iterator<Item = i64> {
        self.min..=self.max
    }

    pub fn allows(&self, x: i64) -> bool {
        x >= self.min && x <= self.max && (x - self.min) % self.stride == 0
    }
}

impl ObservableSpec {
    pub fn magnetization(n: usize) -> Self {
        ObservableSpec {
            kind: ObservableKind::Magnetization,
            a: 0.0,
            b: 1.0,
            terms: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Kinks on the periodic ring, wrap bond `(N-1, 0)` included.
    pub fn kink_number(n: usize) -> Self {
        ObservableSpec {
            kind: ObservableKind::KinkNumber,
            a: n as f64 / 2.0,
            b: -0.5,
            terms: (0..n).map(|i| vec![i, (i + 1) % n]).collect(),
        }
    }

    /// Kinks along the open chain, without the wrap bond.
    pub fn open_kink_number(n: usize) -> Self {
        let bonds = n.saturating_sub(1);
        ObservableSpec {
            kind: ObservableKind::Custom,
            a: bonds as f64 / 2.0,
            b: -0.5,
            terms: (0..bonds).map(|i| vec![i, i + 1]).collect(),
        }
    }

    pub fn custom(a: f64, b: f64, terms: Vec<Vec<usize>>) -> Self {
        ObservableSpec {
            kind: ObservableKind::Custom,
            a,
            b,
            terms,
        }
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() {
            return input("observable offset and scale must be finite");
        }
        for term in &self.terms {
            if term.is_empty() {
                return input("observable terms must select at least one spin");
            }
            if let Some(&bad) = term.iter().find(|&&i| i >= n) {
                return input(format!("site index {bad} out of range for N = {n}"));
            }
        }
        Ok(())
    }

    /// Lattice of values for an integer-valued observable on `n` spins.
    pub fn support(&self, n: usize) -> Result<Support> {
        match self.kind {
            ObservableKind::Magnetization => Ok(Support {
                min: -(n as i64),
                max: n as i64,
                stride: 2,
            }),
            // Sign changes around a closed loop pair up.
            ObservableKind::KinkNumber => Ok(Support {
                min: 0,
                max: n as i64,
                stride: 2,
            }),
            ObservableKind::Custom => {
                let t = self.terms.len() as f64;
                let lo = self.a - self.b.abs() * t;
                let hi = self.a + self.b.abs() * t;
                let step = 2.0 * self.b.abs();
                let is_int = |v: f64| (v - v.round()).abs() < INTEGER_TOL;
                if !is_int(lo) || !is_int(step) || (self.terms.is_empty() && !is_int(self.a)) {
                    return input("custom observable is not integer-valued");
                }
                Ok(Support {
                    min: lo.round() as i64,
                    max: hi.round() as i64,
                    stride: (step.round() as i64).max(1),
                })
            }
        }
    }
}

/// `a + b·Σ products`. Integer-valued for magnetization and kinks.
pub fn observable_value(config: &SpinConfig, obs: &ObservableSpec) -> Result<f64> {
    obs.validate_for(config.len())?;
    Ok(value_unchecked(config, obs))
}

pub(crate) fn value_unchecked(config: &SpinConfig, obs: &ObservableSpec) -> f64 {
    let sum: i64 = obs
        .terms
        .iter()
        .map(|t| config.product(t) as i64)
        .sum();
    obs.a + obs.b * sum as f64
}

pub fn energy(model: &ModelParams, config: &SpinConfig) -> Result<f64> {
    if config.len() != model.n {
        return input(format!(
            "configuration has {} spins, model has N = {}",
            config.len(),
            model.n
        ));
    }
    Ok(energy_unchecked(model, config))
}

pub(crate) fn energy_unchecked(model: &ModelParams, config: &SpinConfig) -> f64 {
    let m = config.magnetization();
    let pair_sum = match model.kind {
        ModelKind::NearestNeighborRing => config.ring_bond_sum(),
        // Σ_{m<n} σ_m σ_n = (M² − N)/2
        ModelKind::LongRangeAllToAll => (m * m - model.n as i64) / 2,
    };
    -model.j * pair_sum as f64 - model.h * m as f64
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Natural log of the partition function.
    pub ln_z: f64,
    pub distribution: Distribution,
}

impl OracleResult {
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }
}

/// Brute-force sum over all `2^N` configurations: the exact partition
/// function and the exact histogram of `obs` under the Gibbs weights.
///
/// Weights are shifted by the ground-state Boltzmann exponent so large
/// `beta·J` does not overflow. Summation order is the configuration index.
pub fn enumerate_oracle(model: &ModelParams, obs: &ObservableSpec) -> Result<OracleResult> {
    model.validate(true)?;
    if model.n > ORACLE_MAX_N {
        return Err(Error::Size {
            n: model.n,
            max: ORACLE_MAX_N,
            what: "exhaustive enumeration",
        });
    }
    obs.validate_for(model.n)?;
    let support = obs.support(model.n)?;
    let count = 1u64 << model.n;

    let exponent = |config: &SpinConfig| -model.beta * energy_unchecked(model, config);
    let shift = (0..count)
        .map(|i| exponent(&SpinConfig::from_index(i, model.n)))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut hist = vec![0.0; support.width()];
    let mut total = 0.0;
    for i in 0..count {
        let config = SpinConfig::from_index(i, model.n);
        let w = (exponent(&config) - shift).exp();
        let x = value_unchecked(&config, obs).round() as i64;
        hist[(x - support.min) as usize] += w;
        total += w;
    }
    hist.iter_mut().for_each(|p| *p /= total);

    Ok(OracleResult {
        ln_z: shift + total.ln(),
        distribution: Distribution::new(support, hist, 0.0, Method::Enumeration),
    })
}
