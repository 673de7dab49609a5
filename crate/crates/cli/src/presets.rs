//! Named parameter sets for the published figures. The coupling `J = 1`
//! throughout; every preset reads exact expectations.

use clap::ValueEnum;

use crate::config::{ModelChoice, ObsChoice, RunConfig};

/// Phase points per preset trace; oversamples every support in use.
pub const PRESET_GRID: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig2b,
    Fig2c,
    Fig3b,
    Fig3c,
    #[value(name = "sm-m-a")]
    SmMA,
    #[value(name = "sm-m-b")]
    SmMB,
    #[value(name = "sm-m-c")]
    SmMC,
    #[value(name = "sm-m-d")]
    SmMD,
    #[value(name = "sm-k-a")]
    SmKA,
    #[value(name = "sm-k-b")]
    SmKB,
    SmError,
}

impl Preset {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    pub fn title(self) -> &'static str {
        match self {
            Preset::Fig2b => "ring, magnetization, N=50, beta=1, h=0",
            Preset::Fig2c => "ring, magnetization, N=50, beta=1, h=0.2",
            Preset::Fig3b => "ring, kink number, N=50, beta=0.1, h=0",
            Preset::Fig3c => "ring, kink number, N=50, beta=0.1, h=10",
            Preset::SmMA => "all-to-all, magnetization, N=50, beta=0.01, h=0",
            Preset::SmMB => "all-to-all, magnetization, N=50, beta=0.03, h=0",
            Preset::SmMC => "all-to-all, magnetization, N=50, beta=0.01, h=10",
            Preset::SmMD => "all-to-all, magnetization, N=50, beta=0.03, h=2",
            Preset::SmKA => "all-to-all, kink number, N=20, beta=0.05, h=0",
            Preset::SmKB => "all-to-all, kink number, N=20, beta=0.05, h=10",
            Preset::SmError => "ring, magnetization, N=20, beta=1, h=0.1, eta=0.02 corrected",
        }
    }

    pub fn config(self) -> RunConfig {
        use ModelChoice::{LongRange, Ring};
        use ObsChoice::{Kinks, Magnetization};
        let (model, obs, n, beta, h) = match self {
            Preset::Fig2b => (Ring, Magnetization, 50, 1.0, 0.0),
            Preset::Fig2c => (Ring, Magnetization, 50, 1.0, 0.2),
            Preset::Fig3b => (Ring, Kinks, 50, 0.1, 0.0),
            Preset::Fig3c => (Ring, Kinks, 50, 0.1, 10.0),
            Preset::SmMA => (LongRange, Magnetization, 50, 0.01, 0.0),
            Preset::SmMB => (LongRange, Magnetization, 50, 0.03, 0.0),
            Preset::SmMC => (LongRange, Magnetization, 50, 0.01, 10.0),
            Preset::SmMD => (LongRange, Magnetization, 50, 0.03, 2.0),
            Preset::SmKA => (LongRange, Kinks, 20, 0.05, 0.0),
            Preset::SmKB => (LongRange, Kinks, 20, 0.05, 10.0),
            Preset::SmError => (Ring, Magnetization, 20, 1.0, 0.1),
        };
        let eta = if self == Preset::SmError { 0.02 } else { 0.0 };
        RunConfig {
            command: format!("repro {}", self.name()),
            model,
            obs,
            n,
            j: 1.0,
            h,
            beta,
            eps: 0.01,
            eta,
            correct_eta: eta != 0.0,
            grid: Some(PRESET_GRID),
            out: std::path::PathBuf::from(format!("repro-{}", self.name())),
            format: vec![crate::config::Format::Csv, crate::config::Format::Json, crate::config::Format::Svg],
            ..RunConfig::default()
        }
    }
}
