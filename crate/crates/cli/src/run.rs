use kinkprobe::charfunc::CumulantFlavor;
use kinkprobe::probe::linear_time_grid;
use kinkprobe::{
    closed_cumulants, cumulants_of, default_time_grid, enumerate_oracle, estimate_gate_error, exact_kink_mean,
    invert_dft, invert_with_gate_error, simulate_probe_exact, simulate_probe_shots, validate_distribution,
    Distribution, GateErrorModel, Method, ModelKind, ObservableKind, ProbeRecord, ValidationReport,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

/// Largest chain for the `--oracle` comparison.
pub const ORACLE_COMPARE_MAX_N: usize = 12;

/// Dense exact trace used to locate the coherence recurrence.
const ESTIMATION_POINTS: usize = 4001;

#[derive(Debug, Serialize)]
pub struct ClosedSection {
    pub flavor: CumulantFlavor,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct NumericalSection {
    pub method: &'static str,
    pub source: Method,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct OracleSection {
    pub method: Method,
    pub max_abs_deviation: f64,
    pub total_variation: f64,
}

#[derive(Debug, Serialize)]
pub struct GateErrorSection {
    pub eta: f64,
    pub corrected: bool,
    /// From the stretch of the first coherence recurrence.
    pub eta_estimated: Option<f64>,
    pub estimation_error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ValidationSection {
    #[serde(flatten)]
    pub report: ValidationReport,
    pub worst_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub observable: &'static str,
    pub closed: Option<ClosedSection>,
    pub closed_unavailable: Option<String>,
    /// Exact `⟨K⟩` including the finite-size correction (ring, `h = 0`).
    pub exact_kink_mean: Option<f64>,
    pub numerical: NumericalSection,
    pub validation: ValidationSection,
    pub gate_error: Option<GateErrorSection>,
    pub oracle: Option<OracleSection>,
    pub oracle_skipped: Option<String>,
}

pub struct Outcome {
    pub record: ProbeRecord,
    pub distribution: Distribution,
    pub summary: Summary,
}

/// Default validation tolerance: tight for exact readouts, a few standard
/// errors per support point with shot noise.
fn default_tolerance(shots: Option<u64>, width: usize) -> f64 {
    match shots {
        None => 1e-8,
        Some(s) => 5.0 * width as f64 / (s as f64).sqrt(),
    }
}

pub fn execute(config: &RunConfig) -> Result<Outcome, Failure> {
    config.validate()?;
    let model = config.model_params();
    let obs = config.observable()?;
    let n = config.n;
    let width = obs.support(n)?.width();
    let gate = GateErrorModel::new(config.eta)?;
    let warp = if config.correct_eta { config.eta } else { 0.0 };
    let times = default_time_grid(&obs, n, config.eps, warp, config.grid)?;

    let record = match config.shots {
        None => simulate_probe_exact(&model, &obs, config.eps, &times, &gate)?,
        Some(shots) => simulate_probe_shots(&model, &obs, config.eps, &times, shots, &gate, config.seed)?,
    };
    let samples = record.samples();
    let distribution = if config.correct_eta {
        invert_with_gate_error(&samples, config.eta, &obs, n)?
    } else {
        invert_dft(&samples, &obs, n)?
    };

    let report = validate_distribution(&distribution);
    let tolerance = config.tolerance.unwrap_or_else(|| default_tolerance(config.shots, width));
    let validation = ValidationSection {
        report,
        worst_defect: report.worst_defect(),
        tolerance,
        passed: report.within(tolerance),
    };

    let (closed, closed_unavailable) = match closed_cumulants(&model, &obs) {
        Ok(set) => (
            Some(ClosedSection {
                flavor: set.flavor,
                kappas: set.kappas,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let exact_kink_mean = (obs.kind == ObservableKind::KinkNumber
        && model.kind == ModelKind::NearestNeighborRing
        && model.h == 0.0)
        .then(|| exact_kink_mean(&model))
        .transpose()?;

    let gate_error = (config.eta != 0.0).then(|| {
        let estimate = estimate_eta(config, &gate);
        GateErrorSection {
            eta: config.eta,
            corrected: config.correct_eta,
            eta_estimated: estimate.as_ref().ok().copied(),
            estimation_error: estimate.err(),
        }
    });

    let (oracle, oracle_skipped) = if !config.oracle {
        (None, None)
    } else if n > ORACLE_COMPARE_MAX_N {
        (None, Some(format!("N = {n} exceeds the oracle comparison limit of {ORACLE_COMPARE_MAX_N}")))
    } else {
        let exact = enumerate_oracle(&model, &obs)?.distribution;
        let max_abs_deviation = exact
            .support_iter()
            .map(|(x, p)| (distribution.prob(x) - p).abs())
            .fold(0.0, f64::max);
        (
            Some(OracleSection {
                method: exact.method,
                max_abs_deviation,
                total_variation: distribution.total_variation(&exact),
            }),
            None,
        )
    };

    let summary = Summary {
        observable: obs.kind.name(),
        closed,
        closed_unavailable,
        exact_kink_mean,
        numerical: NumericalSection {
            method: "moments-of-reconstruction",
            source: distribution.method,
            kappas: cumulants_of(&distribution, 3),
        },
        validation,
        gate_error,
        oracle,
        oracle_skipped,
    };
    Ok(Outcome {
        record,
        distribution,
        summary,
    })
}

/// η from a dense exact trace over one full nominal period.
fn estimate_eta(config: &RunConfig, gate: &GateErrorModel) -> Result<f64, String> {
    let model = config.model_params();
    let obs = config.observable().map_err(|e| e.to_string())?;
    let times = linear_time_grid(std::f64::consts::PI / config.eps, ESTIMATION_POINTS);
    let dense = simulate_probe_exact(&model, &obs, config.eps, &times, gate).map_err(|e| e.to_string())?;
    estimate_gate_error(&dense).map_err(|e| e.to_string())
}
