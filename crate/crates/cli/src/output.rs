use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use kinkprobe::{Distribution, ProbeRecord};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::run::{Outcome, Summary};
use crate::Failure;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("cannot write {}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn coherence_csv(record: &ProbeRecord) -> String {
    let mut s = String::from("t,theta,sx,sy\n");
    for (((t, theta), sx), sy) in record.times.iter().zip(record.thetas()).zip(&record.sx).zip(&record.sy) {
        let _ = writeln!(s, "{},{},{},{}", num(*t), num(theta), num(*sx), num(*sy));
    }
    s
}

pub fn distribution_csv(dist: &Distribution) -> String {
    let mut s = String::from("x,p\n");
    for (x, p) in dist.support_iter() {
        let _ = writeln!(s, "{x},{}", num(p));
    }
    s
}

#[derive(Serialize)]
struct CumulantsFile<'a> {
    model: kinkprobe::ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    custom_observable: Option<&'a kinkprobe::ObservableSpec>,
    epsilon: f64,
    shots: Option<u64>,
    seed: Option<u64>,
    sampler: Option<kinkprobe::probe::MetropolisSchedule>,
    distribution_method: kinkprobe::Method,
    #[serde(flatten)]
    summary: &'a Summary,
}

pub fn cumulants_json(outcome: &Outcome) -> String {
    let r = &outcome.record;
    let file = CumulantsFile {
        model: r.model,
        custom_observable: (r.obs.kind == kinkprobe::ObservableKind::Custom).then_some(&r.obs),
        epsilon: r.epsilon,
        shots: r.shots,
        seed: r.seed,
        sampler: r.sampler,
        distribution_method: outcome.distribution.method,
        summary: &outcome.summary,
    };
    serde_json::to_string_pretty(&file).expect("summary serializes") + "\n"
}

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 50.0;

fn polyline(points: impl Iterator<Item = (f64, f64)>, color: &str) -> String {
    let mut d = String::new();
    for (x, y) in points {
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
        d.trim_end()
    )
}

/// Coherence traces on top, distribution bars below.
pub fn plot_svg(record: &ProbeRecord, dist: &Distribution, title: &str) -> String {
    let height = 2.0 * PANEL_H + 3.0 * MARGIN;
    let inner_w = WIDTH - 2.0 * MARGIN;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"30\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n"
    );

    // coherence panel, y ∈ [−1, 1]
    let top = MARGIN;
    let t_max = record.times.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let px = |t: f64| MARGIN + inner_w * t / t_max;
    let py = |v: f64| top + PANEL_H * (1.0 - v) / 2.0;
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{top}\" width=\"{inner_w}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbb\"/>",
        py(0.0),
        MARGIN + inner_w,
        py(0.0)
    );
    s += &polyline(record.times.iter().zip(&record.sx).map(|(&t, &v)| (px(t), py(v))), "#c0392b");
    s += &polyline(record.times.iter().zip(&record.sy).map(|(&t, &v)| (px(t), py(v))), "#2c3e80");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">t (red: sx, blue: sy), t max {t_max:.4}</text>",
        MARGIN,
        top + PANEL_H + 16.0
    );

    // distribution panel
    let top = 2.0 * MARGIN + PANEL_H;
    let p_max = dist.probs.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let count = dist.probs.len().max(1) as f64;
    let bar_w = inner_w / count;
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{top}\" width=\"{inner_w}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"black\"/>"
    );
    for (i, &p) in dist.probs.iter().enumerate() {
        let h = PANEL_H * p.max(0.0) / p_max;
        if h <= 0.0 {
            continue;
        }
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#7d3c98\"/>",
            MARGIN + bar_w * i as f64,
            top + PANEL_H - h,
            (bar_w * 0.8).max(0.5),
            h
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">x from {} to {}, max P {p_max:.4}</text>",
        MARGIN,
        top + PANEL_H + 16.0,
        dist.support.min,
        dist.support.max
    );
    s + "</svg>\n"
}

pub fn write_all(config: &RunConfig, outcome: &Outcome, title: &str) -> Result<(), Failure> {
    let dir = &config.out;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let echoed = serde_json::to_string_pretty(config).expect("config serializes") + "\n";
    write(&dir.join("config.json"), &echoed)?;
    for format in &config.format {
        match format {
            Format::Csv => {
                write(&dir.join("coherence.csv"), &coherence_csv(&outcome.record))?;
                write(&dir.join("distribution.csv"), &distribution_csv(&outcome.distribution))?;
            }
            Format::Json => write(&dir.join("cumulants.json"), &cumulants_json(outcome))?,
            Format::Svg => write(
                &dir.join("plot.svg"),
                &plot_svg(&outcome.record, &outcome.distribution, title),
            )?,
        }
    }
    Ok(())
}
