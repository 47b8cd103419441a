//! JSON summaries and CSV tables written by the runner.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use upcon_core::analysis::{FitResult, G2Result, SpectrumScan};
use upcon_core::pipeline::{BudgetReport, SweepEntry};
use upcon_core::tcspc::CorrelationHistogram;

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub scenario: &'static str,
    pub seed: u64,
    pub config_hash: String,
    #[serde(flatten)]
    pub body: SummaryBody,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum SummaryBody {
    Budget {
        report: BudgetReport,
    },
    Spectrum {
        total_counts: u64,
        n_points: usize,
        deconvolved: bool,
    },
    Response {
        fwhm_nm: f64,
        sidelobe_ratio: f64,
        peak_counts: u64,
    },
    Lifetime {
        fit: FitResult,
        dynamic_range: f64,
        detected_signal_rate_hz: f64,
        signal_counts: u64,
        dark_counts: u64,
    },
    G2 {
        result: G2Result,
        pooled_seeds: Vec<u64>,
        per_seed_g2: Vec<f64>,
        rate_a_hz: f64,
        rate_b_hz: f64,
    },
    Sweep {
        entries: Vec<SweepEntry>,
        best_power_mw: f64,
        min_value_power_mw: f64,
    },
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

/// Histogram CSV: `bin_left_edge_ps,counts` plus a JSON metadata sidecar
/// (config, totals, duration).
pub fn write_histogram_csv(path: &Path, hist: &CorrelationHistogram) -> anyhow::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "bin_left_edge_ps,counts")?;
    for (i, c) in hist.counts().iter().enumerate() {
        writeln!(w, "{},{}", hist.config().bin_left_edge_ps(i), c)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct HistogramMeta<'a> {
    config: &'a upcon_core::tcspc::HistogramConfig,
    n_starts: u64,
    n_stops: u64,
    total_counts: u64,
    duration_ps: i64,
}

pub fn write_histogram_sidecar(path: &Path, hist: &CorrelationHistogram) -> anyhow::Result<()> {
    let meta = HistogramMeta {
        config: hist.config(),
        n_starts: hist.n_starts,
        n_stops: hist.n_stops,
        total_counts: hist.total_counts(),
        duration_ps: hist.duration_ps,
    };
    std::fs::write(path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

/// Two histograms side by side with their difference.
pub fn write_lifetime_csv(
    path: &Path,
    signal: &CorrelationHistogram,
    dark: &CorrelationHistogram,
) -> anyhow::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "bin_left_edge_ps,signal_counts,dark_counts,difference")?;
    for i in 0..signal.counts().len() {
        let s = signal.counts()[i];
        let d = dark.counts()[i];
        writeln!(
            w,
            "{},{},{},{}",
            signal.config().bin_left_edge_ps(i),
            s,
            d,
            s as i64 - d as i64
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv(
    path: &Path,
    scan: &SpectrumScan,
    background: Option<&SpectrumScan>,
    deconvolved: Option<&[f64]>,
) -> anyhow::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = String::from("pump_nm,inferred_signal_nm,counts");
    if background.is_some() {
        header.push_str(",background_counts,net_counts");
    }
    if deconvolved.is_some() {
        header.push_str(",deconvolved");
    }
    writeln!(w, "{header}")?;
    for i in 0..scan.counts.len() {
        let mut line = format!(
            "{},{},{}",
            scan.pump_wavelengths_nm[i], scan.inferred_signal_axis_nm[i], scan.counts[i]
        );
        if let Some(bg) = background {
            let net = scan.counts[i] as i64 - bg.counts[i] as i64;
            line.push_str(&format!(",{},{}", bg.counts[i], net));
        }
        if let Some(d) = deconvolved {
            line.push_str(&format!(",{}", d[i]));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, entries: &[SweepEntry]) -> anyhow::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "pump_power_mw,g2_zero,err,raw_suppression,raw_err,detected_rate_hz")?;
    for e in entries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.pump_power_mw,
            e.result.g2_zero,
            e.result.err,
            e.result.raw_suppression,
            e.result.raw_err,
            e.detected_rate_hz
        )?;
    }
    w.flush()?;
    Ok(())
}
