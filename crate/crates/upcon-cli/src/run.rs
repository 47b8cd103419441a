//! Scenario dispatch: run the configured experiment and write its artifact
//! files. Identical config and seed produce byte-identical outputs.

use std::path::{Path, PathBuf};

use anyhow::Context;

use upcon_core::events::EventStream;
use upcon_core::pipeline::{
    g2_vs_power, pooled_seeds, run_budget, run_g2_histogram, run_lifetime_ingaas,
    run_lifetime_si, run_response, run_spectrum,
};
use upcon_core::tcspc::merge;

use crate::config::{ResolvedConfig, ScenarioConfig, ScenarioKind};
use crate::phes;
use crate::report::{self, RunSummary, SummaryBody};

pub struct RunOptions {
    pub out_dir: PathBuf,
    pub emit_events: bool,
}

/// Run one scenario end to end, returning the list of files written.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions) -> anyhow::Result<Vec<PathBuf>> {
    let resolved = config.resolve();
    std::fs::create_dir_all(&opts.out_dir)
        .with_context(|| format!("creating output directory {}", opts.out_dir.display()))?;
    let hash = config.config_hash();
    let mut written = Vec::new();

    let summary_body = match resolved.scenario {
        ScenarioKind::Budget => {
            let report = run_budget(
                &resolved.emitter,
                &resolved.qpm,
                &resolved.budget,
                &resolved.si,
                resolved.g2.line_nm,
            )?;
            SummaryBody::Budget { report }
        }
        ScenarioKind::Spectrum => {
            let outcome = run_spectrum(
                &resolved.spectrum,
                &resolved.qpm,
                &resolved.budget,
                &resolved.si,
                resolved.seed,
            )?;
            let csv = opts.out_dir.join("spectrum.csv");
            report::write_spectrum_csv(&csv, &outcome.scan, None, outcome.deconvolved.as_deref())?;
            written.push(csv);
            SummaryBody::Spectrum {
                total_counts: outcome.scan.counts.iter().sum(),
                n_points: outcome.scan.counts.len(),
                deconvolved: outcome.deconvolved.is_some(),
            }
        }
        ScenarioKind::InstrumentResponse => {
            let outcome = run_response(
                &resolved.response,
                &resolved.qpm,
                &resolved.budget,
                &resolved.si,
                resolved.seed,
            )?;
            let csv = opts.out_dir.join("response.csv");
            report::write_spectrum_csv(&csv, &outcome.scan, Some(&outcome.background), None)?;
            written.push(csv);
            SummaryBody::Response {
                fwhm_nm: outcome.fwhm_nm,
                sidelobe_ratio: outcome.sidelobe_ratio,
                peak_counts: outcome.scan.counts.iter().copied().max().unwrap_or(0),
            }
        }
        ScenarioKind::LifetimeSi | ScenarioKind::LifetimeIngaas => {
            let outcome = if resolved.scenario == ScenarioKind::LifetimeSi {
                run_lifetime_si(
                    &resolved.lifetime,
                    &resolved.emitter,
                    &resolved.qpm,
                    &resolved.budget,
                    &resolved.si,
                    resolved.g2.line_nm,
                    resolved.seed,
                )?
            } else {
                run_lifetime_ingaas(
                    &resolved.lifetime,
                    &resolved.emitter,
                    &resolved.ingaas,
                    resolved.seed,
                )?
            };
            let csv = opts.out_dir.join("lifetime.csv");
            report::write_lifetime_csv(&csv, &outcome.signal_hist, &outcome.dark_hist)?;
            written.push(csv);
            let meta = opts.out_dir.join("lifetime.meta.json");
            report::write_histogram_sidecar(&meta, &outcome.signal_hist)?;
            written.push(meta);
            if opts.emit_events {
                written.push(dump_events(
                    &opts.out_dir,
                    "clicks",
                    &outcome.clicks,
                    resolved.seed,
                )?);
            }
            SummaryBody::Lifetime {
                fit: outcome.fit,
                dynamic_range: outcome.dynamic_range,
                detected_signal_rate_hz: outcome.detected_signal_rate_hz,
                signal_counts: outcome.signal_hist.total_counts(),
                dark_counts: outcome.dark_hist.total_counts(),
            }
        }
        ScenarioKind::G2 => {
            let seeds = pooled_seeds(resolved.seed, resolved.pool);
            let mut pooled = None;
            let mut per_seed_g2 = Vec::new();
            let mut first_arms: Option<(EventStream, EventStream)> = None;
            let mut clicks_a = 0usize;
            let mut clicks_b = 0usize;
            for &seed in &seeds {
                let data = run_g2_histogram(
                    &resolved.g2,
                    &resolved.emitter,
                    &resolved.qpm,
                    &resolved.budget,
                    &resolved.si,
                    seed,
                )?;
                per_seed_g2.push(
                    upcon_core::analysis::extract_g2(&data.hist, &resolved.g2.windows)?.g2_zero,
                );
                clicks_a += data.clicks_a.len();
                clicks_b += data.clicks_b.len();
                pooled = Some(match pooled {
                    Some(acc) => merge(&acc, &data.hist)?,
                    None => data.hist,
                });
                if first_arms.is_none() {
                    first_arms = Some((data.clicks_a, data.clicks_b));
                }
            }
            let pooled = pooled.expect("pool >= 1");
            let result = upcon_core::analysis::extract_g2(&pooled, &resolved.g2.windows)?;
            let csv = opts.out_dir.join("g2_histogram.csv");
            report::write_histogram_csv(&csv, &pooled)?;
            written.push(csv);
            let meta = opts.out_dir.join("g2_histogram.meta.json");
            report::write_histogram_sidecar(&meta, &pooled)?;
            written.push(meta);
            if opts.emit_events {
                let (a, b) = first_arms.expect("at least one seed ran");
                written.push(dump_events(&opts.out_dir, "clicks_arm_a", &a, seeds[0])?);
                written.push(dump_events(&opts.out_dir, "clicks_arm_b", &b, seeds[0])?);
            }
            let total_s = resolved.g2.duration_s * seeds.len() as f64;
            SummaryBody::G2 {
                result,
                pooled_seeds: seeds,
                per_seed_g2,
                rate_a_hz: clicks_a as f64 / total_s,
                rate_b_hz: clicks_b as f64 / total_s,
            }
        }
        ScenarioKind::G2PowerSweep => {
            let outcome = g2_vs_power(
                &resolved.sweep_powers_mw,
                &resolved.g2,
                &resolved.emitter,
                &resolved.qpm,
                &resolved.budget,
                &resolved.si,
                resolved.seed,
            )?;
            let csv = opts.out_dir.join("sweep.csv");
            report::write_sweep_csv(&csv, &outcome.entries)?;
            written.push(csv);
            SummaryBody::Sweep {
                entries: outcome.entries,
                best_power_mw: outcome.best_power_mw,
                min_value_power_mw: outcome.min_value_power_mw,
            }
        }
    };

    let summary = RunSummary {
        scenario: resolved.scenario.as_str(),
        seed: resolved.seed,
        config_hash: hash,
        body: summary_body,
    };
    let path = opts.out_dir.join("summary.json");
    report::write_summary(&path, &summary)?;
    written.push(path);
    Ok(written)
}

fn dump_events(
    dir: &Path,
    label: &str,
    stream: &EventStream,
    seed: u64,
) -> anyhow::Result<PathBuf> {
    let path = dir.join(format!("{label}.phes"));
    phes::write_events(&path, stream, seed)
        .with_context(|| format!("writing event dump {}", path.display()))?;
    Ok(path)
}

/// Expose the resolved config for tests and tools.
pub fn resolve(config: &ScenarioConfig) -> ResolvedConfig {
    config.resolve()
}
