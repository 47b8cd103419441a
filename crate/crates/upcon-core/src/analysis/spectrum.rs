//! Upconversion spectroscopy: scanned-pump spectra, the instrument-response
//! profile, and Richardson–Lucy deconvolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{overall_detection_efficiency, EfficiencyBudget};
use crate::rng::{CounterRng, StreamId};
use crate::upconversion::{internal_efficiency, qpm_transfer, asr_background_rate, QpmParams};

/// One emission line entering the upconverter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub wavelength_nm: f64,
    /// Photon flux in fiber, photons/s.
    pub flux_hz: f64,
}

/// A scanned-pump spectrum: detected counts per pump step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub pump_wavelengths_nm: Vec<f64>,
    pub dwell_s: f64,
    pub counts: Vec<u64>,
    /// Signal wavelength each pump step phase-matches, via the center map.
    pub inferred_signal_axis_nm: Vec<f64>,
}

impl SpectrumScan {
    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Simulate one scanned-pump spectrum: at each pump step the expected count
/// is the sum over lines of flux x overall efficiency x spectral acceptance,
/// plus the pump-power background, all times the dwell, Poisson-sampled.
pub fn assemble_spectrum(
    lines: &[SpectralLine],
    pump_grid_nm: &[f64],
    qpm: &QpmParams,
    budget: &EfficiencyBudget,
    dark_rate_hz: f64,
    dwell_s: f64,
    noise_seed: Option<u64>,
) -> Result<SpectrumScan> {
    qpm.validate()?;
    budget.validate()?;
    if pump_grid_nm.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("pump grid must be strictly increasing".into()));
    }
    if !(dwell_s > 0.0) {
        return Err(Error::Config("dwell_s must be positive".into()));
    }
    let eta_int = internal_efficiency(qpm.pump_power_mw, qpm);
    let overall = overall_detection_efficiency(budget, eta_int);
    let background = asr_background_rate(qpm.pump_power_mw, qpm) + dark_rate_hz;

    let mut counts = Vec::with_capacity(pump_grid_nm.len());
    let mut axis = Vec::with_capacity(pump_grid_nm.len());
    for (i, &pump) in pump_grid_nm.iter().enumerate() {
        let center = qpm.qpm_center_nm(pump);
        axis.push(center);
        let mut expected = background * dwell_s;
        for line in lines {
            let transfer = qpm_transfer(line.wavelength_nm - center, qpm.acceptance_fwhm_nm);
            expected += line.flux_hz * overall * transfer * dwell_s;
        }
        let c = match noise_seed {
            Some(seed) => {
                let mut rng = CounterRng::keyed(seed, StreamId::SpectrumNoise, i as u64);
                crate::emitter::sample_poisson(expected, &mut rng)
            }
            None => expected.round() as u64,
        };
        counts.push(c);
    }
    Ok(SpectrumScan {
        pump_wavelengths_nm: pump_grid_nm.to_vec(),
        dwell_s,
        counts,
        inferred_signal_axis_nm: axis,
    })
}

/// Sample the sinc² acceptance onto a symmetric kernel with the given grid
/// step, for use as the deconvolution response. Returns the kernel and the
/// index of its center tap.
pub fn sample_response_kernel(acceptance_fwhm_nm: f64, step_nm: f64) -> (Vec<f64>, usize) {
    // Carry the kernel out to the third zero; beyond that the response is
    // below 1e-3 and only adds noise amplification.
    let half_taps = ((3.0 * acceptance_fwhm_nm * 1.13) / step_nm).ceil() as usize;
    let mut kernel = Vec::with_capacity(2 * half_taps + 1);
    for i in 0..=(2 * half_taps) {
        let d = (i as f64 - half_taps as f64) * step_nm;
        kernel.push(qpm_transfer(d, acceptance_fwhm_nm));
    }
    let sum: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= sum;
    }
    (kernel, half_taps)
}

/// Richardson–Lucy deconvolution of a nonnegative signal by a normalized
/// response kernel. Zero iterations return the input unchanged; the output
/// stays nonnegative and conserves total flux.
pub fn deconvolve(
    observed: &[f64],
    kernel: &[f64],
    kernel_center: usize,
    iterations: usize,
) -> Result<Vec<f64>> {
    if kernel.is_empty() || kernel.iter().all(|&k| k <= 0.0) {
        return Err(Error::Config("deconvolution response must be non-zero".into()));
    }
    if kernel.iter().any(|&k| k < 0.0) {
        return Err(Error::Config("deconvolution response must be nonnegative".into()));
    }
    if kernel_center >= kernel.len() {
        return Err(Error::Config("kernel center index out of range".into()));
    }
    if observed.iter().any(|&y| y < 0.0) {
        return Err(Error::Precondition("observed spectrum must be nonnegative".into()));
    }
    let ksum: f64 = kernel.iter().sum();
    let n = observed.len();
    let mut estimate: Vec<f64> = observed.to_vec();

    // Per-position kernel mass inside the domain, for edge renormalization.
    let mut mass = vec![0.0f64; n];
    for (j, m) in mass.iter_mut().enumerate() {
        for (t, &k) in kernel.iter().enumerate() {
            let i = j as i64 + t as i64 - kernel_center as i64;
            if (0..n as i64).contains(&i) {
                *m += k;
            }
        }
        *m /= ksum;
    }

    let mut blurred = vec![0.0f64; n];
    let mut ratio = vec![0.0f64; n];
    for _ in 0..iterations {
        // blurred = K * estimate (kernel centered at kernel_center)
        for b in blurred.iter_mut() {
            *b = 0.0;
        }
        for (j, &e) in estimate.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            for (t, &k) in kernel.iter().enumerate() {
                let i = j as i64 + t as i64 - kernel_center as i64;
                if (0..n as i64).contains(&i) {
                    blurred[i as usize] += e * k / ksum;
                }
            }
        }
        for i in 0..n {
            ratio[i] = if blurred[i] > 0.0 { observed[i] / blurred[i] } else { 0.0 };
        }
        // estimate *= K^T * ratio, with edge renormalization by the local
        // kernel mass so a flat field stays flat and flux is conserved.
        for (j, e) in estimate.iter_mut().enumerate() {
            if *e == 0.0 {
                continue;
            }
            let mut corr = 0.0;
            for (t, &k) in kernel.iter().enumerate() {
                let i = j as i64 + t as i64 - kernel_center as i64;
                if (0..n as i64).contains(&i) {
                    corr += ratio[i as usize] * k / ksum;
                }
            }
            *e *= corr / mass[j];
        }
        // Flux renormalization against edge leakage (sub-0.1% effect).
        let target: f64 = observed.iter().sum();
        let got: f64 = estimate.iter().sum();
        if got > 0.0 {
            let scale = target / got;
            for e in estimate.iter_mut() {
                *e *= scale;
            }
        }
    }
    Ok(estimate)
}

/// Full width at half maximum of a sampled profile by linear interpolation
/// of the half-max crossings around the global peak. The baseline is taken
/// as zero; subtract backgrounds first.
pub fn profile_fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 5 {
        return Err(Error::Precondition("profile needs at least 5 samples".into()));
    }
    let (peak_idx, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if peak <= 0.0 {
        return Err(Error::Precondition("profile has no positive peak".into()));
    }
    let half = peak / 2.0;
    let crossing = |mut i: usize, step: isize| -> Result<f64> {
        loop {
            let j = i as isize + step;
            if j < 0 || j as usize >= y.len() {
                return Err(Error::Precondition(
                    "half-max crossing not bracketed by the scan".into(),
                ));
            }
            let j = j as usize;
            if (y[i] >= half) != (y[j] >= half) {
                let f = (half - y[i]) / (y[j] - y[i]);
                return Ok(x[i] + f * (x[j] - x[i]));
            }
            i = j;
        }
    };
    let left = crossing(peak_idx, -1)?;
    let right = crossing(peak_idx, 1)?;
    Ok(right - left)
}

/// Height of the first sidelobe relative to the main peak: past the first
/// minimum on each side of the peak, take the maximum sample; average the
/// two sides. Baseline must already be subtracted.
pub fn first_sidelobe_ratio(y: &[f64]) -> Result<f64> {
    if y.len() < 7 {
        return Err(Error::Precondition("profile needs at least 7 samples".into()));
    }
    let (peak_idx, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if peak <= 0.0 {
        return Err(Error::Precondition("profile has no positive peak".into()));
    }
    let side = |dir: isize| -> Option<f64> {
        let mut i = peak_idx as isize;
        // descend to the first local minimum
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= y.len() {
                return None;
            }
            if y[j as usize] > y[i as usize] {
                break;
            }
            i = j;
        }
        // climb to the sidelobe maximum
        let mut best = y[i as usize];
        let mut j = i;
        loop {
            let k = j + dir;
            if k < 0 || k as usize >= y.len() {
                break;
            }
            if y[k as usize] < y[j as usize] && y[j as usize] == best {
                // passed the sidelobe top
            }
            if y[k as usize] > best {
                best = y[k as usize];
            }
            if y[k as usize] < best * 0.5 {
                break; // well past the lobe
            }
            j = k;
        }
        Some(best)
    };
    let lobes: Vec<f64> = [side(-1), side(1)].into_iter().flatten().collect();
    if lobes.is_empty() {
        return Err(Error::Precondition("no sidelobe visible in the scan".into()));
    }
    Ok(lobes.iter().sum::<f64>() / lobes.len() as f64 / peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::upconversion::SINC2_SIDELOBE_VALUE;

    fn default_setup() -> (QpmParams, EfficiencyBudget) {
        (QpmParams::default(), EfficiencyBudget::default())
    }

    #[test]
    fn single_line_on_center_without_noise_is_exact() {
        let (qpm, budget) = default_setup();
        let qpm = QpmParams { asr_coeff_hz_per_mw: 0.0, ..qpm };
        let lines = [SpectralLine { wavelength_nm: 1302.6, flux_hz: 1e4 }];
        // Grid step 0.1 nm containing the exact center 1556.8.
        let grid: Vec<f64> = (0..11).map(|i| 1556.3 + 0.1 * i as f64).collect();
        let scan = assemble_spectrum(&lines, &grid, &qpm, &budget, 0.0, 1.0, None).unwrap();
        let peak = *scan.counts.iter().max().unwrap();
        let expected = (1e4 * 0.2100260988f64).round() as u64;
        assert_eq!(peak, expected);
        // The inferred axis maps the reference pump to the anchored line.
        let i = scan
            .pump_wavelengths_nm
            .iter()
            .position(|&p| (p - 1556.8).abs() < 1e-9)
            .unwrap();
        assert!((scan.inferred_signal_axis_nm[i] - 1302.6).abs() < 1e-9);
    }

    #[test]
    fn delta_line_scan_recovers_transfer_function_pointwise() {
        // The instrument-response experiment: a delta line scanned across
        // the acceptance reproduces the sinc² transfer point-wise within
        // Poisson error.
        let (qpm, budget) = default_setup();
        let qpm = QpmParams { asr_coeff_hz_per_mw: 0.0, ..qpm };
        let flux = 1e6;
        let lines = [SpectralLine { wavelength_nm: 1302.6, flux_hz: flux }];
        let grid: Vec<f64> = (0..81).map(|i| 1556.0 + 0.02 * i as f64).collect();
        let scan = assemble_spectrum(&lines, &grid, &qpm, &budget, 0.0, 1.0, Some(33)).unwrap();
        let overall = 0.2100260988;
        for (i, &pump) in scan.pump_wavelengths_nm.iter().enumerate() {
            let center = qpm.qpm_center_nm(pump);
            let expected = flux * overall * qpm_transfer(1302.6 - center, 0.35);
            let sigma = expected.max(1.0).sqrt();
            let got = scan.counts[i] as f64;
            assert!(
                (got - expected).abs() < 5.0 * sigma + 1.0,
                "step {i}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn two_lines_one_nm_apart_resolve_into_two_maxima() {
        let (qpm, budget) = default_setup();
        let lines = [
            SpectralLine { wavelength_nm: 1301.6, flux_hz: 7e3 },
            SpectralLine { wavelength_nm: 1302.6, flux_hz: 1e4 },
        ];
        let grid: Vec<f64> = (0..50).map(|i| 1555.0 + 0.1 * i as f64).collect();
        let scan = assemble_spectrum(&lines, &grid, &qpm, &budget, 100.0, 1.0, Some(7)).unwrap();
        // Count strict local maxima above half the global peak.
        let c = scan.counts_f64();
        let peak = c.iter().cloned().fold(0.0, f64::max);
        let mut maxima = 0;
        for i in 1..c.len() - 1 {
            if c[i] > c[i - 1] && c[i] >= c[i + 1] && c[i] > 0.4 * peak {
                maxima += 1;
            }
        }
        assert_eq!(maxima, 2, "expected two resolved lines");
    }

    #[test]
    fn deconvolve_zero_iterations_is_identity() {
        let (kernel, center) = sample_response_kernel(0.35, 0.1);
        let y = vec![1.0, 5.0, 9.0, 5.0, 1.0];
        let out = deconvolve(&y, &kernel, center, 0).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn deconvolve_concentrates_self_blurred_delta() {
        // The response observed through itself converges toward a spike:
        // at least 80 % of the flux in 3 bins after 50 iterations.
        let (kernel, center) = sample_response_kernel(0.35, 0.05);
        let n = 121;
        let mid = 60usize;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let d = (i as f64 - mid as f64) * 0.05;
            y[i] = 1e4 * qpm_transfer(d, 0.35);
        }
        let out = deconvolve(&y, &kernel, center, 50).unwrap();
        let total: f64 = out.iter().sum();
        let core: f64 = out[mid - 1..=mid + 1].iter().sum();
        assert!(
            core / total > 0.8,
            "only {:.1}% of flux in 3 central bins",
            100.0 * core / total
        );
        // Flux conserved to 0.1 % and nonnegative throughout.
        let before: f64 = y.iter().sum();
        assert!((total - before).abs() / before < 1e-3);
        assert!(out.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn deconvolve_two_lines_deepens_valley_without_moving_peaks() {
        let (kernel, center) = sample_response_kernel(0.35, 0.05);
        let n = 161;
        let mut y = vec![0.0; n];
        let p1 = 70usize;
        let p2 = 90usize; // 1.0 nm apart at 0.05 nm steps
        for i in 0..n {
            let d1 = (i as f64 - p1 as f64) * 0.05;
            let d2 = (i as f64 - p2 as f64) * 0.05;
            y[i] = 8e3 * qpm_transfer(d1, 0.35) + 1e4 * qpm_transfer(d2, 0.35);
        }
        let mut valley_prev = f64::INFINITY;
        for iters in [5usize, 20, 60] {
            let out = deconvolve(&y, &kernel, center, iters).unwrap();
            // Peak positions unchanged.
            let max1 = (p1 - 4..=p1 + 4).max_by(|&a, &b| out[a].partial_cmp(&out[b]).unwrap()).unwrap();
            let max2 = (p2 - 4..=p2 + 4).max_by(|&a, &b| out[a].partial_cmp(&out[b]).unwrap()).unwrap();
            assert!((max1 as i64 - p1 as i64).abs() <= 1);
            assert!((max2 as i64 - p2 as i64).abs() <= 1);
            // Valley between them deepens monotonically with iterations.
            let valley = out[p1 + 1..p2].iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(valley < valley_prev, "valley {valley} vs previous {valley_prev}");
            valley_prev = valley;
        }
    }

    #[test]
    fn deconvolve_rejects_zero_response() {
        assert!(deconvolve(&[1.0, 2.0], &[0.0, 0.0], 0, 5).is_err());
        assert!(deconvolve(&[1.0, 2.0], &[], 0, 5).is_err());
    }

    #[test]
    fn fwhm_and_sidelobe_of_analytic_profile() {
        let step = 0.02;
        let n = 151;
        let mid = 75usize;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 - mid as f64) * step).collect();
        let y: Vec<f64> = x.iter().map(|&d| 1e5 * qpm_transfer(d, 0.35)).collect();
        let fwhm = profile_fwhm(&x, &y).unwrap();
        assert!((fwhm - 0.35).abs() < 0.002, "fwhm {fwhm}");
        let lobe = first_sidelobe_ratio(&y).unwrap();
        assert!((lobe - SINC2_SIDELOBE_VALUE).abs() < 0.002, "sidelobe {lobe}");
    }
}
