//! Exponential-decay lifetime fits with confidence intervals, histogram
//! subtraction, and dynamic-range figures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tcspc::{CorrelationHistogram, HistogramConfig};
use crate::units::{ps_to_ns, TimePs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub tau_ns: f64,
    pub ci95_low_ns: f64,
    pub ci95_high_ns: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Square root of the weighted residual sum at the optimum.
    pub residual_norm: f64,
}

impl FitResult {
    pub fn ci95_half_width_ns(&self) -> f64 {
        (self.ci95_high_ns - self.ci95_low_ns) / 2.0
    }

    pub fn covers(&self, tau_ns: f64) -> bool {
        self.ci95_low_ns <= tau_ns && tau_ns <= self.ci95_high_ns
    }
}

/// Weighted least squares of `A·exp(-(t-t0)/tau) + c` against counts in the
/// fit window, with Poisson weights `1/max(y, 1)` and the 95 % interval from
/// the linearized covariance at the optimum.
pub fn fit_lifetime(hist: &CorrelationHistogram, fit_window: (TimePs, TimePs)) -> Result<FitResult> {
    let cfg = hist.config();
    if fit_window.0 < cfg.range_start_ps || fit_window.1 > cfg.range_end_ps {
        return Err(Error::Precondition("fit window extends outside the histogram".into()));
    }
    let mut t_ns = Vec::new();
    let mut y = Vec::new();
    let mut var = Vec::new();
    for (i, &c) in hist.counts().iter().enumerate() {
        let center = cfg.bin_center_ps(i);
        if center >= fit_window.0 as f64 && center < fit_window.1 as f64 {
            t_ns.push(center / 1_000.0);
            y.push(c as f64);
            var.push((c as f64).max(1.0));
        }
    }
    fit_exponential(&t_ns, &y, &var, ps_to_ns(fit_window.0))
}

/// Core exponential fit on real-valued data with per-point variances.
/// `t0_ns` fixes the time origin of the decay (typically the window start or
/// the histogram maximum).
pub fn fit_exponential(t_ns: &[f64], y: &[f64], var: &[f64], t0_ns: f64) -> Result<FitResult> {
    let n = t_ns.len();
    if n < 10 {
        return Err(Error::Precondition(format!("fit needs at least 10 bins, got {n}")));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::Precondition("fit window contains no counts".into()));
    }

    // Starting point: offset from the tail, amplitude from the head, tau
    // from the 1/e crossing.
    let tail = n - (n / 5).max(1);
    let c0 = y[tail..].iter().sum::<f64>() / (n - tail) as f64;
    let a0 = (y.iter().cloned().fold(f64::MIN, f64::max) - c0).max(1e-9);
    let span = t_ns[n - 1] - t_ns[0];
    let mut tau0 = span / 5.0;
    for i in 0..n {
        if y[i] - c0 <= a0 * (-1.0f64).exp() {
            let dt = t_ns[i] - t0_ns;
            if dt > 0.0 {
                tau0 = dt;
            }
            break;
        }
    }

    let mut a = a0;
    let mut tau = tau0.max(1e-6);
    let mut c = c0;
    let mut lambda = 1e-3;
    let mut last_chi2 = f64::INFINITY;

    let chi2_of = |a: f64, tau: f64, c: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let f = a * (-(t_ns[i] - t0_ns) / tau).exp() + c;
            s += (y[i] - f) * (y[i] - f) / var[i];
        }
        s
    };

    let mut converged = false;
    for _ in 0..400 {
        // Normal equations for (A, tau, c).
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for i in 0..n {
            let w = 1.0 / var[i];
            let dt = t_ns[i] - t0_ns;
            let e = (-dt / tau).exp();
            let f = a * e + c;
            let r = y[i] - f;
            let j = [e, a * e * dt / (tau * tau), 1.0];
            for p in 0..3 {
                jtr[p] += w * j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += w * j[p] * j[q];
                }
            }
        }
        let mut damped = jtj;
        for p in 0..3 {
            damped[p][p] *= 1.0 + lambda;
        }
        let step = match solve3(&damped, &jtr) {
            Some(s) => s,
            None => return Err(Error::Fit("singular normal equations".into())),
        };
        let trial = (a + step[0], (tau + step[1]).max(1e-9), c + step[2]);
        let chi2 = chi2_of(trial.0, trial.1, trial.2);
        if !chi2.is_finite() {
            return Err(Error::Fit("non-finite residual during iteration".into()));
        }
        if chi2 <= last_chi2 {
            let rel = (step[1] / tau).abs();
            a = trial.0;
            tau = trial.1;
            c = trial.2;
            lambda = (lambda * 0.3).max(1e-12);
            let improved = last_chi2 - chi2;
            last_chi2 = chi2;
            if rel < 1e-10 || improved < 1e-12 * chi2.max(1.0) {
                converged = true;
                break;
            }
        } else {
            lambda *= 8.0;
            if lambda > 1e12 {
                converged = true; // stuck at the optimum within damping limits
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence after 400 iterations (tau={tau:.4} ns, chi2={last_chi2:.3e})"
        )));
    }
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Fit(format!("fit collapsed to non-physical tau {tau}")));
    }

    // Covariance of the linearized problem at the optimum.
    let mut jtj = [[0.0f64; 3]; 3];
    for i in 0..n {
        let w = 1.0 / var[i];
        let dt = t_ns[i] - t0_ns;
        let e = (-dt / tau).exp();
        let j = [e, a * e * dt / (tau * tau), 1.0];
        for p in 0..3 {
            for q in 0..3 {
                jtj[p][q] += w * j[p] * j[q];
            }
        }
    }
    let var_tau = invert3_diag(&jtj, 1).ok_or_else(|| Error::Fit("singular covariance".into()))?;
    let half = 1.96 * var_tau.max(0.0).sqrt();
    Ok(FitResult {
        tau_ns: tau,
        ci95_low_ns: tau - half,
        ci95_high_ns: tau + half,
        amplitude: a,
        offset: c,
        residual_norm: last_chi2.sqrt(),
    })
}

fn solve3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut a = *m;
    let mut x = *b;
    for col in 0..3 {
        let (pivot, max) = (col..3)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())?;
        if max < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        x.swap(col, pivot);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for cc in col..3 {
                a[r][cc] -= f * a[col][cc];
            }
            x[r] -= f * x[col];
        }
    }
    let mut out = [0.0; 3];
    for r in (0..3).rev() {
        let mut s = x[r];
        for cc in r + 1..3 {
            s -= a[r][cc] * out[cc];
        }
        out[r] = s / a[r][r];
    }
    Some(out)
}

/// Diagonal element `idx` of the inverse of a symmetric 3x3 matrix.
fn invert3_diag(m: &[[f64; 3]; 3], idx: usize) -> Option<f64> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let cof = match idx {
        0 => m[1][1] * m[2][2] - m[1][2] * m[2][1],
        1 => m[0][0] * m[2][2] - m[0][2] * m[2][0],
        _ => m[0][0] * m[1][1] - m[0][1] * m[1][0],
    };
    Some(cof / det)
}

/// Bin-wise signed difference of two histograms with identical configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffHistogram {
    pub config: HistogramConfig,
    pub values: Vec<f64>,
    /// Per-bin variances (sum of both Poisson counts), for weighted fits.
    pub variances: Vec<f64>,
    pub duration_ps: TimePs,
}

pub fn difference_histogram(
    signal: &CorrelationHistogram,
    dark: &CorrelationHistogram,
    normalize_by_duration: bool,
) -> Result<DiffHistogram> {
    if signal.config() != dark.config() {
        return Err(Error::Config("histogram configs differ".into()));
    }
    let (sa, sb) = if normalize_by_duration {
        let ta = signal.duration_ps.max(1) as f64;
        let tb = dark.duration_ps.max(1) as f64;
        (1e12 / ta, 1e12 / tb) // per-second rates
    } else {
        (1.0, 1.0)
    };
    let values = signal
        .counts()
        .iter()
        .zip(dark.counts())
        .map(|(&a, &b)| a as f64 * sa - b as f64 * sb)
        .collect();
    let variances = signal
        .counts()
        .iter()
        .zip(dark.counts())
        .map(|(&a, &b)| (a as f64 * sa * sa + b as f64 * sb * sb).max(1.0))
        .collect();
    Ok(DiffHistogram {
        config: *signal.config(),
        values,
        variances,
        duration_ps: signal.duration_ps,
    })
}

/// Probability that photoluminescence with lifetime `tau` survives past a
/// given delay: `exp(-delay/tau)`.
pub fn residual_pl_probability(tau_ns: f64, delay_ns: f64) -> Result<f64> {
    if !(tau_ns > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau_ns}")));
    }
    Ok((-delay_ns / tau_ns).exp())
}

/// Ratio of the highest bin inside the peak window to the mean bin value in
/// the declared noise-floor window. Infinite when the floor is empty.
pub fn dynamic_range(
    hist: &CorrelationHistogram,
    peak_window: (TimePs, TimePs),
    floor_window: (TimePs, TimePs),
) -> Result<f64> {
    let cfg = hist.config();
    let mut peak = 0u64;
    let mut floor_sum = 0u64;
    let mut floor_bins = 0u64;
    for (i, &c) in hist.counts().iter().enumerate() {
        let center = cfg.bin_center_ps(i);
        if center >= peak_window.0 as f64 && center < peak_window.1 as f64 {
            peak = peak.max(c);
        }
        if center >= floor_window.0 as f64 && center < floor_window.1 as f64 {
            floor_sum += c;
            floor_bins += 1;
        }
    }
    if floor_bins == 0 {
        return Err(Error::Precondition("empty noise-floor window".into()));
    }
    if floor_sum == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(peak as f64 / (floor_sum as f64 / floor_bins as f64))
}
