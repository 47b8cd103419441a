//! Turns histograms and scan data into reported quantities: spectra,
//! lifetimes with confidence intervals, and photon-correlation figures with
//! background subtraction and error propagation.

mod g2;
mod lifetime;
mod spectrum;

pub use g2::{extract_g2, G2Result, G2Windows, PeakArea};
pub use lifetime::{
    difference_histogram, dynamic_range, fit_exponential, fit_lifetime, residual_pl_probability,
    DiffHistogram, FitResult,
};
pub use spectrum::{
    assemble_spectrum, deconvolve, first_sidelobe_ratio, profile_fwhm, sample_response_kernel,
    SpectralLine, SpectrumScan,
};
