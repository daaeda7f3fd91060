//! Windowed Fourier analysis of traces.
//!
//! Sign convention: a trace `e^{−iωt}` has its peak at `+ω` (the transform is applied to
//! the conjugate trace).

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::state::TraceSeries;

pub const MIN_SAMPLES: usize = 256;
/// Half-width, in bins, of the band counted as the dominant peak.
pub const BAND_BINS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub omega: f64,
    /// Fraction of power within `±BAND_BINS` of the peak.
    pub concentration: f64,
    /// Bin width `2π/window`.
    pub resolution: f64,
    /// Trace identically zero.
    pub degenerate: bool,
}

/// Hann-windowed spectrum of the trailing `window` of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Angular frequency of each bin, in FFT order.
    pub omegas: Vec<f64>,
    pub power: Vec<f64>,
    /// Sum of window weights; a tone of amplitude `A` gives `|X| = A·weight_sum` at its bin.
    pub weight_sum: f64,
    pub resolution: f64,
}

impl Spectrum {
    /// Amplitude `2|X|/Σw` of a real sinusoid at bin `j`.
    pub fn real_amplitude(&self, j: usize) -> f64 {
        2.0 * self.power[j].sqrt() / self.weight_sum
    }

    fn refine(&self, j: usize) -> f64 {
        let n = self.power.len();
        let l = self.power[(j + n - 1) % n];
        let c = self.power[j];
        let r = self.power[(j + 1) % n];
        if l <= 0.0 || r <= 0.0 || c <= 0.0 {
            return self.omegas[j];
        }
        let (ll, lc, lr) = (l.ln(), c.ln(), r.ln());
        let denom = ll - 2.0 * lc + lr;
        let delta = if denom < 0.0 { (0.5 * (ll - lr) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        self.omegas[j] + delta * self.resolution
    }
}

/// Trailing-window spectrum of `conj(trace)`, optionally mean-removed.
pub fn trailing_spectrum(trace: &TraceSeries, window: f64, remove_mean: bool) -> Result<Spectrum> {
    trace.validate()?;
    let dt = trace.dt().ok_or(LabError::TooFewSamples { found: trace.len(), required: MIN_SAMPLES })?;
    if window > trace.span() * (1.0 + 1e-12) + dt {
        return Err(LabError::InvalidArgument(format!("window {window} exceeds trace span {}", trace.span())));
    }
    let n = ((window / dt).round() as usize).min(trace.len());
    if n < MIN_SAMPLES {
        return Err(LabError::TooFewSamples { found: n, required: MIN_SAMPLES });
    }
    let tail = &trace.values[trace.len() - n..];
    let mean = if remove_mean { tail.iter().sum::<Complex64>() / n as f64 } else { Complex64::default() };
    let weights: Vec<f64> = (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos()).collect();
    let mut buf: Vec<Complex64> = tail.iter().zip(&weights).map(|(y, w)| (y - mean).conj() * w).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let resolution = 2.0 * PI / (n as f64 * dt);
    let omegas = (0..n).map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * resolution).collect();
    Ok(Spectrum {
        omegas,
        power: buf.iter().map(|z| z.norm_sqr()).collect(),
        weight_sum: weights.iter().sum(),
        resolution,
    })
}

/// Dominant frequency and spectral concentration of the trailing `window`.
pub fn dominant_frequency(trace: &TraceSeries, window: f64) -> Result<FrequencyEstimate> {
    let spec = trailing_spectrum(trace, window, false)?;
    let total: f64 = spec.power.iter().sum();
    if total == 0.0 {
        return Ok(FrequencyEstimate { omega: 0.0, concentration: 0.0, resolution: spec.resolution, degenerate: true });
    }
    let n = spec.power.len();
    let j = (0..n).max_by(|&a, &b| spec.power[a].total_cmp(&spec.power[b])).expect("n ≥ MIN_SAMPLES");
    let band: f64 = (0..=2 * BAND_BINS).map(|d| spec.power[(j + n + d - BAND_BINS) % n]).sum();
    Ok(FrequencyEstimate {
        omega: spec.refine(j),
        concentration: (band / total).clamp(0.0, 1.0),
        resolution: spec.resolution,
        degenerate: false,
    })
}

/// Local maxima of the one-sided amplitude spectrum of a real signal, strongest first,
/// excluding the DC bin. Each entry is `(ω, amplitude)`.
pub fn real_peaks(spec: &Spectrum) -> Vec<(f64, f64)> {
    let n = spec.power.len();
    let half = n / 2;
    let mut peaks: Vec<(f64, f64)> = (1..half)
        .filter(|&j| spec.power[j] >= spec.power[j - 1] && spec.power[j] > spec.power[j + 1])
        .map(|j| (spec.refine(j), spec.real_amplitude(j)))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(f: impl Fn(f64) -> Complex64, dt: f64, n: usize) -> TraceSeries {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        TraceSeries::new(times, values).unwrap()
    }

    #[test]
    fn pure_tone() {
        let tr = trace(|t| Complex64::from_polar(1.0, -0.6 * t), 0.025, 8001);
        let est = dominant_frequency(&tr, 100.0).unwrap();
        assert!((est.omega - 0.6).abs() <= 2.0 * PI / 100.0 * 0.05, "{}", est.omega);
        assert!(est.concentration >= 0.99);
        let neg = trace(|t| Complex64::from_polar(1.0, 0.6 * t), 0.025, 8001);
        assert!((dominant_frequency(&neg, 100.0).unwrap().omega + 0.6).abs() < 0.02);
    }

    #[test]
    fn two_tones_split_power() {
        let tr = trace(|t| Complex64::from_polar(1.0, -0.6 * t) + Complex64::from_polar(0.5, -0.9 * t), 0.025, 8001);
        let est = dominant_frequency(&tr, 100.0).unwrap();
        assert!(est.concentration <= 0.85, "{}", est.concentration);
        assert!((est.omega - 0.6).abs() < 0.01);
    }

    #[test]
    fn zero_trace_is_degenerate() {
        let tr = trace(|_| Complex64::default(), 0.1, 300);
        let est = dominant_frequency(&tr, 29.9).unwrap();
        assert!(est.degenerate && est.omega == 0.0 && est.concentration == 0.0);
    }

    #[test]
    fn too_few_samples() {
        let tr = trace(|t| Complex64::new(t.cos(), 0.0), 0.1, 100);
        assert!(matches!(dominant_frequency(&tr, 9.9), Err(LabError::TooFewSamples { .. })));
    }

    #[test]
    fn real_amplitude_of_cosine() {
        let tr = trace(|t| Complex64::new(0.3 * (1.3 * t).cos() + 0.05 * (0.4 * t).sin(), 0.0), 0.05, 20000);
        let spec = trailing_spectrum(&tr, 999.0, true).unwrap();
        let peaks = real_peaks(&spec);
        assert!((peaks[0].0 - 1.3).abs() < spec.resolution);
        assert!((peaks[0].1 - 0.3).abs() < 0.05);
        assert!((peaks[1].0 - 0.4).abs() < spec.resolution);
    }
}
