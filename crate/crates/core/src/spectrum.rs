//! Closed-form spectra of sum-of-sines models and a DFT reference.
//!
//! * [`line_spectrum`]: the unbounded series as pairs of Dirac lines.
//! * [`truncated_spectrum`]: exact transform of the model gated to `[0, T)`,
//!   a superposition of shifted gate transforms.
//! * [`magnitude_eq16`]: the single-sided sinc-sum approximation
//!   `(T/2)·Σ a_k sinc((ω - b_k)T/2π)`, which ignores phases and the
//!   negative-frequency lobes.
//! * [`dft_oracle`]: rectangle-rule DFT of a sampled waveform, scaled to
//!   approximate the continuous transform.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::sine_fit::SumOfSines;
use crate::waveform::SampledWaveform;

/// A Dirac line `amplitude·δ(ω - frequency)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub frequency: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumValues {
    Complex(Vec<Complex64>),
    Magnitude(Vec<f64>),
}

/// Spectrum samples on an ascending frequency grid (rad/time).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    omegas: Vec<f64>,
    values: SpectrumValues,
}

impl SpectrumGrid {
    pub fn new(omegas: Vec<f64>, values: SpectrumValues) -> Result<Self> {
        let len = match &values {
            SpectrumValues::Complex(v) => v.len(),
            SpectrumValues::Magnitude(v) => v.len(),
        };
        if len != omegas.len() {
            return Err(Error::BadInput("spectrum grid and values differ in length".into()));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadInput("spectrum grid must be strictly ascending".into()));
        }
        Ok(Self { omegas, values })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &SpectrumValues {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        match &self.values {
            SpectrumValues::Complex(v) => v.iter().map(|z| z.norm()).collect(),
            SpectrumValues::Magnitude(v) => v.iter().map(|m| m.abs()).collect(),
        }
    }

    /// The sub-grid with `lo <= ω <= hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.omegas[i] >= lo && self.omegas[i] <= hi)
            .collect();
        let omegas = keep.iter().map(|&i| self.omegas[i]).collect();
        let values = match &self.values {
            SpectrumValues::Complex(v) => SpectrumValues::Complex(keep.iter().map(|&i| v[i]).collect()),
            SpectrumValues::Magnitude(v) => {
                SpectrumValues::Magnitude(keep.iter().map(|&i| v[i]).collect())
            }
        };
        Self { omegas, values }
    }

    /// Writes `omega,real,imag,magnitude`; magnitude-only grids leave the
    /// real and imaginary fields empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "omega,real,imag,magnitude")?;
        match &self.values {
            SpectrumValues::Complex(v) => {
                for (w, z) in self.omegas.iter().zip(v) {
                    writeln!(out, "{},{},{},{}", sig17(*w), sig17(z.re), sig17(z.im), sig17(z.norm()))?;
                }
            }
            SpectrumValues::Magnitude(v) => {
                for (w, m) in self.omegas.iter().zip(v) {
                    writeln!(out, "{},,,{}", sig17(*w), sig17(m.abs()))?;
                }
            }
        }
        Ok(())
    }
}

/// Normalized sinc `sin(πx)/(πx)`, `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Transform of the unit gate on `[0, T)`: `T·sinc(ωT/2π)·e^{-jωT/2}`.
pub fn gate_transform(omega: f64, support: f64) -> Complex64 {
    Complex64::from_polar(support * sinc(omega * support / (2.0 * PI)), -omega * support / 2.0)
}

/// Lines of the ungated series: `-jπ·a·e^{jc}` at `+b` and `+jπ·a·e^{-jc}`
/// at `-b`, emitted per term as the `(-b, +b)` pair.
pub fn line_spectrum(model: &SumOfSines) -> Vec<SpectralLine> {
    let j_pi = Complex64::new(0.0, PI);
    model
        .terms()
        .iter()
        .flat_map(|t| {
            let rot = Complex64::from_polar(t.amplitude, t.phase);
            [
                SpectralLine { frequency: -t.frequency, amplitude: j_pi * rot.conj() },
                SpectralLine { frequency: t.frequency, amplitude: -j_pi * rot },
            ]
        })
        .collect()
}

/// Exact transform of the gated model,
/// `Σ (a/2j)·[e^{jc}·G(ω - b) - e^{-jc}·G(ω + b)]`.
pub fn truncated_spectrum(model: &SumOfSines, omega: f64) -> Complex64 {
    let support = model.support();
    let inv_2j = Complex64::new(0.0, -0.5);
    model
        .terms()
        .iter()
        .map(|t| {
            let e = Complex64::from_polar(1.0, t.phase);
            let plus = e * gate_transform(omega - t.frequency, support);
            let minus = e.conj() * gate_transform(omega + t.frequency, support);
            inv_2j * t.amplitude * (plus - minus)
        })
        .sum()
}

/// `(T/2)·Σ a_k·sinc((ω - b_k)T/2π)`. Signed; its absolute value is the
/// magnitude approximation.
pub fn magnitude_eq16(model: &SumOfSines, omega: f64) -> f64 {
    let support = model.support();
    0.5 * support
        * model
            .terms()
            .iter()
            .map(|t| t.amplitude * sinc((omega - t.frequency) * support / (2.0 * PI)))
            .sum::<f64>()
}

/// Rectangle-rule transform `dt·Σ x_n e^{-jω t_n}` on the `zero_pad_to`-point
/// DFT grid, returned over ascending frequencies `[-π/dt, π/dt)`.
pub fn dft_oracle(wave: &SampledWaveform, zero_pad_to: usize) -> Result<SpectrumGrid> {
    if zero_pad_to < wave.len() {
        return Err(Error::BadInput(format!(
            "zero padding target {zero_pad_to} is shorter than the waveform ({})",
            wave.len()
        )));
    }
    let n = zero_pad_to;
    let dt = wave.dt();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (b, &v) in buf.iter_mut().zip(wave.values()) {
        b.re = v;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let d_omega = 2.0 * PI / (n as f64 * dt);
    let first_negative = n.div_ceil(2);
    let order = (first_negative..n).chain(0..first_negative);
    let mut omegas = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in order {
        let signed = if k >= first_negative { k as f64 - n as f64 } else { k as f64 };
        let omega = signed * d_omega;
        omegas.push(omega);
        values.push(buf[k] * dt * Complex64::from_polar(1.0, -omega * wave.t0()));
    }
    SpectrumGrid::new(omegas, SpectrumValues::Complex(values))
}

/// `[lo, hi]` split into `points` evenly spaced frequencies.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return Err(Error::BadInput(format!("bad frequency grid [{lo}, {hi}] x {points}")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + i as f64 * step).collect())
}

pub fn exact_grid(model: &SumOfSines, omegas: Vec<f64>) -> Result<SpectrumGrid> {
    let values = omegas.iter().map(|&w| truncated_spectrum(model, w)).collect();
    SpectrumGrid::new(omegas, SpectrumValues::Complex(values))
}

pub fn eq16_grid(model: &SumOfSines, omegas: Vec<f64>) -> Result<SpectrumGrid> {
    let values = omegas.iter().map(|&w| magnitude_eq16(model, w).abs()).collect();
    SpectrumGrid::new(omegas, SpectrumValues::Magnitude(values))
}

/// `‖x - y‖₂ / ‖y‖₂`.
pub fn relative_l2(x: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// `‖x - y‖₂ / ‖y‖₂` for complex sequences.
pub fn relative_l2_complex(x: &[Complex64], reference: &[Complex64]) -> f64 {
    let num: f64 = x.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Relative L2 distance between `|eq16|` and `|exact|` on `omegas`.
pub fn eq16_deviation(model: &SumOfSines, omegas: &[f64]) -> f64 {
    let approx: Vec<f64> = omegas.iter().map(|&w| magnitude_eq16(model, w).abs()).collect();
    let exact: Vec<f64> = omegas.iter().map(|&w| truncated_spectrum(model, w).norm()).collect();
    relative_l2(&approx, &exact)
}
