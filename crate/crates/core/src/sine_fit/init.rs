use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};

use super::{wrap_phase, SineTerm, SumOfSines};
use crate::error::{Error, Result};
use crate::waveform::SampledWaveform;

/// Zero-padding factor for peak picking.
const OVERSAMPLE: usize = 8;

/// Starting model by spectral peeling: take the highest peak of the
/// residual's zero-padded DFT magnitude as `b`, fit `a` and `c` at that
/// frequency by linear least squares, subtract the term, repeat `terms`
/// times. When the residual has no peak left (e.g. a zero target) the
/// remaining terms come from the unused harmonics `k·2π/T`, `T = n·dt`.
pub fn initialize_from_spectrum(target: &SampledWaveform, terms: usize) -> Result<SumOfSines> {
    let n = target.len();
    if n < 3 * terms + 1 {
        return Err(Error::Underdetermined { samples: n, params: 3 * terms });
    }
    let dt = target.dt();
    let duration = n as f64 * dt;
    let times: Vec<f64> = target.times().collect();
    let padded = (n * OVERSAMPLE).next_power_of_two();
    let fft = FftPlanner::new().plan_fft_forward(padded);
    let d_omega = 2.0 * PI / (padded as f64 * dt);

    let mut residual = target.values().to_vec();
    let mut picked: Vec<SineTerm> = Vec::with_capacity(terms);
    while picked.len() < terms {
        let mut buf = vec![Complex64::new(0.0, 0.0); padded];
        for (b, &r) in buf.iter_mut().zip(&residual) {
            b.re = r;
        }
        fft.process(&mut buf);
        let half = padded / 2;
        let mags: Vec<f64> = buf[..=half].iter().map(|z| z.norm()).collect();
        let peak = (1..half)
            .filter(|&k| mags[k] > mags[k - 1] && mags[k] >= mags[k + 1])
            .max_by(|&x, &y| mags[x].total_cmp(&mags[y]).then(y.cmp(&x)));
        let Some(k) = peak else { break };
        let omega = k as f64 * d_omega;
        let Some(term) = project(&times, &residual, omega) else { break };
        if term.amplitude == 0.0 {
            break;
        }
        for (r, &t) in residual.iter_mut().zip(&times) {
            *r -= term.eval(t);
        }
        picked.push(term);
    }

    let mut k = 1;
    while picked.len() < terms {
        let omega = 2.0 * PI * k as f64 / duration;
        k += 1;
        if picked.iter().any(|t| (t.frequency - omega).abs() < 1e-9 * omega) {
            continue;
        }
        let term = project(&times, &residual, omega).unwrap_or(SineTerm::new(0.0, omega, 0.0));
        picked.push(term);
    }
    Ok(SumOfSines::new(picked, duration)?.sorted_by_frequency())
}

/// Least-squares `a·sin(ωt + c)` fit of `values` at fixed `ω`.
fn project(times: &[f64], values: &[f64], omega: f64) -> Option<SineTerm> {
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in times.iter().zip(values) {
        let (s, c) = (omega * t).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += y * s;
        yc += y * c;
    }
    let det = ss * cc - sc * sc;
    if det.abs() <= 1e-12 * (ss * cc).max(f64::MIN_POSITIVE) {
        return None;
    }
    // y ≈ α sin ωt + β cos ωt, α = a cos c, β = a sin c
    let alpha = (ys * cc - yc * sc) / det;
    let beta = (yc * ss - ys * sc) / det;
    Some(SineTerm::new(alpha.hypot(beta), omega, wrap_phase(beta.atan2(alpha))))
}
