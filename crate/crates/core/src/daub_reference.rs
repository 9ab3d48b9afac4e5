//! Ground-truth Daubechies filters and cascade waveforms.
//!
//! Filters come from spectral factorization of the half-band polynomial
//! `P(y) = Σ_{k<N} C(N-1+k, k) y^k`, `y = sin²(ω/2)`. Each root `y_i` maps
//! to a pair `z, 1/z` through `z² - (2 - 4y)z + 1 = 0`; keeping the member
//! inside the unit circle yields the extremal-phase (minimum-phase) factor.
//!
//! The cascade refines `φ(t) = √2 Σ h_k φ(2t - k)` from the integer samples
//! of φ; the wavelet is one high-pass step `ψ(t) = √2 Σ g_k φ(2t - k)`
//! applied to the level `J-1` iterate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::waveform::SampledWaveform;

pub const MAX_ORDER: usize = 10;
pub const MAX_LEVELS: u32 = 14;

const ROOT_TOL: f64 = 1e-12;

/// Order-N Daubechies low-pass filter with its support length.
#[derive(Debug, Clone, PartialEq)]
pub struct DaubechiesSpec {
    order: usize,
    lowpass: Vec<f64>,
}

impl DaubechiesSpec {
    /// Number of vanishing moments N.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The 2N low-pass taps `h`.
    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    /// Support length `2N - 1`.
    pub fn support(&self) -> f64 {
        (2 * self.order - 1) as f64
    }
}

/// Extremal-phase Daubechies filter of order `n` (1..=10), normalized so
/// that `Σh = √2`.
pub fn daubechies_filter(n: usize) -> Result<DaubechiesSpec> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::OrderUnsupported(n));
    }
    // P(y) in ascending powers.
    let half_band: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();
    let y_roots = poly_roots(&half_band);

    // Polynomial in z, descending powers: (z + 1)^N Π (z - z_i).
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..n {
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    for y in y_roots {
        let p = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (p * p - 4.0).sqrt();
        let z1 = (p + disc) / 2.0;
        let z2 = (p - disc) / 2.0;
        let inner = if z1.norm() < z2.norm() { z1 } else { z2 };
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), -inner]);
    }

    let mut taps: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t *= SQRT_2 / sum;
    }
    Ok(DaubechiesSpec { order: n, lowpass: taps })
}

/// Quadrature-mirror high-pass taps `g_n = (-1)^n h_{2N-1-n}`.
pub fn highpass_from_lowpass(spec: &DaubechiesSpec) -> Vec<f64> {
    let h = spec.lowpass();
    let last = h.len() - 1;
    (0..h.len())
        .map(|n| if n % 2 == 0 { h[last - n] } else { -h[last - n] })
        .collect()
}

/// φ at the integers `0..=2N-1`: the eigenvector of `M[m][j] = √2·h_{2m-j}`
/// for eigenvalue 1, normalized to `Σ φ(m) = 1`.
pub fn integer_samples(spec: &DaubechiesSpec) -> Vec<f64> {
    let h = spec.lowpass();
    let len = h.len();
    if spec.order() == 1 {
        // Box on [0, 1): the eigenvalue is double, pick the half-open value.
        return vec![1.0, 0.0];
    }
    let tap = |i: isize| if (0..len as isize).contains(&i) { h[i as usize] } else { 0.0 };
    let mut system = DMatrix::<f64>::zeros(len, len);
    for m in 0..len {
        for j in 0..len {
            let delta = if m == j { 1.0 } else { 0.0 };
            system[(m, j)] = SQRT_2 * tap(2 * m as isize - j as isize) - delta;
        }
    }
    // The rows of M - I are dependent; replace the last one by the
    // normalization.
    for j in 0..len {
        system[(len - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(len);
    rhs[len - 1] = 1.0;
    let x = system.lu().solve(&rhs).expect("refinement eigenproblem is regular");
    x.iter().copied().collect()
}

/// Scaling function φ sampled at `t = n/2^J` over `[0, 2N-1]`.
///
/// Refinement starts from the exact integer samples, so every level holds
/// exact dyadic values and level `J+1` restricted to even indices equals
/// level `J`.
pub fn cascade_scaling(spec: &DaubechiesSpec, levels: u32) -> Result<SampledWaveform> {
    check_levels(levels)?;
    let mut v = integer_samples(spec);
    for j in 0..levels {
        v = refine(&v, spec.lowpass(), 1 << j);
    }
    finish(spec, levels, v)
}

/// Wavelet ψ sampled at `t = n/2^J` over `[0, 2N-1]`: one high-pass step
/// applied to the level `J-1` scaling iterate.
pub fn cascade_wavelet(spec: &DaubechiesSpec, levels: u32) -> Result<SampledWaveform> {
    check_levels(levels)?;
    let mut v = integer_samples(spec);
    for j in 0..levels - 1 {
        v = refine(&v, spec.lowpass(), 1 << j);
    }
    let g = highpass_from_lowpass(spec);
    let w = refine(&v, &g, 1 << (levels - 1));
    finish(spec, levels, w)
}

fn check_levels(levels: u32) -> Result<()> {
    if !(1..=MAX_LEVELS).contains(&levels) {
        return Err(Error::GridTooLarge(levels));
    }
    Ok(())
}

/// One refinement step `out[n] = √2 Σ_k f_k v[n - k·step]`, where `v` holds
/// samples at spacing `1/step` and `out` at spacing `1/(2·step)`.
fn refine(v: &[f64], filter: &[f64], step: usize) -> Vec<f64> {
    let mut out = vec![0.0; 2 * v.len() - 1];
    for (k, &f) in filter.iter().enumerate() {
        let coef = SQRT_2 * f;
        let offset = k * step;
        let span = (out.len() - offset).min(v.len());
        for (o, &x) in out[offset..offset + span].iter_mut().zip(v) {
            *o += coef * x;
        }
    }
    out
}

fn finish(spec: &DaubechiesSpec, levels: u32, mut values: Vec<f64>) -> Result<SampledWaveform> {
    let len = (2 * spec.order() - 1) * (1usize << levels) + 1;
    debug_assert_eq!(values.len(), len);
    // The closed-right endpoint is stored as zero.
    values[len - 1] = 0.0;
    SampledWaveform::new(0.0, 1.0 / (1u64 << levels) as f64, values)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    // Horner on ascending coefficients, returning value and derivative.
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of a real polynomial given in ascending powers, by Durand-Kerner
/// iteration followed by Newton polishing.
pub(crate) fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[..degree].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|i| radius.min(2.0) * seed.powu(i as u32))
        .collect();

    for _ in 0..2000 {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let (p, _) = poly_eval(&monic, roots[i]);
            let denom = (0..degree)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = p / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm() / roots[i].norm().max(1.0));
        }
        if max_step < ROOT_TOL {
            break;
        }
    }
    for r in &mut roots {
        for _ in 0..3 {
            let (p, dp) = poly_eval(&monic, *r);
            if dp.norm() == 0.0 {
                break;
            }
            *r -= p / dp;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_error(h: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..h.len() / 2 {
            let s: f64 = (0..h.len() - 2 * k).map(|n| h[n] * h[n + 2 * k]).sum();
            let expected = if k == 0 { 1.0 } else { 0.0 };
            worst = worst.max((s - expected).abs());
        }
        worst
    }

    #[test]
    fn haar_taps() {
        let spec = daubechies_filter(1).unwrap();
        let r = 1.0 / SQRT_2;
        assert!((spec.lowpass()[0] - r).abs() < 1e-15);
        assert!((spec.lowpass()[1] - r).abs() < 1e-15);
        let g = highpass_from_lowpass(&spec);
        assert!((g[0] - r).abs() < 1e-15 && (g[1] + r).abs() < 1e-15);
    }

    #[test]
    fn db2_matches_closed_form() {
        // Roots of P(y) = 1 + 2y: y = -1/2, z = 2 - √3.
        let s3 = 3f64.sqrt();
        let d = 4.0 * SQRT_2;
        let expected = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        let spec = daubechies_filter(2).unwrap();
        for (a, b) in spec.lowpass().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn filter_invariants_for_all_orders() {
        for n in 1..=MAX_ORDER {
            let spec = daubechies_filter(n).unwrap();
            let h = spec.lowpass();
            assert_eq!(h.len(), 2 * n);
            assert_eq!(spec.support(), (2 * n - 1) as f64);
            assert!((h.iter().sum::<f64>() - SQRT_2).abs() < 1e-12, "N={n}");
            assert!(orthonormality_error(h) < 1e-10, "N={n}");
            let g = highpass_from_lowpass(&spec);
            assert!(g.iter().sum::<f64>().abs() < 1e-12, "N={n}");
            for k in 0..n {
                let s: f64 = (0..h.len() - 2 * k).map(|i| g[i] * h[i + 2 * k]).sum();
                let s2: f64 = (0..h.len() - 2 * k).map(|i| h[i] * g[i + 2 * k]).sum();
                assert!(s.abs() < 1e-10 && s2.abs() < 1e-10, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn extremal_phase_keeps_energy_up_front() {
        // Minimum-phase filters have the largest partial energies of any
        // spectral factor; the first half must carry most of it.
        for n in 2..=MAX_ORDER {
            let h = daubechies_filter(n).unwrap().lowpass().to_vec();
            let front: f64 = h[..n].iter().map(|x| x * x).sum();
            assert!(front > 0.5, "N={n} front energy {front}");
        }
    }

    #[test]
    fn order_out_of_range() {
        assert!(matches!(daubechies_filter(0), Err(Error::OrderUnsupported(0))));
        assert!(matches!(daubechies_filter(11), Err(Error::OrderUnsupported(11))));
    }

    #[test]
    fn levels_out_of_range() {
        let spec = daubechies_filter(2).unwrap();
        assert!(matches!(cascade_scaling(&spec, 0), Err(Error::GridTooLarge(0))));
        assert!(matches!(cascade_wavelet(&spec, 15), Err(Error::GridTooLarge(15))));
    }

    #[test]
    fn haar_box_and_wavelet() {
        let spec = daubechies_filter(1).unwrap();
        let phi = cascade_scaling(&spec, 3).unwrap();
        assert_eq!(phi.len(), 9);
        for (i, v) in phi.values().iter().enumerate() {
            let expected = if i < 8 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-12, "i={i} v={v}");
        }
        let psi = cascade_wavelet(&spec, 3).unwrap();
        for (i, v) in psi.values().iter().enumerate() {
            let expected = match i {
                0..=3 => 1.0,
                4..=7 => -1.0,
                _ => 0.0,
            };
            assert!((v - expected).abs() < 1e-12, "i={i} v={v}");
        }
    }

    #[test]
    fn final_grid_point_is_zero() {
        for n in [2, 4, 7] {
            let spec = daubechies_filter(n).unwrap();
            let psi = cascade_wavelet(&spec, 6).unwrap();
            assert_eq!(psi.len(), (2 * n - 1) * 64 + 1);
            assert_eq!(*psi.values().last().unwrap(), 0.0);
            assert_eq!(psi.time(psi.len() - 1), (2 * n - 1) as f64);
        }
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (y - 1)(y + 2)(y² + 1) = y⁴ + y³ - y² + y - 2
        let roots = poly_roots(&[-2.0, 1.0, -1.0, 1.0, 1.0]);
        assert_eq!(roots.len(), 4);
        let expected = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ];
        for e in expected {
            let nearest = roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-12, "no root near {e}: {roots:?}");
        }
    }
}
