//! Inharmonic-series relations: the per-term zero-mean condition, the
//! phase/frequency relations it induces, and deviation tables of fitted
//! frequencies against the harmonic grid `k·2π/T`.
//!
//! Only the principal branch `ωT ∈ (0, π)` is implemented. Callers with
//! `ωT ∈ (π, 2π)` fold through the 2π-periodicity of the zero-mean integral.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::sine_fit::SumOfSines;

/// Harmonic indices paired with the sorted db4 wavelet frequencies in the
/// published deviation table.
pub const DB4_WAVELET_K_ASSIGNMENT: [usize; 8] = [1, 2, 4, 5, 6, 7, 9, 10];

const NEAR_SINGULAR: f64 = 1e-9;

/// One term of an inharmonic series `A sin(ω t + θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InharmonicComponent {
    pub index: usize,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl InharmonicComponent {
    /// Component whose phase makes it integrate to zero over `[0, T]`.
    pub fn zero_mean(index: usize, amplitude: f64, frequency: f64, support: f64) -> Result<Self> {
        if frequency < 0.0 {
            return Err(Error::BadInput("frequency must be non-negative".into()));
        }
        let phase = phase_from_frequency(frequency, support)?;
        Ok(Self { index, amplitude, frequency, phase })
    }
}

/// One row of a deviation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InharmonicRow {
    pub k: usize,
    pub fitted_b: f64,
    /// `k·2π/T`
    pub harmonic: f64,
    /// `fitted_b - harmonic`
    pub deviation: f64,
}

/// `θ = -atan((1 - cos ωT) / √(1 - cos² ωT))`, the phase that zeroes
/// `∫₀ᵀ sin(ωt + θ) dt`. Equals `-ωT/2` on the principal branch.
pub fn phase_from_frequency(omega: f64, support: f64) -> Result<f64> {
    if !(support > 0.0) {
        return Err(Error::BadInput(format!("support must be positive, got {support}")));
    }
    let x = omega * support;
    let multiple = (x / PI).round();
    if (x - multiple * PI).abs() <= 1e-12 * x.abs().max(1.0) {
        return Err(Error::BranchSingularity(x));
    }
    if !(x > 0.0 && x < PI) {
        return Err(Error::BadInput(format!(
            "omega*T = {x} is outside the principal branch (0, pi)"
        )));
    }
    if x.sin().abs() < NEAR_SINGULAR {
        return Ok(-x / 2.0);
    }
    let c = x.cos();
    Ok(-((1.0 - c) / ((1.0 - c) * (1.0 + c)).sqrt()).atan())
}

/// `ω = acos((1 - tan²θ)/(1 + tan²θ)) / T`, the positive root; equals
/// `2|θ|/T`.
pub fn frequency_from_phase(theta: f64, support: f64) -> Result<f64> {
    if !(support > 0.0) {
        return Err(Error::BadInput(format!("support must be positive, got {support}")));
    }
    if (theta.abs() - FRAC_PI_2).abs() < 1e-12 {
        return Err(Error::TangentSingularity(theta));
    }
    if theta == 0.0 || theta.abs() > FRAC_PI_2 {
        return Err(Error::BadInput(format!("theta = {theta} must lie in (-pi/2, pi/2) \\ {{0}}")));
    }
    let tan2 = theta.tan().powi(2);
    Ok(((1.0 - tan2) / (1.0 + tan2)).acos() / support)
}

/// `a·∫₀ᵀ sin(bt + c) dt = a·(cos c - cos(bT + c))/b`, evaluated in the
/// product form `2a·sin(bT/2 + c)·sin(bT/2)/b`; `a·T·sin c` when `b = 0`.
pub fn zero_mean_residual(a: f64, b: f64, c: f64, support: f64) -> f64 {
    if b == 0.0 {
        return a * support * c.sin();
    }
    let half = 0.5 * b * support;
    2.0 * a * (half + c).sin() * half.sin() / b
}

/// Deviations of each (ascending) model frequency from its harmonic
/// `k·2π/T`. Without an explicit assignment each `k` is the nearest integer
/// to `b/ω₀`, bumped past the previous index on collisions.
pub fn inharmonic_table(
    model: &SumOfSines,
    k_assignment: Option<&[usize]>,
) -> Result<Vec<InharmonicRow>> {
    if !model.is_sorted_by_frequency() {
        return Err(Error::InputNotSorted);
    }
    let omega0 = 2.0 * PI / model.support();
    let ks: Vec<usize> = match k_assignment {
        Some(ks) => {
            if ks.len() != model.len() {
                return Err(Error::BadInput(format!(
                    "k assignment has {} entries for {} terms",
                    ks.len(),
                    model.len()
                )));
            }
            if ks.first() == Some(&0) || ks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::BadInput(
                    "k assignment must be positive and strictly increasing".into(),
                ));
            }
            ks.to_vec()
        }
        None => {
            let mut prev = 0usize;
            model
                .terms()
                .iter()
                .map(|t| {
                    let nearest = (t.frequency / omega0).round().max(1.0) as usize;
                    prev = nearest.max(prev + 1);
                    prev
                })
                .collect()
        }
    };
    Ok(model
        .terms()
        .iter()
        .zip(ks)
        .map(|(t, k)| {
            let harmonic = k as f64 * omega0;
            InharmonicRow { k, fitted_b: t.frequency, harmonic, deviation: t.frequency - harmonic }
        })
        .collect())
}

pub fn write_table_csv<W: Write>(rows: &[InharmonicRow], mut out: W) -> Result<()> {
    writeln!(out, "k,b,k_omega0,deviation")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.k, sig17(r.fitted_b), sig17(r.harmonic), sig17(r.deviation))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{preset, Family, PresetKey};
    use crate::sine_fit::{Kind, SineTerm};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn phase_examples() {
        assert!((phase_from_frequency(FRAC_PI_2, 1.0).unwrap() + FRAC_PI_4).abs() < 1e-15);
        assert!((phase_from_frequency(2.0 * PI / 3.0, 1.0).unwrap() + PI / 3.0).abs() < 1e-15);
        assert!(matches!(phase_from_frequency(PI, 1.0), Err(Error::BranchSingularity(_))));
        assert!(matches!(phase_from_frequency(PI / 2.0, 2.0), Err(Error::BranchSingularity(_))));
        assert!(matches!(phase_from_frequency(4.0, 1.0), Err(Error::BadInput(_))));
    }

    #[test]
    fn near_singular_uses_half_angle() {
        let x = PI - 1e-10;
        assert!((phase_from_frequency(x, 1.0).unwrap() + x / 2.0).abs() < 1e-12);
    }

    #[test]
    fn frequency_examples() {
        assert!((frequency_from_phase(FRAC_PI_4, 1.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((frequency_from_phase(-FRAC_PI_4, 2.0).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((frequency_from_phase(PI / 3.0, 1.0).unwrap() - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!(matches!(frequency_from_phase(FRAC_PI_2, 1.0), Err(Error::TangentSingularity(_))));
        assert!(frequency_from_phase(0.0, 1.0).is_err());
    }

    #[test]
    fn zero_mean_examples() {
        let t = 3.0;
        for c in [-2.0, 0.0, 0.7, 3.0] {
            assert!(zero_mean_residual(1.0, 2.0 * PI / t, c, t).abs() < 1e-15);
        }
        assert!(zero_mean_residual(1.0, PI / (2.0 * t), -FRAC_PI_4, t).abs() < 1e-15);
        assert!((zero_mean_residual(1.0, PI / t, 0.0, t) - 2.0 * t / PI).abs() < 1e-14);
        assert_eq!(zero_mean_residual(2.0, 0.0, FRAC_PI_2, t), 2.0 * t);
    }

    #[test]
    fn zero_mean_component() {
        let comp = InharmonicComponent::zero_mean(1, 0.3, 0.4, 5.0).unwrap();
        assert!(zero_mean_residual(comp.amplitude, comp.frequency, comp.phase, 5.0).abs() < 1e-15);
    }

    #[test]
    fn table_requires_sorted_input() {
        let m = preset(PresetKey::new(Family::Db4, Kind::Wavelet));
        assert!(matches!(inharmonic_table(&m, None), Err(Error::InputNotSorted)));
    }

    #[test]
    fn default_assignment_resolves_collisions() {
        let w0 = 2.0 * PI / 7.0;
        let m = SumOfSines::new(
            vec![
                SineTerm::new(1.0, 0.1 * w0, 0.0),
                SineTerm::new(1.0, 1.1 * w0, 0.0),
                SineTerm::new(1.0, 1.2 * w0, 0.0),
                SineTerm::new(1.0, 3.9 * w0, 0.0),
            ],
            7.0,
        )
        .unwrap();
        let ks: Vec<usize> = inharmonic_table(&m, None).unwrap().iter().map(|r| r.k).collect();
        assert_eq!(ks, [1, 2, 3, 4]);
    }

    #[test]
    fn bad_assignments() {
        let m = preset(PresetKey::new(Family::Db4, Kind::Wavelet)).sorted_by_frequency();
        assert!(inharmonic_table(&m, Some(&[1, 2, 3])).is_err());
        assert!(inharmonic_table(&m, Some(&[1, 2, 2, 5, 6, 7, 9, 10])).is_err());
        assert!(inharmonic_table(&m, Some(&[0, 2, 4, 5, 6, 7, 9, 10])).is_err());
    }
}
