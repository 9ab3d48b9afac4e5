//! Continuous wavelet transform with closed-form kernels.
//!
//! Scales are dimensionless (samples): at scale `a` the kernel is evaluated
//! at `(t_n - t_j)/(a·Δ)` with `Δ` the sampling period, so the pseudo
//! frequency of scale `a` is `Fc/(a·Δ)`. Coefficients use the correlation
//! form with `1/√a` normalization and zero extension past the signal end:
//!
//! `W(a, t_j) = (1/√a)·Σ_n x[n]·ψ((t_n - t_j)/(a·Δ))·Δ`

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::closed_form::{eval_gated, sample_gated};
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::sine_fit::SumOfSines;
use crate::spectrum::dft_oracle;
use crate::waveform::SampledWaveform;

pub const DEFAULT_SCALE_COUNT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    sampling_dt: f64,
}

impl ScaleGrid {
    pub fn new(scales: Vec<f64>, sampling_dt: f64) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::BadScales("no scales".into()));
        }
        if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::BadScales("scales must be positive and finite".into()));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadScales("scales must be strictly ascending".into()));
        }
        if !(sampling_dt > 0.0 && sampling_dt.is_finite()) {
            return Err(Error::BadScales(format!("sampling period must be positive, got {sampling_dt}")));
        }
        Ok(Self { scales, sampling_dt })
    }

    /// `count` scales spaced evenly in `log(scale)` over `[min, max]`.
    pub fn log_spaced(min: f64, max: f64, count: usize, sampling_dt: f64) -> Result<Self> {
        if count == 0 || !(min > 0.0 && max > min) && !(count == 1 && min > 0.0) {
            return Err(Error::BadScales(format!("bad log range [{min}, {max}] x {count}")));
        }
        if count == 1 {
            return Self::new(vec![min], sampling_dt);
        }
        let ratio = (max / min).ln() / (count - 1) as f64;
        let scales = (0..count).map(|i| min * (ratio * i as f64).exp()).collect();
        Self::new(scales, sampling_dt)
    }

    /// 64 log-spaced scales whose pseudo-frequencies span
    /// `[2/duration, 0.5/Δ]` for center frequency `fc`.
    pub fn for_signal(signal: &SampledWaveform, fc: f64) -> Result<Self> {
        let dt = signal.dt();
        let duration = signal.len() as f64 * dt;
        let f_lo = 2.0 / duration;
        let f_hi = 0.5 / dt;
        Self::log_spaced(fc / (f_hi * dt), fc / (f_lo * dt), DEFAULT_SCALE_COUNT, dt)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn sampling_dt(&self) -> f64 {
        self.sampling_dt
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// CWT coefficients and their energies over `scales × times`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalogramGrid {
    scales: ScaleGrid,
    times: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    energy: Vec<Vec<f64>>,
    kernel_support: f64,
}

impl ScalogramGrid {
    fn from_coefficients(
        scales: ScaleGrid,
        times: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
        kernel_support: f64,
    ) -> Self {
        let energy = coefficients
            .iter()
            .map(|row| row.iter().map(|c| c * c).collect())
            .collect();
        Self { scales, times, coefficients, energy, kernel_support }
    }

    pub fn scales(&self) -> &ScaleGrid {
        &self.scales
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Row `i` holds scale `i`.
    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn energy(&self) -> &[Vec<f64>] {
        &self.energy
    }

    /// Support `T` of the kernel that produced the grid.
    pub fn kernel_support(&self) -> f64 {
        self.kernel_support
    }

    /// First column index at `scale_index` whose kernel window runs past the
    /// end of the signal (zero-extended region).
    pub fn edge_start(&self, scale_index: usize) -> usize {
        let reach = self.scales.scales[scale_index] * self.kernel_support;
        let n = self.times.len();
        n.saturating_sub(reach.ceil() as usize).min(n)
    }

    /// Energy summed over time (times Δ) for each scale.
    pub fn scale_energy(&self) -> Vec<f64> {
        let dt = self.scales.sampling_dt;
        self.energy.iter().map(|row| row.iter().sum::<f64>() * dt).collect()
    }
}

/// Continuous wavelet transform of `signal` with the gated closed-form
/// `kernel`. Every kernel value comes from [`eval_gated`].
pub fn cwt(signal: &SampledWaveform, scales: &ScaleGrid, kernel: &SumOfSines) -> Result<ScalogramGrid> {
    if signal.len() < 8 {
        return Err(Error::BadInput(format!("signal needs at least 8 samples, got {}", signal.len())));
    }
    let dt = scales.sampling_dt();
    if ((signal.dt() - dt) / dt).abs() > 1e-9 {
        return Err(Error::BadScales(format!(
            "scale grid sampling period {dt} differs from the signal's {}",
            signal.dt()
        )));
    }
    let x = signal.values();
    let n = x.len();
    let support = kernel.support();
    let coefficients = scales
        .scales()
        .iter()
        .map(|&a| {
            // ψ(m/a) is non-zero only for 0 <= m < a·T.
            let taps: Vec<f64> = (0..n)
                .map(|m| m as f64 / a)
                .take_while(|&u| u < support)
                .map(|u| eval_gated(kernel, u))
                .collect();
            let norm = dt / a.sqrt();
            (0..n)
                .map(|j| {
                    let avail = (n - j).min(taps.len());
                    let acc: f64 = x[j..j + avail].iter().zip(&taps[..avail]).map(|(s, k)| s * k).sum();
                    acc * norm
                })
                .collect()
        })
        .collect();
    let times = signal.times().collect();
    Ok(ScalogramGrid::from_coefficients(scales.clone(), times, coefficients, support))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMethod {
    /// `b` of the largest-`|a|` term.
    DominantTerm,
    /// Peak of the gated kernel's DFT magnitude.
    DftPeak,
}

/// Center frequency of `kernel` in cycles per time unit.
pub fn center_frequency(kernel: &SumOfSines, method: CenterMethod) -> Result<f64> {
    match method {
        CenterMethod::DominantTerm => Ok(kernel.dominant_term().frequency.abs() / (2.0 * std::f64::consts::PI)),
        CenterMethod::DftPeak => {
            let wave = sample_gated(kernel, kernel.support() / 1024.0)?;
            let grid = dft_oracle(&wave, 32 * wave.len())?;
            let mags = grid.magnitudes();
            let (best, _) = grid
                .omegas()
                .iter()
                .zip(&mags)
                .filter(|(w, _)| **w > 0.0)
                .fold((0.0, f64::NEG_INFINITY), |acc, (&w, &m)| if m > acc.1 { (w, m) } else { acc });
            Ok(best / (2.0 * std::f64::consts::PI))
        }
    }
}

/// Pseudo-frequency `Fc/(scale·Δ)`.
pub fn scale_to_frequency(scale: f64, sampling_dt: f64, fc: f64) -> f64 {
    fc / (scale * sampling_dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency: f64,
    pub energy: f64,
}

/// Result of [`detect_tones`]. `complete` is false when fewer maxima than
/// requested were found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneReport {
    #[serde(rename = "Fc")]
    pub fc: f64,
    pub tones: Vec<Tone>,
    #[serde(skip)]
    pub complete: bool,
}

impl ToneReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.tones.iter().map(|t| t.frequency).collect()
    }
}

/// The `count` strongest local maxima of time-integrated energy over scale,
/// converted to pseudo-frequencies and ordered by descending energy.
pub fn detect_tones(gram: &ScalogramGrid, fc: f64, count: usize) -> Result<ToneReport> {
    if count == 0 || count > gram.scales().len() {
        return Err(Error::BadInput(format!(
            "tone count must be 1..={}, got {count}",
            gram.scales().len()
        )));
    }
    let energy = gram.scale_energy();
    let mut maxima: Vec<usize> = (1..energy.len().saturating_sub(1))
        .filter(|&i| energy[i] > energy[i - 1] && energy[i] >= energy[i + 1])
        .collect();
    maxima.sort_by(|&x, &y| energy[y].total_cmp(&energy[x]).then(x.cmp(&y)));
    maxima.truncate(count);
    let dt = gram.scales().sampling_dt();
    let tones: Vec<Tone> = maxima
        .iter()
        .map(|&i| Tone {
            frequency: scale_to_frequency(gram.scales().scales()[i], dt, fc),
            energy: energy[i],
        })
        .collect();
    Ok(ToneReport { fc, complete: tones.len() == count, tones })
}

/// `sin(2π f₁ t) + sin(2π f₂ t)` sampled at `dt` for `duration`.
pub fn two_tone(f1: f64, f2: f64, duration: f64, dt: f64) -> Result<SampledWaveform> {
    if !(duration > 0.0 && dt > 0.0) {
        return Err(Error::BadInput("duration and dt must be positive".into()));
    }
    let len = (duration / dt).round() as usize;
    let tau = 2.0 * std::f64::consts::PI;
    SampledWaveform::from_fn(0.0, dt, len, |t| (tau * f1 * t).sin() + (tau * f2 * t).sin())
}

/// One `(scale, time)` cell of a scalogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalogramRow {
    pub scale: f64,
    pub time: f64,
    pub coefficient: f64,
    pub energy: f64,
}

/// Long-form rows, scale-major.
pub fn export_3d(gram: &ScalogramGrid) -> Vec<ScalogramRow> {
    let mut rows = Vec::with_capacity(gram.scales().len() * gram.times().len());
    for (i, &scale) in gram.scales().scales().iter().enumerate() {
        for (j, &time) in gram.times().iter().enumerate() {
            rows.push(ScalogramRow {
                scale,
                time,
                coefficient: gram.coefficients[i][j],
                energy: gram.energy[i][j],
            });
        }
    }
    rows
}

/// Writes `scale,time,coefficient,energy` preceded by `#` metadata lines
/// (sampling period, kernel support, and the zero-extended edge rule).
pub fn write_scalogram_csv<W: Write>(gram: &ScalogramGrid, mut out: W) -> Result<()> {
    writeln!(out, "# sampling_dt={}", sig17(gram.scales().sampling_dt()))?;
    writeln!(out, "# kernel_support={}", sig17(gram.kernel_support()))?;
    writeln!(
        out,
        "# edge: columns with time > t_end - scale*sampling_dt*kernel_support are zero-extended"
    )?;
    writeln!(out, "scale,time,coefficient,energy")?;
    for r in export_3d(gram) {
        writeln!(out, "{},{},{},{}", sig17(r.scale), sig17(r.time), sig17(r.coefficient), sig17(r.energy))?;
    }
    Ok(())
}

/// Inverse of [`write_scalogram_csv`].
pub fn read_scalogram_csv<R: Read>(mut input: R) -> Result<ScalogramGrid> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut sampling_dt = None;
    let mut kernel_support = None;
    for line in text.lines().filter(|l| l.starts_with('#')) {
        if let Some(v) = line.strip_prefix("# sampling_dt=") {
            sampling_dt = Some(parse(v)?);
        } else if let Some(v) = line.strip_prefix("# kernel_support=") {
            kernel_support = Some(parse(v)?);
        }
    }
    let sampling_dt = sampling_dt.ok_or_else(|| Error::BadInput("missing `# sampling_dt=` line".into()))?;
    let kernel_support =
        kernel_support.ok_or_else(|| Error::BadInput("missing `# kernel_support=` line".into()))?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut scales: Vec<f64> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    let mut coefficients: Vec<Vec<f64>> = Vec::new();
    let mut energy: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(Error::BadInput("scalogram rows need four fields".into()));
        }
        let (s, t, c, e) = (parse(&record[0])?, parse(&record[1])?, parse(&record[2])?, parse(&record[3])?);
        if scales.last() != Some(&s) {
            scales.push(s);
            coefficients.push(Vec::new());
            energy.push(Vec::new());
        }
        if scales.len() == 1 {
            times.push(t);
        }
        coefficients.last_mut().unwrap().push(c);
        energy.last_mut().unwrap().push(e);
    }
    if coefficients.iter().any(|row| row.len() != times.len()) {
        return Err(Error::BadInput("scalogram rows are ragged".into()));
    }
    Ok(ScalogramGrid {
        scales: ScaleGrid::new(scales, sampling_dt)?,
        times,
        coefficients,
        energy,
        kernel_support,
    })
}

fn parse(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::BadInput(format!("not a number: `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{preset, Family, PresetKey};
    use crate::sine_fit::{Kind, SineTerm};

    fn db4() -> SumOfSines {
        preset(PresetKey::new(Family::Db4, Kind::Wavelet))
    }

    #[test]
    fn pseudo_frequency_arithmetic() {
        assert!((scale_to_frequency(73.0, 0.001, 0.73) - 10.0).abs() < 1e-12);
        assert!((scale_to_frequency(18.25, 0.001, 0.73) - 40.0).abs() < 1e-12);
        assert!((scale_to_frequency(40.0, 0.01, 0.5) - 2.0 * scale_to_frequency(80.0, 0.01, 0.5)).abs() < 1e-15);
    }

    #[test]
    fn center_frequencies() {
        assert!((center_frequency(&db4(), CenterMethod::DominantTerm).unwrap() - 4.586 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let unit = SumOfSines::new(vec![SineTerm::new(1.0, 2.0 * std::f64::consts::PI, 0.0)], 1.0).unwrap();
        assert!((center_frequency(&unit, CenterMethod::DominantTerm).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scale_grid_validation() {
        assert!(matches!(ScaleGrid::new(vec![], 0.1), Err(Error::BadScales(_))));
        assert!(ScaleGrid::new(vec![2.0, 1.0], 0.1).is_err());
        assert!(ScaleGrid::new(vec![0.0, 1.0], 0.1).is_err());
        let g = ScaleGrid::log_spaced(1.0, 100.0, 3, 0.1).unwrap();
        assert!((g.scales()[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_gives_zero_grid_and_no_tones() {
        let signal = SampledWaveform::new(0.0, 0.01, vec![0.0; 64]).unwrap();
        let scales = ScaleGrid::log_spaced(2.0, 20.0, 8, 0.01).unwrap();
        let gram = cwt(&signal, &scales, &db4()).unwrap();
        assert!(gram.energy().iter().flatten().all(|e| *e == 0.0));
        let report = detect_tones(&gram, 0.73, 2).unwrap();
        assert!(report.tones.is_empty() && !report.complete);
    }

    #[test]
    fn matched_filter_peak() {
        let dt = 1.0 / 64.0;
        let kernel = db4();
        let shift = 100;
        let signal = SampledWaveform::from_fn(0.0, dt, 900, |t| eval_gated(&kernel, t - shift as f64 * dt)).unwrap();
        let scales = ScaleGrid::new(vec![64.0], dt).unwrap();
        let gram = cwt(&signal, &scales, &kernel).unwrap();
        let row = &gram.coefficients()[0];
        let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert_eq!(argmax, shift);
    }

    #[test]
    fn energy_is_square_of_coefficients() {
        let signal = two_tone(3.0, 11.0, 1.0, 1.0 / 200.0).unwrap();
        let scales = ScaleGrid::log_spaced(2.0, 40.0, 6, 1.0 / 200.0).unwrap();
        let gram = cwt(&signal, &scales, &db4()).unwrap();
        for (crow, erow) in gram.coefficients().iter().zip(gram.energy()) {
            for (c, e) in crow.iter().zip(erow) {
                assert_eq!(c * c, *e);
            }
        }
    }

    #[test]
    fn linearity_and_shift_covariance() {
        let dt = 1.0 / 128.0;
        let f = SampledWaveform::from_fn(0.0, dt, 256, |t| (9.0 * t).sin() + 0.3 * (40.0 * t).cos()).unwrap();
        let g = SampledWaveform::from_fn(0.0, dt, 256, |t| (-(t - 1.0).powi(2) * 8.0).exp()).unwrap();
        let (alpha, beta) = (1.7, -0.4);
        let combo = SampledWaveform::new(
            0.0,
            dt,
            f.values().iter().zip(g.values()).map(|(x, y)| alpha * x + beta * y).collect(),
        )
        .unwrap();
        let scales = ScaleGrid::log_spaced(2.0, 12.0, 5, dt).unwrap();
        let k = db4();
        let (wf, wg, wc) = (cwt(&f, &scales, &k).unwrap(), cwt(&g, &scales, &k).unwrap(), cwt(&combo, &scales, &k).unwrap());
        for i in 0..scales.len() {
            for j in 0..256 {
                let expected = alpha * wf.coefficients()[i][j] + beta * wg.coefficients()[i][j];
                assert!((wc.coefficients()[i][j] - expected).abs() < 1e-10);
            }
        }

        let m = 17;
        let shifted = SampledWaveform::new(
            0.0,
            dt,
            (0..256).map(|n| if n >= m { g.values()[n - m] } else { 0.0 }).collect(),
        )
        .unwrap();
        let ws = cwt(&shifted, &scales, &k).unwrap();
        for i in 0..scales.len() {
            let edge = wg.edge_start(i);
            for j in 0..edge.saturating_sub(m) {
                assert!((ws.coefficients()[i][j + m] - wg.coefficients()[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn export_round_trip() {
        let signal = two_tone(3.0, 11.0, 0.5, 1.0 / 100.0).unwrap();
        let scales = ScaleGrid::log_spaced(1.5, 20.0, 7, 1.0 / 100.0).unwrap();
        let gram = cwt(&signal, &scales, &db4()).unwrap();
        let rows = export_3d(&gram);
        assert_eq!(rows.len(), 7 * 50);
        let max_row = rows.iter().map(|r| r.energy).fold(0.0, f64::max);
        let max_grid = gram.energy().iter().flatten().copied().fold(0.0, f64::max);
        assert_eq!(max_row, max_grid);

        let mut buf = Vec::new();
        write_scalogram_csv(&gram, &mut buf).unwrap();
        let back = read_scalogram_csv(buf.as_slice()).unwrap();
        assert_eq!(back, gram);
    }

    #[test]
    fn bad_inputs() {
        let short = SampledWaveform::new(0.0, 0.1, vec![1.0; 4]).unwrap();
        let scales = ScaleGrid::new(vec![1.0], 0.1).unwrap();
        assert!(cwt(&short, &scales, &db4()).is_err());
        let signal = SampledWaveform::new(0.0, 0.2, vec![1.0; 16]).unwrap();
        assert!(matches!(cwt(&signal, &scales, &db4()), Err(Error::BadScales(_))));
    }
}
