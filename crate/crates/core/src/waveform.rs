//! Uniformly sampled real waveforms and their `t,value` CSV form.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::format::sig17;

/// Real samples on the grid `t0 + i*dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SampledWaveform {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::BadInput(format!("grid step must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::BadInput("grid start must be finite".into()));
        }
        if values.is_empty() {
            return Err(Error::BadInput("waveform has no samples".into()));
        }
        Ok(Self { t0, dt, values })
    }

    /// Samples `f` at `t0 + i*dt` for `i < len`.
    pub fn from_fn(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..len).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::new(t0, dt, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.time(i))
    }

    /// Riemann sum `Σ values·dt`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dt
    }

    /// Riemann sum `Σ values²·dt`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.dt
    }

    pub fn peak_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Keeps every `factor`-th sample starting at the first one.
    pub fn decimate(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::BadInput("decimation factor must be >= 1".into()));
        }
        let values = self.values.iter().step_by(factor).copied().collect();
        Self::new(self.t0, self.dt * factor as f64, values)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.times().zip(&self.values) {
            writeln!(out, "{},{}", sig17(t), sig17(*v))?;
        }
        Ok(())
    }

    /// Reads a `t,value` CSV. The time column must be uniform to within
    /// 1e-9 relative to the step; `#` lines are comments.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::BadInput("expected header `t,value`".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record?;
            times.push(parse_field(&record[0])?);
            values.push(parse_field(&record[1])?);
        }
        if times.len() < 2 {
            return Err(Error::BadInput("need at least two samples to infer dt".into()));
        }
        let t0 = times[0];
        let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
        for (i, t) in times.iter().enumerate() {
            if (t - (t0 + i as f64 * dt)).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::BadInput(format!("time column is not uniform at row {}", i + 1)));
            }
        }
        Self::new(t0, dt, values)
    }
}

fn parse_field(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::BadInput(format!("not a number: `{s}`")))
}
