//! Published coefficient tables for the db4/db6/db8 wavelets and scaling
//! functions, and the gated closed-form evaluation on `[0, T)`.
//!
//! Coefficients are kept as the printed decimal strings so they can be
//! re-emitted byte for byte. Suspected misprints (repeated phases in db6
//! wavelet rows 3-4 and db4 scaling rows 5-6) are kept as printed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sine_fit::{Kind, SineTerm, SumOfSines};
use crate::waveform::SampledWaveform;

/// Families with shipped coefficient tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Db4,
    Db6,
    Db8,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Db4, Family::Db6, Family::Db8];

    pub fn order(&self) -> usize {
        match self {
            Family::Db4 => 4,
            Family::Db6 => 6,
            Family::Db8 => 8,
        }
    }

    /// `2N - 1`.
    pub fn support(&self) -> f64 {
        (2 * self.order() - 1) as f64
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Db4 => "db4",
            Family::Db6 => "db6",
            Family::Db8 => "db8",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "db4" | "cdb4" => Ok(Family::Db4),
            "db6" | "cdb6" => Ok(Family::Db6),
            "db8" | "cdb8" => Ok(Family::Db8),
            other => Err(Error::NoSuchPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PresetKey {
    pub family: Family,
    pub kind: Kind,
}

impl PresetKey {
    pub const fn new(family: Family, kind: Kind) -> Self {
        Self { family, kind }
    }

    /// The six shipped combinations, wavelets first.
    pub fn all() -> [PresetKey; 6] {
        let f = Family::ALL;
        [
            Self::new(f[0], Kind::Wavelet),
            Self::new(f[1], Kind::Wavelet),
            Self::new(f[2], Kind::Wavelet),
            Self::new(f[0], Kind::Scaling),
            Self::new(f[1], Kind::Scaling),
            Self::new(f[2], Kind::Scaling),
        ]
    }
}

impl fmt::Display for PresetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family, self.kind)
    }
}

/// Parses `db4-wavelet`, `db6-scaling`, ...
impl FromStr for PresetKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let missing = || Error::NoSuchPreset(s.to_string());
        let (family, kind) = s.split_once('-').ok_or_else(missing)?;
        let family = family.parse().map_err(|_| missing())?;
        let kind = kind.parse().map_err(|_| missing())?;
        Ok(Self::new(family, kind))
    }
}

type Rows = &'static [[&'static str; 3]];

const DB4_WAVELET: Rows = &[
    ["0.3452", "4.586", "-2.316"],
    ["0.2783", "3.460", "1.413"],
    ["0.3015", "5.770", "-0.373"],
    ["0.2129", "6.960", "-4.943"],
    ["0.1293", "2.414", "-1.794"],
    ["0.1120", "8.161", "-3.225"],
    ["0.0295", "9.366", "-7.567"],
    ["0.0223", "1.372", "1.102"],
];

const DB6_WAVELET: Rows = &[
    ["0.2623", "4.850", "-1.655"],
    ["0.2520", "3.993", "3.014"],
    ["0.2287", "5.724", "0.649"],
    ["0.1778", "3.197", "0.649"],
    ["0.1729", "6.590", "-5.635"],
    ["0.1098", "7.459", "-4.613"],
    ["0.0820", "2.436", "4.117"],
    ["0.0504", "8.333", "-9.828"],
];

const DB8_WAVELET: Rows = &[
    ["-0.2054", "5.066", "-17.48"],
    ["0.1334", "3.116", "-6.671"],
    ["0.1926", "3.720", "-10.66"],
    ["-0.0622", "2.532", "-12.39"],
    ["0.2145", "4.379", "-15.39"],
    ["0.1768", "5.750", "-26.04"],
    ["0.1360", "6.419", "-25.21"],
    ["-0.0917", "7.081", "-27.53"],
    ["-0.0468", "7.740", "-32.94"],
];

const DB4_SCALING: Rows = &[
    ["0.3762", "0.672", "0.171"],
    ["0.2113", "3.226", "-2.404"],
    ["0.3900", "1.204", "0.939"],
    ["0.0770", "4.193", "2.098"],
    ["0.2661", "2.384", "-1.379"],
    ["0.0081", "5.586", "-1.379"],
    ["0.0226", "8.537", "-1.184"],
    ["0.0205", "9.424", "3.346"],
];

const DB6_SCALING: Rows = &[
    ["0.2247", "0.648", "1.540"],
    ["0.1244", "1.323", "-0.241"],
    ["0.3148", "2.333", "-1.329"],
    ["0.0111", "0.032", "0.8670"],
    ["0.3007", "2.084", "-2.628"],
    ["0.0489", "4.087", "-5.627"],
    ["0.1224", "3.019", "2.881"],
    ["0.0935", "3.728", "0.425"],
    ["0.0296", "0.338", "0.208"],
    ["0.2088", "0.342", "0.735"],
];

const DB8_SCALING: Rows = &[
    ["0.1417", "-0.004", "1.617"],
    ["0.1214", "1.697", "-1.584"],
    ["0.1480", "2.174", "-2.969"],
    ["0.1840", "-0.271", "0.929"],
    ["0.1603", "2.544", "-3.420"],
    ["0.1057", "2.934", "-4.170"],
    ["0.1136", "3.586", "-1.468"],
    ["0.0877", "3.759", "-0.154"],
    ["0.1234", "0.907", "-0.523"],
    ["0.1419", "1.239", "-0.457"],
];

/// The coefficient rows `(a, b, c)` exactly as printed.
pub fn preset_rows(key: PresetKey) -> &'static [[&'static str; 3]] {
    match (key.family, key.kind) {
        (Family::Db4, Kind::Wavelet) => DB4_WAVELET,
        (Family::Db6, Kind::Wavelet) => DB6_WAVELET,
        (Family::Db8, Kind::Wavelet) => DB8_WAVELET,
        (Family::Db4, Kind::Scaling) => DB4_SCALING,
        (Family::Db6, Kind::Scaling) => DB6_SCALING,
        (Family::Db8, Kind::Scaling) => DB8_SCALING,
    }
}

/// The published model for `key`, coefficients and order as printed,
/// support `2N - 1`.
pub fn preset(key: PresetKey) -> SumOfSines {
    let terms = preset_rows(key)
        .iter()
        .map(|[a, b, c]| SineTerm::new(parse(a), parse(b), parse(c)))
        .collect();
    SumOfSines::new(terms, key.family.support()).expect("shipped presets are valid")
}

/// [`preset`] looked up by its `family-kind` name.
pub fn preset_by_name(name: &str) -> Result<SumOfSines> {
    Ok(preset(name.parse()?))
}

fn parse(s: &str) -> f64 {
    s.parse().expect("shipped preset literal")
}

/// `Π(t)` on the half-open support `[0, T)`.
#[inline]
pub fn gate(t: f64, support: f64) -> f64 {
    if (0.0..support).contains(&t) {
        1.0
    } else {
        0.0
    }
}

/// The model confined to `[0, T)`; exactly zero elsewhere.
#[inline]
pub fn eval_gated(model: &SumOfSines, t: f64) -> f64 {
    if (0.0..model.support()).contains(&t) {
        model.eval(t)
    } else {
        0.0
    }
}

/// Samples [`eval_gated`] at `i·dt` for every `i·dt < T`. Requires
/// `dt <= T/16`.
pub fn sample_gated(model: &SumOfSines, dt: f64) -> Result<SampledWaveform> {
    let support = model.support();
    if !(dt > 0.0) || dt > support / 16.0 {
        return Err(Error::GridTooCoarse { dt, support });
    }
    let len = grid_len(support, dt);
    SampledWaveform::from_fn(0.0, dt, len, |t| eval_gated(model, t))
}

/// Number of points `i·dt` in `[0, T)`, treating `T/dt` within 1e-9 of an
/// integer as exact.
fn grid_len(support: f64, dt: f64) -> usize {
    let ratio = support / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}
