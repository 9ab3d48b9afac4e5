//! The sum-of-sines model `Σ a_k sin(b_k t + c_k)` and its least-squares fit.

mod init;
mod lm;

pub use init::initialize_from_spectrum;
pub use lm::{goodness, jacobian, lm_fit, residuals, FitReport, LmOptions};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_TERMS: usize = 16;

/// One `a·sin(b·t + c)` component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineTerm {
    #[serde(rename = "a")]
    pub amplitude: f64,
    #[serde(rename = "b")]
    pub frequency: f64,
    #[serde(rename = "c")]
    pub phase: f64,
}

impl SineTerm {
    pub const fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self { amplitude, frequency, phase }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).sin()
    }

    /// Same function with `b >= 0`, `a >= 0` and `c` in `(-π, π]`.
    pub fn canonical(&self) -> Self {
        let (mut a, mut b, mut c) = (self.amplitude, self.frequency, self.phase);
        if b < 0.0 {
            // a sin(-|b|t + c) = -a sin(|b|t - c)
            a = -a;
            b = -b;
            c = -c;
        }
        if a < 0.0 {
            a = -a;
            c += PI;
        }
        Self::new(a, b, wrap_phase(c))
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(c: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = c - two_pi * (c / two_pi).round();
    if w <= -PI {
        w += two_pi;
    } else if w > PI {
        w -= two_pi;
    }
    w
}

/// A sum of 1 to 16 sine terms together with the support length `T` it
/// approximates on `[0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumOfSines {
    terms: Vec<SineTerm>,
    support: f64,
}

impl SumOfSines {
    pub fn new(terms: Vec<SineTerm>, support: f64) -> Result<Self> {
        if terms.is_empty() || terms.len() > MAX_TERMS {
            return Err(Error::BadInput(format!(
                "a model needs 1..={MAX_TERMS} terms, got {}",
                terms.len()
            )));
        }
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::BadInput(format!("support must be positive, got {support}")));
        }
        if terms
            .iter()
            .any(|t| !(t.amplitude.is_finite() && t.frequency.is_finite() && t.phase.is_finite()))
        {
            return Err(Error::BadInput("model coefficients must be finite".into()));
        }
        Ok(Self { terms, support })
    }

    pub fn terms(&self) -> &[SineTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// Ungated evaluation `Σ a_k sin(b_k t + c_k)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// Canonical form: every term canonical, ordered by ascending frequency.
    pub fn canonicalize(&self) -> Self {
        let mut terms: Vec<SineTerm> = self.terms.iter().map(SineTerm::canonical).collect();
        terms.sort_by(|x, y| {
            x.frequency
                .total_cmp(&y.frequency)
                .then(y.amplitude.total_cmp(&x.amplitude))
                .then(x.phase.total_cmp(&y.phase))
        });
        Self { terms, support: self.support }
    }

    /// Terms reordered by ascending frequency, coefficients untouched.
    pub fn sorted_by_frequency(&self) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_by(|x, y| x.frequency.total_cmp(&y.frequency));
        Self { terms, support: self.support }
    }

    pub fn is_sorted_by_frequency(&self) -> bool {
        self.terms.windows(2).all(|w| w[0].frequency <= w[1].frequency)
    }

    /// The term with the largest `|a|` (first one on ties).
    pub fn dominant_term(&self) -> SineTerm {
        let mut best = self.terms[0];
        for t in &self.terms[1..] {
            if t.amplitude.abs() > best.amplitude.abs() {
                best = *t;
            }
        }
        best
    }

    pub(crate) fn from_params(params: &[f64], support: f64) -> Result<Self> {
        let terms = params
            .chunks_exact(3)
            .map(|p| SineTerm::new(p[0], p[1], p[2]))
            .collect();
        Self::new(terms, support)
    }

    pub(crate) fn to_params(&self) -> Vec<f64> {
        self.terms
            .iter()
            .flat_map(|t| [t.amplitude, t.frequency, t.phase])
            .collect()
    }
}

/// `Σ a_k sin(b_k t + c_k)`; no gating.
pub fn model_eval(model: &SumOfSines, t: f64) -> f64 {
    model.eval(t)
}

/// Whether a model approximates the wavelet ψ or the scaling function φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Wavelet,
    Scaling,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Wavelet => "wavelet",
            Kind::Scaling => "scaling",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wavelet" => Ok(Kind::Wavelet),
            "scaling" => Ok(Kind::Scaling),
            other => Err(Error::BadInput(format!("unknown kind `{other}`"))),
        }
    }
}

/// On-disk JSON form of a model:
/// `{"family", "kind", "support", "terms": [{"a", "b", "c"}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub family: String,
    pub kind: Kind,
    pub support: f64,
    pub terms: Vec<SineTerm>,
}

impl ModelFile {
    pub fn new(family: impl Into<String>, kind: Kind, model: &SumOfSines) -> Self {
        Self {
            family: family.into(),
            kind,
            support: model.support(),
            terms: model.terms().to_vec(),
        }
    }

    pub fn model(&self) -> Result<SumOfSines> {
        SumOfSines::new(self.terms.clone(), self.support)
    }

    /// Daubechies order parsed from a `dbN` family name, if any.
    pub fn daubechies_order(&self) -> Option<usize> {
        parse_family(&self.family)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        file.model()?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Parses `dbN` (also accepting the `cdbN` spelling) into `N`.
pub fn parse_family(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("cdb").or_else(|| name.strip_prefix("db"))?;
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_term_eval() {
        let m = SumOfSines::new(vec![SineTerm::new(1.0, PI, 0.0)], 1.0).unwrap();
        assert!((model_eval(&m, 0.5) - 1.0).abs() < 1e-15);
        // all arguments multiples of π
        let m = SumOfSines::new(
            vec![SineTerm::new(2.0, PI, 0.0), SineTerm::new(-0.7, 2.0 * PI, PI)],
            1.0,
        )
        .unwrap();
        assert!(model_eval(&m, 3.0).abs() < 1e-14);
    }

    #[test]
    fn term_count_bounds() {
        assert!(SumOfSines::new(vec![], 1.0).is_err());
        assert!(SumOfSines::new(vec![SineTerm::new(1.0, 1.0, 0.0); 17], 1.0).is_err());
        assert!(SumOfSines::new(vec![SineTerm::new(1.0, 1.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(-17.48) - (-17.48 + 6.0 * PI)).abs() < 1e-12);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn family_names() {
        assert_eq!(parse_family("db4"), Some(4));
        assert_eq!(parse_family("cdb8"), Some(8));
        assert_eq!(parse_family("sym4"), None);
    }

    #[test]
    fn json_shape() {
        let m = SumOfSines::new(vec![SineTerm::new(0.5, 3.0, 1.0)], 7.0).unwrap();
        let json = ModelFile::new("db4", Kind::Wavelet, &m).to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["family"], "db4");
        assert_eq!(v["kind"], "wavelet");
        assert_eq!(v["support"], 7.0);
        assert_eq!(v["terms"][0]["a"], 0.5);
        assert_eq!(v["terms"][0]["b"], 3.0);
        assert_eq!(v["terms"][0]["c"], 1.0);
        assert!(ModelFile::from_json(r#"{"family":"x","kind":"wave","support":1,"terms":[]}"#).is_err());
        assert!(ModelFile::from_json(r#"{"family":"x","kind":"wavelet","support":1,"terms":[]}"#).is_err());
    }

    fn arb_term() -> impl Strategy<Value = SineTerm> {
        (-2.0..2.0f64, -12.0..12.0f64, -40.0..40.0f64).prop_map(|(a, b, c)| SineTerm::new(a, b, c))
    }

    proptest! {
        #[test]
        fn canonicalization_preserves_values(terms in prop::collection::vec(arb_term(), 1..10)) {
            let m = SumOfSines::new(terms, 7.0).unwrap();
            let c = m.canonicalize();
            prop_assert_eq!(&c.canonicalize(), &c);
            prop_assert!(c.is_sorted_by_frequency());
            for t in c.terms() {
                prop_assert!(t.amplitude >= 0.0 && t.frequency >= 0.0);
                prop_assert!(t.phase > -PI && t.phase <= PI);
            }
            for i in 0..=64 {
                let t = 7.0 * i as f64 / 64.0;
                prop_assert!((m.eval(t) - c.eval(t)).abs() < 1e-12);
            }
        }
    }
}
