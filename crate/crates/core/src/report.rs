//! Verification reports and the deterministic number formatting shared by
//! every machine-readable output.

use serde::ser::Serializer;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::qarith::Amplitude;

/// `f64` rendered with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Complex number as `re+imi` (or `re-imi`), 17 significant digits each.
pub fn format_complex(z: Amplitude) -> String {
    let im = format!("{:.16e}", z.im);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{}{sign}{im}i", format_real(z.re))
}

/// Serializes a float as a JSON number with 17 significant digits; non-finite values become `null`.
pub fn serialize_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let text = if x.is_finite() { format_real(*x) } else { "null".to_string() };
    RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s)
}

pub fn serialize_opt_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_real(v, s),
        None => s.serialize_none(),
    }
}

pub fn serialize_reals<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let wrapped: Vec<Real> = xs.iter().copied().map(Real).collect();
    wrapped.serialize(s)
}

/// Newtype giving a float the 17-digit serialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_real(&self.0, s)
    }
}

/// Complex number serialized as `{"re": …, "im": …}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JsonComplex {
    #[serde(serialize_with = "serialize_real")]
    pub re: f64,
    #[serde(serialize_with = "serialize_real")]
    pub im: f64,
}

impl From<Amplitude> for JsonComplex {
    fn from(z: Amplitude) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "serialize_real")]
    pub residual: f64,
    #[serde(serialize_with = "serialize_real")]
    pub tol: f64,
    pub pass: bool,
}

/// Named residuals against thresholds. A NaN residual never passes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub k: Option<u32>,
    #[serde(serialize_with = "serialize_opt_real")]
    pub r: Option<f64>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, k: Option<u32>, r: Option<f64>) -> Self {
        VerificationReport { suite: suite.into(), k, r, checks: Vec::new() }
    }

    /// Records `residual <= tol`.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> bool {
        let pass = residual <= tol;
        self.checks.push(Check { name: name.into(), residual, tol, pass });
        pass
    }

    /// Records `residual > tol`; used for "must differ" assertions.
    pub fn check_exceeds(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> bool {
        let pass = residual > tol;
        self.checks.push(Check { name: name.into(), residual, tol, pass });
        pass
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}
