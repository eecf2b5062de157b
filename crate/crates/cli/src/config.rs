//! Run configuration: a flat JSON file mirroring the flags, with flags
//! taking precedence.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use hypercross::besov::BesovParams;
use hypercross::majorant::MajorantParams;
use hypercross::{Error, Result};

pub const MAX_DIMENSION: usize = 3;
pub const MAX_BLOCK_EXPONENT: u32 = 14;

/// A real number that may be `inf`; JSON has no infinity, so it is written as
/// the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

pub fn parse_real(s: &str) -> std::result::Result<Real, String> {
    match s.trim() {
        "inf" | "infinity" | "Inf" | "∞" => Ok(Real(f64::INFINITY)),
        t => t.parse::<f64>().map(Real).map_err(|e| format!("`{s}`: {e}")),
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(Real(x)),
            Raw::Text(s) => parse_real(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Every key the harness understands. Absent keys take subcommand defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        overlay!(self, flags, d, r, b, l, p, q, theta, beta, n, n_min, n_max, n_points, family, samples, seed, out);
        self
    }

    pub fn d_or(&self, default: usize) -> usize {
        self.d.unwrap_or(default)
    }

    /// Majorant parameters with defaults `r = 1`, `b = 0`, `l = 2`.
    pub fn majorant(&self, default_d: usize) -> Result<MajorantParams> {
        let d = self.d_or(default_d);
        if d > MAX_DIMENSION {
            return Err(Error::Capacity { what: "dimension d", needed: d as u128, cap: MAX_DIMENSION as u128 });
        }
        let b = match &self.b {
            Some(b) if b.len() == 1 && d > 1 => vec![b[0]; d],
            Some(b) => b.clone(),
            None => vec![0.0; d],
        };
        MajorantParams::new(d, self.r.unwrap_or(1.0), b, self.l.unwrap_or(2))
    }

    pub fn besov(&self, default_p: f64, default_theta: f64) -> Result<BesovParams> {
        BesovParams::new(
            self.p.map_or(default_p, |x| x.0),
            self.theta.map_or(default_theta, |x| x.0),
        )
    }

    /// Geometric grid between `n_min` and `n_max`; without `n_points`, one
    /// point per octave.
    pub fn n_grid(&self, default_min: f64, default_max: f64) -> Result<Vec<f64>> {
        let lo = self.n_min.unwrap_or(default_min);
        let hi = self.n_max.unwrap_or(default_max);
        let count = match self.n_points {
            Some(c) => c,
            None => {
                let octaves = (hi / lo).log2();
                if !(octaves.is_finite() && octaves >= 1.0) {
                    return Err(Error::Config(format!("n_min = {lo} and n_max = {hi} do not span an octave")));
                }
                octaves.round() as usize + 1
            }
        };
        hypercross::approx::geometric_grid(lo, hi, count)
    }

    pub fn seed_or(&self, default: u64) -> u64 {
        self.seed.unwrap_or(default)
    }

    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_roundtrip() {
        let cfg = RunConfig { q: Some(Real(f64::INFINITY)), p: Some(Real(2.0)), ..Default::default() };
        let text = cfg.echo();
        assert_eq!(text, r#"{"p":2.0,"q":"inf"}"#);
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = serde_json::from_str::<RunConfig>(r#"{"d": 2, "rr": 1}"#).unwrap_err();
        assert!(err.to_string().contains("rr"));
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { d: Some(3), r: Some(1.5), ..Default::default() };
        let flags = RunConfig { d: Some(2), ..Default::default() };
        let merged = file.overlay(&flags);
        assert_eq!(merged.d, Some(2));
        assert_eq!(merged.r, Some(1.5));
    }

    #[test]
    fn octave_grid() {
        let cfg = RunConfig { n_min: Some(64.0), n_max: Some(1048576.0), ..Default::default() };
        assert_eq!(cfg.n_grid(1.0, 2.0).unwrap().len(), 15);
    }
}
