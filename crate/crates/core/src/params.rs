//! System parameters of the hydro single-machine single-load test system.
//!
//! The parameter file is a flat JSON object with exactly nine numeric keys:
//! `TJ, D, KL, TW, KP2, Ty, KP1, KI1, bP`. Unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and controller parameters, all in per-unit / seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Generator inertia time constant (s).
    #[serde(rename = "TJ")]
    pub t_j: f64,
    /// Generator damping coefficient.
    #[serde(rename = "D")]
    pub d: f64,
    /// Load frequency sensitivity.
    #[serde(rename = "KL")]
    pub k_l: f64,
    /// Water flow inertia time constant (s).
    #[serde(rename = "TW")]
    pub t_w: f64,
    /// Servo proportional gain.
    #[serde(rename = "KP2")]
    pub k_p2: f64,
    /// Servomotor time constant (s).
    #[serde(rename = "Ty")]
    pub t_y: f64,
    /// Governor PI proportional gain.
    #[serde(rename = "KP1")]
    pub k_p1: f64,
    /// Governor PI integral gain (1/s).
    #[serde(rename = "KI1")]
    pub k_i1: f64,
    /// Permanent droop.
    #[serde(rename = "bP")]
    pub b_p: f64,
}

impl SystemParams {
    /// The typical parameter set of the HSMSL test system.
    pub const fn typical() -> Self {
        Self {
            t_j: 6.4,
            d: 1.0,
            k_l: 0.03,
            t_w: 1.5,
            k_p2: 3.36,
            t_y: 0.2,
            k_p1: 1.7,
            k_i1: 1.2,
            b_p: 0.04,
        }
    }

    /// `1 + K_P1·b_P`, the common divisor of the governor coefficients.
    pub fn droop_divisor(&self) -> f64 {
        1.0 + self.k_p1 * self.b_p
    }

    /// Checks every invariant and returns `self` unchanged when all hold.
    pub fn validate(self) -> Result<Self> {
        let mut violations = Vec::new();
        for param in Param::ALL {
            if !self.get(param).is_finite() {
                violations.push(format!("{param} must be finite"));
            }
        }
        for param in [Param::TJ, Param::TW, Param::Ty, Param::KP2, Param::KI1] {
            // NaN already reported above
            if self.get(param) <= 0.0 {
                violations.push(format!("{param} must be > 0"));
            }
        }
        for param in [Param::BP, Param::KP1, Param::D, Param::KL] {
            if self.get(param) < 0.0 {
                violations.push(format!("{param} must be >= 0"));
            }
        }
        let g = self.droop_divisor();
        if g.is_nan() || g <= 0.0 {
            violations.push("1 + KP1·bP must be > 0".to_string());
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::TJ => self.t_j,
            Param::D => self.d,
            Param::KL => self.k_l,
            Param::TW => self.t_w,
            Param::KP2 => self.k_p2,
            Param::Ty => self.t_y,
            Param::KP1 => self.k_p1,
            Param::KI1 => self.k_i1,
            Param::BP => self.b_p,
        }
    }

    pub fn set(&mut self, param: Param, value: f64) {
        let slot = match param {
            Param::TJ => &mut self.t_j,
            Param::D => &mut self.d,
            Param::KL => &mut self.k_l,
            Param::TW => &mut self.t_w,
            Param::KP2 => &mut self.k_p2,
            Param::Ty => &mut self.t_y,
            Param::KP1 => &mut self.k_p1,
            Param::KI1 => &mut self.k_i1,
            Param::BP => &mut self.b_p,
        };
        *slot = value;
    }

    /// Copy with one parameter replaced.
    pub fn with(mut self, param: Param, value: f64) -> Self {
        self.set(param, value);
        self
    }

    /// Parses and validates a parameter document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let params: SystemParams =
            serde_json::from_str(text).map_err(|e| Error::ParamFile(e.to_string()))?;
        params.validate()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ParamFile(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::typical()
    }
}

/// Free-standing form of [`SystemParams::validate`].
pub fn validate_params(p: SystemParams) -> Result<SystemParams> {
    p.validate()
}

/// Names of the nine parameters, as used in files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Param {
    TJ,
    D,
    KL,
    TW,
    KP2,
    Ty,
    KP1,
    KI1,
    #[serde(rename = "bP")]
    BP,
}

impl Param {
    /// File/column order.
    pub const ALL: [Param; 9] = [
        Param::TJ,
        Param::D,
        Param::KL,
        Param::TW,
        Param::KP2,
        Param::Ty,
        Param::KP1,
        Param::KI1,
        Param::BP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::TJ => "TJ",
            Param::D => "D",
            Param::KL => "KL",
            Param::TW => "TW",
            Param::KP2 => "KP2",
            Param::Ty => "Ty",
            Param::KP1 => "KP1",
            Param::KI1 => "KI1",
            Param::BP => "bP",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}
