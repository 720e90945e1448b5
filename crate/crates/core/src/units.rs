//! Information units.
//!
//! All internal arithmetic is carried out in nits (natural logarithm).
//! Bits only appear at presentation time; `1 bit = ln 2 nit`.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nit,
    Bit,
}

impl Unit {
    /// Column-name suffix used in CSV headers.
    pub fn suffix(self) -> &'static str {
        match self {
            Unit::Nit => "nit",
            Unit::Bit => "bit",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

impl std::str::FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nit" | "nits" | "nat" | "nats" => Ok(Unit::Nit),
            "bit" | "bits" => Ok(Unit::Bit),
            other => Err(format!("unknown unit `{other}` (expected nit or bit)")),
        }
    }
}

/// A scalar amount of information tagged with its unit.
///
/// Values may be `±inf`, which encodes zero-probability conflicts
/// (e.g. a total misinformation update has an achieved gain of `-inf`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoQuantity {
    pub value: f64,
    pub unit: Unit,
}

impl InfoQuantity {
    pub const ZERO: InfoQuantity = InfoQuantity {
        value: 0.0,
        unit: Unit::Nit,
    };

    pub fn nits(value: f64) -> Self {
        Self {
            value,
            unit: Unit::Nit,
        }
    }

    pub fn bits(value: f64) -> Self {
        Self {
            value,
            unit: Unit::Bit,
        }
    }

    pub fn to(self, target: Unit) -> Self {
        convert_units(self, target)
    }

    pub fn as_nits(self) -> f64 {
        self.to(Unit::Nit).value
    }

    pub fn as_bits(self) -> f64 {
        self.to(Unit::Bit).value
    }

    pub fn is_finite(self) -> bool {
        self.value.is_finite()
    }
}

impl fmt::Display for InfoQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// Rescale `q` into `target` units.
pub fn convert_units(q: InfoQuantity, target: Unit) -> InfoQuantity {
    let value = match (q.unit, target) {
        (Unit::Nit, Unit::Nit) | (Unit::Bit, Unit::Bit) => q.value,
        (Unit::Bit, Unit::Nit) => q.value * LN_2,
        (Unit::Nit, Unit::Bit) => q.value / LN_2,
    };
    InfoQuantity {
        value,
        unit: target,
    }
}
