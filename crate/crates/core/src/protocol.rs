use core::fmt;
use core::str::FromStr;

use crate::bb84::{self, Bb84Params};
use crate::ext_b92::{self, max_noise};
use crate::{Error, Result};

/// The two key-distribution protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    ExtB92,
    Bb84,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::ExtB92, Protocol::Bb84];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::ExtB92 => "ext_b92",
            Protocol::Bb84 => "bb84",
        }
    }

    /// Per-pulse key rate on an ideal (lossless) channel.
    pub fn key_rate(self, d: u32, q: f64, xi: f64) -> Result<f64> {
        match self {
            Protocol::ExtB92 => ext_b92::ext_b92_key_rate(d, q, xi),
            Protocol::Bb84 => bb84::bb84_key_rate(&Bb84Params::new(d, q, xi)?),
        }
    }

    pub fn qber(self, d: u32, q: f64) -> Result<f64> {
        match self {
            Protocol::ExtB92 => ext_b92::ext_b92_qber(d, q),
            Protocol::Bb84 => Ok(bb84::bb84_qber(&Bb84Params::new(d, q, 1.0)?)),
        }
    }

    /// Smallest depolarizing noise at which the rate reaches zero.
    pub fn noise_tolerance(self, d: u32) -> Result<f64> {
        ext_b92::validate_dimension(d)?;
        bb84::noise_tolerance(|q| self.key_rate(d, q, 1.0), max_noise(d))
    }

    /// Decimal places used when rounding rates for a PDR.
    pub fn pdr_decimals(self) -> u32 {
        match self {
            Protocol::ExtB92 => 6,
            Protocol::Bb84 => 5,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ext_b92" => Ok(Protocol::ExtB92),
            "bb84" => Ok(Protocol::Bb84),
            _ => Err(Error::UnknownName {
                kind: "protocol",
                name: s.into(),
                valid: "ext_b92, bb84",
            }),
        }
    }
}
