//! Protocol selection and angle parameters.

use std::fmt;

use serde::Serialize;

use crate::angles::wrap_angle;

/// Which walk protocol is being described.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Hqw,
    Ncrqw,
    Ssqw,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Hqw => "hqw",
            Protocol::Ncrqw => "ncrqw",
            Protocol::Ssqw => "ssqw",
        }
    }

    /// Number of lattice shifts applied per step.
    pub fn shifts_per_step(self) -> i64 {
        match self {
            Protocol::Ssqw => 2,
            _ => 1,
        }
    }

    /// Names of the angle parameters, in the order used by [`ProtocolParams::angles`].
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Protocol::Hqw => &["theta"],
            Protocol::Ncrqw => &["theta", "phi"],
            Protocol::Ssqw => &["theta1", "theta2"],
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Protocol plus its rotation angles, in radians.
///
/// The constructors wrap angles into `[-π, π]`. Building the variants
/// directly skips the wrapping; every formula in the crate is 2π-periodic,
/// so results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum ProtocolParams {
    Hqw { theta: f64 },
    Ncrqw { theta: f64, phi: f64 },
    Ssqw { theta1: f64, theta2: f64 },
}

impl ProtocolParams {
    pub fn hqw(theta: f64) -> Self {
        ProtocolParams::Hqw { theta: wrap_angle(theta) }
    }

    pub fn ncrqw(theta: f64, phi: f64) -> Self {
        ProtocolParams::Ncrqw { theta: wrap_angle(theta), phi: wrap_angle(phi) }
    }

    pub fn ssqw(theta1: f64, theta2: f64) -> Self {
        ProtocolParams::Ssqw { theta1: wrap_angle(theta1), theta2: wrap_angle(theta2) }
    }

    /// Builds parameters for `protocol` from a two-slot angle pair; the second
    /// slot is ignored for the Hadamard walk.
    pub fn from_pair(protocol: Protocol, first: f64, second: f64) -> Self {
        match protocol {
            Protocol::Hqw => Self::hqw(first),
            Protocol::Ncrqw => Self::ncrqw(first, second),
            Protocol::Ssqw => Self::ssqw(first, second),
        }
    }

    pub fn protocol(&self) -> Protocol {
        match self {
            ProtocolParams::Hqw { .. } => Protocol::Hqw,
            ProtocolParams::Ncrqw { .. } => Protocol::Ncrqw,
            ProtocolParams::Ssqw { .. } => Protocol::Ssqw,
        }
    }

    /// Angles in declaration order (one for HQW, two otherwise).
    pub fn angles(&self) -> Vec<f64> {
        match *self {
            ProtocolParams::Hqw { theta } => vec![theta],
            ProtocolParams::Ncrqw { theta, phi } => vec![theta, phi],
            ProtocolParams::Ssqw { theta1, theta2 } => vec![theta1, theta2],
        }
    }

    /// Angle pair with the HQW second slot reported as `None`.
    pub fn pair(&self) -> (f64, Option<f64>) {
        match *self {
            ProtocolParams::Hqw { theta } => (theta, None),
            ProtocolParams::Ncrqw { theta, phi } => (theta, Some(phi)),
            ProtocolParams::Ssqw { theta1, theta2 } => (theta1, Some(theta2)),
        }
    }
}

impl fmt::Display for ProtocolParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProtocolParams::Hqw { theta } => write!(f, "hqw(theta={theta})"),
            ProtocolParams::Ncrqw { theta, phi } => write!(f, "ncrqw(theta={theta}, phi={phi})"),
            ProtocolParams::Ssqw { theta1, theta2 } => {
                write!(f, "ssqw(theta1={theta1}, theta2={theta2})")
            }
        }
    }
}

/// A one-parameter slice through a protocol's parameter space: one angle is
/// swept while the other keeps the value it has in `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamFamily {
    pub base: ProtocolParams,
    pub swept: ParamSlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSlot {
    First,
    Second,
}

impl ParamFamily {
    pub fn new(base: ProtocolParams, swept: ParamSlot) -> Self {
        Self { base, swept }
    }

    pub fn at(&self, value: f64) -> ProtocolParams {
        let (first, second) = self.base.pair();
        let second = second.unwrap_or(0.0);
        let (first, second) = match self.swept {
            ParamSlot::First => (value, second),
            ParamSlot::Second => (first, value),
        };
        ProtocolParams::from_pair(self.base.protocol(), first, second)
    }
}
