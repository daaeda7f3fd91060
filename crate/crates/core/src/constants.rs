use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Physical constants in nondimensional units.
///
/// The electron charge is negative by convention; everything else is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
    pub light_speed: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, charge: -1.0, light_speed: 1.0 }
    }
}

impl PhysConstants {
    pub fn new(hbar: f64, mass: f64, charge: f64, light_speed: f64) -> Result<Self> {
        let c = Self { hbar, mass, charge, light_speed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(LabError::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)?;
        positive("light_speed", self.light_speed)?;
        if !(self.charge.is_finite() && self.charge < 0.0) {
            return Err(LabError::InvalidArgument(format!("charge must be strictly negative, got {}", self.charge)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(PhysConstants::default().validate().is_ok());
    }

    #[test]
    fn positive_charge_rejected() {
        assert!(PhysConstants::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysConstants::new(0.0, 1.0, -1.0, 1.0).is_err());
    }
}
