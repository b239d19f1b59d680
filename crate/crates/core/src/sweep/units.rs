use serde::Serialize;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Lab-frame values for a cavity of length `length_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalUnits {
    pub length_m: f64,
    pub a0: Option<f64>,
    /// Proper acceleration in m/s^2.
    pub acceleration: Option<f64>,
    /// Proper acceleration in units of standard gravity.
    pub acceleration_g: Option<f64>,
    pub omega0: Option<f64>,
    /// Probe gap in rad/s.
    pub omega_p: Option<f64>,
}

pub fn physical_units(
    length_m: f64,
    a0: Option<f64>,
    omega0: Option<f64>,
) -> Result<PhysicalUnits> {
    if !(length_m > 0.0) || !length_m.is_finite() {
        return Err(Error::invalid(
            "length",
            format!("cavity length must be positive, got {length_m}"),
        ));
    }
    for (name, v) in [("a0", a0), ("omega0", omega0)] {
        if let Some(v) = v {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(
                    name,
                    format!("must be non-negative, got {v}"),
                ));
            }
        }
    }
    let acceleration = a0.map(|a| a * SPEED_OF_LIGHT * SPEED_OF_LIGHT / length_m);
    Ok(PhysicalUnits {
        length_m,
        a0,
        acceleration,
        acceleration_g: acceleration.map(|a| a / STANDARD_GRAVITY),
        omega0,
        omega_p: omega0.map(|w| w * SPEED_OF_LIGHT / length_m),
    })
}
