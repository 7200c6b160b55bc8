//! Thermal emission materials.
//!
//! A surface's apparent intensity comes from a color ramp driven by its
//! normalized temperature, attenuated by a Schlick-Fresnel term so emission
//! fades toward grazing view angles. The hot parts of a drone (battery,
//! motors) get high temperatures while frame and propellers stay cold; an
//! animal body is modeled with one uniform temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-surface emission model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalMaterial {
    pub name: String,
    /// Relative emission temperature in [0, 1].
    pub temperature_norm: f64,
    /// Piecewise-linear intensity ramp: (position, intensity) stops with
    /// strictly increasing positions from 0 to 1.
    pub ramp: Vec<(f64, f64)>,
    /// Reflectance at normal incidence, [0, 1].
    pub fresnel_f0: f64,
    /// Exponent shaping the view-angle falloff, non-negative.
    pub angle_falloff: f64,
}

impl ThermalMaterial {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Error::mesh(format!("material {:?}: {msg}", self.name));
        if !(0.0..=1.0).contains(&self.temperature_norm) {
            return Err(fail(format!(
                "temperature_norm {} outside [0, 1]",
                self.temperature_norm
            )));
        }
        if !(0.0..=1.0).contains(&self.fresnel_f0) {
            return Err(fail(format!("f0 {} outside [0, 1]", self.fresnel_f0)));
        }
        if !(self.angle_falloff >= 0.0 && self.angle_falloff.is_finite()) {
            return Err(fail(format!(
                "angle_falloff {} must be non-negative",
                self.angle_falloff
            )));
        }
        if self.ramp.len() < 2 {
            return Err(fail("ramp needs at least 2 stops".into()));
        }
        if self.ramp.first().unwrap().0 != 0.0 || self.ramp.last().unwrap().0 != 1.0 {
            return Err(fail(
                "ramp must start at position 0 and end at position 1".into(),
            ));
        }
        for pair in self.ramp.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(fail("ramp positions must be strictly increasing".into()));
            }
        }
        for &(pos, intensity) in &self.ramp {
            if !(0.0..=1.0).contains(&pos) || !(0.0..=1.0).contains(&intensity) {
                return Err(fail(format!(
                    "ramp stop ({pos}, {intensity}) outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Schlick's approximation of Fresnel reflectance:
/// `f0 + (1 - f0) * (1 - cos_theta)^5`. Inputs clamp to [0, 1].
pub fn fresnel_schlick(cos_theta: f64, f0: f64) -> f64 {
    let c = cos_theta.clamp(0.0, 1.0);
    f0 + (1.0 - f0) * (1.0 - c).powi(5)
}

/// Evaluate a color ramp at `t` (clamped to [0, 1]) by linear interpolation
/// between the surrounding stops.
pub fn ramp_eval(ramp: &[(f64, f64)], t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    if t <= ramp[0].0 {
        return ramp[0].1;
    }
    for pair in ramp.windows(2) {
        let (p0, v0) = pair[0];
        let (p1, v1) = pair[1];
        if t == p1 {
            return v1; // exact at stops
        }
        if t < p1 {
            return v0 + (t - p0) / (p1 - p0) * (v1 - v0);
        }
    }
    ramp.last().unwrap().1
}

/// Apparent emission intensity of a surface seen at view-angle cosine
/// `cos_theta` (1 face-on, 0 grazing):
/// `ramp(T) * (1 - fresnel(cos_theta, f0))^angle_falloff`.
///
/// For f0 < 1 and positive falloff this is non-increasing as the view turns
/// away from the normal, so emission is maximal face-on.
pub fn shade_thermal(material: &ThermalMaterial, cos_theta: f64) -> f64 {
    let base = ramp_eval(&material.ramp, material.temperature_norm);
    let fresnel = fresnel_schlick(cos_theta, material.fresnel_f0);
    base * (1.0 - fresnel).powf(material.angle_falloff)
}
