//! Physical parameters, medium geometry and input pulse description.

use alloc::format;

use crate::{Error, Result};

/// Vacuum light speed in cm/ns.
pub const SPEED_OF_LIGHT: f64 = 29.979_245_8;

/// Material and pulse-scale parameters in the crate's fixed units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Atom-field coupling, ns⁻².
    pub g: f64,
    /// Inhomogeneous lifetime, ns.
    pub t2_star: f64,
    /// Pulse temporal width, ns.
    pub tau: f64,
    /// Atomic number density, cm⁻³.
    pub density: f64,
    /// Transition wavelength, cm.
    pub wavelength: f64,
}

impl PhysicalParams {
    /// Rb vapour on the D2 line with a 100 ps pulse.
    pub const fn rb_d2() -> Self {
        PhysicalParams { g: 266.0, t2_star: 0.733, tau: 0.1, density: 8.0e10, wavelength: 7.8e-5 }
    }

    pub fn validate(&self) -> Result<()> {
        check("g", self.g, self.g >= 0.0, "g >= 0")?;
        check("t2_star", self.t2_star, self.t2_star > 0.0, "t2_star > 0")?;
        check("tau", self.tau, self.tau > 0.0, "tau > 0")?;
        check("density", self.density, self.density >= 0.0, "density >= 0")?;
        check("wavelength", self.wavelength, self.wavelength > 0.0, "wavelength > 0")?;
        Ok(())
    }

    pub fn c(&self) -> f64 {
        SPEED_OF_LIGHT
    }

    /// Pulse length cτ in cm, the natural length unit of the figures.
    pub fn c_tau(&self) -> f64 {
        SPEED_OF_LIGHT * self.tau
    }

    pub fn with_g(self, g: f64) -> Self {
        PhysicalParams { g, ..self }
    }

    pub fn with_t2_star(self, t2_star: f64) -> Self {
        PhysicalParams { t2_star, ..self }
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::rb_d2()
    }
}

fn check(what: &'static str, value: f64, ok: bool, rule: &str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("{value} violates {rule}")))
    }
}

/// Uniform medium occupying `[x0, x1]`; the density is zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    pub x0: f64,
    pub x1: f64,
}

impl MediumSpec {
    pub fn new(x0: f64, x1: f64) -> Result<Self> {
        let m = MediumSpec { x0, x1 };
        m.validate()?;
        Ok(m)
    }

    pub fn with_length(x0: f64, length: f64) -> Result<Self> {
        Self::new(x0, x0 + length)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0.is_finite() && self.x1.is_finite()) || self.x1 <= self.x0 {
            return Err(Error::invalid("medium", format!("x1 = {} must exceed x0 = {}", self.x1, self.x0)));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x0 && x <= self.x1
    }
}

/// Input sech pulse, expressed as a function of retarded time at the entrance
/// face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Retarded time of the pulse peak, ns.
    pub peak_time: f64,
    /// Temporal width, ns.
    pub tau: f64,
    /// Hard cutoff half-width in units of `tau`; `None` keeps infinite wings.
    pub cutoff_half_width: Option<f64>,
    /// Peak Rabi frequency, ns⁻¹.
    pub peak_amplitude: f64,
}

impl PulseSpec {
    /// Area-2π sech pulse of width `tau` peaking at zero retarded time.
    pub fn sech(tau: f64) -> Self {
        PulseSpec { peak_time: 0.0, tau, cutoff_half_width: None, peak_amplitude: 2.0 / tau }
    }

    pub fn with_cutoff(self, half_width: f64) -> Self {
        PulseSpec { cutoff_half_width: Some(half_width), ..self }
    }

    pub fn with_peak_time(self, peak_time: f64) -> Self {
        PulseSpec { peak_time, ..self }
    }

    pub fn with_amplitude(self, peak_amplitude: f64) -> Self {
        PulseSpec { peak_amplitude, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check("pulse tau", self.tau, self.tau > 0.0, "tau > 0")?;
        check("peak_time", self.peak_time, true, "finite")?;
        check("peak_amplitude", self.peak_amplitude, true, "finite")?;
        if let Some(w) = self.cutoff_half_width {
            check("cutoff_half_width", w, w > 0.0, "cutoff_half_width > 0")?;
        }
        Ok(())
    }

    /// Support `[lo, hi]` of a cut-off pulse; `None` for infinite wings.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.cutoff_half_width.map(|w| (self.peak_time - w * self.tau, self.peak_time + w * self.tau))
    }
}
