//! Coherent propagation of short sech pulses through a fully inverted,
//! inhomogeneously broadened two-level gain medium.
//!
//! The crate is `no_std` and only needs an allocator. It contains:
//!
//! * closed-form results for the piecewise sech solution, group velocity,
//!   pulse advance and the superfluorescence delay law ([`analytic`]),
//! * detuning quadratures for the gaussian line shape ([`quadrature`]),
//! * a retarded-frame Maxwell-Schrödinger solver ([`solver`]),
//! * observables computed from solver output ([`diagnostics`]),
//! * seeded superfluorescence ensembles ([`ensemble`]).
//!
//! Units are fixed throughout: time in ns, length in cm, Rabi frequencies and
//! detunings in ns⁻¹, the coupling `g` in ns⁻².

#![no_std]

extern crate alloc;

pub mod analytic;
pub mod diagnostics;
pub mod ensemble;
mod error;
pub mod params;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::{MediumSpec, PhysicalParams, PulseSpec, SPEED_OF_LIGHT};
