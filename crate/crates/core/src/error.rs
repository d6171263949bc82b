use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter or input violates a documented invariant.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// `1 - c/v_g` vanished: the group velocity is infinite.
    #[error("group velocity diverges (1 - c/v_g = {0:e})")]
    DivergingGroupVelocity(f64),

    /// The time window cuts into the input pulse support.
    #[error("time window [{t_min}, {t_max}] ns clips the input pulse support [{lo}, {hi}] ns")]
    WindowClipsPulse { t_min: f64, t_max: f64, lo: f64, hi: f64 },

    /// A requested quantity needs data outside the simulated window.
    #[error("retarded time {0} ns is outside the simulated window")]
    OutsideWindow(f64),

    /// A lab-frame snapshot needs retarded times outside the window.
    #[error("lab time {0} ns needs data outside the simulated window")]
    SnapshotOutsideWindow(f64),

    /// Position outside the medium where only in-medium data exists.
    #[error("position {x} cm is outside the medium [{x0}, {x1}] cm")]
    OutsideMedium { x: f64, x0: f64, x1: f64 },

    /// The solver produced a non-finite value or broke norm conservation.
    #[error("numerical failure at x-slice {slice}: {reason}")]
    Numerical { slice: usize, reason: String },

    /// The exit-face tipping angle never reached the threshold.
    #[error("no superfluorescence within the window (max tipping angle {max_tipping:.3e} rad)")]
    NoSuperfluorescence { max_tipping: f64 },

    /// A series has no interior maximum to locate.
    #[error("series maximum lies at the window edge (sample {0})")]
    PeakAtEdge(usize),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { what, reason: reason.into() }
    }
}
