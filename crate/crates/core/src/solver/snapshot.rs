use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::FieldRecord;
use crate::analytic::sech_envelope;
use crate::params::{PulseSpec, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Field along `xs` at lab time `t_lab`.
///
/// Every position maps to retarded time `t_lab − x/c`. Upstream of the medium
/// the input pulse is evaluated directly (`pulse = None` means no input);
/// inside the medium the record is interpolated; downstream the exit-face
/// series is translated at `c`.
///
/// Retarded times before the window are zero when the input has a hard
/// leading edge inside the window (or there is no input), since nothing can
/// have reached the medium yet. Any other position outside the window is
/// rejected.
pub fn lab_frame_snapshot(record: &FieldRecord, t_lab: f64, pulse: Option<&PulseSpec>, xs: &[f64]) -> Result<Vec<C64>> {
    let medium = record.medium();
    let (t_min, _) = record.window();
    let quiet_before = match pulse {
        None => true,
        Some(spec) => spec.support().is_some_and(|(lo, _)| lo >= t_min),
    };
    xs.iter()
        .map(|&x| {
            let retarded = t_lab - x / SPEED_OF_LIGHT;
            if x < medium.x0 {
                return Ok(C64::new(pulse.map_or(0.0, |s| sech_envelope(retarded, s)), 0.0));
            }
            if retarded < t_min && quiet_before {
                return Ok(C64::new(0.0, 0.0));
            }
            if x <= medium.x1 {
                record.sample(x, retarded)
            } else {
                record.sample_row(record.nx() - 1, retarded)
            }
        })
        .collect::<Result<Vec<C64>>>()
        .map_err(|e| match e {
            Error::OutsideWindow(_) => Error::SnapshotOutsideWindow(t_lab),
            other => other,
        })
}
