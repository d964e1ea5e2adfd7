//! Local computation time: square kernel calls and rectangular problems
//! decomposed into consecutive square calls.

use crate::error::Result;
use crate::profile::MachineProfile;

/// One local kernel invocation on a `rows x cols` operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelCall {
    pub kernel: String,
    pub rows: u64,
    pub cols: u64,
    pub threads: u32,
}

impl KernelCall {
    pub fn time(&self, profile: &MachineProfile) -> Result<f64> {
        t_rect(profile, &self.kernel, self.rows, self.cols, self.threads)
    }
}

/// Time of `kernel` on a square block of dimension `bs`.
pub fn t_square(profile: &MachineProfile, kernel: &str, bs: u64, threads: u32) -> Result<f64> {
    profile.t_rout(kernel, bs, threads)
}

/// Time of `kernel` on a `rows x cols` operand.
///
/// With `s = min(rows, cols)` the operand is charged as `ceil(max / s)`
/// square calls of dimension `s`; a partial panel costs a full call.
pub fn t_rect(profile: &MachineProfile, kernel: &str, rows: u64, cols: u64, threads: u32) -> Result<f64> {
    let (small, large) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    if small == 0 {
        // still surface an unknown kernel name
        return profile.t_rout(kernel, 0, threads);
    }
    let calls = large.div_ceil(small);
    Ok(calls as f64 * t_square(profile, kernel, small, threads)?)
}

/// Scales a time by a non-integer expected workload multiplier.
pub fn fractional_scale(time: f64, factor: f64) -> f64 {
    debug_assert!(factor >= 0.0);
    time * factor
}
