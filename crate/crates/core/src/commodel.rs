//! Cost of point-to-point transfers and of the collective schedules used by
//! the algorithms.
//!
//! Message sizes `w` are in 8-byte words, distances `d` are rank differences.
//! Collectives follow the recursive-halving reduce-scatter and the binomial
//! gather, each with `log2(q)` steps whose distance doubles. Every collective
//! requires `q` to be a power of two and costs exactly zero when `q = 1`.

use crate::error::{Error, Result};
use crate::profile::MachineProfile;

/// Message-size multiplier of the last reduce-scatter step.
///
/// The last step transfers `w * m / 2^(log2(q)-1)` words. The default takes
/// `m = q`, matching the size progression of the earlier steps; `Threads`
/// substitutes the per-process thread count instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FinalStepScale {
    #[default]
    Participants,
    Threads(u32),
}

impl FinalStepScale {
    fn multiplier(self, q: u64) -> f64 {
        match self {
            FinalStepScale::Participants => q as f64,
            FinalStepScale::Threads(t) => t as f64,
        }
    }
}

/// `log2(q)` for a power of two `q >= 1`.
pub fn log2_exact(q: u64, what: &'static str) -> Result<u32> {
    if q.is_power_of_two() {
        Ok(q.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo { what, value: q })
    }
}

/// Contention-free transfer time `L + β·w`.
pub fn t_comm_ideal(profile: &MachineProfile, w: f64) -> f64 {
    profile.latency_s + profile.inv_bandwidth_s_per_word * w
}

/// Transfer without synchronization: average calibration factor.
pub fn t_comm(profile: &MachineProfile, w: f64, d: f64) -> f64 {
    profile.c_avg(d) * t_comm_ideal(profile, w)
}

/// Transfer followed by a synchronization of `p` processes: maximum calibration factor.
pub fn t_comm_sync(profile: &MachineProfile, p: u64, w: f64, d: f64) -> f64 {
    profile.c_max(p, d) * t_comm_ideal(profile, w)
}

/// Replication of two blocks from the first layer onto `c` layers.
///
/// Charged at the distance to the last layer, `(c-1)·p/c`. A single layer
/// needs no replication and costs zero.
pub fn t_ini_repl(profile: &MachineProfile, p: u64, w: f64, c: u64) -> Result<f64> {
    if c == 0 || !p.is_multiple_of(c) {
        return Err(Error::LayersDoNotDivide { c, p });
    }
    if c == 1 {
        return Ok(0.0);
    }
    let d = ((c - 1) * (p / c)) as f64;
    Ok(2.0 * profile.c_max(p, d) * t_comm_ideal(profile, w))
}

/// Binomial-tree gather over `q` participants.
pub fn t_gather(profile: &MachineProfile, q: u64, w: f64, d: f64) -> Result<f64> {
    gather_impl(profile, None, q, w, d)
}

/// All-gather; same cost model as [`t_gather`].
pub fn t_all_gather(profile: &MachineProfile, q: u64, w: f64, d: f64) -> Result<f64> {
    t_gather(profile, q, w, d)
}

/// All-gather whose last step waits for all `p` processes.
pub fn t_all_gather_sync(profile: &MachineProfile, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
    gather_impl(profile, Some(p), q, w, d)
}

fn gather_impl(profile: &MachineProfile, sync: Option<u64>, q: u64, w: f64, d: f64) -> Result<f64> {
    let steps = log2_exact(q, "q")?;
    let piece = w / q as f64;
    Ok((0..steps)
        .map(|i| {
            let scale = (1u64 << i) as f64;
            let ideal = t_comm_ideal(profile, piece * scale);
            let factor = match sync {
                Some(p) if i + 1 == steps => profile.c_max(p, scale * d),
                _ => profile.c_avg(scale * d),
            };
            factor * ideal
        })
        .sum())
}

/// Recursive-halving reduce-scatter whose last step synchronizes all `p` processes.
pub fn t_red_sca_sync(profile: &MachineProfile, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
    t_red_sca_sync_with(profile, p, q, w, d, FinalStepScale::default())
}

/// [`t_red_sca_sync`] with an explicit choice for the last step's size multiplier.
pub fn t_red_sca_sync_with(
    profile: &MachineProfile,
    p: u64,
    q: u64,
    w: f64,
    d: f64,
    last: FinalStepScale,
) -> Result<f64> {
    let steps = log2_exact(q, "q")?;
    if steps == 0 {
        return Ok(0.0);
    }
    let qf = q as f64;
    let head: f64 = (0..steps - 1)
        .map(|i| {
            let scale = (1u64 << i) as f64;
            profile.c_avg(scale * d) * t_comm_ideal(profile, w * qf / scale)
        })
        .sum();
    let scale = (1u64 << (steps - 1)) as f64;
    let tail = profile.c_max(p, scale * d) * t_comm_ideal(profile, w * last.multiplier(q) / scale);
    Ok(head + tail)
}

/// Scatter with a synchronization before the following phase; same model as [`t_red_sca_sync`].
pub fn t_scatter_sync(profile: &MachineProfile, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
    t_red_sca_sync(profile, p, q, w, d)
}

/// Rabenseifner reduce: synchronized reduce-scatter then gather to the root.
pub fn t_reduce(profile: &MachineProfile, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
    Ok(t_red_sca_sync(profile, p, q, w, d)? + t_gather(profile, q, w, d)?)
}

/// Broadcast as a synchronized scatter followed by an all-gather.
pub fn t_bcast(profile: &MachineProfile, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
    Ok(t_scatter_sync(profile, p, q, w, d)? + t_all_gather(profile, q, w, d)?)
}

/// Broadcast whose all-gather ends with a synchronization of all `p` processes.
pub fn t_bcast_sync(profile: &MachineProfile, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
    Ok(t_scatter_sync(profile, p, q, w, d)? + t_all_gather_sync(profile, p, q, w, d)?)
}
