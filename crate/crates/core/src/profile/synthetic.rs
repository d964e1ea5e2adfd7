//! Synthetic machine profiles shaped like a Cray XE6 class machine.
//!
//! The parametric forms are:
//!
//! * `c_avg(d) = 1 + avg_slope * log2(d)`
//! * `c_max(p, d) = c_avg(d) * (1 + max_slope * log2(p))`
//! * kernel efficiency `e(n) = peak_fraction * n^k / (n^k + h^k)` with `k = 1.5`,
//!   and time `flops(n) / (e(n) * threads * peak_flops_per_core)`.
//!
//! Average factors grow with distance, maximum factors grow with both the
//! process count and the distance, and kernel efficiency rises with the
//! matrix dimension before saturating. None of the numbers are measurements.

use super::{DistanceTable, EfficiencyCurve, MachineProfile, ProcessDistanceTable};

/// Knobs of the synthetic profile generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub name: String,
    pub latency_s: f64,
    pub inv_bandwidth_s_per_word: f64,
    pub peak_flops_per_core: f64,
    pub cores_per_process: u32,
    pub avg_slope: f64,
    pub max_slope: f64,
    /// Process counts at which maximum factors are tabulated.
    pub process_counts: Vec<u64>,
    /// Largest tabulated distance; distances are powers of two from 1.
    pub max_distance: u64,
    /// Kernel curves are sampled at powers of two in this range.
    pub min_dim: u64,
    pub max_dim: u64,
    /// Half-saturation dimension of the dgemm efficiency curve.
    pub dgemm_half_dim: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            name: "synthetic-xe6".to_string(),
            latency_s: 1.5e-6,
            // 8-byte words at 5.5 GB/s
            inv_bandwidth_s_per_word: 8.0 / 5.5e9,
            peak_flops_per_core: 8.4e9,
            cores_per_process: 6,
            avg_slope: 0.35,
            max_slope: 0.3,
            process_counts: vec![64, 128, 256, 512, 1024, 2048, 4096],
            max_distance: 1 << 17,
            min_dim: 32,
            max_dim: 1 << 17,
            dgemm_half_dim: 160.0,
        }
    }
}

struct KernelShape {
    name: &'static str,
    /// flops = flop_coeff * n^3
    flop_coeff: f64,
    peak_fraction: f64,
    half_dim_scale: f64,
}

const KERNELS: [KernelShape; 4] = [
    KernelShape { name: "dgemm", flop_coeff: 2.0, peak_fraction: 0.92, half_dim_scale: 1.0 },
    KernelShape { name: "dtrsm", flop_coeff: 1.0, peak_fraction: 0.85, half_dim_scale: 1.6 },
    KernelShape { name: "dsyrk", flop_coeff: 1.0, peak_fraction: 0.88, half_dim_scale: 1.3 },
    KernelShape { name: "dpotrf", flop_coeff: 1.0 / 3.0, peak_fraction: 0.75, half_dim_scale: 2.5 },
];

fn powers_of_two(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (0..64).map(|k| 1u64 << k).skip_while(move |&v| v < lo).take_while(move |&v| v <= hi)
}

/// Builds a profile from `params`. The result always passes validation.
pub fn gen_synthetic_profile(params: &SyntheticParams) -> MachineProfile {
    let c_avg = |d: u64| 1.0 + params.avg_slope * (d as f64).log2();
    let distances: Vec<u64> = powers_of_two(1, params.max_distance.max(1)).collect();

    let calib_avg = DistanceTable::new(distances.iter().map(|&d| (d, c_avg(d))).collect());
    let calib_max = ProcessDistanceTable::new(
        params
            .process_counts
            .iter()
            .flat_map(|&p| {
                distances.iter().map(move |&d| {
                    let grow = 1.0 + params.max_slope * (p as f64).log2();
                    (p, d, c_avg(d) * grow)
                })
            })
            .collect(),
    );

    let threads = params.cores_per_process;
    let rate = threads as f64 * params.peak_flops_per_core;
    let kernels = KERNELS
        .iter()
        .map(|k| {
            let h = params.dgemm_half_dim * k.half_dim_scale;
            let samples = powers_of_two(params.min_dim, params.max_dim)
                .map(|n| {
                    let x = n as f64;
                    let eff = k.peak_fraction * x.powf(1.5) / (x.powf(1.5) + h.powf(1.5));
                    (n, k.flop_coeff * x.powi(3) / (eff * rate))
                })
                .collect();
            EfficiencyCurve {
                kernel: k.name.to_string(),
                threads,
                samples,
            }
        })
        .collect();

    MachineProfile {
        name: params.name.clone(),
        latency_s: params.latency_s,
        inv_bandwidth_s_per_word: params.inv_bandwidth_s_per_word,
        peak_flops_per_core: params.peak_flops_per_core,
        cores_per_process: threads,
        kernels,
        calib_avg,
        calib_max,
    }
}
