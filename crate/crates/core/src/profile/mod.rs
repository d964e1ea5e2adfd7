//! Machine profiles: every measured parameter the models consume.
//!
//! A profile carries the contention-free network parameters (latency and
//! inverse bandwidth per 8-byte word), the per-core peak, kernel timing curves
//! and the two calibration tables. Calibration factors are the ratio between
//! the real and the ideal transfer time when many processes communicate at
//! once. The average factor depends on distance only, the maximum factor on
//! distance and on the number of processes.
//!
//! All lookups interpolate linearly in `log2` of their axes and clamp at the
//! table edges. Factors are assumed independent of message size, which holds
//! for transfers of at least 256 KB.

mod extrapolate;
mod synthetic;
mod table;

use std::collections::BTreeSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extrapolate::{extrapolate_cmax, fit_cmax_at, DEFAULT_DEGREE};
pub use synthetic::{gen_synthetic_profile, SyntheticParams};
pub use table::{DistanceTable, ProcessDistanceTable};

/// Timing samples of one numerical kernel at a fixed thread count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub kernel: String,
    pub threads: u32,
    /// `(matrix dimension, seconds)` pairs.
    pub samples: Vec<(u64, f64)>,
}

impl EfficiencyCurve {
    /// Time for a square problem of dimension `dim`.
    ///
    /// Between samples the time follows a local power law (log-time linear
    /// in log-dimension), which is the same as interpolating the achieved
    /// efficiency `dim^3 / time` geometrically in `log2(dim)`. Outside the
    /// sampled range the edge efficiency is held, so time scales as `dim^3`.
    pub fn time_at(&self, dim: u64) -> f64 {
        if dim == 0 {
            return 0.0;
        }
        let s = &self.samples;
        let x = dim as f64;
        let (d_first, t_first) = s[0];
        let (d_last, t_last) = s[s.len() - 1];
        if dim <= d_first {
            return if dim == d_first { t_first } else { t_first * (x / d_first as f64).powi(3) };
        }
        if dim >= d_last {
            return if dim == d_last { t_last } else { t_last * (x / d_last as f64).powi(3) };
        }
        let hi = s.partition_point(|&(d, _)| d < dim);
        let (d1, t1) = s[hi];
        if d1 == dim {
            return t1;
        }
        let (d0, t0) = s[hi - 1];
        let frac = (x.log2() - (d0 as f64).log2()) / ((d1 as f64).log2() - (d0 as f64).log2());
        (t0.ln() + (t1.ln() - t0.ln()) * frac).exp()
    }
}

/// All measured parameters of one target machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineProfile {
    pub name: String,
    /// Network latency `L` in seconds.
    pub latency_s: f64,
    /// Inverse bandwidth `β` in seconds per 8-byte word.
    pub inv_bandwidth_s_per_word: f64,
    pub peak_flops_per_core: f64,
    /// Cores driving one process (one process per NUMA domain).
    pub cores_per_process: u32,
    pub kernels: Vec<EfficiencyCurve>,
    pub calib_avg: DistanceTable,
    pub calib_max: ProcessDistanceTable,
}

impl MachineProfile {
    /// Parses a profile document and validates it.
    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let profile: MachineProfile = serde_json::from_str(text).map_err(parse_error)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_json_string(&self) -> String {
        // all fields are plain data; serialization cannot fail
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut positive = |what: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{what} must be finite and > 0 (got {v})"));
            }
        };
        positive("latency_s", self.latency_s);
        positive("inv_bandwidth_s_per_word", self.inv_bandwidth_s_per_word);
        positive("peak_flops_per_core", self.peak_flops_per_core);
        if self.cores_per_process == 0 {
            errs.push("cores_per_process must be >= 1".to_string());
        }

        let mut seen_curves = BTreeSet::new();
        for curve in &self.kernels {
            let tag = format!("kernel {} (threads {})", curve.kernel, curve.threads);
            if !seen_curves.insert((curve.kernel.as_str(), curve.threads)) {
                errs.push(format!("{tag}: duplicate curve"));
            }
            if curve.threads == 0 {
                errs.push(format!("{tag}: threads must be >= 1"));
            }
            if curve.samples.len() < 2 {
                errs.push(format!("{tag}: needs at least 2 samples"));
            }
            if curve.samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                errs.push(format!("{tag}: dimensions must be strictly increasing"));
            }
            if curve.samples.iter().any(|&(d, _)| d == 0) {
                errs.push(format!("{tag}: dimensions must be >= 1"));
            }
            if curve.samples.iter().any(|&(_, t)| !(t.is_finite() && t > 0.0)) {
                errs.push(format!("{tag}: times must be finite and > 0"));
            }
        }

        check_factors(
            "calib_avg",
            self.calib_avg.samples().iter().map(|&(d, f)| (format!("d={d}"), d, f)),
            &mut errs,
        );
        check_factors(
            "calib_max",
            self.calib_max.samples().map(|(p, d, f)| (format!("p={p}, d={d}"), d, f)),
            &mut errs,
        );
        if self.calib_avg.samples().windows(2).any(|w| w[0].0 == w[1].0) {
            errs.push("calib_avg: duplicate distance keys".to_string());
        }
        let max_keys: Vec<(u64, u64)> = self.calib_max.samples().map(|(p, d, _)| (p, d)).collect();
        if max_keys.windows(2).any(|w| w[0] == w[1]) {
            errs.push("calib_max: duplicate (p, d) keys".to_string());
        }
        if self.calib_max.samples().any(|(p, _, _)| p == 0) {
            errs.push("calib_max: process counts must be >= 1".to_string());
        }
        for (p, d, f) in self.calib_max.samples() {
            if let Some(avg) = self.calib_avg.get(d) {
                if f < avg {
                    errs.push(format!(
                        "calib_max(p={p}, d={d}) = {f} is below calib_avg(d={d}) = {avg}"
                    ));
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProfile(errs))
        }
    }

    /// Average calibration factor at distance `d`; exactly 1 at `d = 0`.
    pub fn c_avg(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 1.0;
        }
        self.calib_avg.lookup(d).unwrap_or(1.0)
    }

    /// Maximum calibration factor for `p` processes at distance `d`.
    ///
    /// Exactly 1 for a single process or zero distance, and never below
    /// [`c_avg`](Self::c_avg) at the same distance.
    pub fn c_max(&self, p: u64, d: f64) -> f64 {
        if d <= 0.0 || p <= 1 {
            return 1.0;
        }
        let raw = self.calib_max.lookup(p as f64, d).unwrap_or(1.0);
        raw.max(self.c_avg(d))
    }

    /// Time of kernel `kernel` on a square problem of dimension `dim` using `threads` threads.
    ///
    /// When no curve exists for `threads`, the curve with the nearest thread
    /// count `t0` is used and its time scaled by `t0 / threads`.
    pub fn t_rout(&self, kernel: &str, dim: u64, threads: u32) -> Result<f64> {
        if threads == 0 {
            return Err(Error::InvalidScenario("thread count must be >= 1".into()));
        }
        let curve = self
            .kernels
            .iter()
            .filter(|c| c.kernel == kernel)
            .min_by_key(|c| (c.threads.abs_diff(threads), std::cmp::Reverse(c.threads)))
            .ok_or_else(|| Error::UnknownKernel(kernel.to_string()))?;
        if dim == 0 {
            return Ok(0.0);
        }
        let t = curve.time_at(dim);
        if curve.threads == threads {
            Ok(t)
        } else {
            Ok(t * curve.threads as f64 / threads as f64)
        }
    }

    /// Names of the kernels this profile can time.
    pub fn kernel_names(&self) -> BTreeSet<&str> {
        self.kernels.iter().map(|c| c.kernel.as_str()).collect()
    }
}

fn check_factors(
    table: &str,
    samples: impl Iterator<Item = (String, u64, f64)>,
    errs: &mut Vec<String>,
) {
    let mut any = false;
    for (key, d, f) in samples {
        any = true;
        if !f.is_finite() {
            errs.push(format!("{table}({key}): factor is not finite"));
        } else if f < 1.0 {
            errs.push(format!("{table}({key}): factor < 1 ({f})"));
        }
        if d == 0 {
            errs.push(format!("{table}({key}): distance keys must be >= 1"));
        }
    }
    if !any {
        errs.push(format!("{table}: needs at least one sample"));
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "name": "tiny",
        "latency_s": 2e-6,
        "inv_bandwidth_s_per_word": 1e-9,
        "peak_flops_per_core": 8.4e9,
        "cores_per_process": 6,
        "kernels": [{"kernel": "dgemm", "threads": 6, "samples": [[512, 0.0125], [1024, 0.1]]}],
        "calib_avg": [[1, 1.0]],
        "calib_max": [[1024, 1, 1.0]]
    }"#;

    fn minimal() -> MachineProfile {
        MachineProfile::from_json_str(MINIMAL).unwrap()
    }

    #[test]
    fn loads_minimal_profile() {
        let p = minimal();
        assert_eq!(p.name, "tiny");
        assert_eq!(p.latency_s, 2e-6);
        assert_eq!(p.inv_bandwidth_s_per_word, 1e-9);
        assert_eq!(p.peak_flops_per_core, 8.4e9);
        assert_eq!(p.cores_per_process, 6);
        assert_eq!(p.kernels.len(), 1);
        assert_eq!(p.calib_avg.samples(), &[(1, 1.0)]);
    }

    #[test]
    fn rejects_factor_below_one() {
        let text = MINIMAL.replace("[[1, 1.0]]", "[[1, 0.5]]");
        let err = MachineProfile::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("factor < 1"), "{err}");
    }

    #[test]
    fn reports_every_violation() {
        let text = MINIMAL
            .replace("\"latency_s\": 2e-6", "\"latency_s\": 0")
            .replace("[[1, 1.0]]", "[[1, 0.5]]")
            .replace("[[512, 0.0125], [1024, 0.1]]", "[[1024, 0.1]]");
        match MachineProfile::from_json_str(&text).unwrap_err() {
            Error::InvalidProfile(v) => assert_eq!(v.len(), 3, "{v:?}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_max_below_avg() {
        let text = MINIMAL
            .replace("[[1, 1.0]]", "[[1, 2.0]]")
            .replace("[[1024, 1, 1.0]]", "[[1024, 1, 1.5]]");
        let err = MachineProfile::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("below calib_avg"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = MachineProfile::from_json_str("{\n  \"name\": 3\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let err = MachineProfile::from_json_str("{\"name\": \"x\"}").unwrap_err();
        assert!(err.to_string().contains("latency_s"), "{err}");
    }

    #[test]
    fn rejects_nan_literals() {
        let text = MINIMAL.replace("2e-6", "NaN");
        assert!(matches!(MachineProfile::from_json_str(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn serializes_keys_in_schema_order() {
        let json = minimal().to_json_string();
        let keys = [
            "\"name\"",
            "\"latency_s\"",
            "\"inv_bandwidth_s_per_word\"",
            "\"peak_flops_per_core\"",
            "\"cores_per_process\"",
            "\"kernels\"",
            "\"calib_avg\"",
            "\"calib_max\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert_eq!(MachineProfile::from_json_str(&json).unwrap(), minimal());
    }

    #[test]
    fn c_avg_examples() {
        let mut p = minimal();
        p.calib_avg = DistanceTable::new(vec![(1, 1.2), (4, 1.8)]);
        assert_eq!(p.c_avg(1.0), 1.2);
        assert!((p.c_avg(2.0) - 1.5).abs() < 1e-15);
        assert_eq!(p.c_avg(0.0), 1.0);
        assert_eq!(p.c_avg(64.0), 1.8);
    }

    #[test]
    fn c_max_examples() {
        let mut p = minimal();
        p.calib_max = ProcessDistanceTable::new(vec![(1024, 16, 3.0)]);
        assert_eq!(p.c_max(1024, 16.0), 3.0);
        assert_eq!(p.c_max(1, 16.0), 1.0);
        assert_eq!(p.c_max(1024, 0.0), 1.0);
        p.calib_max = ProcessDistanceTable::new(vec![(1024, 16, 3.0), (4096, 16, 5.0)]);
        assert!((p.c_max(2048, 16.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn c_max_is_floored_by_c_avg() {
        let mut p = minimal();
        p.calib_avg = DistanceTable::new(vec![(1, 1.0), (64, 4.0)]);
        p.calib_max = ProcessDistanceTable::new(vec![(1024, 1, 2.0)]);
        assert_eq!(p.c_max(1024, 64.0), 4.0);
    }

    #[test]
    fn t_rout_examples() {
        let p = minimal();
        assert_eq!(p.t_rout("dgemm", 1024, 6).unwrap(), 0.1);
        assert!((p.t_rout("dgemm", 1024, 3).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(p.t_rout("dgemm", 0, 6).unwrap(), 0.0);
        assert!(matches!(p.t_rout("zgemm", 8, 6), Err(Error::UnknownKernel(_))));
    }

    #[test]
    fn t_rout_interpolates_as_power_law() {
        let p = minimal();
        // samples follow time ∝ dim^3 exactly, so the midpoint does too
        let t = p.t_rout("dgemm", 724, 6).unwrap();
        let expect = 0.1 * (724.0f64 / 1024.0).powi(3);
        assert!((t - expect).abs() / expect < 1e-12);
        // beyond the last sample efficiency is held
        let t = p.t_rout("dgemm", 2048, 6).unwrap();
        assert!((t - 0.8).abs() < 1e-15);
    }

    #[test]
    fn t_rout_prefers_exact_then_nearest_thread_count() {
        let mut p = minimal();
        p.kernels.push(EfficiencyCurve {
            kernel: "dgemm".into(),
            threads: 1,
            samples: vec![(512, 0.06), (1024, 0.5)],
        });
        assert_eq!(p.t_rout("dgemm", 1024, 1).unwrap(), 0.5);
        assert!((p.t_rout("dgemm", 1024, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!((p.t_rout("dgemm", 1024, 5).unwrap() - 0.12).abs() < 1e-15);
    }
}
