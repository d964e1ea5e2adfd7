//! Polynomial-regression extrapolation of the maximum calibration factor to
//! process counts beyond the measured range.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{MachineProfile, ProcessDistanceTable};
use crate::error::{Error, Result};

/// Regression degree used when none is given.
pub const DEFAULT_DEGREE: usize = 2;

/// Least-squares polynomial in `x`, stored with the centering used for the fit.
#[derive(Debug, Clone)]
struct Poly {
    center: f64,
    coeffs: Vec<f64>,
}

impl Poly {
    fn fit(xs: &[f64], ys: &[f64], degree: usize) -> Poly {
        let center = xs.iter().sum::<f64>() / xs.len() as f64;
        let vander = DMatrix::from_fn(xs.len(), degree + 1, |i, j| (xs[i] - center).powi(j as i32));
        let rhs = DVector::from_column_slice(ys);
        let svd = vander.svd(true, true);
        // degree + 1 <= number of distinct xs, so the system has full column rank
        let sol = svd.solve(&rhs, 1e-12).expect("svd computed with u and v");
        Poly {
            center,
            coeffs: sol.iter().copied().collect(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let z = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// `(log2 p, factor)` points per sampled distance.
fn points_by_distance(profile: &MachineProfile) -> BTreeMap<u64, (Vec<f64>, Vec<f64>)> {
    let mut by_d: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (p, d, f) in profile.calib_max.samples() {
        let e = by_d.entry(d).or_default();
        e.0.push((p as f64).log2());
        e.1.push(f);
    }
    by_d
}

fn fit_distance(
    profile: &MachineProfile,
    d: u64,
    xs: &[f64],
    ys: &[f64],
    degree: usize,
    p: u64,
) -> Result<f64> {
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(Error::InsufficientSamples {
            distance: d,
            found: distinct.len(),
            degree,
            needed: degree + 1,
        });
    }
    let v = Poly::fit(xs, ys, degree).eval((p as f64).log2());
    Ok(v.max(profile.c_avg(d as f64)).max(1.0))
}

/// Value of the fitted maximum-factor polynomial at distance `d` and `p` processes.
///
/// Works for any `p`, including sampled ones; the result is floored by the
/// average factor at `d`.
pub fn fit_cmax_at(profile: &MachineProfile, d: u64, p: u64, degree: usize) -> Result<f64> {
    let by_d = points_by_distance(profile);
    let (xs, ys) = by_d.get(&d).ok_or(Error::InsufficientSamples {
        distance: d,
        found: 0,
        degree,
        needed: degree + 1,
    })?;
    fit_distance(profile, d, xs, ys, degree, p)
}

/// Extends the maximum-factor table to `p_target` processes.
///
/// For every sampled distance a degree-`degree` least-squares polynomial in
/// `log2 p` is fitted and evaluated at `log2 p_target`. The returned table is
/// a copy of the profile's table with the new samples merged in.
pub fn extrapolate_cmax(
    profile: &MachineProfile,
    p_target: u64,
    degree: usize,
) -> Result<ProcessDistanceTable> {
    let max_sampled = profile.calib_max.process_counts().max().unwrap_or(0);
    if p_target <= max_sampled {
        return Err(Error::TargetNotBeyondSamples {
            target: p_target,
            max_sampled,
        });
    }
    let mut extra = Vec::new();
    for (d, (xs, ys)) in points_by_distance(profile) {
        extra.push((p_target, d, fit_distance(profile, d, &xs, &ys, degree, p_target)?));
    }
    Ok(profile.calib_max.merged(extra))
}

impl MachineProfile {
    /// Copy of this profile whose maximum-factor table is extended to every
    /// target. Each target is fitted from the original samples only.
    pub fn with_extrapolated_cmax(&self, targets: &[u64], degree: usize) -> Result<MachineProfile> {
        let mut extra = Vec::new();
        for &target in targets {
            let table = extrapolate_cmax(self, target, degree)?;
            extra.extend(table.samples().filter(|&(p, _, _)| p == target));
        }
        let mut out = self.clone();
        out.calib_max = self.calib_max.merged(extra);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{DistanceTable, EfficiencyCurve};

    fn with_max(samples: Vec<(u64, u64, f64)>) -> MachineProfile {
        MachineProfile {
            name: "fit".into(),
            latency_s: 1e-6,
            inv_bandwidth_s_per_word: 1e-9,
            peak_flops_per_core: 1e9,
            cores_per_process: 1,
            kernels: vec![EfficiencyCurve {
                kernel: "dgemm".into(),
                threads: 1,
                samples: vec![(1, 1.0), (2, 8.0)],
            }],
            calib_avg: DistanceTable::new(vec![(16, 1.0)]),
            calib_max: ProcessDistanceTable::new(samples),
        }
    }

    #[test]
    fn linear_data_extends_exactly() {
        let p = with_max(vec![(1024, 16, 3.0), (2048, 16, 4.0), (4096, 16, 5.0)]);
        let t = extrapolate_cmax(&p, 8192, 1).unwrap();
        assert!((t.get(8192, 16).unwrap() - 6.0).abs() / 6.0 < 1e-9);
        assert_eq!(t.get(1024, 16), Some(3.0));
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn too_few_process_counts() {
        let p = with_max(vec![(1024, 16, 3.0), (2048, 16, 4.0)]);
        let err = extrapolate_cmax(&p, 8192, 2).unwrap_err();
        assert!(err.to_string().contains("insufficient samples"), "{err}");
    }

    #[test]
    fn constant_data_stays_constant() {
        let p = with_max(vec![(64, 16, 2.0), (256, 16, 2.0), (1024, 16, 2.0)]);
        for target in [2048, 1 << 20] {
            let t = extrapolate_cmax(&p, target, 2).unwrap();
            assert!((t.get(target, 16).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn target_inside_range_is_rejected() {
        let p = with_max(vec![(64, 16, 2.0), (256, 16, 2.5), (1024, 16, 3.0)]);
        let err = extrapolate_cmax(&p, 1024, 1).unwrap_err();
        assert!(err.to_string().contains("target not beyond sampled range"));
    }

    #[test]
    fn quadratic_data_reproduced_by_degree_two() {
        let f = |lp: f64| 1.0 + 0.01 * lp * lp + 0.1 * lp;
        let samples: Vec<_> = [64u64, 128, 256, 512, 1024]
            .iter()
            .map(|&p| (p, 8, f((p as f64).log2())))
            .collect();
        let prof = with_max(samples);
        for p in [64u64, 256, 1024] {
            let v = fit_cmax_at(&prof, 8, p, 2).unwrap();
            assert!((v - prof.calib_max.get(p, 8).unwrap()).abs() / v < 1e-9);
        }
        let v = fit_cmax_at(&prof, 8, 1 << 16, 2).unwrap();
        assert!((v - f(16.0)).abs() / v < 1e-9);
    }

    #[test]
    fn extrapolation_is_floored_by_average() {
        let mut p = with_max(vec![(64, 16, 5.0), (256, 16, 4.0), (1024, 16, 3.0)]);
        p.calib_avg = DistanceTable::new(vec![(16, 2.5)]);
        let t = extrapolate_cmax(&p, 1 << 20, 1).unwrap();
        assert_eq!(t.get(1 << 20, 16), Some(2.5));
    }
}
