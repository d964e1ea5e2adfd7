use serde::{Deserialize, Serialize};

/// Linear interpolation in `log2(x)` over samples sorted by key, clamped at both ends.
///
/// `points` must be non-empty and sorted by key. Repeated keys resolve to the first sample.
pub(crate) fn interp_log2(points: &[(u64, f64)], x: f64) -> f64 {
    debug_assert!(!points.is_empty());
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 as f64 {
        return first.1;
    }
    if x >= last.0 as f64 {
        return last.1;
    }
    // first index whose key is >= x; guaranteed in 1..len by the clamps above
    let hi = points.partition_point(|&(k, _)| (k as f64) < x);
    let (k1, f1) = points[hi];
    if k1 as f64 == x {
        return f1;
    }
    let (k0, f0) = points[hi - 1];
    let (l0, l1) = ((k0 as f64).log2(), (k1 as f64).log2());
    let frac = (x.log2() - l0) / (l1 - l0);
    f0 + (f1 - f0) * frac
}

/// Average calibration factors sampled by communication distance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(u64, f64)>", into = "Vec<(u64, f64)>")]
pub struct DistanceTable {
    samples: Vec<(u64, f64)>,
}

impl DistanceTable {
    pub const AXES: [&'static str; 1] = ["distance"];

    pub fn new(mut samples: Vec<(u64, f64)>) -> Self {
        samples.sort_by_key(|&(d, _)| d);
        DistanceTable { samples }
    }

    /// Samples sorted by distance.
    pub fn samples(&self) -> &[(u64, f64)] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn get(&self, d: u64) -> Option<f64> {
        self.samples
            .binary_search_by_key(&d, |&(k, _)| k)
            .ok()
            .map(|i| self.samples[i].1)
    }

    /// Interpolated factor at distance `d`, or `None` for an empty table.
    pub fn lookup(&self, d: f64) -> Option<f64> {
        if self.samples.is_empty() {
            None
        } else {
            Some(interp_log2(&self.samples, d))
        }
    }
}

impl From<Vec<(u64, f64)>> for DistanceTable {
    fn from(samples: Vec<(u64, f64)>) -> Self {
        DistanceTable::new(samples)
    }
}

impl From<DistanceTable> for Vec<(u64, f64)> {
    fn from(t: DistanceTable) -> Self {
        t.samples
    }
}

/// Maximum calibration factors sampled by process count and distance.
///
/// Samples are held as one distance curve per sampled process count so that
/// lookups are bilinear in `(log2 p, log2 d)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(
    from = "Vec<(u64, u64, f64)>",
    into = "Vec<(u64, u64, f64)>"
)]
pub struct ProcessDistanceTable {
    rows: Vec<(u64, Vec<(u64, f64)>)>,
}

impl ProcessDistanceTable {
    pub const AXES: [&'static str; 2] = ["processes", "distance"];

    pub fn new(mut samples: Vec<(u64, u64, f64)>) -> Self {
        samples.sort_by_key(|&(p, d, _)| (p, d));
        let mut rows: Vec<(u64, Vec<(u64, f64)>)> = Vec::new();
        for (p, d, f) in samples {
            match rows.last_mut() {
                Some((rp, curve)) if *rp == p => curve.push((d, f)),
                _ => rows.push((p, vec![(d, f)])),
            }
        }
        ProcessDistanceTable { rows }
    }

    /// Every sample as `(p, d, factor)`, sorted by `(p, d)`.
    pub fn samples(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        self.rows
            .iter()
            .flat_map(|(p, curve)| curve.iter().map(move |&(d, f)| (*p, d, f)))
    }

    /// Distinct sampled process counts, ascending.
    pub fn process_counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|(_, c)| c.len()).sum()
    }

    pub fn get(&self, p: u64, d: u64) -> Option<f64> {
        let row = self.rows.binary_search_by_key(&p, |(k, _)| *k).ok()?;
        let curve = &self.rows[row].1;
        curve
            .binary_search_by_key(&d, |&(k, _)| k)
            .ok()
            .map(|i| curve[i].1)
    }

    /// Bilinear lookup in `(log2 p, log2 d)` with clamping on both axes.
    pub fn lookup(&self, p: f64, d: f64) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        let first = &self.rows[0];
        let last = &self.rows[self.rows.len() - 1];
        if p <= first.0 as f64 {
            return Some(interp_log2(&first.1, d));
        }
        if p >= last.0 as f64 {
            return Some(interp_log2(&last.1, d));
        }
        let hi = self.rows.partition_point(|(k, _)| (*k as f64) < p);
        let (p1, ref c1) = self.rows[hi];
        let f1 = interp_log2(c1, d);
        if p1 as f64 == p {
            return Some(f1);
        }
        let (p0, ref c0) = self.rows[hi - 1];
        let f0 = interp_log2(c0, d);
        let (l0, l1) = ((p0 as f64).log2(), (p1 as f64).log2());
        let frac = (p.log2() - l0) / (l1 - l0);
        Some(f0 + (f1 - f0) * frac)
    }

    /// Copy of the table with extra samples merged in (existing keys are replaced).
    pub fn merged(&self, extra: impl IntoIterator<Item = (u64, u64, f64)>) -> Self {
        let mut all: Vec<(u64, u64, f64)> = self.samples().collect();
        for (p, d, f) in extra {
            match all.iter_mut().find(|s| s.0 == p && s.1 == d) {
                Some(s) => s.2 = f,
                None => all.push((p, d, f)),
            }
        }
        ProcessDistanceTable::new(all)
    }
}

impl From<Vec<(u64, u64, f64)>> for ProcessDistanceTable {
    fn from(samples: Vec<(u64, u64, f64)>) -> Self {
        ProcessDistanceTable::new(samples)
    }
}

impl From<ProcessDistanceTable> for Vec<(u64, u64, f64)> {
    fn from(t: ProcessDistanceTable) -> Self {
        t.samples().collect()
    }
}
