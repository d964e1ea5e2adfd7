//! Step-by-step schedule walker.
//!
//! [`trace`] enumerates every transfer, collective step and kernel call of
//! an algorithm in execution order and folds them into a total: sequential
//! steps add up, overlapped regions contribute the larger of their
//! communication and computation branches. It reads the same profile
//! lookups as the closed-form models but shares none of their algebra, so
//! the two can be checked against each other.

use std::fmt;
use std::io::Write;

use crate::algomodel::{Algorithm, ModelOptions, Scenario, Variant, DGEMM, DTRSM};
use crate::error::{Error, Result};
use crate::fmt::seconds;
use crate::profile::MachineProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Comm,
    Compute,
    OverlapMerge,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Comm => "comm",
            StepKind::Compute => "compute",
            StepKind::OverlapMerge => "overlap-merge",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label prefix of steps that belong to an overlapped region.
pub const OVERLAP_PREFIX: &str = "ovlp/";

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Loop iteration, `None` for prologue and epilogue steps.
    pub iteration: Option<u64>,
    pub label: String,
    pub kind: StepKind,
    pub seconds: f64,
    /// Overlap group this step is a member of. Members are folded into the
    /// group's merge step and do not add to the total themselves.
    pub group: Option<u32>,
}

/// Ordered steps of one schedule and their folded total.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepTrace {
    pub steps: Vec<Step>,
    pub total_s: f64,
}

impl StepTrace {
    /// Recomputes the total from the steps: sequential steps add, each merge
    /// step adds the larger of its group's communication and compute sums.
    pub fn fold(&self) -> f64 {
        let mut total = 0.0;
        for step in &self.steps {
            match (step.kind, step.group) {
                (_, Some(_)) => {}
                (StepKind::OverlapMerge, None) => {}
                _ => total += step.seconds,
            }
        }
        let mut groups: Vec<u32> = self.steps.iter().filter_map(|s| s.group).collect();
        groups.dedup();
        for g in groups {
            let branch = |kind| {
                self.steps
                    .iter()
                    .filter(|s| s.group == Some(g) && s.kind == kind)
                    .map(|s| s.seconds)
                    .sum::<f64>()
            };
            total += branch(StepKind::Comm).max(branch(StepKind::Compute));
        }
        total
    }

    /// Writes `iteration,label,kind,seconds` rows and a final total row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "label", "kind", "seconds"])?;
        for s in &self.steps {
            let it = s.iteration.map(|i| i.to_string()).unwrap_or_default();
            w.write_record([it.as_str(), &s.label, s.kind.as_str(), &seconds(s.seconds)])?;
        }
        w.write_record(["", "total", "", &seconds(self.total_s)])?;
        w.flush()?;
        Ok(())
    }
}

/// Accumulates steps while walking a schedule.
struct Walker<'a> {
    profile: &'a MachineProfile,
    final_step_mult: Option<f64>,
    steps: Vec<Step>,
    iteration: Option<u64>,
    group: Option<u32>,
    next_group: u32,
    total: f64,
}

impl<'a> Walker<'a> {
    fn new(profile: &'a MachineProfile, scenario: &Scenario, options: ModelOptions) -> Self {
        Walker {
            profile,
            final_step_mult: options.final_step_uses_threads.then_some(scenario.t as f64),
            steps: Vec::new(),
            iteration: None,
            group: None,
            next_group: 0,
            total: 0.0,
        }
    }

    fn push(&mut self, label: String, kind: StepKind, seconds: f64) {
        let label = if self.group.is_some() {
            format!("{OVERLAP_PREFIX}{label}")
        } else {
            self.total += seconds;
            label
        };
        self.steps.push(Step {
            iteration: self.iteration,
            label,
            kind,
            seconds,
            group: self.group,
        });
    }

    fn ideal(&self, w: f64) -> f64 {
        self.profile.latency_s + self.profile.inv_bandwidth_s_per_word * w
    }

    fn transfer(&mut self, label: &str, weight: f64, w: f64, d: f64) {
        let v = weight * self.profile.c_avg(d) * self.ideal(w);
        self.push(label.to_string(), StepKind::Comm, v);
    }

    fn transfer_sync(&mut self, label: &str, weight: f64, p: u64, w: f64, d: f64) {
        let v = weight * self.profile.c_max(p, d) * self.ideal(w);
        self.push(label.to_string(), StepKind::Comm, v);
    }

    fn kernel(&mut self, label: &str, weight: f64, name: &str, dim: u64, threads: u32) -> Result<()> {
        let v = weight * self.profile.t_rout(name, dim, threads)?;
        self.push(label.to_string(), StepKind::Compute, v);
        Ok(())
    }

    fn steps_of(q: u64) -> Result<u32> {
        if q.is_power_of_two() {
            Ok(q.trailing_zeros())
        } else {
            Err(Error::NotPowerOfTwo { what: "q", value: q })
        }
    }

    /// Recursive halving: step `i` exchanges with a partner `2^i * d` away.
    fn reduce_scatter(&mut self, label: &str, weight: f64, p: u64, q: u64, w: f64, d: f64) -> Result<()> {
        let n = Self::steps_of(q)?;
        for i in 0..n {
            let dist = d * 2f64.powi(i as i32);
            let denom = 2f64.powi(i as i32);
            let step_label = format!("{label}/reduce-scatter[{i}]");
            if i + 1 < n {
                self.transfer(&step_label, weight, w * q as f64 / denom, dist);
            } else {
                let mult = self.final_step_mult.unwrap_or(q as f64);
                self.transfer_sync(&step_label, weight, p, w * mult / denom, dist);
            }
        }
        Ok(())
    }

    /// Binomial tree: step `i` moves `2^i` pieces of `w / q` words over `2^i * d`.
    fn gather(&mut self, label: &str, weight: f64, sync: Option<u64>, q: u64, w: f64, d: f64) -> Result<()> {
        let n = Self::steps_of(q)?;
        for i in 0..n {
            let scale = 2f64.powi(i as i32);
            let step_label = format!("{label}/gather[{i}]");
            match sync {
                Some(p) if i + 1 == n => self.transfer_sync(&step_label, weight, p, w / q as f64 * scale, scale * d),
                _ => self.transfer(&step_label, weight, w / q as f64 * scale, scale * d),
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn bcast(&mut self, label: &str, weight: f64, sync: bool, p: u64, q: u64, w: f64, d: f64) -> Result<()> {
        self.reduce_scatter(label, weight, p, q, w, d)?;
        self.gather(label, weight, sync.then_some(p), q, w, d)
    }

    fn begin_overlap(&mut self) {
        self.group = Some(self.next_group);
    }

    fn end_overlap(&mut self) {
        let Some(g) = self.group.take() else { return };
        self.next_group += 1;
        let branch = |kind| {
            self.steps
                .iter()
                .filter(|s| s.group == Some(g) && s.kind == kind)
                .map(|s| s.seconds)
                .sum::<f64>()
        };
        let merged = branch(StepKind::Comm).max(branch(StepKind::Compute));
        self.push(format!("{OVERLAP_PREFIX}merge"), StepKind::OverlapMerge, merged);
    }

    fn finish(self) -> StepTrace {
        StepTrace {
            steps: self.steps,
            total_s: self.total,
        }
    }
}

/// Walks the schedule of `scenario` on `profile`.
pub fn trace(profile: &MachineProfile, scenario: &Scenario, options: ModelOptions) -> Result<StepTrace> {
    let geo = scenario.geometry()?;
    let mut wk = Walker::new(profile, scenario, options);
    let s = scenario;
    if s.p == 1 {
        let k = match s.algorithm {
            Algorithm::Cannon => DGEMM,
            Algorithm::Trsm => DTRSM,
        };
        wk.kernel(k, 1.0, k, s.n, s.t)?;
        return Ok(wk.finish());
    }
    let w = (geo.bs * geo.bs) as f64;
    let side = geo.side;
    let sidef = side as f64;
    match (s.algorithm, s.variant) {
        (Algorithm::Cannon, Variant::TwoD) => {
            for i in 0..side {
                wk.iteration = Some(i);
                wk.transfer_sync("row-shift", 1.0, s.p, w, 1.0);
                wk.transfer_sync("col-shift", 1.0, s.p, w, sidef);
                wk.kernel("dgemm", 1.0, DGEMM, geo.bs, s.t)?;
            }
        }
        (Algorithm::Cannon, Variant::TwoDOverlap) => {
            wk.transfer_sync("first-row-shift", 1.0, s.p, w, 1.0);
            wk.transfer_sync("first-col-shift", 1.0, s.p, w, sidef);
            for i in 1..side {
                wk.iteration = Some(i);
                wk.begin_overlap();
                wk.transfer_sync("row-shift", 1.0, s.p, w, 1.0);
                wk.transfer_sync("col-shift", 1.0, s.p, w, sidef);
                wk.kernel("dgemm", 1.0, DGEMM, geo.bs, s.t)?;
                wk.end_overlap();
            }
            wk.iteration = None;
            wk.kernel("final-dgemm", 1.0, DGEMM, geo.bs, s.t)?;
        }
        (Algorithm::Cannon, v) => {
            let overlap = v.is_overlap();
            if s.c == 1 {
                wk.transfer("skew-row", 1.0, w, 1.0);
                wk.transfer("skew-col", 1.0, w, sidef);
            } else {
                let d = ((s.c - 1) * (s.p / s.c)) as f64;
                wk.transfer_sync("replicate-a", 1.0, s.p, w, d);
                wk.transfer_sync("replicate-b", 1.0, s.p, w, d);
            }
            for i in 0..side - 1 {
                wk.iteration = Some(i);
                if overlap {
                    wk.begin_overlap();
                }
                wk.transfer("row-shift", 1.0, w, 1.0);
                wk.transfer("col-shift", 1.0, w, sidef);
                wk.kernel("dgemm", 1.0, DGEMM, geo.bs, s.t)?;
                wk.end_overlap();
            }
            wk.iteration = None;
            wk.kernel("final-dgemm", 1.0, DGEMM, geo.bs, s.t)?;
            let d = (s.p / s.c) as f64;
            wk.reduce_scatter("reduce", 1.0, s.p, s.c, w, d)?;
            wk.gather("reduce", 1.0, None, s.c, w, d)?;
        }
        (Algorithm::Trsm, v) => trsm_schedule(&mut wk, s, v, side, geo.bs, geo.steps, options)?,
    }
    Ok(wk.finish())
}

fn trsm_schedule(
    wk: &mut Walker<'_>,
    s: &Scenario,
    v: Variant,
    side: u64,
    bs: u64,
    steps: u64,
    options: ModelOptions,
) -> Result<()> {
    let w = (bs * bs) as f64;
    let sidef = side as f64;
    let stepsf = steps as f64;
    let overlap = v.is_overlap();
    let threads = if overlap { s.t - 1 } else { s.t };
    let replicated = v.is_replicated();

    // blocks of work per iteration: r block-rows in 2D; each layer holds a
    // 1/c share of them in 2.5D
    let (copies, share) = if replicated {
        (1, s.r as f64 / s.c as f64)
    } else {
        (s.r, 1.0)
    };
    let loop_u_q = if replicated && !overlap && options.trsm25d_full_grid_u_bcast {
        let full = s.p.isqrt();
        if full * full != s.p {
            return Err(Error::InvalidScenario(format!(
                "full-grid U broadcast needs a square p (got p = {})",
                s.p
            )));
        }
        full
    } else {
        side
    };

    let layer_blocks = s.r * s.r;
    let layer_dist = (s.p / s.c) as f64;
    if replicated {
        for j in 0..layer_blocks {
            wk.bcast(&format!("replicate-u[{j}]"), 0.75, false, s.p, s.c, w, layer_dist)?;
            wk.reduce_scatter(&format!("scatter-x[{j}]"), 1.0, s.p, s.c, w / s.c as f64, layer_dist)?;
        }
    }
    if overlap {
        for k in 0..s.r {
            wk.bcast(&format!("first-bcast-u[{k}]"), 1.0, true, s.p, side, w, sidef)?;
        }
    }

    for i in 0..steps {
        wk.iteration = Some(i);
        let remaining = (stepsf - i as f64) / sidef;
        let trailing = (stepsf - i as f64 - 1.0) / sidef;
        if !overlap {
            wk.bcast("bcast-u", remaining, true, s.p, loop_u_q, w, sidef)?;
        }
        for k in 0..copies {
            wk.kernel(&format!("solve[{k}]"), share, DTRSM, bs, threads)?;
            wk.bcast(&format!("bcast-x[{k}]"), share, false, s.p, side, w, 1.0)?;
        }
        if overlap {
            wk.begin_overlap();
            wk.bcast("bcast-u", trailing, true, s.p, side, w, sidef)?;
        }
        for k in 0..copies {
            wk.kernel(&format!("update[{k}]"), share * trailing, DGEMM, bs, threads)?;
        }
        wk.end_overlap();
    }

    wk.iteration = None;
    if !overlap {
        wk.bcast("last-bcast-u", 1.0, true, s.p, side, w, sidef)?;
    }
    for k in 0..copies {
        wk.kernel(&format!("last-solve[{k}]"), share, DTRSM, bs, threads)?;
    }
    if replicated {
        for j in 0..layer_blocks {
            wk.gather(&format!("gather-x[{j}]"), 1.0, None, s.c, w, layer_dist)?;
        }
    }
    Ok(())
}

/// Which collective [`collective_trace`] expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collective {
    Gather,
    ReduceScatterSync,
    Reduce,
    Bcast,
    BcastSync,
}

/// Step expansion of one collective in isolation.
pub fn collective_trace(
    profile: &MachineProfile,
    which: Collective,
    p: u64,
    q: u64,
    w: f64,
    d: f64,
) -> Result<StepTrace> {
    let scenario = Scenario::new(Algorithm::Cannon, Variant::TwoD, 1, p, 1, 1, 1);
    let mut wk = Walker::new(profile, &scenario, ModelOptions::default());
    match which {
        Collective::Gather => wk.gather("gather", 1.0, None, q, w, d)?,
        Collective::ReduceScatterSync => wk.reduce_scatter("red-sca", 1.0, p, q, w, d)?,
        Collective::Reduce => {
            wk.reduce_scatter("reduce", 1.0, p, q, w, d)?;
            wk.gather("reduce", 1.0, None, q, w, d)?;
        }
        Collective::Bcast => wk.bcast("bcast", 1.0, false, p, q, w, d)?,
        Collective::BcastSync => wk.bcast("bcast", 1.0, true, p, q, w, d)?,
    }
    Ok(wk.finish())
}
