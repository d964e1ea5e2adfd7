//! End-to-end cost models of Cannon's matrix multiplication and of the
//! triangular solve, each in 2D and 2.5D form with and without overlap.
//!
//! The models are written against [`CostPrimitives`], so they can be
//! evaluated on a calibrated machine profile ([`ProfileModel`]) or on a stub
//! with hand-picked primitive costs. Loop sums are evaluated in closed form
//! (arithmetic series); [`crate::oracle`] enumerates the same schedules step
//! by step.

mod cannon;
mod scenario;
mod trsm;

use crate::commodel::{self, FinalStepScale};
use crate::error::Result;
use crate::profile::MachineProfile;

pub use scenario::{candidate_layers, Algorithm, Geometry, Scenario, Variant};

pub const DGEMM: &str = "dgemm";
pub const DTRSM: &str = "dtrsm";

/// Costs of the building blocks the algorithm models are assembled from.
pub trait CostPrimitives {
    /// Point-to-point transfer, average factor.
    fn comm(&self, w: f64, d: f64) -> f64;
    /// Point-to-point transfer followed by a synchronization of `p` processes.
    fn comm_sync(&self, p: u64, w: f64, d: f64) -> f64;
    fn ini_repl(&self, p: u64, w: f64, c: u64) -> Result<f64>;
    fn reduce(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64>;
    fn scatter_sync(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64>;
    fn gather(&self, q: u64, w: f64, d: f64) -> Result<f64>;
    fn bcast(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64>;
    fn bcast_sync(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64>;
    fn kernel(&self, name: &str, dim: u64, threads: u32) -> Result<f64>;
}

/// Switches for the two places where the model formulas admit
/// more than one reading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelOptions {
    /// Size the last reduce-scatter/scatter step with the thread count
    /// instead of the participant count.
    pub final_step_uses_threads: bool,
    /// In the non-overlapped 2.5D TRSM loop, broadcast U over `sqrt(p)`
    /// participants instead of the per-layer `sqrt(p/c)`.
    pub trsm25d_full_grid_u_bcast: bool,
}

/// Primitive costs read from a machine profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileModel<'a> {
    pub profile: &'a MachineProfile,
    pub final_step: FinalStepScale,
}

impl<'a> ProfileModel<'a> {
    pub fn new(profile: &'a MachineProfile) -> Self {
        ProfileModel {
            profile,
            final_step: FinalStepScale::Participants,
        }
    }

    /// Primitives configured for `scenario` under `options`.
    pub fn for_scenario(profile: &'a MachineProfile, scenario: &Scenario, options: ModelOptions) -> Self {
        let final_step = if options.final_step_uses_threads {
            FinalStepScale::Threads(scenario.t)
        } else {
            FinalStepScale::Participants
        };
        ProfileModel { profile, final_step }
    }
}

impl CostPrimitives for ProfileModel<'_> {
    fn comm(&self, w: f64, d: f64) -> f64 {
        commodel::t_comm(self.profile, w, d)
    }

    fn comm_sync(&self, p: u64, w: f64, d: f64) -> f64 {
        commodel::t_comm_sync(self.profile, p, w, d)
    }

    fn ini_repl(&self, p: u64, w: f64, c: u64) -> Result<f64> {
        commodel::t_ini_repl(self.profile, p, w, c)
    }

    fn reduce(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
        Ok(self.scatter_sync(p, q, w, d)? + commodel::t_gather(self.profile, q, w, d)?)
    }

    fn scatter_sync(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
        commodel::t_red_sca_sync_with(self.profile, p, q, w, d, self.final_step)
    }

    fn gather(&self, q: u64, w: f64, d: f64) -> Result<f64> {
        commodel::t_gather(self.profile, q, w, d)
    }

    fn bcast(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
        Ok(self.scatter_sync(p, q, w, d)? + commodel::t_all_gather(self.profile, q, w, d)?)
    }

    fn bcast_sync(&self, p: u64, q: u64, w: f64, d: f64) -> Result<f64> {
        Ok(self.scatter_sync(p, q, w, d)? + commodel::t_all_gather_sync(self.profile, p, q, w, d)?)
    }

    fn kernel(&self, name: &str, dim: u64, threads: u32) -> Result<f64> {
        self.profile.t_rout(name, dim, threads)
    }
}

/// One labelled share of a predicted run time.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub label: &'static str,
    pub seconds: f64,
}

impl Phase {
    pub(crate) fn new(label: &'static str, seconds: f64) -> Self {
        Phase { label, seconds }
    }
}

/// Phase breakdown of a model evaluation; the total is the phase sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub phases: Vec<Phase>,
    pub total_s: f64,
}

impl Breakdown {
    fn from_phases(phases: Vec<Phase>) -> Self {
        let total_s = phases.iter().map(|p| p.seconds).sum();
        Breakdown { phases, total_s }
    }
}

/// Predicted run time of one scenario on one machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scenario: Scenario,
    pub total_s: f64,
    pub phases: Vec<Phase>,
    pub flops: f64,
    pub percent_peak: f64,
}

/// Evaluates the model selected by `scenario` on arbitrary primitives.
pub fn breakdown<P: CostPrimitives>(prims: &P, scenario: &Scenario, options: ModelOptions) -> Result<Breakdown> {
    let geo = scenario.geometry()?;
    let phases = if scenario.p == 1 {
        // a single process runs the whole problem locally
        let kernel = match scenario.algorithm {
            Algorithm::Cannon => DGEMM,
            Algorithm::Trsm => DTRSM,
        };
        vec![Phase::new(kernel, prims.kernel(kernel, scenario.n, scenario.t)?)]
    } else {
        match (scenario.algorithm, scenario.variant) {
            (Algorithm::Cannon, Variant::TwoD) => cannon::two_d(prims, scenario, &geo)?,
            (Algorithm::Cannon, Variant::TwoDOverlap) => cannon::two_d_overlap(prims, scenario, &geo)?,
            (Algorithm::Cannon, Variant::TwoHalfD) => cannon::two_half_d(prims, scenario, &geo)?,
            (Algorithm::Cannon, Variant::TwoHalfDOverlap) => cannon::two_half_d_overlap(prims, scenario, &geo)?,
            (Algorithm::Trsm, Variant::TwoD) => trsm::two_d(prims, scenario, &geo)?,
            (Algorithm::Trsm, Variant::TwoDOverlap) => trsm::two_d_overlap(prims, scenario, &geo)?,
            (Algorithm::Trsm, Variant::TwoHalfD) => trsm::two_half_d(prims, scenario, &geo, options)?,
            (Algorithm::Trsm, Variant::TwoHalfDOverlap) => trsm::two_half_d_overlap(prims, scenario, &geo)?,
        }
    };
    Ok(Breakdown::from_phases(phases))
}

/// Predicts `scenario` on `profile`.
pub fn predict(profile: &MachineProfile, scenario: &Scenario, options: ModelOptions) -> Result<Prediction> {
    let prims = ProfileModel::for_scenario(profile, scenario, options);
    let Breakdown { phases, total_s } = breakdown(&prims, scenario, options)?;
    Ok(Prediction {
        scenario: *scenario,
        total_s,
        phases,
        flops: scenario.flops(),
        percent_peak: percent_peak(profile, scenario, total_s),
    })
}

/// Achieved fraction of machine peak, in percent.
pub fn percent_peak(profile: &MachineProfile, scenario: &Scenario, total_s: f64) -> f64 {
    let peak = total_s
        * scenario.p as f64
        * profile.cores_per_process as f64
        * profile.peak_flops_per_core;
    scenario.flops() / peak * 100.0
}

pub fn cannon_2d(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Cannon, Variant::TwoD)
}

pub fn cannon_2d_ovlp(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Cannon, Variant::TwoDOverlap)
}

pub fn cannon_25d(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Cannon, Variant::TwoHalfD)
}

pub fn cannon_25d_ovlp(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Cannon, Variant::TwoHalfDOverlap)
}

pub fn trsm_2d(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Trsm, Variant::TwoD)
}

pub fn trsm_2d_ovlp(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Trsm, Variant::TwoDOverlap)
}

pub fn trsm_25d(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Trsm, Variant::TwoHalfD)
}

pub fn trsm_25d_ovlp(profile: &MachineProfile, scenario: &Scenario) -> Result<Prediction> {
    predict_variant(profile, scenario, Algorithm::Trsm, Variant::TwoHalfDOverlap)
}

fn predict_variant(
    profile: &MachineProfile,
    scenario: &Scenario,
    algorithm: Algorithm,
    variant: Variant,
) -> Result<Prediction> {
    if scenario.algorithm != algorithm || scenario.variant != variant {
        return Err(crate::error::Error::InvalidScenario(format!(
            "scenario is {} {}, expected {algorithm} {variant}",
            scenario.algorithm, scenario.variant
        )));
    }
    predict(profile, scenario, ModelOptions::default())
}

/// Sum over `i in 0..steps` of `(steps - i + offset) / side`, in closed form.
///
/// `offset = 0` gives the U-broadcast weights, `offset = -1` the update weights.
pub(crate) fn weight_sum(steps: u64, side: u64, offset: i64) -> f64 {
    let m = steps as f64;
    let o = offset as f64;
    (m * (m + 1.0) / 2.0 + m * o) / side as f64
}
