//! Shared inputs for the model benchmarks.

use perfcal::{gen_synthetic_profile, Algorithm, MachineProfile, Scenario, SyntheticParams, Variant};

pub fn profile() -> MachineProfile {
    gen_synthetic_profile(&SyntheticParams::default())
}

/// One representative scenario per algorithm and variant.
pub fn scenarios() -> Vec<Scenario> {
    let mut out = Vec::new();
    for algorithm in Algorithm::ALL {
        for variant in Variant::ALL {
            let c = if variant.is_replicated() { 4 } else { 1 };
            let r = if algorithm == Algorithm::Trsm { 2 } else { 1 };
            out.push(Scenario::new(algorithm, variant, 16384, 1024, c, r, 6));
        }
    }
    out
}
