//! Variant ranking over (n, p) sweeps.

use rayon::prelude::*;

use crate::algomodel::{candidate_layers, predict, Algorithm, ModelOptions, Prediction, Scenario, Variant};
use crate::error::{Error, Result};
use crate::profile::MachineProfile;

/// Layer counts tried for the replicated variants.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LayerChoice {
    /// Every power of two `c >= 2` with a square, power-of-two layer grid.
    #[default]
    Auto,
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub algorithm: Algorithm,
    pub ns: Vec<u64>,
    pub ps: Vec<u64>,
    pub layers: LayerChoice,
    pub r: u64,
    pub t: u32,
    pub options: ModelOptions,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() {
            return Err(Error::InvalidScenario("sweep needs at least one n".into()));
        }
        if self.ps.is_empty() {
            return Err(Error::InvalidScenario("sweep needs at least one p".into()));
        }
        if matches!(&self.layers, LayerChoice::List(v) if v.is_empty()) {
            return Err(Error::InvalidScenario("sweep needs at least one c".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(u64, u64)> {
        self.ns
            .iter()
            .flat_map(|&n| self.ps.iter().map(move |&p| (n, p)))
            .collect()
    }
}

/// Outcome of one variant in one cell: the best prediction, or why none exists.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantOutcome {
    pub variant: Variant,
    pub result: std::result::Result<Prediction, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub n: u64,
    pub p: u64,
    /// One entry per variant, in [`Variant::ALL`] order.
    pub outcomes: Vec<VariantOutcome>,
    pub winner: Option<Variant>,
}

impl RankRow {
    pub fn outcome(&self, v: Variant) -> &VariantOutcome {
        &self.outcomes[Variant::ALL.iter().position(|&x| x == v).unwrap()]
    }
}

/// Best prediction of `variant` at (n, p) over the allowed layer counts.
/// Ties go to the smaller `c`.
pub fn best_variant(
    profile: &MachineProfile,
    spec: &SweepSpec,
    variant: Variant,
    n: u64,
    p: u64,
) -> std::result::Result<Prediction, String> {
    let layers = if variant.is_replicated() {
        match &spec.layers {
            LayerChoice::Auto => candidate_layers(p),
            LayerChoice::List(v) => v.clone(),
        }
    } else {
        vec![1]
    };
    if layers.is_empty() {
        return Err(format!("no valid c for p = {p}"));
    }
    let mut best: Option<Prediction> = None;
    let mut errors = Vec::new();
    for c in layers {
        let s = Scenario::new(spec.algorithm, variant, n, p, c, spec.r, spec.t);
        match predict(profile, &s, spec.options) {
            Ok(pred) => {
                if best.as_ref().is_none_or(|b| pred.total_s < b.total_s) {
                    best = Some(pred);
                }
            }
            Err(e) if variant.is_replicated() => errors.push(format!("c = {c}: {e}")),
            Err(e) => errors.push(e.to_string()),
        }
    }
    best.ok_or_else(|| errors.join("; "))
}

/// Ranks all four variants at (n, p). The fastest wins; ties break in
/// [`Variant::ALL`] order.
pub fn rank_cell(profile: &MachineProfile, spec: &SweepSpec, n: u64, p: u64) -> RankRow {
    let outcomes: Vec<VariantOutcome> = Variant::ALL
        .iter()
        .map(|&variant| VariantOutcome {
            variant,
            result: best_variant(profile, spec, variant, n, p),
        })
        .collect();
    let mut winner: Option<(Variant, f64)> = None;
    for o in &outcomes {
        if let Ok(pred) = &o.result {
            if winner.is_none_or(|(_, t)| pred.total_s < t) {
                winner = Some((o.variant, pred.total_s));
            }
        }
    }
    RankRow {
        n,
        p,
        outcomes,
        winner: winner.map(|(v, _)| v),
    }
}

/// Ranks every cell of the sweep, n-major, evaluated in parallel.
pub fn rank(profile: &MachineProfile, spec: &SweepSpec) -> Result<Vec<RankRow>> {
    spec.validate()?;
    Ok(spec
        .cells()
        .into_par_iter()
        .map(|(n, p)| rank_cell(profile, spec, n, p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{gen_synthetic_profile, SyntheticParams};

    fn spec(algorithm: Algorithm, ns: Vec<u64>, ps: Vec<u64>) -> SweepSpec {
        SweepSpec {
            algorithm,
            ns,
            ps,
            layers: LayerChoice::Auto,
            r: 1,
            t: 6,
            options: ModelOptions::default(),
        }
    }

    #[test]
    fn single_cell_has_one_winner() {
        let prof = gen_synthetic_profile(&SyntheticParams::default());
        let rows = rank(&prof, &spec(Algorithm::Cannon, vec![8192], vec![256])).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].winner.is_some());
        assert_eq!(rows[0].outcomes.len(), 4);
    }

    #[test]
    fn cells_keep_order() {
        let prof = gen_synthetic_profile(&SyntheticParams::default());
        let s = spec(Algorithm::Cannon, vec![4096, 8192], vec![64, 256, 1024]);
        let rows = rank(&prof, &s).unwrap();
        let cells: Vec<_> = rows.iter().map(|r| (r.n, r.p)).collect();
        assert_eq!(cells, s.cells());
    }

    #[test]
    fn best_c_matches_direct_prediction() {
        let prof = gen_synthetic_profile(&SyntheticParams::default());
        let s = spec(Algorithm::Cannon, vec![16384], vec![1024]);
        let best = best_variant(&prof, &s, Variant::TwoHalfDOverlap, 16384, 1024).unwrap();
        for c in candidate_layers(1024) {
            let sc = Scenario::new(Algorithm::Cannon, Variant::TwoHalfDOverlap, 16384, 1024, c, 1, 6);
            let t = predict(&prof, &sc, ModelOptions::default()).unwrap().total_s;
            assert!(best.total_s <= t);
        }
    }

    #[test]
    fn invalid_cells_are_reported() {
        let prof = gen_synthetic_profile(&SyntheticParams::default());
        let row = rank_cell(&prof, &spec(Algorithm::Cannon, vec![1000], vec![60]), 1000, 60);
        assert!(row.winner.is_none());
        for o in &row.outcomes {
            assert!(o.result.is_err());
        }
        let msg = row.outcome(Variant::TwoD).result.as_ref().unwrap_err();
        assert!(msg.contains("perfect square"), "{msg}");
    }

    #[test]
    fn empty_lists_rejected() {
        let prof = gen_synthetic_profile(&SyntheticParams::default());
        assert!(rank(&prof, &spec(Algorithm::Cannon, vec![], vec![4])).is_err());
        let mut s = spec(Algorithm::Cannon, vec![64], vec![4]);
        s.layers = LayerChoice::List(vec![]);
        assert!(rank(&prof, &s).is_err());
    }
}
