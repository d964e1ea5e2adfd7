//! Block-cyclic triangular solve `X * U = B`.
//!
//! Each of the `r * side` iterations broadcasts a block-row of U down the
//! grid columns, solves the diagonal blocks, broadcasts the solved blocks
//! of X along the grid rows and updates the trailing matrix. The U
//! broadcast and the update shrink with the iteration index, which is why
//! their weights `(steps - i) / side` and `(steps - i - 1) / side` appear.

use super::{weight_sum, CostPrimitives, Geometry, ModelOptions, Phase, Scenario, DGEMM, DTRSM};
use crate::error::{Error, Result};

/// Share of U replicated onto the other layers before the solve starts.
const U_REPLICATION_SHARE: f64 = 3.0 / 4.0;

pub(super) fn two_d<P: CostPrimitives>(prims: &P, s: &Scenario, g: &Geometry) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let (p, side, r) = (s.p, g.side, s.r as f64);
    let bcast_u = prims.bcast_sync(p, side, w, side as f64)?;
    let bcast_x = prims.bcast(p, side, w, 1.0)?;
    let solve = prims.kernel(DTRSM, g.bs, s.t)?;
    let update = prims.kernel(DGEMM, g.bs, s.t)?;
    let steps = g.steps as f64;
    Ok(vec![
        Phase::new("bcast-u", (weight_sum(g.steps, side, 0) + 1.0) * bcast_u),
        Phase::new("solve", (steps + 1.0) * r * solve),
        Phase::new("bcast-x", steps * r * bcast_x),
        Phase::new("update", weight_sum(g.steps, side, -1) * r * update),
    ])
}

pub(super) fn two_d_overlap<P: CostPrimitives>(prims: &P, s: &Scenario, g: &Geometry) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let (p, side, r) = (s.p, g.side, s.r as f64);
    let compute_threads = s.t - 1;
    let bcast_u = prims.bcast_sync(p, side, w, side as f64)?;
    let bcast_x = prims.bcast(p, side, w, 1.0)?;
    let solve = prims.kernel(DTRSM, g.bs, compute_threads)?;
    let update = prims.kernel(DGEMM, g.bs, compute_threads)?;
    let steps = g.steps as f64;
    Ok(vec![
        Phase::new("first-bcast-u", r * bcast_u),
        Phase::new("solve", (steps + 1.0) * r * solve),
        Phase::new("bcast-x", steps * r * bcast_x),
        Phase::new("overlapped-update", weight_sum(g.steps, side, -1) * bcast_u.max(r * update)),
    ])
}

/// Replication of U and scatter of the X rows across layers, and the final gather.
fn layer_traffic<P: CostPrimitives>(prims: &P, s: &Scenario, w: f64) -> Result<[Phase; 3]> {
    let r2 = (s.r * s.r) as f64;
    let layer_dist = (s.p / s.c) as f64;
    let c = s.c as f64;
    Ok([
        Phase::new("replicate-u", r2 * U_REPLICATION_SHARE * prims.bcast(s.p, s.c, w, layer_dist)?),
        Phase::new("scatter-x", r2 * prims.scatter_sync(s.p, s.c, w / c, layer_dist)?),
        Phase::new("gather-x", r2 * prims.gather(s.c, w, layer_dist)?),
    ])
}

pub(super) fn two_half_d<P: CostPrimitives>(
    prims: &P,
    s: &Scenario,
    g: &Geometry,
    options: ModelOptions,
) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let (p, side) = (s.p, g.side);
    let share = s.r as f64 / s.c as f64;
    let loop_u_participants = if options.trsm25d_full_grid_u_bcast {
        let full = p.isqrt();
        if full * full != p {
            return Err(Error::InvalidScenario(format!(
                "full-grid U broadcast needs a square p (got p = {p})"
            )));
        }
        full
    } else {
        side
    };
    let loop_u = prims.bcast_sync(p, loop_u_participants, w, side as f64)?;
    let last_u = prims.bcast_sync(p, side, w, side as f64)?;
    let bcast_x = prims.bcast(p, side, w, 1.0)?;
    let solve = prims.kernel(DTRSM, g.bs, s.t)?;
    let update = prims.kernel(DGEMM, g.bs, s.t)?;
    let steps = g.steps as f64;
    let [replicate, scatter, gather] = layer_traffic(prims, s, w)?;
    Ok(vec![
        replicate,
        scatter,
        Phase::new("bcast-u", weight_sum(g.steps, side, 0) * loop_u + last_u),
        Phase::new("solve", (steps + 1.0) * share * solve),
        Phase::new("bcast-x", steps * share * bcast_x),
        Phase::new("update", weight_sum(g.steps, side, -1) * share * update),
        gather,
    ])
}

pub(super) fn two_half_d_overlap<P: CostPrimitives>(
    prims: &P,
    s: &Scenario,
    g: &Geometry,
) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let (p, side) = (s.p, g.side);
    let share = s.r as f64 / s.c as f64;
    let compute_threads = s.t - 1;
    let bcast_u = prims.bcast_sync(p, side, w, side as f64)?;
    let bcast_x = prims.bcast(p, side, w, 1.0)?;
    let solve = prims.kernel(DTRSM, g.bs, compute_threads)?;
    let update = prims.kernel(DGEMM, g.bs, compute_threads)?;
    let steps = g.steps as f64;
    let [replicate, scatter, gather] = layer_traffic(prims, s, w)?;
    Ok(vec![
        replicate,
        scatter,
        Phase::new("first-bcast-u", s.r as f64 * bcast_u),
        Phase::new("solve", (steps + 1.0) * share * solve),
        Phase::new("bcast-x", steps * share * bcast_x),
        Phase::new(
            "overlapped-update",
            weight_sum(g.steps, side, -1) * bcast_u.max(share * update),
        ),
        gather,
    ])
}
