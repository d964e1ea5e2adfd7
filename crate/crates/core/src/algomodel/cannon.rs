use super::{CostPrimitives, Geometry, Phase, Scenario, DGEMM};
use crate::error::Result;

// Row shifts travel distance 1, column shifts one grid row (distance = side).

pub(super) fn two_d<P: CostPrimitives>(prims: &P, s: &Scenario, g: &Geometry) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let side = g.side as f64;
    let row = prims.comm_sync(s.p, w, 1.0);
    let col = prims.comm_sync(s.p, w, side);
    let mult = prims.kernel(DGEMM, g.bs, s.t)?;
    Ok(vec![
        Phase::new("row-shifts", side * row),
        Phase::new("col-shifts", side * col),
        Phase::new("dgemm", side * mult),
    ])
}

pub(super) fn two_d_overlap<P: CostPrimitives>(prims: &P, s: &Scenario, g: &Geometry) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let shifts = prims.comm_sync(s.p, w, 1.0) + prims.comm_sync(s.p, w, g.side as f64);
    let mult = prims.kernel(DGEMM, g.bs, s.t)?;
    Ok(vec![
        Phase::new("first-shifts", shifts),
        Phase::new("final-dgemm", mult),
        Phase::new("overlapped-loop", (g.side - 1) as f64 * shifts.max(mult)),
    ])
}

/// Initial data placement of the replicated algorithm. With several layers
/// the blocks are copied from the first layer; a single layer only performs
/// the 2D skew, charged like the loop's own shifts.
fn placement<P: CostPrimitives>(prims: &P, s: &Scenario, g: &Geometry, w: f64) -> Result<f64> {
    if s.c == 1 {
        Ok(prims.comm(w, 1.0) + prims.comm(w, g.side as f64))
    } else {
        prims.ini_repl(s.p, w, s.c)
    }
}

pub(super) fn two_half_d<P: CostPrimitives>(prims: &P, s: &Scenario, g: &Geometry) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let loops = (g.side - 1) as f64;
    let mult = prims.kernel(DGEMM, g.bs, s.t)?;
    Ok(vec![
        Phase::new("placement", placement(prims, s, g, w)?),
        Phase::new("row-shifts", loops * prims.comm(w, 1.0)),
        Phase::new("col-shifts", loops * prims.comm(w, g.side as f64)),
        Phase::new("dgemm", g.side as f64 * mult),
        Phase::new("reduce", prims.reduce(s.p, s.c, w, (s.p / s.c) as f64)?),
    ])
}

pub(super) fn two_half_d_overlap<P: CostPrimitives>(
    prims: &P,
    s: &Scenario,
    g: &Geometry,
) -> Result<Vec<Phase>> {
    let w = (g.bs * g.bs) as f64;
    let shifts = prims.comm(w, 1.0) + prims.comm(w, g.side as f64);
    let mult = prims.kernel(DGEMM, g.bs, s.t)?;
    Ok(vec![
        Phase::new("placement", placement(prims, s, g, w)?),
        Phase::new("overlapped-loop", (g.side - 1) as f64 * shifts.max(mult)),
        Phase::new("final-dgemm", mult),
        Phase::new("reduce", prims.reduce(s.p, s.c, w, (s.p / s.c) as f64)?),
    ])
}
