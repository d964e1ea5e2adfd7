use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Cannon,
    Trsm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Cannon, Algorithm::Trsm];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cannon => "cannon",
            Algorithm::Trsm => "trsm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cannon" => Ok(Algorithm::Cannon),
            "trsm" => Ok(Algorithm::Trsm),
            _ => Err(Error::InvalidScenario(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Algorithm variant. The declaration order is the tie-break order: lower
/// memory first (2D before 2.5D), then non-overlapped before overlapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    TwoD,
    TwoDOverlap,
    TwoHalfD,
    TwoHalfDOverlap,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::TwoD,
        Variant::TwoDOverlap,
        Variant::TwoHalfD,
        Variant::TwoHalfDOverlap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::TwoD => "2d",
            Variant::TwoDOverlap => "2d_ovlp",
            Variant::TwoHalfD => "25d",
            Variant::TwoHalfDOverlap => "25d_ovlp",
        }
    }

    pub fn is_overlap(self) -> bool {
        matches!(self, Variant::TwoDOverlap | Variant::TwoHalfDOverlap)
    }

    pub fn is_replicated(self) -> bool {
        matches!(self, Variant::TwoHalfD | Variant::TwoHalfDOverlap)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown variant `{s}`")))
    }
}

/// One prediction request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub algorithm: Algorithm,
    pub variant: Variant,
    /// Global matrix dimension.
    pub n: u64,
    /// Total process count.
    pub p: u64,
    /// Replication layers; 1 for 2D variants.
    pub c: u64,
    /// Block-cyclic blocks per process per dimension; 1 for Cannon.
    pub r: u64,
    /// Threads per process.
    pub t: u32,
}

/// Derived process-grid quantities of a validated scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    /// Side of one layer's process grid: `sqrt(p / c)`.
    pub side: u64,
    /// Local block dimension.
    pub bs: u64,
    /// Loop trip count: `side` for Cannon, `r * side` for TRSM.
    pub steps: u64,
}

fn exact_sqrt(v: u64) -> Option<u64> {
    let s = v.isqrt();
    (s * s == v).then_some(s)
}

impl Scenario {
    pub fn new(algorithm: Algorithm, variant: Variant, n: u64, p: u64, c: u64, r: u64, t: u32) -> Self {
        Scenario { algorithm, variant, n, p, c, r, t }
    }

    /// Validates the scenario and derives its grid geometry.
    pub fn geometry(&self) -> Result<Geometry> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.p == 0 {
            return bad("p must be >= 1".into());
        }
        if self.t == 0 {
            return bad("t must be >= 1".into());
        }
        if self.r == 0 {
            return bad("r must be >= 1".into());
        }
        if self.c == 0 {
            return bad("c must be >= 1".into());
        }
        if self.algorithm == Algorithm::Cannon && self.r != 1 {
            return bad(format!("cannon uses r = 1 (got r = {})", self.r));
        }
        if !self.variant.is_replicated() && self.c != 1 {
            return bad(format!("2D variants use c = 1 (got c = {})", self.c));
        }
        if !self.p.is_multiple_of(self.c) {
            return Err(Error::LayersDoNotDivide { c: self.c, p: self.p });
        }
        let layer = self.p / self.c;
        let side = match exact_sqrt(layer) {
            Some(s) => s,
            None if self.c == 1 => return bad(format!("p = {} is not a perfect square", self.p)),
            None => return bad(format!("p/c = {layer} is not a perfect square")),
        };
        if self.variant.is_replicated() && !self.c.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { what: "c", value: self.c });
        }
        if self.algorithm == Algorithm::Trsm && !side.is_power_of_two() {
            let what = if self.c == 1 { "sqrt(p)" } else { "sqrt(p/c)" };
            return Err(Error::NotPowerOfTwo { what, value: side });
        }
        let blocks = self.r * side;
        if !self.n.is_multiple_of(blocks) {
            return bad(format!(
                "block size n/{blocks} is not integral for n = {}",
                self.n
            ));
        }
        if self.algorithm == Algorithm::Trsm && self.variant.is_overlap() && self.t < 2 {
            return bad("overlap requires a dedicated communication thread (t >= 2)".into());
        }
        Ok(Geometry {
            side,
            bs: self.n / blocks,
            steps: blocks,
        })
    }

    /// Floating-point operations of the whole computation.
    pub fn flops(&self) -> f64 {
        let n = self.n as f64;
        match self.algorithm {
            Algorithm::Cannon => 2.0 * n * n * n,
            Algorithm::Trsm => n * n * n,
        }
    }
}

/// Layer counts worth trying for a replicated variant at `p` processes:
/// powers of two `c >= 2` dividing `p` whose layer grid is square with a
/// power-of-two side.
pub fn candidate_layers(p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 2;
    while c <= p {
        if p.is_multiple_of(c) {
            if let Some(side) = exact_sqrt(p / c) {
                if side.is_power_of_two() {
                    out.push(c);
                }
            }
        }
        c *= 2;
    }
    out
}
