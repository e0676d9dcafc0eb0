use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{subset_weight, Metric, PointSet, Weight};
use crate::ptas::{BoundFraction, CellConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "fixed-k")]
    FixedK,
    #[serde(rename = "ptas")]
    Ptas,
    #[serde(rename = "brute")]
    BruteForce,
    #[serde(rename = "greedy")]
    Greedy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::BruteForce,
        Algorithm::FixedK,
        Algorithm::Greedy,
        Algorithm::Ptas,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::FixedK => "fixed-k",
            Algorithm::Ptas => "ptas",
            Algorithm::BruteForce => "brute",
            Algorithm::Greedy => "greedy",
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
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm {s:?} (expected fixed-k|ptas|brute|greedy)"
                ))
            })
    }
}

/// PTAS-specific details attached to a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PtasReport {
    pub m: usize,
    pub bound_fraction: BoundFraction,
    /// The configuration that produced the returned subset.
    pub config: CellConfig,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Size of the candidate pool the subset search ran over.
    pub candidates: usize,
    /// Number of k-subsets scored.
    pub subsets_evaluated: u64,
    /// PTAS configurations evaluated (feasible count matrices).
    pub configurations: u64,
    /// Local-search swaps applied by the greedy baseline.
    pub swaps: u64,
    pub elapsed: Duration,
    pub ptas: Option<PtasReport>,
}

impl SolveStats {
    /// The work counter shown in benchmark reports.
    pub fn work(&self) -> u64 {
        self.subsets_evaluated
            .max(self.configurations)
            .max(self.swaps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub algorithm: Algorithm,
    pub metric: Metric,
    /// Sorted, distinct point indices.
    pub indices: Vec<usize>,
    /// Internal weight; see [`Weight`] for the L∞ convention.
    pub weight: Weight,
    pub stats: SolveStats,
}

impl Solution {
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn reported_weight(&self) -> String {
        self.weight.reported(self.metric)
    }

    /// Recomputes the weight of the selected indices and compares it with the
    /// stored one (exactly, or to 1e-9 relative for L2).
    pub fn verify(&self, points: &PointSet) -> Result<bool> {
        let w = subset_weight(points, &self.indices, self.metric)?;
        Ok(weights_agree(w, self.weight))
    }
}

/// Relative tolerance for comparing Euclidean weights.
pub const L2_REL_TOL: f64 = 1e-9;

pub fn weights_agree(a: Weight, b: Weight) -> bool {
    match (a, b) {
        (Weight::Exact(x), Weight::Exact(y)) => x == y,
        (a, b) => {
            let (x, y) = (a.as_f64(), b.as_f64());
            (x - y).abs() <= L2_REL_TOL * x.abs().max(y.abs()).max(1.0)
        }
    }
}
