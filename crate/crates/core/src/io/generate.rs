//! Seeded random instances.
//!
//! The stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`, and
//! integers are drawn by rejection sampling on raw `u64` words, so output
//! depends only on the seed and not on platform or `rand` version.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_coordinate, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Distribution {
    /// Every coordinate i.i.d. uniform on `[lo, hi]`.
    Uniform,
    /// Uniform cluster centers, each point a uniform offset in
    /// `[-spread, spread]` per axis from a uniformly chosen center, clamped
    /// to `[lo, hi]`.
    Clustered { clusters: usize, spread: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub dim: usize,
    pub lo: i64,
    pub hi: i64,
    pub distribution: Distribution,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn uniform(n: usize, dim: usize, lo: i64, hi: i64, seed: u64) -> Self {
        Self {
            n,
            dim,
            lo,
            hi,
            distribution: Distribution::Uniform,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if self.lo > self.hi {
            return bad(format!("empty range [{}, {}]", self.lo, self.hi));
        }
        check_coordinate(self.lo as i128)?;
        check_coordinate(self.hi as i128)?;
        if let Distribution::Clustered { clusters, spread } = self.distribution {
            if clusters == 0 || clusters > self.n {
                return bad(format!(
                    "clusters must be in 1..={}, got {clusters}",
                    self.n
                ));
            }
            if spread < 0 {
                return bad(format!("spread must be nonnegative, got {spread}"));
            }
        }
        Ok(())
    }
}

/// Uniform integer on `[lo, hi]` by rejection from raw 64-bit words.
fn uniform_in(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    let span = (hi as i128 - lo as i128 + 1) as u64;
    let accept_below = (u64::MAX / span) * span;
    loop {
        let r = rng.next_u64();
        if r < accept_below {
            return (lo as i128 + (r % span) as i128) as i64;
        }
    }
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<PointSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.lo, spec.hi);
    let coords: Vec<i64> = match spec.distribution {
        Distribution::Uniform => (0..spec.n * spec.dim)
            .map(|_| uniform_in(&mut rng, lo, hi))
            .collect(),
        Distribution::Clustered { clusters, spread } => {
            let centers: Vec<i64> = (0..clusters * spec.dim)
                .map(|_| uniform_in(&mut rng, lo, hi))
                .collect();
            let mut out = Vec::with_capacity(spec.n * spec.dim);
            for _ in 0..spec.n {
                let c = uniform_in(&mut rng, 0, clusters as i64 - 1) as usize;
                for a in 0..spec.dim {
                    let off = uniform_in(&mut rng, -spread, spread);
                    let v = (centers[c * spec.dim + a] as i128 + off as i128)
                        .clamp(lo as i128, hi as i128);
                    out.push(v as i64);
                }
            }
            out
        }
    };
    PointSet::from_flat(spec.dim, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = InstanceSpec::uniform(30, 3, -50, 50, 42);
        assert_eq!(
            generate_instance(&spec).unwrap(),
            generate_instance(&spec).unwrap()
        );
        let other = InstanceSpec { seed: 43, ..spec };
        assert_ne!(
            generate_instance(&spec).unwrap(),
            generate_instance(&other).unwrap()
        );
    }

    #[test]
    fn pinned_stream() {
        // frozen output; a change here breaks reproducibility of saved runs
        let p = generate_instance(&InstanceSpec::uniform(3, 2, -50, 50, 7)).unwrap();
        assert_eq!(p.to_rows(), PINNED_SEED7);
    }

    const PINNED_SEED7: [[i64; 2]; 3] = [[49, 11], [42, -15], [16, -12]];

    #[test]
    fn degenerate_range() {
        let p = generate_instance(&InstanceSpec::uniform(5, 2, 0, 0, 1)).unwrap();
        assert!(p.iter().all(|q| q == [0, 0]));
        assert_eq!(p.len(), 5);
    }

    #[test]
    fn within_range() {
        let p = generate_instance(&InstanceSpec::uniform(100, 2, -50, 50, 42)).unwrap();
        assert!(p.iter().flatten().all(|&c| (-50..=50).contains(&c)));
        let spec = InstanceSpec {
            distribution: Distribution::Clustered {
                clusters: 3,
                spread: 5,
            },
            ..InstanceSpec::uniform(100, 2, -50, 50, 42)
        };
        let c = generate_instance(&spec).unwrap();
        assert!(c.iter().flatten().all(|&v| (-50..=50).contains(&v)));
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_instance(&InstanceSpec::uniform(0, 2, 0, 1, 0)).is_err());
        assert!(generate_instance(&InstanceSpec::uniform(3, 2, 5, 1, 0)).is_err());
        let spec = InstanceSpec {
            distribution: Distribution::Clustered {
                clusters: 4,
                spread: 1,
            },
            ..InstanceSpec::uniform(3, 2, 0, 10, 0)
        };
        assert!(generate_instance(&spec).is_err());
    }
}
