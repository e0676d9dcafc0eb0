//! Exhaustive k-subset search shared by the exact solver and the oracle.

use std::ops::Add;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default cap on the number of k-subsets an exhaustive search may score.
pub const DEFAULT_SUBSET_BUDGET: u64 = 100_000_000;

/// Work and wall-clock limits for a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_evaluations: u64,
    pub deadline: Option<Instant>,
}

impl SearchLimits {
    pub fn with_budget(max_evaluations: u64) -> Self {
        Self {
            max_evaluations,
            deadline: None,
        }
    }

    pub(crate) fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::TimeLimit),
            _ => Ok(()),
        }
    }
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self::with_budget(DEFAULT_SUBSET_BUDGET)
    }
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1) after the multiply
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Additive subset score.
pub(crate) trait Score: Copy + Send + Sync + PartialOrd + Add<Output = Self> {
    const ZERO: Self;
}

impl Score for i128 {
    const ZERO: Self = 0;
}

impl Score for f64 {
    const ZERO: Self = 0.0;
}

/// `a` beats `b`: higher score, or equal score with lexicographically
/// smaller index list.
pub(crate) fn better<S: Score>(a: &(S, Vec<usize>), b: &(S, Vec<usize>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

pub(crate) fn pick_best<S: Score>(
    a: Option<(S, Vec<usize>)>,
    b: Option<(S, Vec<usize>)>,
) -> Option<(S, Vec<usize>)> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

pub(crate) struct SubsetSearch {
    pub best: Vec<usize>,
    pub evaluated: u64,
}

const PAIR_TABLE_LIMIT: usize = 512;
const DEADLINE_STRIDE: u64 = 1 << 14;

/// Scores every k-subset of `pool` (sorted ascending) by the sum of
/// `pair(i, j)` over its pairs and returns the best one: maximum score,
/// then lexicographically smallest. Parallel over the first element; the
/// result does not depend on the thread count.
pub(crate) fn best_subset<S, F>(
    pool: &[usize],
    k: usize,
    pair: F,
    limits: &SearchLimits,
) -> Result<SubsetSearch>
where
    S: Score,
    F: Fn(usize, usize) -> S + Sync,
{
    debug_assert!(pool.windows(2).all(|w| w[0] < w[1]));
    let u = pool.len();
    if k == 0 || k > u {
        return Err(Error::InvalidK { k, n: u, min: 1 });
    }
    let count = binomial(u, k);
    if count > limits.max_evaluations as u128 {
        return Err(Error::BudgetExceeded {
            what: "subset enumeration",
            count,
            budget: limits.max_evaluations,
        });
    }

    let table: Option<Vec<S>> = (u <= PAIR_TABLE_LIMIT).then(|| {
        let mut t = vec![S::ZERO; u * u];
        for a in 0..u {
            for b in a + 1..u {
                let s = pair(pool[a], pool[b]);
                t[a * u + b] = s;
                t[b * u + a] = s;
            }
        }
        t
    });
    let score = |a: usize, b: usize| match &table {
        Some(t) => t[a * u + b],
        None => pair(pool[a], pool[b]),
    };

    let ctx = Dfs {
        k,
        u,
        score: &score,
        limits,
    };
    let best = (0..=u - k)
        .into_par_iter()
        .map(|first| {
            limits.check_deadline()?;
            let mut state = DfsState {
                chosen: vec![first],
                best: None,
                leaves: 0,
            };
            ctx.descend(first + 1, S::ZERO, &mut state)?;
            Ok(state.best)
        })
        .try_reduce(|| None, |a, b| Ok(pick_best(a, b)))?;

    let (_, positions) = best.expect("at least one subset when k <= u");
    Ok(SubsetSearch {
        best: positions.into_iter().map(|p| pool[p]).collect(),
        evaluated: count as u64,
    })
}

struct Dfs<'a, G> {
    k: usize,
    u: usize,
    score: &'a G,
    limits: &'a SearchLimits,
}

struct DfsState<S> {
    chosen: Vec<usize>,
    best: Option<(S, Vec<usize>)>,
    leaves: u64,
}

impl<G> Dfs<'_, G> {
    fn descend<S: Score>(&self, start: usize, partial: S, st: &mut DfsState<S>) -> Result<()>
    where
        G: Fn(usize, usize) -> S,
    {
        if st.chosen.len() == self.k {
            st.leaves += 1;
            if st.leaves.is_multiple_of(DEADLINE_STRIDE) {
                self.limits.check_deadline()?;
            }
            // strict comparison keeps the lexicographically first optimum
            if st.best.as_ref().is_none_or(|(b, _)| partial > *b) {
                st.best = Some((partial, st.chosen.clone()));
            }
            return Ok(());
        }
        let remaining = self.k - st.chosen.len();
        for next in start..=self.u - remaining {
            let gain = st
                .chosen
                .iter()
                .fold(S::ZERO, |acc, &c| acc + (self.score)(c, next));
            st.chosen.push(next);
            self.descend(next + 1, partial + gain, st)?;
            st.chosen.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(30, 4), 27_405);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(15, 3), 455);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn finds_heaviest_pair_on_a_line() {
        let xs = [3i128, -4, 10, 0];
        let pool = [0, 1, 2, 3];
        let r = best_subset(
            &pool,
            2,
            |a, b| (xs[a] - xs[b]).abs(),
            &SearchLimits::default(),
        )
        .unwrap();
        assert_eq!(r.best, vec![1, 2]);
        assert_eq!(r.evaluated, 6);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let pool = [2, 5, 7, 9];
        let r = best_subset(&pool, 2, |_, _| 1i128, &SearchLimits::default()).unwrap();
        assert_eq!(r.best, vec![2, 5]);
    }

    #[test]
    fn budget_is_enforced() {
        let pool: Vec<usize> = (0..30).collect();
        let err = best_subset(&pool, 4, |_, _| 0i128, &SearchLimits::with_budget(1000))
            .err()
            .unwrap();
        assert!(matches!(err, Error::BudgetExceeded { count: 27_405, .. }));
    }

    #[test]
    fn past_deadline_stops() {
        let pool: Vec<usize> = (0..40).collect();
        let limits = SearchLimits {
            max_evaluations: u64::MAX,
            deadline: Some(Instant::now()),
        };
        let err = best_subset(&pool, 4, |_, _| 0i128, &limits).err().unwrap();
        assert_eq!(err, Error::TimeLimit);
    }
}
