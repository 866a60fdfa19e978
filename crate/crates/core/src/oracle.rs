//! Brute-force maximum χ over explicit realizations, independent of the bracket formulas.
//!
//! On each genus-0 component a rank-`r_i` subsheaf of `⊕ O(a_j)` has degree at
//! most the sum of the `r_i` largest `a_j`; every smaller degree down to the
//! floor is enumerated as well. At a node the two fibers meet in a subspace of
//! dimension between the forced `r_a + r_b − r` and the model's cap.

use serde::{Deserialize, Serialize};

use crate::bundle::BundleData;
use crate::error::{Result, StabilityError};
use crate::subsheaf::{Achievability, SubsheafType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub model: Achievability,
    /// Lowest per-component degree tried; defaults to `min splitting − rank`.
    pub degree_floor: Option<i64>,
    pub budget: u64,
    /// Realizations attaining the maximum to keep.
    pub keep: usize,
}

impl OracleConfig {
    pub fn new(model: Achievability) -> Self {
        OracleConfig {
            model,
            degree_floor: None,
            budget: 5_000_000,
            keep: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub max_chi: i64,
    pub realizations: Vec<SubsheafType>,
    pub enumerated: u64,
    pub model: Achievability,
}

fn best_subset_sum(entries: &[i64], k: usize) -> i64 {
    fn go(entries: &[i64], k: usize) -> Option<i64> {
        if k == 0 {
            return Some(0);
        }
        let (first, rest) = entries.split_first()?;
        let with = go(rest, k - 1).map(|s| s + first);
        let without = go(rest, k);
        with.max(without)
    }
    go(entries, k).expect("k does not exceed the number of entries")
}

pub fn oracle_max_chi(bundle: &BundleData, ranks: &[u32], config: &OracleConfig) -> Result<OracleOutcome> {
    let curve = bundle.curve();
    let n = curve.component_count();
    let r = bundle.rank();
    if ranks.len() != n {
        return Err(StabilityError::InvalidType(format!(
            "rank vector has {} entries, curve has {n} components",
            ranks.len()
        )));
    }
    if ranks.iter().any(|&x| x > r) || ranks.iter().all(|&x| x == 0) || ranks.iter().all(|&x| x == r) {
        return Err(StabilityError::InvalidType("rank vector must be proper and nonzero".into()));
    }
    if curve.has_self_nodes() {
        return Err(StabilityError::DecisionModeUnavailable("curve has a self-node".into()));
    }
    let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(n);
    for i in 0..n {
        if curve.genus(i) != 0 {
            return Err(StabilityError::DecisionModeUnavailable(format!(
                "`{}` has positive genus",
                curve.label(i)
            )));
        }
        let split = bundle.splitting(i).ok_or_else(|| {
            StabilityError::DecisionModeUnavailable(format!("no splitting type on `{}`", curve.label(i)))
        })?;
        let ri = ranks[i] as usize;
        if ri == 0 {
            ranges.push((0, 0));
            continue;
        }
        let top = best_subset_sum(split, ri);
        let min_entry = *split.iter().min().expect("rank is positive");
        let floor = config.degree_floor.unwrap_or(min_entry - i64::from(r)).min(top);
        ranges.push((floor, top));
    }
    let caps: Vec<(u32, u32)> = curve
        .nodes()
        .iter()
        .map(|p| {
            let (ra, rb) = (ranks[p.a], ranks[p.b]);
            (Achievability::Generic.overlap(ra, rb, r), config.model.overlap(ra, rb, r))
        })
        .collect();

    let needed: u128 = ranges
        .iter()
        .map(|(lo, hi)| (hi - lo + 1) as u128)
        .chain(caps.iter().map(|(lo, hi)| u128::from(hi - lo + 1)))
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX);
    if needed > u128::from(config.budget) {
        return Err(StabilityError::BudgetExceeded {
            needed,
            budget: config.budget,
        });
    }

    let mut degrees: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut overlaps: Vec<u32> = caps.iter().map(|c| c.0).collect();
    let base_rank: i64 = ranks.iter().map(|&x| i64::from(x)).sum();
    let mut best: Option<i64> = None;
    let mut hits: Vec<(Vec<i64>, Vec<u32>)> = Vec::new();
    let mut count = 0u64;
    loop {
        count += 1;
        // χ(F) = Σ (e_i + r_i) − Σ_P (r_a + r_b − dim overlap)
        let glue: i64 = curve
            .nodes()
            .iter()
            .zip(&overlaps)
            .map(|(p, &o)| i64::from(ranks[p.a] + ranks[p.b] - o))
            .sum();
        let chi = degrees.iter().sum::<i64>() + base_rank - glue;
        match best {
            Some(b) if chi < b => {}
            Some(b) if chi == b => {
                if hits.len() < config.keep {
                    hits.push((degrees.clone(), overlaps.clone()));
                }
            }
            _ => {
                best = Some(chi);
                hits.clear();
                hits.push((degrees.clone(), overlaps.clone()));
            }
        }
        if !advance(&mut degrees, &ranges, &mut overlaps, &caps) {
            break;
        }
    }
    let max_chi = best.expect("at least one realization");
    let mut realizations = hits
        .into_iter()
        .map(|(d, o)| SubsheafType::new(bundle, ranks.to_vec(), o)?.with_degrees(bundle, d))
        .collect::<Result<Vec<_>>>()?;
    realizations.sort();
    Ok(OracleOutcome {
        max_chi,
        realizations,
        enumerated: count,
        model: config.model,
    })
}

fn advance(degrees: &mut [i64], ranges: &[(i64, i64)], overlaps: &mut [u32], caps: &[(u32, u32)]) -> bool {
    for (o, &(lo, hi)) in overlaps.iter_mut().zip(caps) {
        if *o < hi {
            *o += 1;
            return true;
        }
        *o = lo;
    }
    for (d, &(lo, hi)) in degrees.iter_mut().zip(ranges) {
        if *d < hi {
            *d += 1;
            return true;
        }
        *d = lo;
    }
    false
}
