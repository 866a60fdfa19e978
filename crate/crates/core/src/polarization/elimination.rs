//! Fourier–Motzkin elimination over the open simplex with exact arithmetic.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::FeasibilitySystem;
use crate::error::{Result, StabilityError};
use crate::rational::{gcd_all, simplest_between, Bound, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solution {
    Feasible(Vec<Q>),
    Infeasible(InfeasibilityCertificate),
}

/// Nonnegative multipliers on the constraints and positivity rows whose
/// combination reads `c·Σ w_i (<|≤) b` with `c ≥ b` (strictly, unless strict).
/// Because `Σ w_i = 1`, no positive `w` satisfies it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    /// `(row label, row index, multiplier)`; indices past the constraints are
    /// the positivity rows `−w_i < 0`.
    pub multipliers: Vec<(String, usize, Q)>,
    pub combined_coeff: Q,
    pub combined_rhs: Q,
    pub strict: bool,
}

impl InfeasibilityCertificate {
    pub fn rows(&self) -> Vec<(&str, &Q)> {
        self.multipliers.iter().map(|(l, _, m)| (l.as_str(), m)).collect()
    }

    /// Recomputes the combination from the system and checks the contradiction.
    pub fn verify(&self, system: &FeasibilitySystem) -> bool {
        let n = system.dimension();
        let rows = all_rows(system);
        let mut coeffs = vec![Q::zero(); n];
        let mut rhs = Q::zero();
        let mut strict = false;
        for (_, idx, m) in &self.multipliers {
            if m.is_negative() || *idx >= rows.len() {
                return false;
            }
            if m.is_zero() {
                continue;
            }
            let row = &rows[*idx];
            for (c, &a) in coeffs.iter_mut().zip(&row.coeffs) {
                *c += m * Q::from_integer(a);
            }
            rhs += m * Q::from_integer(row.rhs);
            strict |= row.strict;
        }
        let Some(c) = coeffs.first().copied() else {
            return false;
        };
        if coeffs.iter().any(|x| *x != c) || c != self.combined_coeff || rhs != self.combined_rhs {
            return false;
        }
        strict == self.strict && (c > rhs || (c == rhs && strict))
    }
}

#[derive(Debug, Clone)]
struct Raw {
    label: String,
    coeffs: Vec<i128>,
    strict: bool,
    rhs: i128,
}

fn all_rows(system: &FeasibilitySystem) -> Vec<Raw> {
    let n = system.dimension();
    let mut rows: Vec<Raw> = system
        .constraints
        .iter()
        .map(|c| Raw {
            label: c.label.clone(),
            coeffs: c.coeffs.clone(),
            strict: c.strict,
            rhs: c.rhs,
        })
        .collect();
    for (i, name) in system.components.iter().enumerate() {
        let mut coeffs = vec![0i128; n];
        coeffs[i] = -1;
        rows.push(Raw {
            label: format!("w_{name} > 0"),
            coeffs,
            strict: true,
            rhs: 0,
        });
    }
    rows
}

/// A row over the reduced variables together with the multipliers producing it.
#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<i128>,
    strict: bool,
    rhs: i128,
    lambda: BTreeMap<usize, Q>,
}

fn checked_combo(a: i128, x: i128, b: i128, y: i128) -> Result<i128> {
    a.checked_mul(x)
        .zip(b.checked_mul(y))
        .and_then(|(p, q)| p.checked_add(q))
        .ok_or(StabilityError::Overflow)
}

impl Row {
    fn normalize(&mut self) {
        let g = gcd_all(self.coeffs.iter().copied().chain([self.rhs]));
        if g > 1 {
            self.coeffs.iter_mut().for_each(|a| *a /= g);
            self.rhs /= g;
            let gq = Q::from_integer(g);
            self.lambda.values_mut().for_each(|m| *m /= gq);
        }
    }

    fn contradiction(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0) && (self.rhs < 0 || (self.rhs == 0 && self.strict))
    }

    /// `up` has positive and `down` negative coefficient at `var`.
    fn combine(up: &Row, down: &Row, var: usize) -> Result<Row> {
        let (p, m) = (up.coeffs[var], -down.coeffs[var]);
        let coeffs = up
            .coeffs
            .iter()
            .zip(&down.coeffs)
            .map(|(&a, &b)| checked_combo(m, a, p, b))
            .collect::<Result<Vec<_>>>()?;
        let rhs = checked_combo(m, up.rhs, p, down.rhs)?;
        let mut lambda = BTreeMap::new();
        for (k, v) in &up.lambda {
            *lambda.entry(*k).or_insert_with(Q::zero) += v * Q::from_integer(m);
        }
        for (k, v) in &down.lambda {
            *lambda.entry(*k).or_insert_with(Q::zero) += v * Q::from_integer(p);
        }
        let mut row = Row {
            coeffs,
            strict: up.strict || down.strict,
            rhs,
            lambda,
        };
        row.coeffs[var] = 0;
        row.normalize();
        Ok(row)
    }
}

/// Keeps only the tightest row for each coefficient vector, first seen first.
fn prune(rows: Vec<Row>) -> Vec<Row> {
    let mut kept: Vec<Row> = Vec::new();
    let mut index: BTreeMap<Vec<i128>, usize> = BTreeMap::new();
    for row in rows {
        if row.coeffs.iter().all(|&a| a == 0) && !row.contradiction() {
            continue;
        }
        match index.get(&row.coeffs) {
            Some(&i) => {
                let o = &kept[i];
                if row.rhs < o.rhs || (row.rhs == o.rhs && row.strict && !o.strict) {
                    kept[i] = row;
                }
            }
            None => {
                index.insert(row.coeffs.clone(), kept.len());
                kept.push(row);
            }
        }
    }
    kept
}

/// Decides whether some positive `w` with `Σ w = 1` satisfies every constraint.
pub fn solve(system: &FeasibilitySystem) -> Result<Solution> {
    let n = system.dimension();
    if n == 0 {
        return Err(StabilityError::InvalidPolarization("no components".into()));
    }
    if system.constraints.iter().any(|c| c.coeffs.len() != n) {
        return Err(StabilityError::InvalidPolarization("constraint length mismatch".into()));
    }
    let raw = all_rows(system);
    let m = n - 1;
    // w_n = 1 − Σ_{i<n} w_i turns a·w ≤ b into Σ (a_i − a_n) x_i ≤ b − a_n.
    let mut stage: Vec<Row> = raw
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let last = r.coeffs[m];
            let coeffs = r.coeffs[..m]
                .iter()
                .map(|&a| a.checked_sub(last).ok_or(StabilityError::Overflow))
                .collect::<Result<Vec<_>>>()?;
            let rhs = r.rhs.checked_sub(last).ok_or(StabilityError::Overflow)?;
            let mut row = Row {
                coeffs,
                strict: r.strict,
                rhs,
                lambda: BTreeMap::from([(k, Q::from_integer(1))]),
            };
            row.normalize();
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut stages: Vec<Vec<Row>> = Vec::with_capacity(m + 1);
    stage = prune(stage);
    for var in (0..m).rev() {
        let next = {
            let mut out: Vec<Row> = stage.iter().filter(|r| r.coeffs[var] == 0).cloned().collect();
            let ups: Vec<&Row> = stage.iter().filter(|r| r.coeffs[var] > 0).collect();
            let downs: Vec<&Row> = stage.iter().filter(|r| r.coeffs[var] < 0).collect();
            for u in &ups {
                for d in &downs {
                    out.push(Row::combine(u, d, var)?);
                }
            }
            prune(out)
        };
        stages.push(std::mem::replace(&mut stage, next));
    }

    if let Some(bad) = stage.iter().find(|r| r.contradiction()) {
        return Ok(Solution::Infeasible(certificate(system, &raw, bad)));
    }

    // Back-substitute: stages[m - 1 - j] still contains x_j as its last live variable.
    let mut x: Vec<Q> = Vec::with_capacity(m);
    for j in 0..m {
        let rows = &stages[m - 1 - j];
        let mut lo: Bound = None;
        let mut hi: Bound = None;
        for row in rows.iter().filter(|r| r.coeffs[j] != 0) {
            let rest: Q = row.coeffs[..j]
                .iter()
                .zip(&x)
                .map(|(&a, v)| Q::from_integer(a) * v)
                .sum();
            let a = Q::from_integer(row.coeffs[j]);
            let bound = (Q::from_integer(row.rhs) - rest) / a;
            let closed = !row.strict;
            if a.is_positive() {
                hi = Some(match hi {
                    Some((h, hc)) if h < bound || (h == bound && !hc) => (h, hc),
                    _ => (bound, closed),
                });
            } else {
                lo = Some(match lo {
                    Some((l, lc)) if l > bound || (l == bound && !lc) => (l, lc),
                    _ => (bound, closed),
                });
            }
        }
        let v = simplest_between(lo, hi).ok_or_else(|| {
            StabilityError::Precondition("elimination left an empty interval during back-substitution".into())
        })?;
        x.push(v);
    }
    let last = Q::from_integer(1) - x.iter().sum::<Q>();
    x.push(last);
    if !system.holds_at(&x) {
        return Err(StabilityError::Precondition("back-substituted point violates the system".into()));
    }
    Ok(Solution::Feasible(x))
}

fn certificate(system: &FeasibilitySystem, raw: &[Raw], bad: &Row) -> InfeasibilityCertificate {
    let n = system.dimension();
    let mut coeff = Q::zero();
    let mut rhs = Q::zero();
    let mut strict = false;
    let mut multipliers = Vec::new();
    for (&k, m) in &bad.lambda {
        if m.is_zero() {
            continue;
        }
        let row = &raw[k];
        coeff += m * Q::from_integer(row.coeffs[0]);
        rhs += m * Q::from_integer(row.rhs);
        strict |= row.strict;
        multipliers.push((row.label.clone(), k, *m));
    }
    debug_assert!(n > 0);
    InfeasibilityCertificate {
        multipliers,
        combined_coeff: coeff,
        combined_rhs: rhs,
        strict,
    }
}
