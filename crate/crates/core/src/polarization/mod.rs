//! Polarizations and the search for one making a bundle w-(semi)stable.

mod elimination;

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use elimination::{solve, InfeasibilityCertificate, Solution};

use crate::bundle::{BundleData, Gluing};
use crate::curve::NodalCurve;
use crate::engine::{decide_w, preference_sorted, proper_rank_vectors, Status, Verdict};
use crate::error::{Result, StabilityError};
use crate::rational::{fmt_q, Q};
use crate::subsheaf::{chi_bracket, fmt_vec};

/// Positive rational weights on the components, summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polarization {
    weights: Vec<Q>,
}

impl Polarization {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if weights.is_empty() {
            return Err(StabilityError::InvalidPolarization("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(StabilityError::InvalidPolarization(format!(
                "weight {} is not positive",
                fmt_q(w)
            )));
        }
        let total: Q = weights.iter().sum();
        if !total.is_one() {
            return Err(StabilityError::InvalidPolarization(format!(
                "weights sum to {}",
                fmt_q(&total)
            )));
        }
        Ok(Polarization { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(StabilityError::InvalidPolarization("no weights".into()));
        }
        Polarization::new(vec![Q::new(1, n as i128); n])
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn check_curve(&self, curve: &NodalCurve) -> Result<()> {
        if self.weights.len() != curve.component_count() {
            return Err(StabilityError::InvalidPolarization(format!(
                "{} weights for {} components",
                self.weights.len(),
                curve.component_count()
            )));
        }
        Ok(())
    }

    /// `Σ w_i r_i`.
    pub fn weighted_rank(&self, ranks: &[u32]) -> Result<Q> {
        if ranks.len() != self.weights.len() {
            return Err(StabilityError::InvalidPolarization(format!(
                "{} weights for a rank vector of length {}",
                self.weights.len(),
                ranks.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(ranks)
            .fold(Q::zero(), |acc, (w, &r)| acc + w * Q::from_integer(i128::from(r))))
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(fmt_q).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Which end of each χ bracket feeds the constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Lower ends: subsheaves that exist for every gluing.
    Guaranteed,
    /// Upper ends: every subsheaf that might exist.
    Potential,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Guaranteed => "guaranteed",
            Side::Potential => "potential",
        }
    }
}

/// `Σ coeffs_i · w_i < rhs` (or `≤`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub coeffs: Vec<i128>,
    pub strict: bool,
    pub rhs: i128,
}

impl Constraint {
    pub fn holds_at(&self, w: &[Q]) -> bool {
        let lhs: Q = self
            .coeffs
            .iter()
            .zip(w)
            .map(|(&a, x)| Q::from_integer(a) * x)
            .sum();
        let rhs = Q::from_integer(self.rhs);
        if self.strict {
            lhs < rhs
        } else {
            lhs <= rhs
        }
    }

    /// Multiplies coefficients and right-hand side by a positive integer.
    pub fn scaled(&self, k: i128) -> Constraint {
        assert!(k > 0, "scale factor must be positive");
        Constraint {
            label: self.label.clone(),
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
            strict: self.strict,
            rhs: self.rhs * k,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{a}·w{}", i + 1))
            .collect();
        let rel = if self.strict { "<" } else { "≤" };
        write!(f, "{}: {} {rel} {}", self.label, terms.join(" + "), self.rhs)
    }
}

/// Linear conditions on `w` (beyond positivity and `Σ w = 1`) for w-(semi)stability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilitySystem {
    pub components: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl FeasibilitySystem {
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn scaled(&self, k: i128) -> FeasibilitySystem {
        FeasibilitySystem {
            components: self.components.clone(),
            constraints: self.constraints.iter().map(|c| c.scaled(k)).collect(),
        }
    }

    pub fn holds_at(&self, w: &[Q]) -> bool {
        w.len() == self.dimension()
            && w.iter().all(|x| x.is_positive())
            && w.iter().sum::<Q>().is_one()
            && self.constraints.iter().all(|c| c.holds_at(w))
    }
}

fn normalize(c: &mut Constraint) {
    let g = crate::rational::gcd_all(c.coeffs.iter().copied().chain([c.rhs]));
    if g > 1 {
        c.coeffs.iter_mut().for_each(|a| *a /= g);
        c.rhs /= g;
    }
}

/// Rows that hold for every point of the open simplex.
fn implied_by_simplex(c: &Constraint) -> bool {
    let max = *c.coeffs.iter().max().expect("nonempty");
    if c.strict {
        max < c.rhs || (max == c.rhs && c.coeffs.iter().any(|&a| a != max))
    } else {
        max <= c.rhs
    }
}

/// One constraint per proper rank vector, pruned of rows implied by the simplex
/// and of rows dominated by a tighter row with the same coefficients.
pub fn build_system(bundle: &BundleData, strict: bool, side: Side) -> Result<FeasibilitySystem> {
    bundle.decision_mode()?;
    if bundle.curve().has_self_nodes() {
        return Err(StabilityError::DecisionModeUnavailable("curve has a self-node".into()));
    }
    let curve = bundle.curve();
    let n = curve.component_count();
    let r = i128::from(bundle.rank());
    let chi_e = i128::from(bundle.euler_characteristic());
    let mut rows: Vec<Constraint> = Vec::new();
    for ranks in preference_sorted(proper_rank_vectors(n, bundle.rank())) {
        let b = chi_bracket(bundle, &ranks)?;
        let chi = i128::from(match side {
            Side::Guaranteed => b.lower,
            Side::Potential => b.upper,
        });
        // χ·r ≤ χ(E)·Σ w_i r_i  ⇔  Σ (−χ(E)·r_i)·w_i ≤ −χ·r
        let mut c = Constraint {
            label: format!("({})", fmt_vec(&ranks)),
            coeffs: ranks.iter().map(|&ri| -chi_e * i128::from(ri)).collect(),
            strict,
            rhs: -chi * r,
        };
        normalize(&mut c);
        if implied_by_simplex(&c) {
            continue;
        }
        match rows.iter_mut().find(|o| o.coeffs == c.coeffs) {
            Some(o) => {
                if c.rhs < o.rhs {
                    *o = c;
                }
            }
            None => rows.push(c),
        }
    }
    Ok(FeasibilitySystem {
        components: curve.components().iter().map(|c| c.label.clone()).collect(),
        constraints: rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarizationResult {
    Feasible {
        witness: Polarization,
        /// Independent re-check of the witness by the decision engine.
        verdict: Verdict,
        side: Side,
    },
    Infeasible {
        certificate: InfeasibilityCertificate,
        system: FeasibilitySystem,
    },
    Indeterminate {
        reason: String,
    },
}

fn side_for(gluing: Gluing, feasible: bool) -> Side {
    match (gluing, feasible) {
        (Gluing::Generic, _) => Side::Guaranteed,
        (Gluing::Aligned, _) => Side::Potential,
        (Gluing::Unspecified, true) => Side::Potential,
        (Gluing::Unspecified, false) => Side::Guaranteed,
    }
}

fn attempt(bundle: &BundleData, strict: bool, side: Side) -> Result<(FeasibilitySystem, Solution)> {
    let system = build_system(bundle, strict, side)?;
    let solution = solve(&system)?;
    Ok((system, solution))
}

/// Decides whether some polarization makes the bundle w-(semi)stable.
pub fn exists_polarization(bundle: &BundleData, strict: bool) -> Result<PolarizationResult> {
    let gluing = bundle.gluing();
    let feasible_side = side_for(gluing, true);
    let (_, first) = attempt(bundle, strict, feasible_side)?;
    if let Solution::Feasible(w) = first {
        let witness = Polarization::new(w)?;
        let verdict = decide_w(bundle, &witness, strict)?;
        if verdict.status != Status::CertifiedYes {
            return Err(StabilityError::Precondition(format!(
                "feasible point {witness} failed to re-verify: {}",
                verdict.status
            )));
        }
        return Ok(PolarizationResult::Feasible {
            witness,
            verdict,
            side: feasible_side,
        });
    }
    let infeasible_side = side_for(gluing, false);
    let (system, second) = if infeasible_side == feasible_side {
        let system = build_system(bundle, strict, infeasible_side)?;
        (system, first)
    } else {
        attempt(bundle, strict, infeasible_side)?
    };
    match second {
        Solution::Infeasible(certificate) => Ok(PolarizationResult::Infeasible { certificate, system }),
        Solution::Feasible(w) => Ok(PolarizationResult::Indeterminate {
            reason: format!(
                "feasible only if gluing realizes lower χ brackets, e.g. w = ({})",
                w.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}
