//! Numerical data of vector bundles on nodal curves.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{NodalCurve, Subcurve};
use crate::error::{Result, StabilityError};

/// How the restrictions of a bundle are identified at the nodes, as far as
/// the numerical model is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gluing {
    /// Fibers of subbundles coming from different components are in general position.
    Generic,
    /// Subbundles of equal rank can always be matched across a node.
    Aligned,
    /// Nothing is known; only bracket-level conclusions are drawn.
    Unspecified,
}

impl Gluing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gluing::Generic => "generic",
            Gluing::Aligned => "aligned",
            Gluing::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "generic" => Some(Gluing::Generic),
            "aligned" => Some(Gluing::Aligned),
            "unspecified" => Some(Gluing::Unspecified),
            _ => None,
        }
    }
}

impl fmt::Display for Gluing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rank, multidegree, splitting types on rational components, gluing model,
/// and optionally declared subsheaf maxima for components without a splitting.
///
/// Splitting types are kept sorted in descending order so that structural
/// equality is equality of bundles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BundleData {
    curve: NodalCurve,
    rank: u32,
    degrees: Vec<i64>,
    splitting: Vec<Option<Vec<i64>>>,
    gluing: Gluing,
    declared: Vec<BTreeMap<u32, i64>>,
}

impl BundleData {
    pub fn new(curve: NodalCurve, rank: u32, degrees: Vec<i64>) -> Result<Self> {
        if rank == 0 {
            return Err(StabilityError::InvalidBundle("rank must be positive".into()));
        }
        if degrees.len() != curve.component_count() {
            return Err(StabilityError::InvalidBundle(format!(
                "expected {} degrees, got {}",
                curve.component_count(),
                degrees.len()
            )));
        }
        let n = curve.component_count();
        Ok(BundleData {
            curve,
            rank,
            degrees,
            splitting: vec![None; n],
            gluing: Gluing::Unspecified,
            declared: vec![BTreeMap::new(); n],
        })
    }

    /// A bundle on a genus-0-only curve given entirely by its splitting types.
    pub fn from_splittings(curve: NodalCurve, splittings: &[&[i64]], gluing: Gluing) -> Result<Self> {
        let rank = splittings
            .first()
            .map(|s| s.len() as u32)
            .ok_or_else(|| StabilityError::InvalidBundle("no splittings given".into()))?;
        let degrees = splittings.iter().map(|s| s.iter().sum()).collect();
        let mut b = Self::new(curve, rank, degrees)?.with_gluing(gluing);
        for (i, s) in splittings.iter().enumerate() {
            b = b.with_splitting(i, s.to_vec())?;
        }
        Ok(b)
    }

    pub fn with_gluing(mut self, gluing: Gluing) -> Self {
        self.gluing = gluing;
        self
    }

    pub fn with_splitting(mut self, component: usize, mut entries: Vec<i64>) -> Result<Self> {
        self.check_component(component)?;
        if self.curve.genus(component) != 0 {
            return Err(StabilityError::InvalidBundle(format!(
                "splitting type given on `{}`, which has positive genus",
                self.curve.label(component)
            )));
        }
        if entries.len() != self.rank as usize {
            return Err(StabilityError::InvalidBundle(format!(
                "splitting on `{}` has {} entries, rank is {}",
                self.curve.label(component),
                entries.len(),
                self.rank
            )));
        }
        let sum: i64 = entries.iter().sum();
        if sum != self.degrees[component] {
            return Err(StabilityError::InvalidBundle(format!(
                "splitting sum {} ≠ degree {}",
                sum, self.degrees[component]
            )));
        }
        entries.sort_unstable_by(|a, b| b.cmp(a));
        self.splitting[component] = Some(entries);
        Ok(self)
    }

    /// Records a declared upper bound for χ of rank-`sub_rank` subsheaves of
    /// the restriction to `component`, treated as a curve without nodes.
    pub fn with_declared_max(mut self, component: usize, sub_rank: u32, chi: i64) -> Result<Self> {
        self.check_component(component)?;
        if sub_rank == 0 || sub_rank >= self.rank {
            return Err(StabilityError::InvalidBundle(format!(
                "declared maximum needs 1 ≤ sub-rank < {}, got {}",
                self.rank, sub_rank
            )));
        }
        self.declared[component].insert(sub_rank, chi);
        Ok(self)
    }

    fn check_component(&self, component: usize) -> Result<()> {
        if component >= self.curve.component_count() {
            return Err(StabilityError::InvalidBundle(format!(
                "component index {component} out of range"
            )));
        }
        Ok(())
    }

    pub fn curve(&self) -> &NodalCurve {
        &self.curve
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn degree(&self, component: usize) -> i64 {
        self.degrees[component]
    }

    pub fn total_degree(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn splitting(&self, component: usize) -> Option<&[i64]> {
        self.splitting[component].as_deref()
    }

    pub fn gluing(&self) -> Gluing {
        self.gluing
    }

    pub fn declared_max(&self, component: usize, sub_rank: u32) -> Option<i64> {
        self.declared[component].get(&sub_rank).copied()
    }

    pub fn declared_maxima(&self, component: usize) -> &BTreeMap<u32, i64> {
        &self.declared[component]
    }

    /// `χ(E|_Y) = d + r(1 − g)` for a single component.
    pub fn component_chi(&self, component: usize) -> i64 {
        self.degrees[component] + i64::from(self.rank) * (1 - i64::from(self.curve.genus(component)))
    }

    /// `χ(E) = Σ_i (d_i + r(1 − g_i)) − r·#nodes`.
    pub fn euler_characteristic(&self) -> i64 {
        let local: i64 = (0..self.curve.component_count())
            .map(|i| self.component_chi(i))
            .sum();
        local - i64::from(self.rank) * self.curve.node_count() as i64
    }

    /// Every component rational with a splitting type, and no self-nodes.
    pub fn decision_mode(&self) -> Result<()> {
        if self.curve.has_self_nodes() {
            return Err(StabilityError::DecisionModeUnavailable(
                "curve has a self-node".into(),
            ));
        }
        for i in 0..self.curve.component_count() {
            if self.curve.genus(i) > 0 {
                return Err(StabilityError::DecisionModeUnavailable(format!(
                    "component `{}` has genus {}",
                    self.curve.label(i),
                    self.curve.genus(i)
                )));
            }
            if self.splitting[i].is_none() {
                return Err(StabilityError::DecisionModeUnavailable(format!(
                    "component `{}` has no splitting type",
                    self.curve.label(i)
                )));
            }
        }
        Ok(())
    }

    pub fn is_decision_mode(&self) -> bool {
        self.decision_mode().is_ok()
    }

    pub fn restrict(&self, sub: &Subcurve) -> Result<BundleData> {
        let (curve, _) = self.curve.induced(sub)?;
        Ok(BundleData {
            curve,
            rank: self.rank,
            degrees: sub.components().iter().map(|&i| self.degrees[i]).collect(),
            splitting: sub.components().iter().map(|&i| self.splitting[i].clone()).collect(),
            gluing: self.gluing,
            declared: sub.components().iter().map(|&i| self.declared[i].clone()).collect(),
        })
    }

    /// `E ⊗ L`: degrees move by `r·ℓ_i`, splitting entries and declared
    /// rank-`s` maxima by `ℓ_i` and `s·ℓ_i`.
    pub fn twist(&self, line: &LineBundleData) -> Result<BundleData> {
        if line.curve != self.curve {
            return Err(StabilityError::CurveMismatch);
        }
        let r = i64::from(self.rank);
        let mut out = self.clone();
        for (i, &l) in line.degrees.iter().enumerate() {
            out.degrees[i] += r * l;
            if let Some(s) = out.splitting[i].as_mut() {
                s.iter_mut().for_each(|a| *a += l);
            }
            for (&s, chi) in out.declared[i].iter_mut() {
                *chi += i64::from(s) * l;
            }
        }
        Ok(out)
    }

    /// Replaces degrees and splittings wholesale, keeping curve, rank and gluing.
    pub(crate) fn with_state(&self, degrees: Vec<i64>, splitting: Vec<Option<Vec<i64>>>) -> Result<BundleData> {
        let mut out = BundleData::new(self.curve.clone(), self.rank, degrees)?.with_gluing(self.gluing);
        for (i, s) in splitting.into_iter().enumerate() {
            if let Some(s) = s {
                out = out.with_splitting(i, s)?;
            }
        }
        Ok(out)
    }

    pub(crate) fn on_curve(&self, curve: NodalCurve, degrees: Vec<i64>, splitting: Vec<Option<Vec<i64>>>) -> Result<BundleData> {
        let mut out = BundleData::new(curve, self.rank, degrees)?.with_gluing(self.gluing);
        for (i, s) in splitting.into_iter().enumerate() {
            if let Some(s) = s {
                out = out.with_splitting(i, s)?;
            }
        }
        Ok(out)
    }
}

/// A line bundle (or divisor class) recorded by its multidegree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineBundleData {
    curve: NodalCurve,
    degrees: Vec<i64>,
}

impl LineBundleData {
    pub fn new(curve: NodalCurve, degrees: Vec<i64>) -> Result<Self> {
        if degrees.len() != curve.component_count() {
            return Err(StabilityError::InvalidBundle(format!(
                "line bundle needs {} degrees, got {}",
                curve.component_count(),
                degrees.len()
            )));
        }
        Ok(LineBundleData { curve, degrees })
    }

    pub fn trivial(curve: NodalCurve) -> Self {
        let n = curve.component_count();
        LineBundleData {
            curve,
            degrees: vec![0; n],
        }
    }

    pub fn curve(&self) -> &NodalCurve {
        &self.curve
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn total_degree(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn inverse(&self) -> Self {
        LineBundleData {
            curve: self.curve.clone(),
            degrees: self.degrees.iter().map(|d| -d).collect(),
        }
    }
}
