//! Numerical subsheaf types and their Euler-characteristic brackets.
//!
//! A subsheaf `F ⊆ E` is recorded by its rank `r_i` on every component, optionally
//! its degree `e_i` there, and for every node the overlap `r_P`: the dimension of
//! the part of the fibers of the two saturations that is glued together at `P`.
//! Its Euler characteristic is
//!
//! ```text
//! χ(F) = Σ_i χ(F_i) − Σ_P (r_a + r_b − r_P)
//! ```
//!
//! so the node penalty ranges between `max(r_a, r_b)` (fibers matched as far as
//! possible) and `min(r_a + r_b, r)` (fibers in general position inside the rank
//! `r` fiber of `E`, which is always realizable). The bracket `[lower, upper]`
//! pairs those two extremes with the per-component maxima of `χ(F_i)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bundle::BundleData;
use crate::error::{Result, StabilityError};
use crate::polarization::Polarization;
use crate::rational::{fmt_q, q, Q};

/// Where a per-component maximum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaxSource {
    /// Sum of the largest splitting entries on a rational component.
    Splitting,
    /// User-declared bound on a component without a splitting type.
    Declared,
    /// The whole restriction (full rank).
    FullRank,
    /// Rank zero contributes nothing.
    Empty,
}

impl MaxSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaxSource::Splitting => "splitting",
            MaxSource::Declared => "declared",
            MaxSource::FullRank => "full-rank",
            MaxSource::Empty => "empty",
        }
    }
}

/// How far fibers of subsheaves on adjacent components can be matched at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Achievability {
    /// Overlap is exactly the forced one, `max(0, r_a + r_b − r)`.
    Generic,
    /// Overlap can reach `min(r_a, r_b)`.
    Aligned,
}

impl Achievability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Achievability::Generic => "generic",
            Achievability::Aligned => "aligned",
        }
    }

    pub fn overlap(&self, ra: u32, rb: u32, rank: u32) -> u32 {
        match self {
            Achievability::Generic => (ra + rb).saturating_sub(rank),
            Achievability::Aligned => ra.min(rb),
        }
    }
}

/// Largest χ of a saturated rank-`sub_rank` subsheaf of `E|_Y` for a rational
/// component `Y` with a splitting type: the `sub_rank` largest entries plus `sub_rank`.
pub fn max_chi_saturated(bundle: &BundleData, component: usize, sub_rank: u32) -> Result<i64> {
    let label = bundle.curve().label(component);
    if bundle.curve().genus(component) > 0 {
        return Err(StabilityError::DecisionModeUnavailable(format!(
            "component `{label}` has positive genus"
        )));
    }
    let split = bundle.splitting(component).ok_or_else(|| {
        StabilityError::DecisionModeUnavailable(format!("component `{label}` has no splitting type"))
    })?;
    if sub_rank == 0 || sub_rank > bundle.rank() {
        return Err(StabilityError::InvalidType(format!(
            "sub-rank {sub_rank} outside 1..={}",
            bundle.rank()
        )));
    }
    let top: i64 = split.iter().take(sub_rank as usize).sum();
    Ok(top + i64::from(sub_rank))
}

/// Maximum of `χ(F_i)` over rank-`sub_rank` subsheaves of `E|_Y`, from
/// whichever source is available.
pub fn component_max_chi(bundle: &BundleData, component: usize, sub_rank: u32) -> Result<(i64, MaxSource)> {
    if sub_rank == 0 {
        return Ok((0, MaxSource::Empty));
    }
    if sub_rank == bundle.rank() {
        return Ok((bundle.component_chi(component), MaxSource::FullRank));
    }
    if bundle.splitting(component).is_some() {
        return Ok((max_chi_saturated(bundle, component, sub_rank)?, MaxSource::Splitting));
    }
    if let Some(chi) = bundle.declared_max(component, sub_rank) {
        return Ok((chi, MaxSource::Declared));
    }
    Err(StabilityError::DecisionModeUnavailable(format!(
        "no splitting type or declared maximum for rank {sub_rank} on `{}`",
        bundle.curve().label(component)
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChiBracket {
    /// χ of a subsheaf of this type that exists for every gluing.
    pub lower: i64,
    /// No subsheaf of this type has larger χ.
    pub upper: i64,
}

impl ChiBracket {
    /// The maximum under an achievability model.
    pub fn under(&self, model: Achievability) -> i64 {
        match model {
            Achievability::Generic => self.lower,
            Achievability::Aligned => self.upper,
        }
    }
}

impl fmt::Display for ChiBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

fn check_ranks(bundle: &BundleData, ranks: &[u32]) -> Result<()> {
    if ranks.len() != bundle.curve().component_count() {
        return Err(StabilityError::InvalidType(format!(
            "rank vector has {} entries, curve has {} components",
            ranks.len(),
            bundle.curve().component_count()
        )));
    }
    if let Some(&bad) = ranks.iter().find(|&&r| r > bundle.rank()) {
        return Err(StabilityError::InvalidType(format!(
            "rank {bad} exceeds bundle rank {}",
            bundle.rank()
        )));
    }
    Ok(())
}

/// Per-component maxima and their provenance for a rank vector.
pub fn component_maxima(bundle: &BundleData, ranks: &[u32]) -> Result<Vec<(i64, MaxSource)>> {
    check_ranks(bundle, ranks)?;
    (0..ranks.len())
        .map(|i| component_max_chi(bundle, i, ranks[i]))
        .collect()
}

pub fn chi_bracket(bundle: &BundleData, ranks: &[u32]) -> Result<ChiBracket> {
    if bundle.curve().has_self_nodes() {
        return Err(StabilityError::DecisionModeUnavailable(
            "curve has a self-node".into(),
        ));
    }
    let maxima = component_maxima(bundle, ranks)?;
    let base: i64 = maxima.iter().map(|(m, _)| m).sum();
    let r = bundle.rank();
    let (mut tight, mut loose) = (0i64, 0i64);
    for node in bundle.curve().nodes() {
        let (ra, rb) = (ranks[node.a], ranks[node.b]);
        tight += i64::from(ra.max(rb));
        loose += i64::from((ra + rb).min(r));
    }
    Ok(ChiBracket {
        lower: base - loose,
        upper: base - tight,
    })
}

/// Numerical type of a torsion-free subsheaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsheafType {
    ranks: Vec<u32>,
    degrees: Option<Vec<i64>>,
    overlaps: Vec<u32>,
}

impl SubsheafType {
    pub fn new(bundle: &BundleData, ranks: Vec<u32>, overlaps: Vec<u32>) -> Result<Self> {
        let ty = SubsheafType {
            ranks,
            degrees: None,
            overlaps,
        };
        ty.validate(bundle)?;
        Ok(ty)
    }

    /// A type with explicit degrees; every degree must respect the maximal
    /// saturated degree on its component when that maximum is known.
    pub fn with_degrees(mut self, bundle: &BundleData, degrees: Vec<i64>) -> Result<Self> {
        self.degrees = Some(degrees);
        self.validate(bundle)?;
        Ok(self)
    }

    /// The type with maximal component degrees and the overlaps prescribed by `model`.
    pub fn extremal(bundle: &BundleData, ranks: Vec<u32>, model: Achievability) -> Result<Self> {
        check_ranks(bundle, &ranks)?;
        let overlaps = bundle
            .curve()
            .nodes()
            .iter()
            .map(|n| model.overlap(ranks[n.a], ranks[n.b], bundle.rank()))
            .collect();
        let degrees = component_maxima(bundle, &ranks)?
            .iter()
            .enumerate()
            .map(|(i, (m, _))| m - i64::from(ranks[i]) * (1 - i64::from(bundle.curve().genus(i))))
            .collect();
        SubsheafType::new(bundle, ranks, overlaps)?.with_degrees(bundle, degrees)
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn degrees(&self) -> Option<&[i64]> {
        self.degrees.as_deref()
    }

    pub fn overlaps(&self) -> &[u32] {
        &self.overlaps
    }

    pub fn constant_rank(&self) -> Option<u32> {
        let first = *self.ranks.first()?;
        self.ranks.iter().all(|&r| r == first).then_some(first)
    }

    pub fn is_ell_admissible(&self) -> bool {
        self.constant_rank().is_some()
    }

    pub fn validate(&self, bundle: &BundleData) -> Result<()> {
        check_ranks(bundle, &self.ranks)?;
        let r = bundle.rank();
        if self.ranks.iter().all(|&x| x == 0) {
            return Err(StabilityError::InvalidType("rank vector is zero".into()));
        }
        if self.ranks.iter().all(|&x| x == r) {
            return Err(StabilityError::InvalidType(
                "rank vector is that of the whole bundle".into(),
            ));
        }
        let nodes = bundle.curve().nodes();
        if self.overlaps.len() != nodes.len() {
            return Err(StabilityError::InvalidType(format!(
                "{} overlaps given for {} nodes",
                self.overlaps.len(),
                nodes.len()
            )));
        }
        for (k, (n, &o)) in nodes.iter().zip(&self.overlaps).enumerate() {
            if o > self.ranks[n.a].min(self.ranks[n.b]) {
                return Err(StabilityError::InvalidType(format!(
                    "overlap {o} at node {k} exceeds the incident ranks"
                )));
            }
        }
        if let Some(degrees) = &self.degrees {
            if degrees.len() != self.ranks.len() {
                return Err(StabilityError::InvalidType("degree vector has wrong length".into()));
            }
            for (i, (&e, &ri)) in degrees.iter().zip(&self.ranks).enumerate() {
                if ri == 0 && e != 0 {
                    return Err(StabilityError::InvalidType(format!(
                        "degree {e} on `{}` where the rank is 0",
                        bundle.curve().label(i)
                    )));
                }
                if let Ok((m, _)) = component_max_chi(bundle, i, ri) {
                    let genus_term = i64::from(ri) * (1 - i64::from(bundle.curve().genus(i)));
                    if e + genus_term > m {
                        return Err(StabilityError::InvalidType(format!(
                            "degree {e} on `{}` exceeds the maximal saturated degree {}",
                            bundle.curve().label(i),
                            m - genus_term
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `Σ (e_i + r_i(1 − g_i)) − Σ_P (r_a + r_b − r_P)`, when degrees are known.
    pub fn realization_chi(&self, bundle: &BundleData) -> Option<i64> {
        let degrees = self.degrees.as_ref()?;
        let local: i64 = degrees
            .iter()
            .zip(&self.ranks)
            .enumerate()
            .map(|(i, (&e, &ri))| e + i64::from(ri) * (1 - i64::from(bundle.curve().genus(i))))
            .sum();
        let penalty: i64 = bundle
            .curve()
            .nodes()
            .iter()
            .zip(&self.overlaps)
            .map(|(n, &o)| i64::from(self.ranks[n.a] + self.ranks[n.b] - o))
            .sum();
        Some(local - penalty)
    }

    pub fn bracket(&self, bundle: &BundleData) -> Result<ChiBracket> {
        chi_bracket(bundle, &self.ranks)
    }
}

pub fn fmt_vec<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for SubsheafType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ranks ({})", fmt_vec(&self.ranks))?;
        if let Some(d) = &self.degrees {
            write!(f, " degrees ({})", fmt_vec(d))?;
        }
        write!(f, " overlaps ({})", fmt_vec(&self.overlaps))
    }
}

/// The stability notion being tested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Notion {
    EllSemistable,
    EllStable,
    WSemistable(Polarization),
    WStable(Polarization),
}

impl Notion {
    pub fn ell(strict: bool) -> Self {
        if strict {
            Notion::EllStable
        } else {
            Notion::EllSemistable
        }
    }

    pub fn polarized(w: Polarization, strict: bool) -> Self {
        if strict {
            Notion::WStable(w)
        } else {
            Notion::WSemistable(w)
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Notion::EllStable | Notion::WStable(_))
    }

    pub fn polarization(&self) -> Option<&Polarization> {
        match self {
            Notion::WSemistable(w) | Notion::WStable(w) => Some(w),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Notion::EllSemistable => "ℓ-semistable",
            Notion::EllStable => "ℓ-stable",
            Notion::WSemistable(_) => "w-semistable",
            Notion::WStable(_) => "w-stable",
        }
    }

    /// The rank weight the subsheaf χ is compared against: `r'` for ℓ-notions,
    /// `Σ w_i r_i` for polarized ones.
    pub fn weighted_rank(&self, ranks: &[u32]) -> Result<Q> {
        match self.polarization() {
            None => {
                let first = *ranks.first().ok_or(StabilityError::InadmissibleType)?;
                if ranks.iter().any(|&r| r != first) {
                    return Err(StabilityError::InadmissibleType);
                }
                Ok(q(i64::from(first)))
            }
            Some(w) => w.weighted_rank(ranks),
        }
    }

    /// Compares `χ(F)·r` with `χ(E)·weighted_rank`.
    pub fn compare(&self, bundle: &BundleData, ranks: &[u32], chi: i64) -> Result<Comparison> {
        let weight = self.weighted_rank(ranks)?;
        Ok(Comparison {
            lhs: q(chi) * q(i64::from(bundle.rank())),
            rhs: q(bundle.euler_characteristic()) * weight,
            strict: self.is_strict(),
        })
    }
}

/// `lhs = χ(F)·r` against `rhs = χ(E)·(weighted rank)`. Stability asks for
/// `lhs < rhs`, semistability for `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: Q,
    pub rhs: Q,
    pub strict: bool,
}

impl Comparison {
    pub fn violated(&self) -> bool {
        if self.strict {
            self.lhs >= self.rhs
        } else {
            self.lhs > self.rhs
        }
    }

    /// `lhs − rhs`; positive values are violations of semistability.
    pub fn margin(&self) -> Q {
        self.lhs - self.rhs
    }

    pub fn relation(&self) -> &'static str {
        match (self.strict, self.violated()) {
            (true, true) => "≥",
            (true, false) => "<",
            (false, true) => ">",
            (false, false) => "≤",
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", fmt_q(&self.lhs), self.relation(), fmt_q(&self.rhs))
    }
}

/// Machine-checkable evidence that a numerical type violates a notion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub notion: Notion,
    pub subsheaf: SubsheafType,
    pub declared_chi: i64,
    pub bundle_chi: i64,
    pub comparison: Comparison,
    /// Upper bound used as a plausibility gate, when available.
    pub upper_bound: Option<i64>,
    /// Provenance of the per-component maxima behind the gate.
    pub provenance: Vec<MaxSource>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    /// The inequality of the notion fails for the declared χ.
    Certified(Certificate),
    /// The inequality holds; the comparison explains why.
    Rejected(Comparison),
}

impl Check {
    pub fn is_certified(&self) -> bool {
        matches!(self, Check::Certified(_))
    }
}

/// Checks that a subsheaf of the given type with χ = `declared_chi` violates
/// the inequality of `notion`.
pub fn verify_destabilizer(bundle: &BundleData, ty: &SubsheafType, notion: &Notion, declared_chi: i64) -> Result<Check> {
    ty.validate(bundle)?;
    if notion.polarization().is_none() && !ty.is_ell_admissible() {
        return Err(StabilityError::InadmissibleType);
    }
    if let Some(w) = notion.polarization() {
        w.check_curve(bundle.curve())?;
    }
    let (upper_bound, provenance) = match ty.bracket(bundle) {
        Ok(b) => {
            if declared_chi > b.upper {
                return Err(StabilityError::ImplausibleChi {
                    declared: declared_chi,
                    upper: b.upper,
                });
            }
            let prov = component_maxima(bundle, ty.ranks())?.into_iter().map(|(_, s)| s).collect();
            (Some(b.upper), prov)
        }
        Err(StabilityError::DecisionModeUnavailable(_)) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    if let Some(chi) = ty.realization_chi(bundle) {
        if declared_chi > chi {
            return Err(StabilityError::ImplausibleChi {
                declared: declared_chi,
                upper: chi,
            });
        }
    }
    let comparison = notion.compare(bundle, ty.ranks(), declared_chi)?;
    if !comparison.violated() {
        return Ok(Check::Rejected(comparison));
    }
    Ok(Check::Certified(Certificate {
        notion: notion.clone(),
        subsheaf: ty.clone(),
        declared_chi,
        bundle_chi: bundle.euler_characteristic(),
        comparison,
        upper_bound,
        provenance,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{Gluing, LineBundleData};
    use crate::curve::NodalCurve;
    use crate::rational::frac;
    use proptest::prelude::*;

    pub(crate) fn three_chain(gluing: Gluing) -> BundleData {
        BundleData::from_splittings(
            NodalCurve::chain(&[0, 0, 0]).unwrap(),
            &[&[0, 0], &[-1, -1], &[0, 0]],
            gluing,
        )
        .unwrap()
    }

    fn single(split: &[i64]) -> BundleData {
        BundleData::from_splittings(NodalCurve::chain(&[0]).unwrap(), &[split], Gluing::Generic).unwrap()
    }

    /// Independent route: the best sub-sum of `size` splitting entries.
    fn best_subset_sum(entries: &[i64], size: usize) -> i64 {
        let n = entries.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == size)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| entries[i]).sum())
            .max()
            .unwrap()
    }

    #[test]
    fn max_chi_saturated_examples() {
        let b = single(&[3, 1]);
        // line subbundles O(b) → O(3) ⊕ O(1) need b ≤ 3; χ(O(3)) = 4
        let brute = (-10..=10).filter(|&deg| deg <= 3).map(|deg| deg + 1).max().unwrap();
        assert_eq!(max_chi_saturated(&b, 0, 1).unwrap(), brute);
        assert_eq!(max_chi_saturated(&b, 0, 1).unwrap(), 4);
        for a in -3..4 {
            assert_eq!(max_chi_saturated(&single(&[a, a]), 0, 1).unwrap(), a + 1);
        }
        assert_eq!(max_chi_saturated(&b, 0, 2).unwrap(), 6);
        assert_eq!(max_chi_saturated(&b, 0, 2).unwrap(), b.component_chi(0));

        let positive = BundleData::new(NodalCurve::chain(&[2]).unwrap(), 2, vec![0]).unwrap();
        assert!(matches!(
            max_chi_saturated(&positive, 0, 1),
            Err(StabilityError::DecisionModeUnavailable(_))
        ));
        let bare = BundleData::new(NodalCurve::chain(&[0]).unwrap(), 2, vec![0]).unwrap();
        assert!(matches!(
            max_chi_saturated(&bare, 0, 1),
            Err(StabilityError::DecisionModeUnavailable(_))
        ));
    }

    #[test]
    fn three_chain_brackets() {
        let e = three_chain(Gluing::Generic);
        // sections vanishing on the complement of Y1: χ = d_1 − 2 g_1 = 0
        assert_eq!(chi_bracket(&e, &[2, 0, 0]).unwrap(), ChiBracket { lower: 0, upper: 0 });
        // sections vanishing on Y1: 2 g_1 − 2 − d_1 = −2
        assert_eq!(chi_bracket(&e, &[0, 2, 2]).unwrap().upper, -2);
        assert_eq!(chi_bracket(&e, &[0, 2, 2]).unwrap().lower, -2);
        assert_eq!(chi_bracket(&e, &[1, 1, 1]).unwrap(), ChiBracket { lower: -2, upper: 0 });
    }

    /// Exhaustive oracle over degrees up to the saturated bound and overlaps
    /// up to min(r_a, r_b), for the (1,1,1) type of the chain example.
    #[test]
    fn constant_rank_bracket_matches_enumeration() {
        let e = three_chain(Gluing::Unspecified);
        let tops: Vec<i64> = (0..3).map(|i| best_subset_sum(e.splitting(i).unwrap(), 1)).collect();
        let mut best_any = i64::MIN;
        let mut best_generic = i64::MIN;
        for e0 in tops[0] - 3..=tops[0] {
            for e1 in tops[1] - 3..=tops[1] {
                for e2 in tops[2] - 3..=tops[2] {
                    for p0 in 0..=1u32 {
                        for p1 in 0..=1u32 {
                            let chi = (e0 + 1) + (e1 + 1) + (e2 + 1) - i64::from(2 - p0) - i64::from(2 - p1);
                            best_any = best_any.max(chi);
                            if p0 == 0 && p1 == 0 {
                                best_generic = best_generic.max(chi);
                            }
                        }
                    }
                }
            }
        }
        let b = chi_bracket(&e, &[1, 1, 1]).unwrap();
        assert_eq!((b.lower, b.upper), (best_generic, best_any));
    }

    #[test]
    fn verify_examples() {
        let e = three_chain(Gluing::Generic);
        for w in [
            Polarization::new(vec![frac(1, 3), frac(1, 3), frac(1, 3)]).unwrap(),
            Polarization::new(vec![frac(1, 2), frac(1, 4), frac(1, 4)]).unwrap(),
        ] {
            let ty = SubsheafType::new(&e, vec![2, 0, 0], vec![0, 0]).unwrap();
            let check = verify_destabilizer(&e, &ty, &Notion::WStable(w), 0).unwrap();
            let Check::Certified(cert) = check else { panic!("expected certificate") };
            assert_eq!(cert.comparison.lhs, q(0));
            assert_eq!(cert.comparison.rhs, q(0));
            assert_eq!(cert.comparison.relation(), "≥");
        }

        let b = single(&[3, 1]);
        let ty = SubsheafType::new(&b, vec![1], vec![]).unwrap();
        let Check::Certified(cert) = verify_destabilizer(&b, &ty, &Notion::EllSemistable, 4).unwrap() else {
            panic!("expected certificate")
        };
        // 4·2 > 6·1
        assert_eq!((cert.comparison.lhs, cert.comparison.rhs), (q(8), q(6)));

        let bal = single(&[2, 2]);
        let ty = SubsheafType::new(&bal, vec![1], vec![]).unwrap();
        assert!(matches!(
            verify_destabilizer(&bal, &ty, &Notion::EllSemistable, 3).unwrap(),
            Check::Rejected(_)
        ));
        assert!(verify_destabilizer(&bal, &ty, &Notion::EllStable, 3).unwrap().is_certified());
    }

    #[test]
    fn verify_errors() {
        let e = three_chain(Gluing::Generic);
        let ty = SubsheafType::new(&e, vec![2, 0, 0], vec![0, 0]).unwrap();
        assert_eq!(
            verify_destabilizer(&e, &ty, &Notion::EllSemistable, 0),
            Err(StabilityError::InadmissibleType)
        );
        let ty = SubsheafType::new(&e, vec![1, 1, 1], vec![0, 0]).unwrap();
        assert_eq!(
            verify_destabilizer(&e, &ty, &Notion::EllStable, 1),
            Err(StabilityError::ImplausibleChi { declared: 1, upper: 0 })
        );
        assert!(SubsheafType::new(&e, vec![0, 0, 0], vec![0, 0]).is_err());
        assert!(SubsheafType::new(&e, vec![2, 2, 2], vec![2, 2]).is_err());
        assert!(SubsheafType::new(&e, vec![1, 0, 1], vec![1, 0]).is_err());
        let ty = SubsheafType::new(&e, vec![1, 1, 1], vec![1, 1]).unwrap();
        assert!(ty.clone().with_degrees(&e, vec![1, -1, 0]).is_err());
        let realized = ty.with_degrees(&e, vec![0, -1, 0]).unwrap();
        assert_eq!(realized.realization_chi(&e), Some(0));
    }

    #[test]
    fn declared_maxima_feed_the_bracket() {
        // genus-2 component with declared rank-1 maximum, then a rational tail
        let c = NodalCurve::chain(&[2, 0]).unwrap();
        let e = BundleData::new(c, 2, vec![2, 0])
            .unwrap()
            .with_splitting(1, vec![0, 0])
            .unwrap()
            .with_declared_max(0, 1, 0)
            .unwrap();
        assert_eq!(chi_bracket(&e, &[1, 1]).unwrap(), ChiBracket { lower: -1, upper: 0 });
        assert_eq!(chi_bracket(&e, &[2, 0]).unwrap(), ChiBracket { lower: -2, upper: -2 });
        let bare = BundleData::new(NodalCurve::chain(&[2]).unwrap(), 2, vec![0]).unwrap();
        assert!(chi_bracket(&bare, &[1]).is_err());
        assert_eq!(chi_bracket(&bare, &[2]).unwrap().upper, -2);
    }

    fn arb_decision_bundle() -> impl Strategy<Value = (BundleData, Vec<u32>, Vec<i64>)> {
        (1usize..4, 1u32..4).prop_flat_map(|(n, r)| {
            (
                prop::collection::vec(prop::collection::vec(-4i64..5, r as usize), n),
                prop::collection::vec(0..=r, n),
                prop::collection::vec(-3i64..4, n),
                prop::collection::vec((0..n, 0..n), 0..3),
            )
                .prop_map(move |(splits, ranks, line, extra)| {
                    let mut nodes: Vec<(String, String)> =
                        (1..n).map(|i| (format!("Y{i}"), format!("Y{}", i + 1))).collect();
                    for (a, b) in extra {
                        if a != b {
                            nodes.push((format!("Y{}", a + 1), format!("Y{}", b + 1)));
                        }
                    }
                    let comps: Vec<(String, u32)> = (1..=n).map(|i| (format!("Y{i}"), 0)).collect();
                    let curve = NodalCurve::new(comps, nodes).unwrap();
                    let refs: Vec<&[i64]> = splits.iter().map(|s| s.as_slice()).collect();
                    (BundleData::from_splittings(curve, &refs, Gluing::Generic).unwrap(), ranks, line)
                })
        })
    }

    proptest! {
        #[test]
        fn bracket_is_ordered((bundle, ranks, _) in arb_decision_bundle()) {
            let b = chi_bracket(&bundle, &ranks).unwrap();
            prop_assert!(b.lower <= b.upper);
            let all_disjoint = bundle.curve().nodes().iter().all(|n| ranks[n.a].min(ranks[n.b]) == 0);
            if all_disjoint {
                prop_assert_eq!(b.lower, b.upper);
            }
        }

        #[test]
        fn bracket_twist_covariance((bundle, ranks, line) in arb_decision_bundle()) {
            let l = LineBundleData::new(bundle.curve().clone(), line.clone()).unwrap();
            let twisted = bundle.twist(&l).unwrap();
            let shift: i64 = ranks.iter().zip(&line).map(|(&r, &d)| i64::from(r) * d).sum();
            let before = chi_bracket(&bundle, &ranks).unwrap();
            let after = chi_bracket(&twisted, &ranks).unwrap();
            prop_assert_eq!(after.lower, before.lower + shift);
            prop_assert_eq!(after.upper, before.upper + shift);
        }

        #[test]
        fn extremal_types_realize_bracket_ends((bundle, ranks, _) in arb_decision_bundle()) {
            let r = bundle.rank();
            prop_assume!(ranks.iter().any(|&x| x > 0) && ranks.iter().any(|&x| x < r));
            let b = chi_bracket(&bundle, &ranks).unwrap();
            for model in [Achievability::Generic, Achievability::Aligned] {
                let ty = SubsheafType::extremal(&bundle, ranks.clone(), model).unwrap();
                prop_assert_eq!(ty.realization_chi(&bundle), Some(b.under(model)));
            }
        }
    }
}
