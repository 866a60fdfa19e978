//! Three-valued decision procedures for ℓ- and w-(semi)stability.
//!
//! Every candidate rank vector is judged from its χ bracket. Gluing decides what
//! happens when the bracket straddles the threshold: generic gluing realizes the
//! lower end, aligned gluing the upper end, and unspecified gluing leaves the
//! candidate open. Certified negative answers always carry a witness whose
//! certificate re-verifies through [`verify_destabilizer`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleData, Gluing};
use crate::curve::Subcurve;
use crate::error::{Result, StabilityError};
use crate::polarization::Polarization;
use crate::rational::{fmt_q, q, Q};
use crate::subsheaf::{
    chi_bracket, fmt_vec, verify_destabilizer, Achievability, Certificate, Check, ChiBracket, Comparison,
    Notion, SubsheafType,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    CertifiedYes,
    CertifiedNo,
    Indeterminate,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::CertifiedYes => "CertifiedYes",
            Status::CertifiedNo => "CertifiedNo",
            Status::Indeterminate => "Indeterminate",
        }
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self, Status::Indeterminate)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub subsheaf: SubsheafType,
    pub chi: i64,
    /// Overlap model of the realization, `Generic` meaning it exists for any gluing.
    pub model: Achievability,
    pub certificate: Certificate,
    /// Labels of the components the witness lives on, when smaller than the curve.
    pub subcurve: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub notion: Notion,
    pub status: Status,
    pub witness: Option<Witness>,
    /// Model used to resolve straddling brackets; `None` for bracket-only reasoning.
    pub achievability: Option<Achievability>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(notion: Notion, status: Status, achievability: Option<Achievability>) -> Self {
        Verdict {
            notion,
            status,
            witness: None,
            achievability,
            notes: Vec::new(),
        }
    }

    pub fn witness_ranks(&self) -> Option<&[u32]> {
        self.witness.as_ref().map(|w| w.subsheaf.ranks())
    }
}

pub fn resolution_model(gluing: Gluing) -> Option<Achievability> {
    match gluing {
        Gluing::Generic => Some(Achievability::Generic),
        Gluing::Aligned => Some(Achievability::Aligned),
        Gluing::Unspecified => None,
    }
}

/// All rank vectors in `{0..=rank}^n` other than zero and the full vector,
/// in lexicographic order.
pub fn proper_rank_vectors(n: usize, rank: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    loop {
        if cur.iter().any(|&x| x > 0) && cur.iter().any(|&x| x < rank) {
            out.push(cur.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < rank {
                cur[i] += 1;
                cur[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

pub fn constant_rank_vectors(n: usize, rank: u32) -> Vec<Vec<u32>> {
    (1..rank).map(|s| vec![s; n]).collect()
}

/// Preference among destabilizing candidates: larger violation margin, then
/// smaller support, then the lexicographically larger rank vector.
pub fn witness_order(a: (&Q, &[u32]), b: (&Q, &[u32])) -> Ordering {
    let support = |r: &[u32]| r.iter().filter(|&&x| x > 0).count();
    b.0.cmp(a.0)
        .then_with(|| support(a.1).cmp(&support(b.1)))
        .then_with(|| b.1.cmp(a.1))
}

/// Candidates reordered by [`witness_order`] ignoring margins.
pub fn preference_sorted(mut candidates: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let zero = q(0);
    candidates.sort_by(|a, b| witness_order((&zero, a), (&zero, b)));
    candidates
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Safe,
    Violated,
    Straddle,
}

#[derive(Debug, Clone)]
struct Evaluated {
    ranks: Vec<u32>,
    bracket: ChiBracket,
    threshold: Q,
    outcome: Outcome,
    chi: i64,
    realized_by: Achievability,
    comparison: Comparison,
}

fn evaluate(bundle: &BundleData, notion: &Notion, ranks: Vec<u32>) -> Result<Evaluated> {
    let bracket = chi_bracket(bundle, &ranks)?;
    let low = notion.compare(bundle, &ranks, bracket.lower)?;
    let high = notion.compare(bundle, &ranks, bracket.upper)?;
    let threshold = low.rhs / q(i64::from(bundle.rank()));
    let (outcome, chi, realized_by, comparison) = match bundle.gluing() {
        Gluing::Generic => {
            let o = if low.violated() { Outcome::Violated } else { Outcome::Safe };
            (o, bracket.lower, Achievability::Generic, low)
        }
        Gluing::Aligned => {
            let o = if high.violated() { Outcome::Violated } else { Outcome::Safe };
            (o, bracket.upper, Achievability::Aligned, high)
        }
        Gluing::Unspecified => {
            if low.violated() {
                (Outcome::Violated, bracket.lower, Achievability::Generic, low)
            } else if !high.violated() {
                (Outcome::Safe, bracket.upper, Achievability::Aligned, high)
            } else {
                (Outcome::Straddle, bracket.upper, Achievability::Aligned, high)
            }
        }
    };
    Ok(Evaluated {
        ranks,
        bracket,
        threshold,
        outcome,
        chi,
        realized_by,
        comparison,
    })
}

fn make_witness(bundle: &BundleData, notion: &Notion, ranks: &[u32], model: Achievability) -> Result<Witness> {
    let ty = SubsheafType::extremal(bundle, ranks.to_vec(), model)?;
    let chi = ty
        .realization_chi(bundle)
        .ok_or_else(|| StabilityError::RealizationUnavailable("extremal type without degrees".into()))?;
    match verify_destabilizer(bundle, &ty, notion, chi)? {
        Check::Certified(certificate) => Ok(Witness {
            subsheaf: ty,
            chi,
            model,
            certificate,
            subcurve: None,
        }),
        Check::Rejected(c) => Err(StabilityError::RealizationUnavailable(format!(
            "witness failed to re-verify: {c}"
        ))),
    }
}

fn check_engine_input(bundle: &BundleData) -> Result<()> {
    if bundle.curve().has_self_nodes() {
        return Err(StabilityError::DecisionModeUnavailable(
            "self-nodes are outside the gluing calculus".into(),
        ));
    }
    Ok(())
}

fn decide_over(bundle: &BundleData, notion: Notion, candidates: Vec<Vec<u32>>) -> Result<Verdict> {
    check_engine_input(bundle)?;
    let evaluated = candidates
        .into_iter()
        .map(|ranks| evaluate(bundle, &notion, ranks))
        .collect::<Result<Vec<_>>>()?;
    let model = resolution_model(bundle.gluing());
    let mut verdict = Verdict::new(notion.clone(), Status::CertifiedYes, model);

    let best = evaluated
        .iter()
        .filter(|e| e.outcome == Outcome::Violated)
        .min_by(|a, b| witness_order((&a.comparison.margin(), &a.ranks), (&b.comparison.margin(), &b.ranks)));
    if let Some(best) = best {
        verdict.status = Status::CertifiedNo;
        verdict.witness = Some(make_witness(bundle, &notion, &best.ranks, best.realized_by)?);
        verdict.notes.push(format!(
            "rank ({}): bracket {} threshold {} violated by χ = {}",
            fmt_vec(&best.ranks),
            best.bracket,
            fmt_q(&best.threshold),
            best.chi
        ));
        return Ok(verdict);
    }
    let open: Vec<&Evaluated> = evaluated.iter().filter(|e| e.outcome == Outcome::Straddle).collect();
    if !open.is_empty() {
        verdict.status = Status::Indeterminate;
        for e in open {
            verdict.notes.push(format!(
                "rank ({}): bracket {} straddles threshold {}",
                fmt_vec(&e.ranks),
                e.bracket,
                fmt_q(&e.threshold)
            ));
        }
        return Ok(verdict);
    }
    if let Some(tightest) = evaluated
        .iter()
        .max_by(|a, b| a.comparison.margin().cmp(&b.comparison.margin()).then_with(|| b.ranks.cmp(&a.ranks)))
    {
        verdict.notes.push(format!(
            "tightest rank ({}): χ ≤ {} against threshold {}",
            fmt_vec(&tightest.ranks),
            tightest.chi,
            fmt_q(&tightest.threshold)
        ));
    } else {
        verdict.notes.push("no proper candidate rank vectors".into());
    }
    Ok(verdict)
}

/// ℓ-(semi)stability: only constant-rank subsheaves are tested.
pub fn decide_ell(bundle: &BundleData, strict: bool) -> Result<Verdict> {
    let n = bundle.curve().component_count();
    decide_over(bundle, Notion::ell(strict), constant_rank_vectors(n, bundle.rank()))
}

/// w-(semi)stability: every proper rank vector is tested.
pub fn decide_w(bundle: &BundleData, w: &Polarization, strict: bool) -> Result<Verdict> {
    w.check_curve(bundle.curve())?;
    let n = bundle.curve().component_count();
    decide_over(
        bundle,
        Notion::polarized(w.clone(), strict),
        proper_rank_vectors(n, bundle.rank()),
    )
}

/// Largest violation margin `χ·r − χ(E)·Σ w_i r_i` over all proper rank
/// vectors, using the χ the gluing model realizes (the lower end for
/// unspecified gluing).
pub fn w_violation_margin(bundle: &BundleData, w: &Polarization) -> Result<Q> {
    w.check_curve(bundle.curve())?;
    check_engine_input(bundle)?;
    let notion = Notion::WSemistable(w.clone());
    let n = bundle.curve().component_count();
    let mut best: Option<Q> = None;
    for ranks in proper_rank_vectors(n, bundle.rank()) {
        let b = chi_bracket(bundle, &ranks)?;
        let chi = match bundle.gluing() {
            Gluing::Aligned => b.upper,
            _ => b.lower,
        };
        let m = notion.compare(bundle, &ranks, chi)?.margin();
        best = Some(best.map_or(m, |x: Q| x.max(m)));
    }
    Ok(best.unwrap_or_else(|| q(0)))
}

/// How ℓ-semistability of a block is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    Verified,
    Declared,
    Refuted,
    Unknown,
}

/// Stability data of a connected block of components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStatus {
    /// Component indices in the ambient curve.
    pub components: Vec<usize>,
    pub rank: u32,
    pub chi: i64,
    pub semistable: Evidence,
    /// Ranks `r'` of weakly destabilizing constant-rank subsheaves known to exist.
    pub weak: BTreeSet<u32>,
    /// Further ranks that may be weakly destabilizing (unspecified gluing).
    pub weak_possible: BTreeSet<u32>,
}

impl BlockStatus {
    pub fn of_subcurve(bundle: &BundleData, sub: &Subcurve) -> Result<Self> {
        let block = bundle.restrict(sub)?;
        let verdict = decide_ell(&block, false)?;
        let semistable = match verdict.status {
            Status::CertifiedYes => Evidence::Verified,
            Status::CertifiedNo => Evidence::Refuted,
            Status::Indeterminate => Evidence::Unknown,
        };
        let r = i64::from(block.rank());
        let chi = block.euler_characteristic();
        let n = block.curve().component_count();
        let mut weak = BTreeSet::new();
        let mut weak_possible = BTreeSet::new();
        for s in 1..block.rank() {
            let b = chi_bracket(&block, &vec![s; n])?;
            let target = i64::from(s) * chi;
            let equal = |x: i64| x * r == target;
            match block.gluing() {
                Gluing::Generic => {
                    if equal(b.lower) {
                        weak.insert(s);
                    }
                }
                Gluing::Aligned => {
                    if equal(b.upper) {
                        weak.insert(s);
                    }
                }
                Gluing::Unspecified => {
                    if equal(b.lower) {
                        weak.insert(s);
                    } else if b.upper * r >= target {
                        weak_possible.insert(s);
                    }
                }
            }
        }
        Ok(BlockStatus {
            components: sub.components().to_vec(),
            rank: block.rank(),
            chi,
            semistable,
            weak,
            weak_possible,
        })
    }

    /// Block data supplied by the caller instead of computed.
    pub fn declared(components: Vec<usize>, rank: u32, chi: i64, weak: BTreeSet<u32>) -> Self {
        BlockStatus {
            components,
            rank,
            chi,
            semistable: Evidence::Declared,
            weak,
            weak_possible: BTreeSet::new(),
        }
    }

    fn usable(&self) -> bool {
        matches!(self.semistable, Evidence::Verified | Evidence::Declared)
    }

    fn labels(&self, bundle: &BundleData) -> String {
        self.components
            .iter()
            .map(|&i| bundle.curve().label(i))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub verdict: Verdict,
    pub block: BlockStatus,
}

/// Combines two ℓ-semistable blocks meeting at a single node.
pub fn compose_blocks(
    bundle: &BundleData,
    left: &BlockStatus,
    right: &BlockStatus,
    node: usize,
    strict: bool,
) -> Result<Composition> {
    let p = bundle.curve().node(node)?;
    let in_left = |i: usize| left.components.contains(&i);
    let in_right = |i: usize| right.components.contains(&i);
    if left.components.iter().any(|&i| in_right(i)) {
        return Err(StabilityError::Precondition("blocks overlap".into()));
    }
    if !((in_left(p.a) && in_right(p.b)) || (in_left(p.b) && in_right(p.a))) {
        return Err(StabilityError::Precondition(format!(
            "node {node} does not join the two blocks"
        )));
    }
    let crossing = bundle
        .curve()
        .nodes()
        .iter()
        .filter(|n| (in_left(n.a) && in_right(n.b)) || (in_left(n.b) && in_right(n.a)))
        .count();
    if crossing != 1 {
        return Err(StabilityError::NotSeparating(node));
    }
    for b in [left, right] {
        if !b.usable() {
            return Err(StabilityError::PreconditionUnverified(b.labels(bundle)));
        }
    }
    let r = bundle.rank();
    let mut components: Vec<usize> = left.components.iter().chain(&right.components).copied().collect();
    components.sort_unstable();
    let gluing = bundle.gluing();
    let mut merged = BlockStatus {
        components,
        rank: r,
        chi: left.chi + right.chi - i64::from(r),
        semistable: Evidence::Verified,
        weak: BTreeSet::new(),
        weak_possible: BTreeSet::new(),
    };
    let certain: BTreeSet<u32> = left.weak.intersection(&right.weak).copied().collect();
    let left_any: BTreeSet<u32> = left.weak.union(&left.weak_possible).copied().collect();
    let right_any: BTreeSet<u32> = right.weak.union(&right.weak_possible).copied().collect();
    let possible: BTreeSet<u32> = left_any.intersection(&right_any).copied().collect();
    match gluing {
        Gluing::Generic => {}
        Gluing::Aligned => merged.weak = certain.clone(),
        Gluing::Unspecified => merged.weak_possible = possible.clone(),
    }

    let model = resolution_model(gluing);
    let notion = Notion::ell(strict);
    let mut verdict = Verdict::new(notion.clone(), Status::CertifiedYes, model);
    if !strict {
        verdict.notes.push("ℓ-semistable: both blocks ℓ-semistable and glued at one node".into());
        return Ok(Composition { verdict, block: merged });
    }
    let pairs = |s: &BTreeSet<u32>| fmt_vec(&s.iter().copied().collect::<Vec<_>>());
    match gluing {
        Gluing::Generic => {
            if !possible.is_empty() {
                verdict
                    .notes
                    .push(format!("weakly destabilizing ranks ({}) on both sides do not glue generically", pairs(&possible)));
            }
        }
        Gluing::Aligned if !certain.is_empty() => {
            let s = *certain.iter().next_back().expect("nonempty");
            let sub = Subcurve::new(bundle.curve(), merged.components.iter().copied())?;
            let union = bundle.restrict(&sub)?;
            let n = union.curve().component_count();
            match make_witness(&union, &notion, &vec![s; n], Achievability::Aligned) {
                Ok(mut w) => {
                    if merged.components.len() < bundle.curve().component_count() {
                        w.subcurve = Some(sub.labels(bundle.curve()).iter().map(|l| l.to_string()).collect());
                    }
                    verdict.status = Status::CertifiedNo;
                    verdict.witness = Some(w);
                    verdict
                        .notes
                        .push(format!("weakly destabilizing rank {s} subbundles glue at node {node}"));
                }
                Err(e) => {
                    verdict.status = Status::Indeterminate;
                    verdict.notes.push(format!("declared block data does not re-verify: {e}"));
                }
            }
        }
        Gluing::Aligned => {}
        Gluing::Unspecified => {
            if !possible.is_empty() {
                verdict.status = Status::Indeterminate;
                verdict.notes.push(format!(
                    "weakly destabilizing ranks ({}) on both sides; gluing unspecified",
                    pairs(&possible)
                ));
            }
        }
    }
    Ok(Composition { verdict, block: merged })
}

/// Folds [`compose_blocks`] over a leaf-removal order of a compact-type curve.
pub fn decide_compact_type(bundle: &BundleData, strict: bool) -> Result<Verdict> {
    let curve = bundle.curve();
    if !curve.is_compact_type() {
        return Err(StabilityError::NotCompactType);
    }
    let n = curve.component_count();
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        blocks.push(BlockStatus::of_subcurve(bundle, &Subcurve::new(curve, [i])?)?);
    }
    let notion = Notion::ell(strict);
    let unverified: Vec<&str> = blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.usable())
        .map(|(i, _)| curve.label(i))
        .collect();
    if !unverified.is_empty() {
        let mut v = Verdict::new(notion, Status::Indeterminate, resolution_model(bundle.gluing()));
        for l in unverified {
            v.notes.push(format!("PreconditionUnverified: `{l}` is not certified ℓ-semistable"));
        }
        return Ok(v);
    }
    if n == 1 {
        let mut v = Verdict::new(notion.clone(), Status::CertifiedYes, resolution_model(bundle.gluing()));
        if strict {
            if let Some(&s) = blocks[0].weak.iter().next_back() {
                v.status = Status::CertifiedNo;
                v.witness = Some(make_witness(bundle, &notion, &[s], Achievability::Aligned)?);
            }
        }
        return Ok(v);
    }

    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut last = None;
    while alive.len() > 1 {
        let (leaf, parent, node) = alive
            .iter()
            .find_map(|&v| {
                let incident: Vec<(usize, usize)> = curve
                    .nodes()
                    .iter()
                    .enumerate()
                    .filter_map(|(k, nd)| nd.other(v).filter(|u| alive.contains(u)).map(|u| (u, k)))
                    .collect();
                (incident.len() == 1).then(|| (v, incident[0].0, incident[0].1))
            })
            .expect("a tree has a leaf");
        let composed = compose_blocks(bundle, &blocks[leaf], &blocks[parent], node, strict)?;
        blocks[parent] = composed.block;
        alive.remove(&leaf);
        last = Some(composed.verdict);
    }
    Ok(last.expect("at least one merge"))
}
