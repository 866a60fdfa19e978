//! Numerical one-parameter degenerations: component twists, elementary
//! modifications along the special fiber, and the semistable-extension loop.
//!
//! Only special-fiber data is tracked. An elementary modification along a
//! quotient with ranks `q_i` on the components changes the determinant by
//! `O(−Σ q_i Y_i)`, so restricted degrees move by `d′ = d − M·q` where `M` is
//! the intersection matrix.

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleData, Gluing, LineBundleData};
use crate::curve::NodalCurve;
use crate::engine::{decide_ell, decide_w, proper_rank_vectors, w_violation_margin, witness_order, Status, Verdict};
use crate::error::{Result, StabilityError};
use crate::polarization::Polarization;
use crate::rational::{fmt_q, q, Q};
use crate::subsheaf::{chi_bracket, fmt_vec, Achievability, Notion, SubsheafType};

pub const DEFAULT_MAX_STEPS: usize = 64;

/// Special fiber of a family over a DVR with smooth generic fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyModel {
    special_fiber: BundleData,
    generic_rank: u32,
    generic_degree: i64,
    /// Local equation `xy = t^k` at each node; the total space is regular iff every `k` is 1.
    thickness: Vec<u32>,
}

impl FamilyModel {
    /// A family with regular total space.
    pub fn new(special_fiber: BundleData) -> Self {
        let nodes = special_fiber.curve().node_count();
        FamilyModel {
            generic_rank: special_fiber.rank(),
            generic_degree: special_fiber.total_degree(),
            special_fiber,
            thickness: vec![1; nodes],
        }
    }

    pub fn with_thickness(special_fiber: BundleData, thickness: Vec<u32>) -> Result<Self> {
        if thickness.len() != special_fiber.curve().node_count() {
            return Err(StabilityError::Precondition(format!(
                "{} thickness values for {} nodes",
                thickness.len(),
                special_fiber.curve().node_count()
            )));
        }
        if thickness.contains(&0) {
            return Err(StabilityError::Precondition("node thickness must be positive".into()));
        }
        Ok(FamilyModel {
            thickness,
            ..FamilyModel::new(special_fiber)
        })
    }

    pub fn special_fiber(&self) -> &BundleData {
        &self.special_fiber
    }

    pub fn generic_rank(&self) -> u32 {
        self.generic_rank
    }

    pub fn generic_degree(&self) -> i64 {
        self.generic_degree
    }

    pub fn thickness(&self) -> &[u32] {
        &self.thickness
    }

    pub fn singular_nodes(&self) -> Vec<usize> {
        (0..self.thickness.len()).filter(|&k| self.thickness[k] > 1).collect()
    }

    /// A semistable bundle of this rank and degree exists on the generic fiber.
    /// In genus 0 that forces the rank to divide the degree.
    pub fn admits_semistable_generic_fiber(&self) -> bool {
        self.special_fiber.curve().arithmetic_genus() > 0
            || self.generic_degree.rem_euclid(i64::from(self.generic_rank)) == 0
    }

    pub fn is_regular(&self) -> bool {
        self.thickness.iter().all(|&k| k == 1)
    }

    fn require_regular(&self) -> Result<()> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(StabilityError::NotRegular(self.singular_nodes()))
        }
    }

    /// Blows up every node of thickness `k > 1` into a chain of `k − 1`
    /// rational components carrying the trivial pullback.
    pub fn resolve(&self) -> Result<FamilyModel> {
        let mut bundle = self.special_fiber.clone();
        let r = bundle.rank() as usize;
        for (node, &k) in self.thickness.iter().enumerate() {
            if k <= 1 {
                continue;
            }
            let curve = bundle.curve().insert_rational_chain(node, (k - 1) as usize)?;
            let added = curve.component_count() - bundle.curve().component_count();
            let mut degrees = bundle.degrees().to_vec();
            let mut splitting: Vec<Option<Vec<i64>>> = (0..bundle.curve().component_count())
                .map(|i| bundle.splitting(i).map(<[i64]>::to_vec))
                .collect();
            degrees.extend(std::iter::repeat_n(0, added));
            splitting.extend(std::iter::repeat_n(Some(vec![0; r]), added));
            bundle = bundle.on_curve(curve, degrees, splitting)?;
        }
        Ok(FamilyModel::new(bundle))
    }

    fn replaced(&self, special_fiber: BundleData) -> FamilyModel {
        FamilyModel {
            special_fiber,
            ..self.clone()
        }
    }
}

/// χ and degree bookkeeping across one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub chi_before: i64,
    pub chi_after: i64,
    pub degree_before: i64,
    pub degree_after: i64,
    pub margin_before: Option<Q>,
    pub margin_after: Option<Q>,
}

impl InvariantReport {
    pub fn preserved(&self) -> bool {
        self.chi_before == self.chi_after && self.degree_before == self.degree_after
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    ComponentTwist {
        component: String,
    },
    FiberModification {
        /// `None` when the modification was requested by ranks alone.
        destabilizer: Option<SubsheafType>,
        quotient_ranks: Vec<u32>,
        /// Whether the splitting types after the step depend on a model choice.
        balanced_splitting: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModificationStep {
    pub kind: StepKind,
    pub before: BundleData,
    pub after: BundleData,
    pub report: InvariantReport,
    pub notes: Vec<String>,
}

impl ModificationStep {
    /// Recomputes the after-state from the before-state.
    pub fn replay(&self) -> Result<BundleData> {
        match &self.kind {
            StepKind::ComponentTwist { component } => {
                let i = self
                    .before
                    .curve()
                    .index_of(component)
                    .ok_or_else(|| StabilityError::UnknownComponent(component.clone()))?;
                self.before.twist(&twist_line(self.before.curve(), i))
            }
            StepKind::FiberModification { quotient_ranks, .. } => {
                exchange(&self.before, quotient_ranks).map(|(b, _)| b)
            }
        }
    }
}

/// `O(−Y_i)` restricted to the special fiber.
pub fn twist_line(curve: &NodalCurve, component: usize) -> LineBundleData {
    let m = curve.intersection_matrix();
    let degrees = (0..curve.component_count()).map(|j| -m[component][j]).collect();
    LineBundleData::new(curve.clone(), degrees).expect("one degree per component")
}

fn report(before: &BundleData, after: &BundleData) -> InvariantReport {
    InvariantReport {
        chi_before: before.euler_characteristic(),
        chi_after: after.euler_characteristic(),
        degree_before: before.total_degree(),
        degree_after: after.total_degree(),
        margin_before: None,
        margin_after: None,
    }
}

pub fn component_twist(family: &FamilyModel, component: usize) -> Result<(FamilyModel, ModificationStep)> {
    family.require_regular()?;
    let before = family.special_fiber.clone();
    let curve = before.curve();
    if component >= curve.component_count() {
        return Err(StabilityError::UnknownComponent(component.to_string()));
    }
    let after = before.twist(&twist_line(curve, component))?;
    let step = ModificationStep {
        kind: StepKind::ComponentTwist {
            component: curve.label(component).to_string(),
        },
        report: report(&before, &after),
        before,
        after: after.clone(),
        notes: Vec::new(),
    };
    Ok((family.replaced(after), step))
}

fn balanced(rank: u32, degree: i64) -> Vec<i64> {
    let r = i64::from(rank);
    let (base, extra) = (degree.div_euclid(r), degree.rem_euclid(r));
    (0..r).map(|j| if j < extra { base + 1 } else { base }).collect()
}

/// `d′ = d − M·q`; an exact twist when every `q_i` is `0` or `r`, otherwise
/// splittings are re-derived as balanced. Returns whether balancing happened.
fn exchange(before: &BundleData, quotient: &[u32]) -> Result<(BundleData, bool)> {
    let curve = before.curve();
    let n = curve.component_count();
    let r = before.rank();
    if quotient.len() != n || quotient.iter().any(|&x| x > r) {
        return Err(StabilityError::InvalidType(format!(
            "quotient ranks ({}) do not fit rank {r} on {n} components",
            fmt_vec(quotient)
        )));
    }
    if quotient.iter().all(|&x| x == 0) {
        return Err(StabilityError::NotDestabilized("zero quotient".into()));
    }
    let m = curve.intersection_matrix();
    if quotient.iter().all(|&x| x == 0 || x == r) {
        let ell: Vec<i64> = (0..n)
            .map(|j| -(0..n).filter(|&i| quotient[i] == r).map(|i| m[i][j]).sum::<i64>())
            .collect();
        return Ok((before.twist(&LineBundleData::new(curve.clone(), ell)?)?, false));
    }
    let degrees: Vec<i64> = (0..n)
        .map(|j| before.degree(j) - (0..n).map(|i| m[j][i] * i64::from(quotient[i])).sum::<i64>())
        .collect();
    let splitting = (0..n)
        .map(|j| (curve.genus(j) == 0).then(|| balanced(r, degrees[j])))
        .collect();
    Ok((before.with_state(degrees, splitting)?, true))
}

/// Elementary modification along the quotient of the special fiber by a
/// subsheaf with the given ranks.
pub fn fiber_modification(family: &FamilyModel, sub_ranks: &[u32]) -> Result<(FamilyModel, ModificationStep)> {
    family.require_regular()?;
    let before = family.special_fiber.clone();
    let r = before.rank();
    if sub_ranks.iter().any(|&x| x > r) {
        return Err(StabilityError::InvalidType(format!("rank exceeds {r}")));
    }
    let quotient: Vec<u32> = sub_ranks.iter().map(|&x| r - x).collect();
    let (after, balanced_splitting) = exchange(&before, &quotient)?;
    let mut notes = Vec::new();
    if balanced_splitting {
        notes.push("splitting types re-derived as balanced (generic model)".into());
    }
    let step = ModificationStep {
        kind: StepKind::FiberModification {
            destabilizer: None,
            quotient_ranks: quotient,
            balanced_splitting,
        },
        report: report(&before, &after),
        before,
        after: after.clone(),
        notes,
    };
    Ok((family.replaced(after), step))
}

/// The maximal destabilizer: largest `χ / Σ w_i r_i`, then largest weight, then
/// the usual witness preference.
fn maximal_destabilizer(bundle: &BundleData, w: &Polarization) -> Result<Option<(Vec<u32>, i64, Achievability)>> {
    let notion = Notion::WSemistable(w.clone());
    let n = bundle.curve().component_count();
    let mut best: Option<(Q, Q, Q, Vec<u32>, i64, Achievability)> = None;
    for ranks in proper_rank_vectors(n, bundle.rank()) {
        let b = chi_bracket(bundle, &ranks)?;
        let (chi, model) = match bundle.gluing() {
            Gluing::Aligned => (b.upper, Achievability::Aligned),
            _ => (b.lower, Achievability::Generic),
        };
        let cmp = notion.compare(bundle, &ranks, chi)?;
        if !cmp.violated() {
            continue;
        }
        let weight = w.weighted_rank(&ranks)?;
        let slope = q(chi) / weight;
        let margin = cmp.margin();
        let better = match &best {
            None => true,
            Some((s, wt, m, rk, _, _)) => slope
                .cmp(s)
                .then_with(|| weight.cmp(wt))
                .then_with(|| witness_order((m, rk), (&margin, &ranks)))
                .is_gt(),
        };
        if better {
            best = Some((slope, weight, margin, ranks, chi, model));
        }
    }
    Ok(best.map(|(_, _, _, ranks, chi, model)| (ranks, chi, model)))
}

/// One Langton step: modify along the quotient by the maximal destabilizer.
pub fn langton_step(family: &FamilyModel, w: &Polarization) -> Result<(FamilyModel, ModificationStep)> {
    family.require_regular()?;
    let bundle = &family.special_fiber;
    let verdict = decide_w(bundle, w, false)?;
    if verdict.status != Status::CertifiedNo {
        return Err(StabilityError::NotDestabilized(format!("w-semistability is {}", verdict.status)));
    }
    let (ranks, chi, model) = maximal_destabilizer(bundle, w)?
        .ok_or_else(|| StabilityError::RealizationUnavailable("no violated rank vector".into()))?;
    let destabilizer = SubsheafType::extremal(bundle, ranks.clone(), model)?;
    let (next, mut step) = fiber_modification(family, &ranks)?;
    if let StepKind::FiberModification { destabilizer: d, .. } = &mut step.kind {
        *d = Some(destabilizer);
    }
    step.report.margin_before = Some(w_violation_margin(&step.before, w)?);
    step.report.margin_after = Some(w_violation_margin(&step.after, w)?);
    step.notes.insert(
        0,
        format!("destabilizer ({}) with χ = {chi} under {} overlaps", fmt_vec(&ranks), model.as_str()),
    );
    Ok((next, step))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionStatus {
    Success,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension {
    pub status: ExtensionStatus,
    pub trace: Vec<ModificationStep>,
    pub family: FamilyModel,
    /// Final `decide_w` verdict, when one was reached.
    pub verdict: Option<Verdict>,
    pub reason: Option<String>,
}

impl Extension {
    fn stalled(trace: Vec<ModificationStep>, family: FamilyModel, verdict: Option<Verdict>, reason: String) -> Self {
        Extension {
            status: ExtensionStatus::Stalled,
            trace,
            family,
            verdict,
            reason: Some(reason),
        }
    }
}

/// Iterates [`langton_step`] until the special fiber is w-semistable.
pub fn semistable_extension(family: &FamilyModel, w: &Polarization, max_steps: usize) -> Result<Extension> {
    family.special_fiber.decision_mode()?;
    w.check_curve(family.special_fiber.curve())?;
    let mut trace = Vec::new();
    let mut current = family.clone();
    if !current.is_regular() {
        return Ok(Extension::stalled(
            trace,
            current.clone(),
            None,
            format!("total space not regular at nodes {:?}; resolve first", current.singular_nodes()),
        ));
    }
    if !current.admits_semistable_generic_fiber() {
        return Ok(Extension::stalled(
            trace,
            current.clone(),
            None,
            format!(
                "no semistable bundle of rank {} and degree {} on a generic fiber of genus 0",
                current.generic_rank, current.generic_degree
            ),
        ));
    }
    loop {
        let verdict = decide_w(&current.special_fiber, w, false)?;
        match verdict.status {
            Status::CertifiedYes => {
                return Ok(Extension {
                    status: ExtensionStatus::Success,
                    trace,
                    family: current,
                    verdict: Some(verdict),
                    reason: None,
                })
            }
            Status::Indeterminate => {
                let reason = format!("Indeterminate: {}", verdict.notes.join("; "));
                return Ok(Extension::stalled(trace, current, Some(verdict), reason));
            }
            Status::CertifiedNo => {}
        }
        if trace.len() >= max_steps {
            let reason = format!("max_steps = {max_steps} reached");
            return Ok(Extension::stalled(trace, current, Some(verdict), reason));
        }
        let (next, step) = langton_step(&current, w)?;
        let (before, after) = (step.report.margin_before, step.report.margin_after);
        let decreased = matches!((before, after), (Some(b), Some(a)) if a < b);
        let margins = |m: Option<Q>| m.map_or_else(|| "-".to_string(), |x| fmt_q(&x));
        trace.push(step);
        if !decreased {
            let reason = format!(
                "violation margin did not decrease: {} → {}",
                margins(before),
                margins(after)
            );
            return Ok(Extension::stalled(trace, next, None, reason));
        }
        current = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistReport {
    pub extension: Extension,
    pub untwisted: BundleData,
    pub ell_verdict: Verdict,
    pub note: String,
}

/// Twists by `D`, runs the extension loop, and untwists the result.
pub fn twist_extend_untwist(
    family: &FamilyModel,
    divisor: &LineBundleData,
    w: &Polarization,
    max_steps: usize,
) -> Result<TwistReport> {
    if divisor.total_degree() == 0 {
        return Err(StabilityError::ZeroRelativeDegree);
    }
    let twisted = family.replaced(family.special_fiber.twist(divisor)?);
    let twisted = FamilyModel {
        generic_degree: twisted.special_fiber.total_degree(),
        ..twisted
    };
    let extension = semistable_extension(&twisted, w, max_steps)?;
    let untwisted = extension.family.special_fiber.twist(&divisor.inverse())?;
    let ell_verdict = decide_ell(&untwisted, false)?;
    Ok(TwistReport {
        extension,
        untwisted,
        ell_verdict,
        note: "special-fiber ℓ-verdict transfers to the generic fiber".into(),
    })
}
