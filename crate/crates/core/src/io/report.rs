//! Deterministic key/value reports for query results.

use sha2::{Digest, Sha256};

use super::document::{serialize, Document};
use super::query::{QueryCommand, QueryEntry};
use crate::bundle::BundleData;
use crate::curve::Subcurve;
use crate::degeneration::{
    semistable_extension, twist_extend_untwist, Extension, ExtensionStatus, FamilyModel, StepKind,
};
use crate::engine::{
    compose_blocks, decide_compact_type, decide_ell, decide_w, resolution_model, BlockStatus, Status, Verdict,
};
use crate::error::{Result, StabilityError};
use crate::oracle::{oracle_max_chi, OracleConfig};
use crate::polarization::{exists_polarization, PolarizationResult};
use crate::rational::fmt_q;
use crate::subsheaf::{chi_bracket, fmt_vec, Achievability};

pub const TOOL: &str = concat!("nodal-stability ", env!("CARGO_PKG_VERSION"));

pub mod exit {
    pub const YES: u8 = 0;
    pub const NO: u8 = 1;
    pub const OPEN: u8 = 2;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const IO: u8 = 66;
    pub const SOFTWARE: u8 = 70;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    fields: Vec<(String, String)>,
    exit_code: u8,
}

impl Report {
    fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let value: String = value.into();
        self.fields.push((key.into(), value.replace(['\n', '\t'], " ")));
    }

    fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.push(key, value),
        }
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn exit_code(&self) -> u8 {
        self.exit_code
    }

    pub fn render(&self, format: Format) -> String {
        let sep = match format {
            Format::Text => ": ",
            Format::Machine => "\t",
        };
        self.fields.iter().map(|(k, v)| format!("{k}{sep}{v}\n")).collect()
    }
}

pub fn input_digest(doc: &Document) -> String {
    Sha256::digest(serialize(doc).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::CertifiedYes => exit::YES,
        Status::CertifiedNo => exit::NO,
        Status::Indeterminate => exit::OPEN,
    }
}

fn model_tag(m: Option<Achievability>) -> &'static str {
    m.map_or("bracket", |m| m.as_str())
}

fn vec_field<T: std::fmt::Display>(v: &[T]) -> String {
    format!("({})", fmt_vec(v))
}

fn push_verdict(rep: &mut Report, v: &Verdict) {
    rep.set("achievability", model_tag(v.achievability));
    rep.set("result", format!("{} ({})", v.status, v.notion.name()));
    if let Some(w) = v.notion.polarization() {
        rep.push("polarization", w.to_string());
    }
    if let Some(wit) = &v.witness {
        rep.push("witness.ranks", vec_field(wit.subsheaf.ranks()));
        if let Some(d) = wit.subsheaf.degrees() {
            rep.push("witness.degrees", vec_field(d));
        }
        rep.push("witness.overlaps", vec_field(wit.subsheaf.overlaps()));
        rep.push("witness.chi", wit.chi.to_string());
        rep.push("witness.realization", wit.model.as_str());
        if let Some(sub) = &wit.subcurve {
            rep.push("witness.subcurve", sub.join(","));
        }
        let c = &wit.certificate;
        rep.push("certificate.comparison", format!("χ·r vs χ(E)·weight: {}", c.comparison));
        if let Some(u) = c.upper_bound {
            rep.push("certificate.upper-bound", u.to_string());
        }
        if !c.provenance.is_empty() {
            let p: Vec<&str> = c.provenance.iter().map(|s| s.as_str()).collect();
            rep.push("certificate.provenance", p.join(","));
        }
    }
    for (i, n) in v.notes.iter().enumerate() {
        rep.push(format!("note.{}", i + 1), n.clone());
    }
    rep.exit_code = status_code(v.status);
}

fn push_extension(rep: &mut Report, ext: &Extension) {
    rep.set(
        "result",
        match ext.status {
            ExtensionStatus::Success => "Success",
            ExtensionStatus::Stalled => "Stalled",
        },
    );
    rep.push("steps", ext.trace.len().to_string());
    for (k, step) in ext.trace.iter().enumerate() {
        let kind = match &step.kind {
            StepKind::ComponentTwist { component } => format!("twist at {component}"),
            StepKind::FiberModification { quotient_ranks, .. } => {
                format!("modification along quotient {}", vec_field(quotient_ranks))
            }
        };
        let margin = match (&step.report.margin_before, &step.report.margin_after) {
            (Some(b), Some(a)) => format!(" margin {} → {}", fmt_q(b), fmt_q(a)),
            _ => String::new(),
        };
        rep.push(
            format!("step.{}", k + 1),
            format!(
                "{kind}: {} → {} χ {} → {}{margin}",
                vec_field(step.before.degrees()),
                vec_field(step.after.degrees()),
                step.report.chi_before,
                step.report.chi_after
            ),
        );
    }
    let fin = ext.family.special_fiber();
    rep.push("final.multidegree", vec_field(fin.degrees()));
    rep.push("final.splitting", splitting_field(fin));
    if let Some(v) = &ext.verdict {
        rep.push("final.verdict", format!("{} ({})", v.status, v.notion.name()));
    }
    if let Some(r) = &ext.reason {
        rep.push("reason", r.clone());
    }
    rep.exit_code = match ext.status {
        ExtensionStatus::Success => exit::YES,
        ExtensionStatus::Stalled => exit::OPEN,
    };
}

fn splitting_field(b: &BundleData) -> String {
    (0..b.curve().component_count())
        .map(|i| match b.splitting(i) {
            Some(s) => format!("{}:{}", b.curve().label(i), fmt_vec(s)),
            None => format!("{}:-", b.curve().label(i)),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn push_ell_pair(rep: &mut Report, prefix: &str, b: &BundleData) -> Result<(Status, Option<Vec<u32>>, Status)> {
    let semi = decide_ell(b, false)?;
    let stable = decide_ell(b, true)?;
    rep.push(format!("{prefix}.ell-semistable"), semi.status.as_str());
    rep.push(format!("{prefix}.ell-stable"), stable.status.as_str());
    let wit = stable.witness_ranks().map(<[u32]>::to_vec);
    if let Some(w) = &wit {
        rep.push(format!("{prefix}.ell-stable.witness"), vec_field(w));
    }
    Ok((semi.status, wit, stable.status))
}

/// Runs one query against a document.
pub fn run_query(doc: &Document, query: &QueryEntry) -> Result<Report> {
    query
        .check_references(doc)
        .map_err(StabilityError::Precondition)?;
    let named = doc.bundle(query.bundle_name()).expect("checked above");
    let bundle = &named.bundle;
    let mut rep = Report {
        fields: Vec::new(),
        exit_code: exit::YES,
    };
    rep.push("tool", TOOL);
    rep.push("input-digest", input_digest(doc));
    rep.push("query", query.text());
    rep.push("bundle", named.name.clone());
    rep.push("gluing", bundle.gluing().as_str());
    rep.push("achievability", model_tag(resolution_model(bundle.gluing())));
    rep.push("result", "");

    match &query.command {
        QueryCommand::Chi { .. } => {
            rep.set("achievability", "n/a");
            rep.set("result", bundle.euler_characteristic().to_string());
            rep.push("rank", bundle.rank().to_string());
            rep.push("degree", bundle.total_degree().to_string());
            rep.push("multidegree", vec_field(bundle.degrees()));
            rep.push("arithmetic-genus", bundle.curve().arithmetic_genus().to_string());
        }
        QueryCommand::CheckEll { strict, .. } => push_verdict(&mut rep, &decide_ell(bundle, *strict)?),
        QueryCommand::CheckW { pol, strict, .. } => {
            let w = doc.polarization(pol).expect("checked above");
            push_verdict(&mut rep, &decide_w(bundle, w, *strict)?);
        }
        QueryCommand::CompactType { strict, .. } => {
            push_verdict(&mut rep, &decide_compact_type(bundle, *strict)?);
        }
        QueryCommand::FindPolarization { strict, .. } => match exists_polarization(bundle, *strict)? {
            PolarizationResult::Feasible { witness, verdict, side } => {
                rep.set("result", "Feasible");
                rep.push("polarization", witness.to_string());
                rep.push("constraints", side.as_str());
                rep.push("verification", format!("{} ({})", verdict.status, verdict.notion.name()));
                rep.exit_code = exit::YES;
            }
            PolarizationResult::Infeasible { certificate, system } => {
                rep.set("result", "Infeasible");
                rep.push("constraints", system.constraints.len().to_string());
                for (k, (label, m)) in certificate.rows().into_iter().enumerate() {
                    rep.push(format!("certificate.row.{}", k + 1), format!("{label} × {}", fmt_q(m)));
                }
                let rel = if certificate.strict { "<" } else { "≤" };
                rep.push(
                    "certificate.combination",
                    format!(
                        "{}·Σw {rel} {} with Σw = 1",
                        fmt_q(&certificate.combined_coeff),
                        fmt_q(&certificate.combined_rhs)
                    ),
                );
                rep.push("certificate.verified", certificate.verify(&system).to_string());
                rep.exit_code = exit::NO;
            }
            PolarizationResult::Indeterminate { reason } => {
                rep.set("result", "Indeterminate");
                rep.push("reason", reason);
                rep.exit_code = exit::OPEN;
            }
        },
        QueryCommand::Glue { node, strict, .. } => {
            let curve = bundle.curve();
            let k = match node {
                Some(k) => *k,
                None => *curve
                    .separating_nodes()
                    .first()
                    .ok_or_else(|| StabilityError::Precondition("curve has no separating node".into()))?,
            };
            let (left, right): (Subcurve, Subcurve) = curve.split_at_node(k)?;
            let lb = BlockStatus::of_subcurve(bundle, &left)?;
            let rb = BlockStatus::of_subcurve(bundle, &right)?;
            rep.push("node", k.to_string());
            for (name, sub, b) in [("left", &left, &lb), ("right", &right, &rb)] {
                rep.push(format!("{name}.components"), sub.labels(curve).join(","));
                rep.push(format!("{name}.ell-semistable"), format!("{:?}", b.semistable));
                rep.push(format!("{name}.weak"), vec_field(&b.weak.iter().copied().collect::<Vec<_>>()));
            }
            match compose_blocks(bundle, &lb, &rb, k, *strict) {
                Ok(c) => push_verdict(&mut rep, &c.verdict),
                Err(StabilityError::PreconditionUnverified(which)) => {
                    rep.set("result", "Indeterminate");
                    rep.push("reason", format!("PreconditionUnverified: {which}"));
                    rep.exit_code = exit::OPEN;
                }
                Err(e) => return Err(e),
            }
        }
        QueryCommand::Twist { line, .. } => {
            let l = doc.line(line).expect("checked above");
            let twisted = bundle.twist(l)?;
            rep.set("result", "Success");
            rep.push("line.multidegree", vec_field(l.degrees()));
            rep.push("twisted.multidegree", vec_field(twisted.degrees()));
            rep.push("twisted.splitting", splitting_field(&twisted));
            rep.push("chi.before", bundle.euler_characteristic().to_string());
            rep.push("chi.after", twisted.euler_characteristic().to_string());
            let before = push_ell_pair(&mut rep, "before", bundle)?;
            let after = push_ell_pair(&mut rep, "after", &twisted)?;
            rep.push("ell-verdicts", if before == after { "invariant" } else { "changed" });
        }
        QueryCommand::Langton {
            pol,
            max_steps,
            twist_by,
            ..
        } => {
            let w = doc.polarization(pol).expect("checked above");
            rep.push("polarization", w.to_string());
            let family = FamilyModel::new(bundle.clone());
            match twist_by {
                None => push_extension(&mut rep, &semistable_extension(&family, w, *max_steps)?),
                Some(d) => {
                    let line = doc.line(d).expect("checked above");
                    let out = twist_extend_untwist(&family, line, w, *max_steps)?;
                    push_extension(&mut rep, &out.extension);
                    rep.push("untwisted.multidegree", vec_field(out.untwisted.degrees()));
                    rep.push(
                        "untwisted.verdict",
                        format!("{} ({})", out.ell_verdict.status, out.ell_verdict.notion.name()),
                    );
                    rep.push("transfer", out.note);
                }
            }
        }
        QueryCommand::Oracle { rank_vector, model, .. } => {
            let model: Achievability = (*model).into();
            let out = oracle_max_chi(bundle, rank_vector, &OracleConfig::new(model))?;
            rep.set("achievability", model.as_str());
            rep.set("result", out.max_chi.to_string());
            rep.push("bracket", chi_bracket(bundle, rank_vector)?.to_string());
            rep.push("enumerated", out.enumerated.to_string());
            for (k, t) in out.realizations.iter().enumerate() {
                rep.push(
                    format!("realization.{}", k + 1),
                    format!(
                        "degrees {} overlaps {}",
                        vec_field(t.degrees().unwrap_or(&[])),
                        vec_field(t.overlaps())
                    ),
                );
            }
        }
    }
    Ok(rep)
}
