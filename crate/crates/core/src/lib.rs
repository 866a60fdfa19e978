//! Exact decision procedures for ℓ-stability and polarized stability of vector
//! bundles on nodal curves, plus the degeneration tools built on them.

pub mod bundle;
pub mod curve;
pub mod degeneration;
pub mod engine;
pub mod error;
pub mod io;
pub mod oracle;
pub mod polarization;
pub mod rational;
pub mod subsheaf;

pub use bundle::{BundleData, Gluing, LineBundleData};
pub use curve::{Component, NodalCurve, Node, Subcurve};
pub use engine::{
    compose_blocks, decide_compact_type, decide_ell, decide_w, BlockStatus, Composition, Evidence, Status, Verdict,
    Witness,
};
pub use error::{Result, StabilityError};
pub use oracle::{oracle_max_chi, OracleConfig, OracleOutcome};
pub use polarization::{exists_polarization, build_system, FeasibilitySystem, Polarization, PolarizationResult, Side};
pub use rational::Q;
pub use subsheaf::{
    chi_bracket, component_max_chi, max_chi_saturated, verify_destabilizer, Achievability, Certificate, Check,
    ChiBracket, Comparison, MaxSource, Notion, SubsheafType,
};
pub use degeneration::{
    component_twist, fiber_modification, langton_step, semistable_extension, twist_extend_untwist, Extension,
    ExtensionStatus, FamilyModel, ModificationStep, StepKind,
};
