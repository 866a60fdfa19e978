//! Document format, query dispatch and report rendering.

mod document;
mod query;
mod report;

pub use document::{
    parse_document, serialize, Diagnostic, DiagnosticKind, Document, NamedBundle, NamedLine, NamedPolarization,
};
pub use query::{parse_query, ModelArg, QueryCommand, QueryEntry};
pub use report::{exit, input_digest, run_query, Format, Report, TOOL};
