//! Query lines, parsed with the same flag grammar the command line uses.

use clap::{Parser, Subcommand, ValueEnum};

use super::document::Document;
use crate::degeneration::DEFAULT_MAX_STEPS;
use crate::subsheaf::{fmt_vec, Achievability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Generic,
    Aligned,
}

impl From<ModelArg> for Achievability {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Generic => Achievability::Generic,
            ModelArg::Aligned => Achievability::Aligned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum QueryCommand {
    /// Euler characteristic of the bundle.
    Chi {
        #[arg(long)]
        bundle: Option<String>,
    },
    /// ℓ-semistability, or ℓ-stability with `--strict`.
    CheckEll {
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// w-semistability for a named polarization.
    CheckW {
        #[arg(long)]
        pol: String,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Search for a polarization making the bundle w-(semi)stable.
    FindPolarization {
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Compose the two sides of a separating node.
    Glue {
        #[arg(long)]
        node: Option<usize>,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// ℓ-(semi)stability by folding over the tree of components.
    CompactType {
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Twist by a named line bundle and compare verdicts.
    Twist {
        #[arg(long)]
        line: String,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Semistable extension by elementary modifications.
    Langton {
        #[arg(long)]
        pol: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long)]
        twist_by: Option<String>,
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Brute-force maximal χ for one rank vector.
    Oracle {
        #[arg(long, value_delimiter = ',', required = true)]
        rank_vector: Vec<u32>,
        #[arg(long, value_enum, default_value_t = ModelArg::Generic)]
        model: ModelArg,
        #[arg(long)]
        bundle: Option<String>,
    },
}

#[derive(Debug, Parser)]
#[command(name = "query", no_binary_name = true, disable_help_subcommand = true)]
struct QueryLine {
    #[command(subcommand)]
    command: QueryCommand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryEntry {
    pub command: QueryCommand,
}

pub fn parse_query<S: AsRef<str>>(tokens: &[S]) -> Result<QueryEntry, String> {
    if tokens.is_empty() {
        return Err("empty query".into());
    }
    QueryLine::try_parse_from(tokens.iter().map(AsRef::as_ref))
        .map(|q| QueryEntry { command: q.command })
        .map_err(|e| {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid query");
            first.trim_start_matches("error: ").to_string()
        })
}

fn flag(out: &mut Vec<String>, name: &str, on: bool) {
    if on {
        out.push(format!("--{name}"));
    }
}

fn opt<T: ToString>(out: &mut Vec<String>, name: &str, v: &Option<T>) {
    if let Some(v) = v {
        out.push(format!("--{name}"));
        out.push(v.to_string());
    }
}

fn val<T: ToString>(out: &mut Vec<String>, name: &str, v: &T) {
    out.push(format!("--{name}"));
    out.push(v.to_string());
}

impl QueryEntry {
    pub fn name(&self) -> &'static str {
        match self.command {
            QueryCommand::Chi { .. } => "chi",
            QueryCommand::CheckEll { .. } => "check-ell",
            QueryCommand::CheckW { .. } => "check-w",
            QueryCommand::FindPolarization { .. } => "find-polarization",
            QueryCommand::Glue { .. } => "glue",
            QueryCommand::CompactType { .. } => "compact-type",
            QueryCommand::Twist { .. } => "twist",
            QueryCommand::Langton { .. } => "langton",
            QueryCommand::Oracle { .. } => "oracle",
        }
    }

    pub fn bundle_name(&self) -> Option<&str> {
        match &self.command {
            QueryCommand::Chi { bundle }
            | QueryCommand::CheckEll { bundle, .. }
            | QueryCommand::CheckW { bundle, .. }
            | QueryCommand::FindPolarization { bundle, .. }
            | QueryCommand::Glue { bundle, .. }
            | QueryCommand::CompactType { bundle, .. }
            | QueryCommand::Twist { bundle, .. }
            | QueryCommand::Langton { bundle, .. }
            | QueryCommand::Oracle { bundle, .. } => bundle.as_deref(),
        }
    }

    /// Canonical tokens: command name, then flags in declaration order.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = vec![self.name().to_string()];
        match &self.command {
            QueryCommand::Chi { bundle } => opt(&mut out, "bundle", bundle),
            QueryCommand::CheckEll { strict, bundle }
            | QueryCommand::FindPolarization { strict, bundle }
            | QueryCommand::CompactType { strict, bundle } => {
                flag(&mut out, "strict", *strict);
                opt(&mut out, "bundle", bundle);
            }
            QueryCommand::CheckW { pol, strict, bundle } => {
                val(&mut out, "pol", pol);
                flag(&mut out, "strict", *strict);
                opt(&mut out, "bundle", bundle);
            }
            QueryCommand::Glue { node, strict, bundle } => {
                opt(&mut out, "node", node);
                flag(&mut out, "strict", *strict);
                opt(&mut out, "bundle", bundle);
            }
            QueryCommand::Twist { line, bundle } => {
                val(&mut out, "line", line);
                opt(&mut out, "bundle", bundle);
            }
            QueryCommand::Langton {
                pol,
                max_steps,
                twist_by,
                bundle,
            } => {
                val(&mut out, "pol", pol);
                if *max_steps != DEFAULT_MAX_STEPS {
                    val(&mut out, "max-steps", max_steps);
                }
                opt(&mut out, "twist-by", twist_by);
                opt(&mut out, "bundle", bundle);
            }
            QueryCommand::Oracle {
                rank_vector,
                model,
                bundle,
            } => {
                val(&mut out, "rank-vector", &fmt_vec(rank_vector));
                if *model != ModelArg::Generic {
                    val(&mut out, "model", &"aligned");
                }
                opt(&mut out, "bundle", bundle);
            }
        }
        out
    }

    pub fn text(&self) -> String {
        self.tokens().join(" ")
    }

    /// Names and indices the query refers to must exist in the document.
    pub fn check_references(&self, doc: &Document) -> Result<(), String> {
        if doc.bundle(self.bundle_name()).is_none() {
            return Err(match self.bundle_name() {
                Some(n) => format!("unknown bundle `{n}`"),
                None => "document has no bundle".into(),
            });
        }
        let pol_exists = |p: &str| {
            doc.polarization(p)
                .map(|_| ())
                .ok_or_else(|| format!("unknown polarization `{p}`"))
        };
        let line_exists = |l: &str| doc.line(l).map(|_| ()).ok_or_else(|| format!("unknown line `{l}`"));
        match &self.command {
            QueryCommand::CheckW { pol, .. } => pol_exists(pol),
            QueryCommand::Langton { pol, twist_by, .. } => {
                pol_exists(pol)?;
                twist_by.as_deref().map_or(Ok(()), line_exists)
            }
            QueryCommand::Twist { line, .. } => line_exists(line),
            QueryCommand::Glue { node: Some(k), .. } if *k >= doc.curve.node_count() => {
                Err(format!("node {k} does not exist"))
            }
            QueryCommand::Oracle { rank_vector, .. } if rank_vector.len() != doc.curve.component_count() => Err(
                format!(
                    "rank vector has {} entries, curve has {} components",
                    rank_vector.len(),
                    doc.curve.component_count()
                ),
            ),
            _ => Ok(()),
        }
    }
}
