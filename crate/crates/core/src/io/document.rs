//! The line-oriented document format.
//!
//! ```text
//! curve {
//!   component Y1 genus 0
//!   node Y1 Y2
//! }
//! bundle E {
//!   rank 2
//!   gluing generic
//!   splitting Y1 0,0
//!   degree Y2 -2
//! }
//! polarization w { Y1 1/2; Y2 1/2 }
//! query check-w --pol w --strict
//! ```
//!
//! Statements end at a newline, `;` or a closing brace. `#` starts a comment.

use std::fmt;

use crate::bundle::{BundleData, Gluing, LineBundleData};
use crate::curve::{Component, NodalCurve, Node};
use crate::error::StabilityError;
use crate::polarization::Polarization;
use crate::rational::{fmt_q, parse_q};

use super::query::{parse_query, QueryEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Parse,
    Validation,
}

/// An error anchored at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Parse => "parse error",
            DiagnosticKind::Validation => "validation error",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn parse(self, message: impl Into<String>) -> Diagnostic {
        self.diag(DiagnosticKind::Parse, message)
    }

    fn invalid(self, message: impl Into<String>) -> Diagnostic {
        self.diag(DiagnosticKind::Validation, message)
    }

    fn engine(self, e: StabilityError) -> Diagnostic {
        self.invalid(e.to_string())
    }

    fn diag(self, kind: DiagnosticKind, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            kind,
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Open,
    Close,
    End,
}

fn tokenize(text: &str) -> Vec<(Tok, Pos)> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            let pos = Pos {
                line: ln + 1,
                column: line[..i].chars().count() + 1,
            };
            match c {
                '{' => {
                    out.push((Tok::Open, pos));
                    chars.next();
                }
                '}' => {
                    out.push((Tok::Close, pos));
                    chars.next();
                }
                ';' => {
                    out.push((Tok::End, pos));
                    chars.next();
                }
                c if c.is_whitespace() => {
                    chars.next();
                }
                _ => {
                    let mut word = String::new();
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_whitespace() || matches!(c, '{' | '}' | ';') {
                            break;
                        }
                        word.push(c);
                        chars.next();
                    }
                    out.push((Tok::Word(word), pos));
                }
            }
        }
        let end = Pos {
            line: ln + 1,
            column: line.chars().count() + 1,
        };
        out.push((Tok::End, end));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedBundle {
    pub name: String,
    pub bundle: BundleData,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedPolarization {
    pub name: String,
    pub polarization: Polarization,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedLine {
    pub name: String,
    pub line: LineBundleData,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub curve: NodalCurve,
    pub bundles: Vec<NamedBundle>,
    pub polarizations: Vec<NamedPolarization>,
    pub lines: Vec<NamedLine>,
    pub queries: Vec<QueryEntry>,
}

impl Document {
    pub fn bundle(&self, name: Option<&str>) -> Option<&NamedBundle> {
        match name {
            None => self.bundles.first(),
            Some(n) => self.bundles.iter().find(|b| b.name == n),
        }
    }

    pub fn polarization(&self, name: &str) -> Option<&Polarization> {
        self.polarizations.iter().find(|p| p.name == name).map(|p| &p.polarization)
    }

    pub fn line(&self, name: &str) -> Option<&LineBundleData> {
        self.lines.iter().find(|l| l.name == name).map(|l| &l.line)
    }
}

type Stmt = Vec<(String, Pos)>;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, Pos)> {
        self.toks.get(self.at)
    }

    fn eof_pos(&self) -> Pos {
        self.toks.last().map_or(Pos { line: 1, column: 1 }, |t| t.1)
    }

    fn skip_ends(&mut self) {
        while matches!(self.peek(), Some((Tok::End, _))) {
            self.at += 1;
        }
    }

    /// Words up to the next statement terminator, which is consumed unless it is `}`.
    fn statement(&mut self) -> Result<Stmt, Diagnostic> {
        let mut words = Vec::new();
        while let Some((tok, pos)) = self.peek().cloned() {
            match tok {
                Tok::Word(w) => {
                    words.push((w, pos));
                    self.at += 1;
                }
                Tok::End => {
                    self.at += 1;
                    break;
                }
                Tok::Close => break,
                Tok::Open => return Err(pos.parse("unexpected `{`")),
            }
        }
        Ok(words)
    }

    /// Statements of a `{ … }` block; the opening brace must come next.
    fn block(&mut self) -> Result<(Vec<Stmt>, Pos), Diagnostic> {
        self.skip_ends();
        match self.peek().cloned() {
            Some((Tok::Open, _)) => self.at += 1,
            Some((_, pos)) => return Err(pos.parse("expected `{`")),
            None => return Err(self.eof_pos().parse("expected `{`")),
        }
        let mut stmts = Vec::new();
        loop {
            self.skip_ends();
            match self.peek().cloned() {
                Some((Tok::Close, pos)) => {
                    self.at += 1;
                    return Ok((stmts, pos));
                }
                Some(_) => {
                    let s = self.statement()?;
                    if !s.is_empty() {
                        stmts.push(s);
                    }
                }
                None => return Err(self.eof_pos().parse("unterminated block, expected `}`")),
            }
        }
    }
}

fn int<T: std::str::FromStr>(word: &(String, Pos), what: &str) -> Result<T, Diagnostic> {
    word.0
        .parse()
        .map_err(|_| word.1.parse(format!("expected {what}, found `{}`", word.0)))
}

fn arity(stmt: &Stmt, n: usize, usage: &str) -> Result<(), Diagnostic> {
    if stmt.len() != n {
        return Err(stmt[0].1.parse(format!("expected `{usage}`")));
    }
    Ok(())
}

fn component(curve: &NodalCurve, word: &(String, Pos)) -> Result<usize, Diagnostic> {
    curve
        .index_of(&word.0)
        .ok_or_else(|| word.1.invalid(format!("unknown component `{}`", word.0)))
}

fn parse_curve(stmts: &[Stmt], header: Pos) -> Result<NodalCurve, Diagnostic> {
    let mut components: Vec<Component> = Vec::new();
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    for s in stmts {
        match s[0].0.as_str() {
            "component" => {
                arity(s, 4, "component <label> genus <g>")?;
                if s[2].0 != "genus" {
                    return Err(s[2].1.parse("expected `genus`"));
                }
                if components.iter().any(|c| c.label == s[1].0) {
                    return Err(s[1].1.invalid(format!("duplicate component `{}`", s[1].0)));
                }
                components.push(Component {
                    label: s[1].0.clone(),
                    genus: int(&s[3], "a genus")?,
                });
            }
            "node" => {
                arity(s, 3, "node <label> <label>")?;
                let find = |w: &(String, Pos)| {
                    components
                        .iter()
                        .position(|c| c.label == w.0)
                        .ok_or_else(|| w.1.invalid(format!("unknown component `{}`", w.0)))
                };
                nodes.push((find(&s[1])?, find(&s[2])?));
            }
            other => return Err(s[0].1.parse(format!("unknown curve statement `{other}`"))),
        }
    }
    let nodes = nodes.into_iter().map(|(a, b)| Node::new(a, b)).collect();
    NodalCurve::from_parts(components, nodes).map_err(|e| header.engine(e))
}

fn parse_bundle(curve: &NodalCurve, stmts: &[Stmt], header: Pos) -> Result<BundleData, Diagnostic> {
    let n = curve.component_count();
    let mut rank: Option<u32> = None;
    let mut gluing = Gluing::Unspecified;
    let mut degrees: Vec<Option<i64>> = vec![None; n];
    let mut splittings: Vec<Option<(Vec<i64>, Pos)>> = vec![None; n];
    let mut declared: Vec<(usize, u32, i64, Pos)> = Vec::new();
    for s in stmts {
        match s[0].0.as_str() {
            "rank" => {
                arity(s, 2, "rank <r>")?;
                rank = Some(int(&s[1], "a rank")?);
            }
            "gluing" => {
                arity(s, 2, "gluing generic|aligned|unspecified")?;
                gluing = Gluing::parse(&s[1].0)
                    .ok_or_else(|| s[1].1.parse(format!("unknown gluing `{}`", s[1].0)))?;
            }
            "degree" => {
                arity(s, 3, "degree <label> <d>")?;
                let i = component(curve, &s[1])?;
                degrees[i] = Some(int(&s[2], "a degree")?);
            }
            "splitting" => {
                arity(s, 3, "splitting <label> <a1,…,ar>")?;
                let i = component(curve, &s[1])?;
                let entries = s[2]
                    .0
                    .split(',')
                    .map(|x| x.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| s[2].1.parse(format!("expected comma-separated integers, found `{}`", s[2].0)))?;
                splittings[i] = Some((entries, s[0].1));
            }
            "maxchi" => {
                arity(s, 4, "maxchi <label> <sub-rank> <chi>")?;
                let i = component(curve, &s[1])?;
                declared.push((i, int(&s[2], "a rank")?, int(&s[3], "an integer")?, s[0].1));
            }
            other => return Err(s[0].1.parse(format!("unknown bundle statement `{other}`"))),
        }
    }
    let rank = rank.ok_or_else(|| header.invalid("bundle has no `rank`"))?;
    let degrees = (0..n)
        .map(|i| degrees[i].unwrap_or_else(|| splittings[i].as_ref().map_or(0, |(s, _)| s.iter().sum())))
        .collect();
    let mut bundle = BundleData::new(curve.clone(), rank, degrees)
        .map_err(|e| header.engine(e))?
        .with_gluing(gluing);
    for (i, s) in splittings.into_iter().enumerate() {
        if let Some((entries, pos)) = s {
            bundle = bundle.with_splitting(i, entries).map_err(|e| pos.engine(e))?;
        }
    }
    for (i, s, chi, pos) in declared {
        bundle = bundle.with_declared_max(i, s, chi).map_err(|e| pos.engine(e))?;
    }
    Ok(bundle)
}

fn parse_polarization(curve: &NodalCurve, stmts: &[Stmt], header: Pos) -> Result<Polarization, Diagnostic> {
    let mut weights = vec![None; curve.component_count()];
    for s in stmts {
        arity(s, 2, "<label> <p/q>")?;
        let i = component(curve, &s[0])?;
        let w = parse_q(&s[1].0).ok_or_else(|| s[1].1.parse(format!("expected a rational, found `{}`", s[1].0)))?;
        if weights[i].replace(w).is_some() {
            return Err(s[0].1.invalid(format!("weight for `{}` given twice", s[0].0)));
        }
    }
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| header.invalid(format!("no weight for `{}`", curve.label(i)))))
        .collect::<Result<Vec<_>, _>>()?;
    Polarization::new(weights).map_err(|e| header.engine(e))
}

fn parse_line(curve: &NodalCurve, stmts: &[Stmt], header: Pos) -> Result<LineBundleData, Diagnostic> {
    let mut degrees = vec![0i64; curve.component_count()];
    for s in stmts {
        arity(s, 2, "<label> <d>")?;
        degrees[component(curve, &s[0])?] = int(&s[1], "a degree")?;
    }
    LineBundleData::new(curve.clone(), degrees).map_err(|e| header.engine(e))
}

fn named(p: &mut Parser, header: Pos, kind: &str) -> Result<(String, Pos), Diagnostic> {
    match p.peek().cloned() {
        Some((Tok::Word(w), pos)) => {
            p.at += 1;
            Ok((w, pos))
        }
        _ => Err(header.parse(format!("expected a name after `{kind}`"))),
    }
}

pub fn parse_document(text: &str) -> Result<Document, Diagnostic> {
    let mut p = Parser {
        toks: tokenize(text),
        at: 0,
    };
    let mut curve: Option<NodalCurve> = None;
    let mut bundles: Vec<NamedBundle> = Vec::new();
    let mut polarizations: Vec<NamedPolarization> = Vec::new();
    let mut lines: Vec<NamedLine> = Vec::new();
    let mut queries: Vec<(QueryEntry, Pos)> = Vec::new();
    let mut names: Vec<(String, String)> = Vec::new();

    let need_curve = |c: &Option<NodalCurve>, pos: Pos| -> Result<NodalCurve, Diagnostic> {
        c.clone().ok_or_else(|| pos.invalid("the `curve` block must come first"))
    };
    let mut claim = |kind: &str, name: &(String, Pos)| -> Result<(), Diagnostic> {
        if names.iter().any(|(k, n)| k == kind && *n == name.0) {
            return Err(name.1.invalid(format!("duplicate {kind} `{}`", name.0)));
        }
        names.push((kind.to_string(), name.0.clone()));
        Ok(())
    };

    loop {
        p.skip_ends();
        let Some((tok, pos)) = p.peek().cloned() else {
            break;
        };
        let Tok::Word(keyword) = tok else {
            return Err(pos.parse("expected `curve`, `bundle`, `polarization`, `line` or `query`"));
        };
        p.at += 1;
        match keyword.as_str() {
            "curve" => {
                if curve.is_some() {
                    return Err(pos.invalid("only one `curve` block is allowed"));
                }
                let (stmts, _) = p.block()?;
                curve = Some(parse_curve(&stmts, pos)?);
            }
            "bundle" => {
                let c = need_curve(&curve, pos)?;
                let name = named(&mut p, pos, "bundle")?;
                claim("bundle", &name)?;
                let (stmts, _) = p.block()?;
                bundles.push(NamedBundle {
                    name: name.0,
                    bundle: parse_bundle(&c, &stmts, pos)?,
                });
            }
            "polarization" => {
                let c = need_curve(&curve, pos)?;
                let name = named(&mut p, pos, "polarization")?;
                claim("polarization", &name)?;
                let (stmts, _) = p.block()?;
                polarizations.push(NamedPolarization {
                    name: name.0,
                    polarization: parse_polarization(&c, &stmts, pos)?,
                });
            }
            "line" => {
                let c = need_curve(&curve, pos)?;
                let name = named(&mut p, pos, "line")?;
                claim("line", &name)?;
                let (stmts, _) = p.block()?;
                lines.push(NamedLine {
                    name: name.0,
                    line: parse_line(&c, &stmts, pos)?,
                });
            }
            "query" => {
                let words = p.statement()?;
                let tokens: Vec<String> = words.into_iter().map(|(w, _)| w).collect();
                let entry = parse_query(&tokens).map_err(|m| pos.parse(m))?;
                queries.push((entry, pos));
            }
            other => return Err(pos.parse(format!("unknown section `{other}`"))),
        }
    }
    let curve = curve.ok_or_else(|| Pos { line: 1, column: 1 }.invalid("document has no `curve` block"))?;
    let positions: Vec<Pos> = queries.iter().map(|q| q.1).collect();
    let doc = Document {
        curve,
        bundles,
        polarizations,
        lines,
        queries: queries.into_iter().map(|q| q.0).collect(),
    };
    for (q, pos) in doc.queries.iter().zip(positions) {
        q.check_references(&doc).map_err(|m| pos.invalid(m))?;
    }
    Ok(doc)
}

/// Canonical text: a fixed point of `parse_document` followed by `serialize`.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    let c = &doc.curve;
    out.push_str("curve {\n");
    for comp in c.components() {
        out.push_str(&format!("  component {} genus {}\n", comp.label, comp.genus));
    }
    for n in c.nodes() {
        out.push_str(&format!("  node {} {}\n", c.label(n.a), c.label(n.b)));
    }
    out.push_str("}\n");
    for b in &doc.bundles {
        let e = &b.bundle;
        out.push_str(&format!("\nbundle {} {{\n  rank {}\n  gluing {}\n", b.name, e.rank(), e.gluing()));
        for i in 0..c.component_count() {
            out.push_str(&format!("  degree {} {}\n", c.label(i), e.degree(i)));
            if let Some(s) = e.splitting(i) {
                let entries: Vec<String> = s.iter().map(i64::to_string).collect();
                out.push_str(&format!("  splitting {} {}\n", c.label(i), entries.join(",")));
            }
            for (s, chi) in e.declared_maxima(i) {
                out.push_str(&format!("  maxchi {} {s} {chi}\n", c.label(i)));
            }
        }
        out.push_str("}\n");
    }
    for p in &doc.polarizations {
        out.push_str(&format!("\npolarization {} {{\n", p.name));
        for (i, w) in p.polarization.weights().iter().enumerate() {
            out.push_str(&format!("  {} {}\n", c.label(i), fmt_q(w)));
        }
        out.push_str("}\n");
    }
    for l in &doc.lines {
        out.push_str(&format!("\nline {} {{\n", l.name));
        for (i, d) in l.line.degrees().iter().enumerate() {
            out.push_str(&format!("  {} {d}\n", c.label(i)));
        }
        out.push_str("}\n");
    }
    if !doc.queries.is_empty() {
        out.push('\n');
        for q in &doc.queries {
            out.push_str(&format!("query {}\n", q.text()));
        }
    }
    out
}
