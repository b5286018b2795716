//! The `.pvd` architecture description language.
//!
//! ```text
//! arch "billing" {
//!     agents o, u, m;
//!     const n = 3;
//!     fun P/1;
//!     var C[n], Fee;
//!     fact has(m, C[i]) for i in 1..n;
//!     fact compute(m, Fee = sum(P(C[i]) : i in 1..n));
//!     assume K(o, trust(o, m));
//! }
//! ```
//!
//! Requirement files list goals under `functional:`, `privacy:`,
//! `knowledge:` and `correctness:` headers and are resolved against an
//! architecture.

pub(crate) mod ast;
pub(crate) mod lexer;
mod lower;
pub(crate) mod parser;
mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Architecture, Knowledge, RequirementSet, Term, DEFAULT_INDEX_BOUND};

pub(crate) use lower::{Lowerer, RoleValue};
pub use printer::{print_architecture, print_requirements};

/// A 1-based position and length within one line of source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl Span {
    /// Smallest span covering `self` and `end`, clipped to the first line.
    pub fn to(self, end: Span) -> Span {
        if end.line == self.line && end.column >= self.column {
            Span { length: end.column + end.length - self.column, ..self }
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub span: Span,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

impl ParseError {
    pub fn at(span: Span, message: impl Into<String>) -> Self {
        ParseError { file: None, span, message: message.into(), expected: None }
    }

    pub fn expected(span: Span, message: impl Into<String>, expected: impl Into<String>) -> Self {
        ParseError { expected: Some(expected.into()), ..Self::at(span, message) }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)
    }
}

/// Every error found in one input, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl ParseErrors {
    pub(crate) fn finish(mut errors: Vec<ParseError>, file: Option<&str>) -> Self {
        errors.sort_by_key(|e| e.span);
        errors.dedup();
        for e in &mut errors {
            e.file = file.map(str::to_string);
        }
        ParseErrors(errors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    /// Name reported in error messages.
    pub file: Option<String>,
    /// Takes precedence over a `const n = ...` declaration.
    pub index_bound_override: Option<u32>,
    /// Used when the file does not give `n` a value.
    pub default_index_bound: u32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { file: None, index_bound_override: None, default_index_bound: DEFAULT_INDEX_BOUND }
    }
}

impl ParseOptions {
    pub fn file(name: impl Into<String>) -> Self {
        ParseOptions { file: Some(name.into()), ..Self::default() }
    }
}

pub(crate) fn parser_for(text: &str) -> parser::Parser {
    let (toks, errors) = lexer::lex(text);
    let mut p = parser::Parser::new(toks);
    p.errors = errors;
    p
}

pub fn parse_architecture(text: &str, opts: &ParseOptions) -> Result<Architecture, ParseErrors> {
    let mut p = parser_for(text);
    let ast = p.arch_file();
    let mut errors = std::mem::take(&mut p.errors);
    let arch = ast.map(|ast| lower::lower_architecture(&ast, opts, &mut errors));
    match arch {
        Some(arch) if errors.is_empty() => Ok(arch),
        _ => Err(ParseErrors::finish(errors, opts.file.as_deref())),
    }
}

pub fn parse_requirements(
    text: &str,
    arch: &Architecture,
    opts: &ParseOptions,
) -> Result<RequirementSet, ParseErrors> {
    let mut p = parser_for(text);
    let items = p.req_file();
    let mut errors = std::mem::take(&mut p.errors);
    let reqs = lower::lower_requirements(&items, arch, &mut errors);
    if errors.is_empty() {
        Ok(reqs)
    } else {
        Err(ParseErrors::finish(errors, opts.file.as_deref()))
    }
}

/// Parses one ground fact or a `K(...)`/`X(...)` atom in the scope of `arch`.
pub fn parse_knowledge(text: &str, arch: &Architecture) -> Result<Knowledge, ParseErrors> {
    let mut p = parser_for(text);
    let modal = (p.at_kw("K") || p.at_kw("X")) && matches!(p.peek_at(1), lexer::Tok::LParen);
    let parsed = if modal { p.modal().map(Parsed::Modal) } else { p.fact().map(Parsed::Fact) };
    if parsed.is_ok() && !p.at_eof() {
        let _ = p.fail::<()>("end of input");
    }
    let mut errors = std::mem::take(&mut p.errors);
    let mut lw = Lowerer::new(arch, &mut errors);
    let out = match parsed {
        Ok(Parsed::Modal(m)) => lw.modal(&m, &mut Vec::new()).ok().map(Knowledge::Modal),
        Ok(Parsed::Fact(f)) => lw.fact(&f, &mut Vec::new()).ok().map(Knowledge::Fact),
        Err(()) => None,
    };
    match out {
        Some(k) if errors.is_empty() => Ok(k),
        _ => Err(ParseErrors::finish(errors, None)),
    }
}

enum Parsed {
    Modal(ast::S<ast::ModalAst>),
    Fact(ast::S<ast::FactAst>),
}

/// Parses one ground term in the scope of `arch`.
pub fn parse_term(text: &str, arch: &Architecture) -> Result<Term, ParseErrors> {
    let mut p = parser_for(text);
    let parsed = p.term();
    if parsed.is_ok() && !p.at_eof() {
        let _ = p.fail::<()>("end of input");
    }
    let mut errors = std::mem::take(&mut p.errors);
    let out = parsed.ok().and_then(|t| Lowerer::new(arch, &mut errors).term(&t, &mut Vec::new()).ok());
    match out {
        Some(t) if errors.is_empty() => Ok(t),
        _ => Err(ParseErrors::finish(errors, None)),
    }
}
