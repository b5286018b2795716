//! Command-line and HTTP front ends for the privarch engine.

pub mod report;
pub mod service;
pub mod view;

use privarch_core::adsl::ParseOptions;
use privarch_core::engine::{close_with, Config, DerivationTree, EngineError};
use privarch_core::model::{AgentId, Architecture, Fact, Knowledge, Term, DEFAULT_INDEX_BOUND};

/// Version of every JSON document the CLI and service emit.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable holding the default index bound.
pub const INDEX_BOUND_VAR: &str = "PRIVARCH_N";

/// Parse options for `file`, with `n` overriding the file and `PRIVARCH_N`
/// supplying the default.
pub fn parse_options(file: Option<&str>, n: Option<u32>) -> Result<ParseOptions, String> {
    let default_index_bound = match std::env::var(INDEX_BOUND_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{INDEX_BOUND_VAR}={v} is not a non-negative integer"))?,
        Err(_) => DEFAULT_INDEX_BOUND,
    };
    Ok(ParseOptions { file: file.map(str::to_string), index_bound_override: n, default_index_bound })
}

/// The agent whose knowledge an item is about, when the item names one.
pub fn subject(k: &Knowledge) -> Option<&AgentId> {
    match k {
        Knowledge::Modal(m) => Some(&m.agent),
        Knowledge::Fact(f) => match f {
            Fact::Has { agent, .. } | Fact::Compute { agent, .. } | Fact::Check { agent, .. } | Fact::Dep { agent, .. } => {
                Some(agent)
            }
            Fact::ReceiveVar { receiver, .. } | Fact::ReceivePrim { receiver, .. } => Some(receiver),
            Fact::Trust { truster, .. } => Some(truster),
            Fact::Att(_) | Fact::Proof(_) | Fact::Eq(_) => None,
        },
    }
}

/// Derivation of `k` in the closure of `agent`, or of its subject, or of the
/// first agent in declaration order that derives it.
pub fn explain(
    arch: &Architecture,
    extra: &[Term],
    k: &Knowledge,
    agent: Option<&AgentId>,
) -> Result<Option<(AgentId, DerivationTree)>, EngineError> {
    let candidates: Vec<&AgentId> = match agent.or_else(|| subject(k)) {
        Some(a) => vec![a],
        None => arch.agents.iter().collect(),
    };
    for a in candidates {
        let closure = close_with(arch, a, extra, &Config::default())?;
        if let Some(tree) = closure.explain(k) {
            return Ok(Some((a.clone(), tree)));
        }
    }
    Ok(None)
}
