//! Location views: agents as nodes, communication and trust as edges, local
//! operations as annotations.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use privarch_core::model::{Architecture, Fact, PrimAtom, HHASH};

pub const VIEW_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Data,
    Primitive,
    Proof,
    Trust,
}

impl EdgeKind {
    fn style(self) -> &'static str {
        match self {
            EdgeKind::Trust => "dashed",
            _ => "solid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    Has,
    Compute,
    Check,
    Dep,
    /// A computation or check over homomorphic hashes.
    Hhash,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub labels: Vec<String>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub agent: String,
    pub kind: AnnotationKind,
    pub text: String,
    pub fact: Fact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub key: String,
    pub style: String,
    pub meaning: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationView {
    pub schema_version: u32,
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub annotations: Vec<Annotation>,
    pub legend: Vec<LegendEntry>,
}

fn legend() -> Vec<LegendEntry> {
    let entry = |key: &str, style: &str, meaning: &str| LegendEntry {
        key: key.into(),
        style: style.into(),
        meaning: meaning.into(),
    };
    vec![
        entry("data", "solid", "variables sent from one agent to another"),
        entry("primitive", "solid", "attestations sent from one agent to another"),
        entry("proof", "solid", "proofs sent from prover to verifier"),
        entry("trust", "dashed", "the source agent trusts the target agent"),
        entry("has", "note", "the agent holds the variable initially"),
        entry("compute", "note", "the agent computes the variable"),
        entry("check", "note", "the agent checks the equation"),
        entry("dep", "note", "the agent can derive the variable from its sources"),
        entry("hhash", "note", "a computation or check over homomorphic hashes"),
    ]
}

fn mentions_hhash(fact: &Fact) -> bool {
    let mut found = false;
    fact.visit_terms(&mut |t| {
        let mut stack = vec![t];
        while let Some(t) = stack.pop() {
            if let Some((fun, args)) = t.as_apply() {
                found |= fun == HHASH;
                stack.extend(args);
            }
        }
    });
    found
}

impl LocationView {
    pub fn of(arch: &Architecture) -> Self {
        let declared = |a: &privarch_core::model::AgentId| arch.has_agent(a);
        let mut grouped: BTreeMap<(String, String, EdgeKind), Vec<String>> = BTreeMap::new();
        let mut annotations = Vec::new();
        for fact in &arch.facts {
            let mut edge = |from: &privarch_core::model::AgentId, to, kind, label: String| {
                if declared(from) && declared(to) {
                    grouped.entry((from.to_string(), to.to_string(), kind)).or_default().push(label);
                }
            };
            match fact {
                Fact::ReceiveVar { receiver, sender, var } => edge(sender, receiver, EdgeKind::Data, var.to_string()),
                Fact::ReceivePrim { receiver, sender, payload } => {
                    for atom in &payload.0 {
                        let kind = match atom {
                            PrimAtom::Att(_) => EdgeKind::Primitive,
                            PrimAtom::Proof(_) => EdgeKind::Proof,
                        };
                        edge(sender, receiver, kind, atom.to_string());
                    }
                }
                Fact::Trust { truster, trustee } => edge(truster, trustee, EdgeKind::Trust, "trust".into()),
                Fact::Has { agent, .. } | Fact::Compute { agent, .. } | Fact::Check { agent, .. } | Fact::Dep { agent, .. }
                    if declared(agent) =>
                {
                    let kind = match fact {
                        _ if mentions_hhash(fact) => AnnotationKind::Hhash,
                        Fact::Has { .. } => AnnotationKind::Has,
                        Fact::Compute { .. } => AnnotationKind::Compute,
                        Fact::Check { .. } => AnnotationKind::Check,
                        _ => AnnotationKind::Dep,
                    };
                    annotations.push(Annotation {
                        agent: agent.to_string(),
                        kind,
                        text: fact.to_string(),
                        fact: fact.clone(),
                    });
                }
                _ => {}
            }
        }
        let edges = grouped
            .into_iter()
            .map(|((from, to, kind), labels)| Edge { from, to, kind, labels, dashed: kind == EdgeKind::Trust })
            .collect();
        LocationView {
            schema_version: VIEW_SCHEMA_VERSION,
            name: arch.name.clone(),
            nodes: arch.agents.iter().map(|a| Node { id: a.to_string() }).collect(),
            edges,
            annotations,
            legend: legend(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("views serialize")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "// location view, schema {}", self.schema_version);
        let _ = writeln!(out, "digraph {} {{", quote(&self.name));
        out.push_str("  rankdir=LR;\n  node [shape=box];\n");
        for n in &self.nodes {
            let notes: Vec<String> = self
                .annotations
                .iter()
                .filter(|a| a.agent == n.id)
                .map(|a| match a.kind {
                    AnnotationKind::Hhash => format!("hhash: {}", a.text),
                    _ => a.text.clone(),
                })
                .collect();
            let mut label = n.id.clone();
            for note in notes {
                label.push('\n');
                label.push_str(&note);
            }
            let _ = writeln!(out, "  {} [label={}];", quote(&n.id), quote(&label));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}, style={}, class={}];",
                quote(&e.from),
                quote(&e.to),
                quote(&e.labels.join("\n")),
                e.kind.style(),
                edge_name(e.kind)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn edge_name(k: EdgeKind) -> &'static str {
    match k {
        EdgeKind::Data => "data",
        EdgeKind::Primitive => "primitive",
        EdgeKind::Proof => "proof",
        EdgeKind::Trust => "trust",
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
