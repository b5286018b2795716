use std::fmt::Write;

use crate::model::{Architecture, Arity, Fact, RequirementKind, RequirementSet, VarShape};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical source text for `arch`. Parsing the output yields `arch` again.
pub fn print_architecture(arch: &Architecture) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "arch {} {{", quote(&arch.name));
    if !arch.agents.is_empty() {
        let names: Vec<&str> = arch.agents.iter().map(|a| a.as_str()).collect();
        let _ = writeln!(s, "    agents {};", names.join(", "));
    }
    for (name, value) in &arch.constants {
        match value {
            Some(v) => writeln!(s, "    const {name} = {v};"),
            None => writeln!(s, "    const {name};"),
        }
        .expect("write to String");
    }
    if !arch.functions.is_empty() {
        let funs: Vec<String> = arch
            .functions
            .iter()
            .map(|(f, a)| match a {
                Arity::Fixed(k) => format!("{f}/{k}"),
                Arity::Variadic => format!("{f}/*"),
            })
            .collect();
        let _ = writeln!(s, "    fun {};", funs.join(", "));
    }
    if !arch.variables.is_empty() {
        let vars: Vec<String> = arch
            .variables
            .iter()
            .map(|(v, shape)| match shape {
                VarShape::Scalar => v.clone(),
                VarShape::Family(k) => format!("{v}[{k}]"),
            })
            .collect();
        let _ = writeln!(s, "    var {};", vars.join(", "));
    }
    for fact in &arch.facts {
        let _ = match fact {
            Fact::Eq(eq) => writeln!(s, "    axiom {eq};"),
            other => writeln!(s, "    fact {other};"),
        };
    }
    for m in &arch.assumptions {
        let _ = writeln!(s, "    assume {m};");
    }
    s.push_str("}\n");
    s
}

pub fn print_requirements(reqs: &RequirementSet) -> String {
    let mut s = String::new();
    let mut current: Option<RequirementKind> = None;
    for r in reqs.iter() {
        if current != Some(r.id.kind) {
            if current.is_some() {
                s.push('\n');
            }
            let _ = writeln!(s, "{}:", r.id.kind.label());
            current = Some(r.id.kind);
        }
        let _ = writeln!(s, "    {};", r.goal);
    }
    s
}
