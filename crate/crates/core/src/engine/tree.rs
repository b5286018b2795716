use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use super::Rule;
use crate::model::Knowledge;

/// A derivation: the conclusion, the rule that produced it and the
/// derivations of its premises. Leaves carry a leaf rule and no premises.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTree {
    pub conclusion: Knowledge,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<DerivationTree>,
}

impl DerivationTree {
    pub fn leaf(conclusion: Knowledge, rule: Rule) -> Self {
        DerivationTree { conclusion, rule, premises: Vec::new() }
    }

    /// Number of rule applications on the longest branch.
    pub fn depth(&self) -> u32 {
        if self.premises.is_empty() {
            if self.rule.is_leaf() {
                0
            } else {
                1
            }
        } else {
            1 + self.premises.iter().map(DerivationTree::depth).max().unwrap_or(0)
        }
    }

    pub fn leaves(&self) -> Vec<&DerivationTree> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if t.premises.is_empty() {
                out.push(t);
            }
        });
        out
    }

    pub fn uses(&self, rule: Rule) -> bool {
        let mut found = false;
        self.walk(&mut |t| found |= t.rule == rule);
        found
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a DerivationTree)) {
        f(self);
        for p in &self.premises {
            p.walk(f);
        }
    }

    /// Indented text, one node per line, conclusion first.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s, 0);
        s
    }

    fn render_into(&self, s: &mut String, indent: usize) {
        let _ = writeln!(s, "{:indent$}{}  [{}]", "", self.conclusion, self.rule, indent = indent);
        for p in &self.premises {
            p.render_into(s, indent + 2);
        }
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
