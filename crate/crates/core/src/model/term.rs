//! Terms, relations and equations.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Built-in variadic summation. Indexed sums expand to `sum(t_1, ..., t_n)`.
pub const SUM: &str = "sum";
/// Combination operator of homomorphic hash values.
pub const OTIMES: &str = "otimes";
/// One-way hash.
pub const HASH: &str = "hash";
/// Homomorphic hash.
pub const HHASH: &str = "hhash";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constant {
    Int(i64),
    Named(String),
}

/// Index of a variable family member. `Param` only occurs in templates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Index {
    Lit(u32),
    Param(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub base: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Index>,
}

impl Var {
    pub fn scalar(base: impl Into<String>) -> Self {
        Var { base: base.into(), index: None }
    }

    pub fn indexed(base: impl Into<String>, index: u32) -> Self {
        Var { base: base.into(), index: Some(Index::Lit(index)) }
    }

    pub fn param(base: impl Into<String>, param: impl Into<String>) -> Self {
        Var { base: base.into(), index: Some(Index::Param(param.into())) }
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self.index, Some(Index::Param(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Const(Constant),
    Var(Var),
    Apply { fun: String, args: Vec<Term> },
    /// `body : param in lo..hi`, expanded in place inside an argument list
    /// or a dependency source set. Never present in ground terms.
    Family { param: String, lo: u32, hi: u32, body: Box<Term> },
}

impl Term {
    pub fn int(v: i64) -> Self {
        Term::Const(Constant::Int(v))
    }

    pub fn var(base: impl Into<String>) -> Self {
        Term::Var(Var::scalar(base))
    }

    pub fn indexed(base: impl Into<String>, index: u32) -> Self {
        Term::Var(Var::indexed(base, index))
    }

    pub fn apply(fun: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Apply { fun: fun.into(), args }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Head symbol and arguments of an application.
    pub fn as_apply(&self) -> Option<(&str, &[Term])> {
        match self {
            Term::Apply { fun, args } => Some((fun.as_str(), args.as_slice())),
            _ => None,
        }
    }

    /// True when the term contains no template parameters or families.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(v) => v.is_ground(),
            Term::Apply { args, .. } => args.iter().all(Term::is_ground),
            Term::Family { .. } => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Apply { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Family { body, .. } => body.collect_vars(out),
        }
    }

    /// Inserts this term and all of its subterms.
    pub fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        if out.contains(self) {
            return;
        }
        if let Term::Apply { args, .. } = self {
            args.iter().for_each(|a| a.collect_subterms(out));
        }
        out.insert(self.clone());
    }

    /// Function symbols used, with the number of arguments of each use.
    pub fn collect_symbols(&self, out: &mut BTreeSet<(String, usize)>) {
        match self {
            Term::Apply { fun, args } => {
                out.insert((fun.clone(), args.len()));
                args.iter().for_each(|a| a.collect_symbols(out));
            }
            Term::Family { body, .. } => body.collect_symbols(out),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Equation {
    pub lhs: Term,
    pub rel: Relation,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rel: Relation, rhs: Term) -> Self {
        Equation { lhs, rel, rhs }
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rel: Relation::Eq, rhs }
    }

    pub fn is_equality(&self) -> bool {
        self.rel == Relation::Eq
    }

    pub fn flipped(&self) -> Option<Equation> {
        self.is_equality().then(|| Equation::eq(self.rhs.clone(), self.lhs.clone()))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.free_vars();
        self.rhs.collect_vars(&mut out);
        out
    }

    pub fn terms(&self) -> [&Term; 2] {
        [&self.lhs, &self.rhs]
    }
}
