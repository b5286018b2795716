//! Untyped syntax trees shared by architecture, requirement and PET catalog
//! files. Names are resolved later, during lowering.

use crate::model::Relation;

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct S<T> {
    pub node: T,
    pub span: Span,
}

impl<T> S<T> {
    pub fn new(node: T, span: Span) -> Self {
        S { node, span }
    }
}

pub type Name = S<String>;

#[derive(Debug, Clone, PartialEq)]
pub enum IndexAst {
    Int(u32),
    Name(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermAst {
    Int(i64),
    Name { name: String, index: Option<S<IndexAst>> },
    Call { fun: Name, args: Vec<ArgAst> },
}

/// A call argument, possibly a comprehension (`body : i in 1..n`).
#[derive(Debug, Clone, PartialEq)]
pub struct ArgAst {
    pub term: S<TermAst>,
    pub each: Option<Each>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Binder {
    One(Name),
    Pair(Name, Name),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundAst {
    Int(u32),
    Name(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceAst {
    Range(S<BoundAst>, S<BoundAst>),
    /// Arguments of a `sum` term bound to a PET role (catalog files only).
    Summands(Name),
    /// Free variables of a term bound to a PET role (catalog files only).
    Vars(Name),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Each {
    pub binder: Binder,
    pub source: S<SourceAst>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqAst {
    pub lhs: S<TermAst>,
    pub rel: Relation,
    pub rhs: S<TermAst>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrimAtomAst {
    Attest { attester: Name, eq: S<EqAst> },
    Proof { prover: Name, verifier: Name, body: Vec<PropAtomAst> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropAtomAst {
    Attest { attester: Name, eq: S<EqAst> },
    Eq(S<EqAst>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PayloadAst {
    Var(S<TermAst>),
    Prim(Vec<PrimAtomAst>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactAst {
    Receive { receiver: Name, sender: Name, payload: PayloadAst },
    Trust { truster: Name, trustee: Name },
    Compute { agent: Name, defined: S<TermAst>, body: S<TermAst> },
    Check { agent: Name, eq: S<EqAst> },
    Has { agent: Name, var: S<TermAst> },
    Attest { attester: Name, eq: S<EqAst> },
    Proof { prover: Name, verifier: Name, body: Vec<PropAtomAst> },
    Dep { agent: Name, target: S<TermAst>, sources: Vec<ArgAst> },
    Eq(S<EqAst>),
}

/// `K(agent, body)` / `X(agent, body)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalAst {
    pub op: crate::model::ModalOp,
    pub agent: Name,
    pub body: Vec<S<FactAst>>,
}

/// Statement-level `for` clause.
pub type Loop = Option<Each>;

#[derive(Debug, Clone, PartialEq)]
pub enum VarSize {
    Int(u32),
    Name(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArchItem {
    Agents(Vec<Name>),
    Const { name: Name, value: Option<i64> },
    Fun(Vec<(Name, Option<usize>)>),
    Var(Vec<(Name, Option<S<VarSize>>)>),
    Fact(S<FactAst>, Loop),
    Axiom(S<EqAst>, Loop),
    Assume(S<ModalAst>, Loop),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchAst {
    pub name: String,
    pub items: Vec<S<ArchItem>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReqExprAst {
    NotHas { agent: Name, var: S<TermAst> },
    Has { agent: Name, var: S<TermAst> },
    X { agent: Name, eq: S<EqAst> },
    Eq(S<EqAst>),
    Other(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReqItemAst {
    pub section: crate::model::RequirementKind,
    pub expr: S<ReqExprAst>,
    pub each: Loop,
}
