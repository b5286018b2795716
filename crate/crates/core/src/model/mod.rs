//! Abstract syntax of the privacy logic: terms, equations, architecture
//! facts, modal atoms, architectures and requirement sets.

mod arch;
mod display;
mod fact;
mod ops;
mod term;

pub use arch::{
    builtin_arity, Architecture, Arity, Goal, Requirement, RequirementId, RequirementKind, RequirementSet,
    VarShape, DEFAULT_INDEX_BOUND,
};
pub use fact::{
    is_identifier, AgentId, Attestation, Fact, Formula, Knowledge, Modal, ModalOp, Prim, PrimAtom, ProofObj,
    PropAtom, PropP,
};
pub use ops::{free_vars, instantiate, instantiate_modal, instantiate_range, normalize, FreeVars, Template};
pub use term::{Constant, Equation, Index, Relation, Term, Var, HASH, HHASH, OTIMES, SUM};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("`{0}` is not a valid agent identifier")]
    InvalidAgent(String),
    #[error("agent `{0}` declared twice")]
    DuplicateAgent(String),
    #[error("undeclared agent `{0}`")]
    UndeclaredAgent(String),
    #[error("undeclared function `{0}`")]
    UndeclaredFunction(String),
    #[error("function `{fun}` expects {expected:?} arguments, found {found}")]
    ArityMismatch { fun: String, expected: Arity, found: usize },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("undeclared constant `{0}`")]
    UndeclaredConstant(String),
    #[error("index {index} of `{var}` outside 1..{size}")]
    IndexOutOfRange { var: String, index: u32, size: u32 },
    #[error("index bound must be at least 1, got {0}")]
    Bound(i64),
    #[error("unbound index symbol `{0}`")]
    UnboundIndex(String),
    #[error("term `{0}` is not ground")]
    NotGround(String),
    #[error("dependency with no sources")]
    EmptyDependency,
    #[error("empty conjunction")]
    EmptyConjunction,
    #[error("agent `{0}` cannot prove to itself")]
    SelfProof(String),
    #[error("{0}")]
    Structural(String),
}
