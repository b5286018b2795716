//! Concrete-syntax rendering. Output reparses with the `adsl` parser.

use std::fmt::{self, Display, Formatter, Write};

use super::arch::Goal;
use super::fact::{Attestation, Fact, Knowledge, Modal, ModalOp, Prim, PrimAtom, ProofObj, PropAtom, PropP};
use super::term::{Constant, Equation, Index, Term, Var};

fn join<T: Display>(f: &mut Formatter<'_>, items: impl IntoIterator<Item = T>, sep: &str) -> fmt::Result {
    for (k, item) in items.into_iter().enumerate() {
        if k > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for Constant {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(v) => write!(f, "{v}"),
            Constant::Named(n) => f.write_str(n),
        }
    }
}

impl Display for Var {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        match &self.index {
            None => Ok(()),
            Some(Index::Lit(k)) => write!(f, "[{k}]"),
            Some(Index::Param(p)) => write!(f, "[{p}]"),
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Apply { fun, args } => {
                write!(f, "{fun}(")?;
                join(f, args, ", ")?;
                f.write_char(')')
            }
            Term::Family { param, lo, hi, body } => write!(f, "{body} : {param} in {lo}..{hi}"),
        }
    }
}

impl Display for Equation {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel, self.rhs)
    }
}

impl Display for Attestation {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "attest({}, {})", self.attester, self.body)
    }
}

impl Display for PropAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            PropAtom::Att(a) => write!(f, "{a}"),
            PropAtom::Eq(e) => write!(f, "{e}"),
        }
    }
}

impl Display for PropP {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        join(f, &self.0, " & ")
    }
}

impl Display for ProofObj {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "proof({}, {}, {})", self.prover, self.verifier, self.body)
    }
}

impl Display for PrimAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            PrimAtom::Proof(p) => write!(f, "{p}"),
            PrimAtom::Att(a) => write!(f, "{a}"),
        }
    }
}

impl Display for Prim {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        join(f, &self.0, " & ")
    }
}

impl Display for Fact {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Fact::ReceiveVar { receiver, sender, var } => write!(f, "receive({receiver}, {sender}, var {var})"),
            Fact::ReceivePrim { receiver, sender, payload } => {
                write!(f, "receive({receiver}, {sender}, prim {payload})")
            }
            Fact::Trust { truster, trustee } => write!(f, "trust({truster}, {trustee})"),
            Fact::Compute { agent, defined, body } => write!(f, "compute({agent}, {defined} = {body})"),
            Fact::Check { agent, eq } => write!(f, "check({agent}, {eq})"),
            Fact::Has { agent, var } => write!(f, "has({agent}, {var})"),
            Fact::Att(a) => write!(f, "{a}"),
            Fact::Proof(p) => write!(f, "{p}"),
            Fact::Eq(e) => write!(f, "{e}"),
            Fact::Dep { agent, target, sources } => {
                write!(f, "dep({agent}, {target}, {{")?;
                join(f, sources, ", ")?;
                f.write_str("})")
            }
        }
    }
}

impl Display for ModalOp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModalOp::K => "K",
            ModalOp::X => "X",
        })
    }
}

impl Display for Modal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, ", self.op, self.agent)?;
        join(f, &self.body, " & ")?;
        f.write_char(')')
    }
}

impl Display for Knowledge {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Knowledge::Fact(fact) => write!(f, "{fact}"),
            Knowledge::Modal(m) => write!(f, "{m}"),
        }
    }
}

impl Display for Goal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Functional(eq) => write!(f, "{eq}"),
            Goal::Privacy { agent, var } => write!(f, "not has({agent}, {var})"),
            Goal::Knowledge { agent, var } => write!(f, "has({agent}, {var})"),
            Goal::Correctness { agent, eq } => write!(f, "X({agent}, {eq})"),
        }
    }
}
