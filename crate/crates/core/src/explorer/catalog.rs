//! Catalog files: `pet Name [experimental] { ... }` entries over the
//! architecture fact syntax.

use std::collections::BTreeSet;

use crate::adsl::ast::{FactAst, Loop, ModalAst, Name, S};
use crate::adsl::lexer::Tok;
use crate::adsl::parser::{PResult, Parser};
use crate::adsl::{parser_for, ParseErrors};
use crate::model::ModalOp;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum GoalPat {
    Correctness { agent: Name, x: Name, t: Name },
    Knowledge { agent: Name, x: Name },
    Functional { x: Name, t: Name },
}

impl GoalPat {
    /// Role names in binding order, each flagged true for agents.
    pub fn roles(&self) -> Vec<(&Name, bool)> {
        match self {
            GoalPat::Correctness { agent, x, t } => vec![(agent, true), (x, false), (t, false)],
            GoalPat::Knowledge { agent, x } => vec![(agent, true), (x, false)],
            GoalPat::Functional { x, t } => vec![(x, false), (t, false)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Fresh {
    Agent(Name),
    Var(Name),
    /// A family with one member per summand of the `over` role.
    Family { name: Name, over: Name },
}

impl Fresh {
    pub fn name(&self) -> &Name {
        match self {
            Fresh::Agent(n) | Fresh::Var(n) | Fresh::Family { name: n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Require {
    Distinct(Name, Name),
    Access { agent: Name, term: Name, negated: bool },
    Sum(Name),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Assume {
    Trust(S<FactAst>, Loop),
    Modal(S<ModalAst>, Loop),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PetBody {
    pub goal: GoalPat,
    pub roles: Vec<Name>,
    pub fresh: Vec<Fresh>,
    pub requires: Vec<S<Require>>,
    pub adds: Vec<(S<FactAst>, Loop)>,
    pub assumes: Vec<Assume>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PetAst {
    pub name: Name,
    pub experimental: bool,
    pub description: String,
    pub body: PetBody,
}

struct Draft {
    description: Option<String>,
    goal: Option<GoalPat>,
    goal_seen: bool,
    body: PetBody,
}

fn string(p: &mut Parser) -> PResult<String> {
    match p.peek().clone() {
        Tok::Str(s) => {
            p.bump();
            Ok(s)
        }
        _ => p.fail("string"),
    }
}

fn goal(p: &mut Parser) -> PResult<GoalPat> {
    let kind = p.ident()?;
    p.expect(Tok::LParen)?;
    let g = match kind.node.as_str() {
        "correctness" => {
            let agent = p.ident()?;
            p.expect(Tok::Comma)?;
            let x = p.ident()?;
            p.expect(Tok::Eq)?;
            let t = p.ident()?;
            GoalPat::Correctness { agent, x, t }
        }
        "knowledge" => {
            let agent = p.ident()?;
            p.expect(Tok::Comma)?;
            GoalPat::Knowledge { agent, x: p.ident()? }
        }
        "functional" => {
            let x = p.ident()?;
            p.expect(Tok::Eq)?;
            GoalPat::Functional { x, t: p.ident()? }
        }
        other => {
            p.error_at(kind.span, format!("unknown goal form `{other}`"));
            return Err(());
        }
    };
    p.expect(Tok::RParen)?;
    Ok(g)
}

fn require(p: &mut Parser) -> PResult<Require> {
    let negated = p.eat_kw("not");
    let kind = p.ident()?;
    p.expect(Tok::LParen)?;
    let r = match (kind.node.as_str(), negated) {
        ("access", _) => {
            let agent = p.ident()?;
            p.expect(Tok::Comma)?;
            Require::Access { agent, term: p.ident()?, negated }
        }
        ("distinct", false) => {
            let a = p.ident()?;
            p.expect(Tok::Comma)?;
            Require::Distinct(a, p.ident()?)
        }
        ("sum", false) => Require::Sum(p.ident()?),
        (other, _) => {
            p.error_at(kind.span, format!("unknown precondition `{}{other}`", if negated { "not " } else { "" }));
            return Err(());
        }
    };
    p.expect(Tok::RParen)?;
    Ok(r)
}

fn item(p: &mut Parser, d: &mut Draft) -> PResult<()> {
    let start = p.span();
    let kw = p.ident()?;
    match kw.node.as_str() {
        "description" => d.description = Some(string(p)?),
        "goal" => {
            d.goal_seen = true;
            if d.goal.is_some() {
                p.error_at(kw.span, "a pattern has exactly one goal");
            }
            d.goal = Some(goal(p)?);
        }
        "role" => {
            let name = p.ident()?;
            p.expect(Tok::Colon)?;
            p.expect_kw("agent")?;
            d.body.roles.push(name);
        }
        "fresh" => {
            let fresh = if p.eat_kw("agent") {
                Fresh::Agent(p.ident()?)
            } else if p.eat_kw("var") {
                Fresh::Var(p.ident()?)
            } else if p.eat_kw("family") {
                let name = p.ident()?;
                p.expect_kw("over")?;
                Fresh::Family { name, over: p.ident()? }
            } else {
                return p.fail("`agent`, `var` or `family`");
            };
            d.body.fresh.push(fresh);
        }
        "require" => {
            let r = require(p)?;
            let span = start.to(p.span());
            d.body.requires.push(S::new(r, span));
        }
        "add" => {
            let f = p.fact()?;
            let each = p.loop_clause()?;
            d.body.adds.push((f, each));
        }
        "assume" => {
            let modal = (p.at_kw("K") || p.at_kw("X")) && matches!(p.peek_at(1), Tok::LParen);
            let a = if modal {
                Assume::Modal(p.modal()?, None)
            } else {
                let f = p.fact()?;
                if !matches!(f.node, FactAst::Trust { .. }) {
                    p.error_at(f.span, "induced assumptions are trust facts or K/X atoms");
                }
                Assume::Trust(f, None)
            };
            let each = p.loop_clause()?;
            d.body.assumes.push(match a {
                Assume::Modal(m, _) => Assume::Modal(m, each),
                Assume::Trust(f, _) => Assume::Trust(f, each),
            });
        }
        other => {
            p.error_at(kw.span, format!("unknown catalog item `{other}`"));
            return Err(());
        }
    }
    p.end_statement()
}

fn pet(p: &mut Parser) -> PResult<PetAst> {
    p.expect_kw("pet")?;
    let name = p.ident()?;
    let experimental = p.eat_kw("experimental");
    p.expect(Tok::LBrace)?;
    let mut d = Draft {
        description: None,
        goal: None,
        goal_seen: false,
        body: PetBody {
            goal: GoalPat::Functional { x: name.clone(), t: name.clone() },
            roles: vec![],
            fresh: vec![],
            requires: vec![],
            adds: vec![],
            assumes: vec![],
        },
    };
    while !p.at(&Tok::RBrace) && !p.at_eof() {
        if item(p, &mut d).is_err() {
            p.recover();
        }
    }
    p.expect(Tok::RBrace)?;
    match d.goal {
        Some(goal) => {
            d.body.goal = goal;
            check_roles(p, &name, experimental, &d.body);
        }
        None if !d.goal_seen => p.error_at(name.span, format!("pattern `{}` has no goal", name.node)),
        None => {}
    }
    Ok(PetAst { name, experimental, description: d.description.unwrap_or_default(), body: d.body })
}

fn check_roles(p: &mut Parser, pet: &Name, experimental: bool, body: &PetBody) {
    let mut seen = BTreeSet::new();
    let declared = body.goal.roles().into_iter().map(|(n, _)| n).chain(&body.roles).chain(body.fresh.iter().map(Fresh::name));
    for n in declared {
        if !seen.insert(n.node.as_str()) {
            p.error_at(n.span, format!("role `{}` declared twice", n.node));
        }
    }
    for a in &body.assumes {
        if let Assume::Modal(m, _) = a {
            if m.node.op == ModalOp::X && !experimental {
                p.error_at(m.span, format!("only experimental patterns may induce X atoms (in `{}`)", pet.node));
            }
        }
    }
}

pub(crate) fn parse(text: &str, file: Option<&str>) -> Result<Vec<PetAst>, ParseErrors> {
    let mut p = parser_for(text);
    let mut out: Vec<PetAst> = Vec::new();
    while !p.at_eof() {
        match pet(&mut p) {
            Ok(pet) => {
                if out.iter().any(|q| q.name.node == pet.name.node) {
                    p.error_at(pet.name.span, format!("pattern `{}` defined twice", pet.name.node));
                }
                out.push(pet);
            }
            Err(()) => skip_pet(&mut p),
        }
    }
    if p.errors.is_empty() {
        Ok(out)
    } else {
        Err(ParseErrors::finish(p.errors, file))
    }
}

/// Skips past the closing brace of an entry with a malformed header.
fn skip_pet(p: &mut Parser) {
    while !p.at_eof() && !p.at(&Tok::LBrace) {
        p.bump();
    }
    let mut depth = 0i32;
    while !p.at_eof() {
        match p.bump().tok {
            Tok::LBrace => depth += 1,
            Tok::RBrace => {
                depth -= 1;
                if depth <= 0 {
                    return;
                }
            }
            _ => {}
        }
    }
}
