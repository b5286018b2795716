//! Recursive-descent parser producing [`super::ast`] trees.
//!
//! Statement-level errors are recorded and parsing resumes after the next
//! `;`, so one file reports all of its syntax errors.

use crate::model::{ModalOp, Relation, RequirementKind};

use super::ast::*;
use super::lexer::{Tok, Token};
use super::{ParseError, Span};

pub(crate) type PResult<T> = Result<T, ()>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub errors: Vec<ParseError>,
}

const FACT_KEYWORDS: &[&str] = &["receive", "trust", "compute", "check", "has", "attest", "proof", "dep"];

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0, errors: Vec::new() }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    pub fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    pub fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let span = self.span();
        let found = self.peek().describe();
        self.errors.push(ParseError::expected(span, format!("expected {expected}, found {found}"), expected));
        Err(())
    }

    pub fn error_at(&mut self, span: Span, message: impl Into<String>) {
        self.errors.push(ParseError::at(span, message));
    }

    pub fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.at(&tok) {
            Ok(self.bump().span)
        } else {
            self.fail(&format!("`{}`", tok.text()))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.at_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    pub fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok(S::new(s, span))
            }
            _ => self.fail("identifier"),
        }
    }

    fn int(&mut self) -> PResult<S<i64>> {
        match self.peek().clone() {
            Tok::Int(v) => {
                let span = self.bump().span;
                Ok(S::new(v, span))
            }
            _ => self.fail("integer"),
        }
    }

    fn index_int(&mut self) -> PResult<S<u32>> {
        let v = self.int()?;
        match u32::try_from(v.node) {
            Ok(k) => Ok(S::new(k, v.span)),
            Err(_) => {
                self.error_at(v.span, "index must be a non-negative integer");
                Err(())
            }
        }
    }

    /// Skips to just after the next `;` at bracket depth zero, or to a
    /// closing `}` that ends the enclosing block.
    pub fn recover(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi if depth <= 0 => {
                    self.bump();
                    return;
                }
                Tok::RBrace if depth <= 0 => return,
                Tok::LParen | Tok::LBrace | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBrace | Tok::RBracket => depth -= 1,
                _ => {}
            }
            self.bump();
        }
    }

    pub fn end_statement(&mut self) -> PResult<()> {
        self.expect(Tok::Semi).map(|_| ())
    }

    fn from(&self, start: Span) -> Span {
        start.to(self.prev_span())
    }

    // ---- terms ----

    pub fn term(&mut self) -> PResult<S<TermAst>> {
        let start = self.span();
        let first = self.atom()?;
        let op = match self.peek() {
            Tok::Plus => crate::model::SUM,
            Tok::Otimes => crate::model::OTIMES,
            _ => return Ok(first),
        };
        let op_tok = self.peek().clone();
        let op_span = self.span();
        let mut args = vec![ArgAst { term: first, each: None }];
        while self.at(&Tok::Plus) || self.at(&Tok::Otimes) {
            if self.peek() != &op_tok {
                self.error_at(self.span(), "mixing `+` and `⊗` needs explicit sum(...) / otimes(...)");
                return Err(());
            }
            self.bump();
            args.push(ArgAst { term: self.atom()?, each: None });
        }
        Ok(S::new(TermAst::Call { fun: S::new(op.to_string(), op_span), args }, self.from(start)))
    }

    fn atom(&mut self) -> PResult<S<TermAst>> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(S::new(TermAst::Int(v), start))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let args = self.args(&Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    Ok(S::new(TermAst::Call { fun: S::new(name, start), args }, self.from(start)))
                } else if self.eat(&Tok::LBracket) {
                    let istart = self.span();
                    let index = match self.peek().clone() {
                        Tok::Int(_) => IndexAst::Int(self.index_int()?.node),
                        Tok::Ident(p) => {
                            self.bump();
                            IndexAst::Name(p)
                        }
                        _ => return self.fail("index"),
                    };
                    let index = S::new(index, istart);
                    self.expect(Tok::RBracket)?;
                    Ok(S::new(TermAst::Name { name, index: Some(index) }, self.from(start)))
                } else {
                    Ok(S::new(TermAst::Name { name, index: None }, start))
                }
            }
            _ => self.fail("term"),
        }
    }

    /// Comma-separated arguments up to (not including) `close`.
    pub fn args(&mut self, close: &Tok) -> PResult<Vec<ArgAst>> {
        let mut out = Vec::new();
        if self.at(close) {
            return Ok(out);
        }
        loop {
            out.push(self.arg()?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn arg(&mut self) -> PResult<ArgAst> {
        let prefix = matches!(self.peek(), Tok::LParen)
            || (matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Ident(s) if s == "in"));
        if prefix {
            let each = self.each()?;
            self.expect(Tok::Comma)?;
            let term = self.term()?;
            return Ok(ArgAst { term, each: Some(each) });
        }
        let term = self.term()?;
        let each = if self.eat(&Tok::Colon) { Some(self.each()?) } else { None };
        Ok(ArgAst { term, each })
    }

    /// `binder in source`
    pub fn each(&mut self) -> PResult<Each> {
        let binder = if self.eat(&Tok::LParen) {
            let a = self.ident()?;
            self.expect(Tok::Comma)?;
            let b = self.ident()?;
            self.expect(Tok::RParen)?;
            Binder::Pair(a, b)
        } else {
            Binder::One(self.ident()?)
        };
        self.expect_kw("in")?;
        let start = self.span();
        let source = if self.at_kw("summands") || self.at_kw("vars") {
            let summands = self.at_kw("summands");
            self.bump();
            self.expect(Tok::LParen)?;
            let role = self.ident()?;
            self.expect(Tok::RParen)?;
            if summands {
                SourceAst::Summands(role)
            } else {
                SourceAst::Vars(role)
            }
        } else {
            let lo = self.bound()?;
            self.expect(Tok::DotDot)?;
            let hi = self.bound()?;
            SourceAst::Range(lo, hi)
        };
        Ok(Each { binder, source: S::new(source, self.from(start)) })
    }

    fn bound(&mut self) -> PResult<S<BoundAst>> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(_) => Ok(S::new(BoundAst::Int(self.index_int()?.node), span)),
            Tok::Ident(n) => {
                self.bump();
                Ok(S::new(BoundAst::Name(n), span))
            }
            _ => self.fail("range bound"),
        }
    }

    pub fn loop_clause(&mut self) -> PResult<Loop> {
        if self.eat_kw("for") {
            Ok(Some(self.each()?))
        } else {
            Ok(None)
        }
    }

    fn relation(&mut self) -> PResult<Relation> {
        let rel = match self.peek() {
            Tok::Eq => Relation::Eq,
            Tok::Lt => Relation::Lt,
            Tok::Gt => Relation::Gt,
            Tok::Le => Relation::Le,
            Tok::Ge => Relation::Ge,
            _ => return self.fail("relation (=, <, >, <=, >=)"),
        };
        self.bump();
        Ok(rel)
    }

    pub fn equation(&mut self) -> PResult<S<EqAst>> {
        let start = self.span();
        let lhs = self.term()?;
        let rel = self.relation()?;
        let rhs = self.term()?;
        Ok(S::new(EqAst { lhs, rel, rhs }, self.from(start)))
    }

    // ---- facts ----

    fn at_fact_keyword(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if FACT_KEYWORDS.contains(&s.as_str()))
            && matches!(self.peek_at(1), Tok::LParen)
    }

    /// A fact expression, or a bare equation when no fact keyword leads.
    pub fn fact(&mut self) -> PResult<S<FactAst>> {
        let start = self.span();
        if !self.at_fact_keyword() {
            let eq = self.equation()?;
            let span = eq.span;
            return Ok(S::new(FactAst::Eq(eq), span));
        }
        let kw = self.ident()?.node;
        self.expect(Tok::LParen)?;
        let fact = match kw.as_str() {
            "receive" => {
                let receiver = self.ident()?;
                self.expect(Tok::Comma)?;
                let sender = self.ident()?;
                self.expect(Tok::Comma)?;
                let payload = if self.eat_kw("var") {
                    PayloadAst::Var(self.term()?)
                } else if self.eat_kw("prim") {
                    PayloadAst::Prim(self.prim_conj()?)
                } else {
                    return self.fail("`var` or `prim`");
                };
                FactAst::Receive { receiver, sender, payload }
            }
            "trust" => {
                let truster = self.ident()?;
                self.expect(Tok::Comma)?;
                FactAst::Trust { truster, trustee: self.ident()? }
            }
            "compute" => {
                let agent = self.ident()?;
                self.expect(Tok::Comma)?;
                let defined = self.term()?;
                self.expect(Tok::Eq)?;
                FactAst::Compute { agent, defined, body: self.term()? }
            }
            "check" => {
                let agent = self.ident()?;
                self.expect(Tok::Comma)?;
                FactAst::Check { agent, eq: self.equation()? }
            }
            "has" => {
                let agent = self.ident()?;
                self.expect(Tok::Comma)?;
                FactAst::Has { agent, var: self.term()? }
            }
            "attest" => {
                let attester = self.ident()?;
                self.expect(Tok::Comma)?;
                FactAst::Attest { attester, eq: self.equation()? }
            }
            "proof" => {
                let prover = self.ident()?;
                self.expect(Tok::Comma)?;
                let verifier = self.ident()?;
                self.expect(Tok::Comma)?;
                FactAst::Proof { prover, verifier, body: self.prop_conj()? }
            }
            "dep" => {
                let agent = self.ident()?;
                self.expect(Tok::Comma)?;
                let target = self.term()?;
                self.expect(Tok::Comma)?;
                self.expect(Tok::LBrace)?;
                let sources = self.args(&Tok::RBrace)?;
                self.expect(Tok::RBrace)?;
                FactAst::Dep { agent, target, sources }
            }
            _ => unreachable!("guarded by at_fact_keyword"),
        };
        self.expect(Tok::RParen)?;
        Ok(S::new(fact, self.from(start)))
    }

    fn prim_conj(&mut self) -> PResult<Vec<PrimAtomAst>> {
        let mut out = Vec::new();
        loop {
            if self.eat_kw("attest") {
                self.expect(Tok::LParen)?;
                let attester = self.ident()?;
                self.expect(Tok::Comma)?;
                let eq = self.equation()?;
                self.expect(Tok::RParen)?;
                out.push(PrimAtomAst::Attest { attester, eq });
            } else if self.eat_kw("proof") {
                self.expect(Tok::LParen)?;
                let prover = self.ident()?;
                self.expect(Tok::Comma)?;
                let verifier = self.ident()?;
                self.expect(Tok::Comma)?;
                let body = self.prop_conj()?;
                self.expect(Tok::RParen)?;
                out.push(PrimAtomAst::Proof { prover, verifier, body });
            } else {
                return self.fail("`attest(...)` or `proof(...)`");
            }
            if !self.eat(&Tok::Amp) {
                return Ok(out);
            }
        }
    }

    fn prop_conj(&mut self) -> PResult<Vec<PropAtomAst>> {
        let mut out = Vec::new();
        loop {
            if self.at_kw("attest") && matches!(self.peek_at(1), Tok::LParen) {
                self.bump();
                self.bump();
                let attester = self.ident()?;
                self.expect(Tok::Comma)?;
                let eq = self.equation()?;
                self.expect(Tok::RParen)?;
                out.push(PropAtomAst::Attest { attester, eq });
            } else {
                out.push(PropAtomAst::Eq(self.equation()?));
            }
            if !self.eat(&Tok::Amp) {
                return Ok(out);
            }
        }
    }

    /// `K(agent, f & ...)` or `X(agent, f & ...)`, keyword not yet consumed.
    pub fn modal(&mut self) -> PResult<S<ModalAst>> {
        let start = self.span();
        let op = if self.eat_kw("K") {
            ModalOp::K
        } else if self.eat_kw("X") {
            ModalOp::X
        } else {
            return self.fail("`K` or `X`");
        };
        self.expect(Tok::LParen)?;
        let agent = self.ident()?;
        self.expect(Tok::Comma)?;
        let mut body = vec![self.fact()?];
        while self.eat(&Tok::Amp) {
            body.push(self.fact()?);
        }
        self.expect(Tok::RParen)?;
        Ok(S::new(ModalAst { op, agent, body }, self.from(start)))
    }

    // ---- architecture files ----

    pub fn arch_file(&mut self) -> Option<ArchAst> {
        let header = (|| {
            self.expect_kw("arch")?;
            let name = match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    s
                }
                _ => return self.fail("architecture name string"),
            };
            self.expect(Tok::LBrace)?;
            Ok(name)
        })();
        let name = header.ok()?;
        let mut items = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at_eof() {
            let start = self.span();
            match self.arch_item() {
                Ok(item) => items.push(S::new(item, self.from(start))),
                Err(()) => self.recover(),
            }
        }
        if self.expect(Tok::RBrace).is_ok() && !self.at_eof() {
            let _ = self.fail::<()>("end of input");
        }
        Some(ArchAst { name, items })
    }

    fn arch_item(&mut self) -> PResult<ArchItem> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail("declaration (agents, const, fun, var, fact, axiom, assume)"),
        };
        let item = match kw.as_str() {
            "agents" => {
                self.bump();
                let mut names = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident()?);
                }
                ArchItem::Agents(names)
            }
            "const" => {
                self.bump();
                let name = self.ident()?;
                let value = if self.eat(&Tok::Eq) { Some(self.int()?.node) } else { None };
                ArchItem::Const { name, value }
            }
            "fun" => {
                self.bump();
                let mut funs = Vec::new();
                loop {
                    let name = self.ident()?;
                    self.expect(Tok::Slash)?;
                    let arity = if self.eat(&Tok::Star) {
                        None
                    } else {
                        Some(self.index_int()?.node as usize)
                    };
                    funs.push((name, arity));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                ArchItem::Fun(funs)
            }
            "var" => {
                self.bump();
                let mut vars = Vec::new();
                loop {
                    let name = self.ident()?;
                    let size = if self.eat(&Tok::LBracket) {
                        let span = self.span();
                        let size = match self.peek().clone() {
                            Tok::Int(_) => VarSize::Int(self.index_int()?.node),
                            Tok::Ident(n) => {
                                self.bump();
                                VarSize::Name(n)
                            }
                            _ => return self.fail("family size"),
                        };
                        self.expect(Tok::RBracket)?;
                        Some(S::new(size, span))
                    } else {
                        None
                    };
                    vars.push((name, size));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                ArchItem::Var(vars)
            }
            "fact" => {
                self.bump();
                let fact = self.fact()?;
                ArchItem::Fact(fact, self.loop_clause()?)
            }
            "axiom" => {
                self.bump();
                let eq = self.equation()?;
                ArchItem::Axiom(eq, self.loop_clause()?)
            }
            "assume" => {
                self.bump();
                let m = self.modal()?;
                ArchItem::Assume(m, self.loop_clause()?)
            }
            _ => return self.fail("declaration (agents, const, fun, var, fact, axiom, assume)"),
        };
        self.end_statement()?;
        Ok(item)
    }

    // ---- requirement files ----

    fn section_header(&self) -> Option<&str> {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::Colon) => Some(s.as_str()),
            _ => None,
        }
    }

    pub fn req_file(&mut self) -> Vec<ReqItemAst> {
        let mut out = Vec::new();
        let mut section: Option<RequirementKind> = None;
        let mut in_unknown = false;
        while !self.at_eof() {
            if let Some(h) = self.section_header() {
                let kind = match h {
                    "functional" => Some(RequirementKind::Functional),
                    "privacy" => Some(RequirementKind::Privacy),
                    "knowledge" => Some(RequirementKind::Knowledge),
                    "correctness" => Some(RequirementKind::Correctness),
                    _ => None,
                };
                if kind.is_none() {
                    let span = self.span();
                    self.errors.push(ParseError::expected(
                        span,
                        format!("unknown requirement category `{h}`"),
                        "functional, privacy, knowledge or correctness",
                    ));
                }
                in_unknown = kind.is_none();
                section = kind;
                self.bump();
                self.bump();
                continue;
            }
            let start = self.span();
            let parsed = (|| {
                let expr = self.req_expr()?;
                let each = self.loop_clause()?;
                self.end_statement()?;
                Ok((expr, each))
            })();
            match (parsed, section) {
                (Ok((expr, each)), Some(section)) => out.push(ReqItemAst { section, expr, each }),
                (Ok(_), None) if in_unknown => {}
                (Ok(_), None) => {
                    let span = start.to(self.prev_span());
                    self.errors.push(ParseError::expected(
                        span,
                        "requirement outside of a category block",
                        "`functional:`, `privacy:`, `knowledge:` or `correctness:`",
                    ))
                }
                (Err(()), _) => self.recover(),
            }
        }
        out
    }

    fn req_expr(&mut self) -> PResult<S<ReqExprAst>> {
        let start = self.span();
        let expr = if self.eat_kw("not") {
            self.expect_kw("has")?;
            self.expect(Tok::LParen)?;
            let agent = self.ident()?;
            self.expect(Tok::Comma)?;
            let var = self.term()?;
            self.expect(Tok::RParen)?;
            ReqExprAst::NotHas { agent, var }
        } else if self.at_kw("has") && matches!(self.peek_at(1), Tok::LParen) {
            self.bump();
            self.bump();
            let agent = self.ident()?;
            self.expect(Tok::Comma)?;
            let var = self.term()?;
            self.expect(Tok::RParen)?;
            ReqExprAst::Has { agent, var }
        } else if self.at_kw("X") && matches!(self.peek_at(1), Tok::LParen) {
            self.bump();
            self.bump();
            let agent = self.ident()?;
            self.expect(Tok::Comma)?;
            let eq = self.equation()?;
            self.expect(Tok::RParen)?;
            ReqExprAst::X { agent, eq }
        } else if self.at_fact_keyword() || (self.at_kw("K") && matches!(self.peek_at(1), Tok::LParen)) {
            let kw = match self.peek() {
                Tok::Ident(s) => s.clone(),
                _ => unreachable!(),
            };
            if kw == "K" {
                self.modal()?;
            } else {
                self.fact()?;
            }
            ReqExprAst::Other(kw)
        } else {
            ReqExprAst::Eq(self.equation()?)
        };
        Ok(S::new(expr, self.from(start)))
    }
}
