//! Recursive-descent parser for `.pd` files.
//!
//! ```text
//! file     := stmt*
//! stmt     := sysdecl | repdecl | boxdecl | diagdecl | checkdecl
//! sysdecl  := "system" IDENT "=" sysexpr
//! sysexpr  := factor ("*" factor)*
//! factor   := "Q(" INT ")" | "C(" INT ")" | "dual(" factor ")" | IDENT
//! repdecl  := "rep" IDENT ":" sysexpr "=" STRING
//! boxdecl  := "box" IDENT ":" sysexpr? "->" sysexpr? "=" (GENERATOR | "choi" "[" complex,* "]")
//! diagdecl := "diagram" IDENT (":" sysexpr? "->" sysexpr?)? "{" (node | wire)* "}"
//! node     := "node" IDENT ":" IDENT
//! wire     := "wire" port "->" port
//! port     := (IDENT | "bound") "." ("in" | "out") "[" INT "]"
//! check    := "check" IDENT IDENT "in" THEORY ("using" IDENT "->" IDENT)?
//! ```

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Token, TokenKind};
use super::{Diagnostic, Rule, Span};
use crate::numerics::C64;
use crate::theories::TheoryName;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FactorExpr {
    Quantum(usize),
    Classical(usize),
    Dual(Box<FactorExpr>),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SysExpr {
    pub factors: Vec<(FactorExpr, Span)>,
    pub span: Span,
}

impl SysExpr {
    pub fn empty(span: Span) -> Self {
        SysExpr { factors: Vec::new(), span }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    Discard,
    MaxMix,
    Noise,
    Id,
    Swap,
    Cup,
    Cap,
}

impl Generator {
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "discard" => Generator::Discard,
            "maxmix" => Generator::MaxMix,
            "noise" => Generator::Noise,
            "id" => Generator::Id,
            "swap" => Generator::Swap,
            "cup" => Generator::Cup,
            "cap" => Generator::Cap,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoxSource {
    Generator(Generator),
    Choi(Vec<C64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortSide {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortRef {
    /// `None` for the diagram boundary.
    pub owner: Option<String>,
    pub side: PortSide,
    pub index: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDecl {
    pub name: String,
    pub signature: Option<(SysExpr, SysExpr)>,
    pub nodes: Vec<(String, String, Span)>,
    pub wires: Vec<(PortRef, PortRef, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    Causal,
    Retrocausal,
    Unital,
    Member,
    Intertwiner,
    NoSignalling,
    Unknown(String),
}

impl Property {
    pub fn from_name(s: &str) -> Self {
        match s {
            "causal" => Property::Causal,
            "retrocausal" => Property::Retrocausal,
            "unital" => Property::Unital,
            "member" => Property::Member,
            "intertwiner" => Property::Intertwiner,
            "nosignalling" => Property::NoSignalling,
            other => Property::Unknown(other.to_string()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Property::Causal => "causal",
            Property::Retrocausal => "retrocausal",
            Property::Unital => "unital",
            Property::Member => "member",
            Property::Intertwiner => "intertwiner",
            Property::NoSignalling => "nosignalling",
            Property::Unknown(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDecl {
    pub property: Property,
    pub target: String,
    pub theory: TheoryName,
    pub reps: Option<(String, String)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Item {
    System { name: String, expr: SysExpr, span: Span },
    Rep { name: String, system: SysExpr, path: String, span: Span },
    Box { name: String, input: SysExpr, output: SysExpr, source: BoxSource, span: Span },
    Diagram(DiagramDecl),
    Check(CheckDecl),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct File {
    pub items: Vec<Item>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Span,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        self.tokens.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let found = self.peek().map(TokenKind::describe).unwrap_or_else(|| "end of file".into());
        Err(Diagnostic::new(self.span(), Rule::Parse, format!("expected {expected}, found {found}")))
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Span> {
        let span = self.span();
        if self.eat(&kind) {
            Ok(span)
        } else {
            self.error(&kind.describe())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, span))
            }
            _ => self.error(what),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(span)
            }
            _ => self.error(&format!("`{kw}`")),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match self.peek() {
            Some(TokenKind::Number(s)) => match s.parse::<usize>() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => self.error("a nonnegative integer"),
            },
            _ => self.error("a nonnegative integer"),
        }
    }

    fn at_sysexpr_start(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::Ident(_)))
    }

    fn factor(&mut self) -> PResult<(FactorExpr, Span)> {
        let (name, span) = self.ident("a system factor")?;
        let f = match name.as_str() {
            "Q" | "C" => {
                self.expect(TokenKind::LParen)?;
                let n_span = self.span();
                let n = self.int()?;
                if n == 0 {
                    return Err(Diagnostic::new(n_span, Rule::Parse, "dimension must be at least 1"));
                }
                self.expect(TokenKind::RParen)?;
                if name == "Q" {
                    FactorExpr::Quantum(n)
                } else {
                    FactorExpr::Classical(n)
                }
            }
            "dual" => {
                self.expect(TokenKind::LParen)?;
                let (inner, _) = self.factor()?;
                self.expect(TokenKind::RParen)?;
                FactorExpr::Dual(Box::new(inner))
            }
            _ => FactorExpr::Named(name),
        };
        Ok((f, span))
    }

    fn sysexpr(&mut self) -> PResult<SysExpr> {
        let span = self.span();
        let mut factors = vec![self.factor()?];
        while self.eat(&TokenKind::Star) {
            factors.push(self.factor()?);
        }
        Ok(SysExpr { factors, span })
    }

    fn opt_sysexpr(&mut self) -> PResult<SysExpr> {
        if self.at_sysexpr_start() {
            self.sysexpr()
        } else {
            Ok(SysExpr::empty(self.span()))
        }
    }

    fn signature(&mut self) -> PResult<(SysExpr, SysExpr)> {
        let input = self.opt_sysexpr()?;
        self.expect(TokenKind::Arrow)?;
        let output = self.opt_sysexpr()?;
        Ok((input, output))
    }

    fn complex(&mut self) -> PResult<C64> {
        let span = self.span();
        let text = match self.peek() {
            Some(TokenKind::Number(s)) => s.clone(),
            Some(TokenKind::Ident(s)) if s == "i" => s.clone(),
            _ => return self.error("a complex number"),
        };
        match text.parse::<C64>() {
            Ok(z) => {
                self.pos += 1;
                Ok(z)
            }
            Err(_) => Err(Diagnostic::new(span, Rule::Parse, format!("malformed complex number `{text}`"))),
        }
    }

    fn port(&mut self) -> PResult<PortRef> {
        let (owner, span) = self.ident("a port")?;
        self.expect(TokenKind::Dot)?;
        let side = match self.peek() {
            Some(TokenKind::Ident(s)) if s == "in" => PortSide::In,
            Some(TokenKind::Ident(s)) if s == "out" => PortSide::Out,
            _ => return self.error("`in` or `out`"),
        };
        self.pos += 1;
        self.expect(TokenKind::LBracket)?;
        let index = self.int()?;
        self.expect(TokenKind::RBracket)?;
        let owner = if owner == "bound" { None } else { Some(owner) };
        Ok(PortRef { owner, side, index, span })
    }

    fn diagram(&mut self, span: Span) -> PResult<DiagramDecl> {
        let (name, _) = self.ident("a diagram name")?;
        let signature = if self.eat(&TokenKind::Colon) { Some(self.signature()?) } else { None };
        self.expect(TokenKind::LBrace)?;
        let mut nodes = Vec::new();
        let mut wires = Vec::new();
        loop {
            let s = self.span();
            match self.peek() {
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(TokenKind::Ident(k)) if k == "node" => {
                    self.pos += 1;
                    let (n, _) = self.ident("a node name")?;
                    self.expect(TokenKind::Colon)?;
                    let (b, _) = self.ident("a box name")?;
                    nodes.push((n, b, s));
                }
                Some(TokenKind::Ident(k)) if k == "wire" => {
                    self.pos += 1;
                    let a = self.port()?;
                    self.expect(TokenKind::Arrow)?;
                    let b = self.port()?;
                    wires.push((a, b, s));
                }
                _ => return self.error("`node`, `wire` or `}`"),
            }
        }
        Ok(DiagramDecl { name, signature, nodes, wires, span })
    }

    fn item(&mut self) -> PResult<Item> {
        let (kw, span) = self.ident("a declaration")?;
        match kw.as_str() {
            "system" => {
                let (name, _) = self.ident("a system name")?;
                self.expect(TokenKind::Equals)?;
                let expr = self.sysexpr()?;
                Ok(Item::System { name, expr, span })
            }
            "rep" => {
                let (name, _) = self.ident("a representation name")?;
                self.expect(TokenKind::Colon)?;
                let system = self.sysexpr()?;
                self.expect(TokenKind::Equals)?;
                match self.peek() {
                    Some(TokenKind::Str(p)) => {
                        let path = p.clone();
                        self.pos += 1;
                        Ok(Item::Rep { name, system, path, span })
                    }
                    _ => self.error("a quoted file path"),
                }
            }
            "box" => {
                let (name, _) = self.ident("a box name")?;
                self.expect(TokenKind::Colon)?;
                let input = self.opt_sysexpr()?;
                self.expect(TokenKind::Arrow)?;
                let output = self.opt_sysexpr()?;
                self.expect(TokenKind::Equals)?;
                let gspan = self.span();
                let (g, _) = self.ident("a generator or `choi`")?;
                let source = if g == "choi" {
                    self.expect(TokenKind::LBracket)?;
                    let mut entries = Vec::new();
                    if !self.eat(&TokenKind::RBracket) {
                        loop {
                            entries.push(self.complex()?);
                            if self.eat(&TokenKind::RBracket) {
                                break;
                            }
                            self.expect(TokenKind::Comma)?;
                        }
                    }
                    BoxSource::Choi(entries)
                } else {
                    match Generator::from_name(&g) {
                        Some(gen) => BoxSource::Generator(gen),
                        None => return Err(Diagnostic::new(gspan, Rule::Parse, format!("unknown generator `{g}`"))),
                    }
                };
                Ok(Item::Box { name, input, output, source, span })
            }
            "diagram" => Ok(Item::Diagram(self.diagram(span)?)),
            "check" => {
                let (prop, _) = self.ident("a property")?;
                let (target, _) = self.ident("a diagram or box name")?;
                self.keyword("in")?;
                let tspan = self.span();
                let (theory, _) = self.ident("a theory name")?;
                let theory = theory
                    .parse::<TheoryName>()
                    .map_err(|e| Diagnostic::new(tspan, Rule::Parse, e.to_string()))?;
                let reps = if matches!(self.peek(), Some(TokenKind::Ident(s)) if s == "using") {
                    self.pos += 1;
                    let (rin, _) = self.ident("a representation name")?;
                    self.expect(TokenKind::Arrow)?;
                    let (rout, _) = self.ident("a representation name")?;
                    Some((rin, rout))
                } else {
                    None
                };
                Ok(Item::Check(CheckDecl { property: Property::from_name(&prop), target, theory, reps, span }))
            }
            _ => Err(Diagnostic::new(span, Rule::Parse, format!("unknown declaration `{kw}`"))),
        }
    }
}

/// Parse `.pd` source text.
pub fn parse(src: &str) -> Result<File, Diagnostic> {
    let tokens = tokenize(src)?;
    let lines = src.split('\n').count();
    let last_col = src.rsplit('\n').next().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser { tokens, pos: 0, end: Span { line: lines, col: last_col } };
    let mut items = Vec::new();
    while p.peek().is_some() {
        items.push(p.item()?);
    }
    Ok(File { items })
}
