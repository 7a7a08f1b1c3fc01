//! Wiring diagrams and the `.pd` text format.
//!
//! A [`Diagram`] is a set of typed nodes plus undirected wires between
//! ports. Outputs of nodes and inputs of the diagram boundary *produce* a
//! system; inputs of nodes and outputs of the boundary *consume* one. A wire
//! joining a producer to a consumer is an ordinary wire, while two producers
//! (or two consumers) can only be joined through a cap (or cup).
//!
//! Pipeline: [`parse`] text into a [`File`], [`resolve`] it into a
//! [`Program`] of boxes and diagrams, [`typecheck`] each diagram against a
//! theory's [`WiringCaps`](crate::theories::WiringCaps), then [`evaluate`] by
//! tensor contraction along a [`ContractionPlan`].

mod eval;
mod lexer;
mod parser;
mod plan;
mod resolve;
mod tensor;
mod typecheck;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::systems::SystemType;

pub use eval::{evaluate, evaluate_with_plan, leaf_shapes, plan, EvalError};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, BoxSource, CheckDecl, DiagramDecl, FactorExpr, File, Generator, Item, PortRef, PortSide, Property, SysExpr};
pub use plan::{greedy_plan, random_plan, ContractionPlan, PlanStep, Shape};
pub use resolve::{resolve, resolve_str, Program};
pub use tensor::Tensor;
pub use typecheck::{typecheck, Signature};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Diagnostic category, printed as the middle field of `file:line:col: rule: message`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Parse,
    Duplicate,
    Undefined,
    Box,
    Rep,
    /// Output wired to output, or input to input, without caps or cups.
    RuleI,
    /// A cycle in a theory without caps and cups.
    RuleII,
    /// Endpoint system types differ.
    RuleIII,
    /// Dangling, reused or out-of-range port.
    Port,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Parse => "parse",
            Rule::Duplicate => "duplicate",
            Rule::Undefined => "undefined",
            Rule::Box => "box",
            Rule::Rep => "rep",
            Rule::RuleI => "rule-i",
            Rule::RuleII => "rule-ii",
            Rule::RuleIII => "rule-iii",
            Rule::Port => "port",
        }
    }

    /// Whether the diagnostic comes from the typechecker rather than the front end.
    pub fn is_typecheck(self) -> bool {
        matches!(self, Rule::RuleI | Rule::RuleII | Rule::RuleIII | Rule::Port)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub span: Span,
    pub rule: Rule,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, rule: Rule, message: impl Into<String>) -> Self {
        Diagnostic { span, rule, message: message.into() }
    }

    /// `file:line:col: rule: message`.
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.rule, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// A port of a node or of the diagram boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Port {
    NodeIn(usize, usize),
    NodeOut(usize, usize),
    BoundIn(usize),
    BoundOut(usize),
}

impl Port {
    /// Node outputs and boundary inputs supply a system to the diagram.
    pub fn is_producer(self) -> bool {
        matches!(self, Port::NodeOut(..) | Port::BoundIn(_))
    }

    pub fn node(self) -> Option<usize> {
        match self {
            Port::NodeIn(n, _) | Port::NodeOut(n, _) => Some(n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    /// Name of the box this node instantiates.
    pub box_name: String,
    pub input: SystemType,
    pub output: SystemType,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub a: Port,
    pub b: Port,
    pub span: Span,
}

/// A wiring diagram with typed nodes. The boundary is given by the ports
/// `bound.in[k]` and `bound.out[k]` that appear in wires, optionally pinned
/// by an explicit signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub name: String,
    pub nodes: Vec<Node>,
    pub wires: Vec<Wire>,
    pub signature: Option<(SystemType, SystemType)>,
    pub span: Span,
}

impl Diagram {
    pub fn new(name: impl Into<String>) -> Self {
        Diagram { name: name.into(), nodes: Vec::new(), wires: Vec::new(), signature: None, span: Span::default() }
    }

    /// Add a node and return its index.
    pub fn add_node(&mut self, name: impl Into<String>, box_name: impl Into<String>, input: SystemType, output: SystemType) -> usize {
        self.nodes.push(Node { name: name.into(), box_name: box_name.into(), input, output, span: Span::default() });
        self.nodes.len() - 1
    }

    pub fn add_wire(&mut self, a: Port, b: Port) {
        self.wires.push(Wire { a, b, span: Span::default() });
    }

    pub fn with_signature(mut self, input: SystemType, output: SystemType) -> Self {
        self.signature = Some((input, output));
        self
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Label a port for messages, e.g. `n.out[1]`.
    pub fn port_label(&self, p: Port) -> String {
        let node = |i: usize| self.nodes.get(i).map(|n| n.name.as_str()).unwrap_or("?");
        match p {
            Port::NodeIn(n, k) => format!("{}.in[{k}]", node(n)),
            Port::NodeOut(n, k) => format!("{}.out[{k}]", node(n)),
            Port::BoundIn(k) => format!("bound.in[{k}]"),
            Port::BoundOut(k) => format!("bound.out[{k}]"),
        }
    }
}
