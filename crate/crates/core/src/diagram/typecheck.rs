use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Diagnostic, Diagram, Port, Rule, Span};
use crate::systems::{SystemType, WireFactor};
use crate::theories::WiringCaps;

/// Boundary types of a well-typed diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub input: SystemType,
    pub output: SystemType,
}

/// A wire joining two producers or two consumers.
pub(crate) fn is_bent(a: Port, b: Port) -> bool {
    a.is_producer() == b.is_producer()
}

fn node_port_type(d: &Diagram, p: Port) -> Option<WireFactor> {
    match p {
        Port::NodeIn(n, k) => d.nodes.get(n).and_then(|node| node.input.factors().get(k).copied()),
        Port::NodeOut(n, k) => d.nodes.get(n).and_then(|node| node.output.factors().get(k).copied()),
        _ => None,
    }
}

fn compatible(a: WireFactor, b: WireFactor, bent: bool, caps: WiringCaps) -> bool {
    if caps.self_dual {
        a.same_carrier(&b)
    } else if bent {
        a == b.dual()
    } else {
        a == b
    }
}

/// Check the wiring rules and compute the boundary types.
///
/// * rule i: producer to producer needs caps and consumer to consumer needs
///   cups, so both are rejected unless `caps.compact`;
/// * rule ii: without caps and cups the node graph must be acyclic;
/// * rule iii: joined ports must carry the same system (up to duality on
///   bent wires, and up to orientation when `caps.self_dual`).
///
/// Dangling, reused and out-of-range ports are reported as well. All
/// violations are returned, sorted by position.
pub fn typecheck(d: &Diagram, caps: WiringCaps) -> Result<Signature, Vec<Diagnostic>> {
    let mut errs = Vec::new();
    let mut uses: BTreeMap<Port, usize> = BTreeMap::new();

    for (w, wire) in d.wires.iter().enumerate() {
        for p in [wire.a, wire.b] {
            let in_range = match p {
                Port::NodeIn(..) | Port::NodeOut(..) => node_port_type(d, p).is_some(),
                _ => true,
            };
            if !in_range {
                let count = match p {
                    Port::NodeIn(n, _) => format!("{} inputs", d.nodes[n].input.len()),
                    Port::NodeOut(n, _) => format!("{} outputs", d.nodes[n].output.len()),
                    _ => unreachable!(),
                };
                errs.push(Diagnostic::new(wire.span, Rule::Port, format!("{} is out of range (box has {count})", d.port_label(p))));
                continue;
            }
            if let Some(prev) = uses.insert(p, w) {
                errs.push(Diagnostic::new(
                    wire.span,
                    Rule::Port,
                    format!("{} is already wired (line {})", d.port_label(p), d.wires[prev].span.line),
                ));
            }
        }
    }
    for (n, node) in d.nodes.iter().enumerate() {
        let ports = (0..node.input.len()).map(|k| Port::NodeIn(n, k)).chain((0..node.output.len()).map(|k| Port::NodeOut(n, k)));
        for p in ports {
            if !uses.contains_key(&p) {
                errs.push(Diagnostic::new(node.span, Rule::Port, format!("{} is not connected", d.port_label(p))));
            }
        }
    }

    let count_bound = |pick: fn(Port) -> Option<usize>| -> Vec<usize> { uses.keys().filter_map(|&p| pick(p)).collect() };
    let bin = count_bound(|p| if let Port::BoundIn(k) = p { Some(k) } else { None });
    let bout = count_bound(|p| if let Port::BoundOut(k) = p { Some(k) } else { None });
    let n_in = d.signature.as_ref().map(|s| s.0.len()).unwrap_or(bin.iter().max().map_or(0, |m| m + 1));
    let n_out = d.signature.as_ref().map(|s| s.1.len()).unwrap_or(bout.iter().max().map_or(0, |m| m + 1));
    for (name, used, n) in [("in", &bin, n_in), ("out", &bout, n_out)] {
        for k in 0..n {
            if !used.contains(&k) {
                errs.push(Diagnostic::new(d.span, Rule::Port, format!("bound.{name}[{k}] is not connected")));
            }
        }
        for &k in used.iter().filter(|&&k| k >= n) {
            let span = d.wires[uses[&if name == "in" { Port::BoundIn(k) } else { Port::BoundOut(k) }]].span;
            errs.push(Diagnostic::new(span, Rule::Port, format!("bound.{name}[{k}] exceeds the signature ({n} factors)")));
        }
    }

    let mut bound_in: Vec<Option<WireFactor>> = vec![None; n_in];
    let mut bound_out: Vec<Option<WireFactor>> = vec![None; n_out];
    if let Some((si, so)) = &d.signature {
        for (k, f) in si.factors().iter().enumerate() {
            bound_in[k] = Some(*f);
        }
        for (k, f) in so.factors().iter().enumerate() {
            bound_out[k] = Some(*f);
        }
    }
    let bound_slot = |p: Port| match p {
        Port::BoundIn(k) if k < n_in => Some((true, k)),
        Port::BoundOut(k) if k < n_out => Some((false, k)),
        _ => None,
    };

    for wire in &d.wires {
        let (a, b) = (wire.a, wire.b);
        let bent = is_bent(a, b);
        if bent && !caps.compact {
            let what = if a.is_producer() { "output wired to output (needs a cap)" } else { "input wired to input (needs a cup)" };
            errs.push(Diagnostic::new(
                wire.span,
                Rule::RuleI,
                format!("{what}: {} -> {}", d.port_label(a), d.port_label(b)),
            ));
        }
        let lookup = |p: Port, bi: &[Option<WireFactor>], bo: &[Option<WireFactor>]| match bound_slot(p) {
            Some((true, k)) => bi[k],
            Some((false, k)) => bo[k],
            None => node_port_type(d, p),
        };
        let ta = lookup(a, &bound_in, &bound_out);
        let tb = lookup(b, &bound_in, &bound_out);
        match (ta, tb) {
            (Some(x), Some(y)) => {
                if !compatible(x, y, bent, caps) {
                    let rel = if bent && !caps.self_dual { " (expected dual types)" } else { "" };
                    errs.push(Diagnostic::new(
                        wire.span,
                        Rule::RuleIII,
                        format!("{} : {x} wired to {} : {y}{rel}", d.port_label(a), d.port_label(b)),
                    ));
                }
            }
            (Some(x), None) | (None, Some(x)) => {
                let far = if ta.is_none() { a } else { b };
                let t = if bent { x.dual() } else { x };
                match bound_slot(far) {
                    Some((true, k)) => bound_in[k] = Some(t),
                    Some((false, k)) => bound_out[k] = Some(t),
                    None => {}
                }
            }
            (None, None) => {
                if bound_slot(a).is_some() && bound_slot(b).is_some() {
                    errs.push(Diagnostic::new(
                        wire.span,
                        Rule::RuleIII,
                        format!("cannot infer the type of {} -> {}; declare a signature", d.port_label(a), d.port_label(b)),
                    ));
                }
            }
        }
    }

    if !caps.compact {
        errs.extend(cycles(d));
    }

    if !errs.is_empty() {
        errs.sort_by_key(|e| e.span);
        return Err(errs);
    }
    let collect = |v: Vec<Option<WireFactor>>| SystemType::new(v.into_iter().map(|f| f.expect("every boundary port typed")).collect());
    Ok(Signature { input: collect(bound_in), output: collect(bound_out) })
}

/// Rule ii: one diagnostic per wire that closes a directed cycle.
fn cycles(d: &Diagram) -> Vec<Diagnostic> {
    let n = d.nodes.len();
    let mut adj: Vec<Vec<(usize, Span)>> = vec![Vec::new(); n];
    for wire in &d.wires {
        if is_bent(wire.a, wire.b) {
            continue;
        }
        let (src, dst) = if wire.a.is_producer() { (wire.a, wire.b) } else { (wire.b, wire.a) };
        if let (Some(u), Some(v)) = (src.node(), dst.node()) {
            if u < n && v < n {
                adj[u].push((v, wire.span));
            }
        }
    }
    // 0 unvisited, 1 on stack, 2 done
    let mut state = vec![0u8; n];
    let mut out = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < adj[u].len() {
                let (v, span) = adj[u][*i];
                *i += 1;
                match state[v] {
                    0 => {
                        state[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => out.push(Diagnostic::new(
                        span,
                        Rule::RuleII,
                        format!("wiring is cyclic: {} feeds back into {}", d.nodes[u].name, d.nodes[v].name),
                    )),
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    out
}
