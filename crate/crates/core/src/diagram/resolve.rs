use std::collections::BTreeMap;
use std::path::Path;

use super::parser::{parse, BoxSource, CheckDecl, DiagramDecl, FactorExpr, File, Generator, Item, PortSide, SysExpr};
use super::{Diagnostic, Diagram, Node, Port, Rule, Wire};
use crate::groups::{parse_rep_file, Representation};
use crate::numerics::{CMatrix, Tolerances};
use crate::systems::{self, ProcessTensor, SystemType, WireFactor};

/// A resolved `.pd` file: boxes built into processes, diagrams with typed
/// nodes, loaded representations and the check directives in file order.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub systems: BTreeMap<String, SystemType>,
    pub boxes: BTreeMap<String, ProcessTensor>,
    pub reps: BTreeMap<String, Representation>,
    pub diagrams: Vec<Diagram>,
    pub checks: Vec<CheckDecl>,
}

impl Program {
    pub fn diagram(&self, name: &str) -> Option<&Diagram> {
        self.diagrams.iter().find(|d| d.name == name)
    }
}

struct Resolver<'a> {
    prog: Program,
    errs: Vec<Diagnostic>,
    base_dir: Option<&'a Path>,
    tol: Tolerances,
}

fn factor_list(f: &FactorExpr, systems: &BTreeMap<String, SystemType>) -> Result<Vec<WireFactor>, String> {
    Ok(match f {
        FactorExpr::Quantum(n) => vec![WireFactor::quantum(*n)],
        FactorExpr::Classical(n) => vec![WireFactor::classical(*n)],
        FactorExpr::Dual(inner) => factor_list(inner, systems)?.into_iter().map(|w| w.dual()).collect(),
        FactorExpr::Named(name) => systems.get(name).ok_or_else(|| format!("unknown system `{name}`"))?.factors().to_vec(),
    })
}

/// Build a generator on the declared boundary types.
fn generator(g: Generator, input: &SystemType, output: &SystemType) -> Result<ProcessTensor, String> {
    let need_empty = |s: &SystemType, side: &str| {
        if s.is_empty() {
            Ok(())
        } else {
            Err(format!("this generator takes no {side}"))
        }
    };
    let halves = |s: &SystemType| -> Result<(SystemType, SystemType), String> {
        let n = s.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(format!("expected an even, nonzero number of factors, found {n}"));
        }
        Ok((s.select(&(0..n / 2).collect::<Vec<_>>()), s.select(&(n / 2..n).collect::<Vec<_>>())))
    };
    let err = |e: systems::ProcessError| e.to_string();
    match g {
        Generator::Discard => need_empty(output, "outputs").map(|_| systems::discard(input)),
        Generator::MaxMix => need_empty(input, "inputs").map(|_| systems::max_mixed(output)),
        Generator::Noise => need_empty(input, "inputs").map(|_| systems::noise_state(output)),
        Generator::Id => {
            if input.len() != output.len() {
                return Err(format!("identity between {input} and {output}"));
            }
            let n = input.len();
            let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + i)).collect();
            systems::pairing(input.clone(), output.clone(), &pairs).map_err(err)
        }
        Generator::Swap => {
            let n = input.len();
            let k = (1..n)
                .find(|&k| {
                    output.len() == n
                        && (0..n).all(|j| output.factors()[j].same_carrier(&input.factors()[(j + k) % n]))
                })
                .ok_or_else(|| format!("{output} is not a swap of {input}"))?;
            let pairs: Vec<(usize, usize)> = (0..n).map(|j| ((j + k) % n, n + j)).collect();
            systems::pairing(input.clone(), output.clone(), &pairs).map_err(err)
        }
        Generator::Cup => {
            need_empty(input, "inputs")?;
            let (a, b) = halves(output)?;
            systems::cup_on(&a, &b).map_err(err)
        }
        Generator::Cap => {
            need_empty(output, "outputs")?;
            let (a, b) = halves(input)?;
            systems::cap_on(&a, &b).map_err(err)
        }
    }
}

impl Resolver<'_> {
    fn sys(&mut self, e: &SysExpr) -> Option<SystemType> {
        let mut out = Vec::new();
        for (f, span) in &e.factors {
            match factor_list(f, &self.prog.systems) {
                Ok(v) => out.extend(v),
                Err(m) => {
                    self.errs.push(Diagnostic::new(*span, Rule::Undefined, m));
                    return None;
                }
            }
        }
        Some(SystemType::new(out))
    }

    fn taken(&self, name: &str) -> bool {
        self.prog.boxes.contains_key(name) || self.prog.diagram(name).is_some()
    }

    fn diagram(&mut self, d: &DiagramDecl) {
        if self.taken(&d.name) {
            self.errs.push(Diagnostic::new(d.span, Rule::Duplicate, format!("`{}` is already defined", d.name)));
            return;
        }
        let signature = match &d.signature {
            Some((i, o)) => match (self.sys(i), self.sys(o)) {
                (Some(i), Some(o)) => Some((i, o)),
                _ => return,
            },
            None => None,
        };
        let mut nodes: Vec<Node> = Vec::new();
        let mut ok = true;
        for (name, box_name, span) in &d.nodes {
            if nodes.iter().any(|n| &n.name == name) || name == "bound" {
                self.errs.push(Diagnostic::new(*span, Rule::Duplicate, format!("node `{name}` is already defined")));
                ok = false;
                continue;
            }
            match self.prog.boxes.get(box_name) {
                Some(p) => nodes.push(Node {
                    name: name.clone(),
                    box_name: box_name.clone(),
                    input: p.input().clone(),
                    output: p.output().clone(),
                    span: *span,
                }),
                None => {
                    self.errs.push(Diagnostic::new(*span, Rule::Undefined, format!("unknown box `{box_name}`")));
                    ok = false;
                }
            }
        }
        let declared: Vec<&String> = d.nodes.iter().map(|(n, _, _)| n).collect();
        let mut wires = Vec::new();
        for (a, b, span) in &d.wires {
            let mut port = |r: &super::PortRef| -> Option<Port> {
                match &r.owner {
                    None => Some(match r.side {
                        PortSide::In => Port::BoundIn(r.index),
                        PortSide::Out => Port::BoundOut(r.index),
                    }),
                    Some(n) => match nodes.iter().position(|x| &x.name == n) {
                        Some(i) => Some(match r.side {
                            PortSide::In => Port::NodeIn(i, r.index),
                            PortSide::Out => Port::NodeOut(i, r.index),
                        }),
                        None => {
                            if !declared.contains(&n) {
                                self.errs.push(Diagnostic::new(r.span, Rule::Undefined, format!("unknown node `{n}`")));
                            }
                            None
                        }
                    },
                }
            };
            match (port(a), port(b)) {
                (Some(pa), Some(pb)) => wires.push(Wire { a: pa, b: pb, span: *span }),
                _ => ok = false,
            }
        }
        if ok {
            self.prog.diagrams.push(Diagram { name: d.name.clone(), nodes, wires, signature, span: d.span });
        }
    }

    fn item(&mut self, item: &Item) {
        match item {
            Item::System { name, expr, span } => {
                if self.prog.systems.contains_key(name) {
                    self.errs.push(Diagnostic::new(*span, Rule::Duplicate, format!("system `{name}` is already defined")));
                } else if let Some(s) = self.sys(expr) {
                    self.prog.systems.insert(name.clone(), s);
                }
            }
            Item::Rep { name, system, path, span } => {
                if self.prog.reps.contains_key(name) {
                    self.errs.push(Diagnostic::new(*span, Rule::Duplicate, format!("rep `{name}` is already defined")));
                    return;
                }
                let Some(sys) = self.sys(system) else { return };
                let full = match self.base_dir {
                    Some(dir) => dir.join(path),
                    None => Path::new(path).to_path_buf(),
                };
                let loaded = std::fs::read_to_string(&full)
                    .map_err(|e| format!("cannot read {}: {e}", full.display()))
                    .and_then(|text| parse_rep_file(&text, &sys, &self.tol).map_err(|e| format!("{}: {e}", full.display())));
                match loaded {
                    Ok(r) => {
                        self.prog.reps.insert(name.clone(), r);
                    }
                    Err(m) => self.errs.push(Diagnostic::new(*span, Rule::Rep, m)),
                }
            }
            Item::Box { name, input, output, source, span } => {
                if self.taken(name) {
                    self.errs.push(Diagnostic::new(*span, Rule::Duplicate, format!("`{name}` is already defined")));
                    return;
                }
                let (Some(i), Some(o)) = (self.sys(input), self.sys(output)) else { return };
                let built = match source {
                    BoxSource::Generator(g) => generator(*g, &i, &o),
                    BoxSource::Choi(entries) => {
                        let side = i.total_dim() * o.total_dim();
                        if entries.len() != side * side {
                            Err(format!("choi for {i} -> {o} needs {} entries, found {}", side * side, entries.len()))
                        } else {
                            let m = CMatrix::new(side, side, entries.clone()).expect("length checked");
                            ProcessTensor::new(i, o, m, &self.tol).map_err(|e| e.to_string())
                        }
                    }
                };
                match built {
                    Ok(p) => {
                        self.prog.boxes.insert(name.clone(), p);
                    }
                    Err(m) => self.errs.push(Diagnostic::new(*span, Rule::Box, format!("box `{name}`: {m}"))),
                }
            }
            Item::Diagram(d) => self.diagram(d),
            Item::Check(c) => {
                if !self.taken(&c.target) {
                    self.errs.push(Diagnostic::new(c.span, Rule::Undefined, format!("unknown diagram or box `{}`", c.target)));
                    return;
                }
                if let Some((rin, rout)) = &c.reps {
                    for r in [rin, rout] {
                        if !self.prog.reps.contains_key(r) {
                            self.errs.push(Diagnostic::new(c.span, Rule::Undefined, format!("unknown rep `{r}`")));
                            return;
                        }
                    }
                }
                self.prog.checks.push(c.clone());
            }
        }
    }
}

/// Resolve names, build boxes and load representation files (relative to
/// `base_dir`). Every front-end error is collected.
pub fn resolve(file: &File, base_dir: Option<&Path>, tol: &Tolerances) -> Result<Program, Vec<Diagnostic>> {
    let mut r = Resolver { prog: Program::default(), errs: Vec::new(), base_dir, tol: *tol };
    for item in &file.items {
        r.item(item);
    }
    if r.errs.is_empty() {
        Ok(r.prog)
    } else {
        Err(r.errs)
    }
}

pub fn resolve_str(src: &str, base_dir: Option<&Path>, tol: &Tolerances) -> Result<Program, Vec<Diagnostic>> {
    let file = parse(src).map_err(|e| vec![e])?;
    resolve(&file, base_dir, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{evaluate, typecheck};
    use crate::par::Execution;
    use crate::theories::WiringCaps;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn loop_file_is_closed() {
        let src = "system q = Q(2)\nbox u : -> q * dual(q) = cup\nbox n : q * dual(q) -> = cap\n\
                   diagram L { node a: u node b: n wire a.out[0] -> b.in[0] wire a.out[1] -> b.in[1] }";
        let p = resolve_str(src, None, &tol()).unwrap();
        let d = p.diagram("L").unwrap();
        let sig = typecheck(d, WiringCaps::COMPACT_ORIENTED).unwrap();
        assert!(sig.input.is_empty() && sig.output.is_empty());
        let v = evaluate(d, &p.boxes, Execution::Sequential).unwrap();
        assert!((v.as_scalar().unwrap().value() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_errors() {
        let errs = resolve_str("box a : Q(2) -> = discard\nbox a : Q(2) -> = discard\ncheck causal zz in qphys", None, &tol())
            .unwrap_err();
        assert_eq!(errs.len(), 2);
        assert_eq!((errs[0].rule, errs[0].span.line), (Rule::Duplicate, 2));
        assert_eq!((errs[1].rule, errs[1].span.line), (Rule::Undefined, 3));
        let errs = resolve_str("box s : Q(2) * Q(3) -> Q(2) * Q(3) = swap", None, &tol()).unwrap_err();
        assert_eq!(errs[0].rule, Rule::Box);
        let errs = resolve_str("box p : -> Q(2) = choi [1, 0, 0, -1]", None, &tol()).unwrap_err();
        assert_eq!(errs[0].rule, Rule::Box);
    }

    #[test]
    fn swap_generator() {
        let p = resolve_str("box s : Q(2) * C(3) -> C(3) * Q(2) = swap", None, &tol()).unwrap();
        let s = &p.boxes["s"];
        assert!(s.approx_eq(&systems::swap(&SystemType::quantum(2), &SystemType::classical(3)), &tol()));
    }
}
