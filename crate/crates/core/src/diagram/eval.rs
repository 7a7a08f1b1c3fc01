use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::plan::{greedy_plan, ContractionPlan, Shape};
use super::tensor::Tensor;
use super::typecheck::{typecheck, Signature};
use super::{Diagnostic, Diagram, Port};
use crate::numerics::{CMatrix, ONE, ZERO};
use crate::par::{map_slice, Execution};
use crate::systems::{ProcessTensor, WireFactor};
use crate::theories::WiringCaps;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("diagram `{0}` does not typecheck: {1}")]
    IllTyped(String, String),
    #[error("no box named `{0}`")]
    Unresolved(String),
    #[error("box `{name}` is {found}, but node `{node}` expects {expected}")]
    BoxMismatch { name: String, node: String, expected: String, found: String },
    #[error("plan does not match the diagram")]
    BadPlan,
}

/// Leaf tensors of a diagram plus the labels of its boundary legs.
struct Network {
    leaves: Vec<Tensor>,
    /// Ket labels of the boundary factors (inputs then outputs), then bra labels.
    open: Vec<usize>,
    signature: Signature,
}

fn delta_tensor(f: WireFactor, labels: [usize; 4]) -> Tensor {
    let d = f.dim();
    let classical = f.is_classical();
    let mut data = vec![ZERO; d * d * d * d];
    for k in 0..d {
        for b in 0..d {
            if !classical || k == b {
                data[((k * d + k) * d + b) * d + b] = ONE;
            }
        }
    }
    Tensor::new(labels.to_vec(), vec![d; 4], data)
}

fn build(d: &Diagram, env: &BTreeMap<String, ProcessTensor>, with_data: bool) -> Result<Network, EvalError> {
    let signature = typecheck(d, WiringCaps::COMPACT).map_err(|errs| {
        EvalError::IllTyped(d.name.clone(), errs.iter().map(Diagnostic::to_string).collect::<Vec<_>>().join("; "))
    })?;
    let mut next = 0usize;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    // (ket, bra) labels for every port
    let mut label: HashMap<Port, (usize, usize)> = HashMap::new();
    let mut leaves = Vec::new();
    for w in &d.wires {
        let (a, b) = (w.a, w.b);
        if a.node().is_none() && b.node().is_none() {
            let f = match a {
                Port::BoundIn(k) => signature.input.factors()[k],
                Port::BoundOut(k) => signature.output.factors()[k],
                _ => unreachable!(),
            };
            let (ka, kb, ba, bb) = (fresh(), fresh(), fresh(), fresh());
            label.insert(a, (ka, ba));
            label.insert(b, (kb, bb));
            leaves.push(delta_tensor(f, [ka, kb, ba, bb]));
        } else {
            let l = (fresh(), fresh());
            label.insert(a, l);
            label.insert(b, l);
        }
    }
    for (n, node) in d.nodes.iter().enumerate() {
        let ports: Vec<Port> =
            (0..node.input.len()).map(|k| Port::NodeIn(n, k)).chain((0..node.output.len()).map(|k| Port::NodeOut(n, k))).collect();
        let dims: Vec<usize> = node.input.dims().into_iter().chain(node.output.dims()).collect();
        let kets: Vec<usize> = ports.iter().map(|p| label[p].0).collect();
        let bras: Vec<usize> = ports.iter().map(|p| label[p].1).collect();
        let data = if with_data {
            let p = env.get(&node.box_name).ok_or_else(|| EvalError::Unresolved(node.box_name.clone()))?;
            if p.input().dims() != node.input.dims() || p.output().dims() != node.output.dims() {
                return Err(EvalError::BoxMismatch {
                    name: node.box_name.clone(),
                    node: node.name.clone(),
                    expected: format!("{} -> {}", node.input, node.output),
                    found: format!("{} -> {}", p.input(), p.output()),
                });
            }
            p.choi().data().to_vec()
        } else {
            let n: usize = dims.iter().product();
            vec![ZERO; n * n]
        };
        leaves.push(Tensor::new([kets, bras].concat(), [dims.clone(), dims].concat(), data));
    }
    let bports: Vec<Port> = (0..signature.input.len())
        .map(Port::BoundIn)
        .chain((0..signature.output.len()).map(Port::BoundOut))
        .collect();
    let open: Vec<usize> =
        bports.iter().map(|p| label[p].0).chain(bports.iter().map(|p| label[p].1)).collect();
    Ok(Network { leaves, open, signature })
}

fn shapes(leaves: &[Tensor]) -> Vec<Shape> {
    leaves.iter().map(|t| t.labels.iter().copied().zip(t.dims.iter().copied()).collect()).collect()
}

/// Greedy contraction plan for `d`.
pub fn plan(d: &Diagram) -> Result<ContractionPlan, EvalError> {
    let net = build(d, &BTreeMap::new(), false)?;
    Ok(greedy_plan(&shapes(&net.leaves)))
}

/// Leg shapes of the leaf tensors, for building custom plans.
pub fn leaf_shapes(d: &Diagram) -> Result<Vec<Shape>, EvalError> {
    Ok(shapes(&build(d, &BTreeMap::new(), false)?.leaves))
}

/// Evaluate along the greedy plan.
pub fn evaluate(d: &Diagram, env: &BTreeMap<String, ProcessTensor>, exec: Execution) -> Result<ProcessTensor, EvalError> {
    let net = build(d, env, true)?;
    let plan = greedy_plan(&shapes(&net.leaves));
    run(net, &plan, exec)
}

pub fn evaluate_with_plan(
    d: &Diagram,
    env: &BTreeMap<String, ProcessTensor>,
    plan: &ContractionPlan,
    exec: Execution,
) -> Result<ProcessTensor, EvalError> {
    let net = build(d, env, true)?;
    if plan.leaves != net.leaves.len() {
        return Err(EvalError::BadPlan);
    }
    run(net, plan, exec)
}

type Job<'a> = (&'a Vec<usize>, Vec<(usize, Tensor)>);

/// Connected components of the leaves; steps whose operands lie in one
/// component run with that component, the rest afterwards in plan order.
fn run(net: Network, plan: &ContractionPlan, exec: Execution) -> Result<ProcessTensor, EvalError> {
    let n = net.leaves.len();
    let total = n + plan.steps.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if net.leaves[i].shares_label(&net.leaves[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut comp: Vec<Option<usize>> = vec![None; total];
    for (i, c) in comp.iter_mut().enumerate().take(n) {
        *c = Some(find(&mut parent, i));
    }
    let mut local: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut cross = Vec::new();
    for (s, step) in plan.steps.iter().enumerate() {
        if step.left >= n + s || step.right >= n + s || step.left == step.right {
            return Err(EvalError::BadPlan);
        }
        match (comp[step.left], comp[step.right]) {
            (Some(a), Some(b)) if a == b => {
                comp[n + s] = Some(a);
                local.entry(a).or_default().push(s);
            }
            _ => cross.push(s),
        }
    }

    let mut slots: Vec<Option<Tensor>> = net.leaves.into_iter().map(Some).chain((0..plan.steps.len()).map(|_| None)).collect();
    let groups: Vec<(usize, Vec<usize>)> = local.into_iter().collect();
    let inputs: Vec<Vec<(usize, Tensor)>> = groups
        .iter()
        .map(|(c, _)| (0..n).filter(|&i| comp[i] == Some(*c)).map(|i| (i, slots[i].take().unwrap())).collect())
        .collect();
    let jobs: Vec<Job> = groups.iter().map(|(_, s)| s).zip(inputs).collect();
    let results = map_slice(exec, &jobs, |(steps, leaves)| {
        let mut held: HashMap<usize, Tensor> = leaves.iter().cloned().collect();
        for &s in steps.iter() {
            let st = plan.steps[s];
            let (a, b) = (held.remove(&st.left), held.remove(&st.right));
            let (Some(a), Some(b)) = (a, b) else { return Err(EvalError::BadPlan) };
            held.insert(n + s, a.contract(&b));
        }
        Ok(held)
    });
    for r in results {
        let held = r?;
        for (slot, t) in held {
            slots[slot] = Some(t);
        }
    }
    for s in cross {
        let st = plan.steps[s];
        let (Some(a), Some(b)) = (slots[st.left].take(), slots[st.right].take()) else { return Err(EvalError::BadPlan) };
        slots[n + s] = Some(a.contract(&b));
    }
    let remaining: Vec<Tensor> = slots.into_iter().flatten().collect();
    if remaining.len() > 1 {
        return Err(EvalError::BadPlan);
    }
    let result = remaining.into_iter().next().unwrap_or_else(|| Tensor::scalar(ONE)).permuted(&net.open);
    let side: usize = net.signature.input.total_dim() * net.signature.output.total_dim();
    let choi = CMatrix::new(side, side, result.data).expect("open legs span the boundary");
    Ok(ProcessTensor::from_choi_unchecked(net.signature.input, net.signature.output, choi).expect("shape is consistent"))
}
