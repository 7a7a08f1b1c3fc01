//! Bending wires with cups and caps, and two-slot process matrices.
//!
//! A [`HigherOrderMap`] is an ordinary process whose boundary factors carry
//! slot roles. Filling slot A with a channel `A_in -> A_out` connects the
//! map's `A_in` output to the channel's input and the channel's output to the
//! map's (bent) `A_out` leg.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diagram::{evaluate, Diagram, EvalError, Port};
use crate::numerics::Tolerances;
use crate::par::Execution;
use crate::systems::{
    cap_on, cup_on, identity, is_causal, is_cp, permute_boundary, swap, ProcessError,
    ProcessTensor, SystemType,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HigherOrderError {
    #[error("port {index} out of range for {len} factors")]
    PortOutOfRange { index: usize, len: usize },
    #[error("the channel is not CPTP")]
    NotCptp,
    #[error("slot {slot}: expected {expected}, found {found}")]
    SlotMismatch { slot: Slot, expected: String, found: String },
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which boundary leg to bend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bend {
    /// Input `k` becomes the last output, with flipped orientation.
    Input(usize),
    /// Output `k` becomes the last input, with flipped orientation.
    Output(usize),
}

fn single(s: &SystemType, k: usize) -> SystemType {
    s.select(&[k])
}

fn without(s: &SystemType, k: usize) -> Vec<usize> {
    (0..s.len()).filter(|&j| j != k).collect()
}

/// Bend one boundary leg by contracting `f` with a cup or cap.
pub fn bend(f: &ProcessTensor, port: Bend) -> Result<ProcessTensor, HigherOrderError> {
    let (nin, nout) = (f.input().len(), f.output().len());
    let mut d = Diagram::new("bend");
    let nf = d.add_node("f", "f", f.input().clone(), f.output().clone());
    let mut env = BTreeMap::from([("f".to_string(), f.clone())]);
    let (input, output) = match port {
        Bend::Input(k) => {
            if k >= nin {
                return Err(HigherOrderError::PortOutOfRange { index: k, len: nin });
            }
            let x = single(f.input(), k);
            let u = cup_on(&x, &x.dual())?;
            let nu = d.add_node("u", "u", u.input().clone(), u.output().clone());
            env.insert("u".to_string(), u);
            for (pos, j) in without(f.input(), k).into_iter().enumerate() {
                d.add_wire(Port::BoundIn(pos), Port::NodeIn(nf, j));
            }
            d.add_wire(Port::NodeOut(nu, 0), Port::NodeIn(nf, k));
            for j in 0..nout {
                d.add_wire(Port::NodeOut(nf, j), Port::BoundOut(j));
            }
            d.add_wire(Port::NodeOut(nu, 1), Port::BoundOut(nout));
            (f.input().select(&without(f.input(), k)), f.output().tensor(&x.dual()))
        }
        Bend::Output(k) => {
            if k >= nout {
                return Err(HigherOrderError::PortOutOfRange { index: k, len: nout });
            }
            let y = single(f.output(), k);
            let c = cap_on(&y, &y.dual())?;
            let nc = d.add_node("c", "c", c.input().clone(), c.output().clone());
            env.insert("c".to_string(), c);
            for j in 0..nin {
                d.add_wire(Port::BoundIn(j), Port::NodeIn(nf, j));
            }
            d.add_wire(Port::NodeOut(nf, k), Port::NodeIn(nc, 0));
            d.add_wire(Port::BoundIn(nin), Port::NodeIn(nc, 1));
            for (pos, j) in without(f.output(), k).into_iter().enumerate() {
                d.add_wire(Port::NodeOut(nf, j), Port::BoundOut(pos));
            }
            (f.input().tensor(&y.dual()), f.output().select(&without(f.output(), k)))
        }
    };
    Ok(evaluate(&d.with_signature(input, output), &env, Execution::Sequential)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Past,
    AIn,
    AOut,
    BIn,
    BOut,
    Future,
}

impl std::fmt::Display for Slot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Slot::Past => "past",
            Slot::AIn => "A-in",
            Slot::AOut => "A-out",
            Slot::BIn => "B-in",
            Slot::BOut => "B-out",
            Slot::Future => "future",
        })
    }
}

/// Systems of the two slots and of the global past and future.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrixLayout {
    pub past: SystemType,
    pub a_in: SystemType,
    pub a_out: SystemType,
    pub b_in: SystemType,
    pub b_out: SystemType,
    pub future: SystemType,
}

impl ProcessMatrixLayout {
    /// All six slots on qubits.
    pub fn qubits() -> Self {
        let q = SystemType::quantum(2);
        ProcessMatrixLayout {
            past: q.clone(),
            a_in: q.clone(),
            a_out: q.clone(),
            b_in: q.clone(),
            b_out: q.clone(),
            future: q,
        }
    }

    /// Input of the channel obtained by plugging swaps into both slots.
    pub fn channel_input(&self) -> SystemType {
        self.past.tensor(&self.a_out).tensor(&self.b_out)
    }

    pub fn channel_output(&self) -> SystemType {
        self.a_in.tensor(&self.b_in).tensor(&self.future)
    }

    fn get(&self, slot: Slot) -> &SystemType {
        match slot {
            Slot::Past => &self.past,
            Slot::AIn => &self.a_in,
            Slot::AOut => &self.a_out,
            Slot::BIn => &self.b_in,
            Slot::BOut => &self.b_out,
            Slot::Future => &self.future,
        }
    }
}

fn fits(s: &SystemType, t: &SystemType) -> bool {
    s.len() == t.len() && s.factors().iter().zip(t.factors()).all(|(a, b)| a.same_carrier(b))
}

fn expect_slot(slot: Slot, expected: &SystemType, found: &SystemType) -> Result<(), HigherOrderError> {
    if fits(expected, found) {
        Ok(())
    } else {
        Err(HigherOrderError::SlotMismatch { slot, expected: expected.to_string(), found: found.to_string() })
    }
}

/// Process `past -> A_in ⊗ A_out* ⊗ B_in ⊗ B_out* ⊗ future` with slot tags.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherOrderMap {
    underlying: ProcessTensor,
    layout: ProcessMatrixLayout,
    input_tags: Vec<Slot>,
    output_tags: Vec<Slot>,
}

impl HigherOrderMap {
    pub fn underlying(&self) -> &ProcessTensor {
        &self.underlying
    }

    pub fn layout(&self) -> &ProcessMatrixLayout {
        &self.layout
    }

    pub fn input_tags(&self) -> &[Slot] {
        &self.input_tags
    }

    pub fn output_tags(&self) -> &[Slot] {
        &self.output_tags
    }

    /// Total dimension carried by each slot.
    pub fn slot_dims(&self) -> BTreeMap<Slot, usize> {
        [Slot::Past, Slot::AIn, Slot::AOut, Slot::BIn, Slot::BOut, Slot::Future]
            .into_iter()
            .map(|s| (s, self.layout.get(s).total_dim()))
            .collect()
    }

    /// Range of underlying output positions carrying `slot`.
    fn outputs_of(&self, slot: Slot) -> Vec<usize> {
        self.output_tags.iter().enumerate().filter(|(_, &t)| t == slot).map(|(k, _)| k).collect()
    }
}

/// Expose the slots of a CPTP channel `past ⊗ A_out ⊗ B_out -> A_in ⊗ B_in ⊗ future`
/// by bending its `A_out` and `B_out` inputs into outputs.
pub fn realize_process_matrix(
    w_channel: &ProcessTensor,
    layout: &ProcessMatrixLayout,
    tol: &Tolerances,
) -> Result<HigherOrderMap, HigherOrderError> {
    expect_slot(Slot::Past, &layout.channel_input(), w_channel.input())?;
    expect_slot(Slot::Future, &layout.channel_output(), w_channel.output())?;
    if !is_cp(w_channel, tol) || !is_causal(w_channel, tol) {
        return Err(HigherOrderError::NotCptp);
    }
    let np = layout.past.len();
    let (nai, nao, nbi, nbo, nf) =
        (layout.a_in.len(), layout.a_out.len(), layout.b_in.len(), layout.b_out.len(), layout.future.len());
    let mut w = w_channel.clone();
    for _ in 0..nao + nbo {
        w = bend(&w, Bend::Input(np))?;
    }
    // outputs now: a_in, b_in, future, a_out*, b_out*
    let base = nai + nbi + nf;
    let perm: Vec<usize> = (0..nai)
        .chain(base..base + nao)
        .chain(nai..nai + nbi)
        .chain(base + nao..base + nao + nbo)
        .chain(nai + nbi..base)
        .collect();
    let underlying = permute_boundary(&w, &(0..np).collect::<Vec<_>>(), &perm)?;
    let output_tags = [(Slot::AIn, nai), (Slot::AOut, nao), (Slot::BIn, nbi), (Slot::BOut, nbo), (Slot::Future, nf)]
        .into_iter()
        .flat_map(|(s, n)| std::iter::repeat_n(s, n))
        .collect();
    Ok(HigherOrderMap { underlying, layout: layout.clone(), input_tags: vec![Slot::Past; np], output_tags })
}

/// A slot filler: a process `slot_in ⊗ extra_in -> slot_out ⊗ extra_out`.
struct Filler<'a> {
    process: &'a ProcessTensor,
    extra_in: SystemType,
    extra_out: SystemType,
}

fn fill(w: &HigherOrderMap, a: Filler<'_>, b: Filler<'_>, exec: Execution) -> Result<ProcessTensor, HigherOrderError> {
    let l = &w.layout;
    let mut d = Diagram::new("process-matrix");
    let nw = d.add_node("W", "W", w.underlying.input().clone(), w.underlying.output().clone());
    let mut env = BTreeMap::from([("W".to_string(), w.underlying.clone())]);
    let np = l.past.len();
    for k in 0..np {
        d.add_wire(Port::BoundIn(k), Port::NodeIn(nw, k));
    }
    let (mut next_in, mut next_out) = (np, 0);
    for (name, f, slot_in, slot_out) in [("A", &a, Slot::AIn, Slot::AOut), ("B", &b, Slot::BIn, Slot::BOut)] {
        let p = f.process;
        let n = d.add_node(name, name, p.input().clone(), p.output().clone());
        env.insert(name.to_string(), p.clone());
        let ins = w.outputs_of(slot_in);
        let outs = w.outputs_of(slot_out);
        for (i, &k) in ins.iter().enumerate() {
            d.add_wire(Port::NodeOut(nw, k), Port::NodeIn(n, i));
        }
        for (j, &k) in outs.iter().enumerate() {
            d.add_wire(Port::NodeOut(n, j), Port::NodeOut(nw, k));
        }
        for e in 0..f.extra_in.len() {
            d.add_wire(Port::BoundIn(next_in), Port::NodeIn(n, ins.len() + e));
            next_in += 1;
        }
        for e in 0..f.extra_out.len() {
            d.add_wire(Port::NodeOut(n, outs.len() + e), Port::BoundOut(next_out));
            next_out += 1;
        }
    }
    for k in w.outputs_of(Slot::Future) {
        d.add_wire(Port::NodeOut(nw, k), Port::BoundOut(next_out));
        next_out += 1;
    }
    let input = l.past.tensor(&a.extra_in).tensor(&b.extra_in);
    let output = a.extra_out.tensor(&b.extra_out).tensor(&l.future);
    let d = d.with_signature(input, output);
    Ok(evaluate(&d, &env, exec)?)
}

/// Fill slot A with `a: A_in -> A_out` and slot B with `b: B_in -> B_out`.
pub fn apply_process_matrix(
    w: &HigherOrderMap,
    a: &ProcessTensor,
    b: &ProcessTensor,
    exec: Execution,
) -> Result<ProcessTensor, HigherOrderError> {
    let l = &w.layout;
    expect_slot(Slot::AIn, &l.a_in, a.input())?;
    expect_slot(Slot::AOut, &l.a_out, a.output())?;
    expect_slot(Slot::BIn, &l.b_in, b.input())?;
    expect_slot(Slot::BOut, &l.b_out, b.output())?;
    let none = SystemType::trivial;
    fill(
        w,
        Filler { process: a, extra_in: none(), extra_out: none() },
        Filler { process: b, extra_in: none(), extra_out: none() },
        exec,
    )
}

/// Plug swaps into both slots, recovering the channel
/// `past ⊗ A_out ⊗ B_out -> A_in ⊗ B_in ⊗ future`.
pub fn plug_swaps(w: &HigherOrderMap, exec: Execution) -> Result<ProcessTensor, HigherOrderError> {
    let l = &w.layout;
    let sa = swap(&l.a_in, &l.a_out);
    let sb = swap(&l.b_in, &l.b_out);
    fill(
        w,
        Filler { process: &sa, extra_in: l.a_out.clone(), extra_out: l.a_in.clone() },
        Filler { process: &sb, extra_in: l.b_out.clone(), extra_out: l.b_in.clone() },
        exec,
    )
}

/// The channel of a causally ordered circuit
/// `c1: past -> A_in ⊗ M1`, `c2: A_out ⊗ M1 -> B_in ⊗ M2`, `c3: B_out ⊗ M2 -> future`
/// with both slots filled by swaps.
pub fn circuit_channel(
    layout: &ProcessMatrixLayout,
    c1: &ProcessTensor,
    c2: &ProcessTensor,
    c3: &ProcessTensor,
) -> Result<ProcessTensor, HigherOrderError> {
    let l = layout;
    let (np, nai, nao, nbi, nbo) = (l.past.len(), l.a_in.len(), l.a_out.len(), l.b_in.len(), l.b_out.len());
    expect_slot(Slot::Past, &l.past, c1.input())?;
    let m1 = c1.output().select(&(nai..c1.output().len().max(nai)).collect::<Vec<_>>());
    expect_slot(Slot::AIn, &l.a_in.tensor(&m1), c1.output())?;
    expect_slot(Slot::AOut, &l.a_out.tensor(&m1), c2.input())?;
    let m2 = c2.output().select(&(nbi..c2.output().len().max(nbi)).collect::<Vec<_>>());
    expect_slot(Slot::BIn, &l.b_in.tensor(&m2), c2.output())?;
    expect_slot(Slot::BOut, &l.b_out.tensor(&m2), c3.input())?;
    expect_slot(Slot::Future, &l.future, c3.output())?;

    let mut d = Diagram::new("circuit");
    let mut env = BTreeMap::new();
    let mut node = |d: &mut Diagram, name: &str, p: &ProcessTensor| {
        env.insert(name.to_string(), p.clone());
        d.add_node(name, name, p.input().clone(), p.output().clone())
    };
    let (n1, n2, n3) = (node(&mut d, "c1", c1), node(&mut d, "c2", c2), node(&mut d, "c3", c3));
    for k in 0..np {
        d.add_wire(Port::BoundIn(k), Port::NodeIn(n1, k));
    }
    for i in 0..nai {
        d.add_wire(Port::NodeOut(n1, i), Port::BoundOut(i));
    }
    for m in 0..m1.len() {
        d.add_wire(Port::NodeOut(n1, nai + m), Port::NodeIn(n2, nao + m));
    }
    for j in 0..nao {
        d.add_wire(Port::BoundIn(np + j), Port::NodeIn(n2, j));
    }
    for i in 0..nbi {
        d.add_wire(Port::NodeOut(n2, i), Port::BoundOut(nai + i));
    }
    for m in 0..m2.len() {
        d.add_wire(Port::NodeOut(n2, nbi + m), Port::NodeIn(n3, nbo + m));
    }
    for j in 0..nbo {
        d.add_wire(Port::BoundIn(np + nao + j), Port::NodeIn(n3, j));
    }
    for k in 0..l.future.len() {
        d.add_wire(Port::NodeOut(n3, k), Port::BoundOut(nai + nbi + k));
    }
    let d = d.with_signature(l.channel_input(), l.channel_output());
    Ok(evaluate(&d, &env, Execution::Sequential)?)
}

/// Layout and channel of the ordered process matrix whose circuit is pure
/// wires: `past = A_in`, `A_out = B_in`, `B_out = future`. Filling it with
/// `a` and `b` gives `b ∘ a`.
pub fn ordered_identity(a_in: &SystemType, a_out: &SystemType, b_out: &SystemType) -> (ProcessMatrixLayout, ProcessTensor) {
    let layout = ProcessMatrixLayout {
        past: a_in.clone(),
        a_in: a_in.clone(),
        a_out: a_out.clone(),
        b_in: a_out.clone(),
        b_out: b_out.clone(),
        future: b_out.clone(),
    };
    let w = circuit_channel(&layout, &identity(a_in), &identity(a_out), &identity(b_out)).expect("identity circuit is well typed");
    (layout, w)
}
