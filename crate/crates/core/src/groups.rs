//! Finite groups, unitary representations and covariant processes.
//!
//! A [`Representation`] stores one unitary per group element acting on the
//! whole system; classical factors must carry the trivial action. A process
//! `f: A -> B` is an intertwiner when its Choi operator is invariant under
//! conjugation by `conj(U_A(g)) ⊗ U_B(g)` for every `g`.
//!
//! Over oriented wires, `Up` factors are causal and `Down` factors
//! retrocausal. [`no_signalling`] checks both directions: discarding the
//! causal outputs must leave `𝟙 ⊗ F_r` over the causal inputs, and feeding
//! `𝟙` into the retrocausal inputs must leave `F_c ⊗ 𝟙` over the retrocausal
//! outputs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{kron, partial_trace, permute_factors, CMatrix, Tolerances, C64, ONE, ZERO};
use crate::par::{map_slice, Execution};
use crate::systems::{
    digits_of, is_causal, is_cp, preserves_identity, Orientation, ProcessTensor, SystemType, WireFactor,
};
use crate::theories::{CheckOutcome, TheoryName, Verdict};

/// A finite group given by its Cayley table: `table[a][b]` is the index of `a·b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GroupViolation {
    #[error("table is not {order}x{order} with entries below {order}")]
    BadTable { order: usize },
    #[error("identity index {0} out of range")]
    BadIdentity(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    Associativity(usize, usize, usize),
    #[error("identity law fails for element {0}")]
    Unit(usize),
    #[error("element {0} has no inverse")]
    Inverse(usize),
}

impl FiniteGroup {
    /// Table without axiom checks; see [`validate_group`].
    pub fn from_table(table: Vec<Vec<usize>>, identity: usize) -> Self {
        FiniteGroup { table, identity }
    }

    /// Table that passed [`validate_group`].
    pub fn new(table: Vec<Vec<usize>>, identity: usize) -> Result<Self, Vec<GroupViolation>> {
        let g = FiniteGroup { table, identity };
        let v = validate_group(&g);
        if v.is_empty() {
            Ok(g)
        } else {
            Err(v)
        }
    }

    pub fn trivial() -> Self {
        FiniteGroup { table: vec![vec![0]], identity: 0 }
    }

    /// `Z_n` with element `k` standing for `k mod n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order zero");
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup { table, identity: 0 }
    }

    /// Symmetric group on `n` letters, elements in lexicographic order of
    /// their permutations, `a * b` applying `b` first.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("closed under composition");
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| index(&b.iter().map(|&i| a[i]).collect::<Vec<_>>())).collect())
            .collect();
        FiniteGroup { table, identity: 0 }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        (0..self.order()).find(|&b| self.table[a][b] == self.identity && self.table[b][a] == self.identity)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// Exhaustive check of the group axioms; an empty list means the table is a group.
pub fn validate_group(g: &FiniteGroup) -> Vec<GroupViolation> {
    let n = g.order();
    if n == 0 || g.table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
        return vec![GroupViolation::BadTable { order: n }];
    }
    if g.identity >= n {
        return vec![GroupViolation::BadIdentity(g.identity)];
    }
    let mut out = Vec::new();
    'assoc: for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                    out.push(GroupViolation::Associativity(a, b, c));
                    break 'assoc;
                }
            }
        }
    }
    for a in 0..n {
        if g.mul(g.identity, a) != a || g.mul(a, g.identity) != a {
            out.push(GroupViolation::Unit(a));
        }
        if g.inverse(a).is_none() {
            out.push(GroupViolation::Inverse(a));
        }
    }
    out
}

/// A unitary action of `group` on `system`: `action[g]` is a `total_dim` square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    group: FiniteGroup,
    system: SystemType,
    action: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error("expected {expected} matrices of side {side}, found {found}")]
    Shape { expected: usize, side: usize, found: String },
    #[error("representations are over different groups")]
    GroupMismatch,
    #[error("representation is on {rep}, process boundary is {process}")]
    SystemMismatch { rep: String, process: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RepViolation {
    Unit { residual: f64 },
    Unitarity { element: usize, residual: f64 },
    Homomorphism { a: usize, b: usize, residual: f64 },
    ClassicalAction { element: usize, factor: usize },
}

impl fmt::Display for RepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepViolation::Unit { residual } => write!(f, "U(e) != 1 (residual {residual:.3e})"),
            RepViolation::Unitarity { element, residual } => {
                write!(f, "U({element}) is not unitary (residual {residual:.3e})")
            }
            RepViolation::Homomorphism { a, b, residual } => {
                write!(f, "U({a})U({b}) != U({a}{b}) (residual {residual:.3e})")
            }
            RepViolation::ClassicalAction { element, factor } => {
                write!(f, "U({element}) acts nontrivially on classical factor {factor}")
            }
        }
    }
}

impl Representation {
    pub fn new(group: FiniteGroup, system: SystemType, action: Vec<CMatrix>) -> Result<Self, RepError> {
        let side = system.total_dim();
        if action.len() != group.order() || action.iter().any(|m| m.rows() != side || m.cols() != side) {
            let found = action.iter().map(|m| format!("{}x{}", m.rows(), m.cols())).collect::<Vec<_>>().join(", ");
            return Err(RepError::Shape { expected: group.order(), side, found: format!("[{found}]") });
        }
        Ok(Representation { group, system, action })
    }

    /// Action given on the quantum factors only (in order), extended by the
    /// identity on classical factors.
    pub fn on_quantum(group: FiniteGroup, system: SystemType, quantum_action: Vec<CMatrix>) -> Result<Self, RepError> {
        let factors = system.factors();
        let q: Vec<usize> = (0..factors.len()).filter(|&k| !factors[k].is_classical()).collect();
        let c: Vec<usize> = (0..factors.len()).filter(|&k| factors[k].is_classical()).collect();
        let dq: usize = q.iter().map(|&k| factors[k].dim()).product();
        let dc: usize = c.iter().map(|&k| factors[k].dim()).product();
        if quantum_action.iter().any(|m| m.rows() != dq || m.cols() != dq) {
            let found = quantum_action.iter().map(|m| format!("{}x{}", m.rows(), m.cols())).collect::<Vec<_>>().join(", ");
            return Err(RepError::Shape { expected: group.order(), side: dq, found: format!("[{found}]") });
        }
        // layout [quantum..., classical...] -> original order
        let ordered: Vec<usize> = q.iter().chain(&c).copied().collect();
        let dims: Vec<usize> = ordered.iter().map(|&k| factors[k].dim()).collect();
        let mut back = vec![0; ordered.len()];
        for (pos, &k) in ordered.iter().enumerate() {
            back[k] = pos;
        }
        let action = quantum_action
            .iter()
            .map(|u| {
                let full = kron(u, &CMatrix::identity(dc));
                permute_factors(&full, &dims, &back).expect("dims are consistent")
            })
            .collect();
        Representation::new(group, system, action)
    }

    pub fn trivial(group: FiniteGroup, system: SystemType) -> Self {
        let d = system.total_dim();
        let action = vec![CMatrix::identity(d); group.order()];
        Representation { group, system, action }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn system(&self) -> &SystemType {
        &self.system
    }

    pub fn action(&self, g: usize) -> &CMatrix {
        &self.action[g]
    }

    pub fn actions(&self) -> &[CMatrix] {
        &self.action
    }
}

/// Homomorphism, unit and unitarity checks over all elements, plus trivial
/// action on classical factors.
pub fn validate_representation(r: &Representation, tol: &Tolerances) -> Vec<RepViolation> {
    let g = &r.group;
    let d = r.system.total_dim();
    let eye = CMatrix::identity(d);
    let bound = |m: &CMatrix| tol.eq_rel * 1f64.max(m.max_norm());
    let mut out = Vec::new();
    let unit = r.action[g.identity()].max_diff(&eye);
    if unit > tol.eq_rel {
        out.push(RepViolation::Unit { residual: unit });
    }
    for (e, u) in r.action.iter().enumerate() {
        let res = (&u.adjoint() * u).max_diff(&eye);
        if res > bound(u) {
            out.push(RepViolation::Unitarity { element: e, residual: res });
        }
    }
    for a in 0..g.order() {
        for b in 0..g.order() {
            let prod = &r.action[a] * &r.action[b];
            let res = prod.max_diff(&r.action[g.mul(a, b)]);
            if res > bound(&prod) {
                out.push(RepViolation::Homomorphism { a, b, residual: res });
            }
        }
    }
    let dims = r.system.dims();
    for (k, w) in r.system.factors().iter().enumerate() {
        if !w.is_classical() {
            continue;
        }
        for (e, u) in r.action.iter().enumerate() {
            if !trivial_on_factor(u, &dims, k, bound(u)) {
                out.push(RepViolation::ClassicalAction { element: e, factor: k });
            }
        }
    }
    out
}

/// `u = 𝟙_k ⊗ v` for some `v` on the remaining factors.
fn trivial_on_factor(u: &CMatrix, dims: &[usize], k: usize, eps: f64) -> bool {
    let n = u.rows();
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    let stride: usize = dims[k + 1..].iter().product();
    for r in 0..n {
        digits_of(r, dims, &mut rd);
        for c in 0..n {
            digits_of(c, dims, &mut cd);
            let z = u[(r, c)];
            if rd[k] != cd[k] {
                if z.norm() > eps {
                    return false;
                }
            } else if rd[k] > 0 {
                let base = u[(r - rd[k] * stride, c - cd[k] * stride)];
                if (z - base).norm() > eps {
                    return false;
                }
            }
        }
    }
    true
}

/// `S_n` permuting the computational basis of `Q(n)`.
pub fn permutation_rep(n: usize) -> Representation {
    let action = permutations(n)
        .iter()
        .map(|p| CMatrix::from_fn(n, n, |r, c| if p[c] == r { ONE } else { ZERO }))
        .collect();
    Representation::new(FiniteGroup::symmetric(n), SystemType::quantum(n), action).expect("shapes match")
}

pub fn tensor_rep(a: &Representation, b: &Representation) -> Result<Representation, RepError> {
    if a.group != b.group {
        return Err(RepError::GroupMismatch);
    }
    let action = a.action.iter().zip(&b.action).map(|(x, y)| kron(x, y)).collect();
    Ok(Representation { group: a.group.clone(), system: a.system.tensor(&b.system), action })
}

/// Entrywise conjugate action on the orientation-flipped system.
pub fn conjugate_rep(a: &Representation) -> Representation {
    Representation { group: a.group.clone(), system: a.system.dual(), action: a.action.iter().map(CMatrix::conj).collect() }
}

fn check_boundary(f: &ProcessTensor, rin: &Representation, rout: &Representation) -> Result<(), RepError> {
    if rin.group != rout.group {
        return Err(RepError::GroupMismatch);
    }
    for (rep, sys) in [(rin, f.input()), (rout, f.output())] {
        if rep.system.dims() != sys.dims() {
            return Err(RepError::SystemMismatch { rep: rep.system.to_string(), process: sys.to_string() });
        }
    }
    Ok(())
}

fn covariance_conjugator(rin: &Representation, rout: &Representation, g: usize) -> CMatrix {
    kron(&rin.action[g].conj(), &rout.action[g])
}

/// `max_g ‖W_g J W_g† − J‖_max` with `W_g = conj(U_in(g)) ⊗ U_out(g)`.
pub fn covariance_residual(
    f: &ProcessTensor,
    rin: &Representation,
    rout: &Representation,
    exec: Execution,
) -> Result<f64, RepError> {
    check_boundary(f, rin, rout)?;
    let elements: Vec<usize> = (0..rin.group.order()).collect();
    let res = map_slice(exec, &elements, |&g| {
        let w = covariance_conjugator(rin, rout, g);
        (&(&w * f.choi()) * &w.adjoint()).max_diff(f.choi())
    });
    Ok(res.into_iter().fold(0.0, f64::max))
}

pub fn is_intertwiner(
    f: &ProcessTensor,
    rin: &Representation,
    rout: &Representation,
    tol: &Tolerances,
) -> Result<bool, RepError> {
    let r = covariance_residual(f, rin, rout, Execution::Sequential)?;
    Ok(r <= tol.eq_rel * 1f64.max(f.choi().max_norm()))
}

/// Group average `|G|⁻¹ Σ_g W_g J W_g†`, the closest intertwiner in the
/// Hilbert-Schmidt sense.
pub fn twirl(f: &ProcessTensor, rin: &Representation, rout: &Representation) -> Result<ProcessTensor, RepError> {
    check_boundary(f, rin, rout)?;
    let n = rin.group.order();
    let mut acc = CMatrix::zeros(f.choi().rows(), f.choi().cols());
    for g in 0..n {
        let w = covariance_conjugator(rin, rout, g);
        acc = &acc + &(&(&w * f.choi()) * &w.adjoint());
    }
    Ok(ProcessTensor::from_choi_unchecked(f.input().clone(), f.output().clone(), acc.scale_real(1.0 / n as f64))
        .expect("shape is unchanged"))
}

/// Which boundary factors are causal (`Up`) and which retrocausal (`Down`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedPartition {
    pub causal_inputs: Vec<usize>,
    pub retro_inputs: Vec<usize>,
    pub causal_outputs: Vec<usize>,
    pub retro_outputs: Vec<usize>,
}

impl OrientedPartition {
    pub fn from_orientations(f: &ProcessTensor) -> Self {
        let split = |s: &SystemType| -> (Vec<usize>, Vec<usize>) {
            (0..s.len()).partition(|&k| s.factors()[k].orientation == Orientation::Up)
        };
        let (causal_inputs, retro_inputs) = split(f.input());
        let (causal_outputs, retro_outputs) = split(f.output());
        OrientedPartition { causal_inputs, retro_inputs, causal_outputs, retro_outputs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionVerdict {
    pub passed: bool,
    pub residual: f64,
    pub detail: String,
}

/// Outcome of [`no_signalling`], with the extracted marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSignalling {
    pub causal_to_retro: DirectionVerdict,
    pub retro_to_causal: DirectionVerdict,
    /// Causal inputs to causal outputs, with `𝟙` fed to the retrocausal inputs
    /// and the retrocausal outputs normalised away.
    pub f_c: ProcessTensor,
    /// Retrocausal inputs to retrocausal outputs, with the causal outputs
    /// discarded and the causal inputs normalised away.
    pub f_r: ProcessTensor,
}

impl NoSignalling {
    pub fn passed(&self) -> bool {
        self.causal_to_retro.passed && self.retro_to_causal.passed
    }
}

pub fn no_signalling(f: &ProcessTensor, p: &OrientedPartition, tol: &Tolerances) -> NoSignalling {
    let in_perm: Vec<usize> = p.causal_inputs.iter().chain(&p.retro_inputs).copied().collect();
    let out_perm: Vec<usize> = p.causal_outputs.iter().chain(&p.retro_outputs).copied().collect();
    let g = crate::systems::permute_boundary(f, &in_perm, &out_perm).expect("partition covers the boundary");
    let pick = |s: &SystemType, idx: &[usize]| s.select(idx);
    let ci = pick(f.input(), &p.causal_inputs);
    let ri = pick(f.input(), &p.retro_inputs);
    let co = pick(f.output(), &p.causal_outputs);
    let ro = pick(f.output(), &p.retro_outputs);
    let (dci, dri, dco, dro) = (ci.total_dim(), ri.total_dim(), co.total_dim(), ro.total_dim());
    // factor order of g's choi: [ci, ri, co, ro]
    let dims = [dci, dri, dco, dro];
    let j = g.choi();
    let eps = tol.eq_rel * 1f64.max(j.max_norm());

    let g1 = partial_trace(j, &dims, &[0, 1, 3]).expect("dims are consistent");
    let fr = partial_trace(&g1, &[dci, dri, dro], &[1, 2]).expect("dims are consistent").scale_real(1.0 / dci as f64);
    let r1 = g1.max_diff(&kron(&CMatrix::identity(dci), &fr));

    let g2 = partial_trace(j, &dims, &[0, 2, 3]).expect("dims are consistent");
    let fc = partial_trace(&g2, &[dci, dco, dro], &[0, 1]).expect("dims are consistent").scale_real(1.0 / dro as f64);
    let r2 = g2.max_diff(&kron(&fc, &CMatrix::identity(dro)));

    let f_r = ProcessTensor::from_choi_unchecked(ri, ro, fr).expect("shape is consistent");
    let f_c = ProcessTensor::from_choi_unchecked(ci, co, fc).expect("shape is consistent");
    let verdict = |r: f64, what: &str| DirectionVerdict {
        passed: r <= eps,
        residual: r,
        detail: if r <= eps { String::new() } else { format!("{what} (residual {r:.3e})") },
    };
    NoSignalling {
        causal_to_retro: verdict(r1, "causal inputs signal to retrocausal wires"),
        retro_to_causal: verdict(r2, "retrocausal inputs signal to causal wires"),
        f_c,
        f_r,
    }
}

/// Classical PR box on causal `x`, retrocausal `b` to causal `a`, retrocausal
/// `y`: uniform outcomes with `a ⊕ b = x ∧ y`.
pub fn pr_box() -> ProcessTensor {
    let c = |o| WireFactor { orientation: o, ..WireFactor::classical(2) };
    let sys = SystemType::new(vec![c(Orientation::Up), c(Orientation::Down)]);
    ProcessTensor::from_fn(sys.clone(), sys, |k, b| {
        let (x, bb, a, y) = (k[0], k[1], k[2], k[3]);
        if k == b && (a ^ bb) == (x & y) {
            C64::new(0.5, 0.0)
        } else {
            ZERO
        }
    })
    .expect("shape is consistent")
}

/// Membership in the covariant no-signalling theory: complete positivity,
/// covariance, both no-signalling directions, and the causal / retrocausal
/// character of the extracted marginals.
pub fn qpart_membership(
    f: &ProcessTensor,
    rin: &Representation,
    rout: &Representation,
    tol: &Tolerances,
) -> Verdict {
    let mut checks = vec![CheckOutcome::new("cp", is_cp(f, tol), "")];
    let cov = match covariance_residual(f, rin, rout, Execution::Sequential) {
        Ok(r) => CheckOutcome::new(
            "intertwiner",
            r <= tol.eq_rel * 1f64.max(f.choi().max_norm()),
            format!("residual {r:.3e}"),
        ),
        Err(e) => CheckOutcome::new("intertwiner", false, e.to_string()),
    };
    checks.push(cov);
    let ns = no_signalling(f, &OrientedPartition::from_orientations(f), tol);
    checks.push(CheckOutcome::new("causal-to-retro", ns.causal_to_retro.passed, ns.causal_to_retro.detail.clone()));
    checks.push(CheckOutcome::new("retro-to-causal", ns.retro_to_causal.passed, ns.retro_to_causal.detail.clone()));
    checks.push(CheckOutcome::new("causal-marginal", is_causal(&ns.f_c, tol), ""));
    checks.push(CheckOutcome::new("retrocausal-marginal", preserves_identity(&ns.f_r, tol), ""));
    Verdict::from_checks(TheoryName::QPart, checks)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct RepFileError {
    pub line: usize,
    pub message: String,
}

/// Parse a complex number such as `1`, `-0.5i`, `0.3+2i` or `1e-3-4.5i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    s.trim().parse::<C64>().ok()
}

/// Parse a list of complex numbers separated by commas or whitespace,
/// optionally wrapped in brackets.
pub fn parse_complex_list(s: &str) -> Option<Vec<C64>> {
    let body = s.trim().trim_start_matches('[').trim_end_matches(']');
    body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(parse_complex).collect()
}

/// Read a representation from its text form: a line `order identity`, then
/// `order` Cayley-table rows, then one line per element with the row-major
/// entries of its unitary on the quantum factors of `system`. `#` starts a
/// comment.
pub fn parse_rep_file(text: &str, system: &SystemType, tol: &Tolerances) -> Result<Representation, RepFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| RepFileError { line, message };
    let (l0, head) = lines.next().ok_or_else(|| err(1, "empty representation file".into()))?;
    let nums: Vec<usize> = head
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(l0, format!("expected integer, found `{t}`"))))
        .collect::<Result<_, _>>()?;
    let [order, identity] = nums[..] else {
        return Err(err(l0, "expected `order identity`".into()));
    };
    let mut table = Vec::with_capacity(order);
    for _ in 0..order {
        let (ln, row) = lines.next().ok_or_else(|| err(l0, "missing Cayley table rows".into()))?;
        let row: Vec<usize> = row
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| err(ln, format!("expected integer, found `{t}`"))))
            .collect::<Result<_, _>>()?;
        table.push(row);
    }
    let group = FiniteGroup::new(table, identity)
        .map_err(|v| err(l0, v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))?;
    let dq: usize = system.factors().iter().filter(|w| !w.is_classical()).map(|w| w.dim()).product();
    let mut mats = Vec::with_capacity(order);
    let mut last = l0;
    for e in 0..order {
        let (ln, row) = lines.next().ok_or_else(|| err(last, format!("missing matrix for element {e}")))?;
        last = ln;
        let entries = parse_complex_list(row).ok_or_else(|| err(ln, "malformed complex list".into()))?;
        if entries.len() != dq * dq {
            return Err(err(ln, format!("expected {} entries, found {}", dq * dq, entries.len())));
        }
        mats.push(CMatrix::new(dq, dq, entries).expect("length checked"));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "unexpected trailing content".into()));
    }
    let rep = Representation::on_quantum(group, system.clone(), mats).map_err(|e| err(last, e.to_string()))?;
    let v = validate_representation(&rep, tol);
    if let Some(first) = v.first() {
        return Err(err(last, first.to_string()));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{cap, dagger_h, identity, WireFactor};
    use crate::theories::depolarizer;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn z2_on_qubit() -> Representation {
        let z = CMatrix::diag_real(&[1.0, -1.0]);
        Representation::new(FiniteGroup::cyclic(2), SystemType::quantum(2), vec![CMatrix::identity(2), z]).unwrap()
    }

    #[test]
    fn symmetric_group_and_permutation_rep() {
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert!(validate_group(&s3).is_empty());
        assert!(validate_representation(&permutation_rep(3), &tol()).is_empty());
        assert_ne!(s3.mul(1, 2), s3.mul(2, 1));
    }

    #[test]
    fn z2_table_and_corruption() {
        assert!(validate_group(&FiniteGroup::cyclic(2)).is_empty());
        let bad = FiniteGroup::from_table(vec![vec![0, 1], vec![0, 0]], 0);
        let v = validate_group(&bad);
        assert!(v.iter().any(|x| matches!(x, GroupViolation::Associativity(..))), "{v:?}");
    }

    #[test]
    fn z2_representation_checks() {
        let r = z2_on_qubit();
        assert!(validate_representation(&r, &tol()).is_empty());
        let half = Representation::new(
            FiniteGroup::cyclic(2),
            SystemType::quantum(2),
            vec![CMatrix::identity(2), CMatrix::diag_real(&[0.5, -0.5])],
        )
        .unwrap();
        let v = validate_representation(&half, &tol());
        assert!(v.iter().any(|x| matches!(x, RepViolation::Unitarity { element: 1, .. })));
    }

    #[test]
    fn conjugate_and_tensor() {
        let r = z2_on_qubit();
        let c = conjugate_rep(&r);
        assert_eq!(c.actions(), r.actions());
        assert_eq!(c.system().factors()[0].orientation, Orientation::Down);

        let s = CMatrix::diag(&[ONE, C64::new(0.0, 1.0)]);
        let z4 = FiniteGroup::cyclic(4);
        let powers: Vec<CMatrix> = (0..4)
            .scan(CMatrix::identity(2), |acc, _| {
                let cur = acc.clone();
                *acc = &*acc * &s;
                Some(cur)
            })
            .collect();
        let rs = Representation::new(z4, SystemType::quantum(2), powers).unwrap();
        assert!(validate_representation(&rs, &tol()).is_empty());
        assert!(conjugate_rep(&rs).action(1).approx_eq(&CMatrix::diag(&[ONE, C64::new(0.0, -1.0)]), &tol()));

        let zz = tensor_rep(&r, &r).unwrap();
        let z = CMatrix::diag_real(&[1.0, -1.0]);
        assert!(zz.action(1).approx_eq(&kron(&z, &z), &tol()));
    }

    #[test]
    fn classical_factor_must_be_trivial() {
        let sys = SystemType::new(vec![WireFactor::classical(2), WireFactor::quantum(2)]);
        let z = CMatrix::diag_real(&[1.0, -1.0]);
        let r = Representation::on_quantum(FiniteGroup::cyclic(2), sys.clone(), vec![CMatrix::identity(2), z.clone()]).unwrap();
        assert!(validate_representation(&r, &tol()).is_empty());
        assert!(r.action(1).approx_eq(&kron(&CMatrix::identity(2), &z), &tol()));
        let flip = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let bad = Representation::new(FiniteGroup::cyclic(2), sys, vec![CMatrix::identity(4), kron(&flip, &CMatrix::identity(2))]).unwrap();
        let v = validate_representation(&bad, &tol());
        assert!(v.iter().any(|x| matches!(x, RepViolation::ClassicalAction { factor: 0, .. })));
    }

    #[test]
    fn intertwiner_examples() {
        let r = z2_on_qubit();
        let q = SystemType::quantum(2);
        assert!(is_intertwiner(&depolarizer(&q, &q), &r, &r, &tol()).unwrap());
        let dephase = ProcessTensor::from_kraus(
            q.clone(),
            q.clone(),
            &[CMatrix::diag_real(&[1.0, 0.0]), CMatrix::diag_real(&[0.0, 1.0])],
        )
        .unwrap();
        assert!(is_intertwiner(&dephase, &r, &r, &tol()).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = ProcessTensor::unitary_channel(q.clone(), &CMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()).unwrap();
        assert!(!is_intertwiner(&had, &r, &r, &tol()).unwrap());
        assert!(is_intertwiner(&identity(&q), &r, &r, &tol()).unwrap());
    }

    #[test]
    fn cap_intertwines_rep_with_conjugate() {
        let s = CMatrix::diag(&[ONE, C64::new(0.0, 1.0)]);
        let powers: Vec<CMatrix> = vec![CMatrix::identity(2), s.clone(), &s * &s, &(&s * &s) * &s];
        let r = Representation::new(FiniteGroup::cyclic(4), SystemType::quantum(2), powers).unwrap();
        let pair = tensor_rep(&r, &conjugate_rep(&r)).unwrap();
        let triv = Representation::trivial(FiniteGroup::cyclic(4), SystemType::trivial());
        let c = cap(&SystemType::quantum(2));
        assert!(covariance_residual(&c, &pair, &triv, Execution::Parallel).unwrap() < 1e-12);
        let same = tensor_rep(&r, &r).unwrap();
        assert!(covariance_residual(&c, &same, &triv, Execution::Sequential).unwrap() > 0.5);
    }

    fn c2(o: Orientation) -> WireFactor {
        WireFactor { orientation: o, ..WireFactor::classical(2) }
    }

    #[test]
    fn classical_cap_signals() {
        let sys = SystemType::new(vec![c2(Orientation::Up), c2(Orientation::Down)]);
        let f = crate::systems::cap_on(&sys.select(&[0]), &sys.select(&[1])).unwrap();
        let ns = no_signalling(&f, &OrientedPartition::from_orientations(&f), &tol());
        assert!(!ns.causal_to_retro.passed);
        assert!(ns.retro_to_causal.passed);
    }

    #[test]
    fn pr_box_is_no_signalling() {
        let f = pr_box();
        let ns = no_signalling(&f, &OrientedPartition::from_orientations(&f), &tol());
        assert!(ns.passed(), "{ns:?}");
        let product = crate::systems::compose_par(&ns.f_c, &ns.f_r);
        let reordered = crate::systems::permute_boundary(&product, &[0, 1], &[0, 1]).unwrap();
        assert!(!reordered.approx_eq(&f, &tol()));
        let triv_in = Representation::trivial(FiniteGroup::trivial(), f.input().clone());
        let triv_out = Representation::trivial(FiniteGroup::trivial(), f.output().clone());
        assert!(qpart_membership(&f, &triv_in, &triv_out, &tol()).member);
    }

    #[test]
    fn product_recovers_factors() {
        let mut rng = crate::random::trial_rng(3, 0, 0);
        let up = SystemType::quantum(2);
        let down = SystemType::quantum(2).dual();
        let fc = crate::random::random_cptp(&mut rng, &up, &up, 2);
        let fr = dagger_h(&crate::random::random_cptp(&mut rng, &down, &down, 2));
        let f = crate::systems::compose_par(&fc, &fr);
        let ns = no_signalling(&f, &OrientedPartition::from_orientations(&f), &tol());
        assert!(ns.passed());
        assert!(ns.f_c.approx_eq(&fc, &tol()));
        assert!(ns.f_r.approx_eq(&fr, &tol()));
    }

    #[test]
    fn rep_file_round_trip() {
        let text = "# Z2 acting by Z\n2 0\n0 1\n1 0\n[1, 0, 0, 1]\n[1, 0, 0, -1]\n";
        let r = parse_rep_file(text, &SystemType::quantum(2), &tol()).unwrap();
        assert_eq!(r, z2_on_qubit());
        let bad = "2 0\n0 1\n1 0\n[1, 0, 0, 1]\n[0.5, 0, 0, -1]\n";
        assert_eq!(parse_rep_file(bad, &SystemType::quantum(2), &tol()).unwrap_err().line, 5);
        assert_eq!(parse_complex("0.3+2i"), Some(C64::new(0.3, 2.0)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
    }
}
