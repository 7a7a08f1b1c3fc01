//! System types and processes.
//!
//! A process between system types is stored as its Choi operator with index
//! order `input ⊗ output`. The action on an input operator `X` is
//!
//! ```text
//! E(X) = Tr_in[(Xᵀ ⊗ 𝟙_out) · J]          J[(i,a),(j,b)] = E(|i⟩⟨j|)[a,b]
//! ```
//!
//! Classical wires are decohered quantum wires: a Choi operator must vanish on
//! entries whose ket and bra indices differ on any classical factor.
//! Orientation is carried as metadata only and never changes numerics.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    self, kron, partial_trace, permute_factors, CMatrix, LinalgError, Tolerances, C64, ONE, ZERO,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WireKind {
    Quantum(usize),
    Classical(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Up,
    Down,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WireFactor {
    pub kind: WireKind,
    pub orientation: Orientation,
}

impl WireFactor {
    pub fn quantum(dim: usize) -> Self {
        assert!(dim >= 1, "quantum dimension must be positive");
        WireFactor { kind: WireKind::Quantum(dim), orientation: Orientation::Up }
    }

    pub fn classical(size: usize) -> Self {
        assert!(size >= 1, "classical size must be positive");
        WireFactor { kind: WireKind::Classical(size), orientation: Orientation::Up }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            WireKind::Quantum(d) | WireKind::Classical(d) => d,
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.kind, WireKind::Classical(_))
    }

    pub fn dual(&self) -> Self {
        WireFactor { kind: self.kind, orientation: self.orientation.flip() }
    }

    /// Same kind and dimension; orientation ignored.
    pub fn same_carrier(&self, other: &WireFactor) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for WireFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.kind {
            WireKind::Quantum(d) => format!("Q({d})"),
            WireKind::Classical(n) => format!("C({n})"),
        };
        match self.orientation {
            Orientation::Up => write!(f, "{base}"),
            Orientation::Down => write!(f, "dual({base})"),
        }
    }
}

/// Ordered list of wire factors. The empty list is the trivial system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SystemType {
    factors: Vec<WireFactor>,
}

impl SystemType {
    pub fn new(factors: Vec<WireFactor>) -> Self {
        SystemType { factors }
    }

    pub fn trivial() -> Self {
        SystemType::default()
    }

    pub fn quantum(dim: usize) -> Self {
        SystemType::new(vec![WireFactor::quantum(dim)])
    }

    pub fn classical(size: usize) -> Self {
        SystemType::new(vec![WireFactor::classical(size)])
    }

    pub fn factors(&self) -> &[WireFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(WireFactor::dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(WireFactor::dim).product()
    }

    pub fn tensor(&self, other: &SystemType) -> SystemType {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        SystemType { factors }
    }

    pub fn dual(&self) -> SystemType {
        SystemType { factors: self.factors.iter().map(WireFactor::dual).collect() }
    }

    pub fn select(&self, idx: &[usize]) -> SystemType {
        SystemType { factors: idx.iter().map(|&i| self.factors[i]).collect() }
    }

    pub fn with_orientation(&self, o: Orientation) -> SystemType {
        SystemType {
            factors: self.factors.iter().map(|f| WireFactor { kind: f.kind, orientation: o }).collect(),
        }
    }

    /// First factor position where the two types disagree, if any.
    pub fn first_mismatch(&self, other: &SystemType) -> Option<usize> {
        let n = self.len().max(other.len());
        (0..n).find(|&i| self.factors.get(i) != other.factors.get(i))
    }
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (i, w) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

impl FromIterator<WireFactor> for SystemType {
    fn from_iter<T: IntoIterator<Item = WireFactor>>(iter: T) -> Self {
        SystemType::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcessError {
    #[error("type mismatch at factor {position}: expected {expected}, found {found}")]
    TypeMismatch { position: usize, expected: String, found: String },
    #[error("choi side {got} does not match {input} -> {output} (expected {expected})")]
    ChoiSize { input: String, output: String, expected: usize, got: usize },
    #[error("choi operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("choi operator has coherences on classical factor {factor} (size {magnitude:.3e})")]
    NotDecohered { factor: usize, magnitude: f64 },
    #[error("scale factor {0} is negative")]
    NegativeScale(f64),
    #[error("invalid construction: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A nonnegative real scalar, the value of a closed diagram.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Scalar(pub f64);

impl Scalar {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A completely positive map stored as its Choi operator.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessTensor {
    input: SystemType,
    output: SystemType,
    choi: CMatrix,
}

impl fmt::Debug for ProcessTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProcessTensor({} -> {}) {:?}", self.input, self.output, self.choi)
    }
}

/// Digits of a flat index in a row-major layout.
pub(crate) fn digits_of(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

impl ProcessTensor {
    /// Validated constructor: checks shape, Hermiticity, positivity and
    /// classical decoherence.
    pub fn new(input: SystemType, output: SystemType, choi: CMatrix, tol: &Tolerances) -> Result<Self, ProcessError> {
        let p = ProcessTensor::from_choi_unchecked(input, output, choi)?;
        p.validate(tol)?;
        Ok(p)
    }

    /// Shape-checked constructor that trusts positivity. Used for results of
    /// operations that preserve complete positivity.
    pub fn from_choi_unchecked(input: SystemType, output: SystemType, choi: CMatrix) -> Result<Self, ProcessError> {
        let expected = input.total_dim() * output.total_dim();
        if choi.rows() != expected || choi.cols() != expected {
            return Err(ProcessError::ChoiSize {
                input: input.to_string(),
                output: output.to_string(),
                expected,
                got: choi.rows().max(choi.cols()),
            });
        }
        Ok(ProcessTensor { input, output, choi })
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<(), ProcessError> {
        let lam = numerics::min_eigenvalue_hermitian(&self.choi, tol)?;
        if lam < -tol.psd_rel * 1f64.max(self.choi.max_norm()) - tol.zero_abs {
            return Err(ProcessError::NotPositive { min_eigenvalue: lam });
        }
        if let Some((factor, magnitude)) = self.decoherence_violation(tol) {
            return Err(ProcessError::NotDecohered { factor, magnitude });
        }
        Ok(())
    }

    /// Build a Choi operator entrywise from ket and bra digit vectors over the
    /// boundary factors (inputs first, then outputs).
    pub fn from_fn(
        input: SystemType,
        output: SystemType,
        f: impl Fn(&[usize], &[usize]) -> C64,
    ) -> Result<Self, ProcessError> {
        let dims = boundary_dims(&input, &output);
        let n: usize = dims.iter().product();
        let mut ket = vec![0usize; dims.len()];
        let mut bra = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            digits_of(r, &dims, &mut ket);
            for c in 0..n {
                digits_of(c, &dims, &mut bra);
                data.push(f(&ket, &bra));
            }
        }
        ProcessTensor::from_choi_unchecked(input, output, CMatrix::new(n, n, data)?)
    }

    pub fn zero(input: SystemType, output: SystemType) -> Self {
        let n = input.total_dim() * output.total_dim();
        ProcessTensor { input, output, choi: CMatrix::zeros(n, n) }
    }

    /// The closed process with value `r`.
    pub fn scalar(r: f64) -> Self {
        ProcessTensor { input: SystemType::trivial(), output: SystemType::trivial(), choi: CMatrix::scalar(C64::new(r, 0.0)) }
    }

    /// A state (no input) with the given density-like operator.
    pub fn state(output: SystemType, rho: CMatrix, tol: &Tolerances) -> Result<Self, ProcessError> {
        ProcessTensor::new(SystemType::trivial(), output, rho, tol)
    }

    /// Classical state from a list of weights.
    pub fn distribution(size: usize, weights: &[f64], tol: &Tolerances) -> Result<Self, ProcessError> {
        if weights.len() != size {
            return Err(ProcessError::Invalid(format!("{} weights for C({size})", weights.len())));
        }
        ProcessTensor::state(SystemType::classical(size), CMatrix::diag_real(weights), tol)
    }

    /// Effect `X ↦ tr(M X)` for a positive operator `M`.
    pub fn effect(input: SystemType, m: &CMatrix, tol: &Tolerances) -> Result<Self, ProcessError> {
        ProcessTensor::new(input, SystemType::trivial(), m.transpose(), tol)
    }

    /// Measurement from a quantum input to a classical outcome wire:
    /// `X ↦ Σ_a tr(M_a X) |a⟩⟨a|`.
    pub fn measurement(input: SystemType, povm: &[CMatrix], tol: &Tolerances) -> Result<Self, ProcessError> {
        let din = input.total_dim();
        let k = povm.len();
        for m in povm {
            if m.rows() != din || m.cols() != din {
                return Err(ProcessError::Invalid(format!("POVM element is {}x{}, expected {din}", m.rows(), m.cols())));
            }
        }
        let choi = CMatrix::from_fn(din * k, din * k, |r, c| {
            let (i, a) = (r / k, r % k);
            let (j, b) = (c / k, c % k);
            if a == b {
                povm[a][(j, i)]
            } else {
                ZERO
            }
        });
        ProcessTensor::new(input, SystemType::classical(k), choi, tol)
    }

    /// `X ↦ U X U^dagger` on `system`.
    pub fn unitary_channel(system: SystemType, u: &CMatrix) -> Result<Self, ProcessError> {
        let d = system.total_dim();
        if u.rows() != d || u.cols() != d {
            return Err(ProcessError::Invalid(format!("unitary is {}x{}, system has dimension {d}", u.rows(), u.cols())));
        }
        let v: Vec<C64> = (0..d * d).map(|idx| u[(idx % d, idx / d)]).collect();
        ProcessTensor::from_choi_unchecked(system.clone(), system, CMatrix::outer(&v, &v))
    }

    /// Channel from Kraus operators `X ↦ Σ K X K^dagger`.
    pub fn from_kraus(input: SystemType, output: SystemType, kraus: &[CMatrix]) -> Result<Self, ProcessError> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        let n = din * dout;
        let mut choi = CMatrix::zeros(n, n);
        for k in kraus {
            if k.rows() != dout || k.cols() != din {
                return Err(ProcessError::Invalid(format!("Kraus operator is {}x{}, expected {dout}x{din}", k.rows(), k.cols())));
            }
            let v: Vec<C64> = (0..n).map(|idx| k[(idx % dout, idx / dout)]).collect();
            choi = &choi + &CMatrix::outer(&v, &v);
        }
        ProcessTensor::from_choi_unchecked(input, output, choi)
    }

    pub fn input(&self) -> &SystemType {
        &self.input
    }

    pub fn output(&self) -> &SystemType {
        &self.output
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn into_choi(self) -> CMatrix {
        self.choi
    }

    pub fn din(&self) -> usize {
        self.input.total_dim()
    }

    pub fn dout(&self) -> usize {
        self.output.total_dim()
    }

    /// Boundary factor dims, inputs first.
    pub fn boundary_dims(&self) -> Vec<usize> {
        boundary_dims(&self.input, &self.output)
    }

    pub fn is_closed(&self) -> bool {
        self.input.total_dim() == 1 && self.output.total_dim() == 1
    }

    /// Value of a closed process.
    pub fn as_scalar(&self) -> Option<Scalar> {
        self.is_closed().then(|| Scalar(self.choi[(0, 0)].re))
    }

    /// Relabel the input and output types; factor dims must agree.
    pub fn retype(&self, input: SystemType, output: SystemType) -> Result<Self, ProcessError> {
        if input.dims() != self.input.dims() || output.dims() != self.output.dims() {
            return Err(ProcessError::Invalid(format!(
                "cannot retype {} -> {} as {input} -> {output}",
                self.input, self.output
            )));
        }
        for (a, b) in input.factors().iter().zip(self.input.factors()).chain(output.factors().iter().zip(self.output.factors())) {
            if a.is_classical() != b.is_classical() {
                return Err(ProcessError::Invalid("retype cannot change wire kind".into()));
            }
        }
        Ok(ProcessTensor { input, output, choi: self.choi.clone() })
    }

    pub fn scale(&self, r: f64) -> Result<Self, ProcessError> {
        if r < 0.0 {
            return Err(ProcessError::NegativeScale(r));
        }
        Ok(ProcessTensor { input: self.input.clone(), output: self.output.clone(), choi: self.choi.scale_real(r) })
    }

    /// Apply to an operator on the input space.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix, ProcessError> {
        let (din, dout) = (self.din(), self.dout());
        if x.rows() != din || x.cols() != din {
            return Err(ProcessError::Invalid(format!("operator is {}x{}, input dimension is {din}", x.rows(), x.cols())));
        }
        let mut out = CMatrix::zeros(dout, dout).into_data();
        for i in 0..din {
            for j in 0..din {
                let xij = x[(i, j)];
                if xij == ZERO {
                    continue;
                }
                for a in 0..dout {
                    for b in 0..dout {
                        out[a * dout + b] += xij * self.choi[(i * dout + a, j * dout + b)];
                    }
                }
            }
        }
        Ok(CMatrix::new(dout, dout, out)?)
    }

    /// Largest coherence on a classical factor, if it exceeds `zero_abs`.
    pub fn decoherence_violation(&self, tol: &Tolerances) -> Option<(usize, f64)> {
        let factors: Vec<WireFactor> = self.input.factors().iter().chain(self.output.factors()).copied().collect();
        let classical: Vec<usize> = (0..factors.len()).filter(|&i| factors[i].is_classical()).collect();
        if classical.is_empty() {
            return None;
        }
        let dims: Vec<usize> = factors.iter().map(WireFactor::dim).collect();
        let n = self.choi.rows();
        let mut ket = vec![0; dims.len()];
        let mut bra = vec![0; dims.len()];
        let mut worst: Option<(usize, f64)> = None;
        for r in 0..n {
            digits_of(r, &dims, &mut ket);
            for c in 0..n {
                let z = self.choi[(r, c)].norm();
                if z <= tol.zero_abs {
                    continue;
                }
                digits_of(c, &dims, &mut bra);
                if let Some(&f) = classical.iter().find(|&&f| ket[f] != bra[f]) {
                    if worst.is_none_or(|(_, m)| z > m) {
                        worst = Some((f, z));
                    }
                }
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &ProcessTensor, tol: &Tolerances) -> bool {
        self.input == other.input && self.output == other.output && self.choi.approx_eq(&other.choi, tol)
    }

    /// Max-norm distance between Choi operators; infinite on a type mismatch.
    pub fn distance(&self, other: &ProcessTensor) -> f64 {
        if self.input.dims() != other.input.dims() || self.output.dims() != other.output.dims() {
            return f64::INFINITY;
        }
        self.choi.max_diff(&other.choi)
    }
}

pub(crate) fn boundary_dims(input: &SystemType, output: &SystemType) -> Vec<usize> {
    input.dims().into_iter().chain(output.dims()).collect()
}

fn type_mismatch(expected: &SystemType, found: &SystemType) -> ProcessError {
    let position = expected.first_mismatch(found).unwrap_or(0);
    let show = |s: &SystemType| s.factors().get(position).map(|f| f.to_string()).unwrap_or_else(|| "nothing".into());
    ProcessError::TypeMismatch { position, expected: show(expected), found: show(found) }
}

/// `J[(i,a),(j,b)] -> M[(i,j),(a,b)]`.
fn realign(j: &CMatrix, din: usize, dout: usize) -> CMatrix {
    CMatrix::from_fn(din * din, dout * dout, |r, c| {
        let (i, jj) = (r / din, r % din);
        let (a, b) = (c / dout, c % dout);
        j[(i * dout + a, jj * dout + b)]
    })
}

fn unrealign(m: &CMatrix, din: usize, dout: usize) -> CMatrix {
    let n = din * dout;
    CMatrix::from_fn(n, n, |r, c| {
        let (i, a) = (r / dout, r % dout);
        let (j, b) = (c / dout, c % dout);
        m[(i * din + j, a * dout + b)]
    })
}

/// `g ∘ f`.
pub fn compose_seq(g: &ProcessTensor, f: &ProcessTensor) -> Result<ProcessTensor, ProcessError> {
    if f.output != g.input {
        return Err(type_mismatch(&g.input, &f.output));
    }
    let (din, dmid, dout) = (f.din(), f.dout(), g.dout());
    let mf = realign(&f.choi, din, dmid);
    let mg = realign(&g.choi, dmid, dout);
    let m = mf.matmul(&mg)?;
    ProcessTensor::from_choi_unchecked(f.input.clone(), g.output.clone(), unrealign(&m, din, dout))
}

/// `f ⊗ g`.
pub fn compose_par(f: &ProcessTensor, g: &ProcessTensor) -> ProcessTensor {
    let k = kron(&f.choi, &g.choi);
    let dims = [f.din(), f.dout(), g.din(), g.dout()];
    let choi = permute_factors(&k, &dims, &[0, 2, 1, 3]).expect("dims are consistent by construction");
    ProcessTensor { input: f.input.tensor(&g.input), output: f.output.tensor(&g.output), choi }
}

pub fn compose_par_all<'a>(items: impl IntoIterator<Item = &'a ProcessTensor>) -> ProcessTensor {
    items.into_iter().fold(ProcessTensor::scalar(1.0), |acc, p| compose_par(&acc, p))
}

/// Reorder the boundary factors of a process. `in_perm[k]` names the old input
/// factor placed at new position `k`; likewise for outputs.
pub fn permute_boundary(f: &ProcessTensor, in_perm: &[usize], out_perm: &[usize]) -> Result<ProcessTensor, ProcessError> {
    let nin = f.input.len();
    let mut perm: Vec<usize> = in_perm.to_vec();
    perm.extend(out_perm.iter().map(|&p| p + nin));
    let choi = permute_factors(&f.choi, &f.boundary_dims(), &perm)?;
    Ok(ProcessTensor { input: f.input.select(in_perm), output: f.output.select(out_perm), choi })
}

/// Unique effect: `X ↦ tr X`, or marginalisation on classical wires.
pub fn discard(s: &SystemType) -> ProcessTensor {
    ProcessTensor::from_choi_unchecked(s.clone(), SystemType::trivial(), CMatrix::identity(s.total_dim()))
        .expect("shape is consistent")
}

/// Normalised maximally mixed state `𝟙/d`.
pub fn max_mixed(s: &SystemType) -> ProcessTensor {
    let d = s.total_dim();
    ProcessTensor::from_choi_unchecked(SystemType::trivial(), s.clone(), CMatrix::identity(d).scale_real(1.0 / d as f64))
        .expect("shape is consistent")
}

/// Supernormalised maximally mixed state `𝟙`.
pub fn noise_state(s: &SystemType) -> ProcessTensor {
    ProcessTensor::from_choi_unchecked(SystemType::trivial(), s.clone(), CMatrix::identity(s.total_dim()))
        .expect("shape is consistent")
}

/// Choi operator pairing factor `left[k]` with `right[k]` through identity
/// deltas; classical pairs are additionally decohered.
pub(crate) fn pairing(input: SystemType, output: SystemType, pairs: &[(usize, usize)]) -> Result<ProcessTensor, ProcessError> {
    let all: Vec<WireFactor> = input.factors().iter().chain(output.factors()).copied().collect();
    for &(x, y) in pairs {
        if !all[x].same_carrier(&all[y]) {
            return Err(ProcessError::TypeMismatch { position: y, expected: all[x].to_string(), found: all[y].to_string() });
        }
    }
    ProcessTensor::from_fn(input, output, |k, b| {
        let ok = pairs.iter().all(|&(x, y)| {
            k[x] == k[y] && b[x] == b[y] && (!all[x].is_classical() || k[x] == b[x])
        });
        if ok {
            ONE
        } else {
            ZERO
        }
    })
}

pub fn identity(s: &SystemType) -> ProcessTensor {
    let n = s.len();
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + i)).collect();
    pairing(s.clone(), s.clone(), &pairs).expect("identity pairs are well typed")
}

/// Wiring permutation: output factor `k` is input factor `perm[k]`.
pub fn wiring(input: &SystemType, perm: &[usize]) -> Result<ProcessTensor, ProcessError> {
    let n = input.len();
    if perm.len() != n {
        return Err(ProcessError::Invalid(format!("permutation of length {} for {n} factors", perm.len())));
    }
    let output = input.select(perm);
    let pairs: Vec<(usize, usize)> = perm.iter().enumerate().map(|(k, &p)| (p, n + k)).collect();
    pairing(input.clone(), output, &pairs)
}

/// `a ⊗ b -> b ⊗ a`.
pub fn swap(a: &SystemType, b: &SystemType) -> ProcessTensor {
    let (na, nb) = (a.len(), b.len());
    let perm: Vec<usize> = (na..na + nb).chain(0..na).collect();
    wiring(&a.tensor(b), &perm).expect("swap permutation is valid")
}

/// State on `s ⊗ dual(s)`: `Σ_ij |ii⟩⟨jj|`, or `Σ_a |aa⟩⟨aa|` on classical factors.
pub fn cup(s: &SystemType) -> ProcessTensor {
    cup_on(s, &s.dual()).expect("dual pairs are well typed")
}

/// Effect on `s ⊗ dual(s)`, the adjoint of [`cup`].
pub fn cap(s: &SystemType) -> ProcessTensor {
    cap_on(s, &s.dual()).expect("dual pairs are well typed")
}

/// Cup onto an explicit pair of types; `b` must match `a` factorwise up to orientation.
pub fn cup_on(a: &SystemType, b: &SystemType) -> Result<ProcessTensor, ProcessError> {
    if a.len() != b.len() {
        return Err(ProcessError::Invalid(format!("cup halves {a} and {b} differ in length")));
    }
    let n = a.len();
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + i)).collect();
    pairing(SystemType::trivial(), a.tensor(b), &pairs)
}

pub fn cap_on(a: &SystemType, b: &SystemType) -> Result<ProcessTensor, ProcessError> {
    if a.len() != b.len() {
        return Err(ProcessError::Invalid(format!("cap halves {a} and {b} differ in length")));
    }
    let n = a.len();
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + i)).collect();
    pairing(a.tensor(b), SystemType::trivial(), &pairs)
}

/// Hermitian-adjoint dagger: the process `f†` with `tr(Y† f(X)) = tr(f†(Y)† X)`.
pub fn dagger_h(f: &ProcessTensor) -> ProcessTensor {
    let nin = f.input.len();
    let nout = f.output.len();
    let perm: Vec<usize> = (nin..nin + nout).chain(0..nin).collect();
    let choi = permute_factors(&f.choi, &f.boundary_dims(), &perm).expect("dims are consistent").conj();
    ProcessTensor { input: f.output.clone(), output: f.input.clone(), choi }
}

/// Zero every classical coherence; the result is the composite of `f` with
/// dephasing on each classical wire.
pub fn decohere(f: &ProcessTensor) -> ProcessTensor {
    let factors: Vec<WireFactor> = f.input.factors().iter().chain(f.output.factors()).copied().collect();
    if !factors.iter().any(WireFactor::is_classical) {
        return f.clone();
    }
    let dims: Vec<usize> = factors.iter().map(WireFactor::dim).collect();
    let n = f.choi.rows();
    let mut ket = vec![0; dims.len()];
    let mut bra = vec![0; dims.len()];
    let choi = CMatrix::from_fn(n, n, |r, c| {
        digits_of(r, &dims, &mut ket);
        digits_of(c, &dims, &mut bra);
        if factors.iter().enumerate().all(|(i, w)| !w.is_classical() || ket[i] == bra[i]) {
            f.choi[(r, c)]
        } else {
            ZERO
        }
    });
    ProcessTensor { input: f.input.clone(), output: f.output.clone(), choi }
}

// --- predicates -----------------------------------------------------------

fn scale_of(m: &CMatrix) -> f64 {
    1f64.max(m.max_norm())
}

pub fn is_cp(f: &ProcessTensor, tol: &Tolerances) -> bool {
    f.validate(tol).is_ok()
}

/// `‖Tr_out J − 𝟙_in‖_max`: zero exactly when discarding the output equals discarding the input.
pub fn causality_residual(f: &ProcessTensor) -> f64 {
    let nin = f.input.len();
    let keep: Vec<usize> = (0..nin).collect();
    let reduced = partial_trace(&f.choi, &f.boundary_dims(), &keep).expect("dims are consistent");
    reduced.max_diff(&CMatrix::identity(f.din()))
}

pub fn is_causal(f: &ProcessTensor, tol: &Tolerances) -> bool {
    causality_residual(f) <= tol.eq_rel * scale_of(&f.choi)
}

/// `‖f(𝟙) − 𝟙‖_max`.
pub fn identity_residual(f: &ProcessTensor) -> f64 {
    let img = f.apply(&CMatrix::identity(f.din())).expect("dims are consistent");
    img.max_diff(&CMatrix::identity(f.dout()))
}

pub fn preserves_identity(f: &ProcessTensor, tol: &Tolerances) -> bool {
    identity_residual(f) <= tol.eq_rel * scale_of(&f.choi)
}

/// `‖f(𝟙/d_in) − 𝟙/d_out‖_max`.
pub fn max_mixed_residual(f: &ProcessTensor) -> f64 {
    let (din, dout) = (f.din(), f.dout());
    let img = f.apply(&CMatrix::identity(din).scale_real(1.0 / din as f64)).expect("dims are consistent");
    img.max_diff(&CMatrix::identity(dout).scale_real(1.0 / dout as f64))
}

pub fn preserves_max_mixed(f: &ProcessTensor, tol: &Tolerances) -> bool {
    max_mixed_residual(f) <= tol.eq_rel * scale_of(&f.choi)
}

/// `𝟙_in − Tr_out J ⪰ 0`.
pub fn is_trace_nonincreasing(f: &ProcessTensor, tol: &Tolerances) -> bool {
    let nin = f.input.len();
    let keep: Vec<usize> = (0..nin).collect();
    let reduced = partial_trace(&f.choi, &f.boundary_dims(), &keep).expect("dims are consistent");
    let gap = &CMatrix::identity(f.din()) - &reduced;
    numerics::is_psd(&gap, tol).unwrap_or(false)
}

pub fn is_zero(f: &ProcessTensor, tol: &Tolerances) -> bool {
    f.choi.max_norm() <= tol.zero_abs
}
