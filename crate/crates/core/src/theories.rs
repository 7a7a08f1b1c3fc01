//! Theories built on completely positive maps.
//!
//! * `QPhys`: CPTP maps. Acyclic wiring only, no dagger.
//! * `QCalc`: all CP maps, with cups, caps and the Hermitian adjoint.
//! * `QPhysUnital`: CPTP maps fixing the maximally mixed state, with the
//!   dagger rescaled by `d_out / d_in`.
//! * `QCalcBullet`: CP maps with `N(f) = 1` or `f = 0`, composed by
//!   renormalising ([`bullet_compose`]).
//! * `QCalcQuotient`: CP maps up to a positive scalar ([`ProcessClass`]).
//! * `QNeut`: generated by ε-noisy processes and wirings, up to scalars.
//!
//! The normalisation functional is `N(f) = tr(J_f) / d_in`, i.e. discarding
//! the output of `f` applied to the normalised maximally mixed input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{kron, min_eigenvalue_hermitian, CMatrix, Tolerances};
use crate::systems::{
    self, compose_seq, dagger_h, is_causal, is_zero, preserves_max_mixed, ProcessError, ProcessTensor, Scalar,
    SystemType,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoryName {
    QPhys,
    QCalc,
    QPhysUnital,
    QCalcBullet,
    QCalcQuotient,
    QNeut,
    /// Group-covariant CP maps; see [`crate::groups`].
    QRep,
    /// Covariant maps that are no-signalling between causal and retrocausal wires.
    QPart,
}

impl TheoryName {
    pub const ALL: [TheoryName; 8] = [
        TheoryName::QPhys,
        TheoryName::QCalc,
        TheoryName::QPhysUnital,
        TheoryName::QCalcBullet,
        TheoryName::QCalcQuotient,
        TheoryName::QNeut,
        TheoryName::QRep,
        TheoryName::QPart,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoryName::QPhys => "qphys",
            TheoryName::QCalc => "qcalc",
            TheoryName::QPhysUnital => "qphys-unital",
            TheoryName::QCalcBullet => "qcalc-bullet",
            TheoryName::QCalcQuotient => "qcalc-quotient",
            TheoryName::QNeut => "qneut",
            TheoryName::QRep => "qrep",
            TheoryName::QPart => "qpart",
        }
    }
}

impl fmt::Display for TheoryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown theory `{0}`")]
pub struct UnknownTheory(pub String);

impl FromStr for TheoryName {
    type Err = UnknownTheory;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoryName::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| UnknownTheory(s.to_string()))
    }
}

/// What a theory allows when wiring processes together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiringCaps {
    /// Cups and caps exist: outputs may meet outputs, inputs may meet inputs,
    /// and cycles are allowed.
    pub compact: bool,
    /// Bent wires may join a factor with itself rather than only with its dual.
    pub self_dual: bool,
}

impl WiringCaps {
    pub const ACYCLIC: WiringCaps = WiringCaps { compact: false, self_dual: true };
    pub const COMPACT: WiringCaps = WiringCaps { compact: true, self_dual: true };
    pub const COMPACT_ORIENTED: WiringCaps = WiringCaps { compact: true, self_dual: false };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DaggerKind {
    None,
    Hermitian,
    HermitianRescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    pub name: TheoryName,
    pub caps: WiringCaps,
    pub dagger: DaggerKind,
}

impl Theory {
    pub fn of(name: TheoryName) -> Theory {
        use TheoryName::*;
        let (caps, dagger) = match name {
            QPhys => (WiringCaps::ACYCLIC, DaggerKind::None),
            QPhysUnital => (WiringCaps::ACYCLIC, DaggerKind::HermitianRescaled),
            QCalc | QCalcBullet | QCalcQuotient | QNeut => (WiringCaps::COMPACT, DaggerKind::Hermitian),
            QRep | QPart => (WiringCaps::COMPACT_ORIENTED, DaggerKind::Hermitian),
        };
        Theory { name, caps, dagger }
    }
}

/// One named sub-check of a membership verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub theory: TheoryName,
    pub member: bool,
    pub checks: Vec<CheckOutcome>,
}

impl Verdict {
    pub fn from_checks(theory: TheoryName, checks: Vec<CheckOutcome>) -> Verdict {
        Verdict { theory, member: checks.iter().all(|c| c.passed), checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}:", if self.member { "member" } else { "not a member" }, self.theory)?;
        for c in &self.checks {
            write!(f, " {}={}", c.name, if c.passed { "ok" } else { "FAIL" })?;
            if !c.detail.is_empty() {
                write!(f, " ({})", c.detail)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("precondition failed: {0}")]
    NotMember(Verdict),
    #[error("noise parameter {0} outside (0, 1]")]
    BadNoise(f64),
    #[error(transparent)]
    Process(#[from] ProcessError),
}

fn cp_check(f: &ProcessTensor, tol: &Tolerances) -> CheckOutcome {
    match f.validate(tol) {
        Ok(()) => CheckOutcome::new("cp", true, ""),
        Err(e) => CheckOutcome::new("cp", false, e.to_string()),
    }
}

fn causal_check(f: &ProcessTensor, tol: &Tolerances) -> CheckOutcome {
    CheckOutcome::new("causal", is_causal(f, tol), format!("residual {:.3e}", systems::causality_residual(f)))
}

/// Membership of `f` in one of the group-free theories. `QRep`/`QPart` here
/// use the trivial group and the factor orientations; see [`crate::groups`]
/// for the general case.
pub fn membership(t: TheoryName, f: &ProcessTensor, tol: &Tolerances) -> Verdict {
    use TheoryName::*;
    let mut checks = vec![cp_check(f, tol)];
    match t {
        QCalc | QCalcQuotient | QRep => {}
        QPhys => checks.push(causal_check(f, tol)),
        QPhysUnital => {
            checks.push(causal_check(f, tol));
            checks.push(CheckOutcome::new(
                "unital",
                preserves_max_mixed(f, tol),
                format!("residual {:.3e}", systems::max_mixed_residual(f)),
            ));
        }
        QCalcBullet => {
            let n = normalization(f).value();
            let ok = is_zero(f, tol) || (n - 1.0).abs() <= tol.eq_rel;
            checks.push(CheckOutcome::new("normalized-or-zero", ok, format!("N = {n}")));
        }
        QNeut => {
            let ok = is_noisy_form(f, tol) || is_wiring_up_to_scale(f, tol);
            checks.push(CheckOutcome::new("noisy-or-wiring", ok, ""));
        }
        QPart => {
            let g = crate::groups::FiniteGroup::trivial();
            let rin = crate::groups::Representation::trivial(g.clone(), f.input().clone());
            let rout = crate::groups::Representation::trivial(g, f.output().clone());
            return crate::groups::qpart_membership(f, &rin, &rout, tol);
        }
    }
    Verdict::from_checks(t, checks)
}

/// `N(f) = tr(J_f) / d_in`.
pub fn normalization(f: &ProcessTensor) -> Scalar {
    Scalar(f.choi().trace().re / f.din() as f64)
}

/// Renormalised sequential composition `g • f`.
pub fn bullet_compose(g: &ProcessTensor, f: &ProcessTensor, tol: &Tolerances) -> Result<ProcessTensor, ProcessError> {
    let gf = compose_seq(g, f)?;
    let n = normalization(&gf).value();
    if n > tol.zero_abs {
        gf.scale(1.0 / n)
    } else {
        Ok(ProcessTensor::zero(gf.input().clone(), gf.output().clone()))
    }
}

/// Equivalence class of a CP map under positive rescaling, held by its
/// `N`-normalised representative (or the zero map).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessClass {
    canonical: ProcessTensor,
    zero: bool,
}

impl ProcessClass {
    pub fn canonical(&self) -> &ProcessTensor {
        &self.canonical
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn input(&self) -> &SystemType {
        self.canonical.input()
    }

    pub fn output(&self) -> &SystemType {
        self.canonical.output()
    }

    /// Class of the Hermitian adjoint of any representative.
    pub fn dagger(&self, tol: &Tolerances) -> ProcessClass {
        canonical_rep(&dagger_h(&self.canonical), tol)
    }

    pub fn tensor(&self, other: &ProcessClass, tol: &Tolerances) -> ProcessClass {
        canonical_rep(&systems::compose_par(&self.canonical, &other.canonical), tol)
    }
}

pub fn canonical_rep(f: &ProcessTensor, tol: &Tolerances) -> ProcessClass {
    let n = normalization(f).value();
    if n <= tol.zero_abs {
        ProcessClass { canonical: ProcessTensor::zero(f.input().clone(), f.output().clone()), zero: true }
    } else {
        ProcessClass { canonical: f.scale(1.0 / n).expect("N is positive"), zero: false }
    }
}

pub fn class_equal(a: &ProcessClass, b: &ProcessClass, tol: &Tolerances) -> bool {
    a.zero == b.zero && a.canonical.approx_eq(&b.canonical, tol)
}

/// Composite class `g̃ ∘ f̃`.
pub fn quotient_compose(g: &ProcessClass, f: &ProcessClass, tol: &Tolerances) -> Result<ProcessClass, ProcessError> {
    Ok(canonical_rep(&compose_seq(&g.canonical, &f.canonical)?, tol))
}

/// Amount of noise mixed into a process; lies in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct NoiseParameter(f64);

impl NoiseParameter {
    pub fn new(epsilon: f64) -> Result<Self, TheoryError> {
        if epsilon > 0.0 && epsilon <= 1.0 {
            Ok(NoiseParameter(epsilon))
        } else {
            Err(TheoryError::BadNoise(epsilon))
        }
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }
}

/// Convex mixture `(1 − ε) f + ε D`, where `D(X) = tr(X) 𝟙/d_out` is the
/// completely depolarising channel (Choi `𝟙_in ⊗ 𝟙_out / d_out`).
pub fn noisy(f: &ProcessTensor, eps: NoiseParameter) -> ProcessTensor {
    let e = eps.epsilon();
    let n = f.choi().rows();
    let depol = CMatrix::identity(n).scale_real(e / f.dout() as f64);
    let choi = &f.choi().scale_real(1.0 - e) + &depol;
    ProcessTensor::from_choi_unchecked(f.input().clone(), f.output().clone(), choi).expect("shape is unchanged")
}

/// Strictly positive definite Choi operator, the signature of a noisy process.
pub fn is_noisy_form(f: &ProcessTensor, tol: &Tolerances) -> bool {
    match min_eigenvalue_hermitian(f.choi(), tol) {
        Ok(lam) => lam > tol.psd_rel * 1f64.max(f.choi().max_norm()),
        Err(_) => false,
    }
}

/// Perfect matchings of boundary factor positions with equal carriers.
fn matchings(carriers: &[crate::systems::WireFactor]) -> Vec<Vec<(usize, usize)>> {
    fn go(
        free: &mut Vec<usize>,
        carriers: &[crate::systems::WireFactor],
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if free.is_empty() {
            out.push(acc.clone());
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let other = free[k];
            if carriers[first].same_carrier(&carriers[other]) {
                free.remove(k);
                acc.push((first, other));
                go(free, carriers, acc, out);
                acc.pop();
                free.insert(k, other);
            }
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    if carriers.len().is_multiple_of(2) && carriers.len() <= 10 {
        go(&mut (0..carriers.len()).collect(), carriers, &mut Vec::new(), &mut out);
    }
    out
}

/// Whether `f` is, up to a positive scalar, a pure wiring (identities, swaps,
/// cups and caps joined in parallel).
pub fn is_wiring_up_to_scale(f: &ProcessTensor, tol: &Tolerances) -> bool {
    if f.is_closed() {
        return normalization(f).value() > tol.zero_abs;
    }
    let carriers: Vec<_> = f.input().factors().iter().chain(f.output().factors()).copied().collect();
    let target = canonical_rep(f, tol);
    if target.is_zero() {
        return false;
    }
    matchings(&carriers).into_iter().any(|pairs| {
        match systems::pairing(f.input().clone(), f.output().clone(), &pairs) {
            Ok(w) => class_equal(&canonical_rep(&w, tol), &target, tol),
            Err(_) => false,
        }
    })
}

/// Rescaled dagger of the unital subtheory: `f† · d_out / d_in`.
pub fn dagger_unital(f: &ProcessTensor, tol: &Tolerances) -> Result<ProcessTensor, TheoryError> {
    let v = membership(TheoryName::QPhysUnital, f, tol);
    if !v.member {
        return Err(TheoryError::NotMember(v));
    }
    let factor = f.dout() as f64 / f.din() as f64;
    Ok(dagger_h(f).scale(factor)?)
}

/// For a map between purely classical systems, the transition matrix
/// `T[a][x] = p(a | x)` read off the Choi diagonal.
pub fn transition_matrix(f: &ProcessTensor) -> Option<Vec<Vec<f64>>> {
    let all_classical = f.input().factors().iter().chain(f.output().factors()).all(|w| w.is_classical());
    if !all_classical {
        return None;
    }
    let (din, dout) = (f.din(), f.dout());
    Some((0..dout).map(|a| (0..din).map(|x| f.choi()[(x * dout + a, x * dout + a)].re).collect()).collect())
}

/// Largest deviation from the bistochastic conditions: columns sum to one and
/// rows sum to `d_in / d_out`.
pub fn bistochastic_residual(f: &ProcessTensor) -> Option<f64> {
    let t = transition_matrix(f)?;
    let (din, dout) = (f.din(), f.dout());
    let mut worst: f64 = 0.0;
    for x in 0..din {
        let col: f64 = t.iter().map(|row| row[x]).sum();
        worst = worst.max((col - 1.0).abs());
    }
    for row in &t {
        let s: f64 = row.iter().sum();
        worst = worst.max((s - din as f64 / dout as f64).abs());
    }
    Some(worst)
}

/// Choi operator of the completely depolarising channel, for tests.
pub fn depolarizer(input: &SystemType, output: &SystemType) -> ProcessTensor {
    let (din, dout) = (input.total_dim(), output.total_dim());
    let choi = kron(&CMatrix::identity(din), &CMatrix::identity(dout).scale_real(1.0 / dout as f64));
    ProcessTensor::from_choi_unchecked(input.clone(), output.clone(), choi).expect("shape is consistent")
}

pub fn is_member(t: TheoryName, f: &ProcessTensor, tol: &Tolerances) -> bool {
    membership(t, f, tol).member
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{C64, ONE};
    use crate::systems::{cap, cup, discard, identity, max_mixed, noise_state};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn q(d: usize) -> SystemType {
        SystemType::quantum(d)
    }

    fn hadamard_channel() -> ProcessTensor {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ProcessTensor::unitary_channel(q(2), &CMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()).unwrap()
    }

    fn amplitude_damping(g: f64) -> ProcessTensor {
        let k0 = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]).unwrap();
        let k1 = CMatrix::from_real(2, 2, &[0.0, g.sqrt(), 0.0, 0.0]).unwrap();
        ProcessTensor::from_kraus(q(2), q(2), &[k0, k1]).unwrap()
    }

    #[test]
    fn theory_names_round_trip() {
        for t in TheoryName::ALL {
            assert_eq!(t.as_str().parse::<TheoryName>().unwrap(), t);
        }
        assert!("qfoo".parse::<TheoryName>().is_err());
        assert!(!Theory::of(TheoryName::QPhys).caps.compact);
        assert!(Theory::of(TheoryName::QNeut).caps.compact);
    }

    #[test]
    fn unitary_is_in_every_listed_theory() {
        let u = hadamard_channel();
        for t in [TheoryName::QPhys, TheoryName::QPhysUnital, TheoryName::QCalc, TheoryName::QCalcBullet] {
            assert!(is_member(t, &u, &tol()), "{t}");
        }
    }

    #[test]
    fn amplitude_damping_membership() {
        let ad = amplitude_damping(0.5);
        assert!(is_member(TheoryName::QPhys, &ad, &tol()));
        let v = membership(TheoryName::QPhysUnital, &ad, &tol());
        assert!(!v.member);
        assert_eq!(v.failures().map(|c| c.name.as_str()).collect::<Vec<_>>(), vec!["unital"]);
    }

    #[test]
    fn noise_state_is_qcalc_only() {
        let n = noise_state(&q(2));
        assert!(!is_member(TheoryName::QPhys, &n, &tol()));
        assert!(is_member(TheoryName::QCalc, &n, &tol()));
    }

    #[test]
    fn normalization_examples() {
        let rho = ProcessTensor::state(q(2), CMatrix::diag_real(&[0.75, 0.25]), &tol()).unwrap();
        let half = [CMatrix::diag_real(&[0.5, 0.0]), CMatrix::diag_real(&[0.0, 0.5])];
        let m = ProcessTensor::measurement(q(2), &half, &tol()).unwrap();
        let mr = compose_seq(&m, &rho).unwrap();
        assert!((normalization(&mr).value() - 0.5).abs() < 1e-15);
        assert!((normalization(&identity(&q(5))).value() - 1.0).abs() < 1e-15);
        assert!((normalization(&cup(&q(3))).value() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn bullet_examples() {
        let rho = ProcessTensor::state(q(2), CMatrix::diag_real(&[0.75, 0.25]), &tol()).unwrap();
        let half = [CMatrix::diag_real(&[0.5, 0.0]), CMatrix::diag_real(&[0.0, 0.5])];
        let m = ProcessTensor::measurement(q(2), &half, &tol()).unwrap();
        let p = bullet_compose(&m, &rho, &tol()).unwrap();
        assert!(p.choi().approx_eq(&CMatrix::diag_real(&[0.75, 0.25]), &tol()));
        assert!(is_member(TheoryName::QCalcBullet, &p, &tol()));

        let zero_m = ProcessTensor::zero(q(2), SystemType::classical(2));
        let z = bullet_compose(&zero_m, &rho, &tol()).unwrap();
        assert!(is_zero(&z, &tol()));

        let f = hadamard_channel();
        assert!(bullet_compose(&identity(&q(2)), &f, &tol()).unwrap().approx_eq(&f, &tol()));
    }

    #[test]
    fn quotient_examples() {
        let c = cup(&q(2));
        assert!(class_equal(&canonical_rep(&c.scale(7.0).unwrap(), &tol()), &canonical_rep(&c, &tol()), &tol()));
        let rho = ProcessTensor::state(q(2), CMatrix::diag_real(&[0.75, 0.25]), &tol()).unwrap();
        assert!(class_equal(&canonical_rep(&rho, &tol()), &canonical_rep(&rho.scale(2.0).unwrap(), &tol()), &tol()));
        let s0 = ProcessTensor::state(q(2), CMatrix::diag_real(&[1.0, 0.0]), &tol()).unwrap();
        let s1 = ProcessTensor::state(q(2), CMatrix::diag_real(&[0.0, 1.0]), &tol()).unwrap();
        assert!(!class_equal(&canonical_rep(&s0, &tol()), &canonical_rep(&s1, &tol()), &tol()));

        let loop_class = quotient_compose(&canonical_rep(&cap(&q(2)), &tol()), &canonical_rep(&c, &tol()), &tol()).unwrap();
        assert!(!loop_class.is_zero());
        assert!(class_equal(&loop_class, &canonical_rep(&ProcessTensor::scalar(1.0), &tol()), &tol()));

        let zero = canonical_rep(&ProcessTensor::zero(q(2), SystemType::trivial()), &tol());
        let comp = quotient_compose(&zero, &canonical_rep(&rho, &tol()), &tol()).unwrap();
        assert!(comp.is_zero());
    }

    #[test]
    fn noisy_pure_state() {
        let s0 = ProcessTensor::state(q(2), CMatrix::diag_real(&[1.0, 0.0]), &tol()).unwrap();
        let n = noisy(&s0, NoiseParameter::new(0.1).unwrap());
        assert!(n.choi().approx_eq(&CMatrix::diag_real(&[0.95, 0.05]), &tol()));
        assert!(is_noisy_form(&n, &tol()));
        assert!(NoiseParameter::new(0.0).is_err());
        assert!(NoiseParameter::new(1.5).is_err());
    }

    #[test]
    fn noisy_preserves_trace_preservation() {
        let f = amplitude_damping(0.3);
        let n = noisy(&f, NoiseParameter::new(0.2).unwrap());
        assert!(is_causal(&n, &tol()));
        let lam = min_eigenvalue_hermitian(n.choi(), &tol()).unwrap();
        assert!(lam >= 0.2 / 2.0 - 1e-12);
    }

    #[test]
    fn qneut_generators() {
        assert!(is_member(TheoryName::QNeut, &cup(&q(2)), &tol()));
        assert!(is_member(TheoryName::QNeut, &crate::systems::swap(&q(2), &SystemType::classical(3)), &tol()));
        assert!(is_member(TheoryName::QNeut, &noisy(&hadamard_channel(), NoiseParameter::new(0.05).unwrap()), &tol()));
        assert!(!is_member(TheoryName::QNeut, &hadamard_channel(), &tol()));
    }

    #[test]
    fn unital_dagger_examples() {
        let d = dagger_unital(&discard(&q(2)), &tol()).unwrap();
        assert!(d.approx_eq(&max_mixed(&q(2)), &tol()));
        let s = CMatrix::diag(&[ONE, C64::new(0.0, 1.0)]);
        let u = ProcessTensor::unitary_channel(q(2), &s).unwrap();
        let uinv = ProcessTensor::unitary_channel(q(2), &s.adjoint()).unwrap();
        assert!(dagger_unital(&u, &tol()).unwrap().approx_eq(&uinv, &tol()));
        assert!(matches!(dagger_unital(&amplitude_damping(0.5), &tol()), Err(TheoryError::NotMember(_))));
    }

    #[test]
    fn classical_bistochastic() {
        let c2 = SystemType::classical(2);
        let t = [0.3, 0.7, 0.7, 0.3];
        let f = ProcessTensor::from_fn(c2.clone(), c2, |k, b| {
            if k == b {
                C64::new(t[k[1] * 2 + k[0]], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        assert!(is_member(TheoryName::QPhysUnital, &f, &tol()));
        assert!(bistochastic_residual(&f).unwrap() < 1e-15);
    }
}
