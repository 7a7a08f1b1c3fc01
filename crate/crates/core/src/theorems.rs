//! Seeded numerical checks of the structural results, one report per check.
//!
//! Every trial draws from its own RNG stream (`trial_rng(seed, check, trial)`),
//! so reports are identical whichever [`Execution`] runs them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{evaluate, Diagram, Port};
use crate::groups::{
    conjugate_rep, covariance_residual, permutation_rep, qpart_membership, tensor_rep, FiniteGroup, Representation,
};
use crate::higher_order::{
    apply_process_matrix, circuit_channel, ordered_identity, plug_swaps, realize_process_matrix, ProcessMatrixLayout,
};
use crate::numerics::{kron, CMatrix, Tolerances, C64};
use crate::par::{map_trials, Execution};
use crate::random::{
    random_cp_general, random_cptp, random_retrocausal, random_state, random_unital, random_unitary, trial_rng, TrialRng,
};
use crate::systems::{
    cap, cap_on, causality_residual, compose_par, compose_seq, cup, cup_on, dagger_h, discard, identity,
    identity_residual, max_mixed, max_mixed_residual, noise_state, swap, ProcessError, ProcessTensor, SystemType,
};
use crate::theories::{
    bistochastic_residual, bullet_compose, canonical_rep, dagger_unital, is_member, noisy, normalization,
    NoiseParameter, TheoryName,
};

pub type BulletFn = fn(&ProcessTensor, &ProcessTensor, &Tolerances) -> Result<ProcessTensor, ProcessError>;
/// Representative of the class of `f`: the `N`-normalised map, or the zero map.
pub type CanonicalFn = fn(&ProcessTensor, &Tolerances) -> ProcessTensor;

/// The operations the quotient checks exercise, swappable for mutation tests.
#[derive(Clone, Copy)]
pub struct Kernel {
    pub bullet: BulletFn,
    pub canonical: CanonicalFn,
}

impl Kernel {
    pub fn reference() -> Self {
        Kernel { bullet: bullet_compose, canonical: |f, tol| canonical_rep(f, tol).canonical().clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub tol: Tolerances,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 42, dims: vec![2, 3], trials: 100, tol: Tolerances::default(), exec: Execution::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub index: usize,
    pub name: String,
    pub anchor: String,
    pub trials: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl CheckReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialise")
    }
}

pub const CHECKS: [(&str, &str); 14] = [
    ("causality", "discarding after a causal process"),
    ("retrocausality", "unique state and the dagger of causal maps"),
    ("causal-not-retrocausal", "distinct causal basis states"),
    ("collapse", "causal theories with cups and caps are trivial"),
    ("snake", "snake equations and cap symmetry"),
    ("loop", "closed loop scalar"),
    ("unital-dagger", "rescaled dagger of the unital subtheory"),
    ("no-signalling", "closure and the unique scalar"),
    ("quotient", "class composition and dagger are well defined"),
    ("bullet", "renormalised composition matches the quotient"),
    ("zero-lemma", "zero normalisation means the zero map"),
    ("qneut", "closed noisy diagrams are deterministic"),
    ("process-matrix", "process matrices from bent channels"),
    ("cap-intertwiner", "caps intertwine a representation with its conjugate"),
];

type TrialResult = Result<(f64, bool), String>;

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    kernel: Kernel,
}

impl Ctx<'_> {
    fn dim(&self, k: usize) -> usize {
        self.cfg.dims[k % self.cfg.dims.len()]
    }

    /// Run `n` trials of check `index` and fold them in trial order.
    fn trials(&self, index: usize, n: usize, f: impl Fn(&mut TrialRng, usize) -> TrialResult + Sync + Send) -> Agg {
        let seed = self.cfg.seed;
        let results = map_trials(self.cfg.exec, n, |t| f(&mut trial_rng(seed, index as u64, t as u64), t));
        let mut agg = Agg { trials: n, residual: 0.0, ok: true, detail: String::new() };
        for (t, r) in results.into_iter().enumerate() {
            match r {
                Ok((res, ok)) => {
                    agg.residual = if res.is_nan() { f64::INFINITY } else { agg.residual.max(res) };
                    if !ok {
                        agg.fail(format!("trial {t} failed a structural condition"));
                    }
                }
                Err(e) => {
                    agg.residual = f64::INFINITY;
                    agg.fail(format!("trial {t}: {e}"));
                }
            }
        }
        agg
    }
}

struct Agg {
    trials: usize,
    residual: f64,
    ok: bool,
    detail: String,
}

impl Agg {
    fn fail(&mut self, why: String) {
        if self.ok {
            self.detail = why;
        }
        self.ok = false;
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|x| x.to_string())
}

fn scalar(p: &ProcessTensor) -> f64 {
    p.as_scalar().map(|s| s.value()).unwrap_or(f64::NAN)
}

fn basis_state(d: usize, k: usize) -> ProcessTensor {
    ProcessTensor::from_choi_unchecked(SystemType::trivial(), SystemType::quantum(d), projector(d, k)).expect("shape is consistent")
}

/// `(1_s ⊗ cap) ∘ (cup ⊗ 1_s)` for `cup: I -> s ⊗ s*` and `cap: s* ⊗ s -> I`.
fn snake_left(cup: &ProcessTensor, cap: &ProcessTensor, s: &SystemType) -> Result<ProcessTensor, ProcessError> {
    compose_seq(&compose_par(&identity(s), cap), &compose_par(cup, &identity(s)))
}

/// `(cap ⊗ 1_s*) ∘ (1_s* ⊗ cup)` on `s*`.
fn snake_right(cup: &ProcessTensor, cap: &ProcessTensor, s: &SystemType) -> Result<ProcessTensor, ProcessError> {
    let sd = s.dual();
    compose_seq(&compose_par(cap, &identity(&sd)), &compose_par(&identity(&sd), cup))
}

fn mix(a: &ProcessTensor, b: &ProcessTensor, p: f64) -> ProcessTensor {
    let choi = &a.choi().scale_real(p) + &b.choi().scale_real(1.0 - p);
    ProcessTensor::from_choi_unchecked(a.input().clone(), a.output().clone(), choi).expect("same shape")
}

/// `X ↦ tr(A X) B` has Choi operator `Aᵀ ⊗ B`.
fn measure_prepare(input: &SystemType, output: &SystemType, a: &CMatrix, b: &CMatrix) -> ProcessTensor {
    ProcessTensor::from_choi_unchecked(input.clone(), output.clone(), kron(&a.transpose(), b)).expect("shape is consistent")
}

fn projector(d: usize, k: usize) -> CMatrix {
    CMatrix::diag_real(&(0..d).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<_>>())
}

fn check_causality(c: &Ctx) -> Agg {
    c.trials(1, c.cfg.trials, |rng, t| {
        let mut a = SystemType::quantum(c.dim(t));
        if t % 2 == 1 {
            a = a.tensor(&SystemType::classical(2));
        }
        let b = SystemType::quantum(c.dim(t + 1));
        let f = random_cptp(rng, &a, &b, 2);
        let g = random_cptp(rng, &b, &a, 2);
        let rho = random_state(rng, &a);
        let r1 = e(compose_seq(&discard(&b), &f))?.distance(&discard(&a));
        let r2 = (scalar(&e(compose_seq(&discard(&b), &e(compose_seq(&f, &rho))?))?) - 1.0).abs();
        let r3 = causality_residual(&compose_par(&f, &g));
        let r4 = causality_residual(&e(compose_seq(&g, &f))?);
        Ok((r1.max(r2).max(r3).max(r4), true))
    })
}

fn check_retrocausality(c: &Ctx) -> Agg {
    c.trials(2, c.cfg.trials, |rng, t| {
        let a = SystemType::quantum(c.dim(t));
        let b = SystemType::quantum(c.dim(t + 1));
        let f = random_retrocausal(rng, &a, &b);
        let g = random_retrocausal(rng, &b, &a);
        let r1 = identity_residual(&f);
        let r2 = e(compose_seq(&f, &noise_state(&a)))?.distance(&noise_state(&b));
        let r3 = identity_residual(&e(compose_seq(&g, &f))?).max(identity_residual(&compose_par(&f, &g)));
        let r4 = causality_residual(&dagger_h(&f));
        let k = random_cptp(rng, &a, &b, 2);
        let r5 = identity_residual(&dagger_h(&k));
        let only = random_retrocausal(rng, &SystemType::trivial(), &a).distance(&noise_state(&a));
        Ok([r1, r2, r3, r4, r5, only].into_iter().fold(0.0, f64::max))
            .map(|r| (r, true))
    })
}

fn check_causal_not_retro(c: &Ctx) -> Agg {
    let n = c.cfg.dims.len();
    c.trials(3, n, |_, t| {
        let d = c.dim(t).max(2);
        let (s0, s1) = (basis_state(d, 0), basis_state(d, 1));
        let causal = causality_residual(&s0).max(causality_residual(&s1));
        let retro = identity_residual(&s0).min(identity_residual(&s1));
        let distinct = s0.distance(&s1);
        Ok((causal, retro >= 0.5 && distinct >= 0.5))
    })
}

/// Largest deviation of the snake built from `cup`/`cap` from the identity,
/// read on computational basis inputs.
fn snake_deviation_on_basis(lhs: &ProcessTensor) -> Result<f64, String> {
    let d = lhs.din();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let p = projector(d, k);
        worst = worst.max(e(lhs.apply(&p))?.max_diff(&p));
    }
    Ok(worst)
}

fn check_collapse(c: &Ctx) -> Agg {
    let mut dims = vec![1];
    dims.extend(c.cfg.dims.iter().copied().filter(|&d| d > 1));
    let n = dims.len();
    let dims = &dims;
    let mut agg = c.trials(4, n, |_, t| {
        let d = dims[t];
        let s = SystemType::quantum(d);
        let cup = compose_par(&max_mixed(&s), &max_mixed(&s.dual()));
        let cap = compose_par(&discard(&s.dual()), &discard(&s));
        let r = snake_deviation_on_basis(&e(snake_left(&cup, &cap, &s))?)?;
        if d == 1 {
            Ok((r, true))
        } else {
            let expected = 1.0 - 1.0 / d as f64;
            Ok((0.0, r >= 0.4 && (r - expected).abs() <= 1e-12))
        }
    });
    if !agg.ok {
        agg.detail = format!("{} (a causal cup and cap straightened a wire)", agg.detail);
    }
    agg
}

fn snake_systems(d: usize) -> Vec<SystemType> {
    let (q, cl) = (SystemType::quantum(d), SystemType::classical(d));
    vec![q.clone(), cl.clone(), q.dual(), cl.dual()]
}

fn check_snake(c: &Ctx) -> Agg {
    let mut cases: Vec<SystemType> = c.cfg.dims.iter().flat_map(|&d| snake_systems(d)).collect();
    cases.push(SystemType::quantum(2).tensor(&SystemType::classical(2).dual()));
    let cases = &cases;
    c.trials(5, cases.len(), |_, t| {
        let s = &cases[t];
        let sd = s.dual();
        let (u, k) = (e(cup_on(s, &sd))?, e(cap_on(&sd, s))?);
        let r1 = e(snake_left(&u, &k, s))?.distance(&identity(s));
        let r2 = e(snake_right(&u, &k, s))?.distance(&identity(&sd));
        let r3 = e(compose_seq(&cap(s), &swap(&sd, s)))?.distance(&e(cap_on(&sd, s))?);
        let r4 = e(compose_seq(&swap(s, &sd), &cup(s)))?.distance(&e(cup_on(&sd, s))?);
        let mut d = Diagram::new("snake");
        let mut env = BTreeMap::new();
        let nu = d.add_node("u", "u", u.input().clone(), u.output().clone());
        let nk = d.add_node("k", "k", k.input().clone(), k.output().clone());
        env.insert("u".to_string(), u);
        env.insert("k".to_string(), k);
        d.add_wire(Port::BoundIn(0), Port::NodeIn(nk, 1));
        d.add_wire(Port::NodeOut(nu, 1), Port::NodeIn(nk, 0));
        d.add_wire(Port::NodeOut(nu, 0), Port::BoundOut(0));
        let r5 = if s.len() == 1 { e(evaluate(&d, &env, c.cfg.exec))?.distance(&identity(s)) } else { 0.0 };
        Ok(([r1, r2, r3, r4, r5].into_iter().fold(0.0, f64::max), true))
    })
}

fn check_loop(c: &Ctx) -> Agg {
    let cases: Vec<(SystemType, f64)> = c
        .cfg
        .dims
        .iter()
        .flat_map(|&d| [(SystemType::quantum(d), (d * d) as f64), (SystemType::classical(d), d as f64)])
        .collect();
    let cases = &cases;
    c.trials(6, cases.len(), |_, t| {
        let (s, want) = &cases[t];
        let direct = scalar(&e(compose_seq(&cap(s), &cup(s)))?);
        let mut d = Diagram::new("loop");
        let mut env = BTreeMap::new();
        let nu = d.add_node("u", "u", SystemType::trivial(), s.tensor(&s.dual()));
        let nk = d.add_node("k", "k", s.tensor(&s.dual()), SystemType::trivial());
        env.insert("u".to_string(), cup(s));
        env.insert("k".to_string(), cap(s));
        d.add_wire(Port::NodeOut(nu, 0), Port::NodeIn(nk, 0));
        d.add_wire(Port::NodeOut(nu, 1), Port::NodeIn(nk, 1));
        let via = scalar(&e(evaluate(&d, &env, c.cfg.exec))?);
        Ok(((direct - want).abs().max((via - want).abs()), true))
    })
}

fn check_unital(c: &Ctx) -> Agg {
    let tol = c.cfg.tol;
    c.trials(7, c.cfg.trials, |rng, t| {
        let d = c.dim(t);
        let s = if t % 2 == 0 { SystemType::quantum(d) } else { SystemType::classical(d) };
        let f = random_unital(rng, &s, 3);
        let g = random_unital(rng, &s, 3);
        let gf = e(compose_seq(&g, &f))?;
        let closure = causality_residual(&gf).max(max_mixed_residual(&gf));
        let df = e(dagger_unital(&f, &tol))?;
        let dg = e(dagger_unital(&g, &tol))?;
        let invol = e(dagger_unital(&df, &tol))?.distance(&f);
        let contra = e(dagger_unital(&gf, &tol))?.distance(&e(compose_seq(&df, &dg))?);
        let image = causality_residual(&df).max(max_mixed_residual(&df));
        let bisto = if t % 2 == 1 { bistochastic_residual(&f).unwrap_or(f64::INFINITY) } else { 0.0 };
        let member = is_member(TheoryName::QPhysUnital, &df, &tol) && is_member(TheoryName::QPhysUnital, &gf, &tol);
        Ok(([closure, invol, contra, image, bisto].into_iter().fold(0.0, f64::max), member))
    })
}

fn check_no_signalling(c: &Ctx) -> Agg {
    let tol = c.cfg.tol;
    c.trials(8, c.cfg.trials, |rng, t| {
        let q = SystemType::quantum(c.dim(t));
        let r = SystemType::quantum(2).dual();
        let qr = q.tensor(&r);
        let member = |rng: &mut TrialRng| {
            let p1 = compose_par(&random_cptp(rng, &q, &q, 2), &random_retrocausal(rng, &r, &r));
            let p2 = compose_par(&random_cptp(rng, &q, &q, 2), &random_retrocausal(rng, &r, &r));
            let w: f64 = rng.random_range(0.0..1.0);
            mix(&p1, &p2, w)
        };
        let f = member(rng);
        let g = member(rng);
        let gf = e(compose_seq(&g, &f))?;
        let triv = |s: &SystemType| Representation::trivial(FiniteGroup::trivial(), s.clone());
        let verdicts = [&f, &g, &gf].map(|x| qpart_membership(x, &triv(&qr), &triv(&qr), &tol).member);
        let state = compose_par(&random_state(rng, &q), &noise_state(&r));
        let effect = compose_par(&discard(&q), &random_retrocausal(rng, &r, &SystemType::trivial()));
        let closed = e(compose_seq(&effect, &e(compose_seq(&gf, &state))?))?;
        let state_ok = qpart_membership(&state, &triv(&SystemType::trivial()), &triv(&qr), &tol).member;
        let effect_ok = qpart_membership(&effect, &triv(&qr), &triv(&SystemType::trivial()), &tol).member;
        Ok(((scalar(&closed) - 1.0).abs(), verdicts.iter().all(|&v| v) && state_ok && effect_ok))
    })
}

fn scale_range(rng: &mut TrialRng) -> f64 {
    10.0 * (1.0 - rng.random_range(0.0..1.0))
}

fn check_quotient(c: &Ctx) -> Agg {
    let (tol, k) = (c.cfg.tol, c.kernel);
    c.trials(9, c.cfg.trials, |rng, t| {
        let (a, b, d) = (SystemType::quantum(c.dim(t)), SystemType::quantum(c.dim(t + 1)), SystemType::quantum(c.dim(t + 2)));
        let f = random_cp_general(rng, &a, &b);
        let g = random_cp_general(rng, &b, &d);
        let (r, s) = (scale_range(rng), scale_range(rng));
        let rf = e(f.scale(r))?;
        let sg = e(g.scale(s))?;
        let well = (k.canonical)(&e(compose_seq(&sg, &rf))?, &tol).distance(&(k.canonical)(&e(compose_seq(&g, &f))?, &tol));
        let dag = (k.canonical)(&dagger_h(&rf), &tol).distance(&(k.canonical)(&dagger_h(&(k.canonical)(&f, &tol)), &tol));
        let back = (k.canonical)(&dagger_h(&(k.canonical)(&dagger_h(&f), &tol)), &tol).distance(&(k.canonical)(&f, &tol));
        let rep = (k.bullet)(&(k.canonical)(&g, &tol), &(k.canonical)(&f, &tol), &tol).map_err(|x| x.to_string())?;
        let n = normalization(&rep).value();
        let rep_res = if n <= tol.zero_abs { 0.0 } else { (n - 1.0).abs() };
        let snake = (k.canonical)(&e(snake_left(&(k.canonical)(&cup(&a), &tol), &(k.canonical)(&cap(&a.dual()), &tol), &a))?, &tol)
            .distance(&(k.canonical)(&identity(&a), &tol));
        Ok(([well, dag, back, rep_res, snake].into_iter().fold(0.0, f64::max), true))
    })
}

fn check_bullet(c: &Ctx) -> Agg {
    let (tol, k) = (c.cfg.tol, c.kernel);
    c.trials(10, c.cfg.trials, |rng, t| {
        let a = SystemType::quantum(c.dim(t));
        let b = SystemType::quantum(c.dim(t + 1).max(2));
        let d = SystemType::quantum(c.dim(t + 2));
        let f = (k.canonical)(&random_cp_general(rng, &a, &b), &tol);
        let g = if t % 4 == 3 {
            // annihilates everything `f` prepares below
            let sigma = random_state(rng, &d).into_choi();
            measure_prepare(&b, &d, &projector(b.total_dim(), 1), &sigma)
        } else {
            (k.canonical)(&random_cp_general(rng, &b, &d), &tol)
        };
        let f = if t % 4 == 3 {
            measure_prepare(&a, &b, &CMatrix::identity(a.total_dim()), &projector(b.total_dim(), 0))
        } else {
            f
        };
        let h = (k.canonical)(&random_cp_general(rng, &d, &a), &tol);
        let gf = e((k.bullet)(&g, &f, &tol))?;
        let iso = gf.distance(&(k.canonical)(&e(compose_seq(&g, &f))?, &tol));
        let left = e((k.bullet)(&e((k.bullet)(&h, &g, &tol))?, &f, &tol))?;
        let right = e((k.bullet)(&h, &gf, &tol))?;
        let assoc = left.distance(&right);
        let zero_ok = t % 4 != 3 || gf.choi().max_norm() == 0.0;
        Ok((iso.max(assoc), zero_ok))
    })
}

fn check_zero(c: &Ctx) -> Agg {
    let tol = c.cfg.tol;
    c.trials(11, c.cfg.trials, |rng, t| {
        let a = SystemType::quantum(c.dim(t));
        let b = SystemType::quantum(c.dim(t + 1).max(2));
        let f = match t % 4 {
            0 => random_cp_general(rng, &a, &b),
            1 => random_cptp(rng, &a, &b, 2),
            2 => ProcessTensor::zero(a.clone(), b.clone()),
            _ => {
                let prep = measure_prepare(&a, &b, &CMatrix::identity(a.total_dim()), &projector(b.total_dim(), 0));
                let kill = measure_prepare(&b, &b, &projector(b.total_dim(), 1), &random_state(rng, &b).into_choi());
                e(compose_seq(&kill, &prep))?
            }
        };
        let n = normalization(&f).value();
        let zero_n = n <= tol.zero_abs;
        let zero_j = f.choi().max_norm() <= tol.zero_abs;
        let din = f.din();
        let via_states: f64 = (0..din)
            .map(|i| e(f.apply(&projector(din, i))).map(|m| m.trace().re))
            .sum::<Result<f64, String>>()?
            / din as f64;
        let tomo = (via_states - n).abs();
        let expect_zero = t % 4 >= 2;
        Ok((tomo, zero_n == zero_j && zero_n == expect_zero))
    })
}

/// Random closed diagram of noisy boxes and bare wirings on `Q(d)`.
pub fn random_noisy_closed_diagram(rng: &mut impl Rng, d: usize, min_eps: f64) -> (Diagram, BTreeMap<String, ProcessTensor>) {
    let q = SystemType::quantum(d);
    let pow = |n: usize| SystemType::new(vec![q.factors()[0]; n]);
    let max_ports = if d >= 3 { 3 } else { 4 };
    let mut dgm = Diagram::new("closed");
    let mut env = BTreeMap::new();
    let nboxes = rng.random_range(2..=4);
    let mut ports = Vec::new();
    for b in 0..=nboxes {
        let total: usize = ports.len();
        let (nin, nout, wiring) = if b == nboxes {
            if total.is_multiple_of(2) {
                break;
            }
            (0, 1, false)
        } else if rng.random_bool(0.25) {
            (if rng.random_bool(0.5) { 2 } else { 0 }, 0, true)
        } else {
            let n = rng.random_range(1..=max_ports);
            let nin = rng.random_range(0..=n);
            (nin, n - nin, false)
        };
        let name = format!("b{b}");
        let p = if wiring {
            if nin == 2 {
                cap(&q)
            } else {
                cup(&q)
            }
        } else {
            let eps: f64 = rng.random_range(min_eps..=1.0);
            noisy(&random_cp_general(rng, &pow(nin), &pow(nout)), NoiseParameter::new(eps).expect("eps in range"))
        };
        let n = dgm.add_node(&name, &name, p.input().clone(), p.output().clone());
        ports.extend((0..p.input().len()).map(|k| Port::NodeIn(n, k)));
        ports.extend((0..p.output().len()).map(|k| Port::NodeOut(n, k)));
        env.insert(name, p);
    }
    ports.shuffle(rng);
    for pair in ports.chunks(2) {
        dgm.add_wire(pair[0], pair[1]);
    }
    (dgm, env)
}

fn check_qneut(c: &Ctx) -> Agg {
    let (tol, k) = (c.cfg.tol, c.kernel);
    c.trials(12, c.cfg.trials, |rng, t| {
        let (dgm, env) = random_noisy_closed_diagram(rng, c.dim(t), 0.05);
        let v = e(evaluate(&dgm, &env, Execution::Sequential))?;
        let s = scalar(&v);
        let class = (k.canonical)(&v, &tol);
        Ok(((scalar(&class) - 1.0).abs(), s > tol.zero_abs))
    })
}

fn check_process_matrix(c: &Ctx) -> Agg {
    let tol = c.cfg.tol;
    let exec = Execution::Sequential;
    c.trials(13, c.cfg.trials, |rng, t| {
        let l = ProcessMatrixLayout::qubits();
        let q = SystemType::quantum(2);
        let qq = q.tensor(&q);
        let c1 = random_cptp(rng, &q, &qq, 2);
        let c2 = random_cptp(rng, &qq, &qq, 2);
        let c3 = random_cptp(rng, &qq, &q, 2);
        let wch = e(circuit_channel(&l, &c1, &c2, &c3))?;
        let w = e(realize_process_matrix(&wch, &l, &tol))?;
        let round = e(plug_swaps(&w, exec))?.distance(&wch);
        let a = random_cptp(rng, &q, &q, 2);
        let b = random_cptp(rng, &q, &q, 2);
        let idq = identity(&q);
        let oracle = [compose_par(&a, &idq), c2, compose_par(&b, &idq), c3]
            .iter()
            .try_fold(c1, |acc, f| compose_seq(f, &acc))
            .map_err(|x| x.to_string())?;
        let out = e(apply_process_matrix(&w, &a, &b, exec))?;
        let applied = out.distance(&oracle);
        let causal = causality_residual(&out);

        let (x, y) = (SystemType::quantum(2), SystemType::quantum(c.dim(t)));
        let (lo, wo) = ordered_identity(&x, &y, &x);
        let wo = e(realize_process_matrix(&wo, &lo, &tol))?;
        let fa = random_cptp(rng, &x, &y, 2);
        let fb = random_cptp(rng, &y, &x, 2);
        let ordered = e(apply_process_matrix(&wo, &fa, &fb, exec))?.distance(&e(compose_seq(&fb, &fa))?);
        Ok(([round, applied, causal, ordered].into_iter().fold(0.0, f64::max), true))
    })
}

/// `V diag(ω^{k_i g}) V†` on `Q(d)` for the cyclic group of order `n`.
fn random_cyclic_rep(rng: &mut TrialRng, n: usize, d: usize) -> Representation {
    let v = random_unitary(rng, d);
    let ks: Vec<usize> = (0..d).map(|_| rng.random_range(0..n)).collect();
    let action = (0..n)
        .map(|g| {
            let phases: Vec<C64> =
                ks.iter().map(|&k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((k * g) % n) as f64 / n as f64)).collect();
            &(&v * &CMatrix::diag(&phases)) * &v.adjoint()
        })
        .collect();
    Representation::new(FiniteGroup::cyclic(n), SystemType::quantum(d), action).expect("shapes match")
}

fn check_cap_intertwiner(c: &Ctx) -> Agg {
    c.trials(14, c.cfg.trials, |rng, t| {
        let rep = if t % 3 == 2 {
            let v = random_unitary(rng, 3);
            let p = permutation_rep(3);
            let action = p.actions().iter().map(|m| &(&v * m) * &v.adjoint()).collect();
            e(Representation::new(p.group().clone(), p.system().clone(), action))?
        } else {
            random_cyclic_rep(rng, 2 + t % 3, c.dim(t))
        };
        let s = rep.system().clone();
        let pair = e(tensor_rep(&rep, &conjugate_rep(&rep)))?;
        let triv = Representation::trivial(rep.group().clone(), SystemType::trivial());
        let r1 = e(covariance_residual(&cap(&s), &pair, &triv, Execution::Sequential))?;
        let r2 = e(covariance_residual(&cup(&s), &triv, &pair, Execution::Sequential))?;
        Ok((r1.max(r2), true))
    })
}

type CheckFn = fn(&Ctx) -> Agg;

const RUNNERS: [CheckFn; 14] = [
    check_causality,
    check_retrocausality,
    check_causal_not_retro,
    check_collapse,
    check_snake,
    check_loop,
    check_unital,
    check_no_signalling,
    check_quotient,
    check_bullet,
    check_zero,
    check_qneut,
    check_process_matrix,
    check_cap_intertwiner,
];

fn tolerance_for(index: usize, tol: &Tolerances) -> f64 {
    match index {
        4..=6 => tol.zero_abs,
        14 => tol.eq_rel.min(1e-10),
        _ => tol.eq_rel,
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CheckReport> {
    run_all_with(cfg, Kernel::reference())
}

/// Run every check against `kernel`. Checks run in index order; trials
/// within a check follow `cfg.exec`.
pub fn run_all_with(cfg: &SuiteConfig, kernel: Kernel) -> Vec<CheckReport> {
    (1..=RUNNERS.len()).map(|i| run_one(cfg, kernel, i)).collect()
}

/// Run check `index` (1-based).
pub fn run_one(cfg: &SuiteConfig, kernel: Kernel, index: usize) -> CheckReport {
    assert!((1..=RUNNERS.len()).contains(&index), "no check {index}");
    assert!(!cfg.dims.is_empty() && cfg.trials > 0, "need dims and trials");
    let ctx = Ctx { cfg, kernel };
    let agg = RUNNERS[index - 1](&ctx);
    let tolerance = tolerance_for(index, &cfg.tol);
    let (name, anchor) = CHECKS[index - 1];
    let pass = agg.ok && agg.residual <= tolerance;
    let detail = if pass || !agg.detail.is_empty() {
        agg.detail
    } else {
        format!("residual {:.3e} exceeds {tolerance:.1e}", agg.residual)
    };
    CheckReport {
        index,
        name: name.to_string(),
        anchor: anchor.to_string(),
        trials: agg.trials,
        residual: agg.residual,
        tolerance,
        pass,
        seed: cfg.seed,
        detail,
    }
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
