//! Seeded samplers for states, channels and unitaries.
//!
//! Channels come from Stinespring isometries: a Gaussian matrix is
//! orthonormalised into an isometry `V`, and `E(ρ) = Tr_env(V ρ V†)`. Unital
//! samples are convex mixtures of unitary channels.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{CMatrix, C64, ZERO};
use crate::systems::{compose_par, decohere, ProcessTensor, SystemType};

pub type TrialRng = ChaCha8Rng;

/// RNG for trial `trial` of stream `stream`, independent of execution order.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> TrialRng {
    let mut s = seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(stream.wrapping_add(1));
    s = s.wrapping_add(trial.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    ChaCha8Rng::seed_from_u64(s)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Orthonormalise the columns of `m` (modified Gram-Schmidt). Requires `rows >= cols`.
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    assert!(rows >= cols, "need at least as many rows as columns");
    let mut q: Vec<Vec<C64>> = (0..cols).map(|c| (0..rows).map(|r| m[(r, c)]).collect()).collect();
    for c in 0..cols {
        for p in 0..c {
            let (head, tail) = q.split_at_mut(c);
            let proj: C64 = head[p].iter().zip(tail[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in tail[0].iter_mut().zip(head[p].iter()) {
                *x -= proj * y;
            }
        }
        let norm = q[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut q[c] {
            *x /= norm;
        }
    }
    CMatrix::from_fn(rows, cols, |r, c| q[c][r])
}

pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    orthonormalize_columns(&gaussian_matrix(rng, d, d))
}

pub fn random_isometry(rng: &mut impl Rng, din: usize, dout: usize) -> CMatrix {
    orthonormalize_columns(&gaussian_matrix(rng, dout, din))
}

/// Random density operator (trace one), decohered when the system is classical.
pub fn random_density(rng: &mut impl Rng, s: &SystemType) -> CMatrix {
    let d = s.total_dim();
    let g = gaussian_matrix(rng, d, d);
    let rho = &g * &g.adjoint();
    let t = rho.trace().re;
    let state = ProcessTensor::from_choi_unchecked(SystemType::trivial(), s.clone(), rho.scale_real(1.0 / t))
        .expect("shape is consistent");
    decohere(&state).into_choi()
}

pub fn random_state(rng: &mut impl Rng, s: &SystemType) -> ProcessTensor {
    let rho = random_density(rng, s);
    ProcessTensor::from_choi_unchecked(SystemType::trivial(), s.clone(), rho).expect("shape is consistent")
}

/// Random POVM with `outcomes` elements on dimension `d`.
pub fn random_povm(rng: &mut impl Rng, d: usize, outcomes: usize) -> Vec<CMatrix> {
    let v = random_isometry(rng, d, d * outcomes);
    // M_a = V_a† V_a over row blocks of V, summing to V†V = 𝟙
    (0..outcomes)
        .map(|a| {
            let block = CMatrix::from_fn(d, d, |r, c| v[(a * d + r, c)]);
            &block.adjoint() * &block
        })
        .collect()
}

/// Random CPTP map via a Stinespring isometry with environment dimension `env`.
pub fn random_cptp(rng: &mut impl Rng, input: &SystemType, output: &SystemType, env: usize) -> ProcessTensor {
    let (din, dout) = (input.total_dim(), output.total_dim());
    let env = env.max(din.div_ceil(dout));
    let v = random_isometry(rng, din, dout * env);
    let n = din * dout;
    let mut choi = vec![ZERO; n * n];
    for i in 0..din {
        for a in 0..dout {
            for j in 0..din {
                for b in 0..dout {
                    let mut acc = ZERO;
                    for e in 0..env {
                        acc += v[(a * env + e, i)] * v[(b * env + e, j)].conj();
                    }
                    choi[(i * dout + a) * n + j * dout + b] = acc;
                }
            }
        }
    }
    let p = ProcessTensor::from_choi_unchecked(input.clone(), output.clone(), CMatrix::new(n, n, choi).unwrap())
        .expect("shape is consistent");
    decohere(&p)
}

/// Random CP map: a CPTP map scaled by a factor in `(0, max_scale]`.
pub fn random_cp(rng: &mut impl Rng, input: &SystemType, output: &SystemType, max_scale: f64) -> ProcessTensor {
    let f = random_cptp(rng, input, output, 2);
    let r: f64 = rng.random_range(0.05..=1.0) * max_scale;
    f.scale(r).expect("positive scale")
}

/// Random CP map with Choi operator `G G†` for a Gaussian `G`, scaled to
/// `N = 1`; generically neither causal nor proportional to a causal map.
pub fn random_cp_general(rng: &mut impl Rng, input: &SystemType, output: &SystemType) -> ProcessTensor {
    let n = input.total_dim() * output.total_dim();
    let g = gaussian_matrix(rng, n, n);
    let j = &g * &g.adjoint();
    let scale = input.total_dim() as f64 / j.trace().re;
    decohere(&ProcessTensor::from_choi_unchecked(input.clone(), output.clone(), j.scale_real(scale)).expect("shape is consistent"))
}

/// Random unital CPTP map on `s`: a mixture of `terms` unitary channels.
pub fn random_unital(rng: &mut impl Rng, s: &SystemType, terms: usize) -> ProcessTensor {
    let d = s.total_dim();
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let n = d * d;
    let mut choi = CMatrix::zeros(n, n);
    for w in &weights {
        let u = random_unitary(rng, d);
        let ch = ProcessTensor::unitary_channel(s.clone(), &u).expect("dims match");
        choi = &choi + &ch.choi().scale_real(w / total);
    }
    decohere(&ProcessTensor::from_choi_unchecked(s.clone(), s.clone(), choi).expect("shape is consistent"))
}

/// Random retrocausal process: the adjoint of a random CPTP map, hence `𝟙`-preserving.
pub fn random_retrocausal(rng: &mut impl Rng, input: &SystemType, output: &SystemType) -> ProcessTensor {
    let f = random_cptp(rng, output, input, 2);
    crate::systems::dagger_h(&f)
}

/// Product of a random causal and a random retrocausal process.
pub fn random_product(
    rng: &mut impl Rng,
    causal: (&SystemType, &SystemType),
    retro: (&SystemType, &SystemType),
) -> ProcessTensor {
    let fc = random_cptp(rng, causal.0, causal.1, 2);
    let fr = random_retrocausal(rng, retro.0, retro.1);
    compose_par(&fc, &fr)
}
