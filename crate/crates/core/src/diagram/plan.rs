use rand::Rng;
use serde::{Deserialize, Serialize};

/// One pairwise contraction. Slots `0..leaves` are the initial tensors; step
/// `i` writes its result to slot `leaves + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub left: usize,
    pub right: usize,
    /// Number of entries in the resulting tensor.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionPlan {
    pub leaves: usize,
    pub steps: Vec<PlanStep>,
}

impl ContractionPlan {
    /// Largest intermediate produced by the plan.
    pub fn peak(&self) -> usize {
        self.steps.iter().map(|s| s.size).max().unwrap_or(0)
    }

    pub fn result_slot(&self) -> Option<usize> {
        match self.leaves {
            0 => None,
            n => Some(n + self.steps.len() - 1),
        }
    }
}

/// Leg labels and dimensions of a tensor, all a planner needs to see.
pub type Shape = Vec<(usize, usize)>;

fn merged(a: &Shape, b: &Shape) -> Shape {
    let mut out: Shape = a.iter().copied().filter(|(l, _)| !b.iter().any(|(m, _)| m == l)).collect();
    out.extend(b.iter().copied().filter(|(l, _)| !a.iter().any(|(m, _)| m == l)));
    out
}

fn size(s: &Shape) -> usize {
    s.iter().map(|&(_, d)| d).product()
}

fn connected(a: &Shape, b: &Shape) -> bool {
    a.iter().any(|(l, _)| b.iter().any(|(m, _)| m == l))
}

fn run(shapes: &[Shape], mut choose: impl FnMut(&[(usize, Shape)]) -> (usize, usize)) -> ContractionPlan {
    let leaves = shapes.len();
    let mut active: Vec<(usize, Shape)> = shapes.iter().cloned().enumerate().collect();
    let mut steps = Vec::new();
    while active.len() > 1 {
        let (i, j) = choose(&active);
        let (si, a) = active[i].clone();
        let (sj, b) = active[j].clone();
        let m = merged(&a, &b);
        steps.push(PlanStep { left: si, right: sj, size: size(&m) });
        active.remove(j.max(i));
        active.remove(j.min(i));
        active.push((leaves + steps.len() - 1, m));
    }
    ContractionPlan { leaves, steps }
}

/// Each step contracts the pair giving the smallest result, preferring pairs
/// that share a leg; ties go to the pair with the lowest slot indices.
pub fn greedy_plan(shapes: &[Shape]) -> ContractionPlan {
    run(shapes, |active| {
        // active slots are kept in increasing slot order
        let mut best: Option<((bool, usize), (usize, usize))> = None;
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let (a, b) = (&active[i].1, &active[j].1);
                let key = (!connected(a, b), size(&merged(a, b)));
                if best.is_none_or(|(k, _)| key < k) {
                    best = Some((key, (i, j)));
                }
            }
        }
        best.expect("two or more active tensors").1
    })
}

/// A uniformly random valid order: connected pairs first, as in the greedy plan.
pub fn random_plan(shapes: &[Shape], rng: &mut impl Rng) -> ContractionPlan {
    run(shapes, |active| {
        let mut pairs = Vec::new();
        let mut loose = Vec::new();
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                if connected(&active[i].1, &active[j].1) {
                    pairs.push((i, j));
                } else {
                    loose.push((i, j));
                }
            }
        }
        let pool = if pairs.is_empty() { &loose } else { &pairs };
        pool[rng.random_range(0..pool.len())]
    })
}
