use crate::numerics::{strides, CMatrix, C64, ZERO};

/// Dense tensor with one integer label per leg, row-major over the legs.
/// Contracting two tensors sums over every label they share.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub labels: Vec<usize>,
    pub dims: Vec<usize>,
    pub data: Vec<C64>,
}

impl Tensor {
    pub fn scalar(z: C64) -> Self {
        Tensor { labels: Vec::new(), dims: Vec::new(), data: vec![z] }
    }

    /// Build from legs that may repeat a label; repeated legs are traced out.
    pub fn new(labels: Vec<usize>, dims: Vec<usize>, data: Vec<C64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        let mut first_of = Vec::with_capacity(labels.len());
        for (k, l) in labels.iter().enumerate() {
            first_of.push(labels[..k].iter().position(|x| x == l));
        }
        let keep: Vec<usize> =
            (0..labels.len()).filter(|&k| labels.iter().filter(|&&x| x == labels[k]).count() == 1).collect();
        if keep.len() == labels.len() {
            return Tensor { labels, dims, data };
        }
        let new_labels: Vec<usize> = keep.iter().map(|&k| labels[k]).collect();
        let new_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let new_st = strides(&new_dims);
        let mut out = vec![ZERO; new_dims.iter().product()];
        let mut digits = vec![0; dims.len()];
        for (flat, z) in data.iter().enumerate() {
            crate::systems::digits_of(flat, &dims, &mut digits);
            if first_of.iter().enumerate().any(|(k, p)| p.is_some_and(|p| digits[p] != digits[k])) {
                continue;
            }
            let idx: usize = keep.iter().zip(&new_st).map(|(&k, s)| digits[k] * s).sum();
            out[idx] += z;
        }
        Tensor { labels: new_labels, dims: new_dims, data: out }
    }

    pub fn size(&self) -> usize {
        self.data.len()
    }

    /// Reorder legs so that they follow `order`, a permutation of the labels.
    pub fn permuted(&self, order: &[usize]) -> Tensor {
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.labels.iter().position(|x| x == l).expect("label present"))
            .collect();
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let map = crate::numerics::permutation_index_map(&self.dims, &perm);
        Tensor {
            labels: order.to_vec(),
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            data: map.iter().map(|&i| self.data[i]).collect(),
        }
    }

    /// Sum over shared labels; the result carries the free legs of `self`
    /// followed by those of `other`.
    pub fn contract(&self, other: &Tensor) -> Tensor {
        let shared: Vec<usize> = self.labels.iter().copied().filter(|l| other.labels.contains(l)).collect();
        let free_a: Vec<usize> = self.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
        let free_b: Vec<usize> = other.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
        let dim_of = |t: &Tensor, l: usize| t.dims[t.labels.iter().position(|&x| x == l).unwrap()];
        let m: usize = free_a.iter().map(|&l| dim_of(self, l)).product();
        let k: usize = shared.iter().map(|&l| dim_of(self, l)).product();
        let n: usize = free_b.iter().map(|&l| dim_of(other, l)).product();
        let a = self.permuted(&[free_a.clone(), shared.clone()].concat());
        let b = other.permuted(&[shared.clone(), free_b.clone()].concat());
        let am = CMatrix::new(m, k, a.data).expect("sizes agree");
        let bm = CMatrix::new(k, n, b.data).expect("sizes agree");
        let c = am.matmul(&bm).expect("sizes agree");
        let mut dims: Vec<usize> = free_a.iter().map(|&l| dim_of(self, l)).collect();
        dims.extend(free_b.iter().map(|&l| dim_of(other, l)));
        Tensor { labels: [free_a, free_b].concat(), dims, data: c.into_data() }
    }

    pub fn shares_label(&self, other: &Tensor) -> bool {
        self.labels.iter().any(|l| other.labels.contains(l))
    }
}
