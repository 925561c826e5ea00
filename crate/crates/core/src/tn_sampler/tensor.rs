use crate::C64;

/// Dense tensor whose wires all share one dimension. Labels are sorted;
/// the wire at position `j` is digit `j` (little-endian) of the flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    labels: Vec<usize>,
    dim: usize,
    data: Vec<C64>,
}

/// For every flat index over `big`, the flat index of its restriction to
/// `small` (which must be a subset of `big`).
pub fn index_map(big: &[usize], small: &[usize], dim: usize) -> Vec<usize> {
    let strides: Vec<usize> = big
        .iter()
        .map(|l| small.binary_search(l).map_or(0, |p| dim.pow(p as u32)))
        .collect();
    debug_assert!(small.iter().all(|l| big.binary_search(l).is_ok()), "small labels must be a subset");
    let size = dim.pow(big.len() as u32);
    let mut out = Vec::with_capacity(size);
    let mut digits = vec![0usize; big.len()];
    let mut cur = 0usize;
    for _ in 0..size {
        out.push(cur);
        for (j, dgt) in digits.iter_mut().enumerate() {
            *dgt += 1;
            cur += strides[j];
            if *dgt < dim {
                break;
            }
            *dgt = 0;
            cur -= strides[j] * dim;
        }
    }
    out
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

impl Tensor {
    pub fn scalar(value: C64, dim: usize) -> Self {
        Tensor { labels: Vec::new(), dim, data: vec![value] }
    }

    /// Builds from sorted, distinct labels and matching data.
    pub fn new(labels: Vec<usize>, dim: usize, data: Vec<C64>) -> Self {
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(data.len(), dim.pow(labels.len() as u32), "tensor data length");
        Tensor { labels, dim, data }
    }

    /// One-wire tensor.
    pub fn vector(label: usize, data: Vec<C64>) -> Self {
        let dim = data.len();
        Tensor { labels: vec![label], dim, data }
    }

    /// Entries `f(digits)` where `digits[j]` is the value on `labels[j]`.
    pub fn from_fn(labels: Vec<usize>, dim: usize, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let size = dim.pow(labels.len() as u32);
        let mut digits = vec![0usize; labels.len()];
        let mut data = Vec::with_capacity(size);
        for _ in 0..size {
            data.push(f(&digits));
            for d in digits.iter_mut() {
                *d += 1;
                if *d < dim {
                    break;
                }
                *d = 0;
            }
        }
        Tensor::new(labels, dim, data)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// The single entry of a label-free tensor.
    pub fn value(&self) -> C64 {
        assert!(self.labels.is_empty(), "not a scalar");
        self.data[0]
    }

    /// Entry at the given per-label digits.
    pub fn get(&self, digits: &[usize]) -> C64 {
        let idx = digits.iter().rev().fold(0, |acc, &d| acc * self.dim + d);
        self.data[idx]
    }

    /// Entrywise product on shared labels, outer product on the rest.
    pub fn mul(&self, other: &Tensor) -> Tensor {
        debug_assert_eq!(self.dim, other.dim);
        if other.labels.is_empty() {
            return self.scaled(other.data[0]);
        }
        if self.labels.is_empty() {
            return other.scaled(self.data[0]);
        }
        let labels = union(&self.labels, &other.labels);
        let ma = index_map(&labels, &self.labels, self.dim);
        let mb = index_map(&labels, &other.labels, self.dim);
        let data = ma.iter().zip(&mb).map(|(&i, &j)| self.data[i] * other.data[j]).collect();
        Tensor { labels, dim: self.dim, data }
    }

    /// Sums out every label not in `keep`.
    pub fn sum_to(&self, keep: &[usize]) -> Tensor {
        let labels: Vec<usize> = self.labels.iter().copied().filter(|l| keep.contains(l)).collect();
        if labels.len() == self.labels.len() {
            return self.clone();
        }
        let map = index_map(&self.labels, &labels, self.dim);
        let mut data = vec![C64::new(0.0, 0.0); self.dim.pow(labels.len() as u32)];
        for (i, &j) in map.iter().enumerate() {
            data[j] += self.data[i];
        }
        Tensor { labels, dim: self.dim, data }
    }

    /// Applies the row-major `dim x dim` matrix `m` to wire `label`.
    pub fn apply(&self, label: usize, m: &[C64]) -> Tensor {
        let pos = self.labels.binary_search(&label).expect("label present");
        let dim = self.dim;
        let stride = dim.pow(pos as u32);
        let mut data = vec![C64::new(0.0, 0.0); self.data.len()];
        for (i, out) in data.iter_mut().enumerate() {
            let k_out = (i / stride) % dim;
            let base = i - k_out * stride;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim {
                acc += m[k_out * dim + k] * self.data[base + k * stride];
            }
            *out = acc;
        }
        Tensor { labels: self.labels.clone(), dim, data }
    }

    /// Renames labels through `f` (which must stay injective).
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Tensor {
        let renamed: Vec<usize> = self.labels.iter().map(|&l| f(l)).collect();
        let mut labels = renamed.clone();
        labels.sort_unstable();
        // Position in the new order of each old wire.
        let stride: Vec<usize> = renamed
            .iter()
            .map(|l| self.dim.pow(labels.binary_search(l).expect("injective") as u32))
            .collect();
        let mut data = vec![C64::new(0.0, 0.0); self.data.len()];
        let mut digits = vec![0usize; renamed.len()];
        let mut cur = 0usize;
        for &x in &self.data {
            data[cur] = x;
            for (j, d) in digits.iter_mut().enumerate() {
                *d += 1;
                cur += stride[j];
                if *d < self.dim {
                    break;
                }
                *d = 0;
                cur -= stride[j] * self.dim;
            }
        }
        Tensor { labels, dim: self.dim, data }
    }

    pub fn scaled(&self, s: C64) -> Tensor {
        Tensor { labels: self.labels.clone(), dim: self.dim, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Divides by the largest entry magnitude (no-op for the zero tensor).
    pub fn rescaled(&self) -> Tensor {
        let m = self.max_abs();
        if m > 0.0 && m.is_finite() {
            self.scaled(C64::new(1.0 / m, 0.0))
        } else {
            self.clone()
        }
    }
}
