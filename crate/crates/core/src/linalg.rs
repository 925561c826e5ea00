//! Small dense complex matrices: 2x2 helpers and a generic row-major type.

use crate::C64;

/// Row-major 2x2 complex matrix `[m00, m01, m10, m11]`.
pub type Mat2 = [C64; 4];

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn identity2() -> Mat2 {
    [ONE, ZERO, ZERO, ONE]
}

pub fn hadamard2() -> Mat2 {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [s, s, s, -s]
}

pub fn pauli_z() -> Mat2 {
    [ONE, ZERO, ZERO, -ONE]
}

pub fn pauli_x() -> Mat2 {
    [ZERO, ONE, ONE, ZERO]
}

/// `exp(-i θ X)`.
pub fn exp_x(theta: f64) -> Mat2 {
    let (s, co) = theta.sin_cos();
    [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
}

/// `exp(-i θ Z)`.
pub fn exp_z(theta: f64) -> Mat2 {
    [C64::from_polar(1.0, -theta), ZERO, ZERO, C64::from_polar(1.0, theta)]
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn adjoint2(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

pub fn scale2(a: &Mat2, s: C64) -> Mat2 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn apply2(a: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]]
}

/// Haar-like random unitary from a random unit vector and phase.
pub fn random_unitary2<R: rand::Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let mut g = || c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
    let (a, b) = (g(), g());
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt().max(1e-300);
    let (a, b) = (a / norm, b / norm);
    let phase = C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
    [a * phase, -b.conj() * phase, b * phase, a.conj() * phase]
}

pub fn max_diff2(a: &Mat2, b: &Mat2) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Singular value decomposition `M = norm · U diag(1, s) V`.
#[derive(Clone, Copy, Debug)]
pub struct Svd2 {
    pub norm: f64,
    pub s: f64,
    pub u: Mat2,
    pub v: Mat2,
}

/// Closed-form SVD through the eigen-decomposition of `M†M`.
pub fn svd2(m: &Mat2) -> Svd2 {
    let h = mul2(&adjoint2(m), m);
    let (a, b, cc) = (h[0].re, h[1], h[3].re);
    let mean = 0.5 * (a + cc);
    let rad = (0.25 * (a - cc).powi(2) + b.norm_sqr()).sqrt();
    let l1 = (mean + rad).max(0.0);
    let cand1 = [b, c(l1 - a, 0.0)];
    let cand2 = [c(l1 - cc, 0.0), b.conj()];
    let n1 = (cand1[0].norm_sqr() + cand1[1].norm_sqr()).sqrt();
    let n2 = (cand2[0].norm_sqr() + cand2[1].norm_sqr()).sqrt();
    let v1 = if n1.max(n2) <= 1e-300 {
        [ONE, ZERO]
    } else if n1 >= n2 {
        [cand1[0] / n1, cand1[1] / n1]
    } else {
        [cand2[0] / n2, cand2[1] / n2]
    };
    let v2 = [-v1[1].conj(), v1[0].conj()];
    let mv1 = apply2(m, v1);
    let sigma1 = (mv1[0].norm_sqr() + mv1[1].norm_sqr()).sqrt();
    let u1 = if sigma1 > 1e-300 { [mv1[0] / sigma1, mv1[1] / sigma1] } else { [ONE, ZERO] };
    let comp = [-u1[1].conj(), u1[0].conj()];
    let mv2 = apply2(m, v2);
    let proj = comp[0].conj() * mv2[0] + comp[1].conj() * mv2[1];
    let sigma2 = proj.norm();
    let phase = if sigma2 > 1e-300 { proj / sigma2 } else { ONE };
    let u2 = [comp[0] * phase, comp[1] * phase];
    let s = if sigma1 > 1e-300 { (sigma2 / sigma1).clamp(0.0, 1.0) } else { 1.0 };
    Svd2 {
        norm: sigma1,
        s,
        u: [u1[0], u2[0], u1[1], u2[1]],
        v: [v1[0].conj(), v1[1].conj(), v2[0].conj(), v2[1].conj()],
    }
}

/// Spectral norm of a 2x2 matrix.
pub fn norm2(m: &Mat2) -> f64 {
    svd2(m).norm
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_mat2(a: &Mat2) -> Self {
        DenseMatrix { rows: 2, cols: 2, data: a.to_vec() }
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m.data[i * d.len() + i] = x;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other` (self acts on the high index bits).
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + j * other.cols + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Spectral norm estimate by power iteration on `M†M`.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.cols;
        if n == 0 {
            return 0.0;
        }
        let adj = self.adjoint();
        let mut v: Vec<C64> = (0..n).map(|i| c(1.0 + 0.01 * (i % 7) as f64, 0.003 * (i % 5) as f64)).collect();
        let mut est = 0.0;
        for _ in 0..500 {
            let w = adj.matvec(&self.matvec(&v));
            let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nw == 0.0 {
                return 0.0;
            }
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let next = nw / nv;
            v = w.into_iter().map(|z| z / nw).collect();
            if (next - est).abs() <= 1e-14 * next {
                est = next;
                break;
            }
            est = next;
        }
        est.sqrt()
    }
}
