//! k-query amplitudes `q = ⟨0^m| M_1 U_{f_1} M_2 ... U_{f_k} M_{k+1} |0^m⟩`
//! and the k-fold forrelation.
//!
//! Oracles act on the low `n` bits of the basis index:
//! `U_f |z⟩|y⟩ = f(z) |z⟩|y⟩` with `z = i mod 2^n`.

use rand::Rng;

use crate::bitkit::{fwht_all, fwht_inplace};
use crate::error::{Error, Result};
use crate::linalg::{adjoint2, norm2, DenseMatrix, Mat2, ONE, ZERO};
use crate::oracle::BooleanOracle;
use crate::C64;

/// Qubit cap for circuits with a dense operator.
pub const DENSE_CAP: usize = 12;
/// Qubit cap for circuits with structured operators only.
pub const STRUCTURED_CAP: usize = 24;

/// One of the operators `M_j`.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Identity,
    HadamardAll,
    SingleQubit { qubit: usize, matrix: Mat2 },
    Diagonal(Vec<C64>),
    Dense(DenseMatrix),
}

fn apply_single(v: &mut [C64], qubit: usize, m: &Mat2) {
    let h = 1usize << qubit;
    for base in (0..v.len()).step_by(2 * h) {
        for i in base..base + h {
            let (a, b) = (v[i], v[i + h]);
            v[i] = m[0] * a + m[1] * b;
            v[i + h] = m[2] * a + m[3] * b;
        }
    }
}

impl Operator {
    fn is_dense(&self) -> bool {
        matches!(self, Operator::Dense(_))
    }

    fn check(&self, m: usize) -> Result<()> {
        let dim = 1usize << m;
        let norm = match self {
            Operator::Identity | Operator::HadamardAll => 1.0,
            Operator::SingleQubit { qubit, matrix } => {
                if *qubit >= m {
                    return Err(Error::InvalidArgument(format!("qubit {qubit} out of range")));
                }
                norm2(matrix)
            }
            Operator::Diagonal(d) => {
                if d.len() != dim {
                    return Err(Error::DimensionMismatch(format!("diagonal has {} entries, need {dim}", d.len())));
                }
                d.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            Operator::Dense(d) => {
                if d.rows != dim || d.cols != dim {
                    return Err(Error::DimensionMismatch(format!("dense operator is {}x{}, need {dim}", d.rows, d.cols)));
                }
                d.spectral_norm()
            }
        };
        if norm > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!("operator norm {norm} exceeds 1")));
        }
        Ok(())
    }

    /// `v ← M v`.
    pub fn apply(&self, v: &mut Vec<C64>) {
        match self {
            Operator::Identity => {}
            Operator::HadamardAll => fwht_all(v).expect("power-of-two state"),
            Operator::SingleQubit { qubit, matrix } => apply_single(v, *qubit, matrix),
            Operator::Diagonal(d) => v.iter_mut().zip(d).for_each(|(x, y)| *x *= y),
            Operator::Dense(d) => *v = d.matvec(v),
        }
    }

    /// `v ← M† v`.
    pub fn apply_adjoint(&self, v: &mut Vec<C64>) {
        match self {
            Operator::Identity => {}
            Operator::HadamardAll => fwht_all(v).expect("power-of-two state"),
            Operator::SingleQubit { qubit, matrix } => apply_single(v, *qubit, &adjoint2(matrix)),
            Operator::Diagonal(d) => v.iter_mut().zip(d).for_each(|(x, y)| *x *= y.conj()),
            Operator::Dense(d) => *v = d.adjoint().matvec(v),
        }
    }

    /// Dense matrix form, for cross-checks.
    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let dim = 1usize << m;
        let mut out = DenseMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            self.apply(&mut e);
            for (i, x) in e.into_iter().enumerate() {
                out.data[i * dim + j] = x;
            }
        }
        out
    }
}

/// Applies `H` to every qubit individually (reference for the fast path).
pub fn hadamard_by_qubit(v: &mut [C64], m: usize) {
    for q in 0..m {
        fwht_inplace(v, q, m).expect("power-of-two state");
    }
}

/// The circuit `M_1 U_{f_1} ... U_{f_k} M_{k+1}`.
#[derive(Clone, Debug)]
pub struct QueryCircuit {
    m: usize,
    n: usize,
    operators: Vec<Operator>,
    oracles: Vec<BooleanOracle>,
}

impl QueryCircuit {
    pub fn new(m: usize, operators: Vec<Operator>, oracles: Vec<BooleanOracle>) -> Result<Self> {
        if oracles.is_empty() {
            return Err(Error::InvalidArgument("need at least one oracle".into()));
        }
        if operators.len() != oracles.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} oracles need {} operators, got {}",
                oracles.len(),
                oracles.len() + 1,
                operators.len()
            )));
        }
        let n = oracles[0].n();
        if oracles.iter().any(|o| o.n() != n) {
            return Err(Error::DimensionMismatch("oracles disagree on n".into()));
        }
        if n > m {
            return Err(Error::InvalidArgument(format!("oracle bits n={n} exceed qubits m={m}")));
        }
        let cap = if operators.iter().any(Operator::is_dense) { DENSE_CAP } else { STRUCTURED_CAP };
        if m > cap {
            return Err(Error::CapExceeded { what: "qubits", value: m, cap });
        }
        for op in &operators {
            op.check(m)?;
        }
        Ok(QueryCircuit { m, n, operators, oracles })
    }

    /// The k-fold forrelation circuit: `m = n` and every `M_j = H^{⊗n}`.
    pub fn kfold(oracles: Vec<BooleanOracle>) -> Result<Self> {
        let n = oracles.first().map(|o| o.n()).unwrap_or(0);
        let ops = vec![Operator::HadamardAll; oracles.len() + 1];
        Self::new(n, ops, oracles)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.oracles.len()
    }

    pub fn oracles(&self) -> &[BooleanOracle] {
        &self.oracles
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    fn mask(&self) -> usize {
        (1usize << self.n) - 1
    }

    fn basis_zero(&self) -> Vec<C64> {
        let mut v = vec![ZERO; 1 << self.m];
        v[0] = ONE;
        v
    }

    /// Total queries made so far across all oracles.
    pub fn queries(&self) -> u64 {
        self.oracles.iter().map(|o| o.queries()).sum()
    }
}

/// Exact `q` by sequential state-vector application; `2^n` queries per oracle.
pub fn amplitude_exact(c: &QueryCircuit) -> Result<C64> {
    let mask = c.mask();
    let mut v = c.basis_zero();
    c.operators[c.k()].apply(&mut v);
    for j in (0..c.k()).rev() {
        let table = c.oracles[j].truth_table();
        for (i, x) in v.iter_mut().enumerate() {
            if table[i & mask] < 0 {
                *x = -*x;
            }
        }
        c.operators[j].apply(&mut v);
    }
    Ok(v[0])
}

/// The distribution `p_α(z) = ‖Π(z) α‖² / ‖α‖²` over the low `n` bits.
#[derive(Clone, Debug)]
pub struct ProjectionDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ProjectionDistribution {
    pub fn new(alpha: &[C64], n: usize) -> Result<Self> {
        if !alpha.len().is_power_of_two() || alpha.len() < 1 << n {
            return Err(Error::DimensionMismatch("state length must be 2^m with m >= n".into()));
        }
        let mask = (1usize << n) - 1;
        let mut probs = vec![0.0; 1 << n];
        for (i, a) in alpha.iter().enumerate() {
            probs[i & mask] += a.norm_sqr();
        }
        let total: f64 = probs.iter().sum();
        if total.sqrt() <= 1e-12 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(probs.len());
        for p in probs.iter_mut() {
            *p /= total;
            acc += *p;
            cumulative.push(acc);
        }
        Ok(ProjectionDistribution { probs, cumulative })
    }

    pub fn prob(&self, z: usize) -> f64 {
        self.probs[z]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let mut z = self.cumulative.partition_point(|&c| c <= u);
        // Skip zero-probability strings sitting at the boundary.
        while z < self.probs.len() && self.probs[z] == 0.0 {
            z += 1;
        }
        z.min(self.probs.len() - 1)
    }
}

/// One draw from `p_α`.
pub fn sample_projection<R: Rng + ?Sized>(alpha: &[C64], n: usize, rng: &mut R) -> Result<usize> {
    Ok(ProjectionDistribution::new(alpha, n)?.sample(rng))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KfoldEstimate {
    pub value: C64,
    pub epsilon: f64,
    /// Samples per level; zero when the exact branch was taken.
    pub samples: usize,
    pub queries_used: u64,
    pub exact: bool,
    /// Set when an intermediate state vanished and the estimate is 0.
    pub annihilated: bool,
}

/// `B = 2k ⌈2^{n(1-1/k)} (ε²/400)^{-1/k}⌉`.
pub fn query_budget(n: usize, k: usize, epsilon: f64) -> f64 {
    let kf = k as f64;
    let inner = 2f64.powf(n as f64 * (1.0 - 1.0 / kf)) * (epsilon * epsilon / 400.0).powf(-1.0 / kf);
    2.0 * kf * inner.ceil()
}

/// Estimate of `q` within `ε` with probability at least 0.99.
pub fn amplitude_estimate<R: Rng + ?Sized>(c: &QueryCircuit, epsilon: f64, rng: &mut R) -> Result<KfoldEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let (n, k) = (c.n(), c.k());
    let budget = query_budget(n, k, epsilon);
    if budget >= (k as f64) * (1u64 << n) as f64 {
        let value = amplitude_exact(c)?;
        return Ok(KfoldEstimate {
            value,
            epsilon,
            samples: 0,
            queries_used: (k as u64) << n,
            exact: true,
            annihilated: false,
        });
    }
    let l = (budget / k as f64) as usize;
    let mut est = amplitude_sampled(c, l, rng)?;
    est.epsilon = epsilon;
    Ok(est)
}

/// Sampling branch with an explicit number `L` of samples per level.
pub fn amplitude_sampled<R: Rng + ?Sized>(c: &QueryCircuit, l: usize, rng: &mut R) -> Result<KfoldEstimate> {
    let (est, _) = amplitude_sampled_trace(c, l, rng)?;
    Ok(est)
}

/// Sampling branch that also reports `‖φ_j‖²` for `j = 0..=k`.
pub fn amplitude_sampled_trace<R: Rng + ?Sized>(
    c: &QueryCircuit,
    l: usize,
    rng: &mut R,
) -> Result<(KfoldEstimate, Vec<f64>)> {
    if l == 0 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    let mask = c.mask();
    let mut phi = c.basis_zero();
    let mut norms = vec![1.0];
    let mut annihilated = false;
    for j in 0..c.k() {
        c.operators[j].apply_adjoint(&mut phi);
        let dist = match ProjectionDistribution::new(&phi, c.n) {
            Ok(d) => d,
            Err(_) => {
                annihilated = true;
                break;
            }
        };
        let mut weight = vec![0.0; 1 << c.n];
        for _ in 0..l {
            let z = dist.sample(rng);
            let fz = c.oracles[j].evaluate(z as u64) as f64;
            weight[z] += fz / (l as f64 * dist.prob(z));
        }
        for (i, x) in phi.iter_mut().enumerate() {
            *x *= weight[i & mask];
        }
        norms.push(phi.iter().map(|z| z.norm_sqr()).sum());
    }
    let value = if annihilated {
        ZERO
    } else {
        let mut tail = c.basis_zero();
        c.operators[c.k()].apply(&mut tail);
        phi.iter().zip(&tail).map(|(a, b)| a.conj() * b).sum()
    };
    let est = KfoldEstimate {
        value,
        epsilon: f64::NAN,
        samples: l,
        queries_used: (c.k() * l) as u64,
        exact: false,
        annihilated,
    };
    Ok((est, norms))
}

/// k-fold forrelation `Φ(f_1, ..., f_k)` within `ε`.
pub fn kfold_phi<R: Rng + ?Sized>(oracles: &[BooleanOracle], epsilon: f64, rng: &mut R) -> Result<KfoldEstimate> {
    let c = QueryCircuit::kfold(oracles.to_vec())?;
    amplitude_estimate(&c, epsilon, rng)
}
