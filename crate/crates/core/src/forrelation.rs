//! Exact and randomized estimation of the forrelation
//! `Φ(f,g) = 2^{-3n/2} Σ_{x,y} f(x) g(y) (-1)^{x·y}`.

use rand::Rng;

use crate::bitkit::{fwht_all, gray_code, BitMatrix, BitVector};
use crate::error::{Error, Result};
use crate::oracle::BooleanOracle;

/// Largest `n` evaluated by the dense exact path.
pub const EXACT_CAP: usize = 24;

/// How an estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Affine { k: usize },
    NaiveSample { samples: usize },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Affine { .. } => "affine",
            Method::NaiveSample { .. } => "naive-sample",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForrelationEstimate {
    pub value: f64,
    pub epsilon: f64,
    pub queries_used: u64,
    pub method: Method,
}

fn check_pair(f: &BooleanOracle, g: &BooleanOracle) -> Result<usize> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch(format!("f has n={}, g has n={}", f.n(), g.n())));
    }
    Ok(f.n())
}

/// `⟨0|H U_f H U_g H|0⟩` by three Walsh-Hadamard passes; `2^{n+1}` queries.
pub fn phi_exact(f: &BooleanOracle, g: &BooleanOracle) -> Result<f64> {
    let n = check_pair(f, g)?;
    if n > EXACT_CAP {
        return Err(Error::CapExceeded { what: "n", value: n, cap: EXACT_CAP });
    }
    let size = 1usize << n;
    let amp = (size as f64).sqrt().recip();
    let mut v: Vec<f64> = (0..size as u64).map(|x| amp * g.evaluate(x) as f64).collect();
    fwht_all(&mut v)?;
    for (x, vx) in v.iter_mut().enumerate() {
        *vx *= f.evaluate(x as u64) as f64;
    }
    // The final H layer followed by ⟨0| is a plain normalized sum.
    Ok(v.iter().sum::<f64>() * amp)
}

/// A coset `{A x + b : x ∈ {0,1}^k}` of dimension `k` in `F_2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSubspace {
    a: BitMatrix,
    b: BitVector,
}

impl AffineSubspace {
    pub fn new(a: BitMatrix, b: BitVector) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch("offset length differs from ambient dimension".into()));
        }
        if a.cols() > a.rows() || a.rank() != a.cols() {
            return Err(Error::InvalidArgument("A must have full column rank".into()));
        }
        Ok(AffineSubspace { a, b })
    }

    /// The whole space `F_2^n`.
    pub fn full(n: usize) -> Self {
        AffineSubspace { a: BitMatrix::identity(n), b: BitVector::zeros(n) }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn k(&self) -> usize {
        self.a.cols()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.a
    }

    pub fn offset(&self) -> &BitVector {
        &self.b
    }

    fn columns_u64(&self) -> Vec<u64> {
        (0..self.k()).map(|j| self.a.column(j).to_u64()).collect()
    }

    /// All `2^k` elements as packed integers, in Gray order of `x`.
    pub fn elements(&self) -> Vec<u64> {
        let cols = self.columns_u64();
        let mut p = self.b.to_u64();
        gray_code(self.k())
            .map(|s| {
                if let Some(j) = s.flipped {
                    p ^= cols[j];
                }
                p
            })
            .collect()
    }
}

/// Uniform sample from the cosets of dimension `k` (rejection on rank).
pub fn sample_affine_subspace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<AffineSubspace> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if n > crate::oracle::MAX_ORACLE_BITS {
        return Err(Error::CapExceeded { what: "n", value: n, cap: crate::oracle::MAX_ORACLE_BITS });
    }
    loop {
        let a = BitMatrix::random(n, k, rng);
        if a.rank() == k {
            return Ok(AffineSubspace { a, b: BitVector::random(n, rng) });
        }
    }
}

fn parity(x: u64) -> f64 {
    if x.count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `μ(S,T) = 2^{n-k} ⟨S| U_f H U_g |T⟩`, exactly `2^{k+1}` queries.
pub fn mu_affine(f: &BooleanOracle, g: &BooleanOracle, s: &AffineSubspace, t: &AffineSubspace) -> Result<f64> {
    let n = check_pair(f, g)?;
    if s.n() != n || t.n() != n || s.k() != t.k() {
        return Err(Error::DimensionMismatch("subspace dimensions disagree with oracles".into()));
    }
    let k = s.k();
    // M = C^T A maps x to the y-dual index; w = A^T d, v = C^T b.
    let ct = t.a.transpose();
    let m = ct.mul(&s.a)?;
    let m_cols: Vec<u64> = (0..k).map(|j| m.column(j).to_u64()).collect();
    let w = s.a.transpose().matvec(&t.b)?.to_u64();
    let v = ct.matvec(&s.b)?.to_u64();
    let a_cols = s.columns_u64();
    let c_cols = t.columns_u64();

    let mut psi = vec![0.0f64; 1 << k];
    let mut point = s.b.to_u64();
    let mut image = 0u64;
    for step in gray_code(k) {
        if let Some(j) = step.flipped {
            point ^= a_cols[j];
            image ^= m_cols[j];
        }
        psi[image as usize] += f.evaluate(point) as f64 * parity(step.code & w);
    }
    fwht_all(&mut psi)?;

    let mut total = 0.0;
    let mut point = t.b.to_u64();
    for step in gray_code(k) {
        if let Some(j) = step.flipped {
            point ^= c_cols[j];
        }
        total += psi[step.code as usize] * g.evaluate(point) as f64 * parity(step.code & v);
    }
    let scale = 2f64.powf(n as f64 / 2.0 - 1.5 * k as f64);
    Ok(total * scale * parity(s.b.to_u64() & t.b.to_u64()))
}

/// Smallest `k` with `2^{2k} >= 2^{log2_constant} 2^n ε^{-2}`.
pub fn choose_k(n: usize, epsilon: f64, log2_constant: f64) -> usize {
    let need = log2_constant + n as f64 - 2.0 * epsilon.log2();
    let mut k = (need / 2.0).ceil().max(1.0) as usize;
    // Guard against the ceiling landing one step high through rounding.
    while k > 1 && 2.0 * (k - 1) as f64 >= need {
        k -= 1;
    }
    k
}

/// Tuning for [`phi_estimate_with`].
#[derive(Clone, Copy, Debug)]
pub struct AffineConfig {
    /// `log2` of the constant in the choice of `k`; 16 by default.
    pub log2_constant: f64,
}

impl Default for AffineConfig {
    fn default() -> Self {
        AffineConfig { log2_constant: 16.0 }
    }
}

/// Estimate within `ε` with probability at least 0.99.
pub fn phi_estimate<R: Rng + ?Sized>(
    f: &BooleanOracle,
    g: &BooleanOracle,
    epsilon: f64,
    rng: &mut R,
) -> Result<ForrelationEstimate> {
    phi_estimate_with(f, g, epsilon, rng, AffineConfig::default())
}

pub fn phi_estimate_with<R: Rng + ?Sized>(
    f: &BooleanOracle,
    g: &BooleanOracle,
    epsilon: f64,
    rng: &mut R,
    cfg: AffineConfig,
) -> Result<ForrelationEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = check_pair(f, g)?;
    let k = choose_k(n, epsilon, cfg.log2_constant);
    if epsilon <= 2f64.powf(-(n as f64) / 2.0) || k >= n {
        let value = phi_exact(f, g)?;
        return Ok(ForrelationEstimate { value, epsilon, queries_used: 2 << n, method: Method::Exact });
    }
    let s = sample_affine_subspace(n, k, rng)?;
    let t = sample_affine_subspace(n, k, rng)?;
    let value = mu_affine(f, g, &s, &t)?;
    Ok(ForrelationEstimate { value, epsilon, queries_used: 2 << k, method: Method::Affine { k } })
}

/// The sample forrelation over explicit sample sets.
pub fn sample_forrelation(f: &BooleanOracle, g: &BooleanOracle, xs: &[u64], ys: &[u64]) -> Result<f64> {
    let n = check_pair(f, g)?;
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidArgument("sample sets must be nonempty and of equal size".into()));
    }
    let fx: Vec<f64> = xs.iter().map(|&x| f.evaluate(x) as f64).collect();
    let gy: Vec<f64> = ys.iter().map(|&y| g.evaluate(y) as f64).collect();
    let mut total = 0.0;
    for (&x, &fv) in xs.iter().zip(&fx) {
        let mut row = 0.0;
        for (&y, &gv) in ys.iter().zip(&gy) {
            row += gv * parity(x & y);
        }
        total += fv * row;
    }
    let l = xs.len() as f64;
    Ok(total * 2f64.powf(n as f64 / 2.0) / (l * l))
}

/// Unbiased sample forrelation from `L` uniform x's and `L` uniform y's.
pub fn phi_naive_sample<R: Rng + ?Sized>(
    f: &BooleanOracle,
    g: &BooleanOracle,
    l: usize,
    rng: &mut R,
) -> Result<f64> {
    let n = check_pair(f, g)?;
    if l == 0 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let xs: Vec<u64> = (0..l).map(|_| rng.gen::<u64>() & mask).collect();
    let ys: Vec<u64> = (0..l).map(|_| rng.gen::<u64>() & mask).collect();
    sample_forrelation(f, g, &xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn definitional(f: &BooleanOracle, g: &BooleanOracle) -> f64 {
        let n = f.n();
        let mut s = 0.0;
        for x in 0..1u64 << n {
            for y in 0..1u64 << n {
                s += (f.peek(x) * g.peek(y)) as f64 * parity(x & y);
            }
        }
        s * 2f64.powf(-1.5 * n as f64)
    }

    fn double_sum(f: &BooleanOracle, g: &BooleanOracle, s: &AffineSubspace, t: &AffineSubspace) -> f64 {
        let (n, k) = (s.n(), s.k());
        let mut acc = 0.0;
        for x in s.elements() {
            for y in t.elements() {
                acc += (f.peek(x) * g.peek(y)) as f64 * parity(x & y);
            }
        }
        acc * 2f64.powf(n as f64 / 2.0 - 2.0 * k as f64)
    }

    #[test]
    fn constant_functions() {
        let f = BooleanOracle::constant(2, 1).unwrap();
        assert!((phi_exact(&f, &f).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn first_bit_parities() {
        let f = BooleanOracle::parity(3, 1).unwrap();
        let v = phi_exact(&f, &f).unwrap();
        assert!((v + 2f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_definition_and_counts_queries() {
        for seed in 0..10 {
            let f = BooleanOracle::seeded(4, seed).unwrap();
            let g = BooleanOracle::seeded(4, seed + 100).unwrap();
            let v = phi_exact(&f, &g).unwrap();
            assert!((v - definitional(&f, &g)).abs() < 1e-10);
            assert_eq!(f.queries() + g.queries(), 32);
        }
    }

    #[test]
    fn exact_cap() {
        let f = BooleanOracle::constant(25, 1).unwrap();
        assert!(matches!(phi_exact(&f, &f), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn full_subspace_gives_phi() {
        let f = BooleanOracle::seeded(6, 1).unwrap();
        let g = BooleanOracle::seeded(6, 2).unwrap();
        let full = AffineSubspace::full(6);
        let mu = mu_affine(&f, &g, &full, &full).unwrap();
        assert!((mu - phi_exact(&f, &g).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn k_equal_n_covers_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_affine_subspace(5, 5, &mut rng).unwrap();
        let mut e = s.elements();
        e.sort();
        assert_eq!(e, (0..32).collect::<Vec<_>>());
        assert!(sample_affine_subspace(3, 4, &mut rng).is_err());
    }

    #[test]
    fn cosets_have_full_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let s = sample_affine_subspace(7, 3, &mut rng).unwrap();
            let set: std::collections::HashSet<u64> = s.elements().into_iter().collect();
            assert_eq!(set.len(), 8);
        }
    }

    #[test]
    fn one_dimensional_cosets_are_uniform() {
        // 7 nonzero directions, 4 cosets each: 28 distinct lines.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 28_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let s = sample_affine_subspace(3, 1, &mut rng).unwrap();
            let mut e = s.elements();
            e.sort();
            *counts.entry(e).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 28);
        let expected = draws as f64 / 28.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 27 degrees of freedom; p = 0.001 at about 55.5.
        assert!(chi2 < 55.5, "chi2 = {chi2}");
    }

    #[test]
    fn mu_with_constant_functions_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = BooleanOracle::constant(5, 1).unwrap();
        for k in 1..=5 {
            let s = sample_affine_subspace(5, k, &mut rng).unwrap();
            let t = sample_affine_subspace(5, k, &mut rng).unwrap();
            assert!((mu_affine(&f, &f, &s, &t).unwrap() - double_sum(&f, &f, &s, &t)).abs() < 1e-10);
        }
    }

    #[test]
    fn mu_pipeline_matches_double_sum_and_counts_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..20 {
            let f = BooleanOracle::seeded(6, seed).unwrap();
            let g = BooleanOracle::seeded(6, seed + 50).unwrap();
            let s = sample_affine_subspace(6, 3, &mut rng).unwrap();
            let t = sample_affine_subspace(6, 3, &mut rng).unwrap();
            let mu = mu_affine(&f, &g, &s, &t).unwrap();
            assert_eq!(f.queries() + g.queries(), 16);
            assert!((mu - double_sum(&f, &g, &s, &t)).abs() < 1e-10);
        }
    }

    #[test]
    fn small_epsilon_is_exact() {
        let f = BooleanOracle::seeded(8, 1).unwrap();
        let g = BooleanOracle::seeded(8, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let eps = 2f64.powf(-4.0) / 2.0;
        let est = phi_estimate(&f, &g, eps, &mut rng).unwrap();
        assert_eq!(est.method, Method::Exact);
        assert_eq!(est.queries_used, 512);
        assert_eq!(est.value, phi_exact(&f, &g).unwrap());
        assert!(phi_estimate(&f, &g, 0.0, &mut rng).is_err());
    }

    #[test]
    fn choose_k_is_minimal() {
        for n in 1..40 {
            for &eps in &[0.01, 0.1, 0.3, 0.5, 0.99] {
                let k = choose_k(n, eps, 16.0);
                let need = 16.0 + n as f64 - 2.0 * f64::log2(eps);
                assert!(2.0 * k as f64 >= need - 1e-12);
                assert!(k == 1 || 2.0 * ((k - 1) as f64) < need);
            }
        }
    }

    #[test]
    fn affine_branch_counts_queries() {
        // n = 20, ε = 0.9 gives k = 19 < n.
        let f = BooleanOracle::seeded(20, 1).unwrap();
        let g = BooleanOracle::seeded(20, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = phi_estimate(&f, &g, 0.9, &mut rng).unwrap();
        assert_eq!(est.method, Method::Affine { k: 19 });
        assert_eq!(f.queries() + g.queries(), 1 << 20);
        assert_eq!(est.queries_used, 1 << 20);
    }

    #[test]
    fn forced_enumeration_is_exact() {
        let f = BooleanOracle::seeded(4, 1).unwrap();
        let g = BooleanOracle::seeded(4, 2).unwrap();
        let all: Vec<u64> = (0..16).collect();
        let z = sample_forrelation(&f, &g, &all, &all).unwrap();
        assert!((z - definitional(&f, &g)).abs() < 1e-12);
    }

    #[test]
    fn naive_sample_is_unbiased_for_constants() {
        let f = BooleanOracle::constant(4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let runs = 10_000;
        let zs: Vec<f64> = (0..runs).map(|_| phi_naive_sample(&f, &f, 5, &mut rng).unwrap()).collect();
        let mean = zs.iter().sum::<f64>() / runs as f64;
        let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        assert!((mean - 0.25).abs() < 3.0 * (var / runs as f64).sqrt());
    }

    #[test]
    fn naive_sample_is_unbiased_for_random() {
        let f = BooleanOracle::seeded(6, 11).unwrap();
        let g = BooleanOracle::seeded(6, 12).unwrap();
        let phi = phi_exact(&f, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let runs = 10_000;
        let zs: Vec<f64> = (0..runs).map(|_| phi_naive_sample(&f, &g, 64, &mut rng).unwrap()).collect();
        let mean = zs.iter().sum::<f64>() / runs as f64;
        let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        assert!((mean - phi).abs() < 3.0 * (var / runs as f64).sqrt());
    }

    #[test]
    fn mu_is_unbiased() {
        let f = BooleanOracle::seeded(8, 21).unwrap();
        let g = BooleanOracle::seeded(8, 22).unwrap();
        let phi = phi_exact(&f, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let runs = 4000;
        let mut mean = 0.0;
        for _ in 0..runs {
            let s = sample_affine_subspace(8, 5, &mut rng).unwrap();
            let t = sample_affine_subspace(8, 5, &mut rng).unwrap();
            mean += mu_affine(&f, &g, &s, &t).unwrap();
        }
        mean /= runs as f64;
        assert!((mean - phi).abs() < 4.0 / (runs as f64).sqrt());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exact_is_bounded(seed in any::<u64>(), n in 1usize..9) {
            let f = BooleanOracle::seeded(n, seed).unwrap();
            let g = BooleanOracle::seeded(n, seed ^ 0xabc).unwrap();
            prop_assert!(phi_exact(&f, &g).unwrap().abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn mu_reparameterization_invariant(seed in any::<u64>(), k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 6;
            let f = BooleanOracle::seeded(n, seed).unwrap();
            let g = BooleanOracle::seeded(n, seed.wrapping_add(1)).unwrap();
            let s = sample_affine_subspace(n, k, &mut rng).unwrap();
            let t = sample_affine_subspace(n, k, &mut rng).unwrap();
            let gmat = loop {
                let m = BitMatrix::random(k, k, &mut rng);
                if m.rank() == k { break m; }
            };
            let s2 = AffineSubspace::new(s.matrix().mul(&gmat).unwrap(), s.offset().clone()).unwrap();
            let a = mu_affine(&f, &g, &s, &t).unwrap();
            let b = mu_affine(&f, &g, &s2, &t).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
