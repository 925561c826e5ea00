//! Exact samplers for `|⟨x|α⟩|²` (or `|⟨x|β⟩|²`).
//!
//! Both require the operators on the sampled half to be unitary and the
//! function to have unit modulus; then the bits off the operator half are
//! independent and uniform.

use std::collections::HashMap;

use rand::Rng;

use super::{is_unitary, GraphForrelationInstance, Side, SideData};
use crate::error::{Error, Result};
use crate::graph::{Graph, TreeDecomposition};
use crate::tn_sampler::{restrict_outcomes, DiagonalGate, QuditSystem, TnSampler};
use crate::two_local::TwoLocalFunction;
use crate::C64;

const UNIT_TOL: f64 = 1e-9;
const RANGE_TOL: f64 = 1e-9;

fn check_sampleable(sd: &SideData) -> Result<()> {
    if let Some(&v) = sd.side.iter().find(|&&v| !is_unitary(&sd.ops[v], UNIT_TOL)) {
        return Err(Error::InvalidArgument(format!("operator {v} is not unitary")));
    }
    let f = &sd.func;
    let unit = |z: &C64| (z.norm() - 1.0).abs() <= UNIT_TOL;
    let ok = unit(&f.scalar())
        && (0..f.n()).all(|v| f.vertex_term(v).iter().all(unit))
        && f.edge_terms().values().all(|t| t.iter().all(unit));
    if !ok {
        return Err(Error::InvalidArgument("sampling needs a unit-modulus function".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
struct TrieNode {
    p0: Option<f64>,
    /// Marginals of the two one-bit extensions, once computed.
    split: [f64; 2],
    child: [usize; 2],
}

const FRESH: TrieNode = TrieNode { p0: None, split: [f64::NAN; 2], child: [NONE; 2] };

const NONE: usize = usize::MAX;

/// Chain-rule sampler over prefix marginals, memoised in a trie.
///
/// Bits are drawn in [`MarginalSampler::order`]: first the vertices off the
/// operator half, then the operator half in increasing order.
#[derive(Clone, Debug)]
pub struct MarginalSampler {
    n: usize,
    n_free: usize,
    order: Vec<usize>,
    data: SideData,
    trie: Vec<TrieNode>,
}

impl MarginalSampler {
    pub fn new(inst: &GraphForrelationInstance, side: Side) -> Result<Self> {
        let data = inst.side(side).clone();
        check_sampleable(&data)?;
        let n = inst.n();
        let mut order: Vec<usize> = (0..n).filter(|&v| !data.in_side[v]).collect();
        let n_free = order.len();
        order.extend_from_slice(&data.side);
        Ok(MarginalSampler { n, n_free, order, data, trie: vec![FRESH] })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Number of memoised prefixes.
    pub fn cached_prefixes(&self) -> usize {
        self.trie.len()
    }

    /// Probability that the first `prefix.len()` bits (in sampling order)
    /// take these values.
    pub fn marginal(&self, prefix: &[u8]) -> Result<f64> {
        let l = prefix.len();
        if l > self.n {
            return Err(Error::DimensionMismatch(format!("prefix of {l} bits on {} vertices", self.n)));
        }
        if l <= self.n_free {
            return Ok((0.5f64).powi(l as i32));
        }
        let sd = &self.data;
        let t = l - self.n_free;
        let mut fixed: Vec<Option<u8>> = vec![None; self.n];
        for (i, &b) in prefix[..self.n_free].iter().enumerate() {
            fixed[self.order[i]] = Some(b);
        }
        let (fres, map) = sd.func.restrict(&fixed);
        let m = map.len();
        let xc = &prefix[self.n_free..];

        // Copies u' = u + m of the fixed operator-half vertices carry the ket.
        let mut edges = Vec::new();
        for (u, v) in fres.graph().edges() {
            edges.push((u, v));
            match (u < t, v < t) {
                (true, true) => edges.push((u + m, v + m)),
                (true, false) => edges.push((u + m, v)),
                (false, true) => edges.push((u, v + m)),
                _ => {}
            }
        }
        let mut aug = TwoLocalFunction::new(Graph::from_edges(m + t, &edges)?, 2);
        for u in 0..m {
            let h = fres.vertex_term(u);
            if u < t {
                let o = &sd.ops[map[u]];
                let row = 2 * xc[u] as usize;
                aug.set_vertex_term(u, vec![(h[0] * o[row]).conj(), (h[1] * o[row + 1]).conj()])?;
                aug.set_vertex_term(u + m, vec![h[0] * o[row], h[1] * o[row + 1]])?;
            } else {
                aug.set_vertex_term(u, h.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect())?;
            }
        }
        for (&(u, v), tab) in fres.edge_terms() {
            let conj: Vec<C64> = tab.iter().map(|z| z.conj()).collect();
            match (u < t, v < t) {
                (false, false) => aug.set_edge_term(u, v, tab.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect())?,
                (true, true) => {
                    aug.set_edge_term(u, v, conj)?;
                    aug.set_edge_term(u + m, v + m, tab.clone())?;
                }
                (true, false) => {
                    aug.set_edge_term(u, v, conj)?;
                    aug.set_edge_term(u + m, v, tab.clone())?;
                }
                (false, true) => {
                    aug.set_edge_term(u, v, conj)?;
                    aug.set_edge_term(u, v + m, tab.clone())?;
                }
            }
        }
        aug.scale(C64::new(fres.scalar().norm_sqr() * (0.5f64).powi(self.n as i32), 0.0));

        let bags: Vec<Vec<usize>> = sd
            .td
            .bags()
            .iter()
            .map(|b| b.iter().copied().chain(b.iter().filter(|&&c| c < t).map(|&c| c + m)).collect())
            .collect();
        let parents = (0..sd.td.num_nodes()).map(|i| sd.td.parent(i)).collect();
        let td = TreeDecomposition::from_parents(bags, parents)?;
        let p = aug.sum_treewidth(&td)?;
        if p.im.abs() > 1e-8 * p.re.abs().max(1e-300) + 1e-14 {
            return Err(Error::Numerical(format!("marginal has imaginary part {}", p.im)));
        }
        Ok(p.re)
    }

    /// One sample in vertex order.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<u8>> {
        let mut prefix = Vec::with_capacity(self.n);
        let mut node = 0usize;
        // Marginal of the current prefix; unknown until the operator half.
        let mut mass = None;
        for depth in 0..self.n {
            let p0 = match self.trie[node].p0 {
                Some(p) => p,
                None => {
                    let p = if depth < self.n_free {
                        0.5
                    } else {
                        let (p, split) = self.conditional(&mut prefix, mass)?;
                        self.trie[node].split = split;
                        p
                    };
                    self.trie[node].p0 = Some(p);
                    p
                }
            };
            let bit = u8::from(rng.gen::<f64>() >= p0);
            if depth >= self.n_free {
                mass = Some(self.trie[node].split[bit as usize]);
            }
            prefix.push(bit);
            let next = self.trie[node].child[bit as usize];
            node = if next == NONE {
                self.trie.push(FRESH);
                let id = self.trie.len() - 1;
                self.trie[node].child[bit as usize] = id;
                id
            } else {
                next
            };
        }
        let mut x = vec![0u8; self.n];
        for (i, &v) in self.order.iter().enumerate() {
            x[v] = prefix[i];
        }
        Ok(x)
    }

    /// `P(next bit = 0 | prefix)` and the two extension marginals. With the
    /// prefix marginal known, the second one is a difference unless that
    /// cancels badly.
    fn conditional(&self, prefix: &mut Vec<u8>, mass: Option<f64>) -> Result<(f64, [f64; 2])> {
        prefix.push(0);
        let p0 = self.marginal(prefix);
        prefix.pop();
        let p0 = p0?;
        let p1 = match mass {
            Some(m) if m - p0 > 1e-6 * m => m - p0,
            _ => {
                prefix.push(1);
                let p1 = self.marginal(prefix);
                prefix.pop();
                p1?
            }
        };
        let total = p0 + p1;
        if total <= 0.0 {
            return Err(Error::Numerical("prefix marginal vanished".into()));
        }
        let q = p0 / total;
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&q) {
            return Err(Error::Numerical(format!("conditional probability {q} out of range")));
        }
        Ok((q.clamp(0.0, 1.0), [p0, p1]))
    }
}

/// Sampler through the tensor network on the operator half: the bits off
/// that half are drawn uniformly, the gates restricted, and the rest handed
/// to [`TnSampler`]. Samplers are cached per restriction (at most
/// [`LINEAR_CACHE`] of them).
#[derive(Clone, Debug)]
pub struct LinearSampler {
    system: QuditSystem,
    data: SideData,
    cache: HashMap<Vec<u8>, (TnSampler, Vec<usize>)>,
}

pub const LINEAR_CACHE: usize = 4096;

impl LinearSampler {
    pub fn new(inst: &GraphForrelationInstance, side: Side) -> Result<Self> {
        let data = inst.side(side).clone();
        check_sampleable(&data)?;
        let f = &data.func;
        let n = f.n();
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut gates = Vec::new();
        for v in 0..n {
            gates.push(DiagonalGate::new(vec![v], f.vertex_term(v).to_vec(), 2)?);
        }
        for (&(u, v), t) in f.edge_terms() {
            let diag = (0..4).map(|i| t[(i & 1) * 2 + (i >> 1)]).collect();
            gates.push(DiagonalGate::new(vec![u, v], diag, 2)?);
        }
        let ops = (0..n).map(|v| if data.in_side[v] { data.ops[v].to_vec() } else { vec![one, zero, zero, one] }).collect();
        let system = QuditSystem::pure(2, vec![vec![h, h]; n], gates, ops)?;
        Ok(LinearSampler { system, data, cache: HashMap::new() })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<u8>> {
        let n = self.system.n();
        let outcome: Vec<Option<usize>> =
            (0..n).map(|v| if self.data.in_side[v] { None } else { Some(rng.gen_range(0..2)) }).collect();
        let mut x: Vec<u8> = outcome.iter().map(|o| o.unwrap_or(0) as u8).collect();
        if !self.cache.contains_key(&x) {
            let (reduced, kept) = restrict_outcomes(&self.system, &outcome);
            debug_assert_eq!(kept, self.data.side);
            let sampler = TnSampler::new(&reduced, &self.data.td)?;
            if self.cache.len() >= LINEAR_CACHE {
                self.cache.clear();
            }
            self.cache.insert(x.clone(), (sampler, kept));
        }
        let (sampler, kept) = &self.cache[&x];
        let local = sampler.sample(rng)?;
        for (i, &v) in kept.iter().enumerate() {
            x[v] = local[i] as u8;
        }
        Ok(x)
    }
}
