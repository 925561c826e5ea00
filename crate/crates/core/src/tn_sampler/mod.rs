//! Sampling `x ~ ⟨x|OUχU†O†|x⟩` for product initial states `χ`, diagonal
//! gates `U` and single-qudit operators `O`, driven by a tree decomposition
//! of the gate connectivity graph.
//!
//! Wires of the doubled network have dimension `d²`; the index of a wire is
//! `ket * d + bra`. Outcomes are 0-based symbols in `0..d`.

mod tensor;

pub use tensor::{index_map, Tensor};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{validate_td, Graph, TreeDecomposition};
use crate::C64;

/// Largest dense tensor (entries) any contraction may create.
pub const TENSOR_CAP: usize = 1 << 24;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Diagonal gate on `support`; entry `Σ_j x[support[j]] d^j` of `diag`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalGate {
    support: Vec<usize>,
    diag: Vec<C64>,
}

impl DiagonalGate {
    pub fn new(support: Vec<usize>, diag: Vec<C64>, d: usize) -> Result<Self> {
        let mut s = support.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != support.len() {
            return Err(Error::InvalidArgument("gate support has repeated qudits".into()));
        }
        if diag.len() != d.pow(support.len() as u32) {
            return Err(Error::DimensionMismatch(format!("gate diagonal needs {} entries", d.pow(support.len() as u32))));
        }
        Ok(DiagonalGate { support, diag })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn diag(&self) -> &[C64] {
        &self.diag
    }

    /// Entry for the assignment `value(q)` on each support qudit.
    pub fn at(&self, d: usize, value: impl Fn(usize) -> usize) -> C64 {
        let idx = self.support.iter().rev().fold(0, |acc, &q| acc * d + value(q));
        self.diag[idx]
    }
}

/// An instance: initial product state, diagonal gates and operators.
#[derive(Clone, Debug)]
pub struct QuditSystem {
    d: usize,
    chi: Vec<Vec<C64>>,
    pure: Option<Vec<Vec<C64>>>,
    gates: Vec<DiagonalGate>,
    ops: Vec<Vec<C64>>,
}

fn is_psd(m: &[C64], d: usize, tol: f64) -> bool {
    for i in 0..d {
        for j in 0..d {
            if (m[i * d + j] - m[j * d + i].conj()).norm() > tol {
                return false;
            }
        }
    }
    // Cholesky with pivot tolerance; semidefinite pivots must zero their column.
    let mut a = m.to_vec();
    for k in 0..d {
        let p = a[k * d + k].re;
        if p < -tol {
            return false;
        }
        if p <= tol {
            if (k + 1..d).any(|i| a[i * d + k].norm() > tol.sqrt()) {
                return false;
            }
            continue;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let v = a[i * d + k] * a[k * d + j] / p;
                a[i * d + j] -= v;
            }
        }
    }
    true
}

impl QuditSystem {
    /// `chi[i]` and `ops[i]` are row-major `d x d` matrices.
    pub fn new(d: usize, chi: Vec<Vec<C64>>, gates: Vec<DiagonalGate>, ops: Vec<Vec<C64>>) -> Result<Self> {
        let n = chi.len();
        if ops.len() != n {
            return Err(Error::DimensionMismatch(format!("{} states but {} operators", n, ops.len())));
        }
        for (i, c) in chi.iter().enumerate() {
            if c.len() != d * d {
                return Err(Error::DimensionMismatch(format!("state {i} is not {d}x{d}")));
            }
            let tr: C64 = (0..d).map(|k| c[k * d + k]).sum();
            if (tr - ONE).norm() > 1e-9 || !is_psd(c, d, 1e-9) {
                return Err(Error::InvalidArgument(format!("state {i} is not a density matrix")));
            }
        }
        if let Some(i) = ops.iter().position(|o| o.len() != d * d) {
            return Err(Error::DimensionMismatch(format!("operator {i} is not {d}x{d}")));
        }
        for g in &gates {
            if g.support.iter().any(|&q| q >= n) || g.diag.len() != d.pow(g.support.len() as u32) {
                return Err(Error::InvalidArgument("gate support out of range".into()));
            }
        }
        Ok(QuditSystem { d, chi, pure: None, gates, ops })
    }

    /// Pure product state `⊗|ψ_i⟩`; each vector must have unit norm.
    pub fn pure(d: usize, states: Vec<Vec<C64>>, gates: Vec<DiagonalGate>, ops: Vec<Vec<C64>>) -> Result<Self> {
        let chi = states
            .iter()
            .map(|v| {
                let mut m = vec![ZERO; d * d];
                for i in 0..d.min(v.len()) {
                    for j in 0..d.min(v.len()) {
                        m[i * d + j] = v[i] * v[j].conj();
                    }
                }
                m
            })
            .collect();
        if states.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(format!("pure states need {d} entries")));
        }
        let mut sys = QuditSystem::new(d, chi, gates, ops)?;
        sys.pure = Some(states);
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.chi.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn chi(&self, i: usize) -> &[C64] {
        &self.chi[i]
    }

    pub fn op(&self, i: usize) -> &[C64] {
        &self.ops[i]
    }

    pub fn gates(&self) -> &[DiagonalGate] {
        &self.gates
    }

    /// Edge between every pair of qudits sharing a gate.
    pub fn connectivity_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for g in &self.gates {
            for (i, &u) in g.support.iter().enumerate() {
                for &v in &g.support[i + 1..] {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(self.n(), &edges).expect("supports are in range")
    }

    fn is_identity_op(&self, i: usize) -> bool {
        let d = self.d;
        (0..d * d).all(|k| {
            let target = if k / d == k % d { ONE } else { ZERO };
            (self.ops[i][k] - target).norm() <= 1e-12
        })
    }

    fn dd(&self) -> usize {
        self.d * self.d
    }

    /// `vec(χ_b)`.
    fn vec_chi(&self, b: usize) -> Vec<C64> {
        self.chi[b].clone()
    }

    /// Merge coefficients: reciprocal of `vec(χ_b)` on its support, else 0.
    pub fn merge_coefficients(&self, b: usize) -> Vec<C64> {
        self.chi[b].iter().map(|&a| if a == ZERO { ZERO } else { ONE / a }).collect()
    }

    /// `O ⊗ Ō` as a `d² x d²` matrix.
    fn doubled_op(&self, b: usize) -> Vec<C64> {
        let d = self.d;
        let o = &self.ops[b];
        let dd = d * d;
        let mut m = vec![ZERO; dd * dd];
        for kp in 0..d {
            for lp in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        m[(kp * d + lp) * dd + k * d + l] = o[kp * d + k] * o[lp * d + l].conj();
                    }
                }
            }
        }
        m
    }

    /// `Σ_x ⟨x|O|k⟩⟨x|O|l⟩*`: closing a wire after the operator.
    fn trace_weight(&self, b: usize) -> Vec<C64> {
        let d = self.d;
        let o = &self.ops[b];
        (0..d * d).map(|kl| (0..d).map(|x| o[x * d + kl / d] * o[x * d + kl % d].conj()).sum()).collect()
    }

    /// Projection onto outcome `x` after the operator.
    fn outcome_weight(&self, b: usize, x: usize) -> Vec<C64> {
        let d = self.d;
        let o = &self.ops[b];
        (0..d * d).map(|kl| o[x * d + kl / d] * o[x * d + kl % d].conj()).collect()
    }
}

/// `c ∘ u ∘ v` with the merge coefficients `c` of the qudit's state.
pub fn merge_apply(coefficients: &[C64], u: &[C64], v: &[C64]) -> Vec<C64> {
    coefficients.iter().zip(u).zip(v).map(|((c, a), b)| c * a * b).collect()
}

/// Stages of one tree node.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NodeStages {
    /// `(qudit, incoming wires)` for qudits arriving from two or more children.
    pub merges: Vec<(usize, usize)>,
    /// Qudits whose state tensor is introduced here.
    pub intros: Vec<usize>,
    /// Gates owned by this node.
    pub gates: Vec<usize>,
    /// Qudits leaving the tree here (operator applied, then measured).
    pub ops: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct StagedNetwork {
    td: TreeDecomposition,
    children: Vec<Vec<usize>>,
    nodes: Vec<NodeStages>,
    owner: Vec<usize>,
}

impl StagedNetwork {
    pub fn td(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn node(&self, i: usize) -> &NodeStages {
        &self.nodes[i]
    }

    /// Node owning gate `g`.
    pub fn owner(&self, g: usize) -> usize {
        self.owner[g]
    }

    fn up_labels(&self, node: usize) -> Vec<usize> {
        match self.td.parent(node) {
            None => Vec::new(),
            Some(p) => {
                let pb = self.td.bag(p);
                self.td.bag(node).iter().copied().filter(|v| pb.binary_search(v).is_ok()).collect()
            }
        }
    }
}

fn contains_all(bag: &[usize], s: &[usize]) -> bool {
    s.iter().all(|v| bag.binary_search(v).is_ok())
}

/// Assigns every gate to the highest node containing its support and lays
/// out the merge / introduction / gate / operator stages.
pub fn build_network(sys: &QuditSystem, td: &TreeDecomposition) -> Result<StagedNetwork> {
    validate_td(&sys.connectivity_graph(), td).map_err(Error::InvalidTreeDecomposition)?;
    let m = td.num_nodes();
    let children = td.children();
    let mut nodes = vec![NodeStages::default(); m];
    let mut owner = Vec::with_capacity(sys.gates.len());
    for (gi, g) in sys.gates.iter().enumerate() {
        let mut node = (0..m)
            .find(|&i| contains_all(td.bag(i), &g.support))
            .ok_or_else(|| Error::InvalidArgument(format!("gate {gi} support not covered by any bag")))?;
        while let Some(p) = td.parent(node) {
            if !contains_all(td.bag(p), &g.support) {
                break;
            }
            node = p;
        }
        nodes[node].gates.push(gi);
        owner.push(node);
    }
    for (i, stages) in nodes.iter_mut().enumerate() {
        let parent_bag = td.parent(i).map(|p| td.bag(p));
        for &b in td.bag(i) {
            let count = children[i].iter().filter(|&&c| td.bag(c).binary_search(&b).is_ok()).count();
            match count {
                0 => stages.intros.push(b),
                1 => {}
                k => stages.merges.push((b, k)),
            }
            if parent_bag.map_or(true, |pb| pb.binary_search(&b).is_err()) {
                stages.ops.push(b);
            }
        }
    }
    Ok(StagedNetwork { td: td.clone(), children, nodes, owner })
}

fn check_cap(dim: usize, wires: usize) -> Result<()> {
    let size = (dim as f64).powi(wires as i32);
    if size > TENSOR_CAP as f64 {
        return Err(Error::CapExceeded { what: "tensor entries", value: size as usize, cap: TENSOR_CAP });
    }
    Ok(())
}

/// Merge, introduction and gate stages of a node as one tensor over its bag.
fn local_tensor(sys: &QuditSystem, net: &StagedNetwork, node: usize) -> Result<Tensor> {
    let bag = net.td.bag(node).to_vec();
    let d = sys.d;
    let dd = sys.dd();
    check_cap(dd, bag.len())?;
    let mut t = Tensor::scalar(ONE, dd);
    let st = &net.nodes[node];
    for &b in &st.intros {
        t = t.mul(&Tensor::vector(b, sys.vec_chi(b)));
    }
    for &(b, k) in &st.merges {
        let c = sys.merge_coefficients(b);
        t = t.mul(&Tensor::vector(b, c.iter().map(|x| x.powi(k as i32 - 1)).collect()));
    }
    // Product of owned gates over ket configurations, then doubled.
    let mut pos = vec![usize::MAX; sys.n()];
    for (j, &b) in bag.iter().enumerate() {
        pos[b] = j;
    }
    let kets = Tensor::from_fn(bag.clone(), d, |k| {
        st.gates.iter().fold(ONE, |acc, &g| acc * sys.gates[g].at(d, |q| k[pos[q]]))
    });
    let doubled = Tensor::from_fn(bag.clone(), dd, |kl| {
        let k: Vec<usize> = kl.iter().map(|x| x / d).collect();
        let l: Vec<usize> = kl.iter().map(|x| x % d).collect();
        kets.get(&k) * kets.get(&l).conj()
    });
    Ok(t.mul(&doubled))
}

/// Contracts the whole staged network with every output wire open; the
/// result is `vec(OUχU†O†)` with label `q` for qudit `q`.
pub fn contract_network(sys: &QuditSystem, net: &StagedNetwork) -> Result<Tensor> {
    let n = sys.n();
    check_cap(sys.dd(), n)?;
    fn go(sys: &QuditSystem, net: &StagedNetwork, node: usize) -> Result<Tensor> {
        let n = sys.n();
        let mut t = local_tensor(sys, net, node)?;
        for &c in &net.children[node] {
            t = t.mul(&go(sys, net, c)?);
        }
        for &b in &net.nodes[node].ops {
            t = t.apply(b, &sys.doubled_op(b)).relabel(|l| if l == b { n + b } else { l });
        }
        Ok(t)
    }
    Ok(go(sys, net, net.td.root())?.relabel(|l| l - n))
}

/// One node's draw during the top-down pass.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeDraw {
    pub node: usize,
    pub qudits: Vec<usize>,
    /// Conditional distribution over the joint outcome of `qudits`
    /// (little-endian in `d`).
    pub probs: Vec<f64>,
}

/// Precomputed network and bottom-up tensors; each call to
/// [`TnSampler::sample`] performs one top-down pass.
#[derive(Clone, Debug)]
pub struct TnSampler {
    sys: QuditSystem,
    net: StagedNetwork,
    local: Vec<Tensor>,
    /// Local tensor times children messages, over the bag.
    rho: Vec<Tensor>,
    /// `rho` with departing qudits traced out, over the parent overlap.
    rho_up: Vec<Tensor>,
    up: Vec<Vec<usize>>,
    doubled_ops: Vec<Vec<C64>>,
}

impl TnSampler {
    pub fn new(sys: &QuditSystem, td: &TreeDecomposition) -> Result<Self> {
        let net = build_network(sys, td)?;
        let m = td.num_nodes();
        let mut local = Vec::with_capacity(m);
        for i in 0..m {
            local.push(local_tensor(sys, &net, i)?);
        }
        let up: Vec<Vec<usize>> = (0..m).map(|i| net.up_labels(i)).collect();
        let mut rho = vec![Tensor::scalar(ONE, sys.dd()); m];
        let mut rho_up = rho.clone();
        for node in td.post_order() {
            let mut t = local[node].clone();
            for &c in &net.children[node] {
                t = t.mul(&rho_up[c]);
            }
            let mut closed = t.clone();
            for &b in &net.nodes[node].ops {
                closed = closed.mul(&Tensor::vector(b, sys.trace_weight(b)));
            }
            rho_up[node] = closed.sum_to(&up[node]).rescaled();
            rho[node] = t;
        }
        let doubled_ops = (0..sys.n()).map(|b| sys.doubled_op(b)).collect();
        Ok(TnSampler { sys: sys.clone(), net, local, rho, rho_up, up, doubled_ops })
    }

    pub fn network(&self) -> &StagedNetwork {
        &self.net
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        Ok(self.sample_traced(rng)?.0)
    }

    /// Sample plus the conditional distribution used at every node.
    pub fn sample_traced<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<usize>, Vec<NodeDraw>)> {
        let mut x = vec![usize::MAX; self.sys.n()];
        let mut trace = Vec::new();
        let root = self.net.td.root();
        self.descend(root, Tensor::scalar(ONE, self.sys.dd()), &mut x, rng, &mut trace)?;
        Ok((x, trace))
    }

    fn descend<R: Rng + ?Sized>(
        &self,
        node: usize,
        pi: Tensor,
        x: &mut [usize],
        rng: &mut R,
        trace: &mut Vec<NodeDraw>,
    ) -> Result<Tensor> {
        let sys = &self.sys;
        let d = sys.d;
        let ops = &self.net.nodes[node].ops;
        // Distribution of the departing qudits.
        let mut t = self.rho[node].mul(&pi).sum_to(ops);
        for &b in ops {
            t = t.apply(b, &self.doubled_ops[b]);
        }
        let k = ops.len();
        let outcomes = d.pow(k as u32);
        let diag_stride: usize = d + 1;
        let probs: Vec<f64> = (0..outcomes)
            .map(|o| {
                let mut idx = 0;
                let mut rest = o;
                let mut place = 1;
                for _ in 0..k {
                    idx += (rest % d) * diag_stride * place;
                    place *= d * d;
                    rest /= d;
                }
                t.data()[idx].re
            })
            .collect();
        let total: f64 = probs.iter().sum();
        let scale = probs.iter().map(|p| p.abs()).fold(0.0, f64::max);
        if !(total > 0.0) || total <= 1e-300 {
            return Err(Error::NoValidOutput);
        }
        if probs.iter().any(|&p| p < -1e-9 * scale) {
            return Err(Error::Numerical(format!("negative outcome probability at node {node}")));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p.max(0.0) / total).collect();
        let mut r: f64 = rng.gen();
        let mut choice = outcomes - 1;
        for (o, &p) in probs.iter().enumerate() {
            if r < p {
                choice = o;
                break;
            }
            r -= p;
        }
        let mut proj = Tensor::scalar(ONE, sys.dd());
        let mut rest = choice;
        for &b in ops {
            x[b] = rest % d;
            rest /= d;
            proj = proj.mul(&Tensor::vector(b, sys.outcome_weight(b, x[b])));
        }
        trace.push(NodeDraw { node, qudits: ops.clone(), probs });

        let core = self.local[node].mul(&proj);
        let w = core.mul(&pi);
        let children = &self.net.children[node];
        let mut sigmas: Vec<Tensor> = Vec::with_capacity(children.len());
        for (i, &c) in children.iter().enumerate() {
            let mut env = w.clone();
            for s in &sigmas {
                env = env.mul(s);
            }
            for &later in &children[i + 1..] {
                env = env.mul(&self.rho_up[later]);
            }
            let pi_c = env.sum_to(&self.up[c]).rescaled();
            sigmas.push(self.descend(c, pi_c, x, rng, trace)?);
        }
        let mut sigma = core;
        for s in &sigmas {
            sigma = sigma.mul(s);
        }
        Ok(sigma.sum_to(&self.up[node]).rescaled())
    }
}

/// One sample; builds the network on every call.
pub fn sample<R: Rng + ?Sized>(sys: &QuditSystem, td: &TreeDecomposition, rng: &mut R) -> Result<Vec<usize>> {
    TnSampler::new(sys, td)?.sample(rng)
}

/// Samples every qudit whose operator is the identity from the diagonal of
/// its state and restricts the gates accordingly. Requires the product of
/// the gates and the remaining operators to be unitary. Returns the partial outcome, the reduced system
/// and the map from reduced to original qudit ids.
pub fn remove_easy<R: Rng + ?Sized>(sys: &QuditSystem, rng: &mut R) -> (Vec<Option<usize>>, QuditSystem, Vec<usize>) {
    let n = sys.n();
    let d = sys.d;
    let mut outcome = vec![None; n];
    for (a, slot) in outcome.iter_mut().enumerate() {
        if sys.is_identity_op(a) {
            let weights: Vec<f64> = (0..d).map(|k| sys.chi[a][k * d + k].re.max(0.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut r = rng.gen::<f64>() * total;
            let mut pick = d - 1;
            for (k, &w) in weights.iter().enumerate() {
                if r < w {
                    pick = k;
                    break;
                }
                r -= w;
            }
            *slot = Some(pick);
        }
    }
    let (reduced, kept) = restrict_outcomes(sys, &outcome);
    (outcome, reduced, kept)
}

/// Projects the qudits with `Some(value)` onto that value and drops them.
pub fn restrict_outcomes(sys: &QuditSystem, outcome: &[Option<usize>]) -> (QuditSystem, Vec<usize>) {
    let n = sys.n();
    let d = sys.d;
    let kept: Vec<usize> = (0..n).filter(|&v| outcome[v].is_none()).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in kept.iter().enumerate() {
        local[v] = i;
    }
    let mut gates = Vec::new();
    for g in &sys.gates {
        let free: Vec<usize> = g.support.iter().copied().filter(|&q| outcome[q].is_none()).collect();
        if free.is_empty() {
            continue;
        }
        let diag: Vec<C64> = (0..d.pow(free.len() as u32))
            .map(|idx| {
                g.at(d, |q| match outcome[q] {
                    Some(v) => v,
                    None => (idx / d.pow(free.iter().position(|&f| f == q).unwrap() as u32)) % d,
                })
            })
            .collect();
        gates.push(DiagonalGate { support: free.iter().map(|&q| local[q]).collect(), diag });
    }
    let reduced = QuditSystem {
        d,
        chi: kept.iter().map(|&v| sys.chi[v].clone()).collect(),
        pure: sys.pure.as_ref().map(|p| kept.iter().map(|&v| p[v].clone()).collect()),
        gates,
        ops: kept.iter().map(|&v| sys.ops[v].clone()).collect(),
    };
    (reduced, kept)
}

/// State vector of a pure qudit, phase fixed so its largest entry is real
/// and positive.
fn pure_vector(sys: &QuditSystem, b: usize) -> Result<Vec<C64>> {
    if let Some(p) = &sys.pure {
        return Ok(p[b].clone());
    }
    let d = sys.d;
    let chi = &sys.chi[b];
    let j = (0..d).max_by(|&a, &c| chi[a * d + a].re.total_cmp(&chi[c * d + c].re)).unwrap();
    let norm = chi[j * d + j].re.sqrt();
    let v: Vec<C64> = (0..d).map(|i| chi[i * d + j] / norm).collect();
    let pure = (0..d).all(|i| (0..d).all(|k| (chi[i * d + k] - v[i] * v[k].conj()).norm() <= 1e-9));
    if !pure {
        return Err(Error::InvalidArgument(format!("state {b} is not pure")));
    }
    Ok(v)
}

/// `⟨x|⊗O_i Π U_j|χ⟩` for a pure product state, using `d`-dimensional wires.
pub fn amplitude_pure(sys: &QuditSystem, td: &TreeDecomposition, x: &[usize]) -> Result<C64> {
    if x.len() != sys.n() {
        return Err(Error::DimensionMismatch(format!("outcome has {} symbols, expected {}", x.len(), sys.n())));
    }
    let net = build_network(sys, td)?;
    let d = sys.d;
    let vecs: Vec<Vec<C64>> = (0..sys.n()).map(|b| pure_vector(sys, b)).collect::<Result<_>>()?;
    let mut msgs: Vec<Tensor> = vec![Tensor::scalar(ONE, d); td.num_nodes()];
    for node in td.post_order() {
        let bag = td.bag(node).to_vec();
        check_cap(d, bag.len())?;
        let st = &net.nodes[node];
        let mut t = Tensor::from_fn(bag.clone(), d, |_| ONE);
        for &b in &st.intros {
            t = t.mul(&Tensor::vector(b, vecs[b].clone()));
        }
        for &(b, k) in &st.merges {
            let c: Vec<C64> = vecs[b].iter().map(|&a| if a == ZERO { ZERO } else { (ONE / a).powi(k as i32 - 1) }).collect();
            t = t.mul(&Tensor::vector(b, c));
        }
        let mut pos = vec![usize::MAX; sys.n()];
        for (j, &b) in bag.iter().enumerate() {
            pos[b] = j;
        }
        t = t.mul(&Tensor::from_fn(bag.clone(), d, |k| {
            st.gates.iter().fold(ONE, |acc, &g| acc * sys.gates[g].at(d, |q| k[pos[q]]))
        }));
        for &c in &net.children[node] {
            t = t.mul(&msgs[c]);
        }
        for &b in &st.ops {
            let row: Vec<C64> = (0..d).map(|k| sys.ops[b][x[b] * d + k]).collect();
            t = t.mul(&Tensor::vector(b, row));
        }
        msgs[node] = t.sum_to(&net.up_labels(node));
        for &c in &net.children[node] {
            msgs[c] = Tensor::scalar(ONE, d);
        }
    }
    Ok(msgs[td.root()].value())
}
