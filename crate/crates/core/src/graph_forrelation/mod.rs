//! Graph-based forrelation `Φ = ⟨0|H U_g (O_1 ⊗ … ⊗ O_n) U_f H|0⟩` for
//! two-local `f, g` on a graph whose vertices split into two halves of small
//! treewidth.
//!
//! With `|α⟩ = O_A U_f H|0⟩` and `|β⟩ = O_B† U_g† H|0⟩` we have `Φ = ⟨β|α⟩`.
//! Amplitudes of either state reduce to a two-local sum over one half;
//! sampling from `|⟨x|α⟩|²` uses either prefix marginals on a doubled graph
//! or the tensor-network sampler.

mod estimate;
mod sampler;

pub use estimate::{phi_graph_estimate, split_operator, EstimateOptions, GraphPhiEstimator, OperatorSplit, PhiEstimate, SamplerKind};
pub use sampler::{LinearSampler, MarginalSampler};

use crate::error::{Error, Result};
use crate::graph::{decompose_halves, validate_td, Graph, HalfDecomposition, TreeDecomposition};
use crate::linalg::{adjoint2, mul2, norm2, Mat2};
use crate::two_local::TwoLocalFunction;
use crate::C64;

/// Largest `n` accepted by [`phi_graph_exact`].
pub const EXACT_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Alpha,
    Beta,
}

/// Everything needed to evaluate one of the two states.
#[derive(Clone, Debug)]
pub(crate) struct SideData {
    /// `f` for `α`, `conj(g)` for `β`.
    pub func: TwoLocalFunction,
    /// Operators indexed by vertex: `O_j` for `α`, `O_j†` for `β`.
    pub ops: Vec<Mat2>,
    /// Vertices carrying operators, sorted; `td` uses positions in this list.
    pub side: Vec<usize>,
    pub in_side: Vec<bool>,
    pub td: TreeDecomposition,
}

#[derive(Clone, Debug)]
pub struct GraphForrelationInstance {
    f: TwoLocalFunction,
    g: TwoLocalFunction,
    ops: Vec<Mat2>,
    halves: HalfDecomposition,
    alpha: SideData,
    beta: SideData,
}

fn same_edges(a: &Graph, b: &Graph) -> bool {
    a.n() == b.n() && a.edges() == b.edges()
}

impl GraphForrelationInstance {
    /// Validates the inputs against the given partition and decompositions.
    pub fn new(f: TwoLocalFunction, g: TwoLocalFunction, ops: Vec<Mat2>, halves: HalfDecomposition) -> Result<Self> {
        let n = f.n();
        if g.n() != n || ops.len() != n {
            return Err(Error::DimensionMismatch(format!("f has {n} vertices, g {}, ops {}", g.n(), ops.len())));
        }
        if f.d() != 2 || g.d() != 2 {
            return Err(Error::InvalidArgument("f and g must be binary".into()));
        }
        if !same_edges(f.graph(), g.graph()) {
            return Err(Error::InvalidArgument("f and g must share the graph".into()));
        }
        if let Some(j) = ops.iter().position(|o| norm2(o) > 1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!("operator {j} has norm above 1")));
        }
        let p = &halves.partition;
        let mut seen = vec![0u8; n];
        for &v in p.a.iter().chain(&p.b) {
            if v >= n {
                return Err(Error::InvalidArgument(format!("partition vertex {v} out of range")));
            }
            seen[v] += 1;
        }
        if seen.iter().any(|&s| s != 1) {
            return Err(Error::InvalidArgument("partition must cover every vertex exactly once".into()));
        }
        let graph = f.graph();
        validate_td(&graph.induced_subgraph(&p.a), &halves.td_a).map_err(Error::InvalidTreeDecomposition)?;
        validate_td(&graph.induced_subgraph(&p.b), &halves.td_b).map_err(Error::InvalidTreeDecomposition)?;
        Ok(Self::assemble(f, g, ops, halves))
    }

    /// Partition and decompositions from [`decompose_halves`].
    pub fn with_decomposition(f: TwoLocalFunction, g: TwoLocalFunction, ops: Vec<Mat2>) -> Result<Self> {
        let halves = decompose_halves(f.graph());
        Self::new(f, g, ops, halves)
    }

    fn assemble(f: TwoLocalFunction, g: TwoLocalFunction, ops: Vec<Mat2>, halves: HalfDecomposition) -> Self {
        let n = f.n();
        let mask = |s: &[usize]| {
            let mut m = vec![false; n];
            for &v in s {
                m[v] = true;
            }
            m
        };
        let alpha = SideData {
            func: f.clone(),
            ops: ops.clone(),
            side: halves.partition.a.clone(),
            in_side: mask(&halves.partition.a),
            td: halves.td_a.clone(),
        };
        let beta = SideData {
            func: g.conj(),
            ops: ops.iter().map(adjoint2).collect(),
            side: halves.partition.b.clone(),
            in_side: mask(&halves.partition.b),
            td: halves.td_b.clone(),
        };
        GraphForrelationInstance { f, g, ops, halves, alpha, beta }
    }

    /// Same functions and decomposition with different operators.
    pub fn with_ops(&self, ops: Vec<Mat2>) -> Result<Self> {
        if ops.len() != self.n() {
            return Err(Error::DimensionMismatch("operator count".into()));
        }
        if let Some(j) = ops.iter().position(|o| norm2(o) > 1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!("operator {j} has norm above 1")));
        }
        Ok(Self::assemble(self.f.clone(), self.g.clone(), ops, self.halves.clone()))
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn graph(&self) -> &Graph {
        self.f.graph()
    }

    pub fn f(&self) -> &TwoLocalFunction {
        &self.f
    }

    pub fn g(&self) -> &TwoLocalFunction {
        &self.g
    }

    pub fn ops(&self) -> &[Mat2] {
        &self.ops
    }

    pub fn halves(&self) -> &HalfDecomposition {
        &self.halves
    }

    pub(crate) fn side(&self, side: Side) -> &SideData {
        match side {
            Side::Alpha => &self.alpha,
            Side::Beta => &self.beta,
        }
    }

    /// `⟨x|α⟩` or `⟨x|β⟩` for `x` in vertex order.
    pub fn amplitude(&self, side: Side, x: &[u8]) -> Result<C64> {
        let h = self.side_function(side, x)?;
        h.sum_treewidth(&self.side(side).td)
    }

    /// The same amplitude when the operator half has no internal edges: a
    /// product of per-vertex sums.
    pub fn amplitude_one_local(&self, side: Side, x: &[u8]) -> Result<C64> {
        let h = self.side_function(side, x)?;
        if !h.edge_terms().is_empty() || h.graph().edge_count() > 0 {
            return Err(Error::InvalidArgument("operator half has internal edges".into()));
        }
        Ok((0..h.n()).fold(h.scalar(), |acc, u| acc * (h.vertex_term(u)[0] + h.vertex_term(u)[1])))
    }

    /// `y ↦ 2^{-n/2} ⟨x_S|O_S|y⟩ F(y x_{S̄})` as a two-local function on the
    /// operator half (local labels).
    fn side_function(&self, side: Side, x: &[u8]) -> Result<TwoLocalFunction> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!("assignment has {} bits, expected {n}", x.len())));
        }
        let sd = self.side(side);
        let fixed: Vec<Option<u8>> = (0..n).map(|v| if sd.in_side[v] { None } else { Some(x[v]) }).collect();
        let (mut h, map) = sd.func.restrict(&fixed);
        for (i, &v) in map.iter().enumerate() {
            let o = &sd.ops[v];
            let row = 2 * x[v] as usize;
            h.multiply_vertex_term(i, &[o[row], o[row + 1]])?;
        }
        h.scale(C64::new((0.5f64).powf(n as f64 / 2.0), 0.0));
        Ok(h)
    }
}

/// Every value of a binary two-local function, indexed little-endian.
pub fn truth_table(h: &TwoLocalFunction) -> Result<Vec<C64>> {
    let n = h.n();
    if n > EXACT_CAP {
        return Err(Error::CapExceeded { what: "qubits", value: n, cap: EXACT_CAP });
    }
    Ok((0..1u64 << n).map(|x| h.eval_bits(x)).collect())
}

/// Dense state-vector evaluation of `Φ`.
pub fn phi_graph_exact(inst: &GraphForrelationInstance) -> Result<C64> {
    let n = inst.n();
    let ft = truth_table(inst.f())?;
    let gt = truth_table(inst.g())?;
    let amp = (0.5f64).powf(n as f64 / 2.0);
    let mut psi: Vec<C64> = ft.iter().map(|v| v * amp).collect();
    for (j, o) in inst.ops().iter().enumerate() {
        let bit = 1usize << j;
        for i in 0..psi.len() {
            if i & bit == 0 {
                let (a, b) = (psi[i], psi[i | bit]);
                psi[i] = o[0] * a + o[1] * b;
                psi[i | bit] = o[2] * a + o[3] * b;
            }
        }
    }
    Ok(psi.iter().zip(&gt).map(|(p, g)| p * g).sum::<C64>() * amp)
}

/// Functions `(f, g)` with `⟨0|H U_f H U_g H|0⟩ = ⟨0|H U_h H|0⟩`:
/// `U_g = (S†)^{⊗n}` and `U_f = e^{iπn/4} U_h U_g`.
pub fn iqp_to_forrelation(h: &TwoLocalFunction) -> (TwoLocalFunction, TwoLocalFunction) {
    let n = h.n();
    let s_dag = [C64::new(1.0, 0.0), C64::new(0.0, -1.0)];
    let mut g = TwoLocalFunction::new(h.graph().clone(), 2);
    let mut f = h.clone();
    for v in 0..n {
        g.set_vertex_term(v, s_dag.to_vec()).expect("binary vertex term");
        f.multiply_vertex_term(v, &s_dag).expect("binary vertex term");
    }
    f.scale(C64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * n as f64));
    (f, g)
}

/// `true` when `o†o = I` to within `tol`.
pub fn is_unitary(o: &Mat2, tol: f64) -> bool {
    let p = mul2(&adjoint2(o), o);
    (p[0] - 1.0).norm() <= tol && p[1].norm() <= tol && p[2].norm() <= tol && (p[3] - 1.0).norm() <= tol
}

#[cfg(test)]
mod tests;
