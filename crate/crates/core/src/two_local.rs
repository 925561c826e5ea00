//! Two-local functions `h(x) = s · Π_{uv} h_uv(x_u, x_v) · Π_u h_u(x_u)` and
//! their sums over all assignments.

use std::collections::BTreeMap;

use crate::bitkit::gray_code;
use crate::error::{Error, Result};
use crate::graph::{validate_td, Graph, TreeDecomposition};
use crate::C64;

/// Largest bag (in vertices) accepted by [`TwoLocalFunction::sum_treewidth`].
pub const BAG_CAP: usize = 26;
/// Largest `d^n` accepted by brute-force summation.
pub const BRUTE_CAP: usize = 1 << 24;

#[derive(Clone, Debug)]
pub struct TwoLocalFunction {
    graph: Graph,
    d: usize,
    /// Keyed by `(u, v)` with `u < v`; entry `a * d + b` is `h_uv(x_u = a, x_v = b)`.
    edge_terms: BTreeMap<(usize, usize), Vec<C64>>,
    vertex_terms: Vec<Vec<C64>>,
    scalar: C64,
}

impl TwoLocalFunction {
    /// Constant function 1 over alphabet `{0..d}`.
    pub fn new(graph: Graph, d: usize) -> Self {
        let n = graph.n();
        TwoLocalFunction {
            graph,
            d,
            edge_terms: BTreeMap::new(),
            vertex_terms: vec![vec![C64::new(1.0, 0.0); d]; n],
            scalar: C64::new(1.0, 0.0),
        }
    }

    /// Every vertex and edge term filled with uniformly random phases.
    pub fn random_phases<R: rand::Rng + ?Sized>(graph: Graph, d: usize, rng: &mut R) -> Self {
        let mut h = TwoLocalFunction::new(graph, d);
        let phase = |r: &mut R| C64::from_polar(1.0, r.gen::<f64>() * std::f64::consts::TAU);
        for v in 0..h.n() {
            h.vertex_terms[v] = (0..d).map(|_| phase(rng)).collect();
        }
        for (u, v) in h.graph.edges() {
            let t = (0..d * d).map(|_| phase(rng)).collect();
            h.edge_terms.insert((u, v), t);
        }
        h
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn scalar(&self) -> C64 {
        self.scalar
    }

    pub fn scale(&mut self, s: C64) {
        self.scalar *= s;
    }

    pub fn vertex_term(&self, v: usize) -> &[C64] {
        &self.vertex_terms[v]
    }

    /// Stored edge tables, keyed with `u < v`.
    pub fn edge_terms(&self) -> &BTreeMap<(usize, usize), Vec<C64>> {
        &self.edge_terms
    }

    /// `h_uv(a, b)` with `a` the value at `u`; 1 if no term is stored.
    pub fn edge_value(&self, u: usize, v: usize, a: usize, b: usize) -> C64 {
        let (key, idx) = if u < v { ((u, v), a * self.d + b) } else { ((v, u), b * self.d + a) };
        self.edge_terms.get(&key).map_or(C64::new(1.0, 0.0), |t| t[idx])
    }

    pub fn set_vertex_term(&mut self, v: usize, table: Vec<C64>) -> Result<()> {
        if v >= self.n() || table.len() != self.d {
            return Err(Error::DimensionMismatch(format!("vertex term for {v} needs {} entries", self.d)));
        }
        self.vertex_terms[v] = table;
        Ok(())
    }

    pub fn multiply_vertex_term(&mut self, v: usize, table: &[C64]) -> Result<()> {
        if v >= self.n() || table.len() != self.d {
            return Err(Error::DimensionMismatch(format!("vertex term for {v} needs {} entries", self.d)));
        }
        for (x, y) in self.vertex_terms[v].iter_mut().zip(table) {
            *x *= y;
        }
        Ok(())
    }

    /// Sets `h_uv`; `table[a * d + b] = h_uv(x_u = a, x_v = b)`.
    pub fn set_edge_term(&mut self, u: usize, v: usize, table: Vec<C64>) -> Result<()> {
        let t = self.oriented(u, v, table)?;
        self.edge_terms.insert((u.min(v), u.max(v)), t);
        Ok(())
    }

    pub fn multiply_edge_term(&mut self, u: usize, v: usize, table: Vec<C64>) -> Result<()> {
        let t = self.oriented(u, v, table)?;
        match self.edge_terms.entry((u.min(v), u.max(v))) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(t);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                for (x, y) in e.get_mut().iter_mut().zip(t) {
                    *x *= y;
                }
            }
        }
        Ok(())
    }

    fn oriented(&self, u: usize, v: usize, table: Vec<C64>) -> Result<Vec<C64>> {
        if !self.graph.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
        let d = self.d;
        if table.len() != d * d {
            return Err(Error::DimensionMismatch(format!("edge term needs {} entries", d * d)));
        }
        if u < v {
            return Ok(table);
        }
        let mut t = vec![C64::new(0.0, 0.0); d * d];
        for a in 0..d {
            for b in 0..d {
                t[b * d + a] = table[a * d + b];
            }
        }
        Ok(t)
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut h = self.clone();
        h.scalar = h.scalar.conj();
        for t in h.vertex_terms.iter_mut().chain(h.edge_terms.values_mut()) {
            for x in t.iter_mut() {
                *x = x.conj();
            }
        }
        h
    }

    /// `h(x)` for `x` of length `n` over the alphabet.
    pub fn eval(&self, x: &[u8]) -> C64 {
        assert_eq!(x.len(), self.n(), "assignment length");
        let mut acc = self.scalar;
        for (v, t) in self.vertex_terms.iter().enumerate() {
            acc *= t[x[v] as usize];
        }
        for (&(u, v), t) in &self.edge_terms {
            acc *= t[x[u] as usize * self.d + x[v] as usize];
        }
        acc
    }

    /// `h` on a binary assignment packed little-endian into `x` (`n <= 64`).
    pub fn eval_bits(&self, x: u64) -> C64 {
        let bits: Vec<u8> = (0..self.n()).map(|i| ((x >> i) & 1) as u8).collect();
        self.eval(&bits)
    }

    /// Fixes the vertices with `Some(value)`. Returns the function on the
    /// free vertices (in increasing order) and the map from new to old ids.
    pub fn restrict(&self, fixed: &[Option<u8>]) -> (TwoLocalFunction, Vec<usize>) {
        assert_eq!(fixed.len(), self.n(), "partial assignment length");
        let free: Vec<usize> = (0..self.n()).filter(|&v| fixed[v].is_none()).collect();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in free.iter().enumerate() {
            local[v] = i;
        }
        let d = self.d;
        let mut out = TwoLocalFunction::new(self.graph.induced_subgraph(&free), d);
        out.scalar = self.scalar;
        for (v, t) in self.vertex_terms.iter().enumerate() {
            match fixed[v] {
                Some(a) => out.scalar *= t[a as usize],
                None => out.vertex_terms[local[v]] = t.clone(),
            }
        }
        for (&(u, v), t) in &self.edge_terms {
            match (fixed[u], fixed[v]) {
                (Some(a), Some(b)) => out.scalar *= t[a as usize * d + b as usize],
                (None, None) => {
                    out.edge_terms.insert((local[u], local[v]), t.clone());
                }
                (None, Some(b)) => {
                    for a in 0..d {
                        out.vertex_terms[local[u]][a] *= t[a * d + b as usize];
                    }
                }
                (Some(a), None) => {
                    for b in 0..d {
                        out.vertex_terms[local[v]][b] *= t[a as usize * d + b];
                    }
                }
            }
        }
        (out, free)
    }

    /// `Σ_x h(x)` by enumeration.
    pub fn sum_bruteforce(&self) -> Result<C64> {
        let n = self.n();
        let total = (self.d as f64).powi(n as i32);
        if total > BRUTE_CAP as f64 {
            return Err(Error::CapExceeded { what: "brute-force assignments", value: total as usize, cap: BRUTE_CAP });
        }
        let mut x = vec![0u8; n];
        let mut acc = C64::new(0.0, 0.0);
        loop {
            acc += self.eval(&x);
            let mut i = 0;
            loop {
                if i == n {
                    return Ok(acc);
                }
                x[i] += 1;
                if (x[i] as usize) < self.d {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    /// `Σ_x h(x)` for an acyclic graph by repeated leaf contraction.
    pub fn sum_tree(&self) -> Result<C64> {
        let n = self.n();
        let d = self.d;
        let mut vt = self.vertex_terms.clone();
        let mut nbrs: Vec<std::collections::BTreeSet<usize>> = (0..n).map(|v| self.graph.neighbors(v).collect()).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| nbrs[v].len() <= 1).collect();
        let mut done = vec![false; n];
        let mut acc = self.scalar;
        while let Some(u) = stack.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            match nbrs[u].iter().next().copied() {
                None => acc *= vt[u].iter().sum::<C64>(),
                Some(v) => {
                    let mut nv = vec![C64::new(0.0, 0.0); d];
                    for (b, slot) in nv.iter_mut().enumerate() {
                        let s: C64 = (0..d).map(|a| vt[u][a] * self.edge_value(u, v, a, b)).sum();
                        *slot = vt[v][b] * s;
                    }
                    vt[v] = nv;
                    nbrs[v].remove(&u);
                    nbrs[u].clear();
                    if nbrs[v].len() <= 1 {
                        stack.push(v);
                    }
                }
            }
        }
        if done.iter().any(|&x| !x) {
            return Err(Error::CycleDetected);
        }
        Ok(acc)
    }

    /// `Σ_x h(x)` over binary assignments using a tree decomposition of the
    /// graph: per-bag tables filled in Gray-code order, then messages passed
    /// from leaves to the root over the shared vertices.
    pub fn sum_treewidth(&self, td: &TreeDecomposition) -> Result<C64> {
        if self.d != 2 {
            return Err(Error::InvalidArgument("sum_treewidth needs a binary alphabet".into()));
        }
        validate_td(&self.graph, td).map_err(Error::InvalidTreeDecomposition)?;
        let plan = BagPlan::new(self, td)?;
        let m = td.num_nodes();
        let children = td.children();
        let mut messages: Vec<Vec<C64>> = vec![Vec::new(); m];
        for node in td.post_order() {
            let mut table = plan.tabulate(self, node);
            for &c in &children[node] {
                let proj = projection(td.bag(node), td.bag(c));
                let msg = &messages[c];
                for (y, t) in table.iter_mut().enumerate() {
                    *t *= msg[pext(y, &proj)];
                }
                messages[c] = Vec::new();
            }
            messages[node] = match td.parent(node) {
                None => vec![table.iter().sum()],
                Some(p) => {
                    let proj = projection(td.bag(node), td.bag(p));
                    let mut out = vec![C64::new(0.0, 0.0); 1 << proj.len()];
                    for (y, t) in table.iter().enumerate() {
                        out[pext(y, &proj)] += t;
                    }
                    out
                }
            };
        }
        Ok(self.scalar * messages[td.root()][0])
    }
}

/// Positions within `bag` of the vertices `bag` shares with `other`.
fn projection(bag: &[usize], other: &[usize]) -> Vec<usize> {
    bag.iter().enumerate().filter(|(_, v)| other.binary_search(v).is_ok()).map(|(i, _)| i).collect()
}

fn pext(y: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (j, &p)| acc | (((y >> p) & 1) << j))
}

/// Assignment of every term to exactly one bag.
struct BagPlan {
    bag_len: Vec<usize>,
    /// Per node: `(vertex, bag-local position)` of the vertex terms kept here.
    vertices: Vec<Vec<(usize, usize)>>,
    /// Per node: edges `(key, table, local u, local v)`.
    edges: Vec<Vec<((usize, usize), [C64; 4], usize, usize)>>,
}

impl BagPlan {
    fn new(h: &TwoLocalFunction, td: &TreeDecomposition) -> Result<Self> {
        let m = td.num_nodes();
        if let Some(b) = td.bags().iter().find(|b| b.len() > BAG_CAP) {
            return Err(Error::CapExceeded { what: "bag size", value: b.len(), cap: BAG_CAP });
        }
        let mut vertices = vec![Vec::new(); m];
        let mut placed = vec![false; h.n()];
        for (i, b) in td.bags().iter().enumerate() {
            for (p, &v) in b.iter().enumerate() {
                if !placed[v] {
                    placed[v] = true;
                    vertices[i].push((v, p));
                }
            }
        }
        let mut edges = vec![Vec::new(); m];
        for (&(u, v), tab) in &h.edge_terms {
            let i = (0..m)
                .find(|&i| td.bag(i).binary_search(&u).is_ok() && td.bag(i).binary_search(&v).is_ok())
                .ok_or(Error::InvalidTreeDecomposition(crate::graph::TdViolation::EdgeUncovered(u, v)))?;
            let b = td.bag(i);
            let tab = [tab[0], tab[1], tab[2], tab[3]];
            edges[i].push(((u, v), tab, b.binary_search(&u).unwrap(), b.binary_search(&v).unwrap()));
        }
        Ok(BagPlan { bag_len: td.bags().iter().map(|b| b.len()).collect(), vertices, edges })
    }

    #[cfg(test)]
    fn term_count(&self) -> usize {
        self.vertices.iter().map(|v| v.len()).sum::<usize>() + self.edges.iter().map(|e| e.len()).sum::<usize>()
    }

    /// `Q_i(y)` for every bag-local assignment `y`, updated incrementally
    /// along a Gray code. Zero factors are counted rather than divided out.
    fn tabulate(&self, h: &TwoLocalFunction, node: usize) -> Vec<C64> {
        let zero = C64::new(0.0, 0.0);
        let verts = &self.vertices[node];
        let edges = &self.edges[node];
        let width = self.bag_len[node];
        let nv = verts.len();
        let term_at = |t: usize, y: usize| -> C64 {
            if t < nv {
                let (v, p) = verts[t];
                h.vertex_terms[v][(y >> p) & 1]
            } else {
                let (_, ref tab, pu, pv) = edges[t - nv];
                tab[((y >> pu) & 1) * 2 + ((y >> pv) & 1)]
            }
        };
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); width];
        for (t, &(_, p)) in verts.iter().enumerate() {
            touching[p].push(t);
        }
        for (j, e) in edges.iter().enumerate() {
            touching[e.2].push(nv + j);
            touching[e.3].push(nv + j);
        }
        let mut value = vec![zero; nv + edges.len()];
        let mut table = vec![zero; 1 << width];
        let mut product = C64::new(1.0, 0.0);
        let mut zeros = 0usize;
        let swap = |old: C64, new: C64, product: &mut C64, zeros: &mut usize| {
            if old == zero {
                *zeros -= 1;
            } else {
                *product /= old;
            }
            if new == zero {
                *zeros += 1;
            } else {
                *product *= new;
            }
        };
        for step in gray_code(width) {
            let y = step.code as usize;
            match step.flipped {
                None => {
                    for (t, val) in value.iter_mut().enumerate() {
                        *val = term_at(t, y);
                        if *val == zero {
                            zeros += 1;
                        } else {
                            product *= *val;
                        }
                    }
                }
                Some(bit) => {
                    for &t in &touching[bit] {
                        let new = term_at(t, y);
                        swap(value[t], new, &mut product, &mut zeros);
                        value[t] = new;
                    }
                }
            }
            table[y] = if zeros > 0 { zero } else { product };
        }
        table
    }
}
