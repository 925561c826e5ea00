//! Graphs with optional combinatorial planar embeddings, planar lattice
//! generators, the outer-layer peeling partition and tree decompositions.
//!
//! A rotation system lists each vertex's neighbours in counterclockwise
//! order. Faces are traced with `next(u→v) = v→pred_v(u)`.

mod heuristic;
mod lattice;
mod outerplanar;
mod peel;
mod td;

pub use heuristic::{min_fill_td, partition_heuristic};
pub use lattice::{generate_grid, generate_triangular};
pub use outerplanar::outerplanar_td;
pub use peel::{decompose_halves, peel_layers, peel_partition, HalfDecomposition};
pub use td::{normalize_td, validate_td, TdViolation, TreeDecomposition};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
    rotation: Option<Vec<Vec<usize>>>,
    outer_face: Option<Vec<usize>>,
}

/// Partition `V = A ∪ B`; both sides sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl VertexPartition {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>) -> Self {
        a.sort_unstable();
        b.sort_unstable();
        VertexPartition { a, b }
    }

    /// `true` for vertices on side A.
    pub fn side_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.a {
            m[v] = true;
        }
        m
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n], rotation: None, outer_face: None }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Adds `{u, v}`; duplicates are ignored, self-loops rejected.
    /// Any embedding is dropped.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::InvalidArgument(format!("edge {u}-{v} out of range for n={n}")));
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at {u}")));
        }
        if self.adj[u].insert(v) {
            self.adj[v].insert(u);
            self.rotation = None;
        }
        Ok(())
    }

    /// Removes `{u, v}`; the embedding stays valid.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
        self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        if let Some(rot) = &mut self.rotation {
            rot[u].retain(|&x| x != v);
            rot[v].retain(|&x| x != u);
        }
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, s) in self.adj.iter().enumerate() {
            for &v in s.range(u + 1..) {
                out.push((u, v));
            }
        }
        out
    }

    pub fn rotation_system(&self) -> Option<&[Vec<usize>]> {
        self.rotation.as_deref()
    }

    pub fn outer_face(&self) -> Option<&[usize]> {
        self.outer_face.as_deref()
    }

    /// Installs a rotation system; each list must be a permutation of the neighbours.
    pub fn set_rotation_system(&mut self, rotation: Vec<Vec<usize>>) -> Result<()> {
        if rotation.len() != self.n() {
            return Err(Error::InvalidArgument("rotation system must list every vertex".into()));
        }
        for (v, r) in rotation.iter().enumerate() {
            let set: BTreeSet<usize> = r.iter().copied().collect();
            if set.len() != r.len() || set != self.adj[v] {
                return Err(Error::InvalidArgument(format!("rotation at {v} is not a permutation of its neighbours")));
            }
        }
        self.rotation = Some(rotation);
        Ok(())
    }

    pub fn set_outer_face(&mut self, face: Vec<usize>) -> Result<()> {
        if let Some(&v) = face.iter().find(|&&v| v >= self.n()) {
            return Err(Error::InvalidArgument(format!("outer-face vertex {v} out of range")));
        }
        self.outer_face = Some(face);
        Ok(())
    }

    pub fn clear_embedding(&mut self) {
        self.rotation = None;
        self.outer_face = None;
    }

    /// Connected components, each sorted; components ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on `vertices` (relabelled `0..k` in the given order)
    /// with the restricted rotation system and outer-face hint.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut g = Graph::new(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                if local[w] != usize::MAX {
                    g.adj[i].insert(local[w]);
                }
            }
        }
        if let Some(rot) = &self.rotation {
            g.rotation = Some(
                vertices
                    .iter()
                    .map(|&v| rot[v].iter().filter(|&&w| local[w] != usize::MAX).map(|&w| local[w]).collect())
                    .collect(),
            );
        }
        if let Some(face) = &self.outer_face {
            let f: Vec<usize> = face.iter().filter(|&&v| local[v] != usize::MAX).map(|&v| local[v]).collect();
            g.outer_face = Some(f);
        }
        g
    }

    /// Faces of the embedding as cyclic dart sequences `(u, v)`.
    /// Isolated vertices contribute no darts.
    pub fn faces(&self) -> Option<Vec<Vec<(usize, usize)>>> {
        let rot = self.rotation.as_ref()?;
        Some(trace_faces(rot, |_, _| true))
    }

    /// Checks Euler's formula `V - E + F = 2` on every component.
    pub fn embedding_is_planar(&self) -> bool {
        let Some(faces) = self.faces() else { return false };
        let comps = self.components();
        let mut comp_of = vec![0; self.n()];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let mut face_count = vec![0i64; comps.len()];
        for f in &faces {
            face_count[comp_of[f[0].0]] += 1;
        }
        comps.iter().enumerate().all(|(i, c)| {
            let e: usize = c.iter().map(|&v| self.degree(v)).sum::<usize>() / 2;
            let f = if e == 0 { 1 } else { face_count[i] };
            c.len() as i64 - e as i64 + f == 2
        })
    }
}

/// Traces faces of the rotation system restricted to vertices `keep`.
fn trace_faces(rot: &[Vec<usize>], keep: impl Fn(usize, usize) -> bool) -> Vec<Vec<(usize, usize)>> {
    let restricted: Vec<Vec<usize>> =
        rot.iter().enumerate().map(|(v, r)| r.iter().copied().filter(|&w| keep(v, w)).collect()).collect();
    let mut visited: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut faces = Vec::new();
    for (u, r) in restricted.iter().enumerate() {
        for &v in r {
            if visited.contains(&(u, v)) {
                continue;
            }
            let mut face = Vec::new();
            let (mut a, mut b) = (u, v);
            while visited.insert((a, b)) {
                face.push((a, b));
                let rv = &restricted[b];
                let pos = rv.iter().position(|&x| x == a).expect("rotation is symmetric");
                let w = rv[(pos + rv.len() - 1) % rv.len()];
                a = b;
                b = w;
            }
            faces.push(face);
        }
    }
    faces
}

/// Contracts `{keep, remove}` into `keep`; returns the graph on `n - 1`
/// vertices and the map from old to new vertex ids.
pub fn contract_edge(g: &Graph, keep: usize, remove: usize) -> Result<(Graph, Vec<usize>)> {
    if !g.has_edge(keep, remove) {
        return Err(Error::MissingEdge(keep, remove));
    }
    let n = g.n();
    let map: Vec<usize> = (0..n)
        .map(|v| {
            let v = if v == remove { keep } else { v };
            if v > remove {
                v - 1
            } else {
                v
            }
        })
        .collect();
    let mut out = Graph::new(n - 1);
    for (u, v) in g.edges() {
        let (a, b) = (map[u], map[v]);
        if a != b {
            out.adj[a].insert(b);
            out.adj[b].insert(a);
        }
    }
    if let Some(rot) = &g.rotation {
        let spliced = splice_rotation(rot, keep, remove);
        let relabelled: Vec<Vec<usize>> = (0..n)
            .filter(|&v| v != remove)
            .map(|v| spliced[v].iter().map(|&w| map[w]).collect())
            .collect();
        let mut candidate = out.clone();
        if candidate.set_rotation_system(relabelled).is_ok() && candidate.embedding_is_planar() {
            out = candidate;
        } else {
            log::warn!("rotation splice after contracting {keep}-{remove} is inconsistent; embedding dropped");
        }
    }
    if out.rotation.is_some() {
        if let Some(face) = &g.outer_face {
            let mut f: Vec<usize> = Vec::new();
            for &v in face {
                let m = map[v];
                if !f.contains(&m) {
                    f.push(m);
                }
            }
            out.outer_face = Some(f);
        }
    }
    Ok((out, map))
}

/// Rotation lists after merging `remove` into `keep`, in old labels.
/// Parallel edges created by the merge drop the copy that came from `remove`.
fn splice_rotation(rot: &[Vec<usize>], keep: usize, remove: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = rot.to_vec();
    let rp = &rot[remove];
    let start = rp.iter().position(|&x| x == keep).expect("edge present");
    let inserted: Vec<usize> = (1..rp.len()).map(|i| rp[(start + i) % rp.len()]).collect();
    let kq = &rot[keep];
    let at = kq.iter().position(|&x| x == remove).expect("edge present");
    let mut merged = Vec::with_capacity(kq.len() + inserted.len());
    for (i, &x) in kq.iter().enumerate() {
        if i == at {
            for &y in &inserted {
                if !kq.contains(&y) {
                    merged.push(y);
                }
            }
        } else {
            merged.push(x);
        }
    }
    out[keep] = merged;
    for &r in &inserted {
        let had_keep = rot[r].contains(&keep);
        if had_keep {
            out[r].retain(|&x| x != remove);
        } else {
            for x in out[r].iter_mut() {
                if *x == remove {
                    *x = keep;
                }
            }
        }
    }
    out[remove].clear();
    out
}
