use super::{
    outerplanar_td, partition_heuristic, trace_faces, validate_td, Graph, TreeDecomposition, VertexPartition,
};
use crate::error::{Error, Result};

/// Outer-layer index of every vertex: layer 0 is the outer face of each
/// component, layer `i + 1` the outer face of what remains after removing
/// layers `0..=i`.
pub fn peel_layers(g: &Graph) -> Result<Vec<usize>> {
    let rot = g.rotation_system().ok_or(Error::MissingEmbedding)?;
    let n = g.n();
    let hint: Vec<bool> = {
        let mut h = vec![false; n];
        for &v in g.outer_face().unwrap_or(&[]) {
            h[v] = true;
        }
        h
    };
    let mut layer = vec![usize::MAX; n];
    let mut current = 0;
    loop {
        let alive: Vec<bool> = layer.iter().map(|&l| l == usize::MAX).collect();
        if !alive.iter().any(|&a| a) {
            break;
        }
        let faces = trace_faces(rot, |u, w| alive[u] && alive[w]);
        let mut face_of_dart = std::collections::HashMap::new();
        for (i, f) in faces.iter().enumerate() {
            for &d in f {
                face_of_dart.insert(d, i);
            }
        }
        // Score each face: on the first round by hint overlap, afterwards
        // by corners that used to hold a removed neighbour.
        let mut score = vec![0usize; faces.len()];
        for (i, f) in faces.iter().enumerate() {
            if current == 0 {
                score[i] = f.iter().filter(|&&(u, _)| hint[u]).count();
            } else {
                for (k, &(a, b)) in f.iter().enumerate() {
                    let c = f[(k + 1) % f.len()].1;
                    score[i] += removed_in_corner(&rot[b], a, c, &alive);
                }
            }
        }
        let comps = alive_components(g, &alive);
        for comp in comps {
            let mut best: Option<(usize, usize, usize)> = None;
            for &v in &comp {
                for &w in &rot[v] {
                    if !alive[w] {
                        continue;
                    }
                    let fi = face_of_dart[&(v, w)];
                    let key = (score[fi], faces[fi].len(), usize::MAX - fi);
                    if best.map_or(true, |b| key > (b.0, b.1, b.2)) {
                        best = Some(key);
                    }
                }
            }
            match best {
                None => {
                    for &v in &comp {
                        layer[v] = current;
                    }
                }
                Some((_, _, inv)) => {
                    for &(u, _) in &faces[usize::MAX - inv] {
                        layer[u] = current;
                    }
                }
            }
        }
        current += 1;
    }
    Ok(layer)
}

/// Number of dead neighbours of `b` strictly inside the corner swept
/// clockwise from `a` to `c` in `b`'s rotation.
fn removed_in_corner(rot_b: &[usize], a: usize, c: usize, alive: &[bool]) -> usize {
    let d = rot_b.len();
    let pa = rot_b.iter().position(|&x| x == a).expect("dart in rotation");
    let mut count = 0;
    for step in 1..d {
        let x = rot_b[(pa + d - step) % d];
        if x == c && alive[x] {
            break;
        }
        if !alive[x] {
            count += 1;
        }
    }
    count
}

fn alive_components(g: &Graph, alive: &[bool]) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in (0..n).filter(|&s| alive[s]) {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for v in g.neighbors(u) {
                if alive[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Even layers form A, odd layers form B.
pub fn peel_partition(g: &Graph) -> Result<VertexPartition> {
    let layers = peel_layers(g)?;
    let (a, b): (Vec<usize>, Vec<usize>) = (0..g.n()).partition(|&v| layers[v] % 2 == 0);
    Ok(VertexPartition::new(a, b))
}

/// A partition together with decompositions of both induced halves. The
/// decompositions use local labels (position in `partition.a` / `partition.b`).
#[derive(Clone, Debug)]
pub struct HalfDecomposition {
    pub partition: VertexPartition,
    pub td_a: TreeDecomposition,
    pub td_b: TreeDecomposition,
    pub used_peel: bool,
}

impl HalfDecomposition {
    pub fn width(&self) -> usize {
        self.td_a.width().max(self.td_b.width())
    }
}

/// Peels when an embedding is available and both halves decompose with
/// width two; otherwise falls back to the greedy heuristic.
pub fn decompose_halves(g: &Graph) -> HalfDecomposition {
    if g.rotation_system().is_some() {
        if let Ok(partition) = peel_partition(g) {
            let ga = g.induced_subgraph(&partition.a);
            let gb = g.induced_subgraph(&partition.b);
            if let (Ok(td_a), Ok(td_b)) = (outerplanar_td(&ga), outerplanar_td(&gb)) {
                if validate_td(&ga, &td_a).is_ok() && validate_td(&gb, &td_b).is_ok() {
                    return HalfDecomposition { partition, td_a, td_b, used_peel: true };
                }
            }
            log::warn!("peeled halves are not 2-degenerate; using heuristic partition");
        }
    }
    let (partition, td_a, td_b) = partition_heuristic(g);
    HalfDecomposition { partition, td_a, td_b, used_peel: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{contract_edge, generate_grid, generate_triangular};

    #[test]
    fn grid_layers_are_rings() {
        let g = generate_grid(7, 7);
        let layers = peel_layers(&g).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                let expect = r.min(c).min(6 - r).min(6 - c);
                assert_eq!(layers[r * 7 + c], expect, "vertex ({r},{c})");
            }
        }
        let h = decompose_halves(&g);
        assert!(h.used_peel);
        assert!(h.width() <= 2);
    }

    #[test]
    fn grid3_center_is_alone() {
        let p = peel_partition(&generate_grid(3, 3)).unwrap();
        assert_eq!(p.b, vec![4]);
        assert_eq!(p.a.len(), 8);
    }

    #[test]
    fn outerplanar_input_has_empty_b() {
        let mut g = generate_grid(2, 5);
        assert!(peel_partition(&g).unwrap().b.is_empty());
        g = generate_triangular(2);
        assert!(peel_partition(&g).unwrap().b.is_empty());
    }

    #[test]
    fn missing_embedding_is_an_error() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(peel_partition(&g), Err(Error::MissingEmbedding)));
        assert!(!decompose_halves(&g).used_peel);
    }

    #[test]
    fn lattices_peel_into_outerplanar_halves() {
        for g in [generate_grid(5, 8), generate_grid(15, 15), generate_triangular(4), generate_triangular(9)] {
            let h = decompose_halves(&g);
            assert!(h.used_peel);
            assert!(h.width() <= 2);
        }
    }

    #[test]
    fn contracted_grids_still_decompose() {
        let mut g = generate_grid(6, 6);
        for _ in 0..15 {
            let (u, v) = g.edges()[g.n() / 3 % g.edge_count()];
            g = contract_edge(&g, u, v).unwrap().0;
            let h = decompose_halves(&g);
            assert_eq!(validate_td(&g.induced_subgraph(&h.partition.a), &h.td_a), Ok(()));
            assert_eq!(validate_td(&g.induced_subgraph(&h.partition.b), &h.td_b), Ok(()));
        }
    }
}
