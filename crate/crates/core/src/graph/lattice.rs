use super::Graph;

/// Rotation system from vertex coordinates: neighbours sorted by angle.
fn rotation_from_coords(g: &Graph, pos: &[(f64, f64)]) -> Vec<Vec<usize>> {
    (0..g.n())
        .map(|v| {
            let mut nb: Vec<usize> = g.neighbors(v).collect();
            nb.sort_by(|&a, &b| {
                let ta = (pos[a].1 - pos[v].1).atan2(pos[a].0 - pos[v].0);
                let tb = (pos[b].1 - pos[v].1).atan2(pos[b].0 - pos[v].0);
                ta.partial_cmp(&tb).expect("finite coordinates")
            });
            nb
        })
        .collect()
}

/// `rows × cols` grid; vertex `r * cols + c`.
pub fn generate_grid(rows: usize, cols: usize) -> Graph {
    assert!(rows >= 1 && cols >= 1, "grid dimensions must be positive");
    let id = |r: usize, c: usize| r * cols + c;
    let mut g = Graph::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                g.add_edge(id(r, c), id(r, c + 1)).expect("valid");
            }
            if r + 1 < rows {
                g.add_edge(id(r, c), id(r + 1, c)).expect("valid");
            }
        }
    }
    let pos: Vec<(f64, f64)> = (0..rows * cols).map(|v| ((v % cols) as f64, -((v / cols) as f64))).collect();
    let rot = rotation_from_coords(&g, &pos);
    g.set_rotation_system(rot).expect("lattice rotation");
    let mut outer = Vec::new();
    if rows == 1 || cols == 1 {
        outer.extend(0..rows * cols);
    } else {
        outer.extend((0..cols).map(|c| id(0, c)));
        outer.extend((1..rows).map(|r| id(r, cols - 1)));
        outer.extend((0..cols - 1).rev().map(|c| id(rows - 1, c)));
        outer.extend((1..rows - 1).rev().map(|r| id(r, 0)));
    }
    g.set_outer_face(outer).expect("valid");
    g
}

/// Triangular arrangement with `rows` rows; row `j` (1-based) holds `j`
/// vertices, so `rows = 4` gives 10 vertices and 18 edges.
pub fn generate_triangular(rows: usize) -> Graph {
    assert!(rows >= 1, "triangular lattice needs at least one row");
    // Vertex (i, j), 1 <= i <= j <= rows.
    let id = |i: usize, j: usize| j * (j - 1) / 2 + (i - 1);
    let n = rows * (rows + 1) / 2;
    let mut g = Graph::new(n);
    let mut pos = vec![(0.0, 0.0); n];
    for j in 1..=rows {
        for i in 1..=j {
            pos[id(i, j)] = (i as f64 - 0.5 * j as f64, -(j as f64));
            if i > 1 {
                g.add_edge(id(i - 1, j), id(i, j)).expect("valid");
            }
            if j < rows {
                g.add_edge(id(i, j), id(i, j + 1)).expect("valid");
                g.add_edge(id(i, j), id(i + 1, j + 1)).expect("valid");
            }
        }
    }
    let rot = rotation_from_coords(&g, &pos);
    g.set_rotation_system(rot).expect("lattice rotation");
    let mut outer: Vec<usize> = (1..=rows).map(|j| id(1, j)).collect();
    outer.extend((2..=rows).map(|i| id(i, rows)));
    outer.extend((2..rows).rev().map(|j| id(j, j)));
    g.set_outer_face(outer).expect("valid");
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grids() {
        let g = generate_grid(2, 2);
        assert_eq!((g.n(), g.edge_count(), g.outer_face().unwrap().len()), (4, 4, 4));
        let g = generate_grid(3, 3);
        assert_eq!((g.n(), g.edge_count(), g.outer_face().unwrap().len()), (9, 12, 8));
        assert!(!g.outer_face().unwrap().contains(&4));
    }

    #[test]
    fn triangle_of_ten() {
        let g = generate_triangular(4);
        assert_eq!((g.n(), g.edge_count()), (10, 18));
        assert_eq!(g.outer_face().unwrap().len(), 9);
    }

    #[test]
    fn outer_face_is_a_traced_face() {
        for g in [generate_grid(4, 5), generate_triangular(5)] {
            let mut outer: Vec<usize> = g.outer_face().unwrap().to_vec();
            outer.sort_unstable();
            let found = g.faces().unwrap().iter().any(|f| {
                let mut vs: Vec<usize> = f.iter().map(|d| d.0).collect();
                vs.sort_unstable();
                vs == outer
            });
            assert!(found);
        }
    }
}
