use std::collections::BTreeSet;

use super::{validate_td, Graph, TreeDecomposition, VertexPartition};

/// Tree decomposition from a greedy min-fill elimination order
/// (ties: smaller degree, then smaller index).
pub fn min_fill_td(g: &Graph) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition::single_bag(0);
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut bag_nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| {
                let nb: Vec<usize> = adj[v].iter().copied().collect();
                let mut fill = 0usize;
                for (i, &a) in nb.iter().enumerate() {
                    fill += nb[i + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
                }
                (fill, nb.len(), v)
            })
            .expect("a live vertex remains");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
            adj[a].remove(&v);
        }
        alive[v] = false;
        order.push(v);
        bag_nbrs[v] = nb;
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    // Node i holds the bag of order[i].
    let last = n - 1;
    let mut bags = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    for (i, &v) in order.iter().enumerate() {
        let mut bag = bag_nbrs[v].clone();
        bag.push(v);
        bags.push(bag);
        let p = bag_nbrs[v].iter().map(|&u| pos[u]).min();
        parent.push(match p {
            Some(p) => Some(p),
            None if i == last => None,
            None => Some(last),
        });
    }
    TreeDecomposition::from_parents(bags, parent).expect("elimination tree is a tree")
}

fn mono_edges(g: &Graph, side: &[bool], v: usize) -> usize {
    g.neighbors(v).filter(|&u| side[u] == side[v]).count()
}

/// Greedy two-colouring with few monochromatic edges, followed by min-fill
/// decompositions of both halves. The decompositions use local labels:
/// position within the sorted vertex list of each side.
pub fn partition_heuristic(g: &Graph) -> (VertexPartition, TreeDecomposition, TreeDecomposition) {
    let n = g.n();
    let mut side = vec![false; n];
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    side[v] = !side[u];
                    queue.push_back(v);
                }
            }
        }
    }
    // Flip any vertex with more same-side than cross neighbours.
    let mut improved = true;
    while improved {
        improved = false;
        for v in 0..n {
            if 2 * mono_edges(g, &side, v) > g.degree(v) {
                side[v] = !side[v];
                improved = true;
            }
        }
    }
    let a: Vec<usize> = (0..n).filter(|&v| !side[v]).collect();
    let b: Vec<usize> = (0..n).filter(|&v| side[v]).collect();
    let ga = g.induced_subgraph(&a);
    let gb = g.induced_subgraph(&b);
    let (ta, tb) = (min_fill_td(&ga), min_fill_td(&gb));
    debug_assert!(validate_td(&ga, &ta).is_ok() && validate_td(&gb, &tb).is_ok());
    (VertexPartition::new(a, b), ta, tb)
}
