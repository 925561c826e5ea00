use std::fmt;

use super::Graph;
use crate::error::{Error, Result};

/// Rooted tree of bags. Bags are sorted vertex lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    root: usize,
}

/// The first axiom found violated by a decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdViolation {
    NotATree,
    VertexOutOfRange(usize),
    VertexUncovered(usize),
    EdgeUncovered(usize, usize),
    Disconnected(usize),
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::NotATree => write!(f, "bag structure is not a rooted tree"),
            TdViolation::VertexOutOfRange(v) => write!(f, "bag vertex {v} out of range"),
            TdViolation::VertexUncovered(v) => write!(f, "vertex {v} is in no bag"),
            TdViolation::EdgeUncovered(u, v) => write!(f, "edge {u}-{v} is in no bag"),
            TdViolation::Disconnected(v) => write!(f, "bags containing {v} are not connected"),
        }
    }
}

impl TreeDecomposition {
    /// Builds from bags and a parent array with exactly one root.
    pub fn from_parents(bags: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Result<Self> {
        let invalid = || Error::InvalidTreeDecomposition(TdViolation::NotATree);
        if bags.len() != parent.len() || bags.is_empty() {
            return Err(invalid());
        }
        let roots: Vec<usize> = (0..bags.len()).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(invalid());
        }
        for i in 0..bags.len() {
            let mut cur = i;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                if p >= bags.len() || steps > bags.len() {
                    return Err(invalid());
                }
                cur = p;
                steps += 1;
            }
        }
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        Ok(TreeDecomposition { bags, parent, root: roots[0] })
    }

    /// Builds from undirected tree edges, rooted at node 0.
    pub fn from_edges(bags: Vec<Vec<usize>>, edges: &[(usize, usize)]) -> Result<Self> {
        let m = bags.len();
        if m == 0 || edges.len() + 1 != m {
            return Err(Error::InvalidTreeDecomposition(TdViolation::NotATree));
        }
        let mut adj = vec![Vec::new(); m];
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::InvalidTreeDecomposition(TdViolation::NotATree));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent = vec![None; m];
        let mut seen = vec![false; m];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    stack.push(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTreeDecomposition(TdViolation::NotATree));
        }
        Self::from_parents(bags, parent)
    }

    /// One bag holding every vertex.
    pub fn single_bag(n: usize) -> Self {
        TreeDecomposition { bags: vec![(0..n).collect()], parent: vec![None], root: 0 }
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn bag(&self, i: usize) -> &[usize] {
        &self.bags[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    /// Largest bag size minus one (0 for empty bags).
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.bags.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(i);
            }
        }
        ch
    }

    /// Nodes with every child before its parent.
    pub fn post_order(&self) -> Vec<usize> {
        let ch = self.children();
        let mut order = Vec::with_capacity(self.bags.len());
        let mut stack = vec![(self.root, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                order.push(u);
            } else {
                stack.push((u, true));
                for &c in ch[u].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.bags.len()];
        let mut order = self.post_order();
        order.reverse();
        for u in order {
            if let Some(p) = self.parent[u] {
                d[u] = d[p] + 1;
            }
        }
        d
    }

    /// Same tree with vertex labels mapped through `map`.
    pub fn relabel(&self, map: &[usize]) -> TreeDecomposition {
        let bags = self
            .bags
            .iter()
            .map(|b| {
                let mut nb: Vec<usize> = b.iter().map(|&v| map[v]).collect();
                nb.sort_unstable();
                nb
            })
            .collect();
        TreeDecomposition { bags, parent: self.parent.clone(), root: self.root }
    }
}

/// Checks the three axioms against `g`.
pub fn validate_td(g: &Graph, td: &TreeDecomposition) -> std::result::Result<(), TdViolation> {
    let n = g.n();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, b) in td.bags.iter().enumerate() {
        for &v in b {
            if v >= n {
                return Err(TdViolation::VertexOutOfRange(v));
            }
            holders[v].push(i);
        }
    }
    if let Some(v) = (0..n).find(|&v| holders[v].is_empty()) {
        return Err(TdViolation::VertexUncovered(v));
    }
    for (u, v) in g.edges() {
        if !holders[u].iter().any(|&i| td.bags[i].binary_search(&v).is_ok()) {
            return Err(TdViolation::EdgeUncovered(u, v));
        }
    }
    // In a rooted tree the holders of v are connected iff exactly one of
    // them has a parent outside the set.
    for v in 0..n {
        let tops = holders[v]
            .iter()
            .filter(|&&i| match td.parent[i] {
                None => true,
                Some(p) => td.bags[p].binary_search(&v).is_err(),
            })
            .count();
        if tops != 1 {
            return Err(TdViolation::Disconnected(v));
        }
    }
    Ok(())
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// Contracts subsumed tree edges, then binarizes nodes with more than two
/// children by combs that copy the parent bag.
pub fn normalize_td(td: &TreeDecomposition) -> TreeDecomposition {
    let m = td.bags.len();
    let mut bags = td.bags.clone();
    let mut parent = td.parent.clone();
    let mut alive = vec![true; m];
    let mut children = td.children();
    // Contract until no edge has one bag inside the other.
    let mut changed = true;
    while changed {
        changed = false;
        for c in 0..m {
            if !alive[c] {
                continue;
            }
            let Some(p) = parent[c] else { continue };
            let child_in_parent = is_subset(&bags[c], &bags[p]);
            if !child_in_parent && !is_subset(&bags[p], &bags[c]) {
                continue;
            }
            if !child_in_parent {
                bags[p] = bags[c].clone();
            }
            alive[c] = false;
            let moved = std::mem::take(&mut children[c]);
            for &g in &moved {
                parent[g] = Some(p);
            }
            children[p].retain(|&x| x != c);
            children[p].extend(moved);
            changed = true;
        }
    }
    // Rebuild compactly, binarizing on the way.
    let mut new_bags: Vec<Vec<usize>> = Vec::new();
    let mut new_parent: Vec<Option<usize>> = Vec::new();
    let mut stack: Vec<(usize, Option<usize>)> = vec![(td.root, None)];
    while let Some((u, np)) = stack.pop() {
        let id = new_bags.len();
        new_bags.push(bags[u].clone());
        new_parent.push(np);
        let mut ch = children[u].clone();
        ch.sort_unstable();
        let mut host = id;
        while ch.len() > 2 {
            let first = ch.remove(0);
            stack.push((first, Some(host)));
            let copy = new_bags.len();
            new_bags.push(bags[u].clone());
            new_parent.push(Some(host));
            host = copy;
        }
        for c in ch {
            stack.push((c, Some(host)));
        }
    }
    TreeDecomposition::from_parents(new_bags, new_parent).expect("normalization preserves tree shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_grid, outerplanar_td};

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_bag_is_valid() {
        let g = generate_grid(3, 3);
        let td = TreeDecomposition::single_bag(9);
        assert_eq!(validate_td(&g, &td), Ok(()));
        assert_eq!(td.width(), 8);
    }

    #[test]
    fn missing_edge_bag_reported() {
        let g = path(3);
        let td = TreeDecomposition::from_edges(vec![vec![0, 1], vec![2]], &[(0, 1)]).unwrap();
        assert_eq!(validate_td(&g, &td), Err(TdViolation::EdgeUncovered(1, 2)));
    }

    #[test]
    fn disconnected_vertex_reported() {
        let g = path(3);
        let td = TreeDecomposition::from_edges(vec![vec![0, 1], vec![2], vec![1, 2]], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(validate_td(&g, &td), Err(TdViolation::Disconnected(1)));
    }

    #[test]
    fn uncovered_vertex_reported() {
        let g = path(3);
        let td = TreeDecomposition::from_edges(vec![vec![0, 1]], &[]).unwrap();
        assert_eq!(validate_td(&g, &td), Err(TdViolation::VertexUncovered(2)));
    }

    #[test]
    fn non_tree_rejected() {
        assert!(TreeDecomposition::from_edges(vec![vec![0], vec![1]], &[]).is_err());
        assert!(TreeDecomposition::from_parents(vec![vec![0], vec![1]], vec![Some(1), Some(0)]).is_err());
    }

    #[test]
    fn star_is_binarized() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let bags = vec![vec![0], vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 4], vec![0, 5]];
        let td = TreeDecomposition::from_edges(bags, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let norm = normalize_td(&td);
        assert_eq!(validate_td(&g, &norm), Ok(()));
        assert_eq!(norm.width(), td.width());
        assert!(norm.children().iter().all(|c| c.len() <= 2));
        assert!(norm.depths().iter().max() > td.depths().iter().max());
    }

    #[test]
    fn binary_td_unchanged() {
        let g = path(4);
        let td = TreeDecomposition::from_edges(vec![vec![0, 1], vec![1, 2], vec![2, 3]], &[(0, 1), (1, 2)]).unwrap();
        let norm = normalize_td(&td);
        assert_eq!(norm.num_nodes(), 3);
        assert_eq!(validate_td(&g, &norm), Ok(()));
    }

    #[test]
    fn outerplanar_fifty_normalizes_within_bound() {
        // Fan triangulation of a 50-cycle.
        let n = 50;
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend((2..n - 1).map(|i| (0, i)));
        let g = Graph::from_edges(n, &edges).unwrap();
        let td = outerplanar_td(&g).unwrap();
        let norm = normalize_td(&td);
        assert_eq!(validate_td(&g, &norm), Ok(()));
        assert!(norm.num_nodes() <= 2 * n - 2);
        assert_eq!(norm.width(), td.width());
    }
}
