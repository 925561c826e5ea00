use std::collections::{BTreeSet, HashMap};

use super::{Graph, TreeDecomposition};
use crate::error::{Error, Result};

/// Width-2 tree decomposition by repeatedly removing a vertex of degree at
/// most two (adding the fill edge between the two neighbours), then
/// rebuilding bags in reverse removal order.
pub fn outerplanar_td(g: &Graph) -> Result<TreeDecomposition> {
    let n = g.n();
    if n == 0 {
        return Ok(TreeDecomposition::single_bag(0));
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut removed: Vec<(usize, Vec<usize>)> = Vec::with_capacity(n);
    while let Some(&(d, v)) = queue.iter().next() {
        if d > 2 {
            return Err(Error::NotTwoDegenerate);
        }
        queue.remove(&(d, v));
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        if let [u, w] = nbrs[..] {
            for (a, b) in [(u, w), (w, u)] {
                adj[a].insert(b);
            }
        }
        for &u in &nbrs {
            queue.insert((adj[u].len(), u));
        }
        adj[v].clear();
        removed.push((v, nbrs));
    }

    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut last_singleton: Option<usize> = None;
    let mut edge_bag: HashMap<(usize, usize), usize> = HashMap::new();
    for (v, nbrs) in removed.into_iter().rev() {
        let id = bags.len();
        let (bag, p) = match nbrs[..] {
            [] => {
                let p = last_singleton.or(if id > 0 { Some(0) } else { None });
                last_singleton = Some(id);
                (vec![v], p)
            }
            [u] => (vec![u, v], Some(holders[u][0])),
            [u, w] => {
                let key = (u.min(w), u.max(w));
                let p = edge_bag.get(&key).copied().expect("fill edge is covered");
                (vec![u, v, w], Some(p))
            }
            _ => unreachable!(),
        };
        for &x in &bag {
            holders[x].push(id);
        }
        for (i, &a) in bag.iter().enumerate() {
            for &b in &bag[i + 1..] {
                edge_bag.entry((a.min(b), a.max(b))).or_insert(id);
            }
        }
        bags.push(bag);
        parent.push(p);
    }
    TreeDecomposition::from_parents(bags, parent)
}
