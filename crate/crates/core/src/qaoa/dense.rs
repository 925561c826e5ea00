//! State-vector kernels on little-endian qubit registers.

use crate::C64;

/// `C(x)` for every `x`, by Gray-code walk with `O(deg)` updates.
pub(crate) fn cost_table(n: usize, edges: &[(usize, usize, f64)], fields: &[f64]) -> Vec<f64> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, j) in edges {
        adj[u].push((v, j));
        adj[v].push((u, j));
    }
    let mut table = vec![0.0; 1 << n];
    let mut value: f64 = edges.iter().map(|e| e.2).sum::<f64>() + fields.iter().sum::<f64>();
    let mut x = 0usize;
    table[0] = value;
    for i in 1..1usize << n {
        let b = i.trailing_zeros() as usize;
        let zb = if (x >> b) & 1 == 0 { 1.0 } else { -1.0 };
        let local: f64 = adj[b].iter().map(|&(w, j)| j * if (x >> w) & 1 == 0 { 1.0 } else { -1.0 }).sum::<f64>() + fields[b];
        value -= 2.0 * zb * local;
        x ^= 1 << b;
        table[x] = value;
    }
    table
}

pub(crate) fn plus_state(n: usize) -> Vec<C64> {
    vec![C64::new((0.5f64).powf(n as f64 / 2.0), 0.0); 1 << n]
}

/// `ψ ← e^{-iγ C} ψ`.
pub(crate) fn apply_phase(psi: &mut [C64], table: &[f64], gamma: f64) {
    for (a, &c) in psi.iter_mut().zip(table) {
        *a *= C64::from_polar(1.0, -gamma * c);
    }
}

/// `ψ ← e^{-iβ X_q} ψ`.
pub(crate) fn apply_rx(psi: &mut [C64], q: usize, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let ms = C64::new(0.0, -s);
    let bit = 1usize << q;
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a, b) = (psi[i], psi[i | bit]);
            psi[i] = a * c + b * ms;
            psi[i | bit] = a * ms + b * c;
        }
    }
}

/// `ψ ← e^{-iβ B} ψ`.
pub(crate) fn apply_mixer(psi: &mut [C64], n: usize, beta: f64) {
    for q in 0..n {
        apply_rx(psi, q, beta);
    }
}

pub(crate) fn apply_z(psi: &mut [C64], q: usize) {
    for (i, a) in psi.iter_mut().enumerate() {
        if (i >> q) & 1 == 1 {
            *a = -*a;
        }
    }
}

pub(crate) fn apply_y(psi: &mut [C64], q: usize) {
    let bit = 1usize << q;
    let i_unit = C64::new(0.0, 1.0);
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a, b) = (psi[i], psi[i | bit]);
            psi[i] = -i_unit * b;
            psi[i | bit] = i_unit * a;
        }
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Projects the qubits with `drop[q]` onto `|+⟩` and discards them.
pub(crate) fn project_plus(psi: &[C64], n: usize, drop: &[bool]) -> Vec<C64> {
    let mut cur = psi.to_vec();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for q in (0..n).rev() {
        if !drop[q] {
            continue;
        }
        let low = 1usize << q;
        let mut next = vec![C64::new(0.0, 0.0); cur.len() / 2];
        for (y, slot) in next.iter_mut().enumerate() {
            let base = (y & (low - 1)) | ((y >> q) << (q + 1));
            *slot = (cur[base] + cur[base | low]) * r;
        }
        cur = next;
    }
    cur
}
