//! Closed-form level-1 means for `e^{-iβB} e^{-iγC}|+ⁿ⟩`.

use std::f64::consts::PI;

use super::{IsingInstance, QaoaAngles};

/// `⟨Z_uZ_v⟩` at level 1. With `c = cos 2β`, `s = sin 2β` the mean is
/// `cs(⟨Z_uY_v⟩ + ⟨Y_uZ_v⟩) + s²⟨Y_uY_v⟩` in `e^{-iγC}|+ⁿ⟩`.
pub fn level1_zz(inst: &IsingInstance, u: usize, v: usize, beta: f64, gamma: f64) -> f64 {
    let g = inst.graph();
    let h = inst.fields();
    let juv = inst.coupling(u, v);
    let cos_prod = |a: usize, skip: usize| -> f64 {
        g.neighbors(a).filter(|&w| w != skip).map(|w| (2.0 * gamma * inst.coupling(a, w)).cos()).product()
    };
    let zy = (2.0 * gamma * juv).sin() * (2.0 * gamma * h[v]).cos() * cos_prod(v, u);
    let yz = (2.0 * gamma * juv).sin() * (2.0 * gamma * h[u]).cos() * cos_prod(u, v);
    let mut others: Vec<usize> = g.neighbors(u).chain(g.neighbors(v)).filter(|&w| w != u && w != v).collect();
    others.sort_unstable();
    others.dedup();
    let (mut minus, mut plus) = (1.0, 1.0);
    for &w in &others {
        let (a, b) = (inst.coupling(u, w), inst.coupling(v, w));
        minus *= (2.0 * gamma * (a - b)).cos();
        plus *= (2.0 * gamma * (a + b)).cos();
    }
    let yy = 0.5 * ((2.0 * gamma * (h[u] - h[v])).cos() * minus - (2.0 * gamma * (h[u] + h[v])).cos() * plus);
    let (c, s) = ((2.0 * beta).cos(), (2.0 * beta).sin());
    c * s * (zy + yz) + s * s * yy
}

/// `⟨Z_p⟩` at level 1.
pub fn level1_z(inst: &IsingInstance, p: usize, beta: f64, gamma: f64) -> f64 {
    let h = inst.fields()[p];
    let prod: f64 = inst.graph().neighbors(p).map(|w| (2.0 * gamma * inst.coupling(p, w)).cos()).product();
    (2.0 * beta).sin() * (2.0 * gamma * h).sin() * prod
}

/// Level-1 energy including the offset.
pub fn level1_energy(inst: &IsingInstance, beta: f64, gamma: f64) -> f64 {
    let e: f64 = inst.couplings().iter().map(|(&(u, v), j)| j * level1_zz(inst, u, v, beta, gamma)).sum();
    let f: f64 = inst
        .fields()
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0.0)
        .map(|(p, h)| h * level1_z(inst, p, beta, gamma))
        .sum();
    e + f + inst.offset()
}

/// Best `(β, γ)` on the grid `β = πi/nb`, `γ = 2πj/ng`; returns the angles
/// (as a level-2 set with `β₂ = γ₂ = 0`) and the energy.
pub fn optimize_level1(inst: &IsingInstance, nb: usize, ng: usize) -> (QaoaAngles, f64) {
    let mut best = (QaoaAngles::new(0.0, 0.0, 0.0, 0.0), f64::NEG_INFINITY);
    for i in 0..nb.max(1) {
        let beta = PI * i as f64 / nb.max(1) as f64;
        for j in 0..ng.max(1) {
            let gamma = 2.0 * PI * j as f64 / ng.max(1) as f64;
            let e = level1_energy(inst, beta, gamma);
            if e > best.1 {
                best = (QaoaAngles::new(beta, 0.0, gamma, 0.0), e);
            }
        }
    }
    best
}
