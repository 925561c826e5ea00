//! Exact local means: lightcone state vector, the Schrödinger-picture
//! algorithm A′ and the Heisenberg-picture algorithm A″.

use super::dense::{apply_mixer, apply_phase, apply_y, apply_z, cost_table, inner, plus_state, project_plus};
use super::{ball, energy_terms, lightcone, mu_classes, support_unitary, EtaProfile, EtaTerm, IsingInstance, MeanProfile, QaoaAngles};
use crate::error::{Error, Result};
use crate::C64;

/// How A″ enumerates the entries of the reduced density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RhoEnumeration {
    /// Over `z = x - y ∈ {-1,0,1}^{n₁}` in ternary Gray order.
    #[default]
    Ternary,
    /// Over all pairs `(x, y)` in binary Gray order.
    Binary,
}

fn check_cap(what: &'static str, value: usize, cap: usize) -> Result<()> {
    if value > cap {
        Err(Error::CapExceeded { what, value, cap })
    } else {
        Ok(())
    }
}

/// `e^{-iγ₂C} e^{-iβ₁B} e^{-iγ₁C}|+ⁿ⟩` and the cost table.
fn state_before_last_mixer(inst: &IsingInstance, angles: &QaoaAngles) -> (Vec<C64>, Vec<f64>) {
    let n = inst.n();
    let table = cost_table(n, &inst.edge_list(), inst.fields());
    let mut psi = plus_state(n);
    apply_phase(&mut psi, &table, angles.gamma1);
    apply_mixer(&mut psi, n, angles.beta1);
    apply_phase(&mut psi, &table, angles.gamma2);
    (psi, table)
}

fn parts_from_state(phi: &[C64], support: &[usize]) -> MeanProfile {
    let spin = |x: usize, q: usize| if (x >> q) & 1 == 0 { 1.0 } else { -1.0 };
    if support.len() == 1 {
        let p = support[0];
        let z: f64 = phi.iter().enumerate().map(|(x, a)| a.norm_sqr() * spin(x, p)).sum();
        let mut y = phi.to_vec();
        apply_y(&mut y, p);
        return MeanProfile::Parts { k: 1, coeffs: [z, inner(phi, &y).re, 0.0] };
    }
    let (s, t) = (support[0], support[1]);
    let zz: f64 = phi.iter().enumerate().map(|(x, a)| a.norm_sqr() * spin(x, s) * spin(x, t)).sum();
    let mut zy = phi.to_vec();
    apply_y(&mut zy, t);
    let mut yy = zy.clone();
    apply_z(&mut zy, s);
    apply_y(&mut yy, s);
    let mut yz = phi.to_vec();
    apply_y(&mut yz, s);
    apply_z(&mut yz, t);
    let cross = inner(phi, &zy).re + inner(phi, &yz).re;
    MeanProfile::Parts { k: 2, coeffs: [zz, cross, inner(phi, &yy).re] }
}

/// Profile from the state vector on the radius-2 lightcone of the support.
pub(crate) fn parts_statevector(inst: &IsingInstance, support: &[usize], angles: &QaoaAngles, cap: usize) -> Result<MeanProfile> {
    let lc = lightcone(inst, support, 2)?;
    check_cap("lightcone qubits", lc.vertices.len(), cap)?;
    let (phi, _) = state_before_last_mixer(&lc.instance, angles);
    Ok(parts_from_state(&phi, &lc.support))
}

/// Profiles of every energy term from one state vector of the whole
/// instance.
pub(crate) fn profiles_full_statevector(inst: &IsingInstance, angles: &QaoaAngles, cap: usize) -> Result<Vec<MeanProfile>> {
    check_cap("qubits", inst.n(), cap)?;
    let (phi, _) = state_before_last_mixer(inst, angles);
    Ok(energy_terms(inst).iter().map(|(s, _)| parts_from_state(&phi, s)).collect())
}

/// Algorithm A′: `W†P_jW|+⟩` on `N₂(j)` for `P ∈ {Z, Y}`, projected onto
/// `|+⟩` outside the common part of the lightcones.
pub(crate) fn parts_aprime(inst: &IsingInstance, support: &[usize], angles: &QaoaAngles, cap: usize) -> Result<MeanProfile> {
    if support.is_empty() || support.len() > 2 || support.iter().any(|&v| v >= inst.n()) {
        return Err(Error::InvalidArgument("support must be one or two vertices".into()));
    }
    if support.len() == 2 && !inst.graph().has_edge(support[0], support[1]) {
        return Err(Error::MissingEdge(support[0], support[1]));
    }
    let cones: Vec<Vec<usize>> = support.iter().map(|&j| ball(inst.graph(), &[j], 2)).collect();
    for c in &cones {
        check_cap("lightcone qubits", c.len(), cap)?;
    }
    // heisenberg[j] = [W'†Z_jW'|+⟩, W'†Y_jW'|+⟩] on cones[j]
    let mut heisenberg = Vec::new();
    for (&j, cone) in support.iter().zip(&cones) {
        let sub = inst.induced(cone);
        let n = sub.n();
        let q = cone.binary_search(&j).unwrap();
        let (phi, table) = state_before_last_mixer(&sub, angles);
        let mut pair = Vec::new();
        for use_y in [false, true] {
            let mut v = phi.clone();
            if use_y {
                apply_y(&mut v, q);
            } else {
                apply_z(&mut v, q);
            }
            apply_phase(&mut v, &table, -angles.gamma2);
            apply_mixer(&mut v, n, -angles.beta1);
            apply_phase(&mut v, &table, -angles.gamma1);
            pair.push(v);
        }
        heisenberg.push(pair);
    }
    if support.len() == 1 {
        let n = cones[0].len();
        let all = vec![true; n];
        let z = project_plus(&heisenberg[0][0], n, &all)[0].re;
        let y = project_plus(&heisenberg[0][1], n, &all)[0].re;
        return Ok(MeanProfile::Parts { k: 1, coeffs: [z, y, 0.0] });
    }
    let project = |idx: usize| -> Vec<Vec<C64>> {
        let (mine, other) = (&cones[idx], &cones[1 - idx]);
        let drop: Vec<bool> = mine.iter().map(|v| other.binary_search(v).is_err()).collect();
        heisenberg[idx].iter().map(|v| project_plus(v, mine.len(), &drop)).collect()
    };
    let (ps, pt) = (project(0), project(1));
    Ok(MeanProfile::Parts {
        k: 2,
        coeffs: [
            inner(&ps[0], &pt[0]).re,
            inner(&ps[0], &pt[1]).re + inner(&ps[1], &pt[0]).re,
            inner(&ps[1], &pt[1]).re,
        ],
    })
}

type Op2 = [C64; 4];

fn matmul2(a: &Op2, b: &Op2) -> Op2 {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

/// `e^{iβX}`.
fn rx_plus(beta: f64) -> Op2 {
    let (c, s) = (C64::new(beta.cos(), 0.0), C64::new(0.0, beta.sin()));
    [c, s, s, c]
}

fn dagger(a: &Op2) -> Op2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

/// Operators `O_p(a, b)` on the lightcone (local ids); `None` for identity.
pub(crate) fn class_operators(
    inst: &IsingInstance,
    support: &[usize],
    a: usize,
    b: usize,
    beta1: f64,
    gamma2: f64,
) -> Vec<Option<Op2>> {
    let r = rx_plus(beta1);
    let rd = dagger(&r);
    let sign = |m: usize, j: usize| if (m >> j) & 1 == 0 { 1.0 } else { -1.0 };
    (0..inst.n())
        .map(|p| {
            if let Some(j) = support.iter().position(|&s| s == p) {
                let (aj, bj) = ((a >> j) & 1, (b >> j) & 1);
                let mut ket_bra = [C64::new(0.0, 0.0); 4];
                ket_bra[2 * aj + bj] = C64::new(1.0, 0.0);
                return Some(matmul2(&matmul2(&r, &ket_bra), &rd));
            }
            let theta: f64 = support.iter().enumerate().map(|(j, &s)| inst.coupling(s, p) * (sign(a, j) - sign(b, j))).sum();
            if theta == 0.0 {
                return None;
            }
            let zero = C64::new(0.0, 0.0);
            let d = [C64::from_polar(1.0, gamma2 * theta), zero, zero, C64::from_polar(1.0, -gamma2 * theta)];
            Some(matmul2(&matmul2(&r, &d), &rd))
        })
        .collect()
}

fn identity_op() -> Op2 {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    [o, z, z, o]
}

/// Dense `⊗ ops` with operator `i` on bit `i`.
fn kron_ops(ops: &[Op2]) -> Vec<C64> {
    let mut m = vec![C64::new(1.0, 0.0)];
    let mut dim = 1usize;
    for o in ops {
        let nd = dim * 2;
        let mut next = vec![C64::new(0.0, 0.0); nd * nd];
        for r in 0..dim {
            for c in 0..dim {
                let v = m[r * dim + c];
                for rb in 0..2 {
                    for cb in 0..2 {
                        next[(r | (rb * dim)) * nd + (c | (cb * dim))] = v * o[2 * rb + cb];
                    }
                }
            }
        }
        m = next;
        dim = nd;
    }
    m
}

/// `η(a, b)` for each class via the reduced density matrix of `N₁`.
fn etas(
    inst: &IsingInstance,
    support: &[usize],
    angles: &QaoaAngles,
    classes: &[(usize, usize)],
    mode: RhoEnumeration,
    cap: usize,
) -> Result<Vec<C64>> {
    let lc = lightcone(inst, support, 2)?;
    let sub = &lc.instance;
    let n1_local: Vec<usize> = lc.n1.iter().map(|v| lc.vertices.binary_search(v).unwrap()).collect();
    let n1 = n1_local.len();
    check_cap("N1 qubits", n1, cap)?;
    let mut pos = vec![usize::MAX; sub.n()];
    for (i, &v) in n1_local.iter().enumerate() {
        pos[v] = i;
    }
    // ℓ_j coefficients 2γ₁J_{p(j),q} for outside vertices p(j)
    let outside: Vec<Vec<f64>> = (0..sub.n())
        .filter(|&p| pos[p] == usize::MAX)
        .map(|p| {
            let mut row = vec![0.0; n1];
            for (i, &q) in n1_local.iter().enumerate() {
                row[i] = 2.0 * angles.gamma1 * sub.coupling(p, q);
            }
            row
        })
        .filter(|row| row.iter().any(|&c| c != 0.0))
        .collect();
    let loc_edges: Vec<(usize, usize, f64)> = sub
        .edge_list()
        .into_iter()
        .filter(|&(u, v, _)| pos[u] != usize::MAX && pos[v] != usize::MAX)
        .map(|(u, v, j)| (pos[u], pos[v], j))
        .collect();
    let loc_fields: Vec<f64> = n1_local.iter().map(|&v| sub.fields()[v]).collect();
    let phase: Vec<C64> =
        cost_table(n1, &loc_edges, &loc_fields).into_iter().map(|c| C64::from_polar(1.0, -angles.gamma1 * c)).collect();

    let na = n1 / 2;
    let mask_a = (1usize << na) - 1;
    let dim_a = 1usize << na;
    let dim_b = 1usize << (n1 - na);
    let support_local = &lc.support;
    let mut op_a = Vec::new();
    let mut op_b = Vec::new();
    for &(a, b) in classes {
        let ops = class_operators(sub, support_local, a, b, angles.beta1, angles.gamma2);
        let list: Vec<Op2> = n1_local.iter().map(|&v| ops[v].unwrap_or_else(identity_op)).collect();
        op_a.push(kron_ops(&list[..na]));
        op_b.push(kron_ops(&list[na..]));
    }
    let scale = (0.5f64).powi(n1 as i32);
    let mut acc = vec![C64::new(0.0, 0.0); classes.len()];
    let mut visit = |x: usize, y: usize, f: f64| {
        let w = phase[x] * phase[y].conj() * f;
        let (xa, xb, ya, yb) = (x & mask_a, x >> na, y & mask_a, y >> na);
        for c in 0..classes.len() {
            acc[c] += op_a[c][ya * dim_a + xa] * op_b[c][yb * dim_b + xb] * w;
        }
    };
    let product = |ell: &[f64]| ell.iter().map(|l| l.cos()).product::<f64>() * scale;
    match mode {
        RhoEnumeration::Ternary => {
            let mut digit = vec![0u8; n1];
            let mut dir = vec![1i8; n1];
            let mut ell: Vec<f64> = outside.iter().map(|row| -row.iter().sum::<f64>()).collect();
            let (mut plus, mut minus) = (0usize, (1usize << n1) - 1);
            let total = 3usize.pow(n1 as u32);
            for step in 0..total {
                if step > 0 {
                    let mut i = 0;
                    while !(0..=2).contains(&(digit[i] as i8 + dir[i])) {
                        dir[i] = -dir[i];
                        i += 1;
                    }
                    let old = digit[i] as i8 - 1;
                    digit[i] = (digit[i] as i8 + dir[i]) as u8;
                    let new = digit[i] as i8 - 1;
                    for (l, row) in ell.iter_mut().zip(&outside) {
                        *l += row[i] * (new - old) as f64;
                    }
                    let bit = 1usize << i;
                    plus &= !bit;
                    minus &= !bit;
                    match new {
                        1 => plus |= bit,
                        -1 => minus |= bit,
                        _ => {}
                    }
                }
                let f = product(&ell);
                let zero = ((1usize << n1) - 1) & !plus & !minus;
                let mut sub_mask = zero;
                loop {
                    visit(plus | sub_mask, minus | sub_mask, f);
                    if sub_mask == 0 {
                        break;
                    }
                    sub_mask = (sub_mask - 1) & zero;
                }
            }
        }
        RhoEnumeration::Binary => {
            let mut ell = vec![0.0; outside.len()];
            let (mut x, mut y) = (0usize, 0usize);
            visit(0, 0, product(&ell));
            for i in 1..1usize << (2 * n1) {
                let b = i.trailing_zeros() as usize;
                let (q, sign) = if b < n1 {
                    let was = (x >> b) & 1;
                    x ^= 1 << b;
                    (b, if was == 0 { 1.0 } else { -1.0 })
                } else {
                    let q = b - n1;
                    let was = (y >> q) & 1;
                    y ^= 1 << q;
                    (q, if was == 0 { -1.0 } else { 1.0 })
                };
                for (l, row) in ell.iter_mut().zip(&outside) {
                    *l += sign * row[q];
                }
                visit(x, y, product(&ell));
            }
        }
    }
    Ok(acc)
}

/// Algorithm A″ as a profile over the symmetry classes.
pub(crate) fn profile_adoubleprime(
    inst: &IsingInstance,
    support: &[usize],
    angles: &QaoaAngles,
    mode: RhoEnumeration,
    cap: usize,
) -> Result<MeanProfile> {
    let lc = lightcone(inst, support, 2)?;
    let k = support.len();
    let classes = mu_classes(k, !lc.instance.has_fields());
    let pairs: Vec<(usize, usize)> = classes.iter().map(|&(a, b, _)| (a, b)).collect();
    let values = etas(inst, support, angles, &pairs, mode, cap)?;
    Ok(MeanProfile::Eta(support_profile(inst, support, angles.gamma2, &classes, values)))
}

pub(crate) fn support_profile(
    inst: &IsingInstance,
    support: &[usize],
    gamma2: f64,
    classes: &[(usize, usize, f64)],
    etas: Vec<C64>,
) -> EtaProfile {
    let k = support.len();
    EtaProfile {
        k,
        j_st: if k == 2 { inst.coupling(support[0], support[1]) } else { 0.0 },
        h: support.iter().map(|&p| inst.fields()[p]).collect(),
        gamma2,
        terms: classes.iter().zip(etas).map(|(&(a, b, coeff), eta)| EtaTerm { a, b, coeff, eta }).collect(),
    }
}

/// `μ(v) = ⟨v₁v₂|U|v₃v₄⟩ · η(v)` for one `v = [v₁, v₂, v₃, v₄]`.
pub fn mu_exact(inst: &IsingInstance, edge: (usize, usize), angles: &QaoaAngles, v: [u8; 4]) -> Result<C64> {
    let support = [edge.0, edge.1];
    let a = v[0] as usize | ((v[1] as usize) << 1);
    let b = v[2] as usize | ((v[3] as usize) << 1);
    let eta = etas(inst, &support, angles, &[(a, b)], RhoEnumeration::Ternary, 20)?[0];
    let u = support_unitary(2, inst.coupling(edge.0, edge.1), &[inst.fields()[edge.0], inst.fields()[edge.1]], angles.gamma2, angles.beta2);
    Ok(u[a * 4 + b] * eta)
}

/// Exact `⟨Z_sZ_t⟩` from the state vector on `N₂(s,t)`.
pub fn zz_mean_statevector(inst: &IsingInstance, edge: (usize, usize), angles: &QaoaAngles, cap: usize) -> Result<f64> {
    Ok(parts_statevector(inst, &[edge.0, edge.1], angles, cap)?.mean(angles.beta2))
}

/// Exact `⟨Z_sZ_t⟩` by algorithm A′.
pub fn zz_mean_aprime(inst: &IsingInstance, edge: (usize, usize), angles: &QaoaAngles, cap: usize) -> Result<f64> {
    Ok(parts_aprime(inst, &[edge.0, edge.1], angles, cap)?.mean(angles.beta2))
}

/// Exact `⟨Z_sZ_t⟩` by algorithm A″.
pub fn zz_mean_adoubleprime(
    inst: &IsingInstance,
    edge: (usize, usize),
    angles: &QaoaAngles,
    mode: RhoEnumeration,
    cap: usize,
) -> Result<f64> {
    Ok(profile_adoubleprime(inst, &[edge.0, edge.1], angles, mode, cap)?.mean(angles.beta2))
}
