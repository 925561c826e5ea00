//! Recursive QAOA: fix the most correlated edge, contract, repeat, then
//! brute force the remainder.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::time::Instant;

use super::beta2::{fit_profiles, term_profiles};
use super::level1::optimize_level1;
use super::{ErrorBudget, IsingInstance, MeanOptions, QaoaAngles};
use crate::error::{Error, Result};
use crate::graph::contract_edge;
use crate::rng::mix;

pub const MAXCUT_CAP: usize = 26;

/// Maximum of `C(z) + offset` by a Gray-code walk over all spins.
pub fn exact_maxcut(inst: &IsingInstance) -> Result<(Vec<i8>, f64)> {
    let n = inst.n();
    if n > MAXCUT_CAP {
        return Err(Error::CapExceeded { what: "qubits", value: n, cap: MAXCUT_CAP });
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(u, v), &j) in inst.couplings() {
        adj[u].push((v, j));
        adj[v].push((u, j));
    }
    let h = inst.fields();
    let mut z = vec![1i8; n];
    let mut cost = inst.cost(&z);
    let (mut best, mut best_code) = (cost, 0u64);
    let mut code = 0u64;
    for i in 1u64..(1u64 << n) {
        let q = i.trailing_zeros() as usize;
        let local: f64 = h[q] + adj[q].iter().map(|&(w, j)| j * z[w] as f64).sum::<f64>();
        cost -= 2.0 * z[q] as f64 * local;
        z[q] = -z[q];
        code ^= 1 << q;
        if cost > best {
            best = cost;
            best_code = code;
        }
    }
    let z: Vec<i8> = (0..n).map(|q| if (best_code >> q) & 1 == 1 { -1 } else { 1 }).collect();
    let exact = inst.cost(&z);
    Ok((z, exact))
}

/// `z_eliminated = sign · z_survivor`, in original vertex ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub eliminated: usize,
    pub survivor: usize,
    pub sign: i8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintStack {
    records: Vec<Constraint>,
}

impl ConstraintStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[Constraint] {
        &self.records
    }

    pub fn push(&mut self, c: Constraint) -> Result<()> {
        if c.sign.abs() != 1 || c.eliminated == c.survivor {
            return Err(Error::InvalidArgument("bad constraint".into()));
        }
        if self.records.iter().any(|r| r.eliminated == c.eliminated || r.eliminated == c.survivor) {
            return Err(Error::InvalidArgument(format!("vertex {} already eliminated", c.eliminated)));
        }
        self.records.push(c);
        Ok(())
    }

    /// Fills the eliminated entries of `z` from the last record backwards.
    pub fn back_substitute(&self, z: &mut [i8]) {
        for c in self.records.iter().rev() {
            z[c.eliminated] = c.sign * z[c.survivor];
        }
    }
}

/// Substitutes `z_p = sign · z_q` and removes `p`. Returns the new
/// instance and the old-to-new vertex map.
pub fn contract(inst: &IsingInstance, p: usize, q: usize, sign: i8) -> Result<(IsingInstance, Vec<usize>)> {
    let (graph, map) = contract_edge(inst.graph(), q, p)?;
    let s = sign as f64;
    let mut offset = inst.offset();
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(u, v), &j) in inst.couplings() {
        if (u == p && v == q) || (u == q && v == p) {
            offset += j * s;
            continue;
        }
        let w = if u == p || v == p { j * s } else { j };
        let (a, b) = (map[u], map[v]);
        *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
    }
    let mut fields = vec![0.0; graph.n()];
    for (v, &h) in inst.fields().iter().enumerate() {
        fields[map[v]] += if v == p { h * s } else { h };
    }
    let couplings: Vec<(usize, usize, f64)> = acc.into_iter().map(|((a, b), j)| (a, b, j)).collect();
    Ok((IsingInstance::new(graph, &couplings)?.with_fields(fields)?.with_offset(offset), map))
}

#[derive(Clone, Debug)]
pub struct RqaoaConfig {
    pub epsilon: f64,
    pub brute_threshold: usize,
    pub gamma_grid: usize,
    pub level1_grid: usize,
    pub options: MeanOptions,
    pub budget: ErrorBudget,
}

impl Default for RqaoaConfig {
    fn default() -> Self {
        RqaoaConfig {
            epsilon: 0.03,
            brute_threshold: 10,
            gamma_grid: 30,
            level1_grid: 64,
            options: MeanOptions::default(),
            budget: ErrorBudget::PerTerm,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Vertices remaining before the contraction.
    pub n: usize,
    /// `(eliminated, survivor)` in original ids.
    pub edge: (usize, usize),
    pub sign: i8,
    pub m: f64,
    pub angles: QaoaAngles,
    pub level1_energy: f64,
    pub energy: f64,
    pub methods: BTreeMap<&'static str, usize>,
    pub forrelation_calls: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RqaoaResult {
    pub assignment: Vec<i8>,
    pub cost: f64,
    pub stack: ConstraintStack,
    pub trace: Vec<StepRecord>,
}

/// Runs RQAOA on `inst`; profiles in step `s` at `γ₂` index `k` use the
/// seed stream `(seed, s, k)`.
pub fn rqaoa(inst: &IsingInstance, cfg: &RqaoaConfig, seed: u64) -> Result<RqaoaResult> {
    if cfg.brute_threshold > MAXCUT_CAP {
        return Err(Error::InvalidArgument(format!("brute-force threshold above {MAXCUT_CAP}")));
    }
    if !(cfg.epsilon > 0.0) || cfg.gamma_grid == 0 || cfg.level1_grid == 0 {
        return Err(Error::InvalidArgument("epsilon and grid sizes must be positive".into()));
    }
    let mut cur = inst.clone();
    let mut ids: Vec<usize> = (0..inst.n()).collect();
    let mut stack = ConstraintStack::new();
    let mut trace = Vec::new();
    while cur.n() > cfg.brute_threshold && !cur.couplings().is_empty() {
        let start = Instant::now();
        let step = trace.len();
        let (l1, e1) = optimize_level1(&cur, cfg.level1_grid, cfg.level1_grid);
        let mut best = None;
        for k in 0..cfg.gamma_grid {
            let angles = QaoaAngles { gamma2: TAU * k as f64 / cfg.gamma_grid as f64, ..l1 };
            let profiles =
                term_profiles(&cur, &angles, cfg.epsilon, mix(seed, &[step as u64, k as u64]), cfg.budget, &cfg.options)?;
            let fit = fit_profiles(&cur, &profiles);
            if best.as_ref().map_or(true, |(f, _, _): &(super::Beta2Fit, _, _)| fit.e_max > f.e_max) {
                best = Some((fit, angles, profiles));
            }
        }
        let (fit, angles, profiles) = best.expect("non-empty grid");
        let angles = QaoaAngles { beta2: fit.beta2, ..angles };
        let mut methods = BTreeMap::new();
        let mut calls = 0;
        let mut pick: Option<((usize, usize), f64)> = None;
        for t in &profiles {
            *methods.entry(t.method.name()).or_insert(0) += 1;
            calls += t.forrelation_calls;
            if t.support.len() != 2 {
                continue;
            }
            let m = t.profile.mean(fit.beta2);
            if pick.map_or(true, |(_, bm)| m.abs() > bm.abs()) {
                pick = Some(((t.support[0], t.support[1]), m));
            }
        }
        let ((u, v), m) = pick.expect("instance has couplings");
        let sign = if m > 0.0 {
            1
        } else if m < 0.0 {
            -1
        } else {
            log::warn!("step {step}: all edge correlations vanish; fixing {u}-{v} with sign +1");
            1
        };
        let (p, q) = (u.max(v), u.min(v));
        stack.push(Constraint { eliminated: ids[p], survivor: ids[q], sign })?;
        trace.push(StepRecord {
            step,
            n: cur.n(),
            edge: (ids[p], ids[q]),
            sign,
            m,
            angles,
            level1_energy: e1,
            energy: fit.e_max,
            methods,
            forrelation_calls: calls,
            seconds: start.elapsed().as_secs_f64(),
        });
        log::info!("step {step}: n={} fix z{} = {:+} z{} (M={m:.4})", cur.n(), ids[p], sign, ids[q]);
        let (next, _) = contract(&cur, p, q, sign)?;
        ids.remove(p);
        cur = next;
    }
    let local = if cur.n() <= MAXCUT_CAP {
        exact_maxcut(&cur)?.0
    } else {
        // no couplings left: each spin follows its field
        cur.fields().iter().map(|&h| if h < 0.0 { -1 } else { 1 }).collect()
    };
    let mut z = vec![0i8; inst.n()];
    for (i, &id) in ids.iter().enumerate() {
        z[id] = local[i];
    }
    stack.back_substitute(&mut z);
    let cost = inst.cost(&z);
    Ok(RqaoaResult { assignment: z, cost, stack, trace })
}
