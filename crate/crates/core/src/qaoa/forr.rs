//! Local means as sums of graph-based forrelations: one instance per
//! class `(a, b)` with `f = e^{-iγ₁C}`, `g = conj(f)` on the lightcone.

use super::exact::{class_operators, support_profile};
use super::{lightcone, mu_classes, support_unitary, EdgeMeanReport, IsingInstance, MeanProfile, Method, QaoaAngles};
use crate::error::{Error, Result};
use crate::graph_forrelation::{GraphForrelationInstance, GraphPhiEstimator, SamplerKind};
use crate::linalg::{identity2, Mat2};
use crate::rng::mix;
use crate::two_local::TwoLocalFunction;
use crate::C64;

/// Sample allocation across the class instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SampleRule {
    /// Class `c` with weight `w_c = coeff·|⟨a|U|b⟩|` gets `⌈100·w_c·Σw/ε²⌉`
    /// samples, so the combined variance is at most `ε²/100`.
    #[default]
    Chebyshev,
    /// `⌈ε⁻²⌉` samples per class instance.
    PerInstance,
}

/// `e^{-iγ C(x)}` as a two-local function.
fn phase_function(inst: &IsingInstance, gamma: f64) -> Result<TwoLocalFunction> {
    let mut f = TwoLocalFunction::new(inst.graph().clone(), 2);
    for (p, &h) in inst.fields().iter().enumerate() {
        if h != 0.0 {
            f.set_vertex_term(p, vec![C64::from_polar(1.0, -gamma * h), C64::from_polar(1.0, gamma * h)])?;
        }
    }
    for (u, v, j) in inst.edge_list() {
        let (same, diff) = (C64::from_polar(1.0, -gamma * j), C64::from_polar(1.0, gamma * j));
        f.set_edge_term(u, v, vec![same, diff, diff, same])?;
    }
    Ok(f)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn profile_forrelation(
    inst: &IsingInstance,
    support: &[usize],
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    sampler: SamplerKind,
    rule: SampleRule,
    beta2_hint: Option<f64>,
) -> Result<(MeanProfile, usize)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let lc = lightcone(inst, support, 2)?;
    let sub = &lc.instance;
    let k = support.len();
    let f = phase_function(sub, angles.gamma1)?;
    let g = f.conj();
    let base = GraphForrelationInstance::with_decomposition(f, g, vec![identity2(); sub.n()])?;
    let classes = mu_classes(k, !sub.has_fields());
    let h: Vec<f64> = lc.support.iter().map(|&p| sub.fields()[p]).collect();
    let j_st = if k == 2 { sub.coupling(lc.support[0], lc.support[1]) } else { 0.0 };
    let weights: Vec<f64> = match beta2_hint {
        Some(b2) => {
            let u = support_unitary(k, j_st, &h, angles.gamma2, b2);
            classes.iter().map(|&(a, b, c)| c * u[a * (1 << k) + b].norm()).collect()
        }
        None => classes.iter().map(|&(_, _, c)| c).collect(),
    };
    let total: f64 = weights.iter().sum();
    let mut values = Vec::with_capacity(classes.len());
    let mut calls = 0;
    for (ci, (&(a, b, _), &w)) in classes.iter().zip(&weights).enumerate() {
        if w <= 1e-15 {
            values.push(C64::new(0.0, 0.0));
            continue;
        }
        let samples = match rule {
            SampleRule::Chebyshev => (100.0 * w * total / (epsilon * epsilon)).ceil() as usize,
            SampleRule::PerInstance => (1.0 / (epsilon * epsilon)).ceil() as usize,
        };
        let ops: Vec<Mat2> = class_operators(sub, &lc.support, a, b, angles.beta1, angles.gamma2)
            .into_iter()
            .map(|o| o.unwrap_or_else(identity2))
            .collect();
        let mut est = GraphPhiEstimator::new(base.with_ops(ops)?, sampler);
        let r = est.estimate(epsilon, mix(seed, &[ci as u64]), Some(samples.max(1)))?;
        values.push(r.value);
        calls += 1;
    }
    Ok((MeanProfile::Eta(support_profile(sub, &lc.support, angles.gamma2, &classes, values)), calls))
}

/// `⟨Z_sZ_t⟩` estimated through graph-based forrelation.
pub fn zz_mean_forrelation(
    inst: &IsingInstance,
    edge: (usize, usize),
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    sampler: SamplerKind,
    rule: SampleRule,
) -> Result<EdgeMeanReport> {
    let (p, calls) = profile_forrelation(inst, &[edge.0, edge.1], angles, epsilon, seed, sampler, rule, Some(angles.beta2))?;
    Ok(EdgeMeanReport {
        support: vec![edge.0, edge.1],
        value: p.mean(angles.beta2),
        method: Method::Forrelation,
        epsilon,
        forrelation_calls: calls,
    })
}
