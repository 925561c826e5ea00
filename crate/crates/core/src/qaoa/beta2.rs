//! `E(β₂) = a cos 4β₂ + b sin 4β₂ + c` from three evaluations. One-body
//! fields add a `cos 2β₂`, `sin 2β₂` part, recovered from five evaluations.

use std::f64::consts::{FRAC_PI_8, PI, TAU};

use super::exact::profiles_full_statevector;
use super::{energy_terms, mean_profile, ErrorBudget, IsingInstance, MeanOptions, MeanProfile, Method, QaoaAngles};
use crate::error::{Error, Result};
use crate::rng::mix;

/// One energy term with its `β₂`-independent profile.
#[derive(Clone, Debug)]
pub struct TermProfile {
    pub support: Vec<usize>,
    pub weight: f64,
    pub profile: MeanProfile,
    pub method: Method,
    pub forrelation_calls: usize,
}

/// Profiles of every term at `(β₁, γ₁, γ₂)`; `angles.beta2` is ignored.
/// Instances with at most `opts.full_statevector_cap` qubits use one state
/// vector for all terms unless a method is forced.
pub fn term_profiles(
    inst: &IsingInstance,
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    budget: ErrorBudget,
    opts: &MeanOptions,
) -> Result<Vec<TermProfile>> {
    let terms = energy_terms(inst);
    if opts.method.is_none() && inst.n() <= opts.full_statevector_cap {
        let profiles = profiles_full_statevector(inst, angles, opts.full_statevector_cap)?;
        return Ok(terms
            .into_iter()
            .zip(profiles)
            .map(|((support, weight), profile)| TermProfile { support, weight, profile, method: Method::Statevector, forrelation_calls: 0 })
            .collect());
    }
    let total_w: f64 = terms.iter().map(|(_, w)| w.abs()).sum();
    let mut out = Vec::with_capacity(terms.len());
    for (i, (support, weight)) in terms.into_iter().enumerate() {
        let eps = match budget {
            ErrorBudget::Total => epsilon * weight.abs() / total_w,
            ErrorBudget::PerTerm => epsilon,
        };
        let mut o = opts.clone();
        o.beta2_hint = false;
        let (profile, method, calls) = mean_profile(inst, &support, angles, eps, mix(seed, &[i as u64]), &o)?;
        out.push(TermProfile { support, weight, profile, method, forrelation_calls: calls });
    }
    Ok(out)
}

pub(crate) fn energy_from_profiles(inst: &IsingInstance, profiles: &[TermProfile], beta2: f64) -> f64 {
    inst.offset() + profiles.iter().map(|t| t.weight * t.profile.mean(beta2)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Beta2Fit {
    pub beta2: f64,
    pub e_max: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `cos 2β₂` and `sin 2β₂` coefficients; zero without fields.
    pub a2: f64,
    pub b2: f64,
}

impl Beta2Fit {
    pub fn energy_at(&self, beta2: f64) -> f64 {
        self.a * (4.0 * beta2).cos() + self.b * (4.0 * beta2).sin() + self.c + self.a2 * (2.0 * beta2).cos() + self.b2 * (2.0 * beta2).sin()
    }

    /// From `E(0)`, `E(π/8)`, `E(-π/8)`.
    pub fn from_points(e0: f64, e_plus: f64, e_minus: f64) -> Self {
        let c = 0.5 * (e_plus + e_minus);
        let b = 0.5 * (e_plus - e_minus);
        let a = e0 - c;
        let beta2 = b.atan2(a).rem_euclid(TAU) / 4.0;
        Beta2Fit { beta2, e_max: c + (a * a + b * b).sqrt(), a, b, c, a2: 0.0, b2: 0.0 }
    }

    /// From `E(πj/5)`, `j = 0..5`, including the `2β₂` harmonics.
    pub fn from_five_points(e: [f64; 5]) -> Self {
        let coeff = |k: f64, f: fn(f64) -> f64| {
            0.4 * e.iter().enumerate().map(|(j, v)| v * f(k * TAU * j as f64 / 5.0)).sum::<f64>()
        };
        let mut fit = Beta2Fit {
            beta2: 0.0,
            e_max: f64::NEG_INFINITY,
            a: coeff(2.0, f64::cos),
            b: coeff(2.0, f64::sin),
            c: e.iter().sum::<f64>() / 5.0,
            a2: coeff(1.0, f64::cos),
            b2: coeff(1.0, f64::sin),
        };
        // Grid over one period, then golden-section refinement.
        let steps = 720;
        let h = PI / steps as f64;
        let best = (0..steps).map(|i| i as f64 * h).max_by(|x, y| fit.energy_at(*x).total_cmp(&fit.energy_at(*y))).unwrap();
        let (mut lo, mut hi) = (best - h, best + h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let (x1, x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
            if fit.energy_at(x1) < fit.energy_at(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        fit.beta2 = (0.5 * (lo + hi)).rem_euclid(PI);
        fit.e_max = fit.energy_at(fit.beta2);
        fit
    }
}

pub(crate) fn fit_profiles(inst: &IsingInstance, profiles: &[TermProfile]) -> Beta2Fit {
    let e = |b| energy_from_profiles(inst, profiles, b);
    if inst.has_fields() {
        Beta2Fit::from_five_points([0, 1, 2, 3, 4].map(|j| e(PI * j as f64 / 5.0)))
    } else {
        Beta2Fit::from_points(e(0.0), e(FRAC_PI_8), e(-FRAC_PI_8))
    }
}

/// Best `β₂` for fixed `(β₁, γ₁, γ₂)` (`angles.beta2` is ignored).
pub fn optimize_beta2(
    inst: &IsingInstance,
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    opts: &MeanOptions,
) -> Result<Beta2Fit> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let profiles = term_profiles(inst, angles, epsilon, seed, ErrorBudget::Total, opts)?;
    Ok(fit_profiles(inst, &profiles))
}
