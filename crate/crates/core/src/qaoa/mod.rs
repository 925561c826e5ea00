//! Level-2 QAOA mean values for Ising cost functions
//! `C = Σ J_pq Z_p Z_q + Σ h_p Z_p` and the recursive QAOA driver.
//!
//! The state is `e^{-iβ₂B} e^{-iγ₂C} e^{-iβ₁B} e^{-iγ₁C}|+ⁿ⟩` with
//! `B = Σ X_p`. Qubit `p` in basis state `x_p` has `Z_p = (-1)^{x_p}`.
//!
//! Every local mean is first reduced to a profile that does not depend on
//! `β₂` ([`MeanProfile`]); evaluating it at any `β₂` is then free.

mod beta2;
mod dense;
mod exact;
mod forr;
mod level1;
mod rqaoa;

pub use beta2::{optimize_beta2, term_profiles, Beta2Fit, TermProfile};
pub use exact::{mu_exact, zz_mean_adoubleprime, zz_mean_aprime, zz_mean_statevector, RhoEnumeration};
pub use forr::{zz_mean_forrelation, SampleRule};
pub use level1::{level1_energy, level1_z, level1_zz, optimize_level1};
pub use rqaoa::{contract, exact_maxcut, rqaoa, MAXCUT_CAP, Constraint, ConstraintStack, RqaoaConfig, RqaoaResult, StepRecord};

use std::collections::{BTreeMap, VecDeque};
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::graph_forrelation::SamplerKind;
use crate::C64;

pub(crate) use exact::{parts_aprime, parts_statevector, profile_adoubleprime};
pub(crate) use forr::profile_forrelation;

/// Ising cost function on a graph, plus optional fields and a constant.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingInstance {
    graph: Graph,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl IsingInstance {
    /// Couplings must lie on edges; edges without a nonzero coupling are
    /// dropped from the graph.
    pub fn new(mut graph: Graph, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(u, v, j) in couplings {
            if !graph.has_edge(u, v) {
                return Err(Error::MissingEdge(u, v));
            }
            if !j.is_finite() {
                return Err(Error::InvalidArgument(format!("coupling {u}-{v} is not finite")));
            }
            *map.entry(key(u, v)).or_insert(0.0) += j;
        }
        map.retain(|_, j| *j != 0.0);
        for (u, v) in graph.edges() {
            if !map.contains_key(&(u, v)) {
                graph.remove_edge(u, v)?;
            }
        }
        let n = graph.n();
        Ok(IsingInstance { graph, couplings: map, fields: vec![0.0; n], offset: 0.0 })
    }

    /// Independent uniform `±1` couplings on every edge.
    pub fn random_pm1<R: Rng + ?Sized>(graph: Graph, rng: &mut R) -> Self {
        let c: Vec<(usize, usize, f64)> =
            graph.edges().into_iter().map(|(u, v)| (u, v, if rng.gen::<bool>() { 1.0 } else { -1.0 })).collect();
        IsingInstance::new(graph, &c).expect("couplings on edges")
    }

    pub fn with_fields(mut self, fields: Vec<f64>) -> Result<Self> {
        if fields.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("{} fields for {} vertices", fields.len(), self.n())));
        }
        if fields.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidArgument("fields must be finite".into()));
        }
        self.fields = fields;
        Ok(self)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn coupling(&self, u: usize, v: usize) -> f64 {
        self.couplings.get(&key(u, v)).copied().unwrap_or(0.0)
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|&h| h != 0.0)
    }

    /// `C(z) + offset` for spins `z ∈ {±1}ⁿ`.
    pub fn cost(&self, z: &[i8]) -> f64 {
        let e: f64 = self.couplings.iter().map(|(&(u, v), j)| j * (z[u] * z[v]) as f64).sum();
        let h: f64 = self.fields.iter().zip(z).map(|(h, &s)| h * s as f64).sum();
        e + h + self.offset
    }

    /// Sub-instance on `vertices` (kept in the given order) with the
    /// couplings and fields internal to it; no offset.
    pub fn induced(&self, vertices: &[usize]) -> IsingInstance {
        let graph = self.graph.induced_subgraph(vertices);
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let couplings = self
            .couplings
            .iter()
            .filter(|(&(u, v), _)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|(&(u, v), &j)| (key(local[u], local[v]), j))
            .collect();
        let fields = vertices.iter().map(|&v| self.fields[v]).collect();
        IsingInstance { graph, couplings, fields, offset: 0.0 }
    }

    /// `(u, v, J)` with `u < v`.
    pub(crate) fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        self.couplings.iter().map(|(&(u, v), &j)| (u, v, j)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QaoaAngles {
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl QaoaAngles {
    pub fn new(beta1: f64, beta2: f64, gamma1: f64, gamma2: f64) -> Self {
        QaoaAngles { beta1, beta2, gamma1, gamma2 }
    }

    /// `(β₁, β₂, γ₁, γ₂) = (1.44433, 3.56786, 0.937498, 4.93861)`.
    pub fn reference() -> Self {
        QaoaAngles::new(1.44433, 3.56786, 0.937498, 4.93861)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.beta1, self.beta2, self.gamma1, self.gamma2].iter().all(|a| a.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("angles must be finite".into()))
        }
    }
}

/// Vertices within distance `r` of `sources`, sorted.
pub fn ball(graph: &Graph, sources: &[usize], r: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if dist[u] == r {
            continue;
        }
        for w in graph.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    (0..graph.n()).filter(|&v| dist[v] != usize::MAX).collect()
}

/// Truncation of an instance to the radius-`r` neighbourhood of a set of
/// vertices (one vertex or an edge).
#[derive(Clone, Debug)]
pub struct Lightcone {
    pub instance: IsingInstance,
    /// Global ids of the sub-instance's vertices, sorted.
    pub vertices: Vec<usize>,
    /// Local ids of the observable's support.
    pub support: Vec<usize>,
    /// `N_1` of the support, global ids.
    pub n1: Vec<usize>,
    /// `N_2` of each support vertex, global ids.
    pub n2_each: Vec<Vec<usize>>,
}

pub fn lightcone(inst: &IsingInstance, support: &[usize], radius: usize) -> Result<Lightcone> {
    if support.is_empty() || support.len() > 2 || support.iter().any(|&v| v >= inst.n()) {
        return Err(Error::InvalidArgument("support must be one or two vertices".into()));
    }
    if support.len() == 2 && !inst.graph().has_edge(support[0], support[1]) {
        return Err(Error::MissingEdge(support[0], support[1]));
    }
    let g = inst.graph();
    let vertices = ball(g, support, radius);
    let local: Vec<usize> = support.iter().map(|s| vertices.binary_search(s).unwrap()).collect();
    Ok(Lightcone {
        instance: inst.induced(&vertices),
        support: local,
        n1: ball(g, support, 1),
        n2_each: support.iter().map(|&s| ball(g, &[s], 2)).collect(),
        vertices,
    })
}

/// Reduced form of a local mean as a function of `β₂`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeanProfile {
    /// With `c = cos 2β₂`, `s = sin 2β₂`: one qubit `c·⟨Z⟩ + s·⟨Y⟩`;
    /// two qubits `c²⟨ZZ⟩ + cs⟨ZY+YZ⟩ + s²⟨YY⟩`, all in the state before the
    /// last mixer.
    Parts { k: usize, coeffs: [f64; 3] },
    /// `Re Σ coeff · ⟨a|U(β₂)|b⟩ · η(a, b)`.
    Eta(EtaProfile),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaTerm {
    pub a: usize,
    pub b: usize,
    pub coeff: f64,
    pub eta: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaProfile {
    pub k: usize,
    /// Diagonal phase of the support: `J_st` (two qubits) and fields.
    pub j_st: f64,
    pub h: Vec<f64>,
    pub gamma2: f64,
    pub terms: Vec<EtaTerm>,
}

impl MeanProfile {
    pub fn mean(&self, beta2: f64) -> f64 {
        let (c, s) = ((2.0 * beta2).cos(), (2.0 * beta2).sin());
        match self {
            MeanProfile::Parts { k: 1, coeffs } => c * coeffs[0] + s * coeffs[1],
            MeanProfile::Parts { coeffs, .. } => c * c * coeffs[0] + c * s * coeffs[1] + s * s * coeffs[2],
            MeanProfile::Eta(p) => {
                let u = support_unitary(p.k, p.j_st, &p.h, p.gamma2, beta2);
                let dim = 1 << p.k;
                p.terms.iter().map(|t| (u[t.a * dim + t.b] * t.eta).re * t.coeff).sum()
            }
        }
    }
}

/// `D·K·D†` on the support: `K = ⊗ e^{iβ₂X} Z e^{-iβ₂X}`, `D` the diagonal
/// `e^{iγ₂ C_S}`. Row-major, index bit `j` is support qubit `j`.
pub(crate) fn support_unitary(k: usize, j_st: f64, h: &[f64], gamma2: f64, beta2: f64) -> Vec<C64> {
    let (c, s) = ((2.0 * beta2).cos(), (2.0 * beta2).sin());
    let one = [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, s), C64::new(-c, 0.0)];
    let dim = 1usize << k;
    let spin = |x: usize, j: usize| if (x >> j) & 1 == 0 { 1.0 } else { -1.0 };
    let phase = |x: usize| {
        let mut e: f64 = (0..k).map(|j| h[j] * spin(x, j)).sum();
        if k == 2 {
            e += j_st * spin(x, 0) * spin(x, 1);
        }
        C64::from_polar(1.0, gamma2 * e)
    };
    let mut u = vec![C64::new(0.0, 0.0); dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            let mut m = C64::new(1.0, 0.0);
            for j in 0..k {
                m *= one[2 * ((a >> j) & 1) + ((b >> j) & 1)];
            }
            u[a * dim + b] = phase(a) * m * phase(b).conj();
        }
    }
    u
}

/// Symmetry-reduced `(a, b, coefficient)` list, or the full list when the
/// reduction does not apply.
pub(crate) fn mu_classes(k: usize, symmetric: bool) -> Vec<(usize, usize, f64)> {
    if k == 2 && symmetric {
        // v = x1 x2 x3 x4 with a = (x1, x2), b = (x3, x4); bit 0 is x1 / x3.
        let v = |x1: usize, x2: usize, x3: usize, x4: usize| (x1 | (x2 << 1), x3 | (x4 << 1));
        vec![
            (v(0, 0, 0, 0).0, v(0, 0, 0, 0).1, 2.0),
            (v(0, 0, 1, 0).0, v(0, 0, 1, 0).1, 4.0),
            (v(0, 0, 0, 1).0, v(0, 0, 0, 1).1, 4.0),
            (v(0, 0, 1, 1).0, v(0, 0, 1, 1).1, 2.0),
            (v(0, 1, 1, 0).0, v(0, 1, 1, 0).1, 2.0),
            (v(0, 1, 0, 1).0, v(0, 1, 0, 1).1, 2.0),
        ]
    } else {
        let dim = 1 << k;
        (0..dim).flat_map(|a| (0..dim).map(move |b| (a, b, 1.0))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Statevector,
    APrime,
    ADoublePrime,
    Forrelation,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Statevector => "statevector",
            Method::APrime => "aprime",
            Method::ADoublePrime => "adoubleprime",
            Method::Forrelation => "forrelation",
        }
    }
}

/// Runtime prediction for the exact methods.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    /// Seconds per unit of `n₂(s)2^{n₂(s)} + n₂(t)2^{n₂(t)}`.
    pub aprime_unit: f64,
    /// Seconds per unit of `n₁4^{n₁} + n₂3^{n₁}`.
    pub adouble_unit: f64,
    pub cutoff_seconds: f64,
    pub aprime_cap: usize,
    pub adouble_cap: usize,
}

impl Default for CostModel {
    /// Fixed constants so method selection is reproducible.
    fn default() -> Self {
        CostModel { aprime_unit: 4e-9, adouble_unit: 3e-9, cutoff_seconds: 0.1, aprime_cap: 26, adouble_cap: 13 }
    }
}

impl CostModel {
    /// Times one small run of each exact method on this machine.
    pub fn calibrated(cutoff_seconds: f64) -> Self {
        let g = crate::graph::generate_grid(3, 4);
        let inst = IsingInstance::random_pm1(g, &mut crate::rng::stream(0, "calibrate", 0));
        let angles = QaoaAngles::new(0.3, 0.2, 0.5, 0.7);
        let lc = lightcone(&inst, &[5, 6], 2).expect("interior edge");
        let mut model = CostModel { cutoff_seconds, ..CostModel::default() };
        let t = Instant::now();
        let _ = parts_aprime(&inst, &[5, 6], &angles, model.aprime_cap);
        let (sa, ta) = (model.aprime_size(&lc), t.elapsed().as_secs_f64());
        let t = Instant::now();
        let _ = profile_adoubleprime(&inst, &[5, 6], &angles, RhoEnumeration::Ternary, model.adouble_cap);
        let (sd, td) = (model.adouble_size(&lc), t.elapsed().as_secs_f64());
        model.aprime_unit = (ta / sa).max(1e-12);
        model.adouble_unit = (td / sd).max(1e-12);
        model
    }

    fn aprime_size(&self, lc: &Lightcone) -> f64 {
        lc.n2_each.iter().map(|s| s.len() as f64 * 2f64.powi(s.len() as i32)).sum()
    }

    fn adouble_size(&self, lc: &Lightcone) -> f64 {
        let n1 = lc.n1.len() as f64;
        n1 * 4f64.powf(n1) + lc.vertices.len() as f64 * 3f64.powf(n1)
    }

    pub fn predict_aprime(&self, lc: &Lightcone) -> Option<f64> {
        (lc.n2_each.iter().all(|s| s.len() <= self.aprime_cap)).then(|| self.aprime_unit * self.aprime_size(lc))
    }

    pub fn predict_adouble(&self, lc: &Lightcone) -> Option<f64> {
        (lc.n1.len() <= self.adouble_cap).then(|| self.adouble_unit * self.adouble_size(lc))
    }

    /// Cheapest exact method under the cutoff, else forrelation.
    pub fn choose(&self, lc: &Lightcone) -> Method {
        let a = self.predict_aprime(lc).filter(|&t| t <= self.cutoff_seconds);
        let d = self.predict_adouble(lc).filter(|&t| t <= self.cutoff_seconds);
        match (a, d) {
            (Some(a), Some(d)) => {
                if a <= d {
                    Method::APrime
                } else {
                    Method::ADoublePrime
                }
            }
            (Some(_), None) => Method::APrime,
            (None, Some(_)) => Method::ADoublePrime,
            (None, None) => Method::Forrelation,
        }
    }
}

/// Settings shared by the estimating entry points.
#[derive(Clone, Debug)]
pub struct MeanOptions {
    pub model: CostModel,
    pub sampler: SamplerKind,
    pub rule: SampleRule,
    pub rho: RhoEnumeration,
    /// Forces a method instead of the cost model's choice.
    pub method: Option<Method>,
    /// Weight forrelation samples by `|U_ab(β₂)|` at the requested `β₂`.
    pub beta2_hint: bool,
    /// Whole instances up to this size are simulated directly when
    /// profiling every term at once.
    pub full_statevector_cap: usize,
}

impl Default for MeanOptions {
    fn default() -> Self {
        MeanOptions {
            model: CostModel::default(),
            sampler: SamplerKind::Marginal,
            rule: SampleRule::Chebyshev,
            rho: RhoEnumeration::Ternary,
            method: None,
            beta2_hint: true,
            full_statevector_cap: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMeanReport {
    /// One vertex (field term) or an edge.
    pub support: Vec<usize>,
    pub value: f64,
    pub method: Method,
    /// Additive error target; zero for exact methods.
    pub epsilon: f64,
    /// Graph-forrelation instances estimated.
    pub forrelation_calls: usize,
}

/// Profile of `⟨Z_S⟩` for `S` one vertex or an edge.
pub fn mean_profile(
    inst: &IsingInstance,
    support: &[usize],
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    opts: &MeanOptions,
) -> Result<(MeanProfile, Method, usize)> {
    let method = match opts.method {
        Some(m) => m,
        None => opts.model.choose(&lightcone(inst, support, 2)?),
    };
    Ok(match method {
        Method::Statevector => (parts_statevector(inst, support, angles, opts.model.aprime_cap)?, method, 0),
        Method::APrime => (parts_aprime(inst, support, angles, opts.model.aprime_cap)?, method, 0),
        Method::ADoublePrime => {
            (profile_adoubleprime(inst, support, angles, opts.rho, opts.model.adouble_cap)?, method, 0)
        }
        Method::Forrelation => {
            let (p, calls) = profile_forrelation(inst, support, angles, epsilon, seed, opts.sampler, opts.rule, opts.beta2_hint.then_some(angles.beta2))?;
            (p, method, calls)
        }
    })
}

/// `⟨ψ|Z_sZ_t|ψ⟩` with the method picked by the cost model.
pub fn zz_mean_auto(
    inst: &IsingInstance,
    edge: (usize, usize),
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    opts: &MeanOptions,
) -> Result<EdgeMeanReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let support = [edge.0, edge.1];
    let (profile, method, calls) = mean_profile(inst, &support, angles, epsilon, seed, opts)?;
    Ok(EdgeMeanReport {
        support: support.to_vec(),
        value: profile.mean(angles.beta2),
        method,
        epsilon: if method == Method::Forrelation { epsilon } else { 0.0 },
        forrelation_calls: calls,
    })
}

/// How the energy's error target is shared among terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ErrorBudget {
    /// Each term to `ε·|w|/Σ|w|`, so the total is within `ε`.
    #[default]
    Total,
    /// Each term to `ε`.
    PerTerm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub value: f64,
    pub terms: Vec<EdgeMeanReport>,
}

/// Weighted terms `(support, weight)`: couplings then nonzero fields.
pub(crate) fn energy_terms(inst: &IsingInstance) -> Vec<(Vec<usize>, f64)> {
    let mut out: Vec<(Vec<usize>, f64)> = inst.couplings().iter().map(|(&(u, v), &j)| (vec![u, v], j)).collect();
    out.extend(inst.fields().iter().enumerate().filter(|(_, &h)| h != 0.0).map(|(p, &h)| (vec![p], h)));
    out
}

/// `⟨ψ|C|ψ⟩ + offset`. Term `i` uses the stream `(seed, "energy", i)`.
pub fn energy(
    inst: &IsingInstance,
    angles: &QaoaAngles,
    epsilon: f64,
    seed: u64,
    budget: ErrorBudget,
    opts: &MeanOptions,
) -> Result<EnergyReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    angles.validate()?;
    let terms = energy_terms(inst);
    let total_w: f64 = terms.iter().map(|(_, w)| w.abs()).sum();
    let mut value = inst.offset();
    let mut reports = Vec::with_capacity(terms.len());
    for (i, (support, w)) in terms.iter().enumerate() {
        let eps = match budget {
            ErrorBudget::Total => epsilon * w.abs() / total_w,
            ErrorBudget::PerTerm => epsilon,
        };
        let term_seed = crate::rng::mix(seed, &[0x656e_6572_6779, i as u64]);
        let (profile, method, calls) = mean_profile(inst, support, angles, eps, term_seed, opts)?;
        let m = profile.mean(angles.beta2);
        value += w * m;
        reports.push(EdgeMeanReport {
            support: support.clone(),
            value: m,
            method,
            epsilon: if method == Method::Forrelation { eps } else { 0.0 },
            forrelation_calls: calls,
        });
    }
    Ok(EnergyReport { value, terms: reports })
}

#[cfg(test)]
mod tests;
