//! Monte-Carlo estimator of `Φ`: each operator is written as a mixture of
//! two unitaries, a unitary configuration `z` is drawn, then `x ~ |⟨x|α_z⟩|²`,
//! and `ω · ⟨β_z|x⟩/⟨α_z|x⟩` is averaged.

use std::collections::HashMap;

use rand::Rng;

use super::{GraphForrelationInstance, LinearSampler, MarginalSampler, Side};
use crate::error::{Error, Result};
use crate::linalg::{mul2, pauli_z, svd2, Mat2};
use crate::rng::stream_multi;
use crate::C64;

const CHUNK: usize = 1024;
const MAX_RESAMPLES: usize = 100;
const AMP_FLOOR: f64 = 1e-12;

/// `O = norm · (q0 · m0 + (1 - q0) · m1)` with unitary `m0, m1`.
#[derive(Clone, Copy, Debug)]
pub struct OperatorSplit {
    pub norm: f64,
    pub q0: f64,
    pub m0: Mat2,
    pub m1: Mat2,
}

pub fn split_operator(o: &Mat2) -> OperatorSplit {
    let s = svd2(o);
    let m0 = mul2(&s.u, &s.v);
    let m1 = mul2(&mul2(&s.u, &pauli_z()), &s.v);
    OperatorSplit { norm: s.norm, q0: 0.5 * (1.0 + s.s), m0, m1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SamplerKind {
    #[default]
    Marginal,
    Linear,
}

#[derive(Clone, Debug, Default)]
pub struct EstimateOptions {
    pub sampler: SamplerKind,
    /// Overrides the sample count `⌈100/ε²⌉`.
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiEstimate {
    pub value: C64,
    pub epsilon: f64,
    pub samples: usize,
    /// Some operator is zero, so `Φ = 0` exactly.
    pub annihilated: bool,
    /// Sample variance of the individual terms `ω·R`.
    pub sample_variance: f64,
    /// Draws rejected because `|⟨x|α⟩|` fell below the floor.
    pub resamples: usize,
}

enum AnySampler {
    Marginal(MarginalSampler),
    Linear(LinearSampler),
}

struct SubInstance {
    inst: GraphForrelationInstance,
    sampler: AnySampler,
    ratios: HashMap<Vec<u8>, Option<C64>>,
}

impl SubInstance {
    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<u8>> {
        match &mut self.sampler {
            AnySampler::Marginal(s) => s.sample(rng),
            AnySampler::Linear(s) => s.sample(rng),
        }
    }

    fn ratio(&mut self, x: Vec<u8>) -> Result<Option<C64>> {
        if let Some(r) = self.ratios.get(&x) {
            return Ok(*r);
        }
        let a = self.inst.amplitude(Side::Alpha, &x)?;
        let r = if a.norm() < AMP_FLOOR {
            None
        } else {
            Some((self.inst.amplitude(Side::Beta, &x)? / a).conj())
        };
        self.ratios.insert(x, r);
        Ok(r)
    }
}

/// Estimator with caches that persist across calls.
pub struct GraphPhiEstimator {
    inst: GraphForrelationInstance,
    splits: Vec<OperatorSplit>,
    omega: f64,
    random_sites: Vec<usize>,
    kind: SamplerKind,
    subs: HashMap<Vec<u8>, SubInstance>,
}

impl GraphPhiEstimator {
    pub fn new(inst: GraphForrelationInstance, kind: SamplerKind) -> Self {
        let splits: Vec<OperatorSplit> = inst.ops().iter().map(split_operator).collect();
        let omega = splits.iter().map(|s| s.norm).product();
        let random_sites = (0..splits.len()).filter(|&j| splits[j].q0 < 1.0 - 1e-12).collect();
        GraphPhiEstimator { inst, splits, omega, random_sites, kind, subs: HashMap::new() }
    }

    pub fn instance(&self) -> &GraphForrelationInstance {
        &self.inst
    }

    /// `ω = Π ‖O_j‖`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn sub(&mut self, z: Vec<u8>) -> Result<&mut SubInstance> {
        if !self.subs.contains_key(&z) {
            let mut ops: Vec<Mat2> = self.splits.iter().map(|s| s.m0).collect();
            for (k, &j) in self.random_sites.iter().enumerate() {
                if z[k] == 1 {
                    ops[j] = self.splits[j].m1;
                }
            }
            let inst = self.inst.with_ops(ops)?;
            let sampler = match self.kind {
                SamplerKind::Marginal => AnySampler::Marginal(MarginalSampler::new(&inst, Side::Alpha)?),
                SamplerKind::Linear => AnySampler::Linear(LinearSampler::new(&inst, Side::Alpha)?),
            };
            self.subs.insert(z.clone(), SubInstance { inst, sampler, ratios: HashMap::new() });
        }
        Ok(self.subs.get_mut(&z).expect("inserted above"))
    }

    /// `⌈100/ε²⌉` samples unless overridden. Chunk `c` of 1024 samples uses
    /// the stream `(seed, "graph-phi", c)`.
    pub fn estimate(&mut self, epsilon: f64, seed: u64, samples: Option<usize>) -> Result<PhiEstimate> {
        if !(epsilon > 0.0) && samples.is_none() {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        let count = samples.unwrap_or_else(|| (100.0 / (epsilon * epsilon)).ceil() as usize);
        if self.omega == 0.0 {
            return Ok(PhiEstimate {
                value: C64::new(0.0, 0.0),
                epsilon,
                samples: 0,
                annihilated: true,
                sample_variance: 0.0,
                resamples: 0,
            });
        }
        let q1: Vec<f64> = self.random_sites.iter().map(|&j| 1.0 - self.splits[j].q0).collect();
        let omega = self.omega;
        let mut sum = C64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        let mut resamples = 0;
        let mut done = 0;
        let mut chunk = 0u64;
        while done < count {
            let mut rng = stream_multi(seed, "graph-phi", &[chunk]);
            let take = CHUNK.min(count - done);
            for _ in 0..take {
                let z: Vec<u8> = q1.iter().map(|&p| u8::from(rng.gen::<f64>() < p)).collect();
                let sub = self.sub(z)?;
                let mut misses = 0;
                let r = loop {
                    let x = sub.draw(&mut rng)?;
                    match sub.ratio(x)? {
                        Some(r) => break r,
                        None => {
                            misses += 1;
                            resamples += 1;
                            if misses > MAX_RESAMPLES {
                                return Err(Error::Numerical("sampled amplitudes keep vanishing".into()));
                            }
                        }
                    }
                };
                let v = r * omega;
                sum += v;
                sum_sq += v.norm_sqr();
            }
            done += take;
            chunk += 1;
        }
        let nf = count as f64;
        let mean = sum / nf;
        let sample_variance = if count > 1 { ((sum_sq - nf * mean.norm_sqr()) / (nf - 1.0)).max(0.0) } else { 0.0 };
        Ok(PhiEstimate { value: mean, epsilon, samples: count, annihilated: false, sample_variance, resamples })
    }
}

/// One-shot estimate of `Φ` to additive error `ε` (w.p. ≥ 0.99 per part).
pub fn phi_graph_estimate(inst: &GraphForrelationInstance, epsilon: f64, seed: u64, options: &EstimateOptions) -> Result<PhiEstimate> {
    GraphPhiEstimator::new(inst.clone(), options.sampler).estimate(epsilon, seed, options.samples)
}
