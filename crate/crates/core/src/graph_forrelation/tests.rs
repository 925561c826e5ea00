use rand::Rng;

use super::*;
use crate::graph::{generate_grid, min_fill_td, VertexPartition};
use crate::linalg::{c, hadamard2, identity2, random_unitary2, scale2};
use crate::rng::stream;

fn bits(x: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((x >> i) & 1) as u8).collect()
}

/// `2^{-n} Σ_{x,y} g(x) Π_j ⟨x_j|O_j|y_j⟩ f(y)`.
fn matrix_phi(f: &TwoLocalFunction, g: &TwoLocalFunction, ops: &[Mat2]) -> C64 {
    let n = f.n();
    let mut total = C64::new(0.0, 0.0);
    for x in 0..1usize << n {
        for y in 0..1usize << n {
            let mut m = C64::new(1.0, 0.0);
            for (j, o) in ops.iter().enumerate() {
                m *= o[2 * ((x >> j) & 1) + ((y >> j) & 1)];
            }
            total += g.eval_bits(x as u64) * m * f.eval_bits(y as u64);
        }
    }
    total / (1u64 << n) as f64
}

/// `⟨x|O_S U_F H|0⟩` summing over every `y` that agrees with `x` off `S`.
fn dense_side(func: &TwoLocalFunction, ops: &[Mat2], in_side: &[bool], x: &[u8]) -> C64 {
    let n = func.n();
    let mut total = C64::new(0.0, 0.0);
    for y in 0..1usize << n {
        let y = bits(y, n);
        let mut m = C64::new(1.0, 0.0);
        for j in 0..n {
            if in_side[j] {
                m *= ops[j][2 * x[j] as usize + y[j] as usize];
            } else if x[j] != y[j] {
                m = C64::new(0.0, 0.0);
            }
        }
        if m.norm() > 0.0 {
            total += m * func.eval(&y);
        }
    }
    total * (0.5f64).powf(n as f64 / 2.0)
}

fn grid_instance(rows: usize, cols: usize, seed: u64, unitary: bool) -> GraphForrelationInstance {
    let mut rng = stream(seed, "gf-test", 0);
    let graph = generate_grid(rows, cols);
    let f = TwoLocalFunction::random_phases(graph.clone(), 2, &mut rng);
    let g = TwoLocalFunction::random_phases(graph, 2, &mut rng);
    let ops = (0..f.n())
        .map(|_| {
            let u = random_unitary2(&mut rng);
            if unitary {
                u
            } else {
                scale2(&u, c(rng.gen_range(0.3..1.0), 0.0))
            }
        })
        .collect();
    GraphForrelationInstance::with_decomposition(f, g, ops).unwrap()
}

fn assert_close(a: C64, b: C64, tol: f64) {
    assert!((a - b).norm() <= tol, "{a} vs {b}");
}

#[test]
fn trivial_values() {
    for n in 1..6 {
        let graph = generate_grid(1, n);
        let one = TwoLocalFunction::new(graph, 2);
        let id = GraphForrelationInstance::with_decomposition(one.clone(), one.clone(), vec![identity2(); n]).unwrap();
        assert_close(phi_graph_exact(&id).unwrap(), c(1.0, 0.0), 1e-12);
        let had = GraphForrelationInstance::with_decomposition(one.clone(), one, vec![hadamard2(); n]).unwrap();
        assert_close(phi_graph_exact(&had).unwrap(), c((0.5f64).powf(n as f64 / 2.0), 0.0), 1e-12);
    }
}

#[test]
fn exact_matches_matrix_chain() {
    for seed in 0..3 {
        let inst = grid_instance(2, 4, seed, seed != 0);
        let want = matrix_phi(inst.f(), inst.g(), inst.ops());
        assert_close(phi_graph_exact(&inst).unwrap(), want, 1e-10);
    }
}

#[test]
fn exact_rejects_large_n() {
    let graph = generate_grid(3, 7);
    let one = TwoLocalFunction::new(graph, 2);
    let inst = GraphForrelationInstance::with_decomposition(one.clone(), one, vec![identity2(); 21]).unwrap();
    assert!(matches!(phi_graph_exact(&inst), Err(Error::CapExceeded { .. })));
}

#[test]
fn amplitudes_match_dense() {
    let inst = grid_instance(2, 5, 11, false);
    let n = inst.n();
    let beta_ops: Vec<Mat2> = inst.ops().iter().map(adjoint2).collect();
    let p = &inst.halves().partition;
    let mask_a = p.side_mask(n);
    let mask_b: Vec<bool> = mask_a.iter().map(|m| !m).collect();
    let gc = inst.g().conj();
    for x in 0..1usize << n {
        let x = bits(x, n);
        let a = inst.amplitude(Side::Alpha, &x).unwrap();
        assert_close(a, dense_side(inst.f(), inst.ops(), &mask_a, &x), 1e-9);
        let b = inst.amplitude(Side::Beta, &x).unwrap();
        assert_close(b, dense_side(&gc, &beta_ops, &mask_b, &x), 1e-9);
    }
}

#[test]
fn overlap_of_sides_is_phi() {
    for (rows, cols, seed) in [(2, 4, 1), (3, 4, 2), (2, 6, 3)] {
        let inst = grid_instance(rows, cols, seed, seed % 2 == 0);
        let n = inst.n();
        let mut total = C64::new(0.0, 0.0);
        for x in 0..1usize << n {
            let x = bits(x, n);
            total += inst.amplitude(Side::Beta, &x).unwrap().conj() * inst.amplitude(Side::Alpha, &x).unwrap();
        }
        assert_close(total, phi_graph_exact(&inst).unwrap(), 1e-9);
    }
}

#[test]
fn one_local_path_agrees_on_bipartite_split() {
    let graph = generate_grid(3, 3);
    let mut rng = stream(5, "bip", 0);
    let f = TwoLocalFunction::random_phases(graph.clone(), 2, &mut rng);
    let g = TwoLocalFunction::random_phases(graph.clone(), 2, &mut rng);
    let ops: Vec<Mat2> = (0..9).map(|_| random_unitary2(&mut rng)).collect();
    let (a, b): (Vec<usize>, Vec<usize>) = (0..9).partition(|v| (v / 3 + v % 3) % 2 == 0);
    let td_a = TreeDecomposition::from_parents((0..a.len()).map(|i| vec![i]).collect(), (0..a.len()).map(|i| i.checked_sub(1)).collect()).unwrap();
    let td_b = TreeDecomposition::from_parents((0..b.len()).map(|i| vec![i]).collect(), (0..b.len()).map(|i| i.checked_sub(1)).collect()).unwrap();
    let halves = HalfDecomposition { partition: VertexPartition::new(a, b), td_a, td_b, used_peel: false };
    let inst = GraphForrelationInstance::new(f, g, ops, halves).unwrap();
    for x in 0..1usize << 9 {
        let x = bits(x, 9);
        for side in [Side::Alpha, Side::Beta] {
            assert_close(inst.amplitude(side, &x).unwrap(), inst.amplitude_one_local(side, &x).unwrap(), 1e-12);
        }
    }
}

#[test]
fn constructor_validation() {
    let graph = generate_grid(2, 2);
    let one = TwoLocalFunction::new(graph.clone(), 2);
    let big = scale2(&identity2(), c(1.5, 0.0));
    assert!(GraphForrelationInstance::with_decomposition(one.clone(), one.clone(), vec![big; 4]).is_err());
    assert!(GraphForrelationInstance::with_decomposition(one.clone(), one.clone(), vec![identity2(); 3]).is_err());
    let other = TwoLocalFunction::new(generate_grid(1, 4), 2);
    assert!(GraphForrelationInstance::with_decomposition(one.clone(), other, vec![identity2(); 4]).is_err());
    let td = min_fill_td(&graph);
    let halves = HalfDecomposition {
        partition: VertexPartition::new(vec![0, 1], vec![1, 2, 3]),
        td_a: td.clone(),
        td_b: td,
        used_peel: false,
    };
    assert!(GraphForrelationInstance::new(one.clone(), one, vec![identity2(); 4], halves).is_err());
}

#[test]
fn phase_on_unitary_operator_rotates_phi() {
    let inst = grid_instance(2, 3, 9, true);
    let phi = phi_graph_exact(&inst).unwrap();
    let theta = 0.83;
    let mut ops = inst.ops().to_vec();
    ops[2] = scale2(&ops[2], C64::from_polar(1.0, theta));
    let rotated = phi_graph_exact(&inst.with_ops(ops).unwrap()).unwrap();
    assert_close(rotated, phi * C64::from_polar(1.0, theta), 1e-12);
}

fn alpha_probs(inst: &GraphForrelationInstance) -> Vec<f64> {
    let n = inst.n();
    (0..1usize << n).map(|x| inst.amplitude(Side::Alpha, &bits(x, n)).unwrap().norm_sqr()).collect()
}

#[test]
fn prefix_marginals_match_dense() {
    let inst = grid_instance(2, 4, 21, true);
    let n = inst.n();
    let probs = alpha_probs(&inst);
    let sampler = MarginalSampler::new(&inst, Side::Alpha).unwrap();
    let order = sampler.order().to_vec();
    let free = n - inst.halves().partition.a.len();
    let mut rng = stream(3, "prefix", 0);
    for _ in 0..20 {
        let full: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        for l in 0..=n {
            let want: f64 = probs
                .iter()
                .enumerate()
                .filter(|(x, _)| (0..l).all(|i| ((x >> order[i]) & 1) as u8 == full[i]))
                .map(|(_, p)| p)
                .sum();
            let got = sampler.marginal(&full[..l]).unwrap();
            assert!((got - want).abs() < 1e-10, "l={l}: {got} vs {want}");
            if l <= free {
                assert_eq!(got, (0.5f64).powi(l as i32));
            }
        }
    }
}

fn tv(counts: &[usize], probs: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    0.5 * counts.iter().zip(probs).map(|(&c, &p)| (c as f64 / total as f64 - p).abs()).sum::<f64>()
}

#[test]
fn samplers_follow_alpha_distribution() {
    let inst = grid_instance(2, 3, 31, true);
    let n = inst.n();
    let probs = alpha_probs(&inst);
    let mut marginal = MarginalSampler::new(&inst, Side::Alpha).unwrap();
    let mut linear = LinearSampler::new(&inst, Side::Alpha).unwrap();
    let index = |x: &[u8]| x.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum::<usize>();
    let mut rng = stream(4, "draws", 0);
    let draws = 40_000;
    let mut cm = vec![0usize; 1 << n];
    let mut cl = vec![0usize; 1 << n];
    for _ in 0..draws {
        cm[index(&marginal.sample(&mut rng).unwrap())] += 1;
        cl[index(&linear.sample(&mut rng).unwrap())] += 1;
    }
    assert!(tv(&cm, &probs) < 0.03, "marginal tv {}", tv(&cm, &probs));
    assert!(tv(&cl, &probs) < 0.03, "linear tv {}", tv(&cl, &probs));
}

#[test]
fn samplers_reject_non_unitary() {
    let inst = grid_instance(2, 2, 1, false);
    assert!(MarginalSampler::new(&inst, Side::Alpha).is_err());
    assert!(LinearSampler::new(&inst, Side::Alpha).is_err());
}

#[test]
fn split_reconstructs_operator() {
    let mut rng = stream(8, "split", 0);
    for _ in 0..50 {
        let o = scale2(&random_unitary2(&mut rng), c(rng.gen_range(0.0..1.0), 0.0));
        let mut o = o;
        o[1] += c(0.2, -0.1);
        let s = split_operator(&o);
        assert!(is_unitary(&s.m0, 1e-12) && is_unitary(&s.m1, 1e-12));
        let mut rebuilt = [C64::new(0.0, 0.0); 4];
        for k in 0..4 {
            rebuilt[k] = (s.m0[k] * s.q0 + s.m1[k] * (1.0 - s.q0)) * s.norm;
        }
        assert!(crate::linalg::max_diff2(&rebuilt, &o) < 1e-12);
    }
}

#[test]
fn estimator_close_to_exact() {
    for (seed, unitary) in [(41, true), (42, false)] {
        let inst = grid_instance(2, 3, seed, unitary);
        let exact = phi_graph_exact(&inst).unwrap();
        for kind in [SamplerKind::Marginal, SamplerKind::Linear] {
            let est = phi_graph_estimate(&inst, 0.1, seed, &EstimateOptions { sampler: kind, samples: None }).unwrap();
            assert_eq!(est.samples, 10_000);
            assert!((est.value - exact).norm() < 0.1, "{kind:?}: {} vs {exact}", est.value);
        }
    }
}

#[test]
fn half_identity_scales_by_half() {
    let inst = grid_instance(2, 3, 51, true);
    let mut ops = inst.ops().to_vec();
    ops[1] = scale2(&identity2(), c(0.5, 0.0));
    let inst = inst.with_ops(ops).unwrap();
    let est = GraphPhiEstimator::new(inst.clone(), SamplerKind::Marginal);
    assert!((est.omega() - 0.5).abs() < 1e-12);
    let e = phi_graph_estimate(&inst, 0.05, 3, &EstimateOptions::default()).unwrap();
    let exact = phi_graph_exact(&inst).unwrap();
    assert!((e.value - exact).norm() < 0.05, "{} vs {exact} var {}", e.value, e.sample_variance);
}

#[test]
fn zero_operator_annihilates() {
    let inst = grid_instance(2, 2, 1, true);
    let mut ops = inst.ops().to_vec();
    ops[0] = [C64::new(0.0, 0.0); 4];
    let e = phi_graph_estimate(&inst.with_ops(ops).unwrap(), 0.1, 0, &EstimateOptions::default()).unwrap();
    assert!(e.annihilated);
    assert_eq!(e.value, C64::new(0.0, 0.0));
}

#[test]
fn estimate_is_deterministic_and_rejects_bad_epsilon() {
    let inst = grid_instance(2, 2, 61, true);
    let opts = EstimateOptions { sampler: SamplerKind::Marginal, samples: Some(3000) };
    let a = phi_graph_estimate(&inst, 0.2, 9, &opts).unwrap();
    let b = phi_graph_estimate(&inst, 0.2, 9, &opts).unwrap();
    assert_eq!(a, b);
    assert!(phi_graph_estimate(&inst, 0.0, 9, &EstimateOptions::default()).is_err());
    assert!(phi_graph_estimate(&inst, -1.0, 9, &EstimateOptions::default()).is_err());
}

#[test]
fn ratio_variance_at_most_one() {
    let inst = grid_instance(3, 3, 71, true);
    let e = phi_graph_estimate(&inst, 0.1, 2, &EstimateOptions::default()).unwrap();
    let sigma = (2.0 / e.samples as f64).sqrt();
    assert!(e.sample_variance <= 1.0 + 3.0 * sigma, "{}", e.sample_variance);
}

#[test]
fn one_qubit_identity() {
    let s = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)];
    let s_dag = adjoint2(&s);
    let h = hadamard2();
    let lhs = scale2(&mul2(&mul2(&s, &h), &s), C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4));
    let rhs = mul2(&mul2(&h, &s_dag), &h);
    assert!(crate::linalg::max_diff2(&lhs, &rhs) < 1e-15);
}

/// `⟨0|H U_f H U_g H|0⟩` by the matrix chain.
fn three_layer(f: &TwoLocalFunction, g: &TwoLocalFunction) -> C64 {
    matrix_phi(g, f, &vec![hadamard2(); f.n()])
}

/// `⟨0|H U_h H|0⟩ = 2^{-n} Σ h`.
fn iqp_amplitude(h: &TwoLocalFunction) -> C64 {
    h.sum_bruteforce().unwrap() / (1u64 << h.n()) as f64
}

#[test]
fn iqp_reduction() {
    let one = TwoLocalFunction::new(generate_grid(1, 2), 2);
    let (f, g) = iqp_to_forrelation(&one);
    assert_close(three_layer(&f, &g), c(1.0, 0.0), 1e-12);
    let mut rng = stream(77, "iqp", 0);
    for _ in 0..5 {
        let h = TwoLocalFunction::random_phases(generate_grid(2, 3), 2, &mut rng);
        let (f, g) = iqp_to_forrelation(&h);
        assert_close(three_layer(&f, &g), iqp_amplitude(&h), 1e-10);
    }
}

