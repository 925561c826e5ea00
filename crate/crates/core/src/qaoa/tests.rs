use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{generate_grid, generate_triangular};

/// Full state `e^{-iβ₂B}e^{-iγ₂C}e^{-iβ₁B}e^{-iγ₁C}|+ⁿ⟩` built gate by gate.
fn full_state(inst: &IsingInstance, a: &QaoaAngles) -> Vec<C64> {
    let n = inst.n();
    let dim = 1usize << n;
    let cost: Vec<f64> = (0..dim)
        .map(|x| {
            let z: Vec<i8> = (0..n).map(|q| if (x >> q) & 1 == 0 { 1 } else { -1 }).collect();
            inst.cost(&z) - inst.offset()
        })
        .collect();
    let mut psi = vec![C64::new((dim as f64).powf(-0.5), 0.0); dim];
    let phase = |psi: &mut Vec<C64>, g: f64| {
        for (x, amp) in psi.iter_mut().enumerate() {
            *amp *= C64::from_polar(1.0, -g * cost[x]);
        }
    };
    let mixer = |psi: &mut Vec<C64>, b: f64| {
        for q in 0..n {
            let mut next = psi.clone();
            for x in 0..dim {
                next[x] = psi[x] * b.cos() - C64::i() * b.sin() * psi[x ^ (1 << q)];
            }
            *psi = next;
        }
    };
    phase(&mut psi, a.gamma1);
    mixer(&mut psi, a.beta1);
    phase(&mut psi, a.gamma2);
    mixer(&mut psi, a.beta2);
    psi
}

fn dense_mean(inst: &IsingInstance, a: &QaoaAngles, support: &[usize]) -> f64 {
    full_state(inst, a)
        .iter()
        .enumerate()
        .map(|(x, amp)| amp.norm_sqr() * support.iter().map(|&q| if (x >> q) & 1 == 0 { 1.0 } else { -1.0 }).product::<f64>())
        .sum()
}

fn random_angles<R: Rng>(rng: &mut R) -> QaoaAngles {
    QaoaAngles::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI))
}

fn random_instance<R: Rng>(rng: &mut R, tri: bool) -> IsingInstance {
    let g = if tri {
        generate_triangular(3)
    } else {
        let (r, c) = [(2, 3), (3, 3), (2, 4), (3, 4)][rng.gen_range(0..4)];
        generate_grid(r, c)
    };
    let c: Vec<(usize, usize, f64)> = g.edges().into_iter().map(|(u, v)| (u, v, rng.gen_range(-1.5..1.5))).collect();
    IsingInstance::new(g, &c).unwrap()
}

fn with_random_fields<R: Rng>(inst: IsingInstance, rng: &mut R) -> IsingInstance {
    let h = (0..inst.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    inst.with_fields(h).unwrap()
}

#[test]
fn exact_methods_agree_with_dense_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..30 {
        let inst = random_instance(&mut rng, trial % 3 == 0);
        let a = random_angles(&mut rng);
        let edges = inst.edge_list();
        let (s, t, _) = edges[rng.gen_range(0..edges.len())];
        let want = dense_mean(&inst, &a, &[s, t]);
        let sv = zz_mean_statevector(&inst, (s, t), &a, 26).unwrap();
        let ap = zz_mean_aprime(&inst, (s, t), &a, 26).unwrap();
        let ad = zz_mean_adoubleprime(&inst, (s, t), &a, RhoEnumeration::Ternary, 13).unwrap();
        let ab = zz_mean_adoubleprime(&inst, (s, t), &a, RhoEnumeration::Binary, 13).unwrap();
        for (name, v) in [("statevector", sv), ("A'", ap), ("A''", ad), ("A'' binary", ab)] {
            assert!((v - want).abs() < 1e-9, "trial {trial} {name}: {v} vs {want}");
        }
    }
}

#[test]
fn fields_agree_with_dense_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..12 {
        let inst = with_random_fields(random_instance(&mut rng, trial % 2 == 0), &mut rng);
        let a = random_angles(&mut rng);
        for (support, _) in energy_terms(&inst).into_iter().step_by(3) {
            let want = dense_mean(&inst, &a, &support);
            for m in [Method::Statevector, Method::APrime, Method::ADoublePrime] {
                let opts = MeanOptions { method: Some(m), ..Default::default() };
                let (p, _, _) = mean_profile(&inst, &support, &a, 0.1, 0, &opts).unwrap();
                assert!((p.mean(a.beta2) - want).abs() < 1e-9, "trial {trial} {m:?} {support:?}");
            }
        }
    }
}

#[test]
fn mu_symmetries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let inst = random_instance(&mut rng, false);
        let a = random_angles(&mut rng);
        let (s, t, _) = inst.edge_list()[0];
        for v in 0..16u8 {
            let bits = |v: u8| [v & 1, (v >> 1) & 1, (v >> 2) & 1, (v >> 3) & 1];
            let x = bits(v);
            let mu = mu_exact(&inst, (s, t), &a, x).unwrap();
            let flipped = mu_exact(&inst, (s, t), &a, bits(v ^ 15)).unwrap();
            let swapped = mu_exact(&inst, (s, t), &a, [x[2], x[3], x[0], x[1]]).unwrap();
            assert!((mu - flipped).norm() < 1e-9);
            assert!((mu - swapped.conj()).norm() < 1e-9);
        }
    }
}

#[test]
fn mu_sum_is_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inst = random_instance(&mut rng, true);
    let a = random_angles(&mut rng);
    let (s, t, _) = inst.edge_list()[2];
    let total: f64 = (0..16u8)
        .map(|v| mu_exact(&inst, (s, t), &a, [v & 1, (v >> 1) & 1, (v >> 2) & 1, (v >> 3) & 1]).unwrap().re)
        .sum();
    assert!((total - dense_mean(&inst, &a, &[s, t])).abs() < 1e-9);
}

#[test]
fn zero_angle_means_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = random_instance(&mut rng, false);
    let (s, t, _) = inst.edge_list()[0];
    let mut a = random_angles(&mut rng);
    a.gamma1 = 0.0;
    a.gamma2 = 0.0;
    let mut b = random_angles(&mut rng);
    b.beta1 = 0.0;
    b.beta2 = 0.0;
    for ang in [a, b] {
        assert!(zz_mean_statevector(&inst, (s, t), &ang, 26).unwrap().abs() < 1e-12);
        assert!(zz_mean_adoubleprime(&inst, (s, t), &ang, RhoEnumeration::Ternary, 13).unwrap().abs() < 1e-12);
        let r = zz_mean_forrelation(&inst, (s, t), &ang, 0.05, 1, SamplerKind::Marginal, SampleRule::Chebyshev).unwrap();
        assert!(r.value.abs() < 0.05);
    }
}

#[test]
fn isolated_edge_lightcone() {
    let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
    let inst = IsingInstance::new(g, &[(0, 1, 1.0), (2, 3, -1.0)]).unwrap();
    let lc = lightcone(&inst, &[0, 1], 2).unwrap();
    assert_eq!(lc.vertices, vec![0, 1]);
    assert_eq!(lc.instance.n(), 2);
}

#[test]
fn grid_interior_lightcone_sizes() {
    let g = generate_grid(5, 5);
    let c: Vec<_> = g.edges().into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    let inst = IsingInstance::new(g, &c).unwrap();
    // vertex r*5 + c; distance to the edge {(2,2),(2,3)} in the Manhattan metric
    let within = |r: usize| {
        (0..25usize)
            .filter(|&v| {
                let (y, x) = ((v / 5) as i64, (v % 5) as i64);
                ((y - 2).abs() + (x - 2).abs()).min((y - 2).abs() + (x - 3).abs()) <= r as i64
            })
            .count()
    };
    let lc = lightcone(&inst, &[12, 13], 2).unwrap();
    assert_eq!(lc.n1.len(), within(1));
    assert_eq!(lc.n1.len(), 8);
    assert_eq!(lc.vertices.len(), within(2));
    assert_eq!(lc.n2_each[0].len(), 13);
}

#[test]
fn regular_tree_n1_bound() {
    // depth-3 ternary tree, every internal vertex of degree 3 or 4
    let mut edges = Vec::new();
    let mut next = 1;
    let mut frontier = vec![0];
    for _ in 0..3 {
        let mut nf = Vec::new();
        for &u in &frontier {
            for _ in 0..3 {
                edges.push((u, next, 1.0));
                nf.push(next);
                next += 1;
            }
        }
        frontier = nf;
    }
    let g = Graph::from_edges(next, &edges.iter().map(|&(u, v, _)| (u, v)).collect::<Vec<_>>()).unwrap();
    let d = (0..next).map(|v| g.degree(v)).max().unwrap();
    let inst = IsingInstance::new(g, &edges).unwrap();
    for &(u, v, _) in &edges {
        assert!(lightcone(&inst, &[u, v], 2).unwrap().n1.len() <= 2 * d);
    }
}

#[test]
fn zero_couplings_energy_is_offset() {
    let inst = IsingInstance::new(generate_grid(2, 2), &[]).unwrap().with_offset(2.5);
    let r = energy(&inst, &QaoaAngles::reference(), 0.1, 0, ErrorBudget::Total, &MeanOptions::default()).unwrap();
    assert_eq!(r.value, 2.5);
}

#[test]
fn level1_closed_form_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..10 {
        let mut inst = random_instance(&mut rng, trial % 2 == 1);
        if trial >= 5 {
            inst = with_random_fields(inst, &mut rng);
        }
        let (beta, gamma) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let a = QaoaAngles::new(beta, 0.0, gamma, 0.0);
        for (u, v, _) in inst.edge_list() {
            assert!((level1_zz(&inst, u, v, beta, gamma) - dense_mean(&inst, &a, &[u, v])).abs() < 1e-10, "trial {trial}");
        }
        for p in 0..inst.n() {
            assert!((level1_z(&inst, p, beta, gamma) - dense_mean(&inst, &a, &[p])).abs() < 1e-10);
        }
        let e = energy(&inst, &a, 0.1, 0, ErrorBudget::Total, &MeanOptions { method: Some(Method::Statevector), ..Default::default() });
        assert!((e.unwrap().value - level1_energy(&inst, beta, gamma)).abs() < 1e-9);
    }
}

#[test]
fn single_edge_level1_closed_form() {
    let inst = IsingInstance::new(Graph::from_edges(2, &[(0, 1)]).unwrap(), &[(0, 1, 1.0)]).unwrap();
    for (beta, gamma) in [(0.3, 0.7), (PI / 8.0, PI / 8.0), (1.1, 2.9)] {
        // single edge: ⟨ZZ⟩ = sin 4β sin 2γ
        let want = (4.0 * beta).sin() * (2.0 * gamma).sin();
        assert!((level1_energy(&inst, beta, gamma) - want).abs() < 1e-12);
        let a = QaoaAngles::new(beta, 0.0, gamma, 0.0);
        assert!((zz_mean_statevector(&inst, (0, 1), &a, 26).unwrap() - want).abs() < 1e-12);
    }
    let (_, e) = optimize_level1(&inst, 64, 64);
    assert!((e - 1.0).abs() < 1e-9);
}

#[test]
fn forrelation_mean_within_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = IsingInstance::random_pm1(generate_triangular(3), &mut rng);
    let a = QaoaAngles::reference();
    let eps = 0.08;
    for (i, (s, t, _)) in inst.edge_list().into_iter().enumerate().take(4) {
        let want = dense_mean(&inst, &a, &[s, t]);
        // the linear sampler is slow per draw, so it gets one edge
        let samplers: &[SamplerKind] = if i == 0 { &[SamplerKind::Marginal, SamplerKind::Linear] } else { &[SamplerKind::Marginal] };
        for &sampler in samplers {
            let eps = if sampler == SamplerKind::Linear { 0.2 } else { eps };
            let r = zz_mean_forrelation(&inst, (s, t), &a, eps, i as u64, sampler, SampleRule::Chebyshev).unwrap();
            assert!((r.value - want).abs() < eps, "{sampler:?} edge {s}-{t}: {} vs {want}", r.value);
            assert!(r.value.abs() <= 1.0 + eps);
            assert_eq!(r.forrelation_calls, 6);
        }
    }
}

#[test]
fn forrelation_with_fields_within_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let inst = with_random_fields(random_instance(&mut rng, false), &mut rng);
    let a = random_angles(&mut rng);
    let (s, t, _) = inst.edge_list()[1];
    let r = zz_mean_forrelation(&inst, (s, t), &a, 0.1, 3, SamplerKind::Marginal, SampleRule::Chebyshev).unwrap();
    assert!((r.value - dense_mean(&inst, &a, &[s, t])).abs() < 0.1);
    assert_eq!(r.forrelation_calls, 16);
}

#[test]
fn forrelation_rejects_bad_epsilon() {
    let inst = IsingInstance::new(Graph::from_edges(2, &[(0, 1)]).unwrap(), &[(0, 1, 1.0)]).unwrap();
    let a = QaoaAngles::reference();
    assert!(zz_mean_forrelation(&inst, (0, 1), &a, 0.0, 0, SamplerKind::Marginal, SampleRule::Chebyshev).is_err());
    assert!(zz_mean_auto(&inst, (0, 1), &a, -1.0, 0, &MeanOptions::default()).is_err());
    assert!(optimize_beta2(&inst, &a, 0.0, 0, &MeanOptions::default()).is_err());
}

#[test]
fn auto_selection_follows_lightcone_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let inst = IsingInstance::random_pm1(generate_grid(5, 5), &mut rng);
    let r = zz_mean_auto(&inst, (12, 13), &QaoaAngles::reference(), 0.1, 0, &MeanOptions::default()).unwrap();
    assert!(matches!(r.method, Method::APrime | Method::ADoublePrime));
    // a hub joined to 40 leaves, each leaf joined to two more
    let mut edges = Vec::new();
    for i in 0..40 {
        edges.push((0, 1 + i));
    }
    let g = Graph::from_edges(41, &edges).unwrap();
    let c: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    let hub = IsingInstance::new(g, &c).unwrap();
    let lc = lightcone(&hub, &[0, 1], 2).unwrap();
    assert_eq!(CostModel::default().choose(&lc), Method::Forrelation);
}

#[test]
fn all_methods_agree_within_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let inst = IsingInstance::random_pm1(generate_grid(3, 3), &mut rng);
    let a = random_angles(&mut rng);
    let eps = 0.1;
    let vals: Vec<f64> = [Method::Statevector, Method::APrime, Method::ADoublePrime, Method::Forrelation]
        .into_iter()
        .map(|m| zz_mean_auto(&inst, (4, 5), &a, eps, 2, &MeanOptions { method: Some(m), ..Default::default() }).unwrap().value)
        .collect();
    for v in &vals {
        assert!((v - vals[0]).abs() < eps);
    }
}

#[test]
fn energy_budget_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let inst = IsingInstance::random_pm1(generate_grid(2, 3), &mut rng);
    let a = QaoaAngles::reference();
    let want: f64 = inst.edge_list().iter().map(|&(u, v, j)| j * dense_mean(&inst, &a, &[u, v])).sum();
    let opts = MeanOptions { method: Some(Method::Forrelation), ..Default::default() };
    let total = energy(&inst, &a, 0.3, 4, ErrorBudget::Total, &opts).unwrap();
    assert!((total.value - want).abs() < 0.3);
    let per = energy(&inst, &a, 0.1, 4, ErrorBudget::PerTerm, &opts).unwrap();
    assert!(per.terms.iter().zip(inst.edge_list()).all(|(r, (u, v, _))| (r.value - dense_mean(&inst, &a, &[u, v])).abs() < 0.1));
    let exact = energy(&inst, &a, 0.1, 4, ErrorBudget::Total, &MeanOptions::default()).unwrap();
    assert!((exact.value - want).abs() < 1e-9);
}

#[test]
fn beta2_fit_matches_grid_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let inst = random_instance(&mut rng, true);
    let a = random_angles(&mut rng);
    let eps = 0.01;
    let opts = MeanOptions::default();
    let fit = optimize_beta2(&inst, &a, eps, 0, &opts).unwrap();
    assert!((0.0..PI / 2.0).contains(&fit.beta2));
    let e = |b2: f64| dense_energy(&inst, &QaoaAngles { beta2: b2, ..a });
    let sweep = (0..720).map(|i| e(PI * i as f64 / 720.0)).fold(f64::NEG_INFINITY, f64::max);
    assert!((sweep - fit.e_max).abs() < 2.0 * eps);
    assert!((e(fit.beta2) - fit.e_max).abs() < 2.0 * eps);
    for i in 0..8 {
        let b2 = 0.37 * i as f64 + 0.05;
        assert!((e(b2) - fit.energy_at(b2)).abs() < 3.0 * eps);
    }
    assert!(fit.e_max >= e(0.0) - 2.0 * eps);
}

#[test]
fn beta2_fit_with_fields_matches_grid_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let inst = with_random_fields(random_instance(&mut rng, false), &mut rng);
    let a = random_angles(&mut rng);
    let fit = optimize_beta2(&inst, &a, 0.01, 0, &MeanOptions::default()).unwrap();
    let e = |b2: f64| dense_energy(&inst, &QaoaAngles { beta2: b2, ..a });
    let sweep = (0..720).map(|i| e(PI * i as f64 / 720.0)).fold(f64::NEG_INFINITY, f64::max);
    assert!(fit.e_max >= sweep - 1e-9 && (e(fit.beta2) - fit.e_max).abs() < 1e-9);
    for i in 0..8 {
        let b2 = 0.37 * i as f64 + 0.05;
        assert!((e(b2) - fit.energy_at(b2)).abs() < 1e-9);
    }
}

#[test]
fn beta2_with_trivial_second_layer() {
    // γ₂ = 0 merges the mixers: E(β₂) is the level-1 energy at β₁ + β₂
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let inst = random_instance(&mut rng, false);
    let mut a = random_angles(&mut rng);
    a.gamma2 = 0.0;
    let eps = 0.01;
    let fit = optimize_beta2(&inst, &a, eps, 0, &MeanOptions::default()).unwrap();
    for i in 0..12 {
        let b2 = PI * i as f64 / 12.0;
        assert!((fit.energy_at(b2) - level1_energy(&inst, a.beta1 + b2, a.gamma1)).abs() < 1e-9);
    }
    a.gamma1 = 0.0;
    let fit = optimize_beta2(&inst, &a, eps, 0, &MeanOptions::default()).unwrap();
    assert!((fit.a * fit.a + fit.b * fit.b).sqrt() <= 2.0 * eps);
}

fn dense_energy(inst: &IsingInstance, a: &QaoaAngles) -> f64 {
    inst.offset()
        + inst.edge_list().iter().map(|&(u, v, j)| j * dense_mean(inst, a, &[u, v])).sum::<f64>()
        + inst.fields().iter().enumerate().map(|(p, h)| if *h != 0.0 { h * dense_mean(inst, a, &[p]) } else { 0.0 }).sum::<f64>()
}

fn naive_max(inst: &IsingInstance) -> f64 {
    let n = inst.n();
    let mut best = f64::NEG_INFINITY;
    for x in 0..(1usize << n) {
        let mut e = inst.offset();
        for u in 0..n {
            let zu = if (x >> u) & 1 == 0 { 1.0 } else { -1.0 };
            e += inst.fields()[u] * zu;
            for v in (u + 1)..n {
                let zv = if (x >> v) & 1 == 0 { 1.0 } else { -1.0 };
                e += inst.coupling(u, v) * zu * zv;
            }
        }
        best = best.max(e);
    }
    best
}

#[test]
fn maxcut_small_cases() {
    let e = IsingInstance::new(Graph::from_edges(2, &[(0, 1)]).unwrap(), &[(0, 1, 1.0)]).unwrap();
    let (z, c) = exact_maxcut(&e).unwrap();
    assert_eq!(c, 1.0);
    assert_eq!(z[0], z[1]);
    let cyc: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
    let ring = IsingInstance::new(Graph::from_edges(8, &cyc).unwrap(), &cyc.iter().map(|&(u, v)| (u, v, -1.0)).collect::<Vec<_>>()).unwrap();
    let (z, c) = exact_maxcut(&ring).unwrap();
    assert_eq!(c, 8.0);
    assert!((0..8).all(|i| z[i] != z[(i + 1) % 8]));
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..5 {
        let g = generate_grid(3, 3);
        let c: Vec<_> = g.edges().into_iter().map(|(u, v)| (u, v, rng.gen_range(-2.0..2.0))).collect();
        let inst = with_random_fields(IsingInstance::new(g, &c).unwrap(), &mut rng).with_offset(0.5);
        let (z, c) = exact_maxcut(&inst).unwrap();
        assert!((c - naive_max(&inst)).abs() < 1e-9);
        assert!((inst.cost(&z) - c).abs() < 1e-12);
    }
    let big = IsingInstance::new(Graph::new(27), &[]).unwrap();
    assert!(exact_maxcut(&big).is_err());
}

#[test]
fn contraction_preserves_constrained_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..6 {
        let g = generate_triangular(3);
        let c: Vec<_> = g.edges().into_iter().map(|(u, v)| (u, v, rng.gen_range(-1.0..1.0))).collect();
        let inst = with_random_fields(IsingInstance::new(g, &c).unwrap(), &mut rng);
        let (u, v, _) = inst.edge_list()[rng.gen_range(0..inst.edge_list().len())];
        let (p, q) = (u.max(v), u.min(v));
        let sign: i8 = if rng.gen() { 1 } else { -1 };
        let (small, map) = contract(&inst, p, q, sign).unwrap();
        let n = inst.n();
        let mut constrained = f64::NEG_INFINITY;
        for x in 0..(1usize << n) {
            let z: Vec<i8> = (0..n).map(|i| if (x >> i) & 1 == 0 { 1 } else { -1 }).collect();
            if z[p] != sign * z[q] {
                continue;
            }
            constrained = constrained.max(inst.cost(&z));
            let mut zs = vec![0i8; small.n()];
            for i in (0..n).filter(|&i| i != p) {
                zs[map[i]] = z[i];
            }
            assert!((small.cost(&zs) - inst.cost(&z)).abs() < 1e-9);
        }
        assert!((exact_maxcut(&small).unwrap().1 - constrained).abs() < 1e-9);
    }
}

#[test]
fn constraint_stack_rules() {
    let mut s = ConstraintStack::new();
    s.push(Constraint { eliminated: 3, survivor: 1, sign: -1 }).unwrap();
    assert!(s.push(Constraint { eliminated: 3, survivor: 0, sign: 1 }).is_err());
    assert!(s.push(Constraint { eliminated: 0, survivor: 3, sign: 1 }).is_err());
    s.push(Constraint { eliminated: 1, survivor: 0, sign: 1 }).unwrap();
    let mut z = vec![-1, 0, 0, 0];
    s.back_substitute(&mut z);
    assert_eq!(z, vec![-1, -1, 0, 1]);
}

fn quick_config() -> RqaoaConfig {
    RqaoaConfig { gamma_grid: 6, level1_grid: 24, ..Default::default() }
}

#[test]
fn rqaoa_single_edge() {
    let inst = IsingInstance::new(Graph::from_edges(2, &[(0, 1)]).unwrap(), &[(0, 1, 1.0)]).unwrap();
    let cfg = RqaoaConfig { brute_threshold: 0, ..quick_config() };
    let r = rqaoa(&inst, &cfg, 0).unwrap();
    assert_eq!(r.assignment[0], r.assignment[1]);
    assert_eq!(r.cost, 1.0);
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.trace[0].sign, 1);
}

#[test]
fn rqaoa_grid_close_to_optimum_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let inst = IsingInstance::random_pm1(generate_grid(3, 4), &mut rng);
    let cfg = RqaoaConfig { brute_threshold: 4, ..quick_config() };
    let r = rqaoa(&inst, &cfg, 1).unwrap();
    let (_, opt) = exact_maxcut(&inst).unwrap();
    assert!(r.cost >= 0.9 * opt, "{} vs {opt}", r.cost);
    assert_eq!(r.trace.len(), 8);
    assert!(r.trace.iter().all(|s| s.energy >= s.level1_energy - 1e-9));
    let again = rqaoa(&inst, &cfg, 1).unwrap();
    assert_eq!(again.assignment, r.assignment);
    let mut z = r.assignment.clone();
    r.stack.back_substitute(&mut z);
    assert_eq!(inst.cost(&z), r.cost);
    assert!(rqaoa(&inst, &RqaoaConfig { brute_threshold: 27, ..quick_config() }, 0).is_err());
}

#[test]
fn rqaoa_with_forced_forrelation_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let inst = IsingInstance::random_pm1(generate_grid(2, 3), &mut rng);
    let cfg = RqaoaConfig {
        brute_threshold: 4,
        gamma_grid: 2,
        epsilon: 0.2,
        options: MeanOptions { method: Some(Method::Forrelation), rule: SampleRule::PerInstance, ..Default::default() },
        ..quick_config()
    };
    let r = rqaoa(&inst, &cfg, 2).unwrap();
    assert_eq!(r.trace.len(), 2);
    assert!(r.trace.iter().all(|s| s.forrelation_calls > 0 && s.methods.get("forrelation").is_some()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reported_means_are_bounded(seed in 0u64..1000, eps in 0.05f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = IsingInstance::random_pm1(generate_grid(2, 3), &mut rng);
        let a = random_angles(&mut rng);
        let (s, t, _) = inst.edge_list()[0];
        let opts = MeanOptions { method: Some(Method::Forrelation), ..Default::default() };
        let r = zz_mean_auto(&inst, (s, t), &a, eps, seed, &opts).unwrap();
        prop_assert!(r.value.abs() <= 1.0 + eps);
    }

    #[test]
    fn fit_recovers_sinusoid(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let e = |x: f64| a * (4.0 * x).cos() + b * (4.0 * x).sin() + c;
        let fit = Beta2Fit::from_points(e(0.0), e(PI / 8.0), e(-PI / 8.0));
        prop_assert!((fit.a - a).abs() < 1e-12 && (fit.b - b).abs() < 1e-12 && (fit.c - c).abs() < 1e-12);
        prop_assert!((e(fit.beta2) - fit.e_max).abs() < 1e-9);
        prop_assert!((0.0..PI / 2.0).contains(&fit.beta2));
    }

    #[test]
    fn five_point_fit_recovers_both_harmonics(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, a2 in -2.0f64..2.0, b2 in -2.0f64..2.0,
    ) {
        let e = |x: f64| a * (4.0 * x).cos() + b * (4.0 * x).sin() + c + a2 * (2.0 * x).cos() + b2 * (2.0 * x).sin();
        let fit = Beta2Fit::from_five_points([0, 1, 2, 3, 4].map(|j| e(PI * j as f64 / 5.0)));
        for (got, want) in [(fit.a, a), (fit.b, b), (fit.c, c), (fit.a2, a2), (fit.b2, b2)] {
            prop_assert!((got - want).abs() < 1e-12);
        }
        let sweep = (0..2000).map(|i| e(PI * i as f64 / 2000.0)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(fit.e_max >= sweep - 1e-9 && (e(fit.beta2) - fit.e_max).abs() < 1e-12);
    }
}
