use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use forrelation::formats::{parse_graph, parse_grid_dims, parse_ops, parse_tn_system, parse_two_local};
use forrelation::forrelation::{phi_estimate, phi_exact, EXACT_CAP};
use forrelation::graph::{generate_grid, generate_triangular, min_fill_td, Graph};
use forrelation::graph_forrelation::{phi_graph_exact, GraphForrelationInstance, GraphPhiEstimator, SamplerKind, EXACT_CAP as GRAPH_EXACT_CAP};
use forrelation::oracle::BooleanOracle;
use forrelation::qaoa::{
    energy, exact_maxcut, rqaoa, CostModel, ErrorBudget, IsingInstance, MeanOptions, Method, QaoaAngles, RqaoaConfig, SampleRule,
    MAXCUT_CAP,
};
use forrelation::query_sim::{amplitude_exact, kfold_phi, QueryCircuit};
use forrelation::rng::{mix, stream};
use forrelation::tn_sampler::{build_network, contract_network, TnSampler};
use forrelation::two_local::TwoLocalFunction;
use forrelation::{Complex64, Error};

use crate::pool::par_map;
use crate::*;

type Res<T> = std::result::Result<T, Box<dyn StdError + Send + Sync>>;

fn fail<T>(msg: impl Into<String>) -> Res<T> {
    Err(msg.into().into())
}

fn with_path<T>(path: &Path, r: forrelation::Result<T>) -> Res<T> {
    r.map_err(|e| format!("{}: {e}", path.display()).into())
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

pub fn run(cmd: Command) -> Res<()> {
    match cmd {
        Command::Oracle(a) => oracle(a),
        Command::Kfold(a) => kfold(a),
        Command::GraphPhi(a) => graph_phi(a),
        Command::Tnsample(a) => tnsample(a),
        Command::QaoaEnergy(a) => qaoa_energy(a),
        Command::Rqaoa(a) => rqaoa_cmd(a),
    }
}

fn check_epsilon(eps: f64) -> Res<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        fail(format!("epsilon must be positive, got {eps}"))
    }
}

/// Opens `--out` or stdout as a CSV sink.
fn csv_sink(out: &Option<PathBuf>) -> Res<csv::Writer<Box<dyn Write>>> {
    let w: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(w))
}

fn sweep_points(s: &Sweep) -> Res<Vec<(usize, f64, usize)>> {
    let eps = s.sweep.clone().unwrap_or_default();
    for &e in &eps {
        check_epsilon(e)?;
    }
    if s.trials == 0 {
        return fail("--trials must be positive");
    }
    let mut sorted = eps;
    sorted.sort_by(f64::total_cmp);
    Ok(sorted.iter().enumerate().flat_map(|(i, &e)| (0..s.trials).map(move |t| (i, e, t))).collect())
}

fn oracle(a: OracleArgs) -> Res<()> {
    let f = BooleanOracle::from_spec(&a.f, a.n)?;
    let g = BooleanOracle::from_spec(&a.g, a.n)?;
    if a.exact {
        println!("exact {}", phi_exact(&f, &g)?);
        return Ok(());
    }
    let exact = if a.n <= EXACT_CAP.min(20) { Some(phi_exact(&f, &g)?) } else { None };
    if a.sweep.sweep.is_some() {
        let points = sweep_points(&a.sweep)?;
        let rows = par_map(a.common.jobs, &points, |&(i, eps, t)| {
            let start = Instant::now();
            let mut rng = stream(a.common.seed, "oracle", mix(i as u64, &[t as u64]));
            phi_estimate(&f, &g, eps, &mut rng).map(|r| (r, start.elapsed().as_secs_f64()))
        });
        let mut w = csv_sink(&a.common.out)?;
        let mut header = vec!["epsilon", "trial", "estimate", "exact", "error", "queries"];
        if a.sweep.timing {
            header.push("seconds");
        }
        w.write_record(&header)?;
        for (&(_, eps, t), row) in points.iter().zip(rows) {
            let (r, secs) = row?;
            let mut rec = vec![eps.to_string(), t.to_string(), r.value.to_string()];
            rec.push(exact.map_or(String::new(), |x| x.to_string()));
            rec.push(exact.map_or(String::new(), |x| (r.value - x).abs().to_string()));
            rec.push(r.queries_used.to_string());
            if a.sweep.timing {
                rec.push(secs.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        return Ok(());
    }
    check_epsilon(a.epsilon)?;
    let mut rng = stream(a.common.seed, "oracle", 0);
    let r = phi_estimate(&f, &g, a.epsilon, &mut rng)?;
    println!("estimate {}", r.value);
    println!("method {}", r.method.tag());
    println!("queries {}", r.queries_used);
    if let Some(x) = exact {
        println!("exact {x}");
        println!("error {}", (r.value - x).abs());
    }
    Ok(())
}

fn kfold(a: KfoldArgs) -> Res<()> {
    let mut specs = a.f.clone();
    specs.extend(a.g.clone());
    if specs.len() != a.k {
        return fail(format!("--k {} but {} function specs given", a.k, specs.len()));
    }
    let oracles: Vec<BooleanOracle> = specs.iter().map(|s| BooleanOracle::from_spec(s, a.n)).collect::<Result<_, Error>>()?;
    let exact = if a.n <= 16 { Some(amplitude_exact(&QueryCircuit::kfold(oracles.clone())?)?) } else { None };
    if a.exact {
        let x = exact.ok_or("exact value needs n <= 16")?;
        println!("exact {} {}", x.re, x.im);
        return Ok(());
    }
    check_epsilon(a.epsilon)?;
    let mut rng = stream(a.common.seed, "kfold", 0);
    let r = kfold_phi(&oracles, a.epsilon, &mut rng)?;
    println!("estimate {} {}", r.value.re, r.value.im);
    println!("samples {}", r.samples);
    println!("queries {}", r.queries_used);
    if let Some(x) = exact {
        println!("exact {} {}", x.re, x.im);
        println!("error {}", (r.value - x).norm());
    }
    Ok(())
}

/// Graph and couplings from `--graph`, `--grid` or `--triangular`; lattice
/// couplings are uniform ±1 from the seed.
fn load_graph(src: &GraphSource, seed: u64) -> Res<(Graph, Vec<(usize, usize, f64)>)> {
    let lattice = |g: Graph| {
        let inst = IsingInstance::random_pm1(g.clone(), &mut stream(seed, "couplings", 0));
        let c = inst.couplings().iter().map(|(&(u, v), &j)| (u, v, j)).collect();
        (g, c)
    };
    match (&src.graph, &src.grid, src.triangular) {
        (Some(p), None, None) => {
            let f = with_path(p, parse_graph(&read(p)?))?;
            Ok((f.graph, f.couplings))
        }
        (None, Some(s), None) => {
            let (r, c) = parse_grid_dims(s)?;
            Ok(lattice(generate_grid(r, c)))
        }
        (None, None, Some(r)) if r > 0 => Ok(lattice(generate_triangular(r))),
        (None, None, Some(_)) => fail("--triangular needs at least one row"),
        (None, None, None) => fail("one of --graph, --grid or --triangular is required"),
        _ => fail("--graph, --grid and --triangular are exclusive"),
    }
}

/// Places the terms of a parsed function on `graph`.
fn lift(graph: &Graph, h: &TwoLocalFunction) -> forrelation::Result<TwoLocalFunction> {
    if h.n() != graph.n() {
        return Err(Error::DimensionMismatch(format!("function on {} vertices, graph has {}", h.n(), graph.n())));
    }
    let mut f = TwoLocalFunction::new(graph.clone(), 2);
    for v in 0..h.n() {
        f.multiply_vertex_term(v, h.vertex_term(v))?;
    }
    for (&(u, v), t) in h.edge_terms() {
        f.multiply_edge_term(u, v, t.clone())?;
    }
    f.scale(h.scalar());
    Ok(f)
}

fn sampler_kind(s: SamplerArg) -> SamplerKind {
    match s {
        SamplerArg::Marginal => SamplerKind::Marginal,
        SamplerArg::Linear => SamplerKind::Linear,
    }
}

fn graph_phi(a: GraphPhiArgs) -> Res<()> {
    let (graph, _) = load_graph(&a.source, a.common.seed)?;
    let side = |p: &Option<PathBuf>| -> Res<TwoLocalFunction> {
        match p {
            Some(p) => with_path(p, parse_two_local(&read(p)?).and_then(|h| lift(&graph, &h))),
            None => Ok(TwoLocalFunction::new(graph.clone(), 2)),
        }
    };
    let (f, g) = (side(&a.f)?, side(&a.g)?);
    let ops = parse_ops(&a.ops, graph.n())?;
    let inst = GraphForrelationInstance::with_decomposition(f, g, ops)?;
    let kind = sampler_kind(a.sampler);
    let exact = if a.exact || (a.sweep.sweep.is_some() && graph.n() <= GRAPH_EXACT_CAP) { Some(phi_graph_exact(&inst)?) } else { None };
    if a.sweep.sweep.is_some() {
        let points = sweep_points(&a.sweep)?;
        let rows = par_map(a.common.jobs, &points, |&(i, eps, t)| {
            let start = Instant::now();
            let seed = mix(a.common.seed, &[i as u64, t as u64]);
            GraphPhiEstimator::new(inst.clone(), kind)
                .estimate(eps, seed, a.samples_override)
                .map(|r| (r, start.elapsed().as_secs_f64()))
        });
        let mut w = csv_sink(&a.common.out)?;
        let mut header = vec!["epsilon", "trial", "estimate_re", "estimate_im", "exact_re", "exact_im", "error", "samples"];
        if a.sweep.timing {
            header.push("seconds");
        }
        w.write_record(&header)?;
        for (&(_, eps, t), row) in points.iter().zip(rows) {
            let (r, secs) = row?;
            let mut rec = vec![eps.to_string(), t.to_string(), r.value.re.to_string(), r.value.im.to_string()];
            let fmt = |f: &dyn Fn(Complex64) -> f64| exact.map_or(String::new(), |x| f(x).to_string());
            rec.push(fmt(&|x| x.re));
            rec.push(fmt(&|x| x.im));
            rec.push(fmt(&|x| (r.value - x).norm()));
            rec.push(r.samples.to_string());
            if a.sweep.timing {
                rec.push(secs.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        return Ok(());
    }
    if a.samples_override.is_none() {
        check_epsilon(a.epsilon)?;
    }
    let mut est = GraphPhiEstimator::new(inst, kind);
    let r = est.estimate(a.epsilon, a.common.seed, a.samples_override)?;
    println!("estimate {} {}", r.value.re, r.value.im);
    println!("samples {}", r.samples);
    println!("omega {}", est.omega());
    println!("sample_variance {}", r.sample_variance);
    if let Some(x) = exact {
        println!("exact {} {}", x.re, x.im);
        println!("error {}", (r.value - x).norm());
    }
    Ok(())
}

fn tnsample(a: TnsampleArgs) -> Res<()> {
    let sys = with_path(&a.input, parse_tn_system(&read(&a.input)?))?;
    let td = min_fill_td(&sys.connectivity_graph());
    let sampler = TnSampler::new(&sys, &td)?;
    let mut rng = stream(a.common.seed, "tnsample", 0);
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..a.trials {
        *counts.entry(sampler.sample(&mut rng)?).or_insert(0) += 1;
    }
    let exact = if a.exact { Some(exact_distribution(&sys, &td)?) } else { None };
    let mut w = csv_sink(&a.common.out)?;
    let mut header = vec!["outcome", "count", "frequency"];
    if exact.is_some() {
        header.push("probability");
    }
    w.write_record(&header)?;
    let word = |x: &[usize]| x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    match &exact {
        Some(p) => {
            for (x, &prob) in p {
                let c = counts.get(x).copied().unwrap_or(0);
                if c > 0 || prob > 0.0 {
                    w.write_record([word(x), c.to_string(), (c as f64 / a.trials as f64).to_string(), prob.to_string()])?;
                }
            }
        }
        None => {
            for (x, &c) in &counts {
                w.write_record([word(x), c.to_string(), (c as f64 / a.trials as f64).to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Outcome probabilities from the diagonal of the contracted network.
fn exact_distribution(
    sys: &forrelation::tn_sampler::QuditSystem,
    td: &forrelation::graph::TreeDecomposition,
) -> Res<BTreeMap<Vec<usize>, f64>> {
    let (n, d) = (sys.n(), sys.d());
    if (d as f64).powi(n as i32) > 4096.0 {
        return fail("--exact needs at most 4096 outcomes");
    }
    let t = contract_network(sys, &build_network(sys, td)?)?;
    let mut out = BTreeMap::new();
    let mut total = 0.0;
    for idx in 0..d.pow(n as u32) {
        let x: Vec<usize> = (0..n).map(|q| (idx / d.pow(q as u32)) % d).collect();
        let digits: Vec<usize> = t.labels().iter().map(|&q| x[q] * (d + 1)).collect();
        let p = t.get(&digits).re.max(0.0);
        total += p;
        out.insert(x, p);
    }
    if total <= 0.0 {
        return Err(Error::NoValidOutput.into());
    }
    out.values_mut().for_each(|p| *p /= total);
    Ok(out)
}

fn mean_options(q: &QaoaCommon) -> Res<MeanOptions> {
    if !(q.cutoff_seconds > 0.0) {
        return fail("--cutoff-seconds must be positive");
    }
    let model = if q.calibrate { CostModel::calibrated(q.cutoff_seconds) } else { CostModel { cutoff_seconds: q.cutoff_seconds, ..CostModel::default() } };
    let method = match q.method {
        MethodArg::Auto => None,
        MethodArg::Statevector => Some(Method::Statevector),
        MethodArg::Aprime => Some(Method::APrime),
        MethodArg::Adoubleprime => Some(Method::ADoublePrime),
        MethodArg::Forrelation => Some(Method::Forrelation),
    };
    Ok(MeanOptions {
        model,
        sampler: sampler_kind(q.sampler),
        rule: if q.per_instance_samples { SampleRule::PerInstance } else { SampleRule::Chebyshev },
        method,
        ..MeanOptions::default()
    })
}

fn ising(src: &GraphSource, seed: u64) -> Res<IsingInstance> {
    let (g, c) = load_graph(src, seed)?;
    Ok(IsingInstance::new(g, &c)?)
}

fn budget(b: BudgetArg) -> ErrorBudget {
    match b {
        BudgetArg::Total => ErrorBudget::Total,
        BudgetArg::PerTerm => ErrorBudget::PerTerm,
    }
}

fn qaoa_energy(a: QaoaEnergyArgs) -> Res<()> {
    let inst = ising(&a.qaoa.source, a.common.seed)?;
    let opts = mean_options(&a.qaoa)?;
    let angles = QaoaAngles::new(a.angles[0], a.angles[1], a.angles[2], a.angles[3]);
    angles.validate()?;
    let b = budget(a.budget);
    let exact = if a.exact || a.sweep.sweep.is_some() {
        let sv = MeanOptions { method: Some(Method::Statevector), ..opts.clone() };
        Some(energy(&inst, &angles, 1.0, 0, ErrorBudget::Total, &sv)?.value)
    } else {
        None
    };
    if a.sweep.sweep.is_some() {
        let points = sweep_points(&a.sweep)?;
        let rows = par_map(a.common.jobs, &points, |&(i, eps, t)| {
            let start = Instant::now();
            energy(&inst, &angles, eps, mix(a.common.seed, &[i as u64, t as u64]), b, &opts).map(|r| (r, start.elapsed().as_secs_f64()))
        });
        let mut w = csv_sink(&a.common.out)?;
        let mut header = vec!["epsilon", "trial", "estimate", "exact", "error", "forrelation_calls"];
        if a.sweep.timing {
            header.push("seconds");
        }
        w.write_record(&header)?;
        let x = exact.expect("computed for sweeps");
        for (&(_, eps, t), row) in points.iter().zip(rows) {
            let (r, secs) = row?;
            let calls: usize = r.terms.iter().map(|t| t.forrelation_calls).sum();
            let mut rec = vec![eps.to_string(), t.to_string(), r.value.to_string(), x.to_string(), (r.value - x).abs().to_string(), calls.to_string()];
            if a.sweep.timing {
                rec.push(secs.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        return Ok(());
    }
    check_epsilon(a.epsilon)?;
    let r = energy(&inst, &angles, a.epsilon, a.common.seed, b, &opts)?;
    println!("energy {}", r.value);
    if let Some(x) = exact {
        println!("exact {x}");
        println!("error {}", (r.value - x).abs());
    }
    if let Some(p) = &a.common.out {
        let mut w = csv_sink(&Some(p.clone()))?;
        w.write_record(["support", "weight", "mean", "method", "epsilon", "forrelation_calls"])?;
        for (t, (_, wgt)) in r.terms.iter().zip(term_weights(&inst)) {
            let s: Vec<String> = t.support.iter().map(|v| v.to_string()).collect();
            w.write_record([s.join(" "), wgt.to_string(), t.value.to_string(), t.method.name().to_string(), t.epsilon.to_string(), t.forrelation_calls.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn term_weights(inst: &IsingInstance) -> Vec<(Vec<usize>, f64)> {
    let mut out: Vec<(Vec<usize>, f64)> = inst.couplings().iter().map(|(&(u, v), &j)| (vec![u, v], j)).collect();
    out.extend(inst.fields().iter().enumerate().filter(|(_, &h)| h != 0.0).map(|(p, &h)| (vec![p], h)));
    out
}

fn rqaoa_cmd(a: RqaoaArgs) -> Res<()> {
    let inst = ising(&a.qaoa.source, a.common.seed)?;
    let cfg = RqaoaConfig {
        epsilon: a.epsilon,
        brute_threshold: a.brute_threshold,
        gamma_grid: a.gamma_grid,
        level1_grid: a.level1_grid,
        options: mean_options(&a.qaoa)?,
        budget: budget(a.budget),
    };
    let r = rqaoa(&inst, &cfg, a.common.seed)?;
    println!("cost {}", r.cost);
    if inst.n() <= MAXCUT_CAP {
        let (_, opt) = exact_maxcut(&inst)?;
        println!("optimum {opt}");
        println!("ratio {}", if opt != 0.0 { r.cost / opt } else { 1.0 });
    }
    println!("steps {}", r.trace.len());
    let mut w = csv_sink(&a.common.out)?;
    w.write_record(["step", "n", "eliminated", "survivor", "sign", "m", "beta1", "beta2", "gamma1", "gamma2", "energy", "methods", "forrelation_calls", "seconds"])?;
    for s in &r.trace {
        let methods: Vec<String> = s.methods.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            s.step.to_string(),
            s.n.to_string(),
            s.edge.0.to_string(),
            s.edge.1.to_string(),
            s.sign.to_string(),
            s.m.to_string(),
            s.angles.beta1.to_string(),
            s.angles.beta2.to_string(),
            s.angles.gamma1.to_string(),
            s.angles.gamma2.to_string(),
            s.energy.to_string(),
            methods.join(";"),
            s.forrelation_calls.to_string(),
            s.seconds.to_string(),
        ])?;
    }
    w.flush()?;
    let target = a.assignment.clone().or_else(|| a.common.out.as_ref().map(|p| PathBuf::from(format!("{}.assignment", p.display()))));
    let text: String = r.assignment.iter().enumerate().map(|(v, z)| format!("{v} {z:+}\n")).collect();
    match target {
        Some(p) => fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => eprint!("{text}"),
    }
    Ok(())
}
