//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sparsemm_cli::experiment::{run_experiment, write_outputs, ExperimentSpec};
use sparsemm_cli::generate::{bounded_degree_graph, generate, GeneratorKind, GeneratorSpec};
use sparsemm_cli::graph::{count_triangles_exhaustive, symmetric_pattern};
use sparsemm_core::algorithms::{
    count_triangles, multiply, process_brute_force, process_cluster_dense, process_small_component,
    AlgoError, DenseEngine, Network, OutputAccumulator, PipelineConfig, SmallConfig,
};
use sparsemm_core::clustering::{
    find_one_cluster, is_large, layer_count_bound, layer_yield_bound, one_cluster_bound, schedule_decompose,
    Decomposition, Schedule, ScheduleRow,
};
use sparsemm_core::oracle::{multiply_oracle, processed_sum};
use sparsemm_core::sim::{
    broadcast_tree, convergecast_sum, deliver, schedule_unicast, tree_round_bound, Demand, Payload,
    RoundEngine, SimError,
};
use sparsemm_core::smallcomp::{bad_count_bound, default_load_bound};
use sparsemm_core::{
    enumerate_triangles, Cluster, Semiring, SparsePattern, SupportedMatrix, TriInstance, Triangle,
    TriangleSet,
};

const SEMIRINGS: [Semiring; 3] = [Semiring::Integer, Semiring::Boolean, Semiring::Tropical];

/// Bandwidth aborts seen anywhere in the suite.
static ABORTS: AtomicU64 = AtomicU64::new(0);
/// Engine runs checked for violations.
static RUNS: AtomicU64 = AtomicU64::new(0);

fn track<T>(r: Result<T, AlgoError>) -> Result<T, String> {
    RUNS.fetch_add(1, Ordering::Relaxed);
    r.map_err(|e| {
        if matches!(e, AlgoError::Sim(SimError::Bandwidth(_))) {
            ABORTS.fetch_add(1, Ordering::Relaxed);
        }
        e.to_string()
    })
}

fn track_sim<T>(r: Result<T, SimError>) -> Result<T, String> {
    track(r.map_err(AlgoError::from))
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gen(kind: GeneratorKind, n: usize, d: usize, density: f64, semiring: Semiring, seed: u64) -> TriInstance {
    let spec = GeneratorSpec {
        kind,
        n,
        d,
        density,
        semiring,
        seed,
    };
    generate(&spec).unwrap_or_else(|e| panic!("generator {spec:?}: {e}"))
}

fn exactness() -> Outcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    for n in [16, 64, 256] {
        for d in [2, 4, 8, 16] {
            for s in SEMIRINGS {
                for rep in 0..3u64 {
                    cases.push((n, d, s, rep));
                }
            }
        }
    }
    let failures: Vec<String> = cases
        .par_iter()
        .filter_map(|&(n, d, s, rep)| {
            let seed = 1000 * n as u64 + 10 * d as u64 + rep;
            let (inst, engine) = match rep {
                0 => (
                    gen(GeneratorKind::RandomUniform, n, d, 1.0, s, seed),
                    DenseEngine::Semiring3d,
                ),
                1 => (
                    gen(GeneratorKind::PlantedClusters, n, d, 0.7, s, seed),
                    DenseEngine::Naive,
                ),
                _ => (
                    gen(GeneratorKind::PlantedBadNode, n, d, 0.5, s, seed),
                    DenseEngine::Semiring3d,
                ),
            };
            let config = PipelineConfig {
                engine,
                seed,
                ..PipelineConfig::default()
            };
            match track(multiply(&inst, &config)) {
                Err(e) => Some(format!("n={n} d={d} {s} rep={rep}: {e}")),
                Ok(out) if out.values != multiply_oracle(&inst) => {
                    Some(format!("n={n} d={d} {s} rep={rep}: output differs from oracle"))
                }
                Ok(_) => None,
            }
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    ensure(failures.is_empty(), || failures.join("; "))?;
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{} instances exact in {secs:.1}s", cases.len()))
}

fn one_cluster_size() -> Outcome {
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for eps in [0.0, 0.25] {
        for d in [4usize, 8, 16] {
            let n = if d == 16 { 4 * d } else { 8 * d };
            for seed in 0..10u64 {
                let density = if eps == 0.0 {
                    1.0
                } else {
                    0.85 + 0.015 * seed as f64
                };
                let inst = gen(
                    GeneratorKind::PlantedClusters,
                    n,
                    d,
                    density,
                    Semiring::Integer,
                    seed,
                );
                let set = enumerate_triangles(&inst);
                if (set.len() as f64) < (d as f64).powf(2.0 - eps) * n as f64 {
                    continue;
                }
                let (_, count) =
                    find_one_cluster(&set, eps, d, n).map_err(|e| format!("d={d} eps={eps}: {e}"))?;
                let bound = one_cluster_bound(d, eps);
                ensure(count as f64 >= bound, || {
                    format!("d={d} eps={eps} seed={seed}: {count} < {bound:.2}")
                })?;
                worst = worst.min(count as f64 / bound);
                checked += 1;
            }
        }
    }
    ensure(checked >= 50, || {
        format!("only {checked} instances met the size precondition")
    })?;
    Ok(format!("{checked} instances, min count/bound {worst:.2}"))
}

/// Schedules whose slack makes `d^delta >= 2`, so the yield and
/// layer-count bounds apply.
fn large_delta_schedule(d: usize) -> Schedule {
    let delta = 1.0 / (d as f64).log2() + 1e-9;
    let rows = vec![
        ScheduleRow::new(0.0, 0.05, delta).unwrap(),
        ScheduleRow::new(0.05, 0.1, delta).unwrap(),
    ];
    Schedule::new(format!("large-delta-{d}"), rows).unwrap()
}

struct DecompCase {
    inst: TriInstance,
    all: TriangleSet,
    dec: Decomposition,
}

fn decomposition_cases() -> Vec<DecompCase> {
    let mut jobs = Vec::new();
    let kinds = [
        (GeneratorKind::RandomUniform, 1.0),
        (GeneratorKind::PlantedClusters, 1.0),
        (GeneratorKind::PlantedClusters, 0.6),
        (GeneratorKind::PlantedBadNode, 0.5),
    ];
    for (kind, density) in kinds {
        for d in [4usize, 8, 16] {
            for n in [64usize, 128] {
                for schedule in ["table1", "table2", "simplified", "large"] {
                    jobs.push((kind, density, d, n, schedule));
                }
            }
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(idx, &(kind, density, d, n, schedule))| {
            let inst = gen(kind, n, d, density, Semiring::Integer, idx as u64);
            let all = enumerate_triangles(&inst);
            let schedule = Schedule::preset(schedule).unwrap_or_else(|| large_delta_schedule(d));
            let dec = schedule_decompose(&all, &schedule, d, n)
                .unwrap_or_else(|e| panic!("{kind} d={d} n={n} {}: {e}", schedule.name()));
            DecompCase { inst, all, dec }
        })
        .collect()
}

fn decomposition_bounds(cases: &[DecompCase]) -> Outcome {
    let (mut yields, mut counts) = (0, 0);
    for c in cases {
        let (n, d) = (c.inst.n, c.inst.d);
        let name = c.dec.schedule.name();
        let rows = c.dec.schedule.rows();
        for (layer, &m) in c.dec.layers.iter().zip(&c.dec.layer_rows) {
            let row = rows[m];
            if is_large(d, row.delta) {
                let bound = layer_yield_bound(d, n, row.eps2, row.delta);
                ensure(layer.len() as f64 >= bound, || {
                    format!(
                        "{name} d={d} n={n} row {m}: layer yield {} < {bound:.3}",
                        layer.len()
                    )
                })?;
                yields += 1;
            }
        }
        for (m, row) in rows.iter().enumerate() {
            if is_large(d, row.delta) {
                let layers = c.dec.layer_rows.iter().filter(|&&r| r == m).count();
                let bound = layer_count_bound(d, row);
                ensure(layers as f64 <= bound, || {
                    format!("{name} d={d} n={n} row {m}: {layers} layers > {bound:.1}")
                })?;
                counts += 1;
            }
        }
        let limit = (d as f64).powf(2.0 - c.dec.schedule.final_eps()) * n as f64;
        ensure(c.dec.residual.len() as f64 <= limit, || {
            format!(
                "{name} d={d} n={n}: residual {} > {limit:.1}",
                c.dec.residual.len()
            )
        })?;
    }
    ensure(yields > 0 && counts > 0, || {
        "no decomposition reached the large regime".into()
    })?;
    Ok(format!(
        "{} decompositions, {yields} layer yields and {counts} layer counts in the large regime",
        cases.len()
    ))
}

fn partition_integrity(cases: &[DecompCase]) -> Outcome {
    let mut layers = 0;
    for c in cases {
        let mut got: Vec<Triangle> = c.dec.triangles().copied().collect();
        got.sort_unstable();
        ensure(got == c.all.to_vec(), || {
            format!(
                "{}: layers and residual do not partition T",
                c.dec.schedule.name()
            )
        })?;
        for layer in &c.dec.layers {
            layer.validate().map_err(|e| e.to_string())?;
            layers += 1;
        }
    }
    Ok(format!(
        "{} decompositions, {layers} clustered sets valid",
        cases.len()
    ))
}

fn small_component_bounds(cases: &[DecompCase]) -> Outcome {
    let mut residuals: Vec<(TriInstance, TriangleSet, &'static str)> = cases
        .iter()
        .filter(|c| !c.dec.residual.is_empty())
        .step_by(2)
        .map(|c| (c.inst.clone(), c.dec.residual.clone(), "residual"))
        .collect();
    for d in [8usize, 12, 16] {
        for seed in 0..4u64 {
            let inst = gen(
                GeneratorKind::PlantedBadNode,
                4 * d,
                d,
                0.5,
                Semiring::Integer,
                seed,
            );
            let all = enumerate_triangles(&inst);
            residuals.push((inst, all, "planted"));
        }
    }
    let settings = [(0.146, None), (0.4, None), (0.4, Some(2)), (0.8, Some(3))];
    let mut runs = 0;
    let (mut with_bad, mut split, mut planted) = (0, 0, 0);
    for (idx, (inst, set, origin)) in residuals.iter().enumerate() {
        let (n, d) = (inst.n, inst.d);
        let (eps, colors) = settings[idx % settings.len()];
        let cfg = SmallConfig {
            eps,
            colors,
            max_attempts: 32,
            seed: idx as u64,
        };
        let mut net = Network::new(inst, 10_000_000, false);
        let mut acc = OutputAccumulator::new(inst);
        let (_, stats) = track(process_small_component(&mut net, set, &cfg, &mut acc))?;
        let tag = || format!("{origin} #{idx} n={n} d={d} eps={eps} colors={colors:?}");
        let bad_bound = bad_count_bound(n, d, eps);
        ensure(stats.bad_nodes <= bad_bound, || {
            format!("{}: {} bad > {bad_bound}", tag(), stats.bad_nodes)
        })?;
        let load_bound = default_load_bound(d, eps);
        ensure(stats.max_virtual_load as f64 <= load_bound, || {
            format!(
                "{}: virtual load {} > {load_bound:.1}",
                tag(),
                stats.max_virtual_load
            )
        })?;
        ensure(stats.virtual_nodes <= 2 * 3 * n, || {
            format!("{}: {} virtual nodes > {}", tag(), stats.virtual_nodes, 6 * n)
        })?;
        ensure(acc.values() == &processed_sum(inst, set), || {
            format!("{}: recovery differs from oracle", tag())
        })?;
        runs += 1;
        with_bad += usize::from(stats.bad_nodes > 0);
        split += usize::from(stats.colors > 1 && stats.bad_nodes > 0);
        planted += usize::from(*origin == "planted");
    }
    ensure(runs >= 50, || format!("only {runs} residuals"))?;
    ensure(split > 0, || "no run split a bad node".into())?;
    Ok(format!(
        "{runs} residuals ({planted} planted), {with_bad} with bad nodes, {split} split into colors"
    ))
}

fn tree_sweep() -> Result<usize, String> {
    let results: Vec<Result<(), String>> = (1..=64usize)
        .into_par_iter()
        .map(|d| {
            let msgs: Vec<Payload> = (0..d)
                .map(|i| Payload::new(i as i64, [9, i as u32, 0, 0]))
                .collect();
            for k in 1..=255usize {
                let members: Vec<usize> = (1..=k).collect();
                let bound = tree_round_bound(d, k);
                let mut engine = RoundEngine::new(k + 1);
                let (rounds, got) = track_sim(broadcast_tree(&mut engine, 0, &members, &msgs, 100_000))?;
                ensure(rounds <= bound, || {
                    format!("broadcast d={d} k={k}: {rounds} > {bound}")
                })?;
                ensure(got.iter().all(|(_, p)| p == &msgs), || {
                    format!("broadcast d={d} k={k}: wrong payloads")
                })?;
                let values: Vec<Vec<i64>> = members
                    .iter()
                    .map(|&m| (0..d).map(|i| (m * 7 + i) as i64).collect())
                    .collect();
                let mut engine = RoundEngine::new(k + 1);
                let (rounds, sum) = track_sim(convergecast_sum(
                    &mut engine,
                    0,
                    &members,
                    &values,
                    Semiring::Integer,
                    100_000,
                ))?;
                ensure(rounds <= bound, || {
                    format!("convergecast d={d} k={k}: {rounds} > {bound}")
                })?;
                let expect: Vec<i64> = (0..d).map(|i| values.iter().map(|v| v[i]).sum()).collect();
                ensure(sum == expect, || format!("convergecast d={d} k={k}: wrong sums"))?;
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(64 * 255)
}

fn round_ceilings() -> Outcome {
    let mut brute = 0;
    for d in [2usize, 4, 8, 16] {
        for (kind, density) in [
            (GeneratorKind::RandomUniform, 1.0),
            (GeneratorKind::PlantedClusters, 1.0),
            (GeneratorKind::PlantedBadNode, 0.5),
        ] {
            let inst = gen(kind, 64, d, density, Semiring::Integer, d as u64);
            let all = enumerate_triangles(&inst);
            let t = all.max_load() as u64;
            let mut net = Network::new(&inst, 10_000_000, false);
            let mut acc = OutputAccumulator::new(&inst);
            let rounds = track(process_brute_force(&mut net, &all, &mut acc))?;
            ensure(rounds <= 2 * t + 4, || {
                format!("brute force {kind} d={d}: {rounds} > 2*{t}+4")
            })?;
            ensure(acc.values() == &multiply_oracle(&inst), || {
                format!("brute force {kind} d={d}: wrong output")
            })?;
            brute += 1;
        }
    }

    let trees = tree_sweep()?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut unicast = 0;
    for _ in 0..200 {
        let nodes = rng.gen_range(2..64usize);
        let count = rng.gen_range(0..400usize);
        let demands: Vec<Demand<Payload>> = (0..count)
            .map(|m| {
                let src = rng.gen_range(0..nodes);
                let dst = (src + rng.gen_range(1..nodes)) % nodes;
                Demand {
                    src,
                    dst,
                    payload: Payload::new(m as i64, [1, m as u32, 0, 0]),
                }
            })
            .collect();
        let sched = schedule_unicast(demands);
        let delta = sched.max_degree() as u64;
        let colors = u64::from(sched.color_count());
        ensure(sched.is_proper(), || "improper unicast coloring".into())?;
        ensure(colors <= (2 * delta).saturating_sub(1), || {
            format!("unicast: {colors} colors, max degree {delta}")
        })?;
        let mut engine = RoundEngine::new(nodes);
        let (rounds, delivered) = track_sim(deliver(&mut engine, &sched, 100_000))?;
        ensure(rounds <= colors && delivered.len() == count, || {
            format!(
                "unicast delivery: {rounds} rounds, {} of {count} messages",
                delivered.len()
            )
        })?;
        unicast += 1;
    }
    Ok(format!(
        "{brute} brute-force runs, {trees} tree (d, k) points, {unicast} unicast schedules within ceilings"
    ))
}

fn bandwidth_invariant() -> Outcome {
    let aborts = ABORTS.load(Ordering::Relaxed);
    let runs = RUNS.load(Ordering::Relaxed);
    ensure(aborts == 0, || {
        format!("{aborts} bandwidth aborts in {runs} runs")
    })?;
    ensure(runs > 0, || "no runs recorded".into())?;
    Ok(format!("0 violations over {runs} tracked runs"))
}

fn full_cluster_instance(d: usize) -> (TriInstance, Cluster, TriangleSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
    let p = SparsePattern::full(d);
    let values = |rng: &mut ChaCha8Rng| -> Vec<Vec<i64>> {
        (0..d)
            .map(|_| (0..d).map(|_| rng.gen_range(-9..=9)).collect())
            .collect()
    };
    let a = SupportedMatrix::new(p.clone(), values(&mut rng));
    let b = SupportedMatrix::new(p.clone(), values(&mut rng));
    let inst = TriInstance::new(d, d, Semiring::Integer, a, b, p).unwrap();
    let idx: Vec<u32> = (0..d as u32).collect();
    let cluster = Cluster::new(d, idx.clone(), idx.clone(), idx).unwrap();
    let set = enumerate_triangles(&inst);
    (inst, cluster, set)
}

fn subquadratic_engine() -> Outcome {
    let ds = [8usize, 16, 32, 64];
    let measured: Vec<Result<u64, String>> = ds
        .par_iter()
        .map(|&d| {
            let (inst, cluster, set) = full_cluster_instance(d);
            let mut net = Network::new(&inst, 10_000_000, false);
            let mut acc = OutputAccumulator::new(&inst);
            let rounds = track(process_cluster_dense(
                &mut net,
                &cluster,
                &set,
                &mut acc,
                DenseEngine::Semiring3d,
            ))?;
            ensure(acc.values() == &multiply_oracle(&inst), || {
                format!("d={d}: wrong output")
            })?;
            Ok(rounds)
        })
        .collect();
    let rounds = measured.into_iter().collect::<Result<Vec<_>, _>>()?;
    let ratio = rounds[2] as f64 / rounds[0] as f64;
    let pts: Vec<(f64, f64)> = ds
        .iter()
        .zip(&rounds)
        .map(|(&d, &r)| (d as f64, r as f64))
        .collect();
    let slope = sparsemm_cli::experiment::loglog_slope(&pts).unwrap();
    let summary = format!("rounds {rounds:?} at d = {ds:?}, ratio(32/8) = {ratio:.2}, slope = {slope:.3}");
    ensure(ratio < 16.0 * 0.75, || summary.clone())?;
    ensure(slope < 1.9, || summary.clone())?;
    Ok(summary)
}

fn triangle_counting() -> Outcome {
    let config = PipelineConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in 0..20u64 {
        let n = rng.gen_range(8..=128usize);
        let d = rng.gen_range(2..=8usize);
        let graph = bounded_degree_graph(n, d, 1.0, &mut rng);
        let red = if g % 2 == 0 {
            graph.clone()
        } else {
            let mut edges: Vec<(u32, u32)> = graph.entries().filter(|&(u, v)| u < v).collect();
            edges.shuffle(&mut rng);
            edges.truncate(edges.len() * 3 / 4);
            symmetric_pattern(n, &edges).unwrap()
        };
        let (count, _) = track(count_triangles(&graph, &red, &config))?;
        let expect = count_triangles_exhaustive(&red);
        ensure(count == expect, || {
            format!("graph {g} (n={n}, d={d}): {count} != {expect}")
        })?;
    }
    let k4 = symmetric_pattern(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let (count, _) = track(count_triangles(&k4, &k4, &config))?;
    ensure(count == 4, || format!("K4 gave {count}"))?;
    Ok("20 random graphs match exhaustive enumeration, K4 = 4".into())
}

const DETERMINISM_SPEC: &str = r#"
name = "determinism"
repetitions = 2
sweep = [[32, 4], [64, 4], [64, 8], [48, 16]]

[generator]
kind = "planted-bad-node"
density = 0.75
semiring = "tropical"
seed = 17

[pipeline]
schedule = "simplified"
eps = 0.4
colors = 2
seed = 5
"#;

fn determinism() -> Outcome {
    let spec = ExperimentSpec::from_toml(DETERMINISM_SPEC).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let result = run_experiment(&spec).map_err(|e| e.to_string())?;
        ensure(result.all_ok(), || "non-exact verdict".into())?;
        let paths = write_outputs(&spec, &result, dir.path()).map_err(|e| e.to_string())?;
        let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| e.to_string());
        files.push((read(&paths.csv)?, read(&paths.summary)?, read(&paths.plot)?));
    }
    ensure(files[0] == files[1], || {
        "experiment files differ between runs".into()
    })?;

    let inst = gen(GeneratorKind::PlantedClusters, 64, 8, 0.8, Semiring::Integer, 3);
    let config = PipelineConfig {
        trace: true,
        seed: 11,
        ..PipelineConfig::default()
    };
    let a = track(multiply(&inst, &config))?;
    let b = track(multiply(&inst, &config))?;
    ensure(
        a.values == b.values && a.report == b.report && a.trace == b.trace,
        || "multiply differs between runs".into(),
    )?;
    ensure(a.report.to_csv() == b.report.to_csv(), || {
        "round CSV differs".into()
    })?;
    Ok(format!(
        "{} CSV bytes identical across runs; traces identical",
        files[0].0.len()
    ))
}

fn main() {
    let only: BTreeSet<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let start = Instant::now();
    let selected = |name: &str| only.is_empty() || only.iter().any(|o| name.contains(o.as_str()));
    let cases = if ["C3", "C4", "C5"].iter().any(|c| selected(c)) {
        decomposition_cases()
    } else {
        Vec::new()
    };
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        if selected(name) {
            let t = Instant::now();
            let outcome = f();
            let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
            let detail = match &outcome {
                Ok(s) | Err(s) => s.clone(),
            };
            println!("[{status}] {name}: {detail} ({:.1}s)", t.elapsed().as_secs_f64());
            results.push((name, outcome));
        }
    };
    run("C1 exactness", &mut exactness);
    run("C2 one-cluster bound", &mut one_cluster_size);
    run("C3 decomposition bounds", &mut || decomposition_bounds(&cases));
    run("C4 partition integrity", &mut || partition_integrity(&cases));
    run("C5 small-component bounds", &mut || {
        small_component_bounds(&cases)
    });
    run("C6 round ceilings", &mut round_ceilings);
    run("C8 sub-quadratic semiring3d", &mut subquadratic_engine);
    run("C9 triangle counting", &mut triangle_counting);
    run("C10 determinism", &mut determinism);
    run("C7 bandwidth invariant", &mut bandwidth_invariant);
    let failed = results.iter().filter(|(_, o)| o.is_err()).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
