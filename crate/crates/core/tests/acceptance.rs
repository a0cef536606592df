//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::collections::VecDeque;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risklens::baseline::{perturb_explain, PerturbationSpec, DEFAULT_SAMPLES};
use risklens::explain::{direction_of_risk, direction_of_risk_regression, trace_episode, TraceMode};
use risklens::graph::{GraphEdge, GraphNode, Metric, NodeId, TransitionGraph};
use risklens::render::{color, normalize_column, render_heatmap, value_of, write_trace_csv, Ppm};
use risklens::risk::{label_binary, label_binary_with, risk_init, risk_iterate, DeadEnds, ProbabilisticRisk};
use risklens::toyenvs::{cliff_generate, grid_generate, grid_rollout, Action, GridMap, Tile};
use risklens::{Distance, EpisodeTrace, FeatureSchema, FitOptions, Normalizer};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn unit_graph(reps: Vec<Vec<f64>>, fatal: &[bool], edges: &[(usize, usize, u64)]) -> TransitionGraph {
    let dim = reps[0].len();
    let nodes = reps
        .into_iter()
        .enumerate()
        .map(|(i, r)| GraphNode {
            id: NodeId(i as u32),
            representative: r,
            s_total: 1,
            s_fatal: u64::from(fatal[i]),
        })
        .collect();
    let edges = edges
        .iter()
        .map(|&(a, b, m)| GraphEdge {
            from: NodeId(a as u32),
            to: NodeId(b as u32),
            multiplicity: m,
        })
        .collect();
    TransitionGraph::from_parts(
        1e-9,
        Metric::Euclidean,
        FeatureSchema::new((0..dim).map(|d| format!("f{d}"))).unwrap(),
        Normalizer::from_bounds(vec![(0.0, 1.0); dim]).unwrap(),
        nodes,
        edges,
    )
    .unwrap()
}

fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p_edge: f64, p_fatal: f64) -> TransitionGraph {
    let reps = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
    let fatal: Vec<bool> = (0..n).map(|_| rng.gen_bool(p_fatal)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p_edge) {
                edges.push((a, b, rng.gen_range(1..4)));
            }
        }
    }
    unit_graph(reps, &fatal, &edges)
}

// ---------------------------------------------------------------------------
// 1. graph-build soundness

fn cliff_log(seed: u64) -> risklens::TransitionLog {
    let log = cliff_generate(400, 100, seed).unwrap().truncated(10_000);
    assert_eq!(log.transition_count(), 10_000);
    log
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut builds = 0;
    for seed in 0..100 {
        let log = cliff_log(seed);
        for eps in [0.05, 0.1, 0.2] {
            let (g, assigned) = TransitionGraph::build_with_assignments(&log, eps, Metric::Euclidean)
                .map_err(|e| e.to_string())?;
            let norm = g.normalizer();
            for (episode, ids) in log.episodes().iter().zip(&assigned) {
                for (record, id) in episode.records.iter().zip(ids) {
                    let s = norm.normalize(&record.state).unwrap();
                    let d = euclid(&s, g.representative(*id));
                    ensure!(d <= eps, "seed {seed} eps {eps}: state {d} from its representative");
                }
            }
            let reps: Vec<&[f64]> = (0..g.node_count()).map(|i| g.representative(NodeId(i as u32))).collect();
            for i in 0..reps.len() {
                for j in i + 1..reps.len() {
                    ensure!(
                        euclid(reps[i], reps[j]) > eps,
                        "seed {seed} eps {eps}: nodes {i},{j} closer than epsilon"
                    );
                }
            }
            let total: u64 = g.nodes().iter().map(|n| n.s_total).sum();
            let fatal: u64 = g.nodes().iter().map(|n| n.s_fatal).sum();
            let mult: u64 = g.edges().map(|e| e.multiplicity).sum();
            ensure!(total as usize == log.record_count(), "s_total sum {total}");
            ensure!(fatal as usize == log.fatal_count(), "s_fatal sum {fatal}");
            ensure!(mult as usize == log.transition_count(), "multiplicity sum {mult}");
            builds += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{builds} builds sound in {elapsed:.2?}"))
}

// ---------------------------------------------------------------------------
// 2. nearest-node exactness

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // half lattice points (to force ties), half uniform
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..5 {
                reps.push(vec![i as f64 / 9.0, j as f64 / 9.0, k as f64 / 4.0]);
            }
        }
    }
    while reps.len() < 1000 {
        reps.push((0..3).map(|_| rng.gen::<f64>()).collect());
    }
    let g = unit_graph(reps.clone(), &vec![false; 1000], &[]);
    let mut mismatches = 0;
    for q in 0..10_000 {
        let query: Vec<f64> = if q % 2 == 0 {
            (0..3).map(|_| rng.gen::<f64>()).collect()
        } else {
            vec![
                rng.gen_range(0..19) as f64 / 18.0,
                rng.gen_range(0..19) as f64 / 18.0,
                rng.gen_range(0..9) as f64 / 8.0,
            ]
        };
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, r) in reps.iter().enumerate() {
            let d = euclid(&query, r);
            if d < best.0 {
                best = (d, i);
            }
        }
        if g.find_node(&query).unwrap().index() != best.1 {
            mismatches += 1;
        }
    }
    ensure!(mismatches == 0, "{mismatches} of 10000 queries disagree with the linear scan");
    Ok("10000/10000 queries match linear scan".into())
}

// ---------------------------------------------------------------------------
// 3. binary fixed point

fn naive_fixed_point(g: &TransitionGraph, dead_ends: DeadEnds) -> Vec<bool> {
    let n = g.node_count();
    let mut risky = vec![false; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if risky[i] {
                continue;
            }
            let succ = g.successors(NodeId(i as u32));
            let rule = g.nodes()[i].s_fatal > 0
                || (succ.is_empty() && dead_ends == DeadEnds::Risky)
                || (!succ.is_empty() && succ.iter().all(|(k, _)| risky[k.index()]));
            if rule {
                risky[i] = true;
                changed = true;
            }
        }
        if !changed {
            return risky;
        }
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut risky_total = 0;
    for case in 0..100 {
        let n = rng.gen_range(1..=200);
        let g = random_digraph(&mut rng, n, 1.5 / n as f64, 0.05);
        for convention in [DeadEnds::Safe, DeadEnds::Risky] {
            let fast = label_binary_with(&g, convention);
            let slow = naive_fixed_point(&g, convention);
            ensure!(fast.flags() == slow.as_slice(), "case {case} ({convention:?}) differs");
            risky_total += fast.risky_count();
        }
        ensure!(label_binary(&g) == label_binary_with(&g, DeadEnds::Safe), "default convention");
    }
    Ok(format!("100 graphs x 2 conventions exact ({risky_total} risky labels)"))
}

// ---------------------------------------------------------------------------
// 4. probabilistic risk

fn criterion_4() -> Outcome {
    let g = unit_graph(vec![vec![0.0], vec![1.0]], &[false, true], &[(0, 1, 1)]);
    // s_total = 1 gives R0 = 1; set the hand example's 0.75 explicitly
    let r0 = ProbabilisticRisk {
        values: vec![0.0, 0.75],
        iterations: 0,
        learning_rate: 0.0,
    };
    let r1 = risk_iterate(&g, &r0, 0.01, 1).map_err(|e| e.to_string())?;
    ensure!((r1.values[0] - 0.0075).abs() < 1e-12, "R1(s) = {}", r1.values[0]);
    ensure!((r1.values[1] - 0.75).abs() < 1e-12, "R1(k) = {}", r1.values[1]);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..50 {
        let n = rng.gen_range(2..=150);
        let g = random_digraph(&mut rng, n, 2.0 / n as f64, 0.1);
        let l = rng.gen_range(0.001..0.999);
        let mut r = risk_init(&g);
        for it in 0..50 {
            r = risk_iterate(&g, &r, l, 1).map_err(|e| e.to_string())?;
            ensure!(
                r.values.iter().all(|v| (0.0..=1.0).contains(v)),
                "case {case} iteration {it} left [0,1]"
            );
        }
        let r50 = risk_iterate(&g, &risk_init(&g), l, 50).unwrap();
        ensure!(r50.values == r.values, "case {case}: batched iterations differ");
        let same = risk_iterate(&g, &r50, l, 0).unwrap();
        ensure!(same == r50, "case {case}: zero iterations changed values");
    }
    Ok("hand example exact, bounds and identity hold on 50 graphs".into())
}

// ---------------------------------------------------------------------------
// 5. direction-of-risk correctness

fn star(reps: Vec<Vec<f64>>, risky: &[bool]) -> TransitionGraph {
    let edges: Vec<_> = (1..reps.len()).map(|k| (0, k, 1)).collect();
    unit_graph(reps, risky, &edges)
}

fn ridge_oracle(xs: &[Vec<f64>], ys: &[f64], reg: f64) -> (Vec<f64>, f64) {
    let m = xs.len();
    let d = xs[0].len();
    let x = DMatrix::from_fn(m, d + 1, |i, j| if j < d { xs[i][j] } else { 1.0 });
    let y = DVector::from_column_slice(ys);
    let mut penalty = DMatrix::zeros(d + 1, d + 1);
    for j in 0..d {
        penalty[(j, j)] = reg * m as f64;
    }
    let lhs = x.transpose() * &x + penalty;
    let rhs = x.transpose() * y;
    let theta = lhs.lu().solve(&rhs).unwrap();
    (theta.rows(0, d).iter().copied().collect(), theta[d])
}

fn criterion_5() -> Outcome {
    let options = FitOptions::default();
    let mut matched = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let dim = rng.gen_range(1..=5);
        let normal: Vec<f64> = (0..dim)
            .map(|_| {
                let mag = rng.gen_range(0.5..1.0);
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let score = |x: &[f64]| normal.iter().zip(x).map(|(w, v)| w * (v - 0.5)).sum::<f64>();
        let mut reps = Vec::new();
        while reps.len() < 120 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            if score(&x).abs() > 0.05 {
                reps.push(x);
            }
        }
        let risky: Vec<bool> = reps.iter().map(|x| score(x) > 0.0).collect();
        let origin = reps[0].clone();
        let g = star(reps, &risky);
        let labels = label_binary(&g);
        let verdict = direction_of_risk(&g, &labels, &origin, 1, &options).map_err(|e| e.to_string())?;
        let e = verdict
            .explanation()
            .ok_or_else(|| format!("seed {seed}: no direction"))?;
        if e.g.iter().zip(&normal).all(|(a, b)| a.signum() == b.signum() && *a != 0.0) {
            matched += 1;
        }
    }
    ensure!(matched == 50, "sign pattern matched in {matched}/50 cases");

    // mirrored in dim 0, identical in dim 1
    let mut all = vec![vec![0.5, 0.4]];
    let mut flags = vec![false];
    for a in [0.1, 0.25, 0.4, 0.05, 0.3] {
        all.push(vec![0.5 + a, 0.4]);
        flags.push(true);
        all.push(vec![0.5 - a, 0.4]);
        flags.push(false);
    }
    let g = star(all, &flags);
    let v = direction_of_risk(&g, &label_binary(&g), &[0.5, 0.4], 1, &options).map_err(|e| e.to_string())?;
    let e = v.explanation().ok_or("mirrored set: no direction")?;
    ensure!(e.g[1].abs() <= 1e-9, "mirrored dimension weight {}", e.g[1]);
    ensure!(e.g[0] > 0.0, "mirrored set: g[0] = {}", e.g[0]);

    // regression vs closed-form ridge
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let reps: Vec<Vec<f64>> = (0..40).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
        let values: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
        let g = star(reps.clone(), &[false; 40]);
        let risk = ProbabilisticRisk {
            values: values.clone(),
            iterations: 0,
            learning_rate: 0.0,
        };
        for reg in [0.1, 0.0] {
            let opts = FitOptions { reg, ..options };
            let v = direction_of_risk_regression(&g, &risk, &reps[0], 1, &opts).map_err(|e| e.to_string())?;
            let e = v.explanation().ok_or("regression: no direction")?;
            let (w, b) = ridge_oracle(&reps, &values, reg);
            for (a, o) in e.g.iter().zip(&w) {
                worst = worst.max((a - o).abs());
            }
            worst = worst.max((e.bias - b).abs());
        }
    }
    ensure!(worst <= 1e-6, "ridge deviates by {worst:e}");
    Ok(format!(
        "signs 50/50, mirrored weight {:.1e}, ridge max deviation {worst:.1e}",
        e.g[1].abs()
    ))
}

// ---------------------------------------------------------------------------
// 6. minigrid contrast

fn flood_fill_cells(map: &GridMap) -> usize {
    let (sc, sr) = map.start();
    let mut seen = vec![vec![false; map.cols()]; map.rows()];
    seen[sr][sc] = true;
    let mut queue = VecDeque::from([(sc, sr)]);
    let mut count = 0;
    while let Some((c, r)) = queue.pop_front() {
        count += 1;
        let tile = map.tile(c, r).unwrap();
        if matches!(tile, Tile::Lava | Tile::Goal) {
            continue;
        }
        for (dc, dr) in [(0i64, 1i64), (1, 0), (0, -1), (-1, 0)] {
            let (nc, nr) = ((c as i64 + dc) as usize, (r as i64 + dr) as usize);
            if map.tile(nc, nr) != Some(Tile::Wall) && !seen[nr][nc] {
                seen[nr][nc] = true;
                queue.push_back((nc, nr));
            }
        }
    }
    count
}

fn blocked_corridor_graph() -> (GridMap, TransitionGraph) {
    let map = GridMap::blocked_corridor();
    let log = grid_generate(&map, 1000, 1000, 6).unwrap().truncated(100_000);
    assert_eq!(log.transition_count(), 100_000);
    let g = TransitionGraph::build(&log, 0.01, Metric::Euclidean).unwrap();
    (map, g)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (map, g) = blocked_corridor_graph();
    let cells = flood_fill_cells(&map);
    ensure!(g.node_count() == cells, "{} nodes vs {cells} reachable cells", g.node_count());
    let labels = label_binary(&g);
    ensure!(labels.risky_count() > 0, "no risky nodes at all");
    for n in 3..=10 {
        let v = direction_of_risk(&g, &labels, &[0.0, 0.0], n, &FitOptions::default()).map_err(|e| e.to_string())?;
        ensure!(v.is_no_direction(), "n = {n} found a direction: {v:?}");
    }
    let spec = PerturbationSpec::uniform(2, DEFAULT_SAMPLES);
    let base = perturb_explain(&[0.0, 0.0], g.schema().names(), &spec, &map, 0, &FitOptions::default())
        .map_err(|e| e.to_string())?;
    let e = base.explanation().ok_or("baseline found no direction")?;
    ensure!(e.g[0] > 0.0, "baseline g_x = {}", e.g[0]);
    ensure!(e.g[1].abs() <= 1e-9, "baseline g_y = {}", e.g[1]);
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{cells} nodes = flood fill, NoDirection for n=3..10, baseline g = ({:.4}, {:.1e}) in {elapsed:.2?}",
        e.g[0], e.g[1]
    ))
}

// ---------------------------------------------------------------------------
// 7. distance-to-risk traces

fn criterion_7() -> Outcome {
    let map = GridMap::straight_corridor();
    let log = grid_generate(&map, 300, 200, 7).unwrap();
    let g = TransitionGraph::build(&log, 0.01, Metric::Euclidean).unwrap();
    let labels = label_binary(&g);
    let mut actions = vec![Action::RotateLeft];
    actions.extend([Action::Forward; 20]);
    let walk = grid_rollout(&map, &actions).unwrap();
    let states: Vec<&[f64]> = walk.episodes()[0].states().collect();
    ensure!(walk.episodes()[0].records.last().unwrap().fatal, "walk did not reach lava");

    let trace = trace_episode(&g, &labels, &states, 3, 10, TraceMode::DistanceOnly, &FitOptions::default())
        .map_err(|e| e.to_string())?;
    let hops: Vec<u32> = trace
        .steps
        .iter()
        .map(|s| match s.distance {
            Distance::Hops(h) => Ok(h),
            Distance::CapExceeded => Err("unexpected cap".to_string()),
        })
        .collect::<Result<_, _>>()?;
    // step 0 -> 1 is the rotation; every later step is a forward move
    ensure!(hops[0] == hops[1], "rotation changed distance: {hops:?}");
    for w in hops[1..].windows(2) {
        ensure!(w[0] == w[1] + 1, "forward step did not decrease by one: {hops:?}");
    }
    ensure!(*hops.last().unwrap() == 0, "walk ends at {hops:?}");

    let capped = trace_episode(&g, &labels, &states, 3, 6, TraceMode::DistanceOnly, &FitOptions::default())
        .map_err(|e| e.to_string())?;
    ensure!(capped.steps[0].distance == Distance::CapExceeded, "start should exceed cap 6");
    let mut buf = Vec::new();
    write_trace_csv(&capped, &mut buf).map_err(|e| e.to_string())?;
    let text = String::from_utf8(buf).unwrap();
    let row = text.lines().nth(1).unwrap();
    ensure!(row.starts_with("0,6,true"), "capped row serialized as '{row}'");
    ensure!(text.lines().count() == states.len() + 1, "CSV rows");
    Ok(format!("distances {hops:?}; capped row '{row}'"))
}

// ---------------------------------------------------------------------------
// 8. heatmap

fn criterion_8(dir: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let features: Vec<String> = (0..24).map(|d| format!("f{d}")).collect();
    let steps = (0..1000)
        .map(|t| risklens::explain::TraceStep {
            distance: Distance::Hops(t % 7),
            g: match t % 50 {
                0 => None,
                1 => Some(vec![0.0; 24]),
                _ => Some((0..24).map(|_| rng.gen_range(-3.0..3.0)).collect()),
            },
        })
        .collect();
    let trace = EpisodeTrace {
        features,
        cap: 6,
        steps,
    };
    let img = render_heatmap(&trace, 5, &[]).map_err(|e| e.to_string())?;
    ensure!((img.width, img.height) == (1000, 120), "image is {}x{}", img.width, img.height);
    ensure!(color(-1.0) == [255, 0, 0] && color(1.0) == [0, 0, 255] && color(0.0) == [255, 255, 255], "endpoints");

    let path = dir.join("heat.ppm");
    img.save(&path).map_err(|e| e.to_string())?;
    let back = Ppm::load(&path).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (x, step) in trace.steps.iter().enumerate() {
        let expected = match &step.g {
            Some(g) => normalize_column(g),
            None => vec![0.0; 24],
        };
        let max = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step.g.as_ref().is_some_and(|g| g.iter().any(|v| *v != 0.0)) {
            ensure!(max == 1.0, "column {x} max-abs {max}");
        }
        for (f, v) in expected.iter().enumerate() {
            for dy in 0..5 {
                let px = back.pixel(x, f * 5 + dy);
                worst = worst.max((value_of(px) - v).abs());
            }
        }
    }
    ensure!(worst <= 1.0 / 255.0, "read-back error {worst}");
    Ok(format!("1000x120 image, read-back error {worst:.2e} <= 1/255"))
}

// ---------------------------------------------------------------------------
// 9. CLI determinism

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_risklens"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    std::fs::write(dir.join("map.txt"), GridMap::blocked_corridor().to_string()).unwrap();
    let walk = grid_rollout(&GridMap::blocked_corridor(), &[Action::RotateLeft, Action::RotateLeft, Action::Forward, Action::Forward])
        .unwrap();
    walk.save(dir.join("walk.jsonl")).unwrap();
    cli(dir, &["gen-grid", "--map", "map.txt", "--episodes", "200", "--max-steps", "300", "--seed", "11", "--out", "grid.jsonl"])?;
    cli(dir, &["gen-cliff", "--episodes", "50", "--max-steps", "100", "--seed", "11", "--out", "cliff.jsonl"])?;
    cli(dir, &["build-graph", "--log", "grid.jsonl", "--schema", "grid.schema.json", "--epsilon", "0.01", "--out", "g.json"])?;
    cli(dir, &["build-graph", "--log", "cliff.jsonl", "--schema", "cliff.schema.json", "--epsilon", "0.1", "--out", "c.json"])?;
    cli(dir, &["label-risk", "--graph", "g.json", "--mode", "binary"])?;
    cli(dir, &["label-risk", "--graph", "g.json", "--mode", "prob", "--l", "0.01", "--iters", "50"])?;
    cli(dir, &["label-risk", "--graph", "c.json", "--mode", "binary"])?;
    cli(dir, &["label-risk", "--graph", "c.json", "--mode", "prob"])?;
    cli(dir, &["explain", "--graph", "c.json", "--state", "0.8,0.5", "--depth", "3", "--out", "explain.json"])?;
    cli(dir, &["explain", "--graph", "c.json", "--state", "0.8,0.5", "--depth", "3", "--regression", "--denormalize", "--out", "explain_reg.json"])?;
    cli(dir, &["trace-risk", "--graph", "g.json", "--episode", "walk.jsonl", "--depth", "4", "--cap", "6", "--out", "trace.csv"])?;
    cli(dir, &["trace-risk", "--graph", "g.json", "--episode", "walk.jsonl", "--depth", "4", "--cap", "6", "--regression", "--out", "trace_reg.csv"])?;
    cli(dir, &["heatmap", "--trace", "trace_reg.csv", "--out", "heat.ppm"])?;
    cli(dir, &["compare-baseline", "--graph", "g.json", "--map", "map.txt", "--state", "0,0", "--depth", "10", "--seed", "3", "--out", "compare.json"])?;
    let names = [
        "grid.jsonl", "grid.schema.json", "cliff.jsonl", "g.json", "c.json", "explain.json",
        "explain_reg.json", "trace.csv", "trace_reg.csv", "heat.ppm", "compare.json",
    ];
    Ok(names
        .iter()
        .map(|n| (n.to_string(), std::fs::read(dir.join(n)).unwrap()))
        .collect())
}

fn criterion_9() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        ensure!(x == y, "{name} differs between runs");
    }
    let compare: serde_json::Value = serde_json::from_slice(&first.last().unwrap().1).unwrap();
    ensure!(compare["graph"]["no_direction"] == true, "compare-baseline graph side: {compare}");
    ensure!(compare["baseline"]["g"][0].as_f64().unwrap() > 0.0, "compare-baseline baseline side: {compare}");
    Ok(format!("{} output files byte-identical across runs", first.len()))
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 graph-build soundness", Box::new(criterion_1)),
        ("2 nearest-node exactness", Box::new(criterion_2)),
        ("3 binary risk fixed point", Box::new(criterion_3)),
        ("4 probabilistic risk", Box::new(criterion_4)),
        ("5 direction-of-risk correctness", Box::new(criterion_5)),
        ("6 minigrid contrast", Box::new(criterion_6)),
        ("7 distance-to-risk traces", Box::new(criterion_7)),
        ("8 heatmap", Box::new(|| criterion_8(scratch.path()))),
        ("9 CLI determinism", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
