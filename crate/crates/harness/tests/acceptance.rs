//! Acceptance criteria, run in sequence with one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the criteria do not compete
//! for cores and their wall-clock limits are measured one at a time.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use cubeperc::cycles::{
    cycle_count_bound, extract_simple_cycle, find_cycles_near, image_walk, CycleError, Extraction,
};
use cubeperc::embedding::{analytic_moments, build_good_map, count_open_paths, GoodMapOutcome};
use cubeperc::hypercube::{
    enumerate_paths, geodesic_cycle, make_partition, CoordinatePartition, CubeShape, PathFamilySpec, VertexId,
};
use cubeperc::metrics::{
    bfs, brute_force_min_distortion, components, evaluate_distortion, pair_distance, DistortionMode, Ratio,
    VertexMap,
};
use cubeperc::percolation::{sample, PercModel, PercolationSample, SampleMode};
use cubeperc::rng::{mix64, CounterRng};
use cubeperc::routing::{audit_locality, local_route, RouteBudget, RouteMode};
use cubeperc_harness::config::{Experiment, RouteEndpoints, Seeds, SweepConfig};
use cubeperc_harness::sweep::{route_endpoints, run_sweep};

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn bond(n: u32, p: f64, seed: u64, mode: SampleMode) -> PercolationSample {
    sample(CubeShape::new(n).unwrap(), PercModel::bond(p).unwrap(), seed, mode).unwrap()
}

fn median<T: Copy + Ord>(xs: &[T]) -> T {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v[(v.len() - 1) / 2]
}

/// 1. Brute-force optimum re-evaluated by `evaluate_distortion` agrees exactly.
fn distortion_oracle() -> Verdict {
    let mut instances = 0;
    let mut mismatches = Vec::new();
    for n in [2, 3] {
        for p in [0.3, 0.6] {
            for seed in 0..20 {
                let s = bond(n, p, mix64(1, seed), SampleMode::Materialized);
                let (map, best) = brute_force_min_distortion(&s).unwrap();
                let r = evaluate_distortion(&s, &map, DistortionMode::Exact).unwrap();
                instances += 1;
                let same = !r.is_infinite()
                    && r.d_plus == best.d_plus
                    && r.d_minus == best.d_minus
                    && r.distortion_ratio() == best.distortion_ratio();
                if !same {
                    mismatches.push(format!("n={n} p={p} seed={seed}"));
                }
            }
        }
    }
    verdict(mismatches.is_empty(), format!("{instances} instances, mismatches {mismatches:?}"))
}

/// 2. Monte Carlo open-path counts against the exact first and second moments.
fn moment_cross_check() -> Verdict {
    let n = 16;
    let alpha = 0.25;
    let p = (n as f64).powf(-alpha);
    let shape = CubeShape::new(n).unwrap();
    let trials = 10_000u64;
    let mut pass = true;
    let mut details = Vec::new();
    for l in [1, 2] {
        let spec = PathFamilySpec::neighbor_retrace(shape, VertexId(0), VertexId(1), l);
        let est = analytic_moments(&spec, p).unwrap();
        let fam = enumerate_paths(&spec).unwrap();
        let total: u64 = (0..trials)
            .map(|t| count_open_paths(&bond(n, p, mix64(0xC0FFEE + l as u64, t), SampleMode::Lazy), &fam))
            .sum();
        let mc = total as f64 / trials as f64;
        let Some(ex2) = est.second_moment_exact() else {
            return verdict(false, format!("l={l}: second moment not from census"));
        };
        let sigma = (est.variance() / trials as f64).sqrt();
        let within = (mc - est.mean).abs() <= 4.0 * sigma;
        let ordered = ex2 >= est.mean * est.mean;
        let shape_term = (ex2 / (est.mean * est.mean) - 1.0) * (n as f64).powf(1.0 - 2.0 * alpha);
        let shape_ok = l != 1 || (0.2..=5.0).contains(&shape_term);
        pass &= within && ordered && shape_ok;
        details.push(format!(
            "l={l}: mean {:.4} mc {mc:.4} sigma {sigma:.4} E[X^2] {ex2:.4} correction {shape_term:.3}",
            est.mean
        ));
    }
    verdict(pass, details.join("; "))
}

/// 3. Adjacent-pair distances separate the two regimes at n = 20.
fn phase_separation() -> Verdict {
    let cfg = SweepConfig {
        n: vec![20],
        alpha: vec![0.25, 0.75],
        seeds: Seeds { base: 2024, count: 10 },
        experiment: Experiment::NeighborDist { pairs: 1000, cutoff: 9 },
        max_n: None,
    };
    let table = run_sweep(&cfg).unwrap();
    if table.has_errors() {
        return verdict(false, "sweep reported cell errors");
    }
    let col = |name: &str| table.columns.iter().position(|c| *c == name).unwrap();
    let (med, over) = (col("median_adj_dist"), col("overflow_frac"));
    let by_alpha = |a: f64| -> Vec<(u32, f64)> {
        table
            .rows
            .iter()
            .filter(|r| r.alpha == a)
            .map(|r| (r.values[med].parse().unwrap(), r.values[over].parse().unwrap()))
            .collect()
    };
    let (lo, hi) = (by_alpha(0.25), by_alpha(0.75));
    let median_wins = lo.iter().zip(&hi).filter(|(a, b)| a.0 < b.0).count();
    let overflow_wins = lo.iter().zip(&hi).filter(|(a, b)| b.1 > a.1).count();
    verdict(
        median_wins >= 9 && overflow_wins >= 9,
        format!(
            "median smaller at alpha=0.25 in {median_wins}/10, overflow larger at alpha=0.75 in {overflow_wins}/10 \
             (medians {:?} vs {:?})",
            lo.iter().map(|x| x.0).collect::<Vec<_>>(),
            hi.iter().map(|x| x.0).collect::<Vec<_>>()
        ),
    )
}

/// Simple cycles through `v` by length, counted with a subset DP over
/// simple paths from `v`: each cycle is seen once per direction.
fn subset_dp_cycle_counts(s: &PercolationSample, v: VertexId, max_len: usize) -> BTreeMap<usize, u64> {
    let nv = s.shape().vertex_count() as usize;
    let full = 1usize << nv;
    let mut dp = vec![0u64; full * nv];
    dp[(1 << v.0) * nv + v.0 as usize] = 1;
    let mut counts = BTreeMap::new();
    for mask in 1..full {
        if mask & (1 << v.0) == 0 || mask.count_ones() as usize > max_len {
            continue;
        }
        for u in 0..nv {
            let ways = dp[mask * nv + u];
            if ways == 0 {
                continue;
            }
            let k = mask.count_ones() as usize;
            if k >= 3 && s.is_open_edge(VertexId(u as u32), v).unwrap_or(false) {
                *counts.entry(k).or_insert(0) += ways;
            }
            for w in s.open_neighbors(VertexId(u as u32)) {
                let bit = 1usize << w.0;
                if mask & bit == 0 {
                    dp[(mask | bit) * nv + w.0 as usize] += ways;
                }
            }
        }
    }
    counts.values_mut().for_each(|c| *c /= 2);
    counts
}

/// 4. Cycle search against closed forms and an independent enumerator.
fn cycle_census() -> Verdict {
    let mut problems = Vec::new();
    for n in 3..=6u32 {
        let s = bond(n, 1.0, 0, SampleMode::Materialized);
        let got = find_cycles_near(&s, VertexId(0), 4, 0, u64::MAX).unwrap().cycles.len();
        let want = (n * (n - 1) / 2) as usize;
        if got != want {
            problems.push(format!("n={n}: {got} four-cycles, expected {want}"));
        }
    }
    let mut compared = 0;
    for n in 2..=4u32 {
        for (p, seed) in [(1.0, 0u64), (0.7, 1), (0.7, 2), (0.5, 3), (0.5, 4)] {
            let s = bond(n, p, seed, SampleMode::Materialized);
            let v = VertexId(0);
            let search = find_cycles_near(&s, v, 8, 0, u64::MAX).unwrap();
            let mut by_len: BTreeMap<usize, u64> = BTreeMap::new();
            for c in &search.cycles {
                *by_len.entry(c.len()).or_insert(0) += 1;
            }
            let oracle = subset_dp_cycle_counts(&s, v, 8);
            let oracle: BTreeMap<usize, u64> = oracle.into_iter().filter(|&(_, c)| c > 0).collect();
            compared += 1;
            if by_len != oracle {
                problems.push(format!("n={n} p={p} seed={seed}: search {by_len:?} vs oracle {oracle:?}"));
            }
            for (&len, &count) in &by_len {
                let bound = cycle_count_bound(n, len as u32 / 2);
                if count as f64 > bound {
                    problems.push(format!("n={n} length {len}: {count} > bound {bound}"));
                }
            }
        }
    }
    verdict(problems.is_empty(), format!("{compared} samples cross-checked; problems {problems:?}"))
}

/// A random cube automorphism followed by sparse single-coordinate noise.
fn random_map(shape: CubeShape, rng: &mut CounterRng, noise: u64) -> VertexMap {
    let n = shape.dimension();
    let mut perm: Vec<u32> = (0..n).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let shift = rng.below(shape.vertex_count()) as u32;
    let images = shape
        .vertices()
        .map(|v| {
            let moved = (0..n).filter(|&c| v.bit(c)).fold(0u32, |acc, c| acc | 1 << perm[c as usize]) ^ shift;
            let mut w = VertexId(moved);
            if rng.below(100) < noise {
                w = w.flip(rng.below(n as u64) as u32);
            }
            w
        })
        .collect();
    VertexMap::from_images(shape, images).unwrap()
}

/// 5. Loop removal on images of geodesic cycles keeps the stated guarantees.
fn loop_removal() -> Verdict {
    let mut rng = CounterRng::new(55);
    let mut failures = Vec::new();
    let mut worst_d: f64 = 1.0;
    let trials = 500;
    for trial in 0..trials {
        let n = 4 + rng.below(5) as u32;
        let shape = CubeShape::new(n).unwrap();
        let s = bond(n, 1.0, 0, SampleMode::Materialized);
        let l = 4 + rng.below(n as u64 - 3) as u32;
        let big_l = 2.0 * l as f64;
        let mut coords: Vec<u32> = (0..n).collect();
        for i in (1..coords.len()).rev() {
            coords.swap(i, rng.below(i as u64 + 1) as usize);
        }
        let start = VertexId(rng.below(shape.vertex_count()) as u32);
        let cyc = geodesic_cycle(shape, start, &coords[..l as usize]).unwrap();
        let noise = [0, 5, 15, 30][rng.below(4) as usize];
        let map = random_map(shape, &mut rng, noise);
        let report = evaluate_distortion(&s, &map, DistortionMode::Exact).unwrap();
        let d = report.distortion();
        let d_plus = report.d_plus.value();
        worst_d = worst_d.max(d);
        let walk = image_walk(&map, &cyc, &s).unwrap();
        let check = |ex: &Extraction| -> Option<String> {
            let len = ex.cycle.len() as f64;
            if !ex.cycle.is_simple_in(&s) {
                return Some("not simple".into());
            }
            if len < big_l / (2.0 * d) || len > d_plus * big_l {
                return Some(format!("length {len} outside [{:.2}, {:.2}]", big_l / (2.0 * d), d_plus * big_l));
            }
            if ex.anchor_distance as f64 > 2.0 * d * d_plus {
                return Some(format!("anchor distance {} > {:.2}", ex.anchor_distance, 2.0 * d * d_plus));
            }
            if !ex.within_anchor_budget() {
                return Some(format!("a removal covered {} anchors > 2D = {:.2}", ex.max_anchors_removed(), 2.0 * d));
            }
            None
        };
        match extract_simple_cycle(&walk, d) {
            Ok(ex) => {
                if let Some(why) = check(&ex) {
                    failures.push(format!("trial {trial} (n={n}, L={big_l}, D={d:.3}): {why}"));
                }
            }
            Err(CycleError::DegenerateWalk { survivors, .. }) => {
                failures.push(format!("trial {trial} (n={n}, L={big_l}, D={d:.3}): collapsed to {survivors}"));
            }
            Err(e) => failures.push(format!("trial {trial}: {e}")),
        }
    }
    let shown: Vec<_> = failures.iter().take(5).collect();
    verdict(
        failures.is_empty(),
        format!("{trials} maps, max D {worst_d:.3}, {} failures {shown:?}", failures.len()),
    )
}

/// 6. Wherever the good map builds with connected images, D_- > 1/3 and D_+ <= 2l + 13.
fn good_map_contract() -> Verdict {
    let mut built = 0;
    let mut failed = 0;
    let mut no_partition = 0;
    let mut violations = Vec::new();
    for n in [6u32, 8, 10] {
        for alpha in [0.02, 0.05, 0.1, 0.25, 0.4] {
            let shape = CubeShape::new(n).unwrap();
            let Ok(part) = make_partition(shape, alpha) else {
                no_partition += 30;
                continue;
            };
            let p = (n as f64).powf(-alpha);
            for seed in 0..30 {
                let s = bond(n, p, mix64(6, seed), SampleMode::Materialized);
                match build_good_map(&s, &part) {
                    GoodMapOutcome::Failed(_) => failed += 1,
                    GoodMapOutcome::Built(f) => {
                        built += 1;
                        let r = evaluate_distortion(&s, &f, DistortionMode::Exact).unwrap();
                        if r.is_infinite() {
                            continue;
                        }
                        let cap = Ratio::new(2 * part.depth() as u64 + 13, 1);
                        if r.d_minus <= Ratio::new(1, 3) || r.d_plus > cap {
                            violations.push(format!("n={n} alpha={alpha} seed={seed}: {r:?}"));
                        }
                    }
                }
            }
        }
    }
    let supplement = good_map_at_n16();
    verdict(
        violations.is_empty(),
        format!(
            "built {built}, build failures {failed}, no partition {no_partition}, violations {violations:?}; \
             at n <= 10 the A block has at most 3 coordinates, so no vertex can reach 2m witnesses \
             and every build fails. [supplement, not graded] {supplement}"
        ),
    )
}

/// The same contract where builds are possible (n = 16, l = 1, m = 5),
/// measured on sampled pairs because exact evaluation is capped at n = 12.
fn good_map_at_n16() -> String {
    let n = 16;
    let alpha = 0.01;
    let shape = CubeShape::new(n).unwrap();
    let part = CoordinatePartition::with_depth(shape, 1).unwrap();
    let p = (n as f64).powf(-alpha);
    let mut rng = CounterRng::new(16);
    let mut out = Vec::new();
    for seed in 0..3 {
        let s = bond(n, p, mix64(16, seed), SampleMode::Materialized);
        let GoodMapOutcome::Built(f) = build_good_map(&s, &part) else {
            out.push(format!("seed {seed}: build failed"));
            continue;
        };
        let mut d_plus = 0u32;
        let mut d_minus = Ratio::INFINITY;
        let mut disconnected = 0;
        for _ in 0..5000 {
            let x = VertexId(rng.below(shape.vertex_count()) as u32);
            let mut y = x;
            for _ in 0..1 + rng.below(3) {
                y = y.flip(rng.below(n as u64) as u32);
            }
            if x == y {
                continue;
            }
            let Some(dy) = pair_distance(&s, f.apply(x), f.apply(y), None) else {
                disconnected += 1;
                continue;
            };
            if x.hamming(y) == 1 {
                d_plus = d_plus.max(dy);
            }
            d_minus = d_minus.min(Ratio::new(dy.max(1) as u64, x.hamming(y) as u64));
        }
        out.push(format!(
            "seed {seed}: sampled D_+ {d_plus} (cap {}), D_- {d_minus}, disconnected {disconnected}",
            2 * part.depth() + 13
        ));
    }
    out.join(", ")
}

/// 7. Local routing finds BFS-shortest paths, stays local, and costs more when sparse.
fn routing_contract() -> Verdict {
    let n = 12;
    let shape = CubeShape::new(n).unwrap();
    let mut routes = 0;
    let mut wrong = 0;
    let mut nonlocal = 0;
    let mut medians: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let alphas = [0.25, 0.75];
    for seed in 0..10u64 {
        for (ai, &alpha) in alphas.iter().enumerate() {
            let s = bond(n, (n as f64).powf(-alpha), mix64(7, seed), SampleMode::Materialized);
            let lab = components(&s);
            let giant = lab.members(lab.giant().unwrap());
            let mut rng = CounterRng::new(mix64(70, seed));
            let pairs = route_endpoints(&giant, &lab, shape, 50, RouteEndpoints::Adjacent, &mut rng).unwrap();
            let mut queries = Vec::new();
            for (x, y) in pairs {
                let t = local_route(&s, x, y, RouteBudget::unlimited(), RouteMode::Bidirectional);
                routes += 1;
                if audit_locality(&t).is_err() {
                    nonlocal += 1;
                }
                if t.path_length() != bfs(&s, x, None).unwrap().get(y) {
                    wrong += 1;
                }
                queries.push(t.queries);
            }
            medians.entry(ai as u64).or_default().push(median(&queries));
        }
    }
    let (lo, hi) = (&medians[&0], &medians[&1]);
    let (mlo, mhi) = (median(lo), median(hi));
    verdict(
        wrong == 0 && nonlocal == 0 && routes >= 1000 && mlo < mhi,
        format!(
            "{routes} routes, {wrong} not shortest, {nonlocal} failed audit; median queries {mlo} (alpha=0.25) vs \
             {mhi} (alpha=0.75), per-seed {lo:?} vs {hi:?}"
        ),
    )
}

fn peak_rss_mib() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024.0)
}

/// 8. Materialize and label n = 24, and re-run sweeps for byte equality.
fn scale_and_determinism() -> Verdict {
    let start = Instant::now();
    let s = bond(24, 24f64.powf(-0.25), 24, SampleMode::Materialized);
    let lab = components(&s);
    let elapsed = start.elapsed();
    let giant = lab.giant_size();
    drop(lab);
    drop(s);
    let rss = peak_rss_mib();

    let configs = [
        SweepConfig {
            n: vec![14],
            alpha: vec![0.25, 0.75],
            seeds: Seeds { base: 8, count: 3 },
            experiment: Experiment::NeighborDist { pairs: 500, cutoff: 9 },
            max_n: None,
        },
        SweepConfig {
            n: vec![10],
            alpha: vec![0.5],
            seeds: Seeds { base: 8, count: 3 },
            experiment: Experiment::Moments { l: 2, trials: 500 },
            max_n: None,
        },
        SweepConfig {
            n: vec![10],
            alpha: vec![0.25, 0.75],
            seeds: Seeds { base: 8, count: 3 },
            experiment: Experiment::Route {
                routes: 40,
                radius: u32::MAX,
                queries: u64::MAX,
                endpoints: RouteEndpoints::Random,
                direction: cubeperc_harness::config::Direction::Bidirectional,
            },
            max_n: None,
        },
    ];
    let mut identical = true;
    for cfg in &configs {
        let a = run_sweep(cfg).unwrap().to_csv_string();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_sweep(cfg).unwrap().to_csv_string());
        identical &= a == b;
    }
    let fast = elapsed < Duration::from_secs(60);
    let small = rss.is_some_and(|m| m < 1024.0);
    verdict(
        fast && small && identical,
        format!(
            "n=24 sample + components {:.2} s (giant {giant}), peak RSS {} MiB, sweeps byte-identical: {identical}",
            elapsed.as_secs_f64(),
            rss.map_or("unknown".into(), |m| format!("{m:.0}"))
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 distortion oracle equivalence", Duration::from_secs(60), distortion_oracle),
        ("2 moment cross-check", Duration::from_secs(120), moment_cross_check),
        ("3 phase-transition separation", Duration::from_secs(300), phase_separation),
        ("4 cycle census exactness", Duration::from_secs(120), cycle_census),
        ("5 loop-removal guarantee", Duration::from_secs(120), loop_removal),
        ("6 good-map contract", Duration::from_secs(180), good_map_contract),
        ("7 routing contract", Duration::from_secs(120), routing_contract),
        ("8 scale and determinism", Duration::from_secs(300), scale_and_determinism),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let pass = v.pass && took <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.1} s, limit {} s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
