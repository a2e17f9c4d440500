//! Deterministic sweeps over `(n, alpha, seed)` cells.

use std::io::{self, Write};

use cubeperc::cycles::find_cycles_near;
use cubeperc::embedding::{
    analytic_moments, build_good_map, count_open_paths, neighbor_distance_stats, GoodMapOutcome,
};
use cubeperc::hypercube::{enumerate_paths, make_partition, CoordinatePartition, CubeShape, PathFamilySpec, VertexId};
use cubeperc::metrics::{components, evaluate_distortion, DistortionMode, Exactness, Ratio, VertexMap};
use cubeperc::percolation::{sample, PercModel, PercolationSample, SampleMode};
use cubeperc::rng::{mix64, CounterRng};
use cubeperc::routing::{audit_locality, local_route, RouteBudget, RouteMode, RouteOutcome};
use rayon::prelude::*;

use crate::config::{ConfigError, Direction, Experiment, MapKind, RouteEndpoints, SweepConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Per-experiment sub-streams derived from a cell seed.
const STREAM_PAIRS: u64 = 1;
const STREAM_DISTORTION: u64 = 2;
const STREAM_CYCLES: u64 = 3;
const STREAM_ROUTES: u64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub alpha: f64,
    pub p: f64,
    pub seed_index: u64,
    pub seed: u64,
    /// Formatted experiment columns, empty when the cell failed.
    pub values: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn schema_line(&self) -> String {
        format!("# schema: cubeperc/{}/v{SCHEMA_VERSION}", self.kind)
    }

    pub fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["n", "alpha", "p", "seed_index", "seed"];
        h.extend(&self.columns);
        h.push("error");
        h
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.schema_line())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec = vec![
                row.n.to_string(),
                fmt_f(row.alpha),
                fmt_f(row.p),
                row.seed_index.to_string(),
                row.seed.to_string(),
            ];
            if row.values.is_empty() {
                rec.extend(self.columns.iter().map(|_| String::new()));
            } else {
                rec.extend(row.values.iter().cloned());
            }
            rec.push(row.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Fixed six-decimal formatting without negative zero.
pub fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn fmt_ratio(r: Ratio) -> String {
    r.to_string()
}

pub fn columns(experiment: &Experiment) -> Vec<&'static str> {
    match experiment {
        Experiment::NeighborDist { .. } => {
            vec!["median_adj_dist", "frac_le_cutoff", "overflow_frac", "giant_frac", "pairs_measured"]
        }
        Experiment::Distortion { .. } => {
            vec!["depth", "map_status", "bad_vertices", "d_plus", "d_minus", "distortion", "exact", "disconnected"]
        }
        Experiment::CycleCensus { .. } => {
            vec!["vertices", "near_cycle_frac", "mean_cycles", "shortest_cycle", "budget_exhausted"]
        }
        Experiment::Route { .. } => vec![
            "routes",
            "found",
            "not_found",
            "budget_exhausted",
            "median_queries",
            "mean_queries",
            "mean_path_len",
            "locality_ok",
        ],
        Experiment::Moments { .. } => vec![
            "family_size",
            "path_length",
            "analytic_mean",
            "second_moment",
            "second_moment_exact",
            "ratio_bound",
            "correction",
            "mc_mean",
            "mc_var",
            "mc_trials",
            "z_score",
        ],
    }
}

/// Seed of trial `i`.
pub fn trial_seed(base: u64, i: u64) -> u64 {
    mix64(base, i)
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepTable, ConfigError> {
    config.validate()?;
    let mut ns = config.n.clone();
    ns.sort_unstable();
    let mut alphas = config.alpha.clone();
    alphas.sort_by(f64::total_cmp);
    let cells: Vec<(u32, f64, u64)> = ns
        .iter()
        .flat_map(|&n| alphas.iter().flat_map(move |&a| (0..config.seeds.count).map(move |i| (n, a, i))))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(n, alpha, seed_index)| {
            let seed = trial_seed(config.seeds.base, seed_index);
            let p = (n as f64).powf(-alpha);
            let (values, error) = match run_cell(&config.experiment, n, alpha, p, seed) {
                Ok(v) => (v, None),
                Err(e) => (Vec::new(), Some(e)),
            };
            SweepRow { n, alpha, p, seed_index, seed, values, error }
        })
        .collect();
    Ok(SweepTable { kind: config.experiment.name(), columns: columns(&config.experiment), rows })
}

type CellResult = Result<Vec<String>, String>;

fn run_cell(experiment: &Experiment, n: u32, alpha: f64, p: f64, seed: u64) -> CellResult {
    let shape = CubeShape::new(n).map_err(|e| e.to_string())?;
    let model = PercModel::bond(p).map_err(|e| e.to_string())?;
    match *experiment {
        Experiment::NeighborDist { pairs, cutoff } => neighbor_dist(shape, model, seed, pairs, cutoff),
        Experiment::Distortion { map, depth, sampled_pairs } => {
            distortion(shape, model, alpha, seed, map, depth, sampled_pairs)
        }
        Experiment::CycleCensus { max_length, radius, budget, vertices } => {
            cycle_census(shape, model, seed, max_length, radius, budget, vertices)
        }
        Experiment::Route { routes, radius, queries, endpoints, direction } => {
            route(shape, model, seed, routes, RouteBudget { radius, queries }, endpoints, direction)
        }
        Experiment::Moments { l, trials } => moments(shape, alpha, p, seed, l, trials),
    }
}

fn materialized(shape: CubeShape, model: PercModel, seed: u64) -> Result<PercolationSample, String> {
    sample(shape, model, seed, SampleMode::Materialized).map_err(|e| e.to_string())
}

fn neighbor_dist(shape: CubeShape, model: PercModel, seed: u64, pairs: u64, cutoff: u32) -> CellResult {
    let s = materialized(shape, model, seed)?;
    let lab = components(&s);
    let stats = neighbor_distance_stats(&s, &lab, pairs, cutoff, mix64(seed, STREAM_PAIRS));
    Ok(vec![
        stats.median().map(|m| m.to_string()).unwrap_or_default(),
        fmt_f(stats.frac_le_cutoff()),
        fmt_f(stats.overflow_frac()),
        fmt_f(lab.giant_size() as f64 / shape.vertex_count() as f64),
        stats.pairs.to_string(),
    ])
}

fn distortion(
    shape: CubeShape,
    model: PercModel,
    alpha: f64,
    seed: u64,
    map: MapKind,
    depth: Option<u32>,
    sampled_pairs: Option<u64>,
) -> CellResult {
    let s = materialized(shape, model, seed)?;
    let (depth_col, built) = match map {
        MapKind::Identity => (String::new(), Ok(VertexMap::identity(shape))),
        MapKind::GoodMap => {
            let part = match depth {
                Some(l) => CoordinatePartition::with_depth(shape, l),
                None => make_partition(shape, alpha),
            }
            .map_err(|e| e.to_string())?;
            let built = match build_good_map(&s, &part) {
                GoodMapOutcome::Built(m) => Ok(m),
                GoodMapOutcome::Failed(report) => Err(report.bad_vertices.len()),
            };
            (part.depth().to_string(), built)
        }
    };
    let f = match built {
        Ok(f) => f,
        Err(bad) => {
            let empty = String::new;
            return Ok(vec![depth_col, "failed".into(), bad.to_string(), empty(), empty(), empty(), empty(), empty()]);
        }
    };
    let mode = match sampled_pairs {
        None => DistortionMode::Exact,
        Some(pairs) => DistortionMode::Sampled { pairs, seed: mix64(seed, STREAM_DISTORTION) },
    };
    let r = evaluate_distortion(&s, &f, mode).map_err(|e| e.to_string())?;
    Ok(vec![
        depth_col,
        "built".into(),
        "0".into(),
        fmt_ratio(r.d_plus),
        fmt_ratio(r.d_minus),
        fmt_f(r.distortion()),
        (r.exactness == Exactness::Exact).to_string(),
        r.is_infinite().to_string(),
    ])
}

fn cycle_census(
    shape: CubeShape,
    model: PercModel,
    seed: u64,
    max_length: u32,
    radius: u32,
    budget: u64,
    vertices: u64,
) -> CellResult {
    let s = sample(shape, model, seed, SampleMode::Lazy).map_err(|e| e.to_string())?;
    let mut rng = CounterRng::new(mix64(seed, STREAM_CYCLES));
    let starts: Vec<VertexId> = (0..vertices).map(|_| VertexId(rng.below(shape.vertex_count()) as u32)).collect();
    let results = starts
        .par_iter()
        .map(|&v| find_cycles_near(&s, v, max_length, radius, budget))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let near = results.iter().filter(|r| !r.cycles.is_empty()).count();
    let total: usize = results.iter().map(|r| r.cycles.len()).sum();
    let shortest = results.iter().flat_map(|r| r.cycles.iter().map(|c| c.len())).min();
    let exhausted = results.iter().filter(|r| r.budget_exhausted).count();
    Ok(vec![
        vertices.to_string(),
        fmt_f(near as f64 / vertices as f64),
        fmt_f(total as f64 / vertices as f64),
        shortest.map(|l| l.to_string()).unwrap_or_default(),
        exhausted.to_string(),
    ])
}

fn route(
    shape: CubeShape,
    model: PercModel,
    seed: u64,
    routes: u64,
    budget: RouteBudget,
    endpoints: RouteEndpoints,
    direction: Direction,
) -> CellResult {
    let s = materialized(shape, model, seed)?;
    let lab = components(&s);
    let giant = lab.members(lab.giant().ok_or("empty sample")?);
    let mut rng = CounterRng::new(mix64(seed, STREAM_ROUTES));
    let pairs = route_endpoints(&giant, &lab, shape, routes, endpoints, &mut rng)?;
    let mode = match direction {
        Direction::Bidirectional => RouteMode::Bidirectional,
        Direction::OneSided => RouteMode::OneSided,
    };
    let traces: Vec<_> = pairs.par_iter().map(|&(x, y)| local_route(&s, x, y, budget, mode)).collect();
    let mut queries: Vec<u64> = traces.iter().map(|t| t.queries).collect();
    queries.sort_unstable();
    let count = |want: fn(&RouteOutcome) -> bool| traces.iter().filter(|t| want(&t.outcome)).count();
    let found = count(|o| matches!(o, RouteOutcome::Found(_)));
    let lengths: Vec<u32> = traces.iter().filter_map(|t| t.path_length()).collect();
    let mean_len =
        if lengths.is_empty() { f64::NAN } else { lengths.iter().sum::<u32>() as f64 / lengths.len() as f64 };
    let locality_ok = traces.iter().all(|t| audit_locality(t).is_ok());
    Ok(vec![
        routes.to_string(),
        found.to_string(),
        count(|o| matches!(o, RouteOutcome::NotFound)).to_string(),
        count(|o| matches!(o, RouteOutcome::BudgetExhausted)).to_string(),
        queries[(queries.len() - 1) / 2].to_string(),
        fmt_f(queries.iter().sum::<u64>() as f64 / queries.len() as f64),
        fmt_f(mean_len),
        locality_ok.to_string(),
    ])
}

/// Endpoint pairs inside the giant component, drawn from `rng`.
pub fn route_endpoints(
    giant: &[VertexId],
    lab: &cubeperc::metrics::ComponentLabeling,
    shape: CubeShape,
    routes: u64,
    endpoints: RouteEndpoints,
    rng: &mut CounterRng,
) -> Result<Vec<(VertexId, VertexId)>, String> {
    let pick = |rng: &mut CounterRng| giant[rng.below(giant.len() as u64) as usize];
    let mut pairs = Vec::with_capacity(routes as usize);
    match endpoints {
        RouteEndpoints::Random => {
            for _ in 0..routes {
                let x = pick(rng);
                pairs.push((x, pick(rng)));
            }
        }
        RouteEndpoints::Adjacent => {
            let mut attempts = 0u64;
            while (pairs.len() as u64) < routes {
                attempts += 1;
                if attempts > 64 * routes {
                    return Err("giant component has too few adjacent pairs".into());
                }
                let x = pick(rng);
                let y = x.flip(rng.below(shape.dimension() as u64) as u32);
                if lab.in_giant(y) {
                    pairs.push((x, y));
                }
            }
        }
    }
    Ok(pairs)
}

fn moments(shape: CubeShape, alpha: f64, p: f64, seed: u64, l: u32, trials: u64) -> CellResult {
    let spec = PathFamilySpec::neighbor_retrace(shape, VertexId(0), VertexId(1), l);
    let est = analytic_moments(&spec, p).map_err(|e| e.to_string())?;
    let family = enumerate_paths(&spec).map_err(|e| e.to_string())?;
    let model = PercModel::bond(p).map_err(|e| e.to_string())?;
    let counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = sample(shape, model, mix64(seed, t), SampleMode::Lazy).expect("lazy samples have no cap");
            count_open_paths(&s, &family)
        })
        .collect();
    let k = trials as f64;
    let mc_mean = counts.iter().sum::<u64>() as f64 / k;
    let mc_var = if trials > 1 {
        counts.iter().map(|&c| (c as f64 - mc_mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let se = (est.variance() / k).sqrt();
    let z = if se > 0.0 { (mc_mean - est.mean) / se } else { 0.0 };
    let n = shape.dimension() as f64;
    let correction = if est.mean > 0.0 {
        (est.second_moment_value() / (est.mean * est.mean) - 1.0) * n.powf(1.0 - 2.0 * alpha)
    } else {
        f64::NAN
    };
    Ok(vec![
        est.family_size.to_string(),
        est.path_length.to_string(),
        fmt_f(est.mean),
        fmt_f(est.second_moment_value()),
        est.second_moment_exact().is_some().to_string(),
        fmt_f(est.ratio_bound),
        fmt_f(correction),
        fmt_f(mc_mean),
        fmt_f(mc_var),
        trials.to_string(),
        fmt_f(z),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Seeds;

    fn config(n: Vec<u32>, alpha: Vec<f64>, count: u64, experiment: Experiment) -> SweepConfig {
        SweepConfig { n, alpha, seeds: Seeds { base: 7, count }, experiment, max_n: None }
    }

    #[test]
    fn empty_alpha_gives_header_only() {
        let t = run_sweep(&config(vec![10], vec![], 3, Experiment::NeighborDist { pairs: 10, cutoff: 9 })).unwrap();
        let csv = t.to_csv_string();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("# schema: cubeperc/neighbor_dist/v1\n"));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "n,alpha,p,seed_index,seed,median_adj_dist,frac_le_cutoff,overflow_frac,giant_frac,pairs_measured,error"
        );
    }

    #[test]
    fn rows_are_ordered_and_counted() {
        let t = run_sweep(&config(vec![10, 8], vec![0.75, 0.25], 3, Experiment::NeighborDist { pairs: 50, cutoff: 9 }))
            .unwrap();
        assert_eq!(t.rows.len(), 12);
        let keys: Vec<_> = t.rows.iter().map(|r| (r.n, r.alpha.to_bits(), r.seed_index)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| (a.0, f64::from_bits(a.1), a.2).partial_cmp(&(b.0, f64::from_bits(b.1), b.2)).unwrap());
        assert_eq!(keys, sorted);
        assert!(t.rows.iter().all(|r| r.seed == mix64(7, r.seed_index)));
    }

    #[test]
    fn moment_schema_and_cell_errors() {
        let t = run_sweep(&config(vec![16], vec![0.25], 1, Experiment::Moments { l: 2, trials: 200 })).unwrap();
        for col in ["analytic_mean", "mc_mean", "mc_trials", "z_score"] {
            assert!(t.columns.contains(&col));
        }
        assert!(!t.has_errors());
        // A depth too large for the cube is a per-cell error, not a config error.
        let e = Experiment::Distortion { map: MapKind::GoodMap, depth: Some(5), sampled_pairs: None };
        let t = run_sweep(&config(vec![6], vec![0.2], 2, e)).unwrap();
        assert!(t.has_errors());
        assert_eq!(t.to_csv_string().lines().count(), 4);
    }

    #[test]
    fn formatting_is_fixed() {
        assert_eq!(fmt_f(0.5), "0.500000");
        assert_eq!(fmt_f(-0.0000001), "0.000000");
        assert_eq!(fmt_f(f64::INFINITY), "inf");
    }
}
