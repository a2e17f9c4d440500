use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cubeperc::hypercube::CubeShape;
use cubeperc::metrics::components;
use cubeperc::percolation::{sample_with_cap, PercModel, SampleMode};
use cubeperc_harness::config::{ConfigError, Direction, Experiment, MapKind, RouteEndpoints, Seeds, SweepConfig};
use cubeperc_harness::golden::{bless_goldens, verify_goldens, GoldenError};
use cubeperc_harness::sweep::{fmt_f, run_sweep};

#[derive(Parser)]
#[command(name = "cubeperc", version, about = "Percolation experiments on the hypercube")]
struct Cli {
    /// Base seed; trial i uses mix64(seed, i).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout; required by `sample`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Largest dimension accepted.
    #[arg(long, global = true)]
    max_n: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Bond,
    Site,
    Mixed,
}

#[derive(Args)]
struct Grid {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
    /// Exponents with p = n^-alpha, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Seeds per (n, alpha) cell.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample, print its summary and write it in binary form to --out.
    Sample {
        #[arg(long)]
        n: u32,
        #[arg(long, conflicts_with = "p")]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = ModelArg::Bond)]
        model: ModelArg,
        /// Site probability for the mixed model.
        #[arg(long)]
        p_site: Option<f64>,
    },
    /// Run the sweep described by a TOML config.
    Sweep { config: PathBuf },
    /// Distortion of the good map (or the identity).
    Distort {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = MapArg::GoodMap)]
        map: MapArg,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        sampled_pairs: Option<u64>,
    },
    /// Short open cycles near random vertices.
    Cycles {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 8)]
        max_length: u32,
        #[arg(long, default_value_t = 0)]
        radius: u32,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 100)]
        vertices: u64,
    },
    /// Local-model routing inside the giant component.
    Route {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 100)]
        routes: u64,
        #[arg(long, default_value_t = u32::MAX)]
        radius: u32,
        #[arg(long, default_value_t = u64::MAX)]
        queries: u64,
        /// Pick endpoints uniformly instead of as cube neighbours.
        #[arg(long)]
        random_endpoints: bool,
        #[arg(long)]
        one_sided: bool,
    },
    /// Open-path counts against their analytic moments.
    Moments {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Check golden CSVs in a directory holding goldens.toml.
    Verify {
        dir: PathBuf,
        /// Rewrite the expected files instead of checking them.
        #[arg(long)]
        bless: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    GoodMap,
    Identity,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<ConfigError>().is_some()
                || matches!(
                    e.downcast_ref::<GoldenError>(),
                    Some(GoldenError::Config(_) | GoldenError::Manifest { .. } | GoldenError::MissingGolden(_))
                );
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let Format::Csv = cli.format;
    let config = |grid: Grid, experiment: Experiment| SweepConfig {
        n: grid.n,
        alpha: grid.alpha,
        seeds: Seeds { base: cli.seed, count: grid.seeds },
        experiment,
        max_n: cli.max_n,
    };
    let cfg = match cli.command {
        Command::Sample { n, alpha, p, model, p_site } => {
            return sample_cmd(n, alpha, p, model, p_site, cli.seed, cli.max_n, &cli.out);
        }
        Command::Verify { dir, bless } => {
            if bless {
                for path in bless_goldens(&dir)? {
                    println!("wrote {}", path.display());
                }
                return Ok(ExitCode::SUCCESS);
            }
            let report = verify_goldens(&dir)?;
            print!("{report}");
            return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Sweep { config: path } => {
            let mut cfg = SweepConfig::load(&path)?;
            if cli.max_n.is_some() {
                cfg.max_n = cli.max_n;
            }
            cfg
        }
        Command::Distort { grid, map, depth, sampled_pairs } => {
            let map = match map {
                MapArg::GoodMap => MapKind::GoodMap,
                MapArg::Identity => MapKind::Identity,
            };
            config(grid, Experiment::Distortion { map, depth, sampled_pairs })
        }
        Command::Cycles { grid, max_length, radius, budget, vertices } => {
            config(grid, Experiment::CycleCensus { max_length, radius, budget, vertices })
        }
        Command::Route { grid, routes, radius, queries, random_endpoints, one_sided } => config(
            grid,
            Experiment::Route {
                routes,
                radius,
                queries,
                endpoints: if random_endpoints { RouteEndpoints::Random } else { RouteEndpoints::Adjacent },
                direction: if one_sided { Direction::OneSided } else { Direction::Bidirectional },
            },
        ),
        Command::Moments { grid, l, trials } => config(grid, Experiment::Moments { l, trials }),
    };
    let table = run_sweep(&cfg)?;
    let mut out = output(&cli.out)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(if table.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[allow(clippy::too_many_arguments)]
fn sample_cmd(
    n: u32,
    alpha: Option<f64>,
    p: Option<f64>,
    model: ModelArg,
    p_site: Option<f64>,
    seed: u64,
    max_n: Option<u32>,
    out: &Option<PathBuf>,
) -> Result<ExitCode> {
    let cap = max_n.unwrap_or(cubeperc::percolation::DEFAULT_MATERIALIZE_CAP);
    let shape = CubeShape::new(n).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let p = match (alpha, p) {
        (Some(a), None) => (n as f64).powf(-a),
        (None, Some(p)) => p,
        _ => return Err(ConfigError::Invalid("give exactly one of --alpha and --p".into()).into()),
    };
    let invalid = |e: cubeperc::percolation::PercolationError| ConfigError::Invalid(e.to_string());
    let model = match (model, p_site) {
        (ModelArg::Bond, None) => PercModel::bond(p).map_err(invalid)?,
        (ModelArg::Site, None) => PercModel::site(p).map_err(invalid)?,
        (ModelArg::Mixed, Some(q)) => PercModel::mixed(p, q).map_err(invalid)?,
        (ModelArg::Mixed, None) => bail!(ConfigError::Invalid("--model mixed needs --p-site".into())),
        (_, Some(_)) => bail!(ConfigError::Invalid("--p-site only applies to --model mixed".into())),
    };
    let Some(path) = out else {
        bail!(ConfigError::Invalid("sample needs --out for the binary file".into()));
    };
    let s = sample_with_cap(shape, model, seed, SampleMode::Materialized, cap).map_err(invalid)?;
    let lab = components(&s);
    std::fs::write(path, s.serialize()?).with_context(|| format!("writing {}", path.display()))?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["n", "p_bond", "p_site", "seed", "open_edges", "present", "components", "giant_size", "second_largest"])?;
    w.write_record([
        n.to_string(),
        fmt_f(model.edge_prob().value()),
        model.site_prob().map(|q| fmt_f(q.value())).unwrap_or_default(),
        seed.to_string(),
        s.open_edge_count().to_string(),
        s.present_count().to_string(),
        lab.component_count().to_string(),
        lab.giant_size().to_string(),
        lab.second_largest().to_string(),
    ])?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
