use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coopbandit::graph::{edge_list_text, generate, GraphSpec, GraphStats};
use coopbandit::output::write_bundle;
use coopbandit::{repro, run_experiment, sweep, ExperimentConfig, Result};

/// Cooperative multi-armed bandits over imperfect networks.
#[derive(Parser)]
#[command(name = "coopbandit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `reps`.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        no_plot: bool,
    },
    /// Run a config over a grid of one or two parameters.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Parameter name; repeat for a two-dimensional grid.
        #[arg(long, required = true)]
        param: Vec<String>,
        /// Comma-separated values, one list per `--param`.
        #[arg(long, required = true)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        no_plot: bool,
    },
    /// Print statistics of a generated graph.
    GraphInfo {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the edge list to this file.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Run a bundled experiment set (a, b, c, d or e).
    Repro {
        id: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        no_plot: bool,
    },
}

fn load(path: &std::path::Path, seed: Option<u64>, reps: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(r) = reps {
        cfg.reps = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_values(param: &str, list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| coopbandit::Error::Config {
                key: param.to_string(),
                msg: format!("`{v}` is not a number"),
            })
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate { config, out, seed, reps, no_plot } => {
            let cfg = load(&config, seed, reps)?;
            let res = run_experiment(&cfg)?;
            let extra = vec![
                ("variant".to_string(), cfg.variant.to_string()),
                ("graph".to_string(), cfg.graph.to_string()),
                ("master_seed".to_string(), cfg.master_seed.to_string()),
            ];
            write_bundle(&out, &[res], &extra, !no_plot)?;
        }
        Cmd::Sweep { config, param, values, out, seed, reps, no_plot } => {
            if param.len() != values.len() {
                return Err(coopbandit::Error::Config {
                    key: "values".into(),
                    msg: format!("{} --param flags but {} --values lists", param.len(), values.len()),
                });
            }
            let cfg = load(&config, seed, reps)?;
            let axes = param
                .iter()
                .zip(&values)
                .map(|(p, v)| Ok((p.clone(), parse_values(p, v)?)))
                .collect::<Result<Vec<_>>>()?;
            let res = sweep(&cfg, &axes)?;
            let extra = vec![
                ("variant".to_string(), cfg.variant.to_string()),
                ("params".to_string(), param.join(",")),
                ("points".to_string(), res.len().to_string()),
            ];
            write_bundle(&out, &res, &extra, !no_plot)?;
        }
        Cmd::GraphInfo { graph, seed, edges } => {
            let spec: GraphSpec = graph.parse()?;
            let g = generate(&spec, seed)?;
            let stats = GraphStats::compute(&g)?;
            if let Some(p) = edges {
                coopbandit::output::write_atomic(&p, edge_list_text(&g).as_bytes())?;
            }
            print!("spec={spec}\nseed={seed}\n{}", stats.to_key_values());
        }
        Cmd::Repro { id, out, seed, reps, no_plot } => {
            let spec = repro::load(&id)?.with_overrides(seed, reps);
            let res = spec.run()?;
            write_bundle(&out, &res, &spec.summary_header(), !no_plot)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("COOPBANDIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
