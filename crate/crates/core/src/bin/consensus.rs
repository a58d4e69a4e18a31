use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use consensus_core::dynamics::{self, DEFAULT_MAX_SWEEPS};
use consensus_core::experiments::{self, GroupField, SweepConfig, DEFAULT_CONSENSUS_BAND};
use consensus_core::ingest::{self, powerlaw_fit};
use consensus_core::netgen::{self, GenConfig};
use consensus_core::rewire::{self, RewireConfig};
use consensus_core::{Direction, DirectedMultigraph};

#[derive(Parser)]
#[command(name = "consensus", version, about = "Threshold consensus on degree-correlated networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Configuration-model graph with power-law out-degrees and constant in-degree
    Generate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        gamma: f64,
        #[arg(long = "k-in", default_value_t = 17)]
        k_in: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Degree-preserving swaps toward a target assortativity
    Rewire {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "target-r", allow_hyphen_values = true)]
        target_r: f64,
        #[arg(long, default_value_t = RewireConfig::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long = "max-steps", default_value_t = RewireConfig::DEFAULT_MAX_STEPS)]
        max_steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One threshold-dynamics run on a stored graph; prints a CSV row
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long = "n-th")]
        n_th: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-sweeps", default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: u64,
    },
    /// Full parameter sweep from a key=value config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run cells on one thread
        #[arg(long)]
        serial: bool,
    },
    /// Boxplot statistics per group of a results CSV
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "r_target,n_th,p")]
        group: String,
        #[arg(long)]
        out: PathBuf,
        /// s_bar within this distance of 0 or 1 counts as consensus
        #[arg(long = "consensus-band", default_value_t = DEFAULT_CONSENSUS_BAND)]
        consensus_band: f64,
    },
    /// Influence network from a JSON Lines conversation dump
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Log-log power-law fit of a stored graph's degree histogram
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        direction: Direction,
    },
    /// Time-binned polarity means of the largest cascades
    Bin {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long = "top-cascades", default_value_t = 10)]
        top_cascades: usize,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &PathBuf) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { n, gamma, k_in, seed, out } => {
            let g = netgen::generate(&GenConfig { n, gamma, k_in, seed })?;
            g.write_edge_list(create(&out)?)?;
            match g.assortativity() {
                Ok(r) => println!("nodes={} edges={} r={r}", g.node_count(), g.total_weight()),
                Err(_) => println!("nodes={} edges={} r=undefined", g.node_count(), g.total_weight()),
            }
        }
        Command::Rewire { input, target_r, tolerance, max_steps, seed, out } => {
            let g = DirectedMultigraph::read_edge_list(open(&input)?, None)?;
            let cfg = RewireConfig { r_target: target_r, tolerance, max_steps, seed };
            let res = rewire::rewire_seeded(&g, &cfg)?;
            res.graph.write_edge_list(create(&out)?)?;
            println!("achieved_r={} steps={}", res.achieved_r, res.steps_used);
        }
        Command::Simulate { graph, p, n_th, seed, max_sweeps } => {
            let g = DirectedMultigraph::read_edge_list(open(&graph)?, None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = dynamics::assign_thresholds(g.node_count(), n_th, &mut rng)?;
            let mut state = dynamics::init_opinions(g.node_count(), p, &mut rng)?;
            let rec = dynamics::run_to_fixation(&g, &mut state, &th, max_sweeps, &mut rng)?;
            println!("t_f_sweeps,t_f_picks,s_bar,absorbed");
            println!("{},{},{},{}", rec.t_f_sweeps, rec.t_f_picks, rec.s_bar, rec.absorbed);
        }
        Command::Sweep { config, out, serial } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = SweepConfig::parse(&text)?;
            let rows = if serial {
                experiments::run_sweep_serial(&cfg)?
            } else {
                experiments::run_sweep(&cfg)?
            };
            experiments::write_results(&rows, create(&out)?)?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            eprintln!("{} rows written ({failed} flagged)", rows.len());
        }
        Command::Summarize { input, group, out, consensus_band } => {
            let rows = experiments::read_results(open(&input)?)?;
            let fields = GroupField::parse_list(&group)?;
            let summary = experiments::summarize(&rows, &fields, consensus_band)?;
            summary.write_csv(create(&out)?)?;
        }
        Command::Ingest { input, out, map } => {
            let forest = ingest::read_cascades(open(&input)?)?;
            let (g, authors) = ingest::build_network(&forest)?;
            g.write_edge_list(create(&out)?)?;
            authors.write_csv(create(&map)?)?;
            let r = g.assortativity().map(|r| r.to_string()).unwrap_or_else(|_| "undefined".into());
            println!(
                "cascades={} records={} authors={} edges={} r={r}",
                forest.trees.len(),
                forest.record_count(),
                authors.len(),
                g.total_weight()
            );
        }
        Command::Fit { input, direction } => {
            let g = DirectedMultigraph::read_edge_list(open(&input)?, None)?;
            let fit = powerlaw_fit(&g.degree_sequence(direction))?;
            println!("gamma_hat,r_squared,points");
            println!("{},{},{}", fit.gamma_hat, fit.r_squared, fit.points);
        }
        Command::Bin { input, bins, top_cascades, out } => {
            let forest = ingest::read_cascades(open(&input)?)?;
            let sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(create(p)?),
                None => Box::new(std::io::stdout().lock()),
            };
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["rank", "root_id", "records", "bin", "mean_polarity"])?;
            for (rank, tree) in forest.largest(top_cascades).into_iter().enumerate() {
                match ingest::bin_polarity(tree.records(), bins) {
                    Ok(means) => {
                        for (b, m) in means.iter().enumerate() {
                            w.write_record([
                                rank.to_string(),
                                tree.root().id.clone(),
                                tree.len().to_string(),
                                b.to_string(),
                                m.to_string(),
                            ])?;
                        }
                    }
                    Err(e) => eprintln!("skipping cascade {}: {e}", tree.root().id),
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
