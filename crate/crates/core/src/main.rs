//! Thin command-line front end; all work happens in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mwdetect::pipeline::{self, CommandOutput, PipelineConfig};

#[derive(Parser)]
#[command(name = "mwdetect", version, about = "Mind-wandering detection pipeline: synthesize, extract, train, evaluate, select, bench")]
struct Cli {
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides the config file).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate a synthetic dataset in the on-disk format.
    Synth,
    /// Extract the feature matrix and its provenance.
    Extract,
    /// Fit the configured classifier on the full dataset.
    Train,
    /// Leave-one-subject-out evaluation (optionally after random search).
    Evaluate,
    /// Rank channels and evaluate the top-K channel curve.
    SelectChannels,
    /// Compare feature-selection methods at matched k.
    SelectFeatures,
    /// Measure random-forest training-time scaling.
    Bench,
}

fn run(cli: &Cli) -> mwdetect::Result<CommandOutput> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = Some(threads);
    }
    cfg.validate()?;

    let out_dir = cli.out_dir.clone();
    let command = cli.command;
    let cfg_ref = &cfg;
    pipeline::with_thread_pool(cfg_ref, move || match command {
        Command::Synth => pipeline::cmd_synth(cfg_ref, &out_dir),
        Command::Extract => pipeline::cmd_extract(cfg_ref, &out_dir),
        Command::Train => pipeline::cmd_train(cfg_ref, &out_dir),
        Command::Evaluate => pipeline::cmd_evaluate(cfg_ref, &out_dir),
        Command::SelectChannels => pipeline::cmd_select_channels(cfg_ref, &out_dir),
        Command::SelectFeatures => pipeline::cmd_select_features(cfg_ref, &out_dir),
        Command::Bench => pipeline::cmd_bench(cfg_ref, &out_dir),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let r = &output.report;
            println!("{} finished in {:.2}s (seed {}, {} threads)", r.command, r.timings.total_seconds, r.seed, r.thread_count);
            if let Some(ds) = &r.dataset {
                println!(
                    "dataset: {} subjects, {} epochs, {} channels",
                    ds.n_subjects,
                    ds.n_epochs,
                    ds.channels.len()
                );
            }
            if let Some(ex) = &r.extraction {
                println!(
                    "features: {} rows x {} columns ({} undefined values substituted)",
                    ex.n_rows, ex.n_cols, ex.undefined_total
                );
            }
            if let Some(m) = &r.metrics {
                println!(
                    "metrics: weighted F1 {:.3}, kappa {:.3}, AUC {:.3}",
                    m.weighted_f1, m.kappa, m.auc
                );
            }
            if let Some(curve) = &r.channel_curve {
                for p in curve {
                    println!(
                        "k={:2}  AUC {:.3}  train {:.2}s  [{}]",
                        p.k,
                        p.auc,
                        p.train_seconds_total,
                        p.channels.join(", ")
                    );
                }
            }
            if let Some(selections) = &r.selections {
                for c in selections {
                    println!(
                        "{:?}: k={} selection {:.2}s ({} fits), AUC {:.3}",
                        c.selection.method,
                        c.selection.k,
                        c.selection.wall_seconds,
                        c.selection.n_fits,
                        c.eval.auc
                    );
                }
            }
            if let Some(b) = &r.bench {
                for c in &b.channel_scaling {
                    println!(
                        "channels {:2} ({} features): median train {:.3}s",
                        c.channels, c.n_features, c.median_train_seconds
                    );
                }
                for t in &b.tree_scaling {
                    println!("trees {:4}: median train {:.3}s", t.n_trees, t.median_train_seconds);
                }
            }
            for f in &output.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
