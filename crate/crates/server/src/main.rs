use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use nsu_core::features::SchemaTag;
use nsu_core::synth::SynthParams;
use nsu_server::api::{router, AppState};
use nsu_server::commands::{self, tree_params, Common};

#[derive(Parser)]
#[command(name = "nsu", version, about = "NSU classification and resolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Corpus directory (transcripts plus nsu.csv); defaults to the built-in
    /// synthetic corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Feature schema: baseline or extended.
    #[arg(long)]
    schema: Option<SchemaTag>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl From<CommonArgs> for Common {
    fn from(a: CommonArgs) -> Self {
        Common {
            corpus: a.corpus,
            schema: a.schema,
            seed: a.seed,
            config: a.config,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct TreeArgs {
    /// Minimum instances per leaf (M).
    #[arg(long, default_value_t = 2)]
    min_leaf: usize,
    /// Pruning confidence (C).
    #[arg(long, default_value_t = 0.25)]
    confidence: f64,
    #[arg(long)]
    unpruned: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train a decision tree and write it to a model file.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Evaluate a model file on a corpus.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// k-fold cross-validation, optionally compared against another schema.
    Crossval {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, short, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Second schema for a paired t-test over fold accuracies.
        #[arg(long)]
        against: Option<SchemaTag>,
    },
    /// Tune pruning confidence and leaf size by coordinate ascent.
    Tune {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, short, default_value_t = 10)]
        k: usize,
    },
    /// Replay a scripted dialogue (or resolve one state with --state).
    Resolve {
        input: PathBuf,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Rule to switch off; repeatable.
        #[arg(long)]
        disable: Vec<String>,
        /// Treat the input as a single dialogue state.
        #[arg(long)]
        state: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Model file; trained on the corpus when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Directory for turn logs written at shutdown.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Write the synthetic corpus.
    Synth {
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthParams::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SynthParams::default().files)]
        files: usize,
        #[arg(long, default_value_t = SynthParams::default().pairs_per_file)]
        pairs: usize,
        #[arg(long, default_value_t = SynthParams::default().noise)]
        noise: f64,
    },
    /// Write the feature matrix as CSV.
    Features {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Simulated active learning with gold labels.
    Al {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 50)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        batch: usize,
        /// Learning-curve CSV.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    match cli.command {
        Command::Train { common, tree, out } => commands::train(
            &common.into(),
            tree_params(tree.min_leaf, tree.confidence, tree.unpruned),
            &out,
            &mut w,
        ),
        Command::Eval { common, model, csv } => commands::eval(&common.into(), &model, csv.as_deref(), &mut w),
        Command::Crossval {
            common,
            tree,
            k,
            csv,
            against,
        } => commands::crossval(
            &common.into(),
            k,
            tree_params(tree.min_leaf, tree.confidence, tree.unpruned),
            csv.as_deref(),
            against,
            &mut w,
        ),
        Command::Tune { common, k } => commands::tune(&common.into(), k, &mut w),
        Command::Resolve {
            input,
            rules,
            config,
            disable,
            state,
        } => {
            let c = Common {
                config,
                ..Default::default()
            };
            commands::resolve(&c, &input, rules.as_deref(), &disable, state, &mut w)
        }
        Command::Serve {
            common,
            port,
            rules,
            model,
            log_dir,
        } => serve(common.into(), port, rules, model, log_dir),
        Command::Synth {
            out,
            seed,
            files,
            pairs,
            noise,
        } => {
            let p = SynthParams {
                files,
                pairs_per_file: pairs,
                noise,
                seed,
            };
            commands::synth(&p, &out, &mut w)
        }
        Command::Features { common, out } => commands::features(&common.into(), &out, &mut w),
        Command::Al {
            common,
            budget,
            batch,
            out,
        } => commands::al(&common.into(), budget, batch, out.as_deref(), &mut w),
    }?;
    w.flush()?;
    Ok(())
}

fn serve(
    common: Common,
    port: u16,
    rules: Option<PathBuf>,
    model: Option<PathBuf>,
    log_dir: Option<PathBuf>,
) -> Result<()> {
    let cfg = common.config()?;
    let rules = commands::rule_set(rules.as_deref(), &cfg)?;
    let (classifier, al) = commands::service_parts(&common, model.as_deref())?;
    let state = AppState::new(rules, classifier, Some(al));
    let app = router(state.clone());
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind port {port}"))?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        if let Some(dir) = log_dir {
            let written = state.dump_logs(&dir).await?;
            log::info!("wrote {} session logs to {}", written.len(), dir.display());
        }
        Ok(())
    })
}
