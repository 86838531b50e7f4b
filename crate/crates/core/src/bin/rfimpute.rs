use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rfimpute::autoencoder::AutoencoderConfig;
use rfimpute::dataset::io::read_json;
use rfimpute::dataset::{names, Mechanism, MissingnessPlan, SyntheticParams};
use rfimpute::forest::ForestParams;
use rfimpute::imputation::{RfImputerConfig, Strategy};
use rfimpute::optimizer::GaConfig;
use rfimpute::pipeline::{
    check_variables, impute_step, replay, run_pipeline, AssessKind, AssessStep, CleanStep, ExperimentManifest,
    GenerateStep, ImputeStep, InjectStep, RunConfig, SplitStep, Step, TrainAannStep, TrainCorrectionStep,
    TrainRfStep,
};
use rfimpute::{Error, Result};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "rfimpute", version, about = "Missing-data imputation experiments on survey records")]
struct Cli {
    /// Master seed for stochastic steps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Append each executed step to this manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// JSON configuration for the command's component.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw synthetic survey records.
    Generate {
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Blank cells that break the validity rules.
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition complete rows into train, validation, test and experiment.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.1, 0.25, 0.25])]
        fractions: Vec<f64>,
    },
    /// Blank cells artificially.
    Inject {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        variables: Vec<String>,
        #[arg(long, default_value_t = 0.1)]
        rate: f64,
        /// mcar or mar.
        #[arg(long, default_value = "mcar")]
        mechanism: String,
        /// Observed variable that drives MAR removal.
        #[arg(long)]
        driver: Option<String>,
    },
    /// Train a model.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Impute a set.
    Impute {
        /// Set label such as RF2A, or a free label with --strategy.
        #[arg(long)]
        label: String,
        #[arg(long)]
        strategy: Option<String>,
        /// Columns to blank before imputing; defaults to the label's pattern.
        #[arg(long, value_delimiter = ',')]
        variables: Option<Vec<String>>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        rf: Option<PathBuf>,
        #[arg(long)]
        aann: Option<PathBuf>,
        #[arg(long)]
        correction: Option<PathBuf>,
        /// Require an RF model trained without HIV as an input.
        #[arg(long)]
        exclude_hiv: bool,
    },
    /// Compare imputed sets with the target set.
    Assess {
        /// stats, classify, lr, range-accuracy or qq.
        kind: String,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        sets: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        variables: Vec<String>,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        qq_points: usize,
    },
    /// Re-run a manifest and check every output is byte-identical.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        work_dir: Option<PathBuf>,
    },
    /// Run the whole experiment under one directory.
    Run {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Per-variable forests for RF imputation.
    Rf {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        forest: ForestArgs,
        /// Variables never used as inputs.
        #[arg(long, value_delimiter = ',')]
        exclude: Option<Vec<String>>,
    },
    /// Autoassociative network.
    Aann {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        cycles: Option<usize>,
    },
    /// Correction forests for AANN-GA-RF.
    Correction {
        #[arg(long)]
        aann: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [names::AGE.to_string(), names::EDUCATION.to_string(), names::GRAVIDITY.to_string()])]
        variables: Vec<String>,
        #[arg(long, default_value_t = 0.1)]
        rate: f64,
        #[command(flatten)]
        forest: ForestArgs,
    },
}

#[derive(Args)]
struct ForestArgs {
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    min_node: Option<usize>,
    #[arg(long)]
    mtry: Option<usize>,
}

impl ForestArgs {
    fn apply(&self, mut p: ForestParams) -> ForestParams {
        if let Some(t) = self.trees {
            p.n_trees = t;
        }
        if let Some(m) = self.min_node {
            p.min_node = m;
        }
        if let Some(m) = self.mtry {
            p.m_try = m;
        }
        p
    }
}

struct Context {
    seed: Option<u64>,
    config: Option<PathBuf>,
}

impl Context {
    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidParameter("this command needs --seed".into()))
    }

    fn config<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.config {
            Some(p) => read_json(p),
            None => Ok(T::default()),
        }
    }
}

fn plan(variables: Vec<String>, rate: f64, mechanism: &str, driver: Option<String>) -> Result<MissingnessPlan> {
    check_variables(&variables)?;
    let mechanism = match mechanism {
        "mcar" => Mechanism::Mcar,
        "mar" => Mechanism::Mar,
        other => return Err(Error::InvalidParameter(format!("unknown mechanism `{other}`"))),
    };
    let p = MissingnessPlan {
        mechanism,
        target_variables: variables,
        rate,
        mar_driver: driver,
    };
    p.validate()?;
    Ok(p)
}

fn build(command: Command, ctx: &Context) -> Result<Step> {
    Ok(match command {
        Command::Generate { n, out } => Step::Generate(GenerateStep {
            n,
            seed: ctx.seed()?,
            params: ctx.config::<SyntheticParams>()?,
            out,
        }),
        Command::Clean { input, out } => Step::Clean(CleanStep { input, out }),
        Command::Split {
            input,
            out_dir,
            fractions,
        } => Step::Split(SplitStep {
            input,
            fractions: fractions
                .try_into()
                .map_err(|_| Error::InvalidParameter("--fractions needs four values".into()))?,
            seed: ctx.seed()?,
            out_dir,
        }),
        Command::Inject {
            input,
            out,
            variables,
            rate,
            mechanism,
            driver,
        } => Step::Inject(InjectStep {
            input,
            plan: plan(variables, rate, &mechanism, driver)?,
            seed: ctx.seed()?,
            out,
        }),
        Command::Train(TrainCommand::Rf {
            train,
            out,
            forest,
            exclude,
        }) => {
            let mut config: RfImputerConfig = match &ctx.config {
                Some(p) => read_json(p)?,
                None => RfImputerConfig::default().excluding(names::HIV),
            };
            config.forest = forest.apply(config.forest);
            if let Some(ex) = exclude {
                check_variables(&ex)?;
                config.excluded_inputs = ex;
            }
            Step::TrainRf(TrainRfStep {
                train,
                config,
                seed: ctx.seed()?,
                out,
            })
        }
        Command::Train(TrainCommand::Aann {
            train,
            validation,
            out,
            hidden,
            cycles,
        }) => {
            let mut config: AutoencoderConfig = ctx.config()?;
            if let Some(h) = hidden {
                config.hidden = h;
            }
            if let Some(c) = cycles {
                config.train.max_cycles = c;
            }
            Step::TrainAann(TrainAannStep {
                train,
                validation,
                config,
                seed: ctx.seed()?,
                out,
            })
        }
        Command::Train(TrainCommand::Correction {
            aann,
            test,
            out,
            variables,
            rate,
            forest,
        }) => Step::TrainCorrection(TrainCorrectionStep {
            aann,
            test,
            plan: plan(variables, rate, "mcar", None)?,
            ga: ctx.config::<GaConfig>()?,
            forest: forest.apply(ForestParams::default()),
            seed: ctx.seed()?,
            out,
        }),
        Command::Impute {
            label,
            strategy,
            variables,
            input,
            out,
            train,
            rf,
            aann,
            correction,
            exclude_hiv,
        } => {
            let strategy = strategy.as_deref().map(Strategy::parse).transpose()?;
            let (strategy, label, variables) = impute_step(&label, strategy, variables)?;
            check_variables(&variables)?;
            let seed = match strategy {
                Strategy::Target | Strategy::Mean | Strategy::Rf => ctx.seed.unwrap_or(0),
                _ => ctx.seed()?,
            };
            Step::Impute(ImputeStep {
                strategy,
                label,
                variables,
                input,
                train,
                rf,
                aann,
                correction,
                ga: ctx.config::<GaConfig>()?,
                exclude_hiv,
                seed,
                out,
            })
        }
        Command::Assess {
            kind,
            target,
            sets,
            out,
            variables,
            train,
            qq_points,
        } => {
            let kind = AssessKind::parse(&kind)?;
            check_variables(&variables)?;
            Step::Assess(AssessStep {
                kind,
                target,
                sets,
                variables,
                train,
                forest: ctx.config::<ForestParams>()?,
                lr: Default::default(),
                qq_points,
                seed: if kind == AssessKind::Classify { ctx.seed()? } else { ctx.seed.unwrap_or(0) },
                out,
            })
        }
        Command::Replay { .. } | Command::Run { .. } => unreachable!("handled before building a step"),
    })
}

fn execute(cli: Cli) -> Result<String> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("--threads: {e}")))?;
    }
    let ctx = Context {
        seed: cli.seed,
        config: cli.config.clone(),
    };
    match cli.command {
        Command::Replay { manifest, work_dir } => {
            let m = ExperimentManifest::load(&manifest)?;
            let dir = work_dir.unwrap_or_else(|| manifest.with_file_name("replay"));
            let r = replay(&m, &dir)?;
            Ok(format!("replayed {} steps; {} outputs identical", r.steps, r.outputs_checked))
        }
        Command::Run { out_dir } => {
            let config: RunConfig = match (&cli.config, cli.seed) {
                (Some(p), seed) => {
                    let mut c: RunConfig = read_json(p)?;
                    if let Some(s) = seed {
                        c.seed = s;
                    }
                    c
                }
                (None, Some(s)) => RunConfig::new(s),
                (None, None) => return Err(Error::InvalidParameter("run needs --seed or --config".into())),
            };
            let m = run_pipeline(&config, &out_dir)?;
            Ok(format!("{} steps; manifest at {}", m.steps.len(), out_dir.join("manifest.json").display()))
        }
        command => {
            let step = build(command, &ctx)?;
            step.execute()?;
            let outputs: Vec<String> = step.output_files().iter().map(|p| p.display().to_string()).collect();
            if let Some(m) = &cli.manifest {
                ExperimentManifest::append(m, step)?;
            }
            Ok(format!("wrote {}", outputs.join(", ")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
