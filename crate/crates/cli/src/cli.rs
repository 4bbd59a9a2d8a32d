use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use som3d::preprocess::parse_periods;
use som3d::{GridDims, NormalizationKind, Period};

use crate::artifact::ModelArtifact;
use crate::commands::{cmd_evaluate, cmd_export_density, cmd_inspect, cmd_train, ProjectionChoice};
use crate::config::{Divisions, IdMode, Overrides, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "som3d", version, about = "Train and evaluate 3D self-organizing maps on incident data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a map; writes model.json, assignments.csv and train_log.csv
    Train(RunArgs),
    /// Score a trained model against data; writes report.json
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write input density matrices and node lists for one projection
    ExportDensity {
        #[arg(long)]
        model: PathBuf,
        /// Standard projection name, e.g. day-lat-lon or day-week
        #[arg(long, conflicts_with = "axes")]
        projection: Option<String>,
        /// Comma-separated vector components, e.g. 0,1
        #[arg(long, value_delimiter = ',')]
        axes: Option<Vec<usize>>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print a model summary
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodList(pub Vec<Period>);

fn period_list(s: &str) -> std::result::Result<PeriodList, String> {
    parse_periods(s).map(PeriodList).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// CSV file with a header row
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// TOML run configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid size as LxMxN, L along time
    #[arg(long)]
    pub grid: Option<GridDims>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// none, rescale or zscore
    #[arg(long)]
    pub normalize: Option<NormalizationKind>,
    /// day, day,week or day,week,month
    #[arg(long, value_parser = period_list)]
    pub periods: Option<PeriodList>,
    #[arg(long)]
    pub category_column: Option<String>,
    /// Weight of a category mismatch in the mixed distance
    #[arg(long)]
    pub alpha: Option<f64>,
    /// wta, prob or hybrid:T
    #[arg(long)]
    pub id_mode: Option<IdMode>,
    /// Reliability cells as AxBxC
    #[arg(long)]
    pub divisions: Option<Divisions>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $SOM3D_OUT, then ./som3d-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Abort on the first unparseable row
    #[arg(long)]
    pub strict: bool,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            input: self.input.clone(),
            grid: self.grid,
            epochs: self.epochs,
            normalize: self.normalize,
            periods: self.periods.clone().map(|p| p.0),
            category_column: self.category_column.clone(),
            alpha: self.alpha,
            id_mode: self.id_mode,
            divisions: self.divisions.clone(),
            seed: self.seed,
            out: self.out.clone(),
            strict: self.strict,
        }
    }

    /// `base`, then the config file, then flags.
    pub fn resolve(&self, base: RunConfig) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => base.layer_file(path)?,
            None => base,
        };
        cfg.apply(&self.overrides());
        Ok(cfg)
    }
}

/// Runs one subcommand. Data goes to files; `inspect` prints to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve(RunConfig::default())?;
            cmd_train(&cfg)?;
        }
        Command::Evaluate { model, run } => {
            let artifact = ModelArtifact::load(&model)?;
            let cfg = run.resolve(artifact.config.clone())?;
            cmd_evaluate(&artifact, &cfg)?;
        }
        Command::ExportDensity {
            model,
            projection,
            axes,
            run,
        } => {
            let artifact = ModelArtifact::load(&model)?;
            let cfg = run.resolve(artifact.config.clone())?;
            let choice = match (projection, axes) {
                (Some(name), None) => ProjectionChoice::Named(name),
                (None, Some(axes)) => ProjectionChoice::Axes(axes),
                _ => {
                    return Err(CliError::Usage(
                        "export-density needs --projection NAME or --axes I,J[,K]".into(),
                    ))
                }
            };
            cmd_export_density(&artifact, &cfg, &choice)?;
        }
        Command::Inspect { model } => {
            let artifact = ModelArtifact::load(&model)?;
            print!("{}", cmd_inspect(&artifact)?);
        }
    }
    Ok(())
}
