use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cosvr_core::benchmarks;
use cosvr_core::cosvr::{fit_cosvr, CoSvrModel, CoSvrSearch, MultiFidelityData, Objective};
use cosvr_core::doe::{lhs_checked, DomainBox};
use cosvr_core::lssvr::SampleSet;
use cosvr_core::seed::derive_seed;
use nalgebra::DVector;

use cosvr_experiments::cv::{data_domain, run_cv, CvOptions};
use cosvr_experiments::error::{ExpError, Result};
use cosvr_experiments::io::{load_dataset, load_points, load_table, write_predictions, write_result, write_table, SampleTable};
use cosvr_experiments::spec::{ExperimentSpec, GwoOverrides, ModelKind};
use cosvr_experiments::sweep::run_sweep;

#[derive(Parser)]
#[command(name = "cosvr", version, about = "Multi-fidelity Co_SVR surrogates and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Wolves per search (default 30).
    #[arg(long)]
    population: Option<usize>,
    /// Search iterations (default 200).
    #[arg(long)]
    iterations: Option<usize>,
    /// Co_SVR regularization constant (default 1e4).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn gwo(&self) -> GwoOverrides {
        GwoOverrides {
            population: self.population,
            iterations: self.iterations,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    LeaveOneOut,
    HfLeaveOneOut,
    TrainingRmse,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::LeaveOneOut => Objective::LeaveOneOut,
            ObjectiveArg::HfLeaveOneOut => Objective::HfLeaveOneOut,
            ObjectiveArg::TrainingRmse => Objective::TrainingRmse,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fidelity {
    Hf,
    Lf,
}

#[derive(Subcommand)]
enum Command {
    /// Run an m-sweep described by a TOML config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// K-fold study on external LF/HF tables.
    Cv {
        #[arg(long)]
        lf: PathBuf,
        #[arg(long)]
        hf: PathBuf,
        #[arg(long)]
        folds: usize,
        /// Separate test table; without it each fold is scored on the other HF samples.
        #[arg(long)]
        test: Option<PathBuf>,
        /// Models to compare.
        #[arg(long, value_delimiter = ',', default_value = "cosvr,lssvr_hf", value_parser = parse_model)]
        models: Vec<ModelKind>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Latin hypercube design on a benchmark family, with responses.
    Doe {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Named domain preset instead of the family default.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, value_enum, default_value = "hf")]
        fidelity: Fidelity,
        /// Correlation knob for LF responses.
        #[arg(long, default_value_t = 0.0)]
        m: f64,
    },
    /// Tune and train a Co_SVR model on LF/HF tables.
    Fit {
        #[arg(long)]
        lf: PathBuf,
        #[arg(long)]
        hf: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Predict with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    match s {
        "cosvr" => Ok(ModelKind::Cosvr),
        "lssvr_hf" => Ok(ModelKind::LssvrHf),
        other => Err(format!("unknown model {other:?} (expected cosvr or lssvr_hf)")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ExpError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| ExpError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { config, out } => {
            let spec = ExperimentSpec::from_toml(&read(&config)?)?;
            let result = run_sweep(&spec)?;
            write_result(&result, &out)?;
            for r in &result.rows {
                eprintln!(
                    "m={} {}: mean R² {:.4} (std {:.4})",
                    r.m.unwrap_or(f64::NAN),
                    r.model,
                    r.summary.mean_r2,
                    r.summary.std_r2
                );
            }
        }
        Command::Cv {
            lf,
            hf,
            folds,
            test,
            models,
            search,
            out,
        } => {
            let data = load_dataset(&lf, &hf)?;
            let opts = CvOptions {
                gwo: search.gwo(),
                gamma: search.gamma,
                objective: search.objective.map(Into::into),
                models,
                test: test.as_deref().map(load_table).transpose()?,
                ..CvOptions::new(folds, search.seed)
            };
            let result = run_cv(&data, &opts)?;
            write_result(&result, &out)?;
            for r in &result.rows {
                eprintln!("{}: mean R² {:.4} over {} folds", r.model, r.summary.mean_r2, r.summary.n_repeats);
            }
        }
        Command::Doe {
            family,
            n,
            seed,
            out,
            domain,
            fidelity,
            m,
        } => {
            let fam = benchmarks::family(&family).ok_or_else(|| ExpError::Config(format!("unknown family {family:?}")))?;
            if !(0.0..=1.0).contains(&m) {
                return Err(ExpError::Config(format!("m must lie in [0, 1], got {m}")));
            }
            if n == 0 {
                return Err(ExpError::Config("n must be positive".into()));
            }
            let domain: DomainBox = match domain {
                None => fam.domain(),
                Some(name) => fam
                    .domain_preset(&name)
                    .ok_or_else(|| ExpError::Config(format!("family {family} has no domain preset {name:?}")))?,
            };
            let eval = |x: &[f64]| match fidelity {
                Fidelity::Hf => fam.hf(x),
                Fidelity::Lf => fam.lf(x, m),
            };
            let design = lhs_checked(n, &domain, derive_seed(seed, &[1]), |x| eval(x).is_ok())?;
            let y = (0..n)
                .map(|i| eval(&design.points.row(i).iter().copied().collect::<Vec<_>>()))
                .collect::<cosvr_core::Result<Vec<f64>>>()?;
            let table = SampleTable::new(SampleTable::default_columns(fam.dimension), design.points, y)?;
            write_table(&table, &out)?;
        }
        Command::Fit {
            lf,
            hf,
            model_out,
            search,
        } => {
            let data = load_dataset(&lf, &hf)?;
            let domain = data_domain(&data)?;
            let set = |t: &SampleTable| SampleSet::new(t.points.clone(), DVector::from_vec(t.responses.clone()), domain.clone());
            let mf = MultiFidelityData::new(set(&data.lf)?, set(&data.hf)?)?;
            let mut cfg = CoSvrSearch::new(data.dim());
            if let Some(g) = search.gamma {
                cfg.gamma = g;
            }
            if let Some(o) = search.objective {
                cfg.objective = o.into();
            }
            let fit = fit_cosvr(&mf, &cfg, &search.gwo().options(derive_seed(search.seed, &[4])))?;
            if fit.all_penalty {
                eprintln!("warning: every hyperparameter candidate failed to train");
            }
            write(&model_out, &fit.model.to_document())?;
            eprintln!("objective {:.6e}, condition {:.3e}", fit.search.best_score, fit.model.condition());
        }
        Command::Predict { model, points, out } => {
            let model = CoSvrModel::from_document(&read(&model)?)?;
            let (columns, x) = load_points(&points)?;
            if x.ncols() != model.training().dim() {
                return Err(ExpError::Data(format!(
                    "model has {} inputs but {} has {}",
                    model.training().dim(),
                    points.display(),
                    x.ncols()
                )));
            }
            let y = model.predict_rows(&x)?;
            write_predictions(&columns, &x, &y, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
