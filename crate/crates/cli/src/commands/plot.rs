use std::path::PathBuf;

use clap::Args;
use migtopo_core::archipelago::ReplicatedSummary;

use crate::commands::emit;
use crate::error::CliError;
use crate::output::{load_results, LoadedSetup};

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Setup directories or output roots.
    #[arg(long = "results", required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    /// Output file; only valid for a single setup.
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Directory receiving `<setup>.csv` per setup.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Mean and standard deviation of the global best per period.
pub fn convergence_csv(setup: &LoadedSetup) -> String {
    let s = ReplicatedSummary::from_traces(&setup.traces);
    let mut text = format!(
        "# config_hash={}\n# master_seed={}\n# repetitions={}\nperiod,mean_best,std_best\n",
        setup.record.config_hash, setup.record.spec.master_seed, s.repetitions
    );
    for (p, (m, sd)) in s.per_period_mean.iter().zip(&s.per_period_std).enumerate() {
        text.push_str(&format!("{},{},{}\n", p + 1, m, sd));
    }
    text
}

pub fn plot(args: &PlotArgs) -> Result<Vec<PathBuf>, CliError> {
    let setups = load_results(&args.results)?;
    match (&args.out, &args.out_dir) {
        (Some(_), _) if setups.len() > 1 => Err(CliError::Validation(format!(
            "{} setups found; use --out-dir instead of --out",
            setups.len()
        ))),
        (Some(out), _) => {
            emit(Some(out), &convergence_csv(&setups[0]))?;
            Ok(vec![out.clone()])
        }
        (None, Some(dir)) => setups
            .iter()
            .map(|s| {
                let path = dir.join(format!("{}.csv", s.record.label));
                emit(Some(&path), &convergence_csv(s)).map(|_| path)
            })
            .collect(),
        (None, None) => {
            for s in &setups {
                emit(None, &format!("# setup={}\n{}", s.record.label, convergence_csv(s)))?;
            }
            Ok(Vec::new())
        }
    }
}
