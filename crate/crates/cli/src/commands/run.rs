use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use migtopo_core::{run_replicated, seed};

use crate::config::{ExperimentConfig, Setup};
use crate::error::CliError;
use crate::output::{
    trace_file_name, write_json, write_trace_csv, ManifestEntry, SetupRecord, SetupSummary, TraceHeader,
    MANIFEST_FILE, SETUP_FILE, SUMMARY_FILE,
};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (JSON).
    pub config: PathBuf,
    /// Replace results already present for a setup.
    #[arg(long)]
    pub force: bool,
    /// Output root; overrides the config and the environment.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn occupied(dir: &Path) -> bool {
    fs::read_dir(dir).map(|mut d| d.next().is_some()).unwrap_or(false)
}

pub fn run(args: &RunArgs) -> Result<Vec<SetupSummary>, CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let setups = config.expand(base)?;
    let root = args.out_dir.clone().unwrap_or_else(|| config.output_root());

    if !args.force {
        if let Some(s) = setups.iter().find(|s| occupied(&root.join(&s.label))) {
            return Err(CliError::Validation(format!(
                "results for '{}' already exist in {}; pass --force to overwrite",
                s.label,
                root.display()
            )));
        }
    }

    let mut summaries = Vec::with_capacity(setups.len());
    for setup in &setups {
        let summary = run_setup(setup, &root.join(&setup.label))?;
        eprintln!(
            "{}: mean {:.6e} sd {:.3e} over {} runs ({:.1}s)",
            setup.label, summary.mean_final, summary.std_final, summary.repetitions, summary.wall_time_secs
        );
        summaries.push(summary);
    }
    update_manifest(&root, &setups)?;
    Ok(summaries)
}

fn run_setup(setup: &Setup, dir: &Path) -> Result<SetupSummary, CliError> {
    let started = Instant::now();
    let (traces, replicated) =
        run_replicated(&setup.archipelago, setup.spec.repetitions).map_err(|e| CliError::runtime(format!("{}: {e}", setup.label)))?;
    let wall = started.elapsed().as_secs_f64();

    let record = SetupRecord::from(setup);
    let write = || -> anyhow::Result<SetupSummary> {
        if dir.exists() {
            fs::remove_dir_all(dir).with_context(|| format!("clearing {}", dir.display()))?;
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_json(&dir.join(SETUP_FILE), &record)?;
        for trace in &traces {
            let header = TraceHeader {
                config_hash: setup.hash.clone(),
                master_seed: setup.spec.master_seed,
                run_seed: seed::repetition_seed(setup.spec.master_seed, u64::from(trace.run_id)),
            };
            let path = dir.join(trace_file_name(trace.run_id));
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_trace_csv(BufWriter::new(file), &header, trace)?;
        }
        let summary = SetupSummary::new(&record, &replicated, wall);
        write_json(&dir.join(SUMMARY_FILE), &summary)?;
        Ok(summary)
    };
    write().map_err(CliError::Runtime)
}

/// Adds or replaces this batch's entries in the root manifest.
fn update_manifest(root: &Path, setups: &[Setup]) -> Result<(), CliError> {
    let path = root.join(MANIFEST_FILE);
    let mut entries: Vec<ManifestEntry> = if path.is_file() {
        crate::output::read_json(&path)?
    } else {
        Vec::new()
    };
    for s in setups {
        entries.retain(|e| e.label != s.label);
        entries.push(ManifestEntry {
            label: s.label.clone(),
            group: s.group.clone(),
            topology_label: s.topology_label.clone(),
            config_hash: s.hash.clone(),
        });
    }
    write_json(&path, &entries).map_err(CliError::Runtime)
}
