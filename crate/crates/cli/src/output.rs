//! Result files: per-repetition trace CSVs, setup records and summaries.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use migtopo_core::archipelago::{ReplicatedSummary, TraceEntry};
use migtopo_core::RunTrace;
use serde::{Deserialize, Serialize};

use crate::config::{Setup, SetupSpec};
use crate::error::CliError;

pub const SETUP_FILE: &str = "setup.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance lines written as `#` comments at the top of a trace CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub config_hash: String,
    pub master_seed: u64,
    pub run_seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    run_id: u32,
    island_id: usize,
    period: u32,
    evals: u64,
    best_f: f64,
}

pub fn trace_file_name(run_id: u32) -> String {
    format!("run_{run_id:03}.csv")
}

/// Writes one repetition's trace. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_trace_csv<W: Write>(out: W, header: &TraceHeader, trace: &RunTrace) -> anyhow::Result<()> {
    let mut out = out;
    writeln!(out, "# config_hash={}", header.config_hash)?;
    writeln!(out, "# master_seed={}", header.master_seed)?;
    writeln!(out, "# run_seed={}", header.run_seed)?;
    let mut w = csv::Writer::from_writer(out);
    for (island_id, entries) in trace.islands.iter().enumerate() {
        for e in entries {
            w.serialize(TraceRow {
                run_id: trace.run_id,
                island_id,
                period: e.period,
                evals: e.evals,
                best_f: e.best_f,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(text: &str) -> anyhow::Result<(TraceHeader, RunTrace)> {
    let mut hash = None;
    let mut master = None;
    let mut run = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let Some((key, value)) = line.trim_start_matches('#').trim().split_once('=') else {
            continue;
        };
        match key.trim() {
            "config_hash" => hash = Some(value.trim().to_string()),
            "master_seed" => master = Some(value.trim().parse::<u64>()?),
            "run_seed" => run = Some(value.trim().parse::<u64>()?),
            _ => {}
        }
    }
    let header = TraceHeader {
        config_hash: hash.context("missing config_hash header")?,
        master_seed: master.context("missing master_seed header")?,
        run_seed: run.context("missing run_seed header")?,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut islands: Vec<Vec<TraceEntry>> = Vec::new();
    let mut run_id = None;
    for row in reader.deserialize() {
        let row: TraceRow = row?;
        if *run_id.get_or_insert(row.run_id) != row.run_id {
            anyhow::bail!("mixed run ids in one trace file");
        }
        if islands.len() <= row.island_id {
            islands.resize_with(row.island_id + 1, Vec::new);
        }
        islands[row.island_id].push(TraceEntry {
            period: row.period,
            evals: row.evals,
            best_f: row.best_f,
        });
    }
    let periods = islands.first().map_or(0, Vec::len);
    if islands.iter().any(|i| i.len() != periods) {
        anyhow::bail!("islands report different numbers of periods");
    }
    Ok((
        header,
        RunTrace {
            run_id: run_id.unwrap_or(0),
            islands,
        },
    ))
}

/// Identity of a setup directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupRecord {
    pub config_hash: String,
    pub label: String,
    pub topology_label: String,
    pub group: String,
    pub spec: SetupSpec,
}

impl From<&Setup> for SetupRecord {
    fn from(s: &Setup) -> Self {
        SetupRecord {
            config_hash: s.hash.clone(),
            label: s.label.clone(),
            topology_label: s.topology_label.clone(),
            group: s.group.clone(),
            spec: s.spec.clone(),
        }
    }
}

/// Replicated results of one setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupSummary {
    pub config_hash: String,
    pub master_seed: u64,
    pub label: String,
    pub repetitions: usize,
    pub periods: usize,
    pub final_values: Vec<f64>,
    pub mean_final: f64,
    pub std_final: f64,
    pub per_period_mean: Vec<f64>,
    pub per_period_std: Vec<f64>,
    pub wall_time_secs: f64,
}

impl SetupSummary {
    pub fn new(record: &SetupRecord, summary: &ReplicatedSummary, wall_time_secs: f64) -> Self {
        SetupSummary {
            config_hash: record.config_hash.clone(),
            master_seed: record.spec.master_seed,
            label: record.label.clone(),
            repetitions: summary.repetitions,
            periods: summary.per_period_mean.len(),
            final_values: summary.final_values.clone(),
            mean_final: summary.mean_final,
            std_final: summary.std_final,
            per_period_mean: summary.per_period_mean.clone(),
            per_period_std: summary.per_period_std.clone(),
            wall_time_secs,
        }
    }
}

/// Entry in the batch manifest at the output root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub group: String,
    pub topology_label: String,
    pub config_hash: String,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// A setup directory loaded back from disk.
#[derive(Debug, Clone)]
pub struct LoadedSetup {
    pub dir: PathBuf,
    pub record: SetupRecord,
    pub traces: Vec<RunTrace>,
}

impl LoadedSetup {
    pub fn final_values(&self) -> Vec<f64> {
        self.traces.iter().map(RunTrace::final_global_best).collect()
    }

    /// Repetitions x periods matrix of the global best.
    pub fn curves(&self) -> Vec<Vec<f64>> {
        self.traces.iter().map(RunTrace::global_best).collect()
    }
}

/// Loads a setup directory, checking that every trace carries the setup's
/// hash.
pub fn load_setup(dir: &Path) -> Result<LoadedSetup, CliError> {
    let record: SetupRecord = read_json(&dir.join(SETUP_FILE))?;
    let corrupt = |m: String| CliError::Validation(format!("{}: {m}", dir.display()));
    let mut traces = Vec::new();
    for r in 0..record.spec.repetitions {
        let path = dir.join(trace_file_name(r as u32));
        let text = fs::read_to_string(&path).map_err(|e| corrupt(format!("cannot read {}: {e}", path.display())))?;
        let (header, trace) = read_trace_csv(&text).map_err(|e| corrupt(format!("{}: {e}", path.display())))?;
        if header.config_hash != record.config_hash {
            return Err(corrupt(format!("{} belongs to a different config", path.display())));
        }
        if trace.islands.len() != record.spec.n_islands {
            return Err(corrupt(format!("{} has {} islands", path.display(), trace.islands.len())));
        }
        traces.push(trace);
    }
    Ok(LoadedSetup {
        dir: dir.to_path_buf(),
        record,
        traces,
    })
}

/// Resolves result paths: a setup directory, or an output root listed by its
/// manifest.
pub fn load_results(paths: &[PathBuf]) -> Result<Vec<LoadedSetup>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        if path.join(SETUP_FILE).is_file() {
            out.push(load_setup(path)?);
        } else if path.join(MANIFEST_FILE).is_file() {
            let manifest: Vec<ManifestEntry> = read_json(&path.join(MANIFEST_FILE))?;
            for entry in manifest {
                let setup = load_setup(&path.join(&entry.label))?;
                if setup.record.config_hash != entry.config_hash {
                    return Err(CliError::Validation(format!(
                        "{}: manifest hash does not match setup",
                        entry.label
                    )));
                }
                out.push(setup);
            }
        } else {
            return Err(CliError::Validation(format!(
                "{} is neither a setup directory nor a result root",
                path.display()
            )));
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation("no results found".into()));
    }
    Ok(out)
}
