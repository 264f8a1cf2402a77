use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::runner::{
    summarize_offline, summarize_online, OfflineResults, OnlineResults, SweepResults,
};
use crate::numeric::{fmt_sig17, fnv1a_f64};

pub const ONLINE_RAW_HEADER: [&str; 9] = [
    "learner", "seed", "t", "x_hash", "a1_idx", "a2_idx", "y", "step_regret", "cum_regret",
];
pub const ONLINE_SUMMARY_HEADER: [&str; 7] = ["learner", "t", "mean_step", "std_step", "mean_cum", "std_cum", "n_seeds"];
pub const OFFLINE_RAW_HEADER: [&str; 4] = ["learner", "seed", "m", "gap"];
pub const OFFLINE_SUMMARY_HEADER: [&str; 6] = ["learner", "m", "mean_gap", "std_gap", "n_seeds", "loglog_slope"];

/// Paths of the files one subcommand wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub raw: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush()?;
    Ok(())
}

fn prepare(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let config = dir.join("config.toml");
    fs::write(&config, cfg.to_canonical_toml())?;
    Ok(config)
}

/// Hex FNV-1a of a context's bit pattern.
pub fn context_hash(x: &[f64]) -> String {
    format!("{:016x}", fnv1a_f64(x))
}

fn online_raw_rows<'a>(results: &'a OnlineResults, prefix: &'a [String]) -> impl Iterator<Item = Vec<String>> + 'a {
    results.runs.iter().flat_map(move |run| {
        let mut cum = 0.0;
        run.rounds.iter().map(move |r| {
            let mut row = prefix.to_vec();
            let (step, total) = match r.step_regret {
                Some(v) => {
                    cum += v;
                    (fmt_sig17(v), fmt_sig17(cum))
                }
                None => (String::new(), String::new()),
            };
            row.extend([
                run.learner.clone(),
                run.repetition.to_string(),
                r.t.to_string(),
                context_hash(&r.x),
                r.a1.to_string(),
                r.a2.to_string(),
                if r.y { "1" } else { "0" }.to_string(),
                step,
                total,
            ]);
            row
        })
    })
}

fn online_summary_rows(results: &OnlineResults, prefix: &[String]) -> Vec<Vec<String>> {
    summarize_online(results)
        .into_iter()
        .map(|s| {
            let mut row = prefix.to_vec();
            row.extend([
                s.learner,
                s.t.to_string(),
                fmt_sig17(s.mean_step),
                fmt_sig17(s.std_step),
                fmt_sig17(s.mean_cum),
                fmt_sig17(s.std_cum),
                s.n_seeds.to_string(),
            ]);
            row
        })
        .collect()
}

/// `online_raw.csv`, `online_summary.csv` and the canonical config.
pub fn write_online(dir: &Path, cfg: &ExperimentConfig, results: &OnlineResults) -> Result<Written> {
    let config = prepare(dir, cfg)?;
    let raw = dir.join("online_raw.csv");
    let summary = dir.join("online_summary.csv");
    write_rows(&raw, &ONLINE_RAW_HEADER, online_raw_rows(results, &[]))?;
    write_rows(&summary, &ONLINE_SUMMARY_HEADER, online_summary_rows(results, &[]))?;
    Ok(Written { raw, summary, config })
}

/// Online schemas with a leading `eta` column, one group per η.
pub fn write_sweep(dir: &Path, cfg: &ExperimentConfig, results: &SweepResults) -> Result<Written> {
    let config = prepare(dir, cfg)?;
    let raw = dir.join("sweep_raw.csv");
    let summary = dir.join("sweep_summary.csv");
    let with_eta = |h: &[&'static str]| -> Vec<&'static str> { std::iter::once("eta").chain(h.iter().copied()).collect() };
    let prefixes: Vec<Vec<String>> = results.groups.iter().map(|(eta, _)| vec![fmt_sig17(*eta)]).collect();
    write_rows(
        &raw,
        &with_eta(&ONLINE_RAW_HEADER),
        results
            .groups
            .iter()
            .zip(&prefixes)
            .flat_map(|((_, g), p)| online_raw_rows(g, p)),
    )?;
    write_rows(
        &summary,
        &with_eta(&ONLINE_SUMMARY_HEADER),
        results
            .groups
            .iter()
            .zip(&prefixes)
            .flat_map(|((_, g), p)| online_summary_rows(g, p)),
    )?;
    Ok(Written { raw, summary, config })
}

/// `offline_raw.csv`, `offline_summary.csv` and the canonical config. The
/// slope field is empty when the fit is underdetermined.
pub fn write_offline(dir: &Path, cfg: &ExperimentConfig, results: &OfflineResults) -> Result<Written> {
    let config = prepare(dir, cfg)?;
    let raw = dir.join("offline_raw.csv");
    let summary = dir.join("offline_summary.csv");
    write_rows(
        &raw,
        &OFFLINE_RAW_HEADER,
        results.rows.iter().map(|r| {
            vec![
                r.learner.clone(),
                r.repetition.to_string(),
                r.m.to_string(),
                fmt_sig17(r.gap),
            ]
        }),
    )?;
    write_rows(
        &summary,
        &OFFLINE_SUMMARY_HEADER,
        summarize_offline(results).into_iter().map(|s| {
            vec![
                s.learner,
                s.m.to_string(),
                fmt_sig17(s.mean_gap),
                fmt_sig17(s.std_gap),
                s.n_seeds.to_string(),
                s.loglog_slope.map(fmt_sig17).unwrap_or_default(),
            ]
        }),
    )?;
    Ok(Written { raw, summary, config })
}
