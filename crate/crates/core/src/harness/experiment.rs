//! Model × imbalance × combiner comparison grid with per-cell medians.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::report::{fmt4, full, median, write_csv_rows, write_text, TextTable};
use super::run::{evaluate_model, train_on_split};
use crate::data::Split;
use crate::error::{Error, ErrorCategory, Result};
use crate::losses::LossCombiner;
use crate::metrics::MetricsReport;
use crate::model::{EncoderKind, Imbalance, ModelDims, ModelKind, TrainConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentGrid {
    pub models: Vec<ModelKind>,
    pub imbalance: Vec<Imbalance>,
    pub combiners: Vec<LossCombiner>,
    /// Empty means the run seed alone.
    pub seeds: Vec<u64>,
    /// Run cells on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            models: ModelKind::DEFAULT_GRID.to_vec(),
            imbalance: vec![Imbalance::Smote, Imbalance::WeightedClass],
            combiners: vec![LossCombiner::Naive { lambda: 0.5 }, LossCombiner::VarianceWeighted],
            seeds: Vec::new(),
            parallel: false,
        }
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.imbalance.is_empty() || self.combiners.is_empty() {
            return Err(Error::Config("experiment grid needs at least one model, imbalance method and combiner".into()));
        }
        for c in &self.combiners {
            c.validate()?;
        }
        Ok(())
    }

    /// Cross product in listing order. Kinds without a label-aware encoder
    /// ignore the combiner and appear once per imbalance method.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out: Vec<Cell> = Vec::new();
        for &model in &self.models {
            for &imbalance in &self.imbalance {
                if model.uses_combiner() {
                    for &c in &self.combiners {
                        out.push(Cell {
                            model,
                            imbalance,
                            combiner: Some(c),
                        });
                    }
                } else {
                    out.push(Cell {
                        model,
                        imbalance,
                        combiner: None,
                    });
                }
            }
        }
        let mut seen = Vec::with_capacity(out.len());
        out.retain(|c| {
            if seen.contains(c) {
                false
            } else {
                seen.push(*c);
                true
            }
        });
        out
    }

    pub fn seeds_or(&self, run_seed: u64) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![run_seed]
        } else {
            self.seeds.clone()
        }
    }
}

pub fn imbalance_abbrev(i: Imbalance) -> &'static str {
    match i {
        Imbalance::WeightedClass => "WC",
        Imbalance::Smote => "SMOTE",
        Imbalance::None => "NONE",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub model: ModelKind,
    pub imbalance: Imbalance,
    pub combiner: Option<LossCombiner>,
}

impl Cell {
    /// `SQAE+LR WC VWL`, `NN SMOTE`.
    pub fn name(&self) -> String {
        let mut s = format!("{} {}", self.model, imbalance_abbrev(self.imbalance));
        if let Some(c) = self.combiner {
            s.push(' ');
            s.push_str(c.abbrev());
        }
        s
    }

    pub fn train_config(&self, base: &TrainConfig, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            imbalance: self.imbalance,
            loss_combiner: self.combiner.unwrap_or(base.loss_combiner),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub category: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRun {
    pub cell: usize,
    pub seed: u64,
    pub outcome: std::result::Result<MetricsReport, RunFailure>,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub cells: Vec<Cell>,
    pub seeds: Vec<u64>,
    pub head_names: Vec<String>,
    pub runs: Vec<CellRun>,
    /// First error in run order, kept for the exit status.
    pub first_error: Option<Error>,
}

impl ExperimentResult {
    pub fn n_ok(&self) -> usize {
        self.runs.iter().filter(|r| r.outcome.is_ok()).count()
    }

    pub fn all_failed(&self) -> bool {
        self.n_ok() == 0
    }

    fn ok_runs(&self) -> impl Iterator<Item = (&Cell, &MetricsReport)> {
        self.runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|m| (&self.cells[r.cell], m)))
    }
}

/// Runs every cell with every seed. Each seed regenerates (or reloads) the
/// data and its split, shared by all cells of that seed.
pub fn run_experiment<T: Scalar>(cfg: &RunConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let grid = &cfg.experiment;
    let cells = grid.cells();
    let seeds = grid.seeds_or(cfg.seed);
    let splits: Vec<std::result::Result<Split<T>, Error>> =
        seeds.iter().map(|&s| cfg.data.load_split(s)).collect();
    let head_names = splits
        .iter()
        .find_map(|s| s.as_ref().ok().map(|s| s.train.head_names.clone()))
        .unwrap_or_default();

    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..seeds.len()).map(move |s| (c, s))).collect();
    let run_one = |&(c, s): &(usize, usize)| -> Result<MetricsReport> {
        let split = splits[s].as_ref().map_err(clone_error)?;
        let cell = &cells[c];
        let tc = cell.train_config(&cfg.train, seeds[s]);
        let trained = train_on_split(cell.model, &cfg.dims, split, &tc)?;
        evaluate_model(&trained.model, &split.test, cfg.metrics.beta, &split.train.labels.all_counts())
    };
    let results: Vec<Result<MetricsReport>> = if grid.parallel {
        jobs.par_iter().map(run_one).collect()
    } else {
        jobs.iter().map(run_one).collect()
    };

    let mut first_error = None;
    let runs = jobs
        .iter()
        .zip(results)
        .map(|(&(c, s), r)| CellRun {
            cell: c,
            seed: seeds[s],
            outcome: r.map_err(|e| {
                let f = RunFailure {
                    category: e.category().as_str().into(),
                    message: e.to_string(),
                };
                first_error.get_or_insert(e);
                f
            }),
        })
        .collect();
    Ok(ExperimentResult {
        cells,
        seeds,
        head_names,
        runs,
        first_error,
    })
}

/// Reproduces an error for every cell that shares a failed data load.
fn clone_error(e: &Error) -> Error {
    let msg = e.to_string();
    match e.category() {
        ErrorCategory::Config => Error::Config(msg),
        ErrorCategory::Numeric => Error::NonFinite(msg),
        ErrorCategory::Data => Error::InsufficientData(msg),
        ErrorCategory::Internal => Error::Internal(msg),
    }
}

pub const LONG_HEADER: [&str; 17] = [
    "seed", "cell", "model", "imbalance", "combiner", "head", "support", "tp", "fp", "tn", "fn", "recall",
    "precision", "f_beta", "beta", "status", "error",
];

/// One row per successful cell × seed × head, plus one `failed` row per
/// failed cell × seed.
pub fn long_rows(res: &ExperimentResult) -> Vec<Vec<String>> {
    let mut rows = vec![LONG_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for run in &res.runs {
        let cell = &res.cells[run.cell];
        let prefix = vec![
            run.seed.to_string(),
            cell.name(),
            cell.model.to_string(),
            cell.imbalance.as_str().to_string(),
            cell.combiner.map_or(String::new(), |c| c.abbrev().to_string()),
        ];
        match &run.outcome {
            Ok(report) => {
                for h in &report.heads {
                    let c = &h.counts;
                    let mut r = prefix.clone();
                    r.extend([
                        h.head.clone(),
                        h.support().to_string(),
                        c.tp.to_string(),
                        c.fp.to_string(),
                        c.tn.to_string(),
                        c.fn_.to_string(),
                        full(h.recall),
                        full(h.precision),
                        full(h.f_beta),
                        full(h.beta),
                        "ok".into(),
                        String::new(),
                    ]);
                    rows.push(r);
                }
            }
            Err(f) => {
                let mut r = prefix;
                r.extend(std::iter::repeat_n(String::new(), 10));
                r.push("failed".into());
                r.push(format!("{}: {}", f.category, f.message));
                rows.push(r);
            }
        }
    }
    rows
}

fn head_medians<'a>(
    runs: impl Iterator<Item = &'a MetricsReport>,
    head: usize,
) -> (Option<f64>, Option<f64>) {
    let (mut rec, mut fb) = (Vec::new(), Vec::new());
    for m in runs {
        if let Some(h) = m.heads.get(head) {
            rec.extend(h.recall);
            fb.extend(h.f_beta);
        }
    }
    (median(&rec), median(&fb))
}

/// Per output × imbalance method, medians over every successful run that
/// used that method.
pub fn imbalance_table(res: &ExperimentResult) -> TextTable {
    let mut methods: Vec<Imbalance> = Vec::new();
    for c in &res.cells {
        if !methods.contains(&c.imbalance) {
            methods.push(c.imbalance);
        }
    }
    let mut t = TextTable::new(["Output", "IMB Method", "Recall", "F_beta imb"]);
    for (j, name) in res.head_names.iter().enumerate() {
        for (k, &m) in methods.iter().enumerate() {
            let (r, f) = head_medians(res.ok_runs().filter(|(c, _)| c.imbalance == m).map(|(_, r)| r), j);
            let label = if k == 0 { name.clone() } else { String::new() };
            t.push([label, m.display_name().to_string(), fmt4(r), fmt4(f)]);
        }
    }
    t
}

/// Single-layer versus stacked quality-driven encoders per output. `None`
/// when the grid holds no quality-driven kinds.
pub fn depth_table(res: &ExperimentResult) -> Option<TextTable> {
    let variants = [(false, "QAE"), (true, "SQAE")];
    let present: Vec<_> = variants
        .iter()
        .filter(|(s, _)| res.cells.iter().any(|c| c.model.encoder == EncoderKind::Quality && c.model.stacked == *s))
        .collect();
    if present.is_empty() {
        return None;
    }
    let mut t = TextTable::new(["Output", "AE", "Recall", "F_beta imb"]);
    for (j, name) in res.head_names.iter().enumerate() {
        for (k, (stacked, label)) in present.iter().enumerate() {
            let runs = res
                .ok_runs()
                .filter(|(c, _)| c.model.encoder == EncoderKind::Quality && c.model.stacked == *stacked)
                .map(|(_, r)| r);
            let (r, f) = head_medians(runs, j);
            let out = if k == 0 { name.clone() } else { String::new() };
            t.push([out, label.to_string(), fmt4(r), fmt4(f)]);
        }
    }
    Some(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub cell: Cell,
    pub recall: Option<f64>,
    pub f_beta: Option<f64>,
    pub ok: usize,
    pub total: usize,
}

/// Cells by the median over seeds of their macro-average F-beta, best first.
pub fn ranking(res: &ExperimentResult) -> Vec<RankEntry> {
    let mut out: Vec<RankEntry> = res
        .cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let runs: Vec<&CellRun> = res.runs.iter().filter(|r| r.cell == i).collect();
            let ok: Vec<&MetricsReport> = runs.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let rec: Vec<f64> = ok.iter().filter_map(|m| m.macro_avg.recall.mean).collect();
            let fb: Vec<f64> = ok.iter().filter_map(|m| m.macro_avg.f_beta.mean).collect();
            RankEntry {
                cell: *cell,
                recall: median(&rec),
                f_beta: median(&fb),
                ok: ok.len(),
                total: runs.len(),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        let key = |e: &RankEntry| e.f_beta.unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a))
    });
    out
}

pub fn ranking_table(entries: &[RankEntry]) -> TextTable {
    let mut t = TextTable::new(["Rank", "Model", "Recall", "F_beta imb", "Runs"]);
    for (i, e) in entries.iter().enumerate() {
        t.push([
            (i + 1).to_string(),
            e.cell.name(),
            fmt4(e.recall),
            fmt4(e.f_beta),
            format!("{}/{}", e.ok, e.total),
        ]);
    }
    t
}

fn dims_list(d: &[usize]) -> String {
    let parts: Vec<String> = d.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// Abbreviation legend for the ranking.
pub fn legend(dims: &ModelDims) -> String {
    format!(
        "AE: autoencoder, Q: quality-driven, S: stacked (with hidden layers {}), WC: weighted class, \
         WL: weighted loss, VWL: variance weighted loss, LR: linear regression classifier, \
         NN: fully connected neural net classifier (with hidden layers {})",
        dims_list(&dims.hidden),
        dims_list(&dims.nn_hidden)
    )
}

pub fn summary_text(res: &ExperimentResult, dims: &ModelDims) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "cells {}, seeds {:?}, runs ok {}/{}\n\n",
        res.cells.len(),
        res.seeds,
        res.n_ok(),
        res.runs.len()
    ));
    s.push_str("Imbalance performance across outputs (median over runs)\n\n");
    s.push_str(&imbalance_table(res).render());
    if let Some(t) = depth_table(res) {
        s.push_str("\nSingle-layer vs stacked quality-driven autoencoder (median over runs)\n\n");
        s.push_str(&t.render());
    }
    s.push_str("\nAverage output performance by model (median over seeds of the macro average)\n\n");
    s.push_str(&ranking_table(&ranking(res)).render());
    s.push('\n');
    s.push_str(&legend(dims));
    s.push('\n');
    s
}

/// `runs.csv` (long format) and `summary.txt` in `dir`.
pub fn write_experiment(dir: &Path, res: &ExperimentResult, dims: &ModelDims) -> Result<()> {
    write_csv_rows(&dir.join("runs.csv"), &long_rows(res))?;
    write_text(&dir.join("summary.txt"), &summary_text(res, dims))
}
