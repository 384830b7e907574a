//! Subcommand bodies. Each writes only inside its output directory.

use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::experiment::{run_experiment, write_experiment, ExperimentResult};
use super::headmode::{headmode_compare, HeadmodeResult};
use super::report::{self, fmt4, median, write_csv_rows, write_text, TextTable};
use super::run::{evaluate_model, train_on_split};
use crate::data::{csv_header, load_features, load_labels, save_csv, Dataset};
use crate::error::{Error, Result};
use crate::heads::head_units;
use crate::labels::{HeadLabels, Label};
use crate::metrics::MetricsReport;
use crate::model::{count_parameters, Checkpoint, History, ParamCount};
use crate::scalar::Scalar;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug)]
pub struct TrainOutput<T> {
    pub checkpoint: Checkpoint<T>,
    pub histories: Vec<History>,
    pub report: MetricsReport,
}

/// Trains per `cfg`, writing `config.toml`, `checkpoint.json`,
/// `history.csv`, `metrics.csv` and `metrics.txt` into `cfg.out_dir`.
pub fn cmd_train<T: Scalar>(cfg: &RunConfig) -> Result<TrainOutput<T>> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    ensure_dir(out)?;
    cfg.echo(out)?;
    let split = cfg.data.load_split::<T>(cfg.seed)?;
    let tc = cfg.train_config();
    let trained = train_on_split(cfg.model, &cfg.dims, &split, &tc)?;
    let train_counts = split.train.labels.all_counts();
    let report = evaluate_model(&trained.model, &split.test, cfg.metrics.beta, &train_counts)?;
    let checkpoint = Checkpoint::new(
        trained.model,
        tc,
        cfg.dims.clone(),
        split.train.feature_names.clone(),
        split.train.head_names.clone(),
        train_counts,
    );
    checkpoint.save(out.join("checkpoint.json"))?;
    report::write_history(&out.join("history.csv"), &trained.histories)?;
    report::write_metrics(out, &report)?;
    Ok(TrainOutput {
        checkpoint,
        histories: trained.histories,
        report,
    })
}

/// Splits a CSV header into the checkpoint's feature columns and the heads
/// present. A feature count that differs from the checkpoint is a shape
/// error naming the expected width.
fn match_columns(header: &[String], features: &[String], heads: &[String]) -> Result<Vec<String>> {
    let present: Vec<String> = heads.iter().filter(|h| header.contains(h)).cloned().collect();
    let width = header.iter().filter(|c| !heads.contains(c)).count();
    if let Some(missing) = features.iter().find(|f| !header.contains(f)) {
        if width != features.len() {
            return Err(Error::shape(
                "evaluate",
                format!("{} feature columns as in the checkpoint", features.len()),
                format!("{width} columns"),
            ));
        }
        return Err(Error::UnknownColumn(missing.clone()));
    }
    Ok(present)
}

/// Loads labelled data laid out like the checkpoint. Heads missing from
/// the file become fully unobserved; rows with no observed label are
/// dropped since they cannot enter any metric.
pub fn load_for_checkpoint<T: Scalar>(path: &Path, ck: &Checkpoint<T>) -> Result<Dataset<T>> {
    let header = csv_header(path)?;
    let present = match_columns(&header, &ck.feature_names, &ck.head_names)?;
    let x = load_features::<T>(path, &ck.feature_names)?;
    let raw = load_labels(path, &present)?;
    let k = ck.head_names.len();
    let pos: Vec<Option<usize>> = ck.head_names.iter().map(|h| present.iter().position(|p| p == h)).collect();
    let mut keep = Vec::with_capacity(x.rows());
    let mut labels: Vec<Label> = Vec::with_capacity(x.rows() * k);
    for i in 0..x.rows() {
        let row: Vec<Label> = pos.iter().map(|p| p.and_then(|j| raw[i * present.len() + j])).collect();
        if row.iter().any(Option::is_some) {
            keep.push(i);
            labels.extend(row);
        }
    }
    if keep.is_empty() {
        return Err(Error::InsufficientData(format!("{} has no observed labels", path.display())));
    }
    Dataset::new(
        x.select_rows(&keep),
        HeadLabels::new(k, labels)?,
        ck.feature_names.clone(),
        ck.head_names.clone(),
    )
}

/// Scores a checkpoint on `data` (a CSV) or, without one, on the test
/// split regenerated from `cfg` and the checkpoint's seed.
pub fn cmd_evaluate<T: Scalar>(cfg: &RunConfig, checkpoint: &Path, data: Option<&Path>) -> Result<MetricsReport> {
    let ck = Checkpoint::<T>::load(checkpoint)?;
    let ds = match data {
        Some(p) => load_for_checkpoint(p, &ck)?,
        None => cfg.data.load_split::<T>(ck.seed)?.test,
    };
    let report = evaluate_model(&ck.model, &ds, cfg.metrics.beta, &ck.train_class_counts)?;
    ensure_dir(&cfg.out_dir)?;
    report::write_metrics(&cfg.out_dir, &report)?;
    Ok(report)
}

/// Writes `predictions.csv`: per head the positive probability and the
/// hard label. Extra columns in `data` are ignored.
pub fn cmd_predict<T: Scalar>(cfg: &RunConfig, checkpoint: &Path, data: &Path) -> Result<PathBuf> {
    let ck = Checkpoint::<T>::load(checkpoint)?;
    let header = csv_header(data)?;
    match_columns(&header, &ck.feature_names, &ck.head_names)?;
    let x = load_features::<T>(data, &ck.feature_names)?;
    let pred = ck.model.predict_raw(&x)?;
    let mut rows = Vec::with_capacity(x.rows() + 1);
    let mut head = vec!["row".to_string()];
    for h in &ck.head_names {
        head.push(format!("p_{h}"));
        head.push(format!("yhat_{h}"));
    }
    rows.push(head);
    for i in 0..x.rows() {
        let mut r = vec![i.to_string()];
        for j in 0..ck.head_names.len() {
            r.push(pred.probabilities.get(i, j).to_string());
            r.push(u8::from(pred.labels[i][j]).to_string());
        }
        rows.push(r);
    }
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("predictions.csv");
    write_csv_rows(&path, &rows)?;
    Ok(path)
}

/// Writes the synthetic dataset to `data.csv` next to the echoed config.
pub fn cmd_generate<T: Scalar>(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    cfg.echo(&cfg.out_dir)?;
    let ds: Dataset<T> = crate::data::SyntheticSpec {
        seed: cfg.seed,
        ..cfg.data.synthetic.clone()
    }
    .generate()?;
    let path = cfg.out_dir.join("data.csv");
    save_csv(&path, &ds)?;
    Ok(path)
}

/// Parameter table of a stacked model with `n_heads` outputs.
pub fn cmd_params(input_dim: usize, hidden: &[usize], n_heads: usize) -> Result<(ParamCount, String)> {
    let units = head_units(n_heads);
    let pc = count_parameters(input_dim, hidden, units)?;
    let mut t = TextTable::new(["Layers", "Encoder", "Decoder x", "Decoder y", "Parameters", "Formula"]);
    let mut prev = input_dim;
    for (k, (l, &h)) in pc.layers.iter().zip(hidden).enumerate() {
        t.push([
            format!("Autoencoder_{}", k + 1),
            l.encoder.to_string(),
            l.decoder_x.to_string(),
            l.decoder_y.to_string(),
            l.total().to_string(),
            format!("{} * {h} + {} * {prev} + {} * {units}", prev + 1, h + 1, h + 1),
        ]);
        prev = h;
    }
    t.push([
        "Classifier".to_string(),
        String::new(),
        String::new(),
        pc.classifier.to_string(),
        pc.classifier.to_string(),
        format!("{} * {units}", prev + 1),
    ]);
    let text = format!(
        "{}\nTotal              {}\nPlain autoencoder  {}\nOverhead           {:.2}%\n",
        t.render(),
        pc.total,
        pc.plain_ae,
        100.0 * pc.overhead_ratio
    );
    Ok((pc, text))
}

/// Runs the grid and writes `runs.csv` and `summary.txt`. Fails only when
/// every run failed.
pub fn cmd_experiment<T: Scalar>(cfg: &RunConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    cfg.echo(&cfg.out_dir)?;
    let mut res = run_experiment::<T>(cfg)?;
    write_experiment(&cfg.out_dir, &res, &cfg.dims)?;
    if res.all_failed() {
        return Err(res
            .first_error
            .take()
            .unwrap_or_else(|| Error::Internal("experiment produced no runs".into())));
    }
    Ok(res)
}

/// Both variants per seed on that seed's training split. Writes one loss
/// series per variant and seed plus `headmode_summary.{csv,txt}`.
pub fn cmd_headmode<T: Scalar>(cfg: &RunConfig) -> Result<Vec<HeadmodeResult>> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    ensure_dir(out)?;
    cfg.echo(out)?;
    let hidden = *cfg.dims.hidden.last().ok_or_else(|| Error::Config("hidden dims must not be empty".into()))?;
    let seeds = cfg.headmode.seeds_or(cfg.seed);
    let mut results = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let split = cfg.data.load_split::<T>(seed)?;
        let tc = crate::model::TrainConfig {
            seed,
            ..cfg.train.clone()
        };
        let r = headmode_compare(&split.train, hidden, &tc, &cfg.headmode)?;
        report::write_history(&out.join(format!("headmode_seed{seed}_categorical.csv")), &[r.categorical.clone()])?;
        report::write_history(&out.join(format!("headmode_seed{seed}_multihead.csv")), &[r.multihead.clone()])?;
        results.push(r);
    }
    let (csv_rows, text) = headmode_summary(&results, cfg.headmode.reference_epoch);
    write_csv_rows(&out.join("headmode_summary.csv"), &csv_rows)?;
    write_text(&out.join("headmode_summary.txt"), &text)?;
    Ok(results)
}

fn headmode_summary(results: &[HeadmodeResult], reference_epoch: usize) -> (Vec<Vec<String>>, String) {
    let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
    let mut rows = vec![[
        "seed",
        "reference_loss",
        "categorical_epoch",
        "categorical_updates",
        "multihead_epoch",
        "multihead_updates",
        "multihead_faster",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    let mut t = TextTable::new(["Seed", "Reference loss", "Categorical reach", "Multi-head reach", "Multi-head faster"]);
    let reach = |r: &Option<super::headmode::Reach>| {
        r.as_ref()
            .map_or("never".to_string(), |r| format!("epoch {} ({} updates)", r.epoch, r.updates))
    };
    for r in results {
        rows.push(vec![
            r.seed.to_string(),
            format!("{}", r.reference_loss),
            opt(r.categorical_reach.as_ref().map(|x| x.epoch)),
            opt(r.categorical_reach.as_ref().map(|x| x.updates)),
            opt(r.multihead_reach.as_ref().map(|x| x.epoch)),
            opt(r.multihead_reach.as_ref().map(|x| x.updates)),
            r.multihead_faster().to_string(),
        ]);
        t.push([
            r.seed.to_string(),
            fmt4(Some(r.reference_loss)),
            reach(&r.categorical_reach),
            reach(&r.multihead_reach),
            r.multihead_faster().to_string(),
        ]);
    }
    let updates = |f: fn(&HeadmodeResult) -> Option<usize>| {
        let v: Vec<f64> = results.iter().map(|r| f(r).map_or(f64::INFINITY, |u| u as f64)).collect();
        median(&v)
    };
    let med_a = updates(|r| r.categorical_reach.as_ref().map(|x| x.updates));
    let med_b = updates(|r| r.multihead_reach.as_ref().map(|x| x.updates));
    let show = |v: Option<f64>| v.map_or("n/a".into(), |x| if x.is_finite() { format!("{x}") } else { "never".into() });
    let text = format!(
        "Reference level: multi-headed loss at epoch {reference_epoch}\n\n{}\nmedian updates to reference: categorical {}, multi-head {}\n",
        t.render(),
        show(med_a),
        show(med_b)
    );
    (rows, text)
}
