//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines always print; exits nonzero if any criterion fails.

use std::time::Instant;

use num_rational::Rational64;
use vwmhqae::activation::Activation;
use vwmhqae::data::{Split, SyntheticSpec};
use vwmhqae::dense::DenseLayer;
use vwmhqae::gradcheck::{finite_difference_grad, max_relative_error};
use vwmhqae::harness::commands::cmd_train;
use vwmhqae::harness::headmode::{headmode_compare, HeadmodeConfig, HeadmodeResult};
use vwmhqae::harness::run::{evaluate_model, train_on_split};
use vwmhqae::harness::RunConfig;
use vwmhqae::labels::{class_weights, ClassWeights, HeadLabels, Label};
use vwmhqae::losses::{combined_loss_variance, LossCombiner, VarianceParams};
use vwmhqae::matrix::Matrix;
use vwmhqae::metrics::{evaluate, f_beta, imbalance_ratio, BetaPolicy};
use vwmhqae::model::{count_parameters, Checkpoint, Imbalance, LayerLoss, ModelKind, QaeLayer, QaeLayerSpec, TrainConfig};
use vwmhqae::rng::Rng;
use vwmhqae::smote::{nearest_neighbors, oversample_heads, smote_oversample_traced};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

const WIDE_INPUT: usize = 632;
const WIDE_HIDDEN: [usize; 4] = [400, 200, 100, 50];
const WIDE_HEAD_UNITS: usize = 16;

fn c1_parameter_accounting() -> Outcome {
    let pc = count_parameters(WIDE_INPUT, &WIDE_HIDDEN, WIDE_HEAD_UNITS).map_err(|e| e.to_string())?;
    let rows: Vec<usize> = pc.layers.iter().map(|l| l.total()).collect();
    let expected = [
        633 * 400 + 401 * 632 + 401 * 16,
        401 * 200 + 201 * 400 + 201 * 16,
        201 * 100 + 101 * 200 + 101 * 16,
        101 * 50 + 51 * 100 + 51 * 16,
    ];
    check(
        rows == expected && pc.classifier == 51 * 16 && pc.total == 730_562,
        format!("rows {rows:?}, classifier {}, total {}", pc.classifier, pc.total),
        format!("rows {rows:?} vs {expected:?}, classifier {}, total {}", pc.classifier, pc.total),
    )
}

fn c2_overhead() -> Outcome {
    let pc = count_parameters(WIDE_INPUT, &WIDE_HIDDEN, WIDE_HEAD_UNITS).map_err(|e| e.to_string())?;
    let r = pc.overhead_ratio;
    check(
        (0.015..=0.020).contains(&r),
        format!("overhead {:.4}%", 100.0 * r),
        format!("overhead {:.4}% outside [1.5%, 2.0%]", 100.0 * r),
    )
}

fn random_labels(rows: usize, heads: usize, rng: &mut Rng) -> HeadLabels {
    let mut labels: Vec<Label> = Vec::with_capacity(rows * heads);
    for _ in 0..rows {
        let mut row: Vec<Label> = (0..heads)
            .map(|_| (!rng.bernoulli(0.3)).then(|| rng.bernoulli(0.5)))
            .collect();
        if row.iter().all(Option::is_none) {
            row[rng.below(heads)] = Some(rng.bernoulli(0.5));
        }
        labels.extend(row);
    }
    HeadLabels::new(heads, labels).unwrap()
}

fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix<f64> {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.normal()).collect()).unwrap()
}

fn near_kink(layer: &DenseLayer<f64>, x: &Matrix<f64>) -> bool {
    let linear = DenseLayer::new(layer.weights().clone(), layer.bias().to_vec(), Activation::Linear).unwrap();
    linear.infer(x).unwrap().data().iter().any(|v| v.abs() < 1e-3)
}

fn flat_params(layer: &mut QaeLayer<f64>) -> Vec<f64> {
    layer.params_mut().into_iter().flat_map(|p| p.to_vec()).collect()
}

fn set_params(layer: &mut QaeLayer<f64>, p: &[f64]) {
    let mut off = 0;
    for t in layer.params_mut() {
        let n = t.len();
        t.copy_from_slice(&p[off..off + n]);
        off += n;
    }
}

/// One random QAE layer configuration; returns its max relative error.
fn qae_case(case: usize, rng: &mut Rng) -> f64 {
    loop {
        let (n_in, hidden, heads, rows) = (1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(4), 1 + rng.below(8));
        let x = random_matrix(rows, n_in, rng);
        let labels = random_labels(rows, heads, rng);
        let weights: ClassWeights<f64> = class_weights(&labels).unwrap();
        let spec = QaeLayerSpec::new(n_in, hidden, 2 * heads).unwrap();
        let mut layer = QaeLayer::<f64>::init(&spec, true, rng).unwrap();
        for b in [&mut layer.encoder, &mut layer.decoder_x] {
            for v in b.params_mut()[1].iter_mut() {
                *v = 0.3 * rng.normal::<f64>();
            }
        }
        layer.variance = VarianceParams::new(0.5 * rng.normal::<f64>(), 0.5 * rng.normal::<f64>());
        if near_kink(&layer.encoder, &x) {
            continue;
        }
        let loss = match case % 3 {
            0 => LayerLoss::Quality(LossCombiner::VarianceWeighted),
            1 => LayerLoss::Quality(LossCombiner::Naive {
                lambda: rng.uniform_range(0.05, 0.95),
            }),
            _ => LayerLoss::ReconstructionOnly,
        };
        let (_, _, grads) = layer.loss_and_grads(&x, &labels, &weights, loss).unwrap();
        let p0 = flat_params(&mut layer);
        let mut probe = layer.clone();
        let numeric = finite_difference_grad(
            |p: &[f64]| {
                set_params(&mut probe, p);
                Ok(probe.loss_and_grads(&x, &labels, &weights, loss)?.1)
            },
            &p0,
            1e-6,
        )
        .unwrap();
        return max_relative_error(&grads.concat(), &numeric);
    }
}

/// A dense layer under a random linear readout, for each activation.
fn dense_case(act: Activation, rng: &mut Rng) -> f64 {
    loop {
        let (n_in, n_out, rows) = (1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8));
        let x = random_matrix(rows, n_in, rng);
        let readout = random_matrix(rows, n_out, rng);
        let mut layer = DenseLayer::<f64>::glorot(n_in, n_out, act, rng);
        for v in layer.params_mut()[1].iter_mut() {
            *v = 0.3 * rng.normal::<f64>();
        }
        if act == Activation::Relu && near_kink(&layer, &x) {
            continue;
        }
        let (_, cache) = layer.forward(&x).unwrap();
        let g = layer.backward(&cache, &readout).unwrap();
        let analytic: Vec<f64> = g.weights.data().iter().copied().chain(g.bias.iter().copied()).collect();
        let p0: Vec<f64> = layer.params_mut().iter().flat_map(|p| p.to_vec()).collect();
        let mut probe = layer.clone();
        let numeric = finite_difference_grad(
            |p: &[f64]| {
                let [w, b] = probe.params_mut();
                let nw = w.len();
                w.copy_from_slice(&p[..nw]);
                b.copy_from_slice(&p[nw..]);
                let out = probe.infer(&x)?;
                Ok(out.data().iter().zip(readout.data()).map(|(a, r)| a * r).sum())
            },
            &p0,
            1e-6,
        )
        .unwrap();
        return max_relative_error(&analytic, &numeric);
    }
}

fn c3_gradient_oracles() -> Outcome {
    let mut rng = Rng::new(2024);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for case in 0..60 {
        worst = worst.max(qae_case(case, &mut rng));
        n += 1;
    }
    for act in Activation::ALL {
        for _ in 0..10 {
            worst = worst.max(dense_case(act, &mut rng));
            n += 1;
        }
    }
    check(
        worst <= 1e-4,
        format!("{n} configurations, max relative error {worst:.2e}"),
        format!("{n} configurations, max relative error {worst:.2e} > 1e-4"),
    )
}

fn c4_variance_stationarity() -> Outcome {
    let (j_x, j_y) = (2.0_f64, 3.0_f64);
    let mut v = VarianceParams::new(0.0_f64, 0.0);
    for _ in 0..20_000 {
        let g = combined_loss_variance(j_x, j_y, &v);
        v = VarianceParams::new(v.s1() - 0.05 * g.grad_s1, v.s2() - 0.05 * g.grad_s2);
    }
    let (s1, s2) = (v.sigma1_sq(), v.sigma2_sq());
    check(
        (s1 - 2.0).abs() <= 1e-3 && (s2 - 6.0).abs() <= 1e-3,
        format!("sigma1^2 = {s1:.6}, sigma2^2 = {s2:.6}"),
        format!("sigma1^2 = {s1:.6} (want 2), sigma2^2 = {s2:.6} (want 6)"),
    )
}

fn c5_class_weight_identity() -> Outcome {
    let specs = [
        SyntheticSpec::default(),
        SyntheticSpec {
            n_samples: 3_000,
            imbalance_ratios: vec![1.0, 3.0, 17.0],
            observation_rates: vec![1.0, 0.5, 0.8],
            ..SyntheticSpec::default()
        },
        SyntheticSpec {
            n_samples: 1_200,
            n_features: 10,
            latent_rank: 3,
            imbalance_ratios: vec![4.0, 7.5],
            observation_rates: vec![0.9, 0.7],
            ..SyntheticSpec::default()
        },
    ];
    let mut checked = 0;
    for (k, spec) in specs.iter().enumerate() {
        for seed in 0..3 {
            let ds = SyntheticSpec {
                seed,
                ..spec.clone()
            }
            .generate::<f64>()
            .map_err(|e| e.to_string())?;
            let w: ClassWeights<Rational64> = class_weights(&ds.labels).map_err(|e| e.to_string())?;
            for j in 0..ds.n_heads() {
                let c = ds.labels.counts(j);
                if c.negative == 0 || c.positive == 0 {
                    continue;
                }
                let lhs = w.negative[j] * Rational64::from_integer(c.negative as i64);
                let rhs = w.positive[j] * Rational64::from_integer(c.positive as i64);
                if lhs != rhs {
                    return Err(format!("fixture {k} seed {seed} head {j}: {lhs} != {rhs}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} heads hold w0*n0 = w1*n1 exactly"))
}

fn c6_smote() -> Outcome {
    let mut rng = Rng::new(99);
    let (rows, cols, k) = (120, 6, 5);
    let x = random_matrix(rows, cols, &mut rng);
    let mask: Vec<bool> = (0..rows).map(|i| i % 7 == 0).collect();
    let minority_rows: Vec<usize> = (0..rows).filter(|&i| mask[i]).collect();
    let minority = x.select_rows(&minority_rows);
    let neighbors = nearest_neighbors(&minority, k);
    let target = 200;
    let (synth, origins) = smote_oversample_traced(&x, &mask, k, target, &mut Rng::new(5)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (s, o) in origins.iter().enumerate() {
        if !neighbors[o.base].contains(&o.neighbor) {
            return Err(format!("sample {s}: {} is not among the {k} neighbours of {}", o.neighbor, o.base));
        }
        let (a, b) = (minority.row(o.base), minority.row(o.neighbor));
        // Recover the interpolation coefficient from the widest coordinate.
        let c = (0..cols)
            .max_by(|&i, &j| (b[i] - a[i]).abs().total_cmp(&(b[j] - a[j]).abs()))
            .unwrap();
        let u = (synth.get(s, c) - a[c]) / (b[c] - a[c]);
        if !(0.0..=1.0).contains(&u) {
            return Err(format!("sample {s}: coefficient {u} outside [0, 1]"));
        }
        worst = worst.max((u - o.gap).abs());
        for i in 0..cols {
            worst = worst.max((synth.get(s, i) - (a[i] + u * (b[i] - a[i]))).abs());
        }
    }
    if worst > 1e-9 {
        return Err(format!("reconstruction error {worst:.2e} > 1e-9"));
    }

    // Majority rows replaced wholesale: identical output.
    let mut scrambled = x.clone();
    for i in (0..rows).filter(|&i| !mask[i]) {
        for v in scrambled.row_mut(i) {
            *v = 1e3 * rng.normal::<f64>();
        }
    }
    let (again, _) = smote_oversample_traced(&scrambled, &mask, k, target, &mut Rng::new(5)).map_err(|e| e.to_string())?;
    if again != synth {
        return Err("synthetic rows depend on majority rows".into());
    }

    let ds = SyntheticSpec {
        n_samples: 1_500,
        n_features: 12,
        latent_rank: 3,
        ..SyntheticSpec::default()
    }
    .generate::<f64>()
    .map_err(|e| e.to_string())?;
    let (_, labs) = oversample_heads(&ds.features, &ds.labels, k, &mut Rng::new(1)).map_err(|e| e.to_string())?;
    for j in 0..labs.n_heads() {
        let c = labs.counts(j);
        if c.negative != c.positive {
            return Err(format!("head {j} after oversampling: {} vs {}", c.negative, c.positive));
        }
    }
    Ok(format!("{target} samples on neighbour segments (err {worst:.1e}), balanced heads, majority-independent"))
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

struct DeskRun {
    recalls: Vec<Option<f64>>,
    seconds: f64,
}

fn desk_run(seed: u64, imbalance: Imbalance) -> Result<DeskRun, String> {
    let mut cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    cfg.train.imbalance = imbalance;
    let split: Split<f64> = cfg.data.load_split(seed).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let trained = train_on_split(ModelKind::SQAE_LR, &cfg.dims, &split, &cfg.train_config()).map_err(|e| e.to_string())?;
    let seconds = start.elapsed().as_secs_f64();
    let report = evaluate_model(&trained.model, &split.test, cfg.metrics.beta, &split.train.labels.all_counts())
        .map_err(|e| e.to_string())?;
    Ok(DeskRun {
        recalls: report.heads.iter().map(|h| h.recall).collect(),
        seconds,
    })
}

const BETA2_HEAD: usize = 0;
const BETA50_HEAD: usize = 2;

fn c7_imbalance_benefit(weighted: &[DeskRun]) -> Outcome {
    let mut control = Vec::new();
    for &s in &SEEDS {
        control.push(desk_run(s, Imbalance::None)?);
    }
    let recall = |runs: &[DeskRun]| -> Vec<f64> { runs.iter().map(|r| r.recalls[BETA50_HEAD].unwrap_or(0.0)).collect() };
    let (w, c) = (recall(weighted), recall(&control));
    let (mw, mc) = (median(&w), median(&c));
    check(
        mw - mc >= 0.10,
        format!("median recall weighted {mw:.4} vs control {mc:.4} (gain {:.4})", mw - mc),
        format!("median recall weighted {mw:.4} vs control {mc:.4}; per seed {w:?} vs {c:?}"),
    )
}

fn headmode_runs(
    spec: &SyntheticSpec,
    train: &TrainConfig,
    hidden: usize,
    hm: &HeadmodeConfig,
    seeds: &[u64],
) -> Result<Vec<HeadmodeResult>, String> {
    seeds
        .iter()
        .map(|&seed| {
            let cfg = RunConfig {
                seed,
                data: vwmhqae::harness::DataConfig {
                    synthetic: spec.clone(),
                    ..Default::default()
                },
                train: train.clone(),
                ..RunConfig::default()
            };
            let split: Split<f64> = cfg.data.load_split(seed).map_err(|e| e.to_string())?;
            headmode_compare(&split.train, hidden, &cfg.train_config(), hm).map_err(|e| e.to_string())
        })
        .collect()
}

fn c8_multihead_convergence() -> Outcome {
    let hm = HeadmodeConfig::default();
    let runs = headmode_runs(&SyntheticSpec::default(), &TrainConfig::default(), 16, &hm, &SEEDS)?;
    let updates = |f: &dyn Fn(&HeadmodeResult) -> Option<usize>| -> Vec<f64> {
        runs.iter().map(|r| f(r).map_or(f64::INFINITY, |u| u as f64)).collect()
    };
    let a = updates(&|r| r.categorical_reach.as_ref().map(|x| x.updates));
    let b = updates(&|r| r.multihead_reach.as_ref().map(|x| x.updates));
    if runs.iter().any(|r| r.multihead.len() != hm.epochs) {
        return Err("multi-headed series is not one entry per epoch".into());
    }
    if !(median(&b) < median(&a)) {
        return Err(format!("median updates multi-head {} vs categorical {}; {b:?} vs {a:?}", median(&b), median(&a)));
    }

    // A cleaner fixture with many small batches drives the
    // variance-weighted loss below zero.
    let clean = SyntheticSpec {
        n_samples: 2_000,
        n_features: 16,
        latent_rank: 4,
        noise_scale: 0.01,
        label_noise: 0.0,
        ..SyntheticSpec::default()
    };
    let short = HeadmodeConfig {
        epochs: 60,
        reference_epoch: 30,
        seeds: Vec::new(),
    };
    let small_batches = TrainConfig {
        batch_size: 32,
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    let neg = headmode_runs(&clean, &small_batches, 8, &short, &[0])?.remove(0);
    let min_b = neg.multihead.totals().into_iter().fold(f64::INFINITY, f64::min);
    let min_a = neg.categorical.totals().into_iter().fold(f64::INFINITY, f64::min);
    if !(min_b < 0.0 && neg.multihead_reach.is_some()) {
        return Err(format!("negative-loss fixture: min multi-head loss {min_b}, reach {:?}", neg.multihead_reach));
    }
    Ok(format!(
        "median updates to reference: multi-head {} vs categorical {}; negative losses handled (min {min_b:.3} / {min_a:.3})",
        median(&b),
        median(&a)
    ))
}

fn c9_metric_fixtures() -> Outcome {
    let f = f_beta(0.5, 1.0, 2.0);
    if (f - 0.8333).abs() > 1e-4 {
        return Err(format!("f_beta(0.5, 1, 2) = {f}"));
    }
    for p in [0.1, 0.3, 0.5, 0.9] {
        for r in [0.2, 0.6, 1.0] {
            let f1 = 2.0 * p * r / (p + r);
            if (f_beta(p, r, 1.0) - f1).abs() > 1e-12 {
                return Err(format!("F_1 mismatch at p={p}, r={r}"));
            }
        }
    }
    let ir = imbalance_ratio(&[100, 2]).map_err(|e| e.to_string())?;
    if ir != 50.0 {
        return Err(format!("imbalance_ratio(100, 2) = {ir}"));
    }
    let mut rng = Rng::new(31);
    let (rows, heads) = (40, 3);
    let labels = random_labels(rows, heads, &mut rng);
    let preds: Vec<Vec<bool>> = (0..rows).map(|_| (0..heads).map(|_| rng.bernoulli(0.4)).collect()).collect();
    let names: Vec<String> = (1..=heads).map(|j| format!("Y{j}")).collect();
    let counts = labels.all_counts();
    let base = evaluate(&preds, &labels, &names, BetaPolicy::PerHeadImbalanceRatio, &counts).map_err(|e| e.to_string())?;
    let perm = rng.permutation(rows);
    let pl = labels.select_rows(&perm);
    let pp: Vec<Vec<bool>> = perm.iter().map(|&i| preds[i].clone()).collect();
    let shuffled = evaluate(&pp, &pl, &names, BetaPolicy::PerHeadImbalanceRatio, &counts).map_err(|e| e.to_string())?;
    check(
        base == shuffled,
        format!("f_beta(0.5,1,2) = {f:.4}, F_1 identity, ratio 50, permutation invariant"),
        "evaluate changed under a row permutation".into(),
    )
}

fn small_config(out: &std::path::Path) -> RunConfig {
    let mut cfg = RunConfig {
        seed: 11,
        out_dir: out.to_path_buf(),
        ..RunConfig::default()
    };
    cfg.data.synthetic = SyntheticSpec {
        n_samples: 1_500,
        n_features: 12,
        latent_rank: 3,
        imbalance_ratios: vec![2.0, 9.0],
        observation_rates: vec![0.8, 0.8],
        ..SyntheticSpec::default()
    };
    cfg.dims.hidden = vec![8, 4];
    cfg.train = TrainConfig {
        max_epochs: 15,
        batch_size: 64,
        ..TrainConfig::default()
    };
    cfg
}

fn c10_determinism() -> Outcome {
    fn round_trip<T: vwmhqae::Scalar>(dir: &tempfile::TempDir) -> Result<(), String> {
        let (a, b) = (dir.path().join(format!("{}-a", T::NAME)), dir.path().join(format!("{}-b", T::NAME)));
        let first = cmd_train::<T>(&small_config(&a)).map_err(|e| e.to_string())?;
        cmd_train::<T>(&small_config(&b)).map_err(|e| e.to_string())?;
        let read = |p: &std::path::Path| std::fs::read(p.join("checkpoint.json")).map_err(|e| e.to_string());
        if read(&a)? != read(&b)? {
            return Err(format!("{}: checkpoints differ between identical runs", T::NAME));
        }
        let loaded = Checkpoint::<T>::load(a.join("checkpoint.json")).map_err(|e| e.to_string())?;
        let split: Split<T> = small_config(&a).data.load_split(11).map_err(|e| e.to_string())?;
        let p0 = first.checkpoint.model.predict_raw(&split.test.features).map_err(|e| e.to_string())?;
        let p1 = loaded.model.predict_raw(&split.test.features).map_err(|e| e.to_string())?;
        let bits = |m: &Matrix<T>| m.data().iter().map(|v| v.as_f64().to_bits()).collect::<Vec<_>>();
        if bits(&p0.probabilities) != bits(&p1.probabilities) || loaded != first.checkpoint {
            return Err(format!("{}: reloaded checkpoint predicts differently", T::NAME));
        }
        Ok(())
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    round_trip::<f64>(&dir)?;
    round_trip::<f32>(&dir)?;
    Ok("byte-identical checkpoints and bit-identical reloaded predictions (f64, f32)".into())
}

fn c11_desk_run(runs: &[DeskRun]) -> Outcome {
    let recalls: Vec<f64> = runs.iter().map(|r| r.recalls[BETA2_HEAD].unwrap_or(0.0)).collect();
    let slowest = runs.iter().map(|r| r.seconds).fold(0.0, f64::max);
    let m = median(&recalls);
    check(
        m >= 0.8 && slowest < 120.0,
        format!("median beta=2 recall {m:.4}, slowest run {slowest:.1}s"),
        format!("median beta=2 recall {m:.4} (per seed {recalls:?}), slowest run {slowest:.1}s"),
    )
}

fn main() {
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        if !only.is_empty() && !only.contains(&id) {
            return;
        }
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    };
    report(1, "parameter accounting", &mut c1_parameter_accounting);
    report(2, "overhead ratio", &mut c2_overhead);
    report(3, "gradient oracles", &mut c3_gradient_oracles);
    report(4, "variance stationarity", &mut c4_variance_stationarity);
    report(5, "class weight identity", &mut c5_class_weight_identity);
    report(6, "SMOTE properties", &mut c6_smote);

    // The weighted-class desk runs serve both criterion 11 and criterion 7.
    let weighted = std::cell::OnceCell::new();
    let desk = || -> Result<&Vec<DeskRun>, String> {
        weighted
            .get_or_init(|| SEEDS.iter().map(|&s| desk_run(s, Imbalance::WeightedClass)).collect::<Result<Vec<_>, _>>())
            .as_ref()
            .map_err(Clone::clone)
    };
    report(7, "imbalance handling benefit", &mut || c7_imbalance_benefit(desk()?));
    report(8, "multi-head convergence", &mut c8_multihead_convergence);
    report(9, "metric fixtures", &mut c9_metric_fixtures);
    report(10, "determinism and persistence", &mut c10_determinism);
    report(11, "end-to-end desk run", &mut || c11_desk_run(desk()?));

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
