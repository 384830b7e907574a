use proptest::prelude::*;
use vwmhqae::data::{Dataset, StandardizationStats, SyntheticSpec};
use vwmhqae::heads::{head_units, pair_softmax};
use vwmhqae::labels::{class_weights, ClassWeights, HeadLabels, Label};
use vwmhqae::matrix::Matrix;
use vwmhqae::model::{
    count_parameters, stack_train, train_model, train_qae_layer, train_standardized, Checkpoint, HeadNet, LayerLoss,
    ModelDims, ModelKind, QaeLayer, QaeLayerSpec, TrainConfig,
};
use vwmhqae::rng::Rng;

fn fixture(n: usize, seed: u64) -> (Matrix<f64>, HeadLabels) {
    let ds: Dataset<f64> = SyntheticSpec {
        n_samples: n,
        n_features: 10,
        seed,
        ..SyntheticSpec::default()
    }
    .generate()
    .unwrap();
    let x = StandardizationStats::fit(&ds.features).unwrap().apply(&ds.features).unwrap();
    (x, ds.labels)
}

fn quick(epochs: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-2,
        batch_size: 64,
        max_epochs: epochs,
        seed: 11,
        ..TrainConfig::default()
    }
}

#[test]
fn adding_a_layer_leaves_earlier_layers_untouched() {
    let (x, labels) = fixture(2000, 1);
    let hu = head_units(labels.n_heads());
    let cfg = quick(5);
    let one = stack_train(&x, &labels, &QaeLayerSpec::chain(10, &[8], hu).unwrap(), &cfg).unwrap();
    let two = stack_train(&x, &labels, &QaeLayerSpec::chain(10, &[8, 4], hu).unwrap(), &cfg).unwrap();
    assert_eq!(one.model.layers[0], two.model.layers[0]);
    assert_eq!(one.histories[0], two.histories[0]);
    assert_eq!(two.model.layers.len(), 2);
}

#[test]
fn training_is_deterministic_and_checkpoints_round_trip() {
    let (x, labels) = fixture(2000, 2);
    let dims = ModelDims {
        hidden: vec![8, 4],
        ..ModelDims::default()
    };
    let a = train_model(ModelKind::SQAE_NN, &dims, &x, &labels, &quick(4)).unwrap();
    let b = train_model(ModelKind::SQAE_NN, &dims, &x, &labels, &quick(4)).unwrap();
    assert_eq!(a.model, b.model);
    let names = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let ck = Checkpoint::new(
        a.model.clone(),
        quick(4),
        dims,
        names("x", 10),
        names("y", labels.n_heads()),
        labels.all_counts(),
    );
    let back: Checkpoint<f64> = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.model.predict_raw(&x).unwrap(), a.model.predict_raw(&x).unwrap());
    assert!(Checkpoint::<f32>::from_json(&ck.to_json().unwrap()).is_err());
}

#[test]
fn separable_blobs_are_recalled() {
    let mut rng = Rng::new(3);
    let n = 1000;
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let pos = i % 5 == 0;
        let c = if pos { 3.0 } else { -3.0 };
        data.push(c + rng.normal::<f64>());
        data.push(rng.normal::<f64>());
        labels.push(Some(pos));
    }
    let x = Matrix::from_vec(n, 2, data).unwrap();
    let labels = HeadLabels::new(1, labels).unwrap();
    let t = train_model(ModelKind::LR, &ModelDims::default(), &x, &labels, &quick(50)).unwrap();
    let pred = t.model.predict_raw(&x).unwrap();
    let (mut tp, mut pos) = (0, 0);
    for i in 0..n {
        if labels.get(i, 0) == Some(true) {
            pos += 1;
            tp += pred.labels[i][0] as usize;
        }
    }
    assert!(tp as f64 / pos as f64 >= 0.99, "recall {tp}/{pos}");
}

#[test]
fn single_class_head_predicts_that_class() {
    let (x, _) = fixture(500, 4);
    let labels = HeadLabels::new(1, vec![Some(true); 500]).unwrap();
    let t = train_standardized(ModelKind::QAE_LR, &ModelDims::default(), &x, &labels, &quick(10)).unwrap();
    let pred = t.model.predict(&x).unwrap();
    assert!(pred.labels.iter().all(|r| r[0]));
}

#[test]
fn plain_layer_fits_low_rank_data() {
    let mut rng = Rng::new(5);
    let n = 1000;
    let basis: Vec<f64> = (0..12).map(|_| rng.normal()).collect();
    let mut data = Vec::with_capacity(n * 6);
    for _ in 0..n {
        let z: [f64; 2] = [rng.normal(), rng.normal()];
        for c in 0..6 {
            data.push(z[0] * basis[c] + z[1] * basis[6 + c]);
        }
    }
    let x = Matrix::from_vec(n, 6, data).unwrap();
    let labels = HeadLabels::new(1, vec![Some(false); n]).unwrap();
    let w = ClassWeights::uniform(1, 1.0);
    let spec = QaeLayerSpec::new(6, 4, 2).unwrap();
    let cfg = TrainConfig {
        batch_size: 16,
        max_epochs: 300,
        ..quick(0)
    };
    let (layer, hist) =
        train_qae_layer(&x, &labels, &w, &spec, LayerLoss::ReconstructionOnly, &cfg, &mut Rng::new(6)).unwrap();
    assert!(layer.decoder_y.is_none());
    let j_x = layer.loss(&x, &labels, &w, LayerLoss::ReconstructionOnly).unwrap().total;
    assert!(j_x <= 1e-3, "J_x = {j_x} after {} epochs", hist.len());
}

#[test]
fn parameter_counts_match_initialized_models() {
    let mut rng = Rng::new(7);
    for _ in 0..50 {
        let input = 1 + rng.below(40);
        let depth = 1 + rng.below(4);
        let hidden: Vec<usize> = (0..depth).map(|_| 1 + rng.below(30)).collect();
        let heads = 1 + rng.below(6);
        let hu = head_units(heads);
        let count = count_parameters(input, &hidden, hu).unwrap();
        let specs = QaeLayerSpec::chain(input, &hidden, hu).unwrap();
        let layers: usize = specs
            .iter()
            .map(|s| QaeLayer::<f64>::init(s, true, &mut rng).unwrap().param_count())
            .sum();
        let cls = HeadNet::<f64>::init(*hidden.last().unwrap(), &[], heads, &mut rng).unwrap().param_count();
        assert_eq!(count.total, layers + cls, "{input} {hidden:?} {heads}");
        assert_eq!(count.classifier, cls);
    }
}

#[test]
fn epoch_losses_mostly_decrease() {
    let (x, labels) = fixture(2000, 8);
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        batch_size: 128,
        max_epochs: 40,
        seed: 8,
        ..TrainConfig::default()
    };
    let t = train_standardized(ModelKind::SQAE_LR, &ModelDims::default(), &x, &labels, &cfg).unwrap();
    let (mut down, mut total) = (0, 0);
    for h in &t.histories {
        for w in h.totals().windows(2) {
            total += 1;
            down += (w[1] <= w[0]) as usize;
        }
    }
    assert!(total > 0);
    assert!(down as f64 >= 0.95 * total as f64, "{down}/{total} non-increasing");
}

#[test]
fn plain_encoder_ignores_labels() {
    let (x, labels) = fixture(2000, 9);
    let mut rows: Vec<Vec<Label>> = (0..labels.n_samples()).map(|i| labels.row(i).to_vec()).collect();
    Rng::new(99).shuffle(&mut rows);
    let permuted = HeadLabels::from_rows(&rows).unwrap();
    let dims = ModelDims {
        hidden: vec![8, 4],
        ..ModelDims::default()
    };
    let cfg = quick(5);
    let a = train_standardized(ModelKind::SAE_LR, &dims, &x, &labels, &cfg).unwrap();
    let b = train_standardized(ModelKind::SAE_LR, &dims, &x, &permuted, &cfg).unwrap();
    assert_eq!(a.model.layers, b.model.layers);
    let wa: ClassWeights<f64> = class_weights(&labels).unwrap();
    let wb: ClassWeights<f64> = class_weights(&permuted).unwrap();
    assert_eq!(wa, wb);
}

proptest! {
    #[test]
    fn paired_probabilities_are_complementary(
        rows in 1usize..6,
        heads in 1usize..5,
        vals in prop::collection::vec(-50.0f64..50.0, 200),
    ) {
        let cols = head_units(heads);
        let logits = Matrix::from_vec(rows, cols, vals[..rows * cols].to_vec()).unwrap();
        let p = pair_softmax(&logits).unwrap();
        for i in 0..rows {
            for j in 0..heads {
                let (neg, pos) = (p.get(i, 2 * j), p.get(i, 2 * j + 1));
                prop_assert!((0.0..=1.0).contains(&neg) && (0.0..=1.0).contains(&pos));
                prop_assert!((neg + pos - 1.0).abs() <= 1e-12);
            }
        }
    }
}
