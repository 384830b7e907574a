use nalgebra::DMatrix;
use proptest::prelude::*;
use vwmhqae::data::{load_csv, save_csv, split, CsvSchema, Dataset, SplitFractions, StandardizationStats, SyntheticSpec};
use vwmhqae::labels::{class_weights, ClassWeights, HeadLabels, Label};
use vwmhqae::matrix::Matrix;
use vwmhqae::rng::Rng;
use vwmhqae::smote::oversample_heads;
use vwmhqae::Error;

fn spec(n: usize, p: usize, rank: usize) -> SyntheticSpec {
    SyntheticSpec {
        n_samples: n,
        n_features: p,
        latent_rank: rank,
        score_rank: rank.min(2),
        ..SyntheticSpec::default()
    }
}

#[test]
fn positive_count_follows_the_ratio() {
    let s = SyntheticSpec {
        imbalance_ratios: vec![9.0],
        observation_rates: vec![1.0],
        label_noise: 0.0,
        ..spec(10_000, 8, 3)
    };
    let ds: Dataset<f64> = s.generate().unwrap();
    let c = ds.labels.counts(0);
    assert!(c.positive.abs_diff(1000) <= 1, "positives {}", c.positive);
    assert_eq!(c.negative + c.positive, 10_000);
}

#[test]
fn rank_two_features_have_two_dominant_directions() {
    let s = SyntheticSpec {
        noise_scale: 0.01,
        ..spec(2_000, 64, 2)
    };
    let ds: Dataset<f64> = s.generate().unwrap();
    let m = DMatrix::from_row_slice(ds.n_samples(), ds.n_features(), ds.features.data());
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    assert!(sv[1] / sv[2] >= 10.0, "sigma2 / sigma3 = {}", sv[1] / sv[2]);
}

#[test]
fn observation_counts_are_binomial() {
    let rates = [0.6, 0.3, 0.9];
    let s = SyntheticSpec {
        imbalance_ratios: vec![2.0, 3.0, 4.0],
        observation_rates: rates.to_vec(),
        ..spec(20_000, 8, 3)
    };
    let ds: Dataset<f64> = s.generate().unwrap();
    // A row with nothing observed gets one head back, chosen uniformly.
    let none: f64 = rates.iter().map(|p| 1.0 - p).product();
    let n = ds.n_samples() as f64;
    for (j, &p) in rates.iter().enumerate() {
        let q = p + none / rates.len() as f64;
        let mean = n * q;
        let sd = (n * q * (1.0 - q)).sqrt();
        let got = ds.labels.observed(j) as f64;
        assert!((got - mean).abs() <= 4.0 * sd, "head {j}: {got} vs {mean} ± {}", 4.0 * sd);
    }
    for i in 0..ds.n_samples() {
        assert!(ds.labels.row(i).iter().any(Option::is_some));
    }
}

#[test]
fn generation_is_reproducible() {
    let s = SyntheticSpec {
        seed: 5,
        ..spec(500, 10, 3)
    };
    let a: Dataset<f64> = s.generate().unwrap();
    let b: Dataset<f64> = s.generate().unwrap();
    assert_eq!(a.features, b.features);
    assert_eq!(a.labels, b.labels);
    let c: Dataset<f64> = SyntheticSpec { seed: 6, ..s }.generate().unwrap();
    assert_ne!(a.features, c.features);
}

#[test]
fn infeasible_spec_is_rejected() {
    let s = SyntheticSpec {
        imbalance_ratios: vec![500.0],
        observation_rates: vec![1.0],
        ..spec(300, 8, 3)
    };
    assert!(matches!(s.generate::<f64>(), Err(Error::Specification(_))));
}

#[test]
fn csv_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let ds: Dataset<f64> = spec(2_000, 6, 2).generate().unwrap();
    let path = dir.path().join("d.csv");
    save_csv(&path, &ds).unwrap();
    let back: Dataset<f64> = load_csv(&path, &CsvSchema::of(&ds)).unwrap();
    assert_eq!(back.features, ds.features);
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.head_names, ds.head_names);
}

#[test]
fn stratified_split_keeps_class_shares() {
    let ds: Dataset<f64> = SyntheticSpec {
        imbalance_ratios: vec![9.0, 2.0],
        observation_rates: vec![1.0, 0.5],
        ..spec(3_000, 6, 2)
    }
    .generate()
    .unwrap();
    let sp = split(&ds, SplitFractions::new(0.8, 0.1, 0.1), 3, Some(0)).unwrap();
    let total = ds.labels.counts(0).positive as f64;
    for (part, f) in [(&sp.train, 0.8), (&sp.val, 0.1), (&sp.test, 0.1)] {
        let got = part.labels.counts(0).positive as f64;
        assert!((got - f * total).abs() <= 1.0, "{got} vs {}", f * total);
    }
}

fn labels_strategy() -> impl Strategy<Value = HeadLabels> {
    (1usize..5, 2usize..40).prop_flat_map(|(k, n)| {
        prop::collection::vec(prop::option::weighted(0.7, any::<bool>()), n * k).prop_map(move |mut v| {
            for i in 0..n {
                if v[i * k..(i + 1) * k].iter().all(Option::is_none) {
                    v[i * k] = Some(i % 2 == 0);
                }
            }
            HeadLabels::new(k, v).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn split_is_a_partition(n in 10usize..200, seed in 0u64..1000, train in 0.2f64..0.9) {
        let rest = 1.0 - train;
        let x = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let labels: Vec<Label> = (0..n).map(|i| Some(i % 3 == 0)).collect();
        let ds = Dataset::with_default_names(x, HeadLabels::new(1, labels).unwrap()).unwrap();
        let sp = split(&ds, SplitFractions::new(train, rest / 2.0, rest / 2.0), seed, None).unwrap();
        let mut ids: Vec<usize> = [&sp.train, &sp.val, &sp.test]
            .iter()
            .flat_map(|d| d.features.data().iter().map(|&v| v as usize))
            .collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn standardization_inverts(rows in 2usize..20, cols in 1usize..6, seed in 0u64..500) {
        let mut rng = Rng::new(seed);
        let x = Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| 3.0 * rng.normal::<f64>() + 1.0).collect()).unwrap();
        let st = StandardizationStats::fit(&x).unwrap();
        let back = st.inverse(&st.apply(&x).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&x).unwrap() <= 1e-9);
    }

    #[test]
    fn class_weight_identity_is_exact(labels in labels_strategy()) {
        let w: ClassWeights<num_rational::Rational64> = class_weights(&labels).unwrap();
        for j in 0..labels.n_heads() {
            let c = labels.counts(j);
            if c.negative > 0 && c.positive > 0 {
                prop_assert_eq!(
                    w.negative[j] * num_rational::Rational64::from_integer(c.negative as i64),
                    w.positive[j] * num_rational::Rational64::from_integer(c.positive as i64)
                );
            }
        }
    }

    #[test]
    fn oversampling_balances_every_head(labels in labels_strategy(), seed in 0u64..100) {
        let mut rng = Rng::new(seed);
        let n = labels.n_samples();
        let x = Matrix::from_vec(n, 3, (0..n * 3).map(|_| rng.normal::<f64>()).collect()).unwrap();
        let feasible = (0..labels.n_heads()).all(|j| {
            let c = labels.counts(j);
            c.negative == c.positive || c.negative == 0 || c.positive == 0 || c.negative.min(c.positive) >= 2
        });
        prop_assume!(feasible);
        let (xs, ls) = oversample_heads(&x, &labels, 5, &mut rng).unwrap();
        prop_assert_eq!(xs.rows(), ls.n_samples());
        for j in 0..labels.n_heads() {
            let c = ls.counts(j);
            let before = labels.counts(j);
            if before.negative > 0 && before.positive > 0 {
                prop_assert_eq!(c.negative, c.positive);
            }
        }
        prop_assert_eq!(xs.select_rows(&(0..n).collect::<Vec<_>>()), x);
    }
}
