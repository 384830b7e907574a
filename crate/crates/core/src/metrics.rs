//! Per-head masked evaluation: confusion counts, recall, precision and
//! F-beta with the imbalance ratio as beta.
//!
//! Rates with a zero denominator are `None` ("undefined"), never 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{ClassCounts, HeadLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn support(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

/// Counts over observed labels only; `preds[i][j]` is the hard prediction.
pub fn confusion(labels: &HeadLabels, preds: &[Vec<bool>]) -> Result<Vec<Confusion>> {
    if preds.len() != labels.n_samples() {
        return Err(Error::shape(
            "confusion",
            format!("{} prediction rows", labels.n_samples()),
            format!("{} prediction rows", preds.len()),
        ));
    }
    let k = labels.n_heads();
    let mut out = vec![Confusion::default(); k];
    for (i, row) in preds.iter().enumerate() {
        if row.len() != k {
            return Err(Error::shape("confusion", format!("{k} heads"), format!("{} heads in row {i}", row.len())));
        }
        for (j, (&p, c)) in row.iter().zip(out.iter_mut()).enumerate() {
            match (labels.get(i, j), p) {
                (None, _) => {}
                (Some(true), true) => c.tp += 1,
                (Some(true), false) => c.fn_ += 1,
                (Some(false), true) => c.fp += 1,
                (Some(false), false) => c.tn += 1,
            }
        }
    }
    Ok(out)
}

/// `(1+β²)·P·R / (β²·P + R)`, and 0 when `P = R = 0`.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        return 0.0;
    }
    (1.0 + b2) * precision * recall / denom
}

/// F-beta over possibly undefined rates. A defined recall of 0 gives 0
/// even when precision is undefined; otherwise both must be defined.
pub fn f_beta_opt(precision: Option<f64>, recall: Option<f64>, beta: f64) -> Option<f64> {
    match (precision, recall) {
        (Some(p), Some(r)) => Some(f_beta(p, r, beta)),
        (None, Some(r)) if r == 0.0 => Some(0.0),
        _ => None,
    }
}

/// Largest over smallest nonempty class size.
pub fn imbalance_ratio(class_sizes: &[usize]) -> Result<f64> {
    let nonempty = class_sizes.iter().copied().filter(|&c| c > 0);
    let max = nonempty.clone().max();
    let min = nonempty.min();
    match (max, min) {
        (Some(a), Some(b)) => Ok(a as f64 / b as f64),
        _ => Err(Error::Undefined("imbalance ratio of all-empty classes".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaPolicy {
    /// Each head's imbalance ratio on the training split.
    PerHeadImbalanceRatio,
    Fixed { beta: f64 },
}

impl Default for BetaPolicy {
    fn default() -> Self {
        BetaPolicy::PerHeadImbalanceRatio
    }
}

impl BetaPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaPolicy::Fixed { beta } if !(beta > 0.0 && beta.is_finite()) => {
                Err(Error::Config(format!("fixed beta must be positive, got {beta}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadMetrics {
    pub head: String,
    pub counts: Confusion,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f_beta: Option<f64>,
    pub beta: Option<f64>,
}

impl HeadMetrics {
    pub fn support(&self) -> usize {
        self.counts.support()
    }
}

/// Mean of the defined values plus the number skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroValue {
    pub mean: Option<f64>,
    pub skipped: usize,
}

impl MacroValue {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut skipped = 0;
        for v in values {
            match v {
                Some(x) => {
                    sum += x;
                    n += 1;
                }
                None => skipped += 1,
            }
        }
        Self {
            mean: (n > 0).then(|| sum / n as f64),
            skipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroAverages {
    pub recall: MacroValue,
    pub precision: MacroValue,
    pub f_beta: MacroValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub heads: Vec<HeadMetrics>,
    pub macro_avg: MacroAverages,
}

/// Scores hard predictions against observed labels. Under the default
/// policy `train_counts` supplies each head's class sizes for beta.
pub fn evaluate(
    preds: &[Vec<bool>],
    labels: &HeadLabels,
    head_names: &[String],
    policy: BetaPolicy,
    train_counts: &[ClassCounts],
) -> Result<MetricsReport> {
    policy.validate()?;
    let k = labels.n_heads();
    if head_names.len() != k {
        return Err(Error::shape("evaluate", format!("{k} head names"), format!("{}", head_names.len())));
    }
    if matches!(policy, BetaPolicy::PerHeadImbalanceRatio) && train_counts.len() != k {
        return Err(Error::shape(
            "evaluate",
            format!("{k} training class counts"),
            format!("{}", train_counts.len()),
        ));
    }
    let counts = confusion(labels, preds)?;
    let heads: Vec<HeadMetrics> = counts
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let beta = match policy {
                BetaPolicy::Fixed { beta } => Some(beta),
                BetaPolicy::PerHeadImbalanceRatio => {
                    let t = train_counts[j];
                    imbalance_ratio(&[t.negative, t.positive]).ok()
                }
            };
            let (recall, precision) = (c.recall(), c.precision());
            HeadMetrics {
                head: head_names[j].clone(),
                counts: c,
                recall,
                precision,
                f_beta: beta.and_then(|b| f_beta_opt(precision, recall, b)),
                beta,
            }
        })
        .collect();
    let macro_avg = MacroAverages {
        recall: MacroValue::of(heads.iter().map(|h| h.recall)),
        precision: MacroValue::of(heads.iter().map(|h| h.precision)),
        f_beta: MacroValue::of(heads.iter().map(|h| h.f_beta)),
    };
    Ok(MetricsReport { heads, macro_avg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_fixtures() {
        let labels = HeadLabels::new(
            2,
            (0..10).flat_map(|i| [Some(i < 3), if i == 0 { Some(true) } else { None }]).collect(),
        )
        .unwrap();
        let all_pos = vec![vec![true, true]; 10];
        let c = confusion(&labels, &all_pos).unwrap();
        assert_eq!(c[0], Confusion { tp: 3, fp: 7, tn: 0, fn_: 0 });
        let exact: Vec<Vec<bool>> = (0..10).map(|i| vec![i < 3, true]).collect();
        let c = confusion(&labels, &exact).unwrap();
        assert_eq!((c[0].fp, c[0].fn_), (0, 0));
    }

    #[test]
    fn unobserved_head_is_undefined() {
        let labels = HeadLabels::new(2, vec![Some(true), None, Some(false), None]).unwrap();
        let names = vec!["Y1".to_string(), "Y2".to_string()];
        let counts = [ClassCounts { negative: 1, positive: 1 }; 2];
        let r = evaluate(&[vec![true, true], vec![false, true]], &labels, &names, BetaPolicy::default(), &counts).unwrap();
        assert_eq!(r.heads[1].support(), 0);
        assert_eq!(r.heads[1].recall, None);
        assert_eq!(r.heads[1].f_beta, None);
        assert_eq!(r.macro_avg.recall, MacroValue { mean: Some(1.0), skipped: 1 });
    }

    #[test]
    fn rate_fixtures() {
        let c = Confusion { tp: 3, fp: 0, tn: 0, fn_: 1 };
        assert_eq!(c.recall(), Some(0.75));
        assert_eq!(Confusion::default().precision(), None);
        let c = Confusion { tp: 50, fp: 0, tn: 0, fn_: 50 };
        assert_eq!((c.recall(), c.precision()), (Some(0.5), Some(1.0)));
    }

    #[test]
    fn f_beta_fixtures() {
        assert_eq!(f_beta(0.5, 0.5, 1.0), 0.5);
        assert!((f_beta(0.5, 1.0, 2.0) - 5.0 * 0.5 / 3.0).abs() < 1e-12);
        assert!((f_beta(0.5, 0.8, 1000.0) - 0.8).abs() <= 1e-3);
        assert_eq!(f_beta(0.0, 0.0, 3.0), 0.0);
        assert_eq!(f_beta_opt(None, Some(0.0), 2.0), Some(0.0));
        assert_eq!(f_beta_opt(None, Some(0.5), 2.0), None);
    }

    #[test]
    fn imbalance_fixtures() {
        assert_eq!(imbalance_ratio(&[50, 50]).unwrap(), 1.0);
        assert_eq!(imbalance_ratio(&[100, 2]).unwrap(), 50.0);
        assert_eq!(imbalance_ratio(&[0, 7]).unwrap(), 1.0);
        assert!(matches!(imbalance_ratio(&[0, 0]), Err(Error::Undefined(_))));
    }

    proptest! {
        #[test]
        fn f_beta_between_p_and_r(p in 0.0f64..=1.0, r in 0.0f64..=1.0, beta in 0.1f64..300.0) {
            let f = f_beta(p, r, beta);
            if p > 0.0 || r > 0.0 {
                prop_assert!(f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12);
            }
        }

        #[test]
        fn f_beta_monotone(p in 0.0f64..=1.0, r in 0.0f64..=1.0, dp in 0.0f64..0.5, dr in 0.0f64..0.5, beta in 0.1f64..300.0) {
            let f = f_beta(p, r, beta);
            prop_assert!(f_beta((p + dp).min(1.0), r, beta) >= f - 1e-12);
            prop_assert!(f_beta(p, (r + dr).min(1.0), beta) >= f - 1e-12);
        }

        #[test]
        fn f1_at_beta_one(p in 0.01f64..=1.0, r in 0.01f64..=1.0) {
            prop_assert!((f_beta(p, r, 1.0) - 2.0 * p * r / (p + r)).abs() < 1e-12);
        }

        #[test]
        fn ratio_scale_invariant(a in 1usize..1000, b in 1usize..1000, c in 1usize..50) {
            prop_assert_eq!(imbalance_ratio(&[a, b]).unwrap(), imbalance_ratio(&[a * c, b * c]).unwrap());
        }
    }
}
