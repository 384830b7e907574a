use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Self {
        Self { train, val, test }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.as_array();
        if f.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must be non-negative and sum to 1, got {:?}",
                f
            )));
        }
        if self.train <= 0.0 {
            return Err(Error::Config("train fraction must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Split<T> {
    pub train: Dataset<T>,
    pub val: Dataset<T>,
    pub test: Dataset<T>,
}

/// Sizes for `n` items by largest remainder, so they always sum to `n`.
fn allocate(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let raw: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, r) in sizes.iter_mut().zip(&raw) {
        *s = r.floor() as usize;
    }
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).filter(|&i| fractions[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    sizes
}

/// Disjoint train/val/test partition. With `stratify_head`, the positives,
/// negatives and unobserved rows of that head are each split in proportion.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    fractions: SplitFractions,
    seed: u64,
    stratify_head: Option<usize>,
) -> Result<Split<T>> {
    fractions.validate()?;
    let f = fractions.as_array();
    let mut rng = Rng::new(seed);
    let strata: Vec<Vec<usize>> = match stratify_head {
        None => vec![(0..ds.n_samples()).collect()],
        Some(h) => {
            if h >= ds.n_heads() {
                return Err(Error::Config(format!("stratify head {h} out of range ({} heads)", ds.n_heads())));
            }
            let parts = f.iter().filter(|&&v| v > 0.0).count();
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            let mut miss = Vec::new();
            for i in 0..ds.n_samples() {
                match ds.labels.get(i, h) {
                    Some(true) => pos.push(i),
                    Some(false) => neg.push(i),
                    None => miss.push(i),
                }
            }
            for (name, s) in [("positive", &pos), ("negative", &neg)] {
                if s.len() < parts {
                    return Err(Error::Stratification(format!(
                        "head {h} has {} {name} samples for {parts} parts",
                        s.len()
                    )));
                }
            }
            vec![pos, neg, miss]
        }
    };
    let mut parts: [Vec<usize>; 3] = Default::default();
    for mut stratum in strata {
        rng.shuffle(&mut stratum);
        let sizes = allocate(stratum.len(), &f);
        let mut start = 0;
        for (p, &s) in parts.iter_mut().zip(&sizes) {
            p.extend_from_slice(&stratum[start..start + s]);
            start += s;
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(Split {
        train: ds.select_rows(&train),
        val: ds.select_rows(&val),
        test: ds.select_rows(&test),
    })
}
