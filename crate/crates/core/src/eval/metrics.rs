//! Binary classification counts and the derived metrics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("predictions ({preds}) and golds ({golds}) differ in length")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("no predictions to score")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, pred: bool, gold: bool) {
        match (pred, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// Counts over disjoint shards add up.
    pub fn merge(self, other: Self) -> Self {
        Self {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn confusion(preds: &[bool], golds: &[bool]) -> Result<ConfusionCounts, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in preds.iter().zip(golds) {
        c.record(p, g);
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 are 0 whenever their denominator is 0.
pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Metrics {
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_counted() {
        let c = confusion(&[true, true, false, false], &[true, false, false, true]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fp: 1,
                fn_: 1,
                tn: 1
            }
        );
        let m = metrics(&c);
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (0.5, 0.5, 0.5, 0.5));
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = metrics(&ConfusionCounts {
            tp: 9,
            ..Default::default()
        });
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        let m = metrics(&ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 7,
        });
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
        assert!((m.accuracy - 0.7).abs() < 1e-15);
    }

    #[test]
    fn input_errors() {
        assert_eq!(confusion(&[], &[]), Err(MetricsError::Empty));
        assert_eq!(
            confusion(&[true], &[true, false]),
            Err(MetricsError::LengthMismatch { preds: 1, golds: 2 })
        );
        let c = confusion(&[true, false], &[true, false]).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
    }

    #[test]
    fn serialises_fn_key() {
        let json = serde_json::to_string(&ConfusionCounts {
            tp: 1,
            fp: 2,
            fn_: 3,
            tn: 4,
        })
        .unwrap();
        assert_eq!(json, r#"{"tp":1,"fp":2,"fn":3,"tn":4}"#);
    }

    proptest! {
        #[test]
        fn counts_partition(pairs in prop::collection::vec(any::<(bool, bool)>(), 1..1000)) {
            let (p, g): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let c = confusion(&p, &g).unwrap();
            prop_assert_eq!(c.total(), p.len() as u64);
            let m = metrics(&c);
            prop_assert_eq!(m.f1 == 0.0, c.tp == 0);
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
            prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12 || c.tp == 0);
        }

        #[test]
        fn merge_is_associative_over_shards(pairs in prop::collection::vec(any::<(bool, bool)>(), 2..200), cut in 1usize..199) {
            let cut = cut.min(pairs.len() - 1);
            let (p, g): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let whole = confusion(&p, &g).unwrap();
            let left = confusion(&p[..cut], &g[..cut]).unwrap();
            let right = confusion(&p[cut..], &g[cut..]).unwrap();
            prop_assert_eq!(left.merge(right), whole);
        }
    }
}
