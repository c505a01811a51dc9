use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn score(&mut self, predicted_anomalous: bool, actual_anomalous: bool) {
        match (predicted_anomalous, actual_anomalous) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.tn += o.tn;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut acc, cm| {
            acc += cm;
            acc
        })
    }
}

pub fn score_verdict(mut cm: ConfusionMatrix, predicted_anomalous: bool, actual_anomalous: bool) -> ConfusionMatrix {
    cm.score(predicted_anomalous, actual_anomalous);
    cm
}

/// `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub false_positive_rate: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let s = precision + recall;
    (s > 0.0).then(|| 2.0 * precision * recall / s)
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Metrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    Metrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        f1: precision.zip(recall).and_then(|(p, r)| f1_score(p, r)),
        false_positive_rate: ratio(cm.fp, cm.fp + cm.tn),
    }
}

/// Per-metric mean over the runs where the metric is defined.
pub fn mean_metrics<'a>(items: impl IntoIterator<Item = &'a Metrics>) -> Metrics {
    let items: Vec<&Metrics> = items.into_iter().collect();
    let mean = |get: fn(&Metrics) -> Option<f64>| {
        let vals: Vec<f64> = items.iter().filter_map(|m| get(m)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    Metrics {
        accuracy: mean(|m| m.accuracy),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
        false_positive_rate: mean(|m| m.false_positive_rate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_counter_per_verdict() {
        let cm = score_verdict(ConfusionMatrix::default(), true, true);
        assert_eq!(cm, ConfusionMatrix { tp: 1, ..Default::default() });
        let cm = score_verdict(ConfusionMatrix::default(), true, false);
        assert_eq!(cm, ConfusionMatrix { fp: 1, ..Default::default() });
    }

    #[test]
    fn all_correct() {
        let m = compute_metrics(&ConfusionMatrix { tp: 1, tn: 1, fp: 0, fn_: 0 });
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (Some(1.0), Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn table_row_f1() {
        let f1 = f1_score(0.969, 0.988).unwrap();
        assert!((f1 - 0.978).abs() < 5e-4, "{f1}");
    }

    #[test]
    fn undefined_precision() {
        let m = compute_metrics(&ConfusionMatrix { tp: 0, tn: 5, fp: 0, fn_: 2 });
        assert_eq!(m.precision, None);
        assert_eq!(m.f1, None);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(compute_metrics(&ConfusionMatrix::default()), Metrics::default());
    }

    proptest! {
        #[test]
        fn conservation(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 0..1000)) {
            let mut cm = ConfusionMatrix::default();
            for &(p, a) in &pairs { cm.score(p, a); }
            prop_assert_eq!(cm.total(), pairs.len() as u64);
        }

        #[test]
        fn f1_identity(tp in 0u64..500, tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
            let m = compute_metrics(&ConfusionMatrix { tp, tn, fp, fn_ });
            if let (Some(p), Some(r)) = (m.precision, m.recall) {
                if p + r > 0.0 {
                    prop_assert!((m.f1.unwrap() - 2.0 * p * r / (p + r)).abs() < 1e-12);
                }
            }
            for v in [m.accuracy, m.precision, m.recall, m.f1, m.false_positive_rate].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
