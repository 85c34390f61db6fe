//! Segmentation overlap scores and criteria classification scores.

use crate::error::{Error, Result};
use crate::raster::{Label, LabelMask};

/// Per-class overlap between a predicted and a reference mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapScores {
    pub label: Label,
    pub dice: f64,
    pub jaccard: f64,
    pub precision: f64,
    pub recall: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Dice, Jaccard, precision and recall of `label` in `pred` against `truth`.
///
/// Both sets empty scores 1.0 everywhere; a zero denominator otherwise scores 0.
pub fn overlap_scores(pred: &LabelMask, truth: &LabelMask, label: Label) -> Result<OverlapScores> {
    if pred.dims() != truth.dims() {
        return Err(Error::shape(truth.dims(), pred.dims()));
    }
    let (mut a, mut b, mut both) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        let (in_a, in_b) = (p == label, t == label);
        a += in_a as usize;
        b += in_b as usize;
        both += (in_a && in_b) as usize;
    }
    if a == 0 && b == 0 {
        return Ok(OverlapScores {
            label,
            dice: 1.0,
            jaccard: 1.0,
            precision: 1.0,
            recall: 1.0,
        });
    }
    Ok(OverlapScores {
        label,
        dice: ratio(2 * both, a + b),
        jaccard: ratio(both, a + b - both),
        precision: ratio(both, a),
        recall: ratio(both, b),
    })
}

/// Mean and population standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Dataset-level overlap summary for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateScores {
    pub label: Label,
    pub dice: MeanStd,
    pub jaccard: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub n: usize,
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean_std(values: &[f64]) -> Result<MeanStd> {
    if values.is_empty() {
        return Err(Error::EmptyInput("cannot aggregate zero values"));
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    Ok(MeanStd {
        mean,
        std: var.max(0.0).sqrt(),
    })
}

/// Per-metric mean and population standard deviation over a dataset.
pub fn aggregate_overlap(scores: &[OverlapScores]) -> Result<AggregateScores> {
    let first = scores
        .first()
        .ok_or(Error::EmptyInput("no overlap scores to aggregate"))?;
    if let Some(other) = scores.iter().find(|s| s.label != first.label) {
        return Err(Error::InvalidReport(format!(
            "cannot aggregate {} scores together with {} scores",
            first.label, other.label
        )));
    }
    let column = |f: fn(&OverlapScores) -> f64| -> Result<MeanStd> {
        mean_std(&scores.iter().map(f).collect::<Vec<_>>())
    };
    Ok(AggregateScores {
        label: first.label,
        dice: column(|s| s.dice)?,
        jaccard: column(|s| s.jaccard)?,
        precision: column(|s| s.precision)?,
        recall: column(|s| s.recall)?,
        n: scores.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Positional confusion counts, `true` being the positive class.
pub fn confusion_counts(pred: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} items", truth.len()),
            actual: format!("{} items", pred.len()),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("no items to compare"));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy, precision, recall and F1; zero denominators give 0.
pub fn classification_scores(c: &ConfusionCounts) -> ClassificationScores {
    let total = c.total();
    let div = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = div(c.tp, c.tp + c.fp);
    let recall = div(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassificationScores {
        accuracy: div(c.tp + c.tn, total),
        precision,
        recall,
        f1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mask_from(width: u32, height: u32, pixels: impl IntoIterator<Item = (u32, u32)>, label: Label) -> LabelMask {
        let mut m = LabelMask::empty(width, height).unwrap();
        for (x, y) in pixels {
            m.set(x, y, label);
        }
        m
    }

    #[test]
    fn identical_masks_score_one() {
        let m = mask_from(8, 8, (0..4).map(|i| (i, i)), Label::Head);
        let s = overlap_scores(&m, &m, Label::Head).unwrap();
        assert_eq!((s.dice, s.jaccard, s.precision, s.recall), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn half_overlap() {
        // A = rows 0..10, B = rows 5..15 of a 10-wide strip; |A∩B| = 50
        let a = mask_from(10, 20, (0..100).map(|i| (i % 10, i / 10)), Label::Body);
        let b = mask_from(10, 20, (0..100).map(|i| (i % 10, 5 + i / 10)), Label::Body);
        let s = overlap_scores(&a, &b, Label::Body).unwrap();
        assert_abs_diff_eq!(s.dice, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.jaccard, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.precision, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.recall, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn empty_set_conventions() {
        let empty = LabelMask::empty(4, 4).unwrap();
        let some = mask_from(4, 4, [(1, 1)], Label::Palate);
        let s = overlap_scores(&empty, &some, Label::Palate).unwrap();
        assert_eq!((s.dice, s.jaccard, s.precision, s.recall), (0.0, 0.0, 0.0, 0.0));
        let s = overlap_scores(&some, &empty, Label::Palate).unwrap();
        assert_eq!((s.dice, s.jaccard, s.precision, s.recall), (0.0, 0.0, 0.0, 0.0));
        let s = overlap_scores(&empty, &empty, Label::Palate).unwrap();
        assert_eq!((s.dice, s.jaccard, s.precision, s.recall), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn overlap_shape_mismatch() {
        let a = LabelMask::empty(4, 4).unwrap();
        let b = LabelMask::empty(4, 5).unwrap();
        assert!(matches!(
            overlap_scores(&a, &b, Label::Head),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    fn dice_only(label: Label, dice: f64) -> OverlapScores {
        OverlapScores {
            label,
            dice,
            jaccard: dice / (2.0 - dice),
            precision: dice,
            recall: dice,
        }
    }

    #[test]
    fn aggregate_single_and_pair() {
        let one = aggregate_overlap(&[dice_only(Label::Head, 0.7)]).unwrap();
        assert_eq!(one.dice, MeanStd { mean: 0.7, std: 0.0 });
        assert_eq!(one.n, 1);
        let two = aggregate_overlap(&[dice_only(Label::Head, 0.8), dice_only(Label::Head, 1.0)]).unwrap();
        assert_abs_diff_eq!(two.dice.mean, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(two.dice.std, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn aggregate_errors() {
        assert!(matches!(aggregate_overlap(&[]), Err(Error::EmptyInput(_))));
        assert!(aggregate_overlap(&[dice_only(Label::Head, 0.5), dice_only(Label::Body, 0.5)]).is_err());
    }

    #[test]
    fn confusion_examples() {
        let c = confusion_counts(&[true, true, false], &[true, true, false]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 2, fp: 0, fn_: 0, tn: 1 });
        let c = confusion_counts(&[true, false], &[false, true]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 0, fp: 1, fn_: 1, tn: 0 });
        assert!(matches!(
            confusion_counts(&[true], &[true, false]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let s = classification_scores(&ConfusionCounts { tp: 2, fp: 1, fn_: 1, tn: 6 });
        assert_abs_diff_eq!(s.accuracy, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(s.precision, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.recall, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.f1, 2.0 / 3.0, epsilon = 1e-15);

        let s = classification_scores(&ConfusionCounts { tp: 0, fp: 0, fn_: 0, tn: 10 });
        assert_eq!((s.accuracy, s.precision, s.recall, s.f1), (1.0, 0.0, 0.0, 0.0));

        let s = classification_scores(&ConfusionCounts { tp: 5, fp: 0, fn_: 0, tn: 3 });
        assert_eq!((s.accuracy, s.precision, s.recall, s.f1), (1.0, 1.0, 1.0, 1.0));
    }
}
