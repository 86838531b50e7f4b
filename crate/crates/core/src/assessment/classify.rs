use serde::{Deserialize, Serialize};

use crate::dataset::{encode, Dataset};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestParams, RandomForest, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// Error rate among actual negatives, `FP / (TN + FP)`.
    pub fn negative_error_rate(&self) -> f64 {
        ratio(self.fp, self.tn + self.fp)
    }

    /// Error rate among actual positives, `FN / (FN + TP)`.
    pub fn positive_error_rate(&self) -> f64 {
        ratio(self.fn_, self.fn_ + self.tp)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Count outcomes; labels must be 0 or 1.
pub fn confusion(predicted: &[i64], actual: &[i64]) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(Error::Arity {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    let mut cm = ConfusionMatrix {
        tn: 0,
        fp: 0,
        fn_: 0,
        tp: 0,
    };
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (0, 0) => cm.tn += 1,
            (1, 0) => cm.fp += 1,
            (0, 1) => cm.fn_ += 1,
            (1, 1) => cm.tp += 1,
            _ => return Err(Error::invalid(format!("non-binary label pair ({p}, {a})"))),
        }
    }
    Ok(cm)
}

/// All fractions in `[0, 1]`. Both sensitivity (recall) and precision are
/// reported since published tables label one as the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f_measure: f64,
}

pub fn metrics(cm: &ConfusionMatrix) -> ClassificationMetrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassificationMetrics {
        accuracy: ratio(cm.tn + cm.tp, cm.total()),
        sensitivity: recall,
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        precision,
        f_measure: f,
    }
}

/// A forest classifier for one binary variable over the encoded columns of
/// every other variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryClassifier {
    pub variable: String,
    pub inputs: Vec<usize>,
    pub forest: RandomForest,
}

pub fn fit_classifier(
    train: &Dataset,
    variable: &str,
    params: &ForestParams,
    seed: u64,
) -> Result<BinaryClassifier> {
    let v = train.schema.require(variable)?;
    if !train.is_complete() {
        return Err(Error::Incomplete("classifier training set".into()));
    }
    let spans = train.schema.column_spans();
    let inputs: Vec<usize> = (0..train.schema.encoded_width())
        .filter(|j| !spans[v].contains(j))
        .collect();
    let (x, y) = features_and_labels(train, v, &inputs)?;
    let forest = fit_forest(&x, &y, Task::Classification { n_classes: 2 }, params, seed)?;
    Ok(BinaryClassifier {
        variable: variable.to_string(),
        inputs,
        forest,
    })
}

fn features_and_labels(d: &Dataset, v: usize, inputs: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let enc = encode(d)?;
    let x = enc
        .values
        .iter()
        .map(|row| inputs.iter().map(|&j| row[j]).collect())
        .collect();
    let y = d
        .rows
        .iter()
        .map(|r| {
            let label = r[v].ok_or_else(|| Error::Incomplete("missing class label".into()))?;
            if label == 0 || label == 1 {
                Ok(label as f64)
            } else {
                Err(Error::invalid(format!("non-binary label {label}")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((x, y))
}

impl BinaryClassifier {
    /// Predict the variable on every row of `data` and compare with its
    /// recorded values.
    pub fn assess(&self, data: &Dataset) -> Result<(ConfusionMatrix, ClassificationMetrics)> {
        let v = data.schema.require(&self.variable)?;
        let (x, y) = features_and_labels(data, v, &self.inputs)?;
        let predicted: Vec<i64> = self.forest.predict_many(&x)?.into_iter().map(|p| p as i64).collect();
        let actual: Vec<i64> = y.into_iter().map(|a| a as i64).collect();
        let cm = confusion(&predicted, &actual)?;
        Ok((cm, metrics(&cm)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_transpose() {
        let p = [1, 0, 1, 1, 0];
        let a = [1, 0, 0, 1, 1];
        let cm = confusion(&p, &a).unwrap();
        assert_eq!((cm.tn, cm.fp, cm.fn_, cm.tp), (1, 1, 1, 2));
        let t = confusion(&a, &p).unwrap();
        assert_eq!((t.fp, t.fn_), (cm.fn_, cm.fp));
        assert!(confusion(&[2], &[0]).is_err());
    }

    #[test]
    fn perfect_and_empty_positive() {
        let m = metrics(&ConfusionMatrix { tn: 5, fp: 0, fn_: 0, tp: 3 });
        assert_eq!((m.accuracy, m.sensitivity, m.specificity, m.precision, m.f_measure), (1.0, 1.0, 1.0, 1.0, 1.0));
        let z = metrics(&ConfusionMatrix { tn: 5, fp: 2, fn_: 3, tp: 0 });
        assert_eq!(z.f_measure, 0.0);
    }
}
