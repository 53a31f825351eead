//! Logistic regression on standardized features, trained by full-batch
//! gradient descent. This is the lightweight detector of the synthetic
//! demo pipeline: deterministic without any seed, probability output in
//! (0, 1).

use crate::error::{Error, Result};
use crate::learners::{check_training_set, FeatureVector};
use crate::score::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
    feature_means: Vec<f64>,
    feature_stds: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    fn standardized(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.feature_means)
            .zip(&self.feature_stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Batch gradient descent on the L2-regularized log loss.
pub fn train_logistic(
    data: &[FeatureVector],
    epochs: usize,
    learning_rate: f64,
    l2: f64,
) -> Result<LogisticModel> {
    let dim = check_training_set(data)?;
    if epochs == 0 || !(learning_rate > 0.0) || l2 < 0.0 {
        return Err(Error::Domain(
            "epochs and learning rate must be positive, l2 non-negative".into(),
        ));
    }
    let n = data.len() as f64;

    // standardize; constant features get unit scale so they stay inert
    let mut means = vec![0.0; dim];
    for sample in data {
        for (m, v) in means.iter_mut().zip(&sample.values) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; dim];
    for sample in data {
        for ((s, v), m) in stds.iter_mut().zip(&sample.values).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }

    let standardized: Vec<Vec<f64>> = data
        .iter()
        .map(|sample| {
            sample
                .values
                .iter()
                .zip(&means)
                .zip(&stds)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();
    let targets: Vec<f64> = data
        .iter()
        .map(|sample| match sample.label {
            Label::Attack => 1.0,
            Label::BonaFide => 0.0,
        })
        .collect();

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    for _ in 0..epochs {
        let mut grad_w = vec![0.0; dim];
        let mut grad_b = 0.0;
        for (x, &y) in standardized.iter().zip(&targets) {
            let z = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
            let residual = sigmoid(z) - y;
            for (g, v) in grad_w.iter_mut().zip(x) {
                *g += residual * v;
            }
            grad_b += residual;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= learning_rate * (g / n + l2 * *w);
        }
        bias -= learning_rate * grad_b / n;
    }

    Ok(LogisticModel {
        weights,
        bias,
        feature_means: means,
        feature_stds: stds,
    })
}

/// Attack probability in (0, 1).
pub fn score_logistic(model: &LogisticModel, values: &[f64]) -> Result<f64> {
    if values.len() != model.weights.len() {
        return Err(Error::Validation(format!(
            "feature dimension {} does not match model dimension {}",
            values.len(),
            model.weights.len()
        )));
    }
    let x = model.standardized(values);
    let z = model.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + model.bias;
    Ok(sigmoid(z))
}
