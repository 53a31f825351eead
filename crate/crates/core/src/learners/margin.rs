//! Linear max-margin classifier trained with the Pegasos stochastic
//! sub-gradient schedule on the hinge loss. Linear kernel only; the score
//! is the raw margin `w . x + b`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::learners::{check_training_set, FeatureVector};
use crate::score::Label;
use crate::seeds;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn class_sign(label: Label) -> f64 {
    match label {
        Label::Attack => 1.0,
        Label::BonaFide => -1.0,
    }
}

/// Regularized hinge objective
/// `lambda/2 (||w||^2 + b^2) + mean(max(0, 1 - y (w.x + b)))`. The bias is
/// trained as an augmented constant feature, so it enters the regularizer.
pub fn hinge_objective(data: &[FeatureVector], model: &MarginModel, lambda: f64) -> f64 {
    let norm_sq: f64 =
        model.weights.iter().map(|w| w * w).sum::<f64>() + model.bias * model.bias;
    let hinge: f64 = data
        .iter()
        .map(|sample| {
            let margin = class_sign(sample.label) * (dot(&model.weights, &sample.values) + model.bias);
            (1.0 - margin).max(0.0)
        })
        .sum::<f64>()
        / data.len() as f64;
    0.5 * lambda * norm_sq + hinge
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pegasos training; deterministic given `seed`. Runs `epochs * n` steps
/// with learning rate `1 / (lambda * t)`; the bias stays unregularized.
pub fn train_margin(
    data: &[FeatureVector],
    regularization: f64,
    epochs: usize,
    seed: u64,
) -> Result<MarginModel> {
    Ok(train_margin_logged(data, regularization, epochs, seed)?.0)
}

/// [`train_margin`] plus the hinge objective recorded after every epoch.
pub fn train_margin_logged(
    data: &[FeatureVector],
    regularization: f64,
    epochs: usize,
    seed: u64,
) -> Result<(MarginModel, Vec<f64>)> {
    let dim = check_training_set(data)?;
    if !(regularization > 0.0) {
        return Err(Error::Domain("regularization must be positive".into()));
    }
    if epochs == 0 {
        return Err(Error::Domain("epochs must be >= 1".into()));
    }

    let mut rng = seeds::substream(seed, "margin-steps", 0);
    let mut model = MarginModel {
        weights: vec![0.0; dim],
        bias: 0.0,
    };
    let mut objective_log = Vec::with_capacity(epochs);
    let mut t = 0u64;
    for _ in 0..epochs {
        for _ in 0..data.len() {
            t += 1;
            let eta = 1.0 / (regularization * t as f64);
            let sample = &data[rng.gen_range(0..data.len())];
            let y = class_sign(sample.label);
            let margin = y * (dot(&model.weights, &sample.values) + model.bias);

            // the bias is an augmented constant-1 feature: shrunk and
            // updated with the weights, which keeps the 1/(lambda t)
            // schedule stable
            let shrink = 1.0 - eta * regularization;
            for w in &mut model.weights {
                *w *= shrink;
            }
            model.bias *= shrink;
            if margin < 1.0 {
                for (w, &x) in model.weights.iter_mut().zip(&sample.values) {
                    *w += eta * y * x;
                }
                model.bias += eta * y;
            }
        }
        objective_log.push(hinge_objective(data, &model, regularization));
    }
    Ok((model, objective_log))
}

/// Raw margin `w . x + b`; sign decides the class, magnitude orders samples
/// for threshold sweeps.
pub fn score_margin(model: &MarginModel, values: &[f64]) -> Result<f64> {
    if values.len() != model.weights.len() {
        return Err(Error::Validation(format!(
            "feature dimension {} does not match model dimension {}",
            values.len(),
            model.weights.len()
        )));
    }
    Ok(dot(&model.weights, values) + model.bias)
}
