//! Bagged decision forest: Gini splits over every feature (the score
//! vectors have at most a handful of dimensions, so no feature subsampling),
//! trees grown to purity with a minimum leaf size of 2, and a continuous
//! attack-fraction score for threshold sweeps.

use rand::Rng;

use crate::error::{Error, Result};
use crate::learners::{check_training_set, FeatureVector};
use crate::par;
use crate::score::Label;
use crate::seeds;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        attack_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Node>,
    bags: Vec<Vec<usize>>,
    dim: usize,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Out-of-bag accuracy at the 0.5 decision point: each sample is scored
    /// only by trees whose bootstrap bag missed it.
    pub fn oob_accuracy(&self, data: &[FeatureVector]) -> Result<f64> {
        let mut correct = 0usize;
        let mut counted = 0usize;
        for (i, sample) in data.iter().enumerate() {
            if sample.values.len() != self.dim {
                return Err(Error::Validation(format!(
                    "feature dimension {} does not match model dimension {}",
                    sample.values.len(),
                    self.dim
                )));
            }
            let mut total = 0.0;
            let mut votes = 0usize;
            for (tree, bag) in self.trees.iter().zip(&self.bags) {
                if bag.contains(&i) {
                    continue;
                }
                total += leaf_fraction(tree, &sample.values);
                votes += 1;
            }
            if votes == 0 {
                continue;
            }
            let predicted_attack = total / votes as f64 >= 0.5;
            if predicted_attack == (sample.label == Label::Attack) {
                correct += 1;
            }
            counted += 1;
        }
        if counted == 0 {
            return Err(Error::Domain("no out-of-bag samples".into()));
        }
        Ok(correct as f64 / counted as f64)
    }
}

/// Trains `n_trees` bagged trees; deterministic given `seed`. Tree
/// training parallelizes over independent per-tree sub-streams.
pub fn train_forest(data: &[FeatureVector], n_trees: usize, seed: u64) -> Result<ForestModel> {
    train_forest_impl(data, n_trees, seed, true)
}

/// Sequential twin of [`train_forest`] for benchmark comparison.
pub fn train_forest_seq(data: &[FeatureVector], n_trees: usize, seed: u64) -> Result<ForestModel> {
    train_forest_impl(data, n_trees, seed, false)
}

fn train_forest_impl(
    data: &[FeatureVector],
    n_trees: usize,
    seed: u64,
    parallel: bool,
) -> Result<ForestModel> {
    if n_trees == 0 {
        return Err(Error::Domain("forest needs at least one tree".into()));
    }
    let dim = check_training_set(data)?;

    let tree_ids: Vec<u64> = (0..n_trees as u64).collect();
    let build = |&t: &u64| {
        let mut rng = seeds::substream(seed, "tree", t);
        let bag: Vec<usize> = (0..data.len())
            .map(|_| rng.gen_range(0..data.len()))
            .collect();
        let tree = grow(data, &bag, dim);
        (tree, bag)
    };
    let grown = if parallel {
        par::map_collect(&tree_ids, build)
    } else {
        par::map_collect_seq(&tree_ids, build)
    };

    let mut trees = Vec::with_capacity(n_trees);
    let mut bags = Vec::with_capacity(n_trees);
    for (tree, bag) in grown {
        trees.push(tree);
        bags.push(bag);
    }
    Ok(ForestModel { trees, bags, dim })
}

fn attack_count(data: &[FeatureVector], members: &[usize]) -> usize {
    members
        .iter()
        .filter(|&&i| data[i].label == Label::Attack)
        .count()
}

fn gini(attacks: usize, total: usize) -> f64 {
    let p = attacks as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

fn grow(data: &[FeatureVector], members: &[usize], dim: usize) -> Node {
    let attacks = attack_count(data, members);
    let total = members.len();
    // pure nodes stop; nodes below 4 samples cannot split under min-leaf 2
    if attacks == 0 || attacks == total || total < 4 {
        return Node::Leaf {
            attack_fraction: attacks as f64 / total as f64,
        };
    }

    // best (weighted child impurity, feature, threshold)
    let mut best: Option<(f64, usize, f64, usize)> = None; // +split position in sorted order
    let mut best_sorted: Vec<usize> = Vec::new();
    for feature in 0..dim {
        let mut sorted = members.to_vec();
        sorted.sort_by(|&a, &b| {
            data[a].values[feature]
                .partial_cmp(&data[b].values[feature])
                .expect("features are finite")
                .then(a.cmp(&b))
        });

        let mut left_attacks = 0usize;
        for i in 1..total {
            if data[sorted[i - 1]].label == Label::Attack {
                left_attacks += 1;
            }
            let prev = data[sorted[i - 1]].values[feature];
            let next = data[sorted[i]].values[feature];
            if prev >= next {
                continue;
            }
            if i < 2 || total - i < 2 {
                continue;
            }
            let impurity = (i as f64 * gini(left_attacks, i)
                + (total - i) as f64 * gini(attacks - left_attacks, total - i))
                / total as f64;
            if best.map_or(true, |(b, ..)| impurity < b) {
                best = Some((impurity, feature, 0.5 * (prev + next), i));
                best_sorted = sorted.clone();
            }
        }
    }

    match best {
        None => Node::Leaf {
            attack_fraction: attacks as f64 / total as f64,
        },
        Some((_, feature, threshold, at)) => {
            let (left, right) = best_sorted.split_at(at);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow(data, left, dim)),
                right: Box::new(grow(data, right, dim)),
            }
        }
    }
}

fn leaf_fraction(node: &Node, values: &[f64]) -> f64 {
    match node {
        Node::Leaf { attack_fraction } => *attack_fraction,
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if values[*feature] < *threshold {
                leaf_fraction(left, values)
            } else {
                leaf_fraction(right, values)
            }
        }
    }
}

/// Mean attack fraction over all trees' leaves, in [0, 1].
pub fn score_forest(model: &ForestModel, values: &[f64]) -> Result<f64> {
    if values.len() != model.dim {
        return Err(Error::Validation(format!(
            "feature dimension {} does not match model dimension {}",
            values.len(),
            model.dim
        )));
    }
    let total: f64 = model
        .trees
        .iter()
        .map(|tree| leaf_fraction(tree, values))
        .sum();
    Ok(total / model.trees.len() as f64)
}
