//! Linear SVM training by dual coordinate descent, and hard negative mining.
//!
//! The primal objective is `½‖w̃‖² + C·Σ hinge(yᵢ·w̃ᵀx̃ᵢ)` over bias-augmented
//! samples `x̃ = [x, 1]` (so the bias carries the same light regularization as
//! the weights). Coordinates are visited in fixed order; training is
//! deterministic given the initialization seed and sample order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{DetectorConfig, LinearModel};

const GAP_TOL: f64 = 1e-6;
const MAX_PASSES: usize = 100_000;

/// Trains a binary hinge-loss SVM; α initialized at zero.
pub fn train_svm<S: Scalar>(
    positives: &[Vec<S>],
    negatives: &[Vec<S>],
    c: f64,
    class_label: impl Into<String>,
) -> Result<LinearModel<S>> {
    train_svm_seeded(positives, negatives, c, class_label, None)
}

/// [`train_svm`] with the dual variables initialized uniformly at random in
/// `[0, C]` from `seed`; converges to the same optimum (the problem is
/// convex), which the restart tests rely on.
pub fn train_svm_seeded<S: Scalar>(
    positives: &[Vec<S>],
    negatives: &[Vec<S>],
    c: f64,
    class_label: impl Into<String>,
    seed: Option<u64>,
) -> Result<LinearModel<S>> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::invalid(
            "svm training needs at least one sample of each polarity",
        ));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(Error::invalid(format!("C must be > 0, got {c}")));
    }
    let dim = positives[0].len();
    for x in positives.iter().chain(negatives) {
        if x.len() != dim {
            return Err(Error::mismatch(format!(
                "sample dim {} != {dim}",
                x.len()
            )));
        }
    }

    let n = positives.len() + negatives.len();
    let aug = dim + 1;
    let cap = S::from_f64_c(c);
    // bias-augmented design matrix, positives first
    let mut xs: Vec<S> = Vec::with_capacity(n * aug);
    let mut ys: Vec<S> = Vec::with_capacity(n);
    for x in positives {
        xs.extend_from_slice(x);
        xs.push(S::one());
        ys.push(S::one());
    }
    for x in negatives {
        xs.extend_from_slice(x);
        xs.push(S::one());
        ys.push(-S::one());
    }
    let qii: Vec<S> = (0..n)
        .map(|i| xs[i * aug..(i + 1) * aug].iter().map(|&v| v * v).sum())
        .collect();

    let mut alpha = vec![S::zero(); n];
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for a in &mut alpha {
            *a = S::from_f64_c(rng.gen_range(0.0..c));
        }
    }
    let mut w = vec![S::zero(); aug];
    for i in 0..n {
        if !alpha[i].is_zero() {
            let coef = alpha[i] * ys[i];
            for (wj, &xj) in w.iter_mut().zip(&xs[i * aug..(i + 1) * aug]) {
                *wj += coef * xj;
            }
        }
    }

    for _pass in 0..MAX_PASSES {
        for i in 0..n {
            let xi = &xs[i * aug..(i + 1) * aug];
            let mut dot = S::zero();
            for (&wj, &xj) in w.iter().zip(xi) {
                dot += wj * xj;
            }
            let grad = ys[i] * dot - S::one();
            let mut next = alpha[i] - grad / qii[i];
            if next < S::zero() {
                next = S::zero();
            } else if next > cap {
                next = cap;
            }
            let delta = next - alpha[i];
            if !delta.is_zero() {
                alpha[i] = next;
                let coef = delta * ys[i];
                for (wj, &xj) in w.iter_mut().zip(xi) {
                    *wj += coef * xj;
                }
            }
        }
        // relative duality gap
        let wnorm2: S = w.iter().map(|&v| v * v).sum();
        let mut hinge = S::zero();
        for i in 0..n {
            let xi = &xs[i * aug..(i + 1) * aug];
            let mut dot = S::zero();
            for (&wj, &xj) in w.iter().zip(xi) {
                dot += wj * xj;
            }
            let slack = S::one() - ys[i] * dot;
            if slack > S::zero() {
                hinge += slack;
            }
        }
        let half = S::from_f64_c(0.5);
        let primal = half * wnorm2 + cap * hinge;
        let dual = alpha.iter().copied().sum::<S>() - half * wnorm2;
        let gap = (primal - dual).to_f64_c();
        if gap <= GAP_TOL * primal.to_f64_c().abs().max(1.0) {
            break;
        }
    }

    let bias = w[dim];
    w.truncate(dim);
    Ok(LinearModel {
        weights: w,
        bias,
        class_label: class_label.into(),
    })
}

/// Primal objective of a model on a labeled sample set.
pub fn svm_objective<S: Scalar>(
    model: &LinearModel<S>,
    positives: &[Vec<S>],
    negatives: &[Vec<S>],
    c: f64,
) -> S {
    let half = S::from_f64_c(0.5);
    let mut reg: S = model.weights.iter().map(|&v| v * v).sum();
    reg += model.bias * model.bias;
    let mut hinge = S::zero();
    for (xs, y) in [(positives, S::one()), (negatives, -S::one())] {
        for x in xs {
            let slack = S::one() - y * model.margin(x);
            if slack > S::zero() {
                hinge += slack;
            }
        }
    }
    half * reg + S::from_f64_c(c) * hinge
}

/// Iterative hard negative mining: scores the pool, adds up to `hnm_batch`
/// margin violators (score > −1, highest first) per round, and retrains on
/// positives plus the active negatives. Stops early when a scan finds no new
/// violator. Returns the final model and the pool indices that were added.
pub fn mine_hard_negatives<S: Scalar>(
    model: &LinearModel<S>,
    positives: &[Vec<S>],
    initial_negatives: &[Vec<S>],
    pool: &[Vec<S>],
    config: &DetectorConfig,
) -> Result<(LinearModel<S>, Vec<usize>)> {
    let mut current = model.clone();
    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; pool.len()];

    for _round in 0..config.hnm_rounds {
        let minus_one = -S::one();
        let mut violators: Vec<(usize, S)> = pool
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_active[*i])
            .map(|(i, x)| (i, current.margin(x)))
            .filter(|&(_, m)| m > minus_one)
            .collect();
        if violators.is_empty() {
            break;
        }
        violators.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        for (i, _) in violators.into_iter().take(config.hnm_batch) {
            in_active[i] = true;
            active.push(i);
        }
        let mut negatives: Vec<Vec<S>> = initial_negatives.to_vec();
        negatives.extend(active.iter().map(|&i| pool[i].clone()));
        current = train_svm(positives, &negatives, config.c, current.class_label.clone())?;
    }
    Ok((current, active))
}
