/// Smooth L1 (Huber-style) loss of a single residual.
///
/// Quadratic `0.5 d^2 / beta` inside `|d| < beta`, linear `|d| - 0.5 beta`
/// outside; both branches meet at `0.5 beta`.
pub fn smooth_l1(diff: f64, beta: f64) -> f64 {
    let a = diff.abs();
    if a < beta {
        0.5 * diff * diff / beta
    } else {
        a - 0.5 * beta
    }
}

/// Derivative of [`smooth_l1`] with respect to the residual.
pub fn smooth_l1_grad(diff: f64, beta: f64) -> f64 {
    if diff.abs() < beta {
        diff / beta
    } else {
        diff.signum()
    }
}

/// Mean Smooth L1 loss between predictions and targets.
pub fn smooth_l1_loss(pred: &[f64], target: &[f64], beta: f64) -> f64 {
    assert_eq!(pred.len(), target.len(), "prediction and target lengths differ");
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter()
        .zip(target)
        .map(|(p, t)| smooth_l1(p - t, beta))
        .sum::<f64>()
        / pred.len() as f64
}
