use crate::vcs::FileDelta;

/// Shannon entropy in bits of the distribution proportional to `weights`.
/// Zero weights are skipped; fewer than two positive weights give 0.
pub fn shannon_entropy<I>(weights: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let positive: Vec<f64> = weights.into_iter().filter(|&w| w > 0.0).collect();
    if positive.len() < 2 {
        return 0.0;
    }
    let total: f64 = positive.iter().sum();
    -positive
        .iter()
        .map(|&w| {
            let p = w / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Entropy of one commit, weighting each file by its added plus deleted lines.
pub fn change_entropy(delta: &[FileDelta]) -> f64 {
    shannon_entropy(delta.iter().map(|d| f64::from(d.lines_added + d.lines_deleted)))
}

/// Entropy of a time window, weighting each file by how many changes touched it.
pub fn window_entropy(touch_counts: &[u32]) -> f64 {
    shannon_entropy(touch_counts.iter().map(|&c| f64::from(c)))
}
