//! Pool-adjacent-violators fit for non-increasing sequences.

/// Weighted least-squares non-increasing fit of `values`.
///
/// Points with zero weight are fitted but do not pull their block.
pub fn fit_non_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len(), "values and weights must align");
    // blocks of (weighted mean, total weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let w = w.max(0.0);
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            let mean = if w > 0.0 {
                (m1 * w1 + m2 * w2) / w
            } else {
                0.5 * (m1 + m2)
            };
            blocks.push((mean, w, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(mean, _, count)| std::iter::repeat_n(mean, count))
        .collect()
}
