use super::Tensor2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxOutput {
    /// Mean negative log-likelihood over the batch.
    pub loss: f64,
    pub probs: Tensor2,
}

/// Mean softmax cross-entropy of `logits` against integer labels.
///
/// Each row is shifted by its maximum before exponentiation, so the loss for
/// a row is `max + ln Σ exp(z − max) − z_label`.
pub fn softmax_cross_entropy(logits: &Tensor2, labels: &[usize]) -> Result<SoftmaxOutput> {
    let (n, k) = logits.shape();
    if labels.len() != n {
        return Err(Error::shape(format!(
            "{} labels for {n} logit rows",
            labels.len()
        )));
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::InvalidLabel { label, classes: k });
    }

    let mut probs = Tensor2::zeros(n, k);
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let z = logits.row(i);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = probs.row_mut(i);
        let mut sum = 0.0;
        for (pj, &zj) in p.iter_mut().zip(z) {
            *pj = (zj - max).exp();
            sum += *pj;
        }
        p.iter_mut().for_each(|v| *v /= sum);
        total += (max - z[y]) + sum.ln();
    }
    let loss = if n == 0 { 0.0 } else { total / n as f64 };
    Ok(SoftmaxOutput { loss, probs })
}

/// Gradient of the mean loss with respect to the logits: (probs − onehot) / N.
pub(crate) fn logits_gradient(probs: &Tensor2, labels: &[usize]) -> Tensor2 {
    let n = probs.rows() as f64;
    let mut g = probs.scale(1.0 / n);
    for (i, &y) in labels.iter().enumerate() {
        let v = g.get(i, y);
        g.set(i, y, v - 1.0 / n);
    }
    g
}
