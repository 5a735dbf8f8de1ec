use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Floor applied to probabilities before taking logarithms.
pub(crate) const PROB_FLOOR: f64 = 1e-12;

fn masked_label(labels: &[Option<usize>], node: usize, classes: usize) -> Result<usize> {
    match labels.get(node).copied().flatten() {
        Some(l) if l < classes => Ok(l),
        Some(l) => Err(Error::LabelOutOfRange {
            node,
            label: l,
            n_classes: classes,
        }),
        None => Err(Error::InvalidInput(format!("masked node {node} has no label"))),
    }
}

/// Mean of `-ln Z[v, y_v]` over the nodes in `mask`.
pub fn cross_entropy_loss(z: &DenseMatrix, labels: &[Option<usize>], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask("cross-entropy over an empty node set"));
    }
    let mut total = 0.0;
    for &v in mask {
        if v >= z.rows() {
            return Err(Error::NodeOutOfRange {
                node: v,
                n_nodes: z.rows(),
            });
        }
        let y = masked_label(labels, v, z.cols())?;
        total -= z.get(v, y).max(PROB_FLOOR).ln();
    }
    Ok(total / mask.len() as f64)
}

/// Gradient of [`cross_entropy_loss`] with respect to the logits feeding a
/// softmax: `(Z - onehot(y)) / |mask|` on masked rows, zero elsewhere.
pub fn softmax_cross_entropy_grad(z: &DenseMatrix, labels: &[Option<usize>], mask: &[usize]) -> Result<DenseMatrix> {
    if mask.is_empty() {
        return Err(Error::EmptyMask("cross-entropy over an empty node set"));
    }
    let mut g = DenseMatrix::zeros(z.rows(), z.cols());
    let inv = 1.0 / mask.len() as f64;
    for &v in mask {
        if v >= z.rows() {
            return Err(Error::NodeOutOfRange {
                node: v,
                n_nodes: z.rows(),
            });
        }
        let y = masked_label(labels, v, z.cols())?;
        for (c, (gv, &zv)) in g.row_mut(v).iter_mut().zip(z.row(v)).enumerate() {
            *gv += (zv - if c == y { 1.0 } else { 0.0 }) * inv;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use rand::Rng;

    #[test]
    fn perfect_predictions_cost_nothing() {
        let z = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let loss = cross_entropy_loss(&z, &[Some(0), Some(1)], &[0, 1]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn uniform_predictions_cost_ln_l() {
        let z = DenseMatrix::filled(5, 7, 1.0 / 7.0);
        let labels: Vec<_> = (0..5).map(|v| Some(v % 7)).collect();
        let loss = cross_entropy_loss(&z, &labels, &[0, 1, 2, 3, 4]).unwrap();
        assert!((loss - 7f64.ln()).abs() < 1e-12);
        assert!((loss - 1.9459).abs() < 1e-4);
    }

    #[test]
    fn matches_scalar_recomputation() {
        let mut rng = seeded(11);
        let logits = DenseMatrix::from_fn(9, 4, |_, _| rng.gen_range(-2.0..2.0));
        let z = logits.softmax_rows();
        let labels: Vec<_> = (0..9).map(|_| Some(rng.gen_range(0..4))).collect();
        let mask = [0usize, 2, 3, 7, 8];
        let mut expected = 0.0;
        for &v in &mask {
            let row = logits.row(v);
            let lse = row.iter().map(|x| x.exp()).sum::<f64>().ln();
            expected += lse - row[labels[v].unwrap()];
        }
        expected /= mask.len() as f64;
        let got = cross_entropy_loss(&z, &labels, &mask).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn clamps_zero_probability() {
        let z = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let loss = cross_entropy_loss(&z, &[Some(1)], &[0]).unwrap();
        assert!((loss + PROB_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let z = DenseMatrix::filled(2, 2, 0.5);
        assert!(matches!(cross_entropy_loss(&z, &[Some(0), Some(1)], &[]), Err(Error::EmptyMask(_))));
        assert!(cross_entropy_loss(&z, &[Some(0), None], &[1]).is_err());
        assert!(softmax_cross_entropy_grad(&z, &[Some(0), Some(1)], &[]).is_err());
    }
}
