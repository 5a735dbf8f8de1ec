use rand::Rng;

use crate::dense::DenseMatrix;

/// Inverted dropout. In training mode each nonzero entry is zeroed with
/// probability `rate` and survivors are scaled by `1 / (1 - rate)`; zero
/// entries stay zero and consume no randomness. Returns the output and the
/// per-entry scale applied (`None` when the pass is the identity).
pub fn dropout_forward(
    h: &DenseMatrix,
    rate: f64,
    rng: &mut impl Rng,
    training: bool,
) -> (DenseMatrix, Option<DenseMatrix>) {
    assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
    if !training || rate == 0.0 {
        return (h.clone(), None);
    }
    let keep = 1.0 / (1.0 - rate);
    let mut scale = DenseMatrix::filled(h.rows(), h.cols(), keep);
    let mut out = h.clone();
    for (v, s) in out.as_mut_slice().iter_mut().zip(scale.as_mut_slice()) {
        if *v == 0.0 {
            continue;
        }
        if rng.gen::<f64>() < rate {
            *v = 0.0;
            *s = 0.0;
        } else {
            *v *= keep;
        }
    }
    (out, Some(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;

    #[test]
    fn identity_cases() {
        let h = DenseMatrix::from_fn(4, 4, |i, j| (i + j) as f64 + 1.0);
        let mut rng = seeded(1);
        assert_eq!(dropout_forward(&h, 0.0, &mut rng, true).0, h);
        let (out, mask) = dropout_forward(&h, 0.7, &mut rng, false);
        assert_eq!(out, h);
        assert!(mask.is_none());
    }

    #[test]
    fn survivor_fraction() {
        let h = DenseMatrix::filled(200, 100, 1.0);
        let (out, mask) = dropout_forward(&h, 0.5, &mut seeded(3), true);
        let survivors = out.as_slice().iter().filter(|&&v| v != 0.0).count();
        let frac = survivors as f64 / 20_000.0;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
        assert!(out.as_slice().iter().all(|&v| v == 0.0 || v == 2.0));
        assert_eq!(out, h.hadamard(&mask.unwrap()).unwrap());
    }
}
