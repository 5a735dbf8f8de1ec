use rand::Rng;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::random::seeded;

/// Glorot/Xavier uniform weights in `[-s, s]`, `s = sqrt(6 / (in + out))`.
pub fn glorot_init(in_dim: usize, out_dim: usize, seed: u64) -> Result<DenseMatrix> {
    glorot_init_with(in_dim, out_dim, &mut seeded(seed))
}

pub fn glorot_init_with(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Result<DenseMatrix> {
    if in_dim == 0 || out_dim == 0 {
        return Err(Error::InvalidInput(format!(
            "glorot_init needs positive dimensions, got {in_dim}x{out_dim}"
        )));
    }
    let s = (6.0 / (in_dim + out_dim) as f64).sqrt();
    Ok(DenseMatrix::from_fn(in_dim, out_dim, |_, _| rng.gen_range(-s..=s)))
}
