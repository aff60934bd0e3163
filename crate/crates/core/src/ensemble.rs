//! Seeded Gaussian unitary ensemble.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{CMatrix, HermitianOperator, C64};

/// Draws `(M + M†)/2` with i.i.d. standard complex Gaussian entries of `M`
/// (`E|m_ij|² = 1`). Each `sample` index reads its own ChaCha stream under
/// `seed`, so ensemble members are independent of evaluation order.
pub fn gue(dim: usize, seed: u64, sample: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid std dev");
    let m = CMatrix::from_fn(dim, dim, |_, _| {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        C64::new(re, im)
    });
    let sym = (&m + m.adjoint()).unscale(2.0);
    HermitianOperator::new(sym).expect("symmetrized Gaussian matrix is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_reproducible_and_distinct() {
        assert_eq!(gue(4, 42, 3), gue(4, 42, 3));
        assert_ne!(gue(4, 42, 3), gue(4, 42, 4));
        assert_ne!(gue(4, 42, 3), gue(4, 43, 3));
    }

    #[test]
    fn variance_is_roughly_one_half_off_diagonal() {
        let h = gue(200, 1, 0);
        let n = h.dim();
        let mut acc = 0.0;
        let mut count = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += h.matrix()[(i, j)].norm_sqr();
                count += 1.0;
            }
        }
        let var = acc / count;
        assert!((var - 0.5).abs() < 0.02, "{var}");
    }
}
