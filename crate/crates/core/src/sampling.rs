//! Seeded rational sample points.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest denominator of sampled coordinates.
pub const MAX_DENOMINATOR: i64 = 16;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform-ish rational `p/q` with `q <= 16` and `|p/q| <= bound`.
pub fn rational_in<R: Rng>(rng: &mut R, bound: i64) -> BigRational {
    let q = rng.gen_range(1..=MAX_DENOMINATOR);
    let p = rng.gen_range(-bound * q..=bound * q);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `count` points in `[-bound, bound]^dim` that pass `accept`. Candidates
/// are drawn from one seeded stream, so the output depends only on the
/// arguments. Gives up after `64 * count` rejections.
pub fn rational_points(
    seed: u64,
    count: usize,
    dim: usize,
    bound: i64,
    mut accept: impl FnMut(&[BigRational]) -> bool,
) -> Vec<Vec<BigRational>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 64 * count.max(1) {
        tries += 1;
        let p: Vec<BigRational> = (0..dim).map(|_| rational_in(&mut r, bound)).collect();
        if accept(&p) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn seeded_points_are_reproducible_and_bounded() {
        let a = rational_points(7, 20, 3, 2, |_| true);
        let b = rational_points(7, 20, 3, 2, |_| true);
        assert_eq!(a, b);
        assert_ne!(a, rational_points(8, 20, 3, 2, |_| true));
        let two = BigRational::from_integer(2.into());
        assert!(a.iter().flatten().all(|x| x.abs() <= two && *x.denom() <= BigInt::from(MAX_DENOMINATOR)));
    }

    #[test]
    fn filter_is_applied() {
        let pts = rational_points(1, 10, 2, 2, |p| p[1].is_positive());
        assert_eq!(pts.len(), 10);
        assert!(pts.iter().all(|p| p[1].is_positive()));
    }
}
