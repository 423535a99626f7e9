//! Deterministic randomness for experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

/// Same seed, same stream, on every platform.
pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random unit vector: `2N` standard normals, normalized.
pub fn draw_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let n = crate::linalg::norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|z| *z /= n);
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(42);
        let xs: Vec<u64> = (0..100).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..100).map(|_| b.random()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn different_seed_different_stream() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(43);
        let xs: Vec<u64> = (0..100).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..100).map(|_| b.random()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn unit_vector_is_normalized() {
        let mut rng = seeded_rng(7);
        for dim in [2, 8, 64] {
            let v = draw_unit_vector(&mut rng, dim);
            assert_eq!(v.len(), dim);
            assert!((crate::linalg::norm(&v) - 1.0).abs() < 1e-12);
        }
    }
}
