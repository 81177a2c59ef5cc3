//! Deterministic sample generators for verifier sweeps.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// First `count` Halton points of the cube `[-r, r]^dim` that fall inside the
/// closed ball of radius `r` (rejection keeps the sequence deterministic).
pub fn halton_ball(dim: usize, count: usize, radius: f64) -> Vec<DVector<f64>> {
    assert!(dim <= PRIMES.len(), "halton_ball supports up to {} dimensions", PRIMES.len());
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p = DVector::from_iterator(dim, (0..dim).map(|d| radius * (2.0 * radical_inverse(i, PRIMES[d]) - 1.0)));
        if p.norm() <= radius {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// Seeded uniform sampler; identical seeds give identical streams on every
/// platform.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Uniform in the cube `[-r, r]^dim`.
    pub fn in_cube(&mut self, dim: usize, r: f64) -> DVector<f64> {
        DVector::from_iterator(dim, (0..dim).map(|_| self.rng.gen_range(-r..r)))
    }

    /// Uniform in the ball of radius `r` (rejection from the cube).
    pub fn in_ball(&mut self, dim: usize, r: f64) -> DVector<f64> {
        loop {
            let p = self.in_cube(dim, r);
            if p.norm() <= r {
                return p;
            }
        }
    }

    /// Uniform direction scaled to a norm drawn uniformly from `[r0, r1]`.
    pub fn in_shell(&mut self, dim: usize, r0: f64, r1: f64) -> DVector<f64> {
        loop {
            let p = self.in_cube(dim, 1.0);
            let n = p.norm();
            if n > 1e-3 && n <= 1.0 {
                let r = self.rng.gen_range(r0..=r1);
                return p * (r / n);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_points_lie_in_ball_and_are_distinct() {
        let pts = halton_ball(3, 50, 1.0);
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| p.norm() <= 1.0));
        for i in 0..pts.len() {
            for j in 0..i {
                assert!((&pts[i] - &pts[j]).norm() > 1e-6);
            }
        }
        assert_eq!(pts, halton_ball(3, 50, 1.0));
    }

    #[test]
    fn seeded_streams_repeat() {
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..10 {
            assert_eq!(a.in_ball(3, 0.5), b.in_ball(3, 0.5));
        }
        let s = Sampler::new(1).in_shell(3, 0.05, 0.2);
        assert!(s.norm() >= 0.05 - 1e-12 && s.norm() <= 0.2 + 1e-12);
    }
}
