use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{Matrix, Vector};

/// Seeded random stream. ChaCha keeps the output identical across platforms.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream, e.g. one per parallel worker.
    pub fn fork(&mut self) -> Rng {
        Rng::new(self.inner.random())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    /// Uniform on `[-1, 1]`, the zonotope coefficient box.
    pub fn box_coeff(&mut self) -> f64 {
        self.uniform(-1.0, 1.0)
    }

    pub fn box_vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.box_coeff())
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn normal_vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.normal())
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.normal())
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> Matrix {
    assert!(n >= 1, "random_orthogonal needs n >= 1");
    let g = rng.normal_matrix(n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::orthogonality_residual;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = Rng::new(5);
        let mut b = Rng::new(5);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn one_dimensional_orthogonal_is_sign() {
        let mut rng = Rng::new(1);
        let p = random_orthogonal(1, &mut rng);
        assert_eq!(p[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn orthogonal_residual_and_both_determinants() {
        let mut pos = false;
        let mut neg = false;
        for seed in 0..64 {
            let mut rng = Rng::new(seed);
            let p = random_orthogonal(4, &mut rng);
            assert!(orthogonality_residual(&p) <= 1e-12);
            if p.determinant() > 0.0 {
                pos = true;
            } else {
                neg = true;
            }
        }
        assert!(pos && neg);
    }

    #[test]
    fn distinct_seeds_distinct_matrices() {
        let a = random_orthogonal(3, &mut Rng::new(1));
        let b = random_orthogonal(3, &mut Rng::new(2));
        assert!((a - b).norm() > 1e-6);
    }

    #[test]
    fn box_coefficients_in_range() {
        let mut rng = Rng::new(9);
        let v = rng.box_vector(1000);
        assert!(v.iter().all(|x| (-1.0..=1.0).contains(x)));
    }
}
