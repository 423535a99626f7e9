//! Minimal dense complex linear algebra: just what the full-space oracle needs.

use num_complex::Complex64;

/// Row-major dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    /// Adds `scale * u v^dagger` in place.
    pub fn add_outer(&mut self, scale: Complex64, u: &[Complex64], v: &[Complex64]) {
        assert_eq!(u.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        for (i, ui) in u.iter().enumerate() {
            let su = scale * ui;
            if su == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            for (entry, vj) in row.iter_mut().zip(v) {
                *entry += su * vj.conj();
            }
        }
    }

    /// `out = self * v`.
    pub fn mul_vec_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut re = 0.0;
            let mut im = 0.0;
            for (h, x) in row.iter().zip(v) {
                re += h.re * x.re - h.im * x.im;
                im += h.re * x.im + h.im * x.re;
            }
            *o = Complex64::new(re, im);
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.mul_vec_into(v, &mut out);
        out
    }

    /// Largest entrywise deviation from hermiticity, `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `u^dagger H v`.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        inner(u, &self.mul_vec(v))
    }
}

/// `<u|v>` with the first argument conjugated.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// 2x2 complex matrix, `m[row][col]`.
pub type Mat2 = [[Complex64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn mat2_apply(a: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Max entrywise distance between two 2x2 matrices.
pub fn mat2_max_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

pub fn mat2_identity() -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    [[one, zero], [zero, one]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn outer_product_is_rank_one_and_hermitian_when_symmetric() {
        let u = [c(1.0, 0.0), c(0.0, 1.0), c(0.5, -0.5)];
        let mut m = DenseMatrix::zeros(3);
        m.add_outer(c(2.0, 0.0), &u, &u);
        assert!(m.hermiticity_defect() < 1e-15);
        // (u u^dagger) u = |u|^2 u
        let out = m.mul_vec(&u);
        let n2 = norm(&u).powi(2);
        for (o, x) in out.iter().zip(&u) {
            assert!((o - x * (2.0 * n2)).norm() < 1e-14);
        }
    }

    #[test]
    fn inner_conjugates_left_argument() {
        let u = [c(0.0, 1.0)];
        let v = [c(0.0, 1.0)];
        assert_eq!(inner(&u, &v), c(1.0, 0.0));
    }

    #[test]
    fn mat2_adjoint_of_product() {
        let a = [[c(1.0, 2.0), c(0.0, -1.0)], [c(3.0, 0.5), c(-2.0, 0.0)]];
        let b = [[c(0.3, 0.0), c(1.0, 1.0)], [c(0.0, 2.0), c(-1.0, 0.25)]];
        let lhs = mat2_adjoint(&mat2_mul(&a, &b));
        let rhs = mat2_mul(&mat2_adjoint(&b), &mat2_adjoint(&a));
        assert!(mat2_max_diff(&lhs, &rhs) < 1e-14);
    }
}
