//! Dense kernels used by the solvers: partial-pivoted LU (solves and
//! determinant signs) and a cyclic Jacobi eigensolver for symmetric matrices.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a matrix is declared singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// LU factorization `P A = L U` with row partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    parity: i8,
    singular: bool,
}

impl Lu {
    pub fn new(mut a: DMatrix<f64>) -> Self {
        assert!(a.is_square(), "LU requires a square matrix");
        let n = a.nrows();
        let scale = inf_norm(&a);
        let threshold = PIVOT_THRESHOLD * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1i8;
        let mut singular = scale == 0.0 && n > 0;

        for k in 0..n {
            let (mut p, mut best) = (k, a[(k, k)].abs());
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) {
                singular = true;
                continue;
            }
            if p != k {
                a.swap_rows(p, k);
                perm.swap(p, k);
                parity = -parity;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        let akj = a[(k, j)];
                        a[(i, j)] -= factor * akj;
                    }
                }
            }
        }

        Lu {
            lu: a,
            perm,
            parity,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Sign of the determinant: +1, -1, or 0 when a pivot fell below threshold.
    pub fn det_sign(&self) -> i8 {
        if self.singular {
            return 0;
        }
        let mut sign = self.parity;
        for k in 0..self.lu.nrows() {
            if self.lu[(k, k)] < 0.0 {
                sign = -sign;
            }
        }
        sign
    }

    pub fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        if self.singular {
            return None;
        }
        let n = self.lu.nrows();
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Iterates until the off-diagonal Frobenius norm drops below
/// `tol` times the Frobenius norm of the input.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    assert!(a.is_square(), "eigenvalues require a square matrix");
    let n = a.nrows();
    let mut m = a.clone();
    let total = m.norm();
    let off = |m: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..100 {
        if off(&m) <= tol * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn det_sign_tracks_permutation_parity() {
        // [[0,1],[1,0]] has determinant -1 and needs one row swap.
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(Lu::new(a).det_sign(), -1);
        let b = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        assert_eq!(Lu::new(b.clone()).det_sign(), 1);
        assert_eq!(Lu::new(-b).det_sign(), -1);
    }

    #[test]
    fn singular_matrix_has_zero_sign() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let lu = Lu::new(a);
        assert!(lu.is_singular());
        assert_eq!(lu.det_sign(), 0);
        assert!(lu.solve(&DVector::from_vec(vec![1.0, 0.0])).is_none());
    }

    #[test]
    fn solve_matches_product() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, -2.0, 1.0, 3.0, 6.0, -4.0, 2.0, 1.0, 8.0]);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = &a * &x;
        let got = Lu::new(a).solve(&b).unwrap();
        for i in 0..3 {
            assert_relative_eq!(got[i], x[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn sign_agrees_with_nalgebra_determinant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..8 {
            for _ in 0..20 {
                let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let det = a.determinant();
                assert_eq!(Lu::new(a).det_sign() as f64, det.signum());
            }
        }
    }

    #[test]
    fn jacobi_on_path_laplacian() {
        // combinatorial Laplacian of P3: eigenvalues 0, 1, 3
        let a = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let e = symmetric_eigenvalues(&a, 1e-14);
        assert_relative_eq!(e[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(e[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e[2], 3.0, epsilon = 1e-12);
    }
}
