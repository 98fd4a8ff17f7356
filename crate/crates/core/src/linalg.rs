//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type Mat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Condition numbers above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

pub fn zeros(dim: usize) -> Mat {
    Mat::zeros(dim, dim)
}

pub fn identity(dim: usize) -> Mat {
    Mat::identity(dim, dim)
}

pub fn scalar(dim: usize, c: C64) -> Mat {
    Mat::from_diagonal_element(dim, dim, c)
}

pub fn is_zero(m: &Mat) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &Mat) -> f64 {
    match m.nrows() {
        0 => 0.0,
        1 if m.ncols() == 1 => m[(0, 0)].norm(),
        _ => {
            if is_zero(m) {
                return 0.0;
            }
            m.clone()
                .svd(false, false)
                .singular_values
                .iter()
                .fold(0.0_f64, |acc, &s| acc.max(s))
        }
    }
}

/// Operator norm of a square matrix stored row-major in a flat slice.
pub fn op_norm_flat(entries: &[C64], dim: usize) -> f64 {
    if dim == 1 {
        return entries[0].norm();
    }
    if entries.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return 0.0;
    }
    op_norm(&Mat::from_row_slice(dim, dim, entries))
}

/// Ratio of extreme singular values; infinite for exactly singular input.
pub fn condition_number(m: &Mat) -> f64 {
    if m.nrows() == 1 {
        return if m[(0, 0)].norm() == 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse guarded by [`SINGULAR_CONDITION`].
pub fn checked_inverse(m: &Mat) -> Option<Mat> {
    if m.nrows() == 1 {
        let z = m[(0, 0)];
        return if z.norm() == 0.0 {
            None
        } else {
            Some(Mat::from_element(1, 1, z.inv()))
        };
    }
    if condition_number(m) > SINGULAR_CONDITION {
        return None;
    }
    m.clone().try_inverse()
}

/// Solve `m x = b`, guarded by [`SINGULAR_CONDITION`].
pub fn checked_solve(m: &Mat, b: &CVec) -> Option<CVec> {
    if m.nrows() == 1 {
        let z = m[(0, 0)];
        return if z.norm() == 0.0 {
            None
        } else {
            Some(b * z.inv())
        };
    }
    if condition_number(m) > SINGULAR_CONDITION {
        return None;
    }
    m.clone().lu().solve(b)
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Parse-free complex formatting shared by the CSV writers.
pub fn fmt_c64(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_norm_of_diagonal_is_max_modulus() {
        let m = Mat::from_row_slice(
            2,
            2,
            &[
                C64::new(3.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, -4.0),
            ],
        );
        assert!((op_norm(&m) - 4.0).abs() < 1e-14);
        assert!((op_norm_flat(m.transpose().as_slice(), 2) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_of_rank_one() {
        // u v^H with |u| = |v| = sqrt(2) has norm 2
        let m = Mat::from_element(2, 2, C64::new(1.0, 0.0));
        assert!((op_norm(&m) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let m = Mat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        assert!(checked_inverse(&m).is_none());
        assert!(checked_inverse(&zeros(1)).is_none());
        let inv = checked_inverse(&scalar(3, C64::new(0.0, 2.0))).unwrap();
        assert!(max_abs_diff(&inv, &scalar(3, C64::new(0.0, -0.5))) < 1e-15);
    }
}
