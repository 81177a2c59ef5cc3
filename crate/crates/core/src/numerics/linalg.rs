use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Taylor degree used after scaling; with ‖A/2^s‖₁ ≤ 1/2 the truncation is far
/// below double precision.
const TAYLOR_DEGREE: usize = 18;
const SCALED_NORM: f64 = 0.5;
/// exp(710) overflows f64; anything with a larger 1-norm is rejected up front.
const MAX_NORM: f64 = 700.0;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a fixed-order Taylor
/// polynomial.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let n = m.nrows();
    let norm = if m.iter().all(|v| v.is_finite()) { norm1(m) } else { f64::NAN };
    if !norm.is_finite() || norm > MAX_NORM {
        return Err(Error::Overflow { norm });
    }
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let squarings = if norm <= SCALED_NORM { 0 } else { (norm / SCALED_NORM).log2().ceil() as i32 };
    let a = m * 2f64.powi(-squarings);

    // Horner: I + A(I + A/2(I + A/3(...)))
    let id = DMatrix::<f64>::identity(n, n);
    let mut e = id.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        e = &id + (&a * e) / k as f64;
    }
    for _ in 0..squarings {
        e = &e * &e;
    }
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { norm });
    }
    Ok(e)
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
///
/// A pivot below `1e-12 · max|Mᵢⱼ|` is reported as [`Error::Singular`].
pub fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let n = m.nrows();
    let scale = m.amax();
    let threshold = 1e-12 * scale;
    let mut a = m.clone();
    let mut inv = DMatrix::<f64>::identity(n, n);
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold || piv_abs == 0.0 {
            return Err(Error::Singular { pivot: piv_abs, threshold });
        }
        if piv_row != col {
            a.swap_rows(piv_row, col);
            inv.swap_rows(piv_row, col);
        }
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn expm_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)] - E).abs() < 1e-12 * E);
        assert!((e[(1, 1)] - E * E).abs() < 1e-12 * E * E);
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
    }

    #[test]
    fn expm_rotation_generator() {
        let th = FRAC_PI_2;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
        let e = expm(&m).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((e - want).amax() < 1e-12);
    }

    #[test]
    fn expm_large_norm_relative_accuracy() {
        // diag(-50, 50): the large entry has to be right to 1e-12 relative.
        let m = DMatrix::from_row_slice(2, 2, &[-50.0, 0.0, 0.0, 50.0]);
        let e = expm(&m).unwrap();
        let big = 50f64.exp();
        assert!((e[(1, 1)] - big).abs() < 1e-12 * big);
    }

    #[test]
    fn expm_overflow_is_an_error() {
        let m = DMatrix::from_row_slice(1, 1, &[1e6]);
        assert!(matches!(expm(&m), Err(Error::Overflow { .. })));
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(expm(&m), Err(Error::Overflow { .. })));
    }

    #[test]
    fn invert_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(invert(&id).unwrap(), id);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let want = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((invert(&j).unwrap() - want).amax() < 1e-15);
    }

    #[test]
    fn invert_rank_deficient() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert!(matches!(invert(&m), Err(Error::Singular { .. })));
        assert!(matches!(invert(&DMatrix::zeros(2, 2)), Err(Error::Singular { .. })));
    }
}
