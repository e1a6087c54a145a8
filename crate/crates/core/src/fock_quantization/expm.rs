//! Dense matrix exponential by scaling and squaring with a Taylor series.

use nalgebra::{ComplexField, DMatrix};

/// Largest 1-norm allowed after scaling.
const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 40;

fn norm1<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.modulus()).sum::<f64>()).fold(0.0, f64::max)
}

/// `e^M` for a square matrix. The number of squarings is chosen from the
/// 1-norm so the scaled series converges to machine precision.
pub fn expm<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> DMatrix<T> {
    assert!(m.is_square(), "expm needs a square matrix");
    let dim = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as i32 } else { 0 };
    let scaled = m * T::from_real(2f64.powi(-squarings));

    let mut result = DMatrix::<T>::identity(dim, dim);
    let mut term = DMatrix::<T>::identity(dim, dim);
    for p in 1..=MAX_TERMS {
        term = &term * &scaled * T::from_real(1.0 / p as f64);
        result += &term;
        if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rotation_generator() {
        let th: f64 = 7.3;
        let g = DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
        let e = expm(&g);
        let want = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!((e - want).abs().max() < 1e-13);
    }

    #[test]
    fn diagonal_and_zero() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-3.0, 0.0, 2.5]));
        let e = expm(&d);
        for (i, x) in [-3.0f64, 0.0, 2.5].iter().enumerate() {
            assert!((e[(i, i)] - x.exp()).abs() < 1e-13 * x.exp());
        }
        assert_eq!(expm(&DMatrix::<f64>::zeros(3, 3)), DMatrix::identity(3, 3));
    }

    #[test]
    fn complex_phase() {
        let g = DMatrix::from_element(1, 1, Complex64::new(0.0, 40.0));
        let e = expm(&g)[(0, 0)];
        assert!((e - Complex64::new(40f64.cos(), 40f64.sin())).norm() < 1e-12);
    }

    #[test]
    fn nilpotent_jordan_block() {
        let g = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let e = expm(&g);
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.5, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        assert!((e - want).abs().max() < 1e-15);
    }
}
