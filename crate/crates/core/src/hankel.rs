//! Responses (Hankel) matrices built from translated windows of a signal,
//! the input-augmented variant, and tolerance-aware row echelon reduction.

use std::ops::Deref;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::signal::Signal;

/// `entries[(i, j)] = y[i + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix<T> {
    entries: Matrix<T>,
    source_length: usize,
}

impl<T> HankelMatrix<T> {
    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> Matrix<T> {
        self.entries
    }

    /// Samples consumed: `rows + cols − 1`.
    pub fn source_length(&self) -> usize {
        self.source_length
    }
}

impl<T> Deref for HankelMatrix<T> {
    type Target = Matrix<T>;

    fn deref(&self) -> &Matrix<T> {
        &self.entries
    }
}

/// `n × n` responses matrix; needs `2n − 1` samples.
pub fn build_hankel<T: Scalar>(signal: &Signal<T>, n: usize) -> Result<HankelMatrix<T>> {
    build_rectangular_hankel(signal, n, n)
}

pub fn build_rectangular_hankel<T: Scalar>(
    signal: &Signal<T>,
    rows: usize,
    cols: usize,
) -> Result<HankelMatrix<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("n", "Hankel dimensions must be at least 1"));
    }
    let required = rows + cols - 1;
    if signal.len() < required {
        return Err(Error::InsufficientSamples {
            required,
            available: signal.len(),
        });
    }
    let y = signal.samples();
    Ok(HankelMatrix {
        entries: Matrix::from_fn(rows, cols, |i, j| y[i + j].clone()),
        source_length: required,
    })
}

/// Where the translated input samples go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentationSide {
    /// `(n+1) × n`: the input row `u[0..n]` under the output block.
    BottomRowOfInputs,
    /// `n × (n+1)`: the input column `u[0..n]` right of the output block.
    RightColumnOfInputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedHankel<T> {
    entries: Matrix<T>,
    side: AugmentationSide,
}

impl<T> AugmentedHankel<T> {
    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn side(&self) -> AugmentationSide {
        self.side
    }
}

impl<T> Deref for AugmentedHankel<T> {
    type Target = Matrix<T>;

    fn deref(&self) -> &Matrix<T> {
        &self.entries
    }
}

/// Output Hankel block `y[i + j]` (`n × n`) padded with one row or column of
/// input samples `u[0], …, u[n−1]`.
pub fn build_augmented<T: Scalar>(
    y: &Signal<T>,
    u: &Signal<T>,
    n: usize,
    side: AugmentationSide,
) -> Result<AugmentedHankel<T>> {
    let block = build_hankel(y, n)?;
    if u.len() < n {
        return Err(Error::InsufficientSamples {
            required: n,
            available: u.len(),
        });
    }
    let u = u.samples();
    let entries = match side {
        AugmentationSide::BottomRowOfInputs => Matrix::from_fn(n + 1, n, |i, j| {
            if i < n {
                block[(i, j)].clone()
            } else {
                u[j].clone()
            }
        }),
        AugmentationSide::RightColumnOfInputs => Matrix::from_fn(n, n + 1, |i, j| {
            if j < n {
                block[(i, j)].clone()
            } else {
                u[i].clone()
            }
        }),
    };
    Ok(AugmentedHankel { entries, side })
}

/// Gaussian elimination with partial pivoting.
///
/// A pivot is accepted only if its magnitude exceeds
/// `pivot_tolerance × max|a_ij|` of the input matrix; columns without an
/// accepted pivot are skipped. Returns the reduced matrix and the number of
/// accepted pivots. Works over any ordered field: with exact rationals and
/// a zero tolerance the pivot count is the exact rank.
pub fn row_echelon<T>(matrix: &Matrix<T>, pivot_tolerance: T) -> (Matrix<T>, usize)
where
    T: Scalar + Signed,
{
    let mut a = matrix.clone();
    let (rows, cols) = a.shape();
    let largest = a
        .as_slice()
        .iter()
        .map(Signed::abs)
        .fold(T::zero(), |m, v| if v > m { v } else { m });
    let threshold = pivot_tolerance * largest;
    let mut pivots = 0;
    for col in 0..cols {
        if pivots == rows {
            break;
        }
        let (best, magnitude) = (pivots..rows).map(|r| (r, a[(r, col)].abs())).fold(
            (pivots, T::zero()),
            |acc, cand| if cand.1 > acc.1 { cand } else { acc },
        );
        if magnitude.is_zero() || magnitude <= threshold {
            continue;
        }
        a.swap_rows(pivots, best);
        let pivot = a[(pivots, col)].clone();
        for r in pivots + 1..rows {
            let factor = a[(r, col)].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            a[(r, col)] = T::zero();
            for c in col + 1..cols {
                let delta = factor.clone() * a[(pivots, c)].clone();
                a[(r, c)] = a[(r, c)].clone() - delta;
            }
        }
        pivots += 1;
    }
    (a, pivots)
}

/// `true` when every anti-diagonal is constant.
pub fn is_hankel<T: PartialEq + Clone>(matrix: &Matrix<T>) -> bool {
    let (rows, cols) = matrix.shape();
    (0..rows).all(|i| {
        (0..cols).all(|j| i == 0 || j + 1 == cols || matrix[(i, j)] == matrix[(i - 1, j + 1)])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use crate::signal::{gen_nonhomogeneous, gen_y5};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn sig(values: &[f64]) -> Signal<f64> {
        Signal::new(values.to_vec(), 1.0, "test").unwrap()
    }

    #[test]
    fn square_layout() {
        let h = build_hankel(&sig(&[1.0, 2.0, 3.0, 4.0, 5.0]), 3).unwrap();
        let expected = Matrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0],
            vec![3.0, 4.0, 5.0],
        ])
        .unwrap();
        assert_eq!(h.entries(), &expected);
        assert_eq!(h.source_length(), 5);
    }

    #[test]
    fn one_by_one() {
        let h = build_hankel(&sig(&[7.0]), 1).unwrap();
        assert_eq!(h.shape(), (1, 1));
        assert_eq!(h[(0, 0)], 7.0);
    }

    #[test]
    fn geometric_rows_are_proportional() {
        let b: f64 = 0.75;
        let values: Vec<f64> = (0..9).map(|k| b.powi(k)).collect();
        let h = build_hankel(&sig(&values), 5).unwrap();
        for i in 1..5 {
            for j in 0..5 {
                assert_eq!(h[(i, j)], b * h[(i - 1, j)]);
            }
        }
    }

    #[test]
    fn rectangular_layouts() {
        let s = sig(&[1.0, 2.0, 3.0, 4.0]);
        let wide = build_rectangular_hankel(&s, 1, 4).unwrap();
        assert_eq!(
            wide.entries(),
            &Matrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap()
        );
        let two = build_rectangular_hankel(&s, 2, 3).unwrap();
        assert_eq!(
            two.entries(),
            &Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]).unwrap()
        );
        assert_eq!(
            build_rectangular_hankel(&sig(&[1.0, 2.0, 3.0, 4.0, 5.0]), 3, 3).unwrap(),
            build_hankel(&sig(&[1.0, 2.0, 3.0, 4.0, 5.0]), 3).unwrap()
        );
    }

    #[test]
    fn insufficient_samples_names_required_count() {
        let err = build_hankel(&sig(&[1.0, 2.0, 3.0]), 5).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientSamples {
                required: 9,
                available: 3
            }
        );
        assert!(err.to_string().contains('9'));
        assert!(build_hankel(&sig(&[1.0]), 0).is_err());
    }

    #[test]
    fn augmented_shapes_and_blocks() {
        let (y, u) = gen_nonhomogeneous::<f64>(25, 1.0).unwrap();
        let bottom = build_augmented(&y, &u, 10, AugmentationSide::BottomRowOfInputs).unwrap();
        assert_eq!(bottom.shape(), (11, 10));
        assert!(is_hankel(&bottom.submatrix(10, 10)));
        for j in 0..10 {
            assert_eq!(bottom[(10, j)], u.samples()[j]);
        }
        let right = build_augmented(&y, &u, 10, AugmentationSide::RightColumnOfInputs).unwrap();
        assert_eq!(right.shape(), (10, 11));
        for i in 0..10 {
            assert_eq!(right[(i, 10)], u.samples()[i]);
        }
        assert_eq!(right.side(), AugmentationSide::RightColumnOfInputs);
        let short_u = u.truncated(5).unwrap();
        assert!(build_augmented(&y, &short_u, 10, AugmentationSide::BottomRowOfInputs).is_err());
    }

    #[test]
    fn echelon_identity_and_rank_one() {
        let (_, pivots) = row_echelon(&Matrix::<f64>::identity(3), 0.0);
        assert_eq!(pivots, 3);
        let values: Vec<f64> = (0..7).map(|k| 0.5f64.powi(k)).collect();
        let h = build_hankel(&sig(&values), 4).unwrap();
        let (reduced, pivots) = row_echelon(h.entries(), 1e-10);
        assert_eq!(pivots, 1);
        assert!(reduced.row(3).iter().all(|v| *v == 0.0));
        let (_, none) = row_echelon(&Matrix::<f64>::zeros(3, 4), 0.0);
        assert_eq!(none, 0);
    }

    #[test]
    fn echelon_y5() {
        let h = build_hankel(&gen_y5::<DoubleDouble>(15).unwrap(), 8).unwrap();
        let (_, pivots) = row_echelon(h.entries(), DoubleDouble::from(1e-24));
        assert_eq!(pivots, 5);
    }

    #[test]
    fn echelon_over_rationals() {
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        let m = Matrix::from_rows(&[
            vec![r(1), r(2), r(3)],
            vec![r(2), r(4), r(6)],
            vec![r(1), r(0), r(1)],
        ])
        .unwrap();
        let (_, pivots) = row_echelon(&m, r(0));
        assert_eq!(pivots, 2);
    }

    proptest! {
        #[test]
        fn anti_diagonals_constant(values in prop::collection::vec(-1e3f64..1e3, 1..40), rows in 1usize..20) {
            let s = sig(&values);
            let rows = rows.min(values.len());
            let cols = values.len() + 1 - rows;
            let h = build_rectangular_hankel(&s, rows, cols).unwrap();
            prop_assert!(is_hankel(h.entries()));
            prop_assert_eq!(h.source_length(), values.len());
        }

        #[test]
        fn nested_top_left_block(values in prop::collection::vec(-10f64..10.0, 3..41)) {
            let s = sig(&values);
            let n = values.len().div_ceil(2) - 1;
            prop_assume!(n >= 1);
            let big = build_hankel(&s, n + 1).unwrap();
            let small = build_hankel(&s, n).unwrap();
            prop_assert_eq!(big.submatrix(n, n), small.into_entries());
        }
    }
}
