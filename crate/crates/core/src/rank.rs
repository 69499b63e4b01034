//! Numerical rank: singular spectra, tolerance policies, condition numbers,
//! and the exact fraction-free rank oracle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::svd::svd;

/// Singular values in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum<T> {
    values: Vec<T>,
    source_shape: (usize, usize),
}

impl<T: Real> SingularSpectrum<T> {
    /// Sorts `values` descending; every value must be finite and non-negative.
    pub fn new(mut values: Vec<T>, source_shape: (usize, usize)) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::NonFinite { index });
        }
        if values.len() != source_shape.0.min(source_shape.1) {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: source_shape.0.min(source_shape.1),
            });
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(SingularSpectrum {
            values,
            source_shape,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source_shape(&self) -> (usize, usize) {
        self.source_shape
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    /// `index,sigma` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,sigma")?;
        for (i, s) in self.values.iter().enumerate() {
            writeln!(out, "{i},{s:.16e}")?;
        }
        Ok(())
    }
}

pub fn singular_values<T: Real>(matrix: &Matrix<T>) -> Result<SingularSpectrum<T>> {
    let decomposition = svd(matrix)?;
    SingularSpectrum::new(decomposition.sigma, matrix.shape())
}

/// Multiplier on `max(rows, cols)·ε` for the default relative threshold.
pub const MACHINE_TOLERANCE_FACTOR: f64 = 64.0;

/// Default minimum ratio for the gap policy.
pub const DEFAULT_GAP_RATIO: f64 = 1e3;

/// How a spectrum is turned into a rank.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankPolicy {
    /// Relative threshold `max(rows, cols)·ε·64`, resolved per matrix.
    #[default]
    MachineRelative,
    /// Count `σᵢ > τ·σ_max`, `τ ∈ (0, 1)`.
    Relative(f64),
    /// Count `σᵢ > τ`, `τ > 0`.
    Absolute(f64),
    /// Cut at the largest `σᵢ/σᵢ₊₁` if it reaches `min_ratio > 1`.
    GapRatio(f64),
}

impl RankPolicy {
    pub fn relative(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::invalid(
                "tol",
                format!("relative threshold must lie in (0, 1), got {tau}"),
            ));
        }
        Ok(RankPolicy::Relative(tau))
    }

    pub fn absolute(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(
                "tol",
                format!("absolute threshold must be positive, got {tau}"),
            ));
        }
        Ok(RankPolicy::Absolute(tau))
    }

    pub fn gap_ratio(min_ratio: f64) -> Result<Self> {
        if min_ratio.is_nan() || min_ratio <= 1.0 {
            return Err(Error::invalid(
                "tol",
                format!("gap ratio must exceed 1, got {min_ratio}"),
            ));
        }
        Ok(RankPolicy::GapRatio(min_ratio))
    }

    /// Relative threshold used by [`RankPolicy::MachineRelative`] for a
    /// `rows × cols` matrix over `T`.
    pub fn machine_tolerance<T: Real>(rows: usize, cols: usize) -> f64 {
        rows.max(cols) as f64 * T::epsilon().as_f64() * MACHINE_TOLERANCE_FACTOR
    }
}

/// `default`, `relative[:τ]`, `absolute:τ` or `gap[:min_ratio]`; a bare
/// `relative` is the default machine-relative threshold.
impl FromStr for RankPolicy {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (kind, value) = match text.trim().split_once(':') {
            Some((kind, value)) => (kind, Some(value)),
            None => (text.trim(), None),
        };
        let number = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("tol", format!("`{v}` is not a number")))
        };
        match (kind, value) {
            ("default", None) | ("relative", None) => Ok(RankPolicy::MachineRelative),
            ("relative", Some(v)) => RankPolicy::relative(number(v)?),
            ("absolute", Some(v)) => RankPolicy::absolute(number(v)?),
            ("absolute", None) => Err(Error::invalid(
                "tol",
                "the absolute policy needs a threshold",
            )),
            ("gap", None) => RankPolicy::gap_ratio(DEFAULT_GAP_RATIO),
            ("gap", Some(v)) => RankPolicy::gap_ratio(number(v)?),
            _ => Err(Error::invalid(
                "policy",
                format!("unknown policy `{text}` (expected default, relative, absolute or gap)"),
            )),
        }
    }
}

impl fmt::Display for RankPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankPolicy::MachineRelative => write!(f, "relative(max(rows,cols)*eps*64)"),
            RankPolicy::Relative(t) => write!(f, "relative({t:e})"),
            RankPolicy::Absolute(t) => write!(f, "absolute({t:e})"),
            RankPolicy::GapRatio(r) => write!(f, "gap({r:e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult<T> {
    pub rank: usize,
    pub policy: RankPolicy,
    pub spectrum: SingularSpectrum<T>,
    /// `σ_rank / σ_rank+1`; `+∞` when the next value is zero or absent.
    pub decision_gap: T,
}

fn ratio_after<T: Real>(values: &[T], rank: usize) -> T {
    if rank == 0 || rank >= values.len() || values[rank] == T::zero() {
        return T::infinity();
    }
    values[rank - 1] / values[rank]
}

pub fn numerical_rank<T: Real>(
    spectrum: &SingularSpectrum<T>,
    policy: RankPolicy,
) -> RankResult<T> {
    let values = spectrum.values();
    let result = |rank, decision_gap| RankResult {
        rank,
        policy,
        spectrum: spectrum.clone(),
        decision_gap,
    };
    let sigma_max = spectrum.max();
    if sigma_max == T::zero() {
        return result(0, T::infinity());
    }
    let count_above = |threshold: T| values.iter().take_while(|&&s| s > threshold).count();
    match policy {
        RankPolicy::MachineRelative => {
            let (rows, cols) = spectrum.source_shape();
            let tau = T::of(RankPolicy::machine_tolerance::<T>(rows, cols));
            let rank = count_above(tau * sigma_max);
            result(rank, ratio_after(values, rank))
        }
        RankPolicy::Relative(tau) => {
            let rank = count_above(T::of(tau) * sigma_max);
            result(rank, ratio_after(values, rank))
        }
        RankPolicy::Absolute(tau) => {
            let rank = count_above(T::of(tau));
            result(rank, ratio_after(values, rank))
        }
        RankPolicy::GapRatio(min_ratio) => {
            let mut best: Option<(usize, T)> = None;
            for i in 0..values.len().saturating_sub(1) {
                if values[i] == T::zero() {
                    break;
                }
                let ratio = ratio_after(values, i + 1);
                if best.is_none_or(|(_, b)| ratio > b) {
                    best = Some((i + 1, ratio));
                }
            }
            match best {
                Some((rank, ratio)) if ratio >= T::of(min_ratio) => result(rank, ratio),
                Some((_, ratio)) => result(values.len(), ratio),
                None => result(values.len(), T::infinity()),
            }
        }
    }
}

/// Convenience: spectrum then rank.
pub fn matrix_rank<T: Real>(matrix: &Matrix<T>, policy: RankPolicy) -> Result<RankResult<T>> {
    Ok(numerical_rank(&singular_values(matrix)?, policy))
}

/// `σ_max / σ_min`, `+∞` when `σ_min = 0`.
pub fn condition_number<T: Real>(spectrum: &SingularSpectrum<T>) -> T {
    match spectrum.values().last() {
        Some(&min) if min > T::zero() => spectrum.max() / min,
        _ => T::infinity(),
    }
}

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
///
/// Every division is exact; intermediate entries are minors of the input.
pub fn exact_rank_integer<I>(matrix: &Matrix<I>) -> usize
where
    I: Integer + Clone,
{
    let mut a = matrix.clone();
    let (rows, cols) = a.shape();
    let mut previous = I::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot_row) = (rank..rows).find(|&r| !a[(r, col)].is_zero()) else {
            continue;
        };
        a.swap_rows(rank, pivot_row);
        let pivot = a[(rank, col)].clone();
        for r in rank + 1..rows {
            let lead = a[(r, col)].clone();
            for c in col + 1..cols {
                let cross = a[(r, c)].clone() * pivot.clone() - lead.clone() * a[(rank, c)].clone();
                a[(r, c)] = cross / previous.clone();
            }
            a[(r, col)] = I::zero();
        }
        previous = pivot;
        rank += 1;
    }
    rank
}

/// Exact rank of a rational matrix: each row is cleared of denominators
/// (row scaling preserves rank), then [`exact_rank_integer`] runs.
pub fn exact_rank_rational<I>(matrix: &Matrix<Ratio<I>>) -> usize
where
    I: Integer + Clone,
{
    let (rows, cols) = matrix.shape();
    let mut scaled = Matrix::from_fn(rows, cols, |_, _| I::zero());
    for i in 0..rows {
        let row = matrix.row(i);
        let lcm = row.iter().fold(I::one(), |acc, v| acc.lcm(v.denom()));
        for (j, v) in row.iter().enumerate() {
            scaled[(i, j)] = v.numer().clone() * (lcm.clone() / v.denom().clone());
        }
    }
    exact_rank_integer(&scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use crate::hankel::build_hankel;
    use crate::signal::{gen_geometric_sum, gen_y5, GeometricSum};
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn spectrum(values: &[f64]) -> SingularSpectrum<f64> {
        SingularSpectrum::new(values.to_vec(), (values.len(), values.len())).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn identity_spectrum() {
        let s = singular_values(&Matrix::<f64>::identity(3)).unwrap();
        for v in s.values() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-15);
        }
        assert_relative_eq!(condition_number(&s), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotated_diagonal() {
        // Givens rotations on both sides of diag(3, 2, 1)
        let (c1, s1) = (0.6, 0.8);
        let (c2, s2) = (5.0 / 13.0, 12.0 / 13.0);
        let left = Matrix::from_rows(&[vec![c1, -s1, 0.0], vec![s1, c1, 0.0], vec![0.0, 0.0, 1.0]])
            .unwrap();
        let right =
            Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, c2, -s2], vec![0.0, s2, c2]])
                .unwrap();
        let diag = [3.0, 2.0, 1.0];
        let m = Matrix::from_fn(3, 3, |i, j| {
            (0..3)
                .map(|k| left[(i, k)] * diag[k] * right[(k, j)])
                .sum::<f64>()
        });
        let s = singular_values(&m).unwrap();
        for (a, b) in s.values().iter().zip(diag) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [0.6, 0.8, 0.0];
        let v = [0.0, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0];
        let m = Matrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        let s = singular_values(&m).unwrap();
        assert_eq!(s.values().len(), 3);
        assert_relative_eq!(s.values()[0], 1.0, epsilon = 1e-15);
        assert!(s.values()[1] < 1e-15);
        assert_eq!(condition_number(&s), f64::INFINITY);
    }

    #[test]
    fn transpose_has_same_spectrum() {
        let m = Matrix::from_fn(4, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let a = singular_values(&m).unwrap();
        let b = singular_values(&m.transpose()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn threshold_policies() {
        let s = spectrum(&[1.0, 1e-14, 1e-15]);
        let r = numerical_rank(&s, RankPolicy::relative(1e-10).unwrap());
        assert_eq!(r.rank, 1);
        assert_relative_eq!(r.decision_gap, 1e14, max_relative = 1e-12);
        assert_eq!(
            numerical_rank(&s, RankPolicy::absolute(1e-14).unwrap()).rank,
            1
        );
        assert_eq!(
            numerical_rank(&s, RankPolicy::absolute(1e-16).unwrap()).rank,
            3
        );
        let full = numerical_rank(&s, RankPolicy::absolute(1e-16).unwrap());
        assert_eq!(full.decision_gap, f64::INFINITY);
    }

    #[test]
    fn gap_policy() {
        let none = numerical_rank(
            &spectrum(&[5.0, 4.0, 3.0]),
            RankPolicy::gap_ratio(10.0).unwrap(),
        );
        assert_eq!(none.rank, 3);
        assert_relative_eq!(none.decision_gap, 4.0 / 3.0, epsilon = 1e-15);
        let cut = numerical_rank(
            &spectrum(&[5.0, 4.0, 1e-3, 1e-4]),
            RankPolicy::gap_ratio(10.0).unwrap(),
        );
        assert_eq!(cut.rank, 2);
        let zeros = numerical_rank(
            &spectrum(&[2.0, 0.0, 0.0]),
            RankPolicy::gap_ratio(1e3).unwrap(),
        );
        assert_eq!(zeros.rank, 1);
        assert_eq!(zeros.decision_gap, f64::INFINITY);
    }

    #[test]
    fn zero_spectrum_is_rank_zero() {
        let s = spectrum(&[0.0, 0.0]);
        for policy in [
            RankPolicy::MachineRelative,
            RankPolicy::Relative(0.5),
            RankPolicy::Absolute(1.0),
            RankPolicy::GapRatio(10.0),
        ] {
            assert_eq!(numerical_rank(&s, policy).rank, 0);
        }
    }

    #[test]
    fn policy_validation() {
        assert!(RankPolicy::relative(0.0).is_err());
        assert!(RankPolicy::relative(1.0).is_err());
        assert!(RankPolicy::absolute(0.0).is_err());
        assert!(RankPolicy::gap_ratio(1.0).is_err());
        assert!(RankPolicy::gap_ratio(f64::NAN).is_err());
        assert_eq!(RankPolicy::default(), RankPolicy::MachineRelative);
    }

    #[test]
    fn spectrum_validation() {
        assert!(SingularSpectrum::new(vec![1.0, -1.0], (2, 2)).is_err());
        assert!(SingularSpectrum::new(vec![1.0, f64::NAN], (2, 2)).is_err());
        assert!(SingularSpectrum::new(vec![1.0], (2, 2)).is_err());
        let s = SingularSpectrum::new(vec![1.0, 3.0], (2, 5)).unwrap();
        assert_eq!(s.values(), &[3.0, 1.0]);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(
            "default".parse::<RankPolicy>().unwrap(),
            RankPolicy::MachineRelative
        );
        assert_eq!(
            "relative".parse::<RankPolicy>().unwrap(),
            RankPolicy::MachineRelative
        );
        assert_eq!(
            "relative:1e-3".parse::<RankPolicy>().unwrap(),
            RankPolicy::Relative(1e-3)
        );
        assert_eq!(
            "absolute:0.5".parse::<RankPolicy>().unwrap(),
            RankPolicy::Absolute(0.5)
        );
        assert_eq!(
            "gap".parse::<RankPolicy>().unwrap(),
            RankPolicy::GapRatio(DEFAULT_GAP_RATIO)
        );
        assert_eq!(
            "gap:50".parse::<RankPolicy>().unwrap(),
            RankPolicy::GapRatio(50.0)
        );
        for bad in ["absolute", "relative:2", "gap:0.5", "bogus", "relative:x"] {
            assert!(bad.parse::<RankPolicy>().is_err(), "{bad}");
        }
    }

    #[test]
    fn condition_cases() {
        assert_relative_eq!(
            condition_number(&spectrum(&[10.0, 1e-9])),
            1e10,
            max_relative = 1e-15
        );
        assert_eq!(condition_number(&spectrum(&[1.0, 0.0])), f64::INFINITY);
    }

    #[test]
    fn y5_default_rank_is_five() {
        let y5 = gen_y5::<DoubleDouble>(15).unwrap();
        let ranks: Vec<usize> = (2..=8)
            .map(|n| {
                let h = build_hankel(&y5, n).unwrap();
                matrix_rank(h.entries(), RankPolicy::default())
                    .unwrap()
                    .rank
            })
            .collect();
        assert_eq!(ranks, [2, 3, 4, 5, 5, 5, 5]);
    }

    #[test]
    fn y5_fifth_value_is_below_f64_resolution() {
        // σ₅/σ₁ ≈ 2.5e-15 at n = 8 sits under 8·ε·64 ≈ 1.1e-13
        let h = build_hankel(&gen_y5::<f64>(15).unwrap(), 8).unwrap();
        let r = matrix_rank(h.entries(), RankPolicy::default()).unwrap();
        assert_eq!(r.rank, 4);
    }

    #[test]
    fn exact_rank_cases() {
        for n in 1..7 {
            let one = gen_geometric_sum(
                &GeometricSum::new([(rat(1, 1), rat(1, 2))]).unwrap(),
                2 * n - 1,
            )
            .unwrap();
            assert_eq!(
                exact_rank_rational(build_hankel(&one, n).unwrap().entries()),
                1
            );
        }
        let two = GeometricSum::new([(rat(1, 1), rat(1, 2)), (rat(1, 1), rat(1, 3))]).unwrap();
        for n in 3..7 {
            let s = gen_geometric_sum(&two, 2 * n - 1).unwrap();
            assert_eq!(
                exact_rank_rational(build_hankel(&s, n).unwrap().entries()),
                2
            );
        }
        assert_eq!(exact_rank_rational(&Matrix::<BigRational>::zeros(3, 4)), 0);
        assert_eq!(exact_rank_integer(&Matrix::<i64>::identity(4)), 4);
    }

    #[test]
    fn bareiss_handles_zero_columns_and_swaps() {
        let m = Matrix::from_rows(&[
            vec![0i64, 0, 1, 2],
            vec![0, 0, 2, 4],
            vec![0, 3, 1, 1],
            vec![0, 6, 2, 2],
        ])
        .unwrap();
        assert_eq!(exact_rank_integer(&m), 2);
        let big = m.map(|v| BigInt::from(*v));
        assert_eq!(exact_rank_integer(&big), 2);
    }

    #[test]
    fn spectrum_csv() {
        let mut out = Vec::new();
        spectrum(&[2.0, 1.0]).write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "index,sigma\n0,2.0000000000000000e0\n1,1.0000000000000000e0\n"
        );
    }
}
