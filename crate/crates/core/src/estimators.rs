//! Order estimators: the Hankel rank sweep (Ho-Kalman), and the AIC and
//! covariance-determinant baselines it is compared against.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::hankel::build_hankel;
use crate::matrix::Matrix;
use crate::rank::{condition_number, numerical_rank, singular_values, RankPolicy};
use crate::scalar::Real;
use crate::signal::Signal;
use crate::svd::svd;

/// Consecutive equal ranks that end a sweep before it counts as converged.
pub const DEFAULT_PLATEAU_LEN: usize = 3;

/// `rss` is floored here before the logarithm in the AIC.
pub const RSS_FLOOR: f64 = 1e-300;

/// Default `|det C_m / det C_{m−1}|` below which the covariance is
/// considered collapsed.
pub const DEFAULT_COLLAPSE_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    HokalmanRank,
    Aic,
    CovarianceDeterminant,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::HokalmanRank => "hokalman_rank",
            Method::Aic => "aic",
            Method::CovarianceDeterminant => "covariance_determinant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Always ≥ 1.
    Conclusive(usize),
    Inconclusive,
}

impl Order {
    pub fn value(self) -> Option<usize> {
        match self {
            Order::Conclusive(k) => Some(k),
            Order::Inconclusive => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Conclusive(k) => write!(f, "{k}"),
            Order::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

/// Method-specific context for an [`OrderEstimate`]; the full reports are
/// returned alongside.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    HokalmanRank {
        plateau_len: usize,
        n_max: usize,
        policy: RankPolicy,
    },
    Aic {
        /// Candidate orders whose regressor matrix was rank-deficient.
        rank_deficient_orders: Vec<usize>,
        residual_count: usize,
    },
    CovarianceDeterminant {
        collapse_ratio: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub order: Order,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub n: usize,
    pub rank: usize,
    pub decision_gap: T,
    pub condition: T,
}

/// Rank of the `n × n` Hankel matrix as a function of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSweep<T> {
    points: Vec<SweepPoint<T>>,
}

impl<T: Real> RankSweep<T> {
    /// Validates `n` strictly increasing and `rank ≤ n`.
    pub fn new(points: Vec<SweepPoint<T>>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].n <= w[0].n) {
            return Err(Error::invalid(
                "points",
                "sweep dimensions must be strictly increasing",
            ));
        }
        if let Some(p) = points.iter().find(|p| p.rank > p.n) {
            return Err(Error::invalid(
                "points",
                format!("rank {} exceeds dimension {}", p.rank, p.n),
            ));
        }
        Ok(RankSweep { points })
    }

    pub fn points(&self) -> &[SweepPoint<T>] {
        &self.points
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.rank).collect()
    }

    /// Final rank when the last `plateau_len` ranks agree.
    pub fn plateau_order(&self, plateau_len: usize) -> Order {
        let len = plateau_len.max(1);
        if self.points.len() < len {
            return Order::Inconclusive;
        }
        let tail = &self.points[self.points.len() - len..];
        let last = tail[tail.len() - 1].rank;
        if last >= 1 && tail.iter().all(|p| p.rank == last) {
            Order::Conclusive(last)
        } else {
            Order::Inconclusive
        }
    }

    /// First `n` from which the rank stays constant to the end of the sweep,
    /// provided that final run spans at least `plateau_len` points.
    pub fn plateau_onset(&self, plateau_len: usize) -> Option<usize> {
        let last = self.points.last()?.rank;
        let run = self
            .points
            .iter()
            .rev()
            .take_while(|p| p.rank == last)
            .count();
        (run >= plateau_len.max(1)).then(|| self.points[self.points.len() - run].n)
    }

    /// `n,rank,gap,condition`
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,rank,gap,condition")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{}",
                p.n,
                p.rank,
                p.decision_gap.to_decimal(),
                p.condition.to_decimal()
            )?;
        }
        Ok(())
    }
}

/// Hankel rank for every `n` in `dims`.
pub fn rank_sweep<T: Real>(
    signal: &Signal<T>,
    dims: impl IntoIterator<Item = usize>,
    policy: RankPolicy,
) -> Result<RankSweep<T>> {
    let points = dims
        .into_iter()
        .map(|n| {
            let spectrum = singular_values(build_hankel(signal, n)?.entries())?;
            let condition = condition_number(&spectrum);
            let result = numerical_rank(&spectrum, policy);
            Ok(SweepPoint {
                n,
                rank: result.rank,
                decision_gap: result.decision_gap,
                condition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RankSweep::new(points)
}

/// Ho-Kalman order with the default plateau length.
pub fn hokalman_order<T: Real>(
    signal: &Signal<T>,
    n_max: usize,
    policy: RankPolicy,
) -> Result<(OrderEstimate, RankSweep<T>)> {
    hokalman_order_with_plateau(signal, n_max, policy, DEFAULT_PLATEAU_LEN)
}

/// Sweeps `n = 2..=n_max`; the order is the final rank when the last
/// `plateau_len` ranks agree, otherwise inconclusive.
pub fn hokalman_order_with_plateau<T: Real>(
    signal: &Signal<T>,
    n_max: usize,
    policy: RankPolicy,
    plateau_len: usize,
) -> Result<(OrderEstimate, RankSweep<T>)> {
    if n_max < 2 {
        return Err(Error::invalid(
            "n_max",
            format!("must be at least 2, got {n_max}"),
        ));
    }
    if plateau_len == 0 {
        return Err(Error::invalid("plateau_len", "must be at least 1"));
    }
    let required = 2 * n_max - 1;
    if signal.len() < required {
        return Err(Error::InsufficientSamples {
            required,
            available: signal.len(),
        });
    }
    let sweep = rank_sweep(signal, 2..=n_max, policy)?;
    let estimate = OrderEstimate {
        order: sweep.plateau_order(plateau_len),
        method: Method::HokalmanRank,
        diagnostics: Diagnostics::HokalmanRank {
            plateau_len,
            n_max,
            policy,
        },
    };
    Ok((estimate, sweep))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArFit<T> {
    /// `a_1, …, a_p` in `y[n] = Σ a_i·y[n−i]`.
    pub coefficients: Vec<T>,
    pub rss: T,
    pub residual_count: usize,
    /// The regressor matrix was numerically rank-deficient and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

/// Least-squares AR(p) fit over every `n ≥ p`.
pub fn ar_fit<T: Real>(signal: &Signal<T>, p: usize) -> Result<ArFit<T>> {
    check_ar_length(signal, p)?;
    ar_fit_from(signal, p, p)
}

fn check_ar_length<T: Real>(signal: &Signal<T>, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("p", "AR order must be positive"));
    }
    let required = 2 * p + 1;
    if signal.len() < required {
        return Err(Error::InsufficientSamples {
            required,
            available: signal.len(),
        });
    }
    Ok(())
}

/// AR(p) fit on the equations `n = start..len` (`start ≥ p`), solved by SVD
/// with singular values under the default rank policy discarded.
fn ar_fit_from<T: Real>(signal: &Signal<T>, p: usize, start: usize) -> Result<ArFit<T>> {
    let y = signal.samples();
    let rows = y.len() - start;
    let x = Matrix::from_fn(rows, p, |r, i| y[start + r - i - 1]);
    let target: Vec<T> = y[start..].to_vec();
    let decomposition = svd(&x)?;
    let spectrum = crate::rank::SingularSpectrum::new(decomposition.sigma.clone(), x.shape())?;
    let kept = numerical_rank(&spectrum, RankPolicy::default()).rank;
    let mut coefficients = vec![T::zero(); p];
    for k in 0..kept {
        let projection = (0..rows).fold(T::zero(), |acc, r| {
            acc + decomposition.u[(r, k)] * target[r]
        });
        let scale = projection / decomposition.sigma[k];
        for (i, c) in coefficients.iter_mut().enumerate() {
            *c = *c + decomposition.v[(i, k)] * scale;
        }
    }
    let rss = (0..rows).fold(T::zero(), |acc, r| {
        let fitted = (0..p).fold(T::zero(), |s, i| s + coefficients[i] * x[(r, i)]);
        let e = target[r] - fitted;
        acc + e * e
    });
    Ok(ArFit {
        coefficients,
        rss,
        residual_count: rows,
        rank_deficient: kept < p,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AicRow<T> {
    pub p: usize,
    pub rss: T,
    pub aic: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AicReport<T> {
    pub per_order: Vec<AicRow<T>>,
    pub selected: usize,
}

impl<T: Real> AicReport<T> {
    /// `p,rss,aic`
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p,rss,aic")?;
        for row in &self.per_order {
            writeln!(
                out,
                "{},{},{}",
                row.p,
                row.rss.to_decimal(),
                row.aic.to_decimal()
            )?;
        }
        Ok(())
    }
}

/// `aic(p) = K·ln(rss_p/K) + 2p` for `p = 1..=p_max`.
///
/// Every candidate is fitted on the same `K = len − p_max` equations, so
/// the criteria differ only through the fit and the penalty and the
/// argmin is invariant under scaling of the signal. Ties go to the smaller
/// `p`; the estimate is inconclusive only if no criterion is finite.
pub fn aic_order<T: Real>(
    signal: &Signal<T>,
    p_max: usize,
) -> Result<(OrderEstimate, AicReport<T>)> {
    check_ar_length(signal, p_max)?;
    let floor = T::of(RSS_FLOOR);
    let mut per_order = Vec::with_capacity(p_max);
    let mut rank_deficient_orders = Vec::new();
    let residual_count = signal.len() - p_max;
    let k = T::of(residual_count as f64);
    for p in 1..=p_max {
        let fit = ar_fit_from(signal, p, p_max)?;
        if fit.rank_deficient {
            rank_deficient_orders.push(p);
        }
        let aic = k * (fit.rss.max(floor) / k).ln() + T::of(2.0 * p as f64);
        per_order.push(AicRow {
            p,
            rss: fit.rss,
            aic,
        });
    }
    let best =
        per_order
            .iter()
            .filter(|row| row.aic.is_finite())
            .fold(None::<&AicRow<T>>, |best, row| match best {
                Some(b) if b.aic <= row.aic => Some(b),
                _ => Some(row),
            });
    let (order, selected) = match best {
        Some(row) => (Order::Conclusive(row.p), row.p),
        None => (Order::Inconclusive, 0),
    };
    let estimate = OrderEstimate {
        order,
        method: Method::Aic,
        diagnostics: Diagnostics::Aic {
            rank_deficient_orders,
            residual_count,
        },
    };
    Ok((
        estimate,
        AicReport {
            per_order,
            selected,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovDetReport<T> {
    /// `(m, det C_m)` in the requested order.
    pub per_order: Vec<(usize, T)>,
}

impl<T: Real> CovDetReport<T> {
    /// `m,det`
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,det")?;
        for (m, det) in &self.per_order {
            writeln!(out, "{m},{}", det.to_decimal())?;
        }
        Ok(())
    }

    /// Smallest `m` from which every step satisfies
    /// `|det C_m| ≤ collapse_ratio·|det C_{m−1}|` through the end of the
    /// report (a zero determinant after a zero counts as collapsed).
    pub fn collapse_order(&self, collapse_ratio: f64) -> OrderEstimate {
        let ratio = T::of(collapse_ratio);
        let collapsed: Vec<bool> = self
            .per_order
            .windows(2)
            .map(|w| {
                let (prev, cur) = (w[0].1.abs(), w[1].1.abs());
                cur <= ratio * prev || cur.is_zero()
            })
            .collect();
        let run = collapsed.iter().rev().take_while(|&&c| c).count();
        let order = if run == 0 {
            Order::Inconclusive
        } else {
            let m = self.per_order[self.per_order.len() - run].0;
            if m >= 1 {
                Order::Conclusive(m)
            } else {
                Order::Inconclusive
            }
        };
        OrderEstimate {
            order,
            method: Method::CovarianceDeterminant,
            diagnostics: Diagnostics::CovarianceDeterminant { collapse_ratio },
        }
    }
}

/// `det C_m` with `C_m = (1/count)·Σ φ_n φ_nᵀ`,
/// `φ_n = (y[n], y[n−1], …, y[n−m])` over `n = m..len`.
pub fn covariance_determinants<T: Real>(
    signal: &Signal<T>,
    m_range: RangeInclusive<usize>,
) -> Result<CovDetReport<T>> {
    if m_range.is_empty() {
        return Err(Error::invalid("m_range", "range is empty"));
    }
    let required = m_range.end() + 2;
    if signal.len() < required {
        return Err(Error::InsufficientSamples {
            required,
            available: signal.len(),
        });
    }
    let y = signal.samples();
    let per_order = m_range
        .map(|m| {
            let count = y.len() - m;
            let inv = T::of(count as f64).recip();
            let c = Matrix::from_fn(m + 1, m + 1, |i, j| {
                (m..y.len()).fold(T::zero(), |acc, n| acc + y[n - i] * y[n - j]) * inv
            });
            (m, determinant(&c))
        })
        .collect();
    Ok(CovDetReport { per_order })
}

/// LU with partial pivoting.
fn determinant<T: Real>(matrix: &Matrix<T>) -> T {
    let mut a = matrix.clone();
    let n = a.nrows();
    let mut det = T::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[(r, col)].abs().partial_cmp(&a[(s, col)].abs()).unwrap())
            .expect("non-empty");
        if a[(pivot_row, col)].is_zero() {
            return T::zero();
        }
        if pivot_row != col {
            a.swap_rows(pivot_row, col);
            det = -det;
        }
        let pivot = a[(col, col)];
        det = det * pivot;
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            for c in col + 1..n {
                let delta = factor * a[(col, c)];
                a[(r, c)] = a[(r, c)] - delta;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use crate::signal::{add_noise, first_order_modes, gen_mode_sum, gen_y5, NoiseSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sig(values: Vec<f64>) -> Signal<f64> {
        Signal::new(values, 1.0, "test").unwrap()
    }

    fn geometric(ratios: &[f64], count: usize) -> Signal<f64> {
        sig((0..count)
            .map(|n| ratios.iter().map(|r| r.powi(n as i32)).sum())
            .collect())
    }

    #[test]
    fn first_order_sweep_is_flat() {
        let y1 = gen_mode_sum(&first_order_modes(1.0, 0.5).unwrap(), 19, 1.0).unwrap();
        let (estimate, sweep) = hokalman_order(&y1, 10, RankPolicy::default()).unwrap();
        assert_eq!(estimate.order, Order::Conclusive(1));
        assert_eq!(sweep.ranks(), vec![1; 9]);
        assert_eq!(estimate.method, Method::HokalmanRank);
    }

    #[test]
    fn y5_order_in_double_double() {
        let y5 = gen_y5::<DoubleDouble>(15).unwrap();
        let (estimate, sweep) = hokalman_order(&y5, 8, RankPolicy::default()).unwrap();
        assert_eq!(estimate.order, Order::Conclusive(5));
        assert_eq!(sweep.plateau_onset(3), Some(5));
    }

    #[test]
    fn constant_signal_is_order_one() {
        let (estimate, _) = hokalman_order(&sig(vec![2.5; 9]), 5, RankPolicy::default()).unwrap();
        assert_eq!(estimate.order, Order::Conclusive(1));
    }

    #[test]
    fn sweep_preconditions() {
        let short = sig(vec![1.0; 5]);
        assert_eq!(
            hokalman_order(&short, 4, RankPolicy::default()).unwrap_err(),
            Error::InsufficientSamples {
                required: 7,
                available: 5
            }
        );
        assert!(hokalman_order(&short, 1, RankPolicy::default()).is_err());
    }

    #[test]
    fn rising_sweep_is_inconclusive() {
        // three distinct modes, but the sweep stops at n = 3
        let s = geometric(&[0.9, 0.5, 0.2], 5);
        let (estimate, sweep) = hokalman_order(&s, 3, RankPolicy::default()).unwrap();
        assert_eq!(sweep.ranks(), vec![2, 3]);
        assert_eq!(estimate.order, Order::Inconclusive);
        assert_eq!(sweep.plateau_onset(3), None);
    }

    #[test]
    fn sweep_validation_and_csv() {
        let point = |n, rank| SweepPoint {
            n,
            rank,
            decision_gap: 1.0,
            condition: 2.0,
        };
        assert!(RankSweep::new(vec![point(3, 1), point(2, 1)]).is_err());
        assert!(RankSweep::new(vec![point(2, 3)]).is_err());
        let sweep =
            RankSweep::new(vec![point(2, 1), point(3, 2), point(4, 2), point(5, 2)]).unwrap();
        assert_eq!(sweep.plateau_onset(3), Some(3));
        assert_eq!(sweep.plateau_onset(4), None);
        let mut out = Vec::new();
        sweep.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text
            .starts_with("n,rank,gap,condition\n2,1,1.0000000000000000e0,2.0000000000000000e0\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn ar_fit_first_order() {
        let fit = ar_fit(&geometric(&[0.5], 20), 1).unwrap();
        assert_relative_eq!(fit.coefficients[0], 0.5, max_relative = 1e-14);
        assert!(fit.rss <= 1e-20);
        assert!(!fit.rank_deficient);
    }

    #[test]
    fn ar_fit_two_modes() {
        // (z − 1/2)(z − 1/3) = z² − (5/6)z + 1/6
        let fit = ar_fit(&geometric(&[0.5, 1.0 / 3.0], 20), 2).unwrap();
        assert_relative_eq!(fit.coefficients[0], 5.0 / 6.0, max_relative = 1e-10);
        assert_relative_eq!(fit.coefficients[1], -1.0 / 6.0, max_relative = 1e-10);
        assert!(fit.rss < 1e-25);
    }

    #[test]
    fn ar_fit_flags_rank_deficiency() {
        // a geometric sequence makes every lag column proportional
        let fit = ar_fit(&geometric(&[0.5], 20), 3).unwrap();
        assert!(fit.rank_deficient);
        assert!(fit.rss <= 1e-20);
        assert!(ar_fit(&geometric(&[0.5], 6), 3).is_err());
        assert!(ar_fit(&geometric(&[0.5], 6), 0).is_err());
    }

    #[test]
    fn ar_fit_rss_non_increasing_in_p() {
        let noisy = add_noise(
            &geometric(&[0.9, -0.4], 60),
            &NoiseSpec::new(0.05, 3).unwrap(),
        )
        .unwrap();
        let rss: Vec<f64> = (1..=6)
            .map(|p| ar_fit_from(&noisy, p, 6).unwrap().rss)
            .collect();
        for w in rss.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{rss:?}");
        }
    }

    #[test]
    fn aic_on_y5_is_conclusive() {
        let (estimate, report) = aic_order(&gen_y5::<f64>(60).unwrap(), 10).unwrap();
        assert!(matches!(estimate.order, Order::Conclusive(_)));
        assert_eq!(report.per_order.len(), 10);
        assert_eq!(Some(report.selected), estimate.order.value());
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 11);
    }

    #[test]
    fn aic_ties_go_to_smaller_order() {
        // exact AR(1): every p ≥ 1 reaches the rss floor
        let s = sig((0..30).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect());
        let (estimate, report) = aic_order(&s, 4).unwrap();
        assert!(report.per_order.iter().all(|r| r.rss == 0.0));
        assert_eq!(estimate.order, Order::Conclusive(1));
    }

    #[test]
    fn aic_requires_samples() {
        assert_eq!(
            aic_order(&sig(vec![1.0; 20]), 10).unwrap_err(),
            Error::InsufficientSamples {
                required: 21,
                available: 20
            }
        );
    }

    #[test]
    fn covdet_first_order_is_singular() {
        // y[n−1] = 2·y[n]: the two lag streams are proportional, so C₁ is singular
        let report = covariance_determinants(&geometric(&[0.5], 30), 1..=1).unwrap();
        assert_eq!(report.per_order.len(), 1);
        assert!(report.per_order[0].1.abs() < 1e-20);
    }

    #[test]
    fn covdet_y5_collapse_pattern() {
        let report = covariance_determinants(&gen_y5::<DoubleDouble>(60).unwrap(), 2..=8).unwrap();
        let dets: Vec<f64> = report
            .per_order
            .iter()
            .map(|(_, d)| num_traits::Float::abs(*d).hi())
            .collect();
        assert_eq!(
            report.per_order.iter().map(|(m, _)| *m).collect::<Vec<_>>(),
            (2..=8).collect::<Vec<_>>()
        );
        assert!(dets[1] <= dets[0] * 1e-8, "{dets:?}");
        for w in dets[1..].windows(2) {
            assert!(w[1] <= w[0], "{dets:?}");
        }
        // steep collapse from the true order on
        for w in dets[3..].windows(2) {
            assert!(w[1] <= w[0] * 1e-6, "{dets:?}");
        }
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 8);
    }

    #[test]
    fn covdet_white_noise_is_regular() {
        let zeros = sig(vec![0.0; 200]);
        let positive = (0..100)
            .filter(|&seed| {
                let noise = add_noise(&zeros, &NoiseSpec::new(1.0, seed).unwrap()).unwrap();
                covariance_determinants(&noise, 2..=2).unwrap().per_order[0].1 > 1e-3
            })
            .count();
        assert!(positive >= 99, "{positive}");
    }

    #[test]
    fn collapse_order_rules() {
        let report = CovDetReport {
            per_order: vec![(2, 1.0), (3, 0.5), (4, 1e-9), (5, 1e-20), (6, 0.0)],
        };
        assert_eq!(report.collapse_order(1e-6).order, Order::Conclusive(4));
        let flat = CovDetReport {
            per_order: vec![(2, 1.0), (3, 0.9)],
        };
        assert_eq!(flat.collapse_order(1e-6).order, Order::Inconclusive);
    }

    #[test]
    fn determinant_matches_closed_form() {
        let m = Matrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        // cofactor expansion along row 0: 0 − 2·(1·1 − 0·3) + 1·(1·0 − 1·3) = −5
        assert_relative_eq!(determinant(&m), -5.0, max_relative = 1e-14);
        assert_eq!(determinant(&Matrix::<f64>::zeros(2, 2)), 0.0);
    }

    proptest! {
        #[test]
        fn aic_argmin_scale_invariant(seed in 0u64..1000, scale in 1e-3f64..1e3) {
            let base = add_noise(&geometric(&[0.8], 80), &NoiseSpec::new(0.05, seed).unwrap()).unwrap();
            let scaled = sig(base.samples().iter().map(|v| v * scale).collect());
            let (a, _) = aic_order(&base, 5).unwrap();
            let (b, _) = aic_order(&scaled, 5).unwrap();
            prop_assert_eq!(a.order, b.order);
        }

        #[test]
        fn sweep_rank_bounded_by_n(values in prop::collection::vec(-5f64..5.0, 11..20)) {
            let sweep = rank_sweep(&sig(values), 2..=5, RankPolicy::default()).unwrap();
            for p in sweep.points() {
                prop_assert!(p.rank <= p.n);
            }
        }
    }
}
