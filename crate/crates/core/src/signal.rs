//! Response synthesis: mode sums and the benchmark families, uniform noise,
//! offsets and SNR.
//!
//! Every generator is a pure function of its arguments. Noise is drawn from a
//! ChaCha8 stream seeded from [`NoiseSpec::seed`], so identical inputs give
//! bit-identical outputs on every platform.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Known dynamic structure of a noise-free signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeStructure<T> {
    /// Number of independent modes (a damped oscillation counts as 2).
    pub order: usize,
    /// Coefficient of the constant (`e^0`) mode, zero when absent.
    pub constant: T,
}

/// A finite sampled response.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    samples: Vec<T>,
    sample_period: T,
    provenance: String,
    structure: Option<ModeStructure<T>>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(samples: Vec<T>, sample_period: T, provenance: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid(
                "samples",
                "signal must contain at least one sample",
            ));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite { index });
        }
        if !(sample_period.is_finite_value() && sample_period > T::zero()) {
            return Err(Error::invalid(
                "sample_period",
                "must be positive and finite",
            ));
        }
        Ok(Signal {
            samples,
            sample_period,
            provenance: provenance.into(),
            structure: None,
        })
    }

    pub(crate) fn with_structure(mut self, structure: ModeStructure<T>) -> Self {
        self.structure = Some(structure);
        self
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> &T {
        &self.sample_period
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Model order of the generating mode sum, when the signal is noise-free
    /// and came from a generator.
    pub fn true_order(&self) -> Option<usize> {
        self.structure.as_ref().map(|s| s.order)
    }

    pub fn structure(&self) -> Option<&ModeStructure<T>> {
        self.structure.as_ref()
    }

    /// The first `count` samples.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::InsufficientSamples {
                required: count.max(1),
                available: self.len(),
            });
        }
        Ok(Signal {
            samples: self.samples[..count].to_vec(),
            ..self.clone()
        })
    }
}

impl<T: Real> Signal<T> {
    pub fn peak(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn rms(&self) -> T {
        rms(&self.samples)
    }
}

fn rms<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let sum = values.iter().fold(T::zero(), |acc, v| acc + *v * *v);
    (sum / T::of(values.len() as f64)).sqrt()
}

/// One damped mode `e^(−d·t)·(a·cos(ω·t) + b·sin(ω·t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub decay_rate: T,
    pub angular_frequency: T,
    pub cos_coefficient: T,
    pub sin_coefficient: T,
}

impl<T: Real> Mode<T> {
    /// `c·e^(−d·t)`.
    pub fn exponential(coefficient: T, decay_rate: T) -> Self {
        Mode {
            decay_rate,
            angular_frequency: T::zero(),
            cos_coefficient: coefficient,
            sin_coefficient: T::zero(),
        }
    }

    pub fn damped_cos(coefficient: T, decay_rate: T, angular_frequency: T) -> Self {
        Mode {
            decay_rate,
            angular_frequency,
            cos_coefficient: coefficient,
            sin_coefficient: T::zero(),
        }
    }

    pub fn damped_sin(coefficient: T, decay_rate: T, angular_frequency: T) -> Self {
        Mode {
            decay_rate,
            angular_frequency,
            cos_coefficient: T::zero(),
            sin_coefficient: coefficient,
        }
    }

    fn eval(&self, t: T) -> T {
        let envelope = (-self.decay_rate * t).exp();
        if self.angular_frequency == T::zero() {
            return self.cos_coefficient * envelope;
        }
        let phase = self.angular_frequency * t;
        envelope * (self.cos_coefficient * phase.cos() + self.sin_coefficient * phase.sin())
    }

    fn is_zero(&self) -> bool {
        self.cos_coefficient == T::zero() && self.sin_coefficient == T::zero()
    }

    fn order(&self) -> usize {
        if self.angular_frequency == T::zero() {
            1
        } else {
            2
        }
    }
}

/// A normalized list of modes: zero terms dropped, duplicates merged,
/// negative frequencies folded onto positive ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSum<T> {
    modes: Vec<Mode<T>>,
    description: String,
}

impl<T: Real> ModeSum<T> {
    pub fn new(modes: impl IntoIterator<Item = Mode<T>>) -> Result<Self> {
        let mut merged: Vec<Mode<T>> = Vec::new();
        for mode in modes {
            let finite = [
                mode.decay_rate,
                mode.angular_frequency,
                mode.cos_coefficient,
                mode.sin_coefficient,
            ]
            .iter()
            .all(|v| v.is_finite());
            if !finite {
                return Err(Error::invalid(
                    "modes",
                    "coefficients, decay rates and frequencies must be finite",
                ));
            }
            let mut mode = mode;
            if mode.angular_frequency < T::zero() {
                mode.angular_frequency = -mode.angular_frequency;
                mode.sin_coefficient = -mode.sin_coefficient;
            }
            if mode.angular_frequency == T::zero() {
                // sin(0) vanishes identically
                mode.sin_coefficient = T::zero();
            }
            match merged.iter_mut().find(|m| {
                m.decay_rate == mode.decay_rate && m.angular_frequency == mode.angular_frequency
            }) {
                Some(existing) => {
                    existing.cos_coefficient = existing.cos_coefficient + mode.cos_coefficient;
                    existing.sin_coefficient = existing.sin_coefficient + mode.sin_coefficient;
                }
                None => merged.push(mode),
            }
        }
        merged.retain(|m| !m.is_zero());
        // canonical order makes the sum independent of input permutation
        merged.sort_by(|a, b| {
            a.decay_rate.partial_cmp(&b.decay_rate).unwrap().then(
                a.angular_frequency
                    .partial_cmp(&b.angular_frequency)
                    .unwrap(),
            )
        });
        let description = merged
            .iter()
            .map(|m| {
                format!(
                    "{}|{}|{}|{}",
                    m.cos_coefficient, m.decay_rate, m.angular_frequency, m.sin_coefficient
                )
            })
            .collect::<Vec<_>>()
            .join(";");
        Ok(ModeSum {
            modes: merged,
            description,
        })
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn true_order(&self) -> usize {
        self.modes.iter().map(Mode::order).sum()
    }

    /// Coefficient of the constant mode (decay 0, frequency 0).
    pub fn constant(&self) -> T {
        self.modes
            .iter()
            .find(|m| m.decay_rate == T::zero() && m.angular_frequency == T::zero())
            .map_or(T::zero(), |m| m.cos_coefficient)
    }

    pub fn eval(&self, t: T) -> T {
        self.modes.iter().fold(T::zero(), |acc, m| acc + m.eval(t))
    }

    /// `coefficient|decay|frequency|sin_coefficient` per mode, `;`-separated.
    pub fn description(&self) -> &str {
        &self.description
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    Ok(())
}

fn check_period<T: Real>(sample_period: T) -> Result<()> {
    if !(sample_period.is_finite() && sample_period > T::zero()) {
        return Err(Error::invalid(
            "sample_period",
            "must be positive and finite",
        ));
    }
    Ok(())
}

/// Samples `spec` at `t = n·sample_period` for `n = 0..count`.
pub fn gen_mode_sum<T: Real>(
    spec: &ModeSum<T>,
    count: usize,
    sample_period: T,
) -> Result<Signal<T>> {
    check_count(count)?;
    check_period(sample_period)?;
    let samples = (0..count)
        .map(|n| spec.eval(T::of(n as f64) * sample_period))
        .collect();
    let signal = Signal::new(
        samples,
        sample_period,
        format!("mode_sum[{}]", spec.description()),
    )?;
    Ok(signal.with_structure(ModeStructure {
        order: spec.true_order(),
        constant: spec.constant(),
    }))
}

/// `c·r^n` terms, evaluated by exact repeated multiplication.
///
/// With a rational scalar every sample is exact, which is what the rank
/// oracle needs; with floats this is the dyadic-friendly generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSum<T> {
    terms: Vec<(T, T)>,
}

impl<T: Scalar> GeometricSum<T> {
    /// Terms are `(coefficient, ratio)`; equal ratios merge, zero
    /// coefficients drop.
    pub fn new(terms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let mut merged: Vec<(T, T)> = Vec::new();
        for (coefficient, ratio) in terms {
            if !(coefficient.is_finite_value() && ratio.is_finite_value()) {
                return Err(Error::invalid(
                    "terms",
                    "coefficients and ratios must be finite",
                ));
            }
            match merged.iter_mut().find(|(_, r)| *r == ratio) {
                Some((c, _)) => *c = c.clone() + coefficient,
                None => merged.push((coefficient, ratio)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        Ok(GeometricSum { terms: merged })
    }

    pub fn terms(&self) -> &[(T, T)] {
        &self.terms
    }

    pub fn true_order(&self) -> usize {
        self.terms.len()
    }

    fn constant(&self) -> T {
        self.terms
            .iter()
            .find(|(_, r)| r.is_one())
            .map_or(T::zero(), |(c, _)| c.clone())
    }
}

pub fn gen_geometric_sum<T: Scalar>(spec: &GeometricSum<T>, count: usize) -> Result<Signal<T>> {
    check_count(count)?;
    let mut powers: Vec<T> = spec.terms.iter().map(|(c, _)| c.clone()).collect();
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        samples.push(powers.iter().fold(T::zero(), |acc, p| acc + p.clone()));
        for (p, (_, r)) in powers.iter_mut().zip(&spec.terms) {
            *p = p.clone() * r.clone();
        }
    }
    let description = spec
        .terms
        .iter()
        .map(|(c, r)| format!("{c:?}*({r:?})^n"))
        .collect::<Vec<_>>()
        .join(" + ");
    let signal = Signal::new(samples, T::one(), format!("geometric[{description}]"))?;
    Ok(signal.with_structure(ModeStructure {
        order: spec.true_order(),
        constant: spec.constant(),
    }))
}

/// `y₁[n] = B·e^(−Q·n)`.
pub fn first_order_modes<T: Real>(gain: T, decay: T) -> Result<ModeSum<T>> {
    ModeSum::new([Mode::exponential(gain, decay)])
}

/// Modes of the pole-proximity response
/// `0.5·e^(−n/p) + (0.5 + δ)·e^(−n/(p + δ))` with `δ = 2^(−q)`.
///
/// For large `q` the two decay rates coincide in floating point and the
/// modes merge into one.
pub fn pole_proximity_modes<T: Real>(p: T, q: i32) -> Result<ModeSum<T>> {
    if !(p.is_finite() && p > T::zero()) {
        return Err(Error::invalid("p", "must be positive and finite"));
    }
    let delta = T::of(2.0).powi(-q);
    let half = T::of(0.5);
    ModeSum::new([
        Mode::exponential(half, p.recip()),
        Mode::exponential(half + delta, (p + delta).recip()),
    ])
}

pub fn gen_pole_proximity<T: Real>(p: T, q: i32, count: usize) -> Result<Signal<T>> {
    gen_mode_sum(&pole_proximity_modes(p, q)?, count, T::one())
}

/// The five non-vanishing modes of
/// `y₅[n] = (1/7)·Σ_{k=1..7} (−1)^(k+1)·sin(2πk/3)·e^(−n/(10k))`.
///
/// `sin(2πk/3)` is taken from `k mod 3` so the `k = 3, 6` terms are exactly
/// zero rather than round-off residue.
pub fn y5_modes<T: Real>() -> ModeSum<T> {
    let half_root3 = T::of(3.0).sqrt() / T::of(2.0);
    let terms = (1..=7).map(|k: i32| {
        let sine = match k % 3 {
            0 => T::zero(),
            1 => half_root3,
            _ => -half_root3,
        };
        let sign = if k % 2 == 1 { T::one() } else { -T::one() };
        Mode::exponential(sign * sine / T::of(7.0), T::of(10.0 * k as f64).recip())
    });
    ModeSum::new(terms).expect("y5 modes are finite")
}

pub fn gen_y5<T: Real>(count: usize) -> Result<Signal<T>> {
    let signal = gen_mode_sum(&y5_modes(), count, T::one())?;
    Ok(Signal {
        provenance: "y5".to_string(),
        ..signal
    })
}

/// Base function of the high-order family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseFunction {
    /// `sin(n/s_k)`
    Sinusoid,
    /// `e^(−n/s_k)`
    Exponential,
}

impl BaseFunction {
    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sinusoid => "sinusoid",
            BaseFunction::Exponential => "exponential",
        }
    }
}

/// Parameters of `y[n] = (1/N₀)·Σ_{k=1..M·N₀} f₀(n/s_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HighOrderSpec<T> {
    pub base: BaseFunction,
    pub n0: usize,
    pub m: usize,
    /// `s_1, s_2, …`; at least `m·n0` entries are used.
    pub schedule: Vec<T>,
}

impl<T: Real> HighOrderSpec<T> {
    /// Default schedule `s_k = k`.
    pub fn with_linear_schedule(base: BaseFunction, n0: usize, m: usize) -> Self {
        HighOrderSpec {
            base,
            n0,
            m,
            schedule: (1..=n0 * m).map(|k| T::of(k as f64)).collect(),
        }
    }

    pub fn modes(&self) -> Result<ModeSum<T>> {
        if self.n0 == 0 || self.m == 0 {
            return Err(Error::invalid("n0", "N0 and M must both be at least 1"));
        }
        let terms = self.n0 * self.m;
        if self.schedule.len() < terms {
            return Err(Error::InsufficientSamples {
                required: terms,
                available: self.schedule.len(),
            });
        }
        let weight = T::of(self.n0 as f64).recip();
        let mut modes = Vec::with_capacity(terms);
        for &s in &self.schedule[..terms] {
            if !(s.is_finite() && s > T::zero()) {
                return Err(Error::invalid(
                    "schedule",
                    "every s_k must be positive and finite",
                ));
            }
            modes.push(match self.base {
                BaseFunction::Exponential => Mode::exponential(weight, s.recip()),
                BaseFunction::Sinusoid => Mode::damped_sin(weight, T::zero(), s.recip()),
            });
        }
        ModeSum::new(modes)
    }
}

pub fn gen_high_order<T: Real>(spec: &HighOrderSpec<T>, count: usize) -> Result<Signal<T>> {
    let signal = gen_mode_sum(&spec.modes()?, count, T::one())?;
    let schedule: Vec<String> = spec.schedule[..spec.n0 * spec.m]
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok(Signal {
        provenance: format!(
            "high_order[f0={},N0={},M={},s={}]",
            spec.base.name(),
            spec.n0,
            spec.m,
            schedule.join(":")
        ),
        ..signal
    })
}

/// Particular-solution amplitude `1/(0.9 − 1/8)` of `y′ + 0.9·y = e^(−t/8)`.
pub fn nonhomogeneous_gain<T: Real>() -> T {
    (T::of(0.9) - T::of(0.125)).recip()
}

/// Exact sampled solution of `y′ + 0.9·y = e^(−t/8)`, `y(0) = 0`, together
/// with its input `u(t) = e^(−t/8)`.
pub fn gen_nonhomogeneous<T: Real>(
    count: usize,
    sample_period: T,
) -> Result<(Signal<T>, Signal<T>)> {
    check_count(count)?;
    check_period(sample_period)?;
    let gain = nonhomogeneous_gain::<T>();
    let input_decay = T::of(0.125);
    let output_decay = T::of(0.9);
    let response = ModeSum::new([
        Mode::exponential(gain, input_decay),
        Mode::exponential(-gain, output_decay),
    ])?;
    let input = ModeSum::new([Mode::exponential(T::one(), input_decay)])?;
    let y = gen_mode_sum(&response, count, sample_period)?;
    let u = gen_mode_sum(&input, count, sample_period)?;
    Ok((
        Signal {
            provenance: format!("nonhomogeneous_y[T={sample_period}]"),
            ..y
        },
        Signal {
            provenance: format!("nonhomogeneous_u[T={sample_period}]"),
            ..u
        },
    ))
}

/// Zero-mean uniform noise on `[−amplitude, amplitude]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    pub amplitude: T,
    pub seed: u64,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(amplitude: T, seed: u64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= T::zero()) {
            return Err(Error::invalid(
                "amplitude",
                "must be non-negative and finite",
            ));
        }
        Ok(NoiseSpec { amplitude, seed })
    }
}

pub fn add_noise<T: Real>(signal: &Signal<T>, noise: &NoiseSpec<T>) -> Result<Signal<T>> {
    if noise.amplitude == T::zero() {
        return Ok(signal.clone());
    }
    // draws are made in f64 so a seed gives the same noise for every scalar
    let amplitude = noise.amplitude.as_f64();
    let dist = Uniform::new_inclusive(-amplitude, amplitude)
        .map_err(|e| Error::invalid("amplitude", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let samples = signal
        .samples
        .iter()
        .map(|&v| v + T::of(dist.sample(&mut rng)))
        .collect();
    Ok(Signal {
        samples,
        sample_period: signal.sample_period,
        provenance: format!(
            "{} + uniform_noise[a={:e},seed={}]",
            signal.provenance, noise.amplitude, noise.seed
        ),
        structure: None,
    })
}

pub fn add_offset<T: Scalar + std::fmt::Display>(signal: &Signal<T>, offset: T) -> Signal<T> {
    if offset.is_zero() {
        return signal.clone();
    }
    let structure = signal.structure.as_ref().map(|s| {
        let constant = s.constant.clone() + offset.clone();
        let order = match (s.constant.is_zero(), constant.is_zero()) {
            (true, false) => s.order + 1,
            (false, true) => s.order - 1,
            _ => s.order,
        };
        ModeStructure { order, constant }
    });
    Signal {
        samples: signal
            .samples
            .iter()
            .map(|v| v.clone() + offset.clone())
            .collect(),
        sample_period: signal.sample_period.clone(),
        provenance: format!("{} + offset[{offset}]", signal.provenance),
        structure,
    }
}

/// `20·log10(rms(signal) / rms(noisy − signal))`, `+∞` for identical inputs.
pub fn snr_db<T: Real>(signal: &Signal<T>, noisy: &Signal<T>) -> Result<T> {
    if signal.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            left: signal.len(),
            right: noisy.len(),
        });
    }
    let diff: Vec<T> = noisy
        .samples
        .iter()
        .zip(&signal.samples)
        .map(|(&a, &b)| a - b)
        .collect();
    let noise = rms(&diff);
    if noise == T::zero() {
        return Ok(T::infinity());
    }
    Ok(T::of(20.0) * (signal.rms() / noise).log10())
}

/// Noise amplitude `a` such that Uniform(−a, a) noise on `signal` has
/// expected SNR `snr_db`.
pub fn uniform_amplitude_for_snr<T: Real>(signal: &Signal<T>, snr_db: T) -> T {
    let noise_rms = signal.rms() / T::of(10.0).powf(snr_db / T::of(20.0));
    noise_rms * T::of(3.0).sqrt()
}
