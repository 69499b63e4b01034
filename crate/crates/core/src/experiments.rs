//! Named experiments that regenerate each figure and table of the study as
//! a CSV artifact.
//!
//! Every artifact starts with a `#` header block echoing the experiment
//! name, artifact version, seed and every resolved parameter, followed by
//! one or more `# section: <name>` blocks of plain CSV. Nothing in the file
//! depends on the clock or the environment, so reruns are byte-identical.

use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::estimators::{
    aic_order, covariance_determinants, hokalman_order_with_plateau, rank_sweep, Order, RankSweep,
    DEFAULT_COLLAPSE_RATIO,
};
use crate::hankel::{build_augmented, build_hankel, row_echelon, AugmentationSide};
use crate::matrix::Matrix;
use crate::rank::{
    condition_number, exact_rank_rational, numerical_rank, singular_values, RankPolicy,
};
use crate::scalar::Real;
use crate::signal::{
    add_noise, add_offset, first_order_modes, gen_geometric_sum, gen_high_order, gen_mode_sum,
    gen_nonhomogeneous, gen_pole_proximity, gen_y5, uniform_amplitude_for_snr, BaseFunction,
    GeometricSum, HighOrderSpec, NoiseSpec, Signal,
};
use crate::Rational;

/// Written into every artifact header.
pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), "/", env!("CARGO_PKG_VERSION"));

/// Scalar an experiment computes in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    DoubleDouble,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "f64" => Ok(Precision::F64),
            "dd" => Ok(Precision::DoubleDouble),
            _ => Err(Error::invalid(
                "precision",
                format!("expected f64 or dd, got `{text}`"),
            )),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F64 => "f64",
            Precision::DoubleDouble => "dd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// What a run reports back besides its artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub headline: String,
    pub status: Status,
}

impl Summary {
    /// `name,headline_estimate,status`
    pub fn line(&self) -> String {
        format!("{},{},{}", self.name, self.headline, self.status)
    }
}

/// Which experiment to run, with parameter overrides and an optional seed
/// replacing the experiment's fixed default.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentSpec {
    pub name: String,
    pub overrides: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn with_override(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.overrides.push((key.into(), value.into()));
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Registry entry as listed to users.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub default_seed: u64,
    pub defaults: Vec<(&'static str, &'static str)>,
}

struct ParamDef {
    key: &'static str,
    default: &'static str,
}

const fn param(key: &'static str, default: &'static str) -> ParamDef {
    ParamDef { key, default }
}

struct Experiment {
    name: &'static str,
    description: &'static str,
    seed: u64,
    params: &'static [ParamDef],
    run: fn(&Params, u64) -> Result<Report>,
}

static REGISTRY: &[Experiment] = &[
    Experiment {
        name: "fig2_first_order",
        description: "Fig. 2: rank sweep of the first-order response B*exp(-Q*n), checked against the exact oracle on (1/2)^n",
        seed: 2,
        params: &[
            param("B", "1"),
            param("Q", "0.5"),
            param("n_max", "10"),
            param("plateau_len", "3"),
            param("policy", "default"),
            param("precision", "f64"),
        ],
        run: |p, seed| dispatch!(p, fig2_first_order, seed),
    },
    Experiment {
        name: "fig3_pole_proximity",
        description: "Fig. 3: rank over n x q for two poles 2^-q apart, noise-free and at two noise levels 10x apart",
        seed: 3,
        params: &[
            param("p", "10"),
            param("q_min", "1"),
            param("q_max", "16"),
            param("n_min", "2"),
            param("n_max", "8"),
            param("noise_low", "1e-6"),
            param("noise_high", "1e-5"),
            param("policy", "default"),
            param("noisy_policy", "gap:1e3"),
            param("precision", "f64"),
        ],
        run: |p, seed| dispatch!(p, fig3_pole_proximity, seed),
    },
    Experiment {
        name: "fig1_table1_y5",
        description: "Fig. 1 and Table I: Ho-Kalman sweep, AIC values and covariance determinants for the 5-mode benchmark y5",
        seed: 1,
        params: &[
            param("count", "60"),
            param("n_max", "8"),
            param("p_max", "10"),
            param("m_min", "2"),
            param("m_max", "8"),
            param("plateau_len", "3"),
            param("policy", "default"),
            param("precision", "dd"),
        ],
        run: |p, seed| dispatch!(p, fig1_table1_y5, seed),
    },
    Experiment {
        name: "fig4_high_order_sin",
        description: "Fig. 4: rank sweep of the high-order family with f0 = sin, N0 = 50",
        seed: 4,
        params: &[
            param("n0", "50"),
            param("m", "1"),
            param("n_max", "60"),
            param("plateau_len", "3"),
            param("policy", "default"),
            param("precision", "f64"),
        ],
        run: |p, seed| dispatch!(p, fig4_high_order_sin, seed),
    },
    Experiment {
        name: "fig5_high_order_exp",
        description: "Fig. 5: rank sweep and condition numbers of the high-order family with f0 = exp(-x), N0 = 50",
        seed: 5,
        params: &[
            param("n0", "50"),
            param("m", "1"),
            param("n_max", "60"),
            param("plateau_len", "3"),
            param("policy", "default"),
            param("precision", "dd"),
        ],
        run: |p, seed| dispatch!(p, fig5_high_order_exp, seed),
    },
    Experiment {
        name: "sec33_nonhomogeneous",
        description: "Sec. 3.3: rank of the 10x10 responses matrix of y' + 0.9y = exp(-t/8) and of both input-augmented matrices",
        seed: 33,
        params: &[
            param("n", "10"),
            param("count", "25"),
            param("T", "1"),
            param("policy", "default"),
            param("precision", "f64"),
        ],
        run: |p, seed| dispatch!(p, sec33_nonhomogeneous, seed),
    },
    Experiment {
        name: "offset_effect",
        description: "Sec. 3.1: plateau onset of noisy first-order sweeps with and without a unit offset",
        seed: 31,
        params: &[
            param("B", "1"),
            param("Q", "0.5"),
            param("n_max", "15"),
            param("snr_db", "40"),
            param("offset", "1"),
            param("trials", "50"),
            param("tol", "auto"),
            param("plateau_len", "3"),
            param("precision", "f64"),
        ],
        run: |p, seed| dispatch!(p, offset_effect, seed),
    },
    Experiment {
        name: "echelon_effect",
        description: "Sec. 3.1: noisy first-order sweep, SVD-threshold rank vs row-echelon pivot count",
        seed: 32,
        params: &[
            param("B", "1"),
            param("Q", "0.5"),
            param("n_max", "12"),
            param("snr_db", "40"),
            param("tol", "auto"),
            param("plateau_len", "3"),
            param("precision", "f64"),
        ],
        run: |p, seed| dispatch!(p, echelon_effect, seed),
    },
];

/// Runs the generic experiment body in the precision the parameters select.
macro_rules! dispatch {
    ($params:expr, $body:ident, $seed:expr) => {
        match $params.precision()? {
            Precision::F64 => $body::<f64>($params, $seed),
            Precision::DoubleDouble => $body::<DoubleDouble>($params, $seed),
        }
    };
}
use dispatch;

/// Registered experiments in a stable order.
pub fn list_experiments() -> Vec<ExperimentInfo> {
    REGISTRY
        .iter()
        .map(|e| ExperimentInfo {
            name: e.name,
            description: e.description,
            default_seed: e.seed,
            defaults: e.params.iter().map(|p| (p.key, p.default)).collect(),
        })
        .collect()
}

fn lookup(name: &str) -> Result<&'static Experiment> {
    REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment {
            name: name.to_owned(),
            available: REGISTRY
                .iter()
                .map(|e| e.name)
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Runs the experiment and returns the artifact text.
pub fn render_experiment(spec: &ExperimentSpec) -> Result<(String, Summary)> {
    let experiment = lookup(&spec.name)?;
    let params = Params::resolve(experiment, &spec.overrides)?;
    let seed = spec.seed.unwrap_or(experiment.seed);
    let report = (experiment.run)(&params, seed)?;
    let summary = Summary {
        name: experiment.name.to_owned(),
        headline: report.headline.clone(),
        status: report.status,
    };
    let mut text = String::new();
    text.push_str(&format!("# experiment: {}\n", experiment.name));
    text.push_str(&format!("# description: {}\n", experiment.description));
    text.push_str(&format!("# artifact_version: {ARTIFACT_VERSION}\n"));
    text.push_str(&format!("# seed: {seed}\n"));
    for (key, value) in &params.values {
        text.push_str(&format!("# param: {key}={value}\n"));
    }
    for note in &report.notes {
        text.push_str(&format!("# {note}\n"));
    }
    text.push_str(&format!("# headline: {}\n", summary.headline));
    text.push_str(&format!("# status: {}\n", summary.status));
    for (title, body) in &report.sections {
        text.push_str(&format!("# section: {title}\n"));
        text.push_str(body);
    }
    Ok((text, summary))
}

/// Runs the experiment and writes its artifact to `output_path`.
pub fn run_experiment(spec: &ExperimentSpec, output_path: &Path) -> Result<Summary> {
    let (text, summary) = render_experiment(spec)?;
    fs::write(output_path, text)
        .map_err(|e| Error::Io(format!("{}: {e}", output_path.display())))?;
    Ok(summary)
}

/// Resolved parameters in declaration order.
struct Params {
    values: Vec<(&'static str, String)>,
}

impl Params {
    fn resolve(experiment: &Experiment, overrides: &[(String, String)]) -> Result<Self> {
        let mut values: Vec<(&'static str, String)> = experiment
            .params
            .iter()
            .map(|p| (p.key, p.default.to_owned()))
            .collect();
        for (key, value) in overrides {
            let slot = values.iter_mut().find(|(k, _)| k == key).ok_or_else(|| {
                Error::UnknownOverride {
                    experiment: experiment.name.to_owned(),
                    key: key.clone(),
                }
            })?;
            slot.1 = value.trim().to_owned();
        }
        Ok(Params { values })
    }

    fn entry(&self, key: &str) -> (&'static str, &str) {
        let (k, v) = self
            .values
            .iter()
            .find(|(k, _)| *k == key)
            .unwrap_or_else(|| panic!("parameter `{key}` is not declared"));
        (k, v.as_str())
    }

    fn parse<V: std::str::FromStr>(&self, key: &str, what: &str) -> Result<V> {
        let (name, text) = self.entry(key);
        text.parse()
            .map_err(|_| Error::invalid(name, format!("expected {what}, got `{text}`")))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let value: f64 = self.parse(key, "a number")?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::invalid(self.entry(key).0, "must be finite"))
        }
    }

    fn real<T: Real>(&self, key: &str) -> Result<T> {
        let (name, text) = self.entry(key);
        T::parse_decimal(text)
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid(name, format!("expected a number, got `{text}`")))
    }

    fn usize(&self, key: &str) -> Result<usize> {
        self.parse(key, "a non-negative integer")
    }

    fn i32(&self, key: &str) -> Result<i32> {
        self.parse(key, "an integer")
    }

    fn policy(&self, key: &str) -> Result<RankPolicy> {
        self.entry(key).1.parse()
    }

    fn precision(&self) -> Result<Precision> {
        self.entry("precision").1.parse()
    }

    /// `tol=auto` resolves to the noise-to-signal amplitude ratio
    /// `10^(−snr/20)` implied by the SNR.
    fn noise_tolerance(&self) -> Result<f64> {
        let (name, text) = self.entry("tol");
        let tol = if text == "auto" {
            10f64.powf(-self.f64("snr_db")? / 20.0)
        } else {
            self.f64("tol")?
        };
        if tol > 0.0 && tol < 1.0 {
            Ok(tol)
        } else {
            Err(Error::invalid(
                name,
                format!("must lie in (0, 1), got {tol}"),
            ))
        }
    }

    fn positive(&self, key: &str, min: usize) -> Result<usize> {
        let value = self.usize(key)?;
        if value < min {
            return Err(Error::invalid(
                self.entry(key).0,
                format!("must be at least {min}, got {value}"),
            ));
        }
        Ok(value)
    }
}

struct Report {
    notes: Vec<String>,
    sections: Vec<(String, String)>,
    headline: String,
    status: Status,
}

fn to_text(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<String> {
    let mut out = Vec::new();
    write(&mut out)?;
    Ok(String::from_utf8(out).expect("CSV writers emit UTF-8"))
}

fn sweep_text<T: Real>(sweep: &RankSweep<T>) -> Result<String> {
    to_text(|out| sweep.write_csv(out))
}

fn order_status(order: Order) -> Status {
    match order {
        Order::Conclusive(_) => Status::Ok,
        Order::Inconclusive => Status::Inconclusive,
    }
}

fn onset_text(onset: Option<usize>) -> String {
    onset.map_or_else(|| "none".to_owned(), |n| n.to_string())
}

fn first_order_signal<T: Real>(p: &Params, count: usize) -> Result<Signal<T>> {
    gen_mode_sum(
        &first_order_modes(p.real("B")?, p.real("Q")?)?,
        count,
        T::one(),
    )
}

fn fig2_first_order<T: Real>(p: &Params, _seed: u64) -> Result<Report> {
    let n_max = p.positive("n_max", 2)?;
    let policy = p.policy("policy")?;
    let y1: Signal<T> = first_order_signal(p, 2 * n_max - 1)?;
    let (estimate, sweep) =
        hokalman_order_with_plateau(&y1, n_max, policy, p.positive("plateau_len", 1)?)?;

    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    let dyadic = gen_geometric_sum(
        &GeometricSum::new([(Rational::from_integer(1.into()), half)])?,
        2 * n_max - 1,
    )?;
    let mut oracle = String::from("n,exact_rank\n");
    for n in 2..=n_max {
        oracle.push_str(&format!(
            "{n},{}\n",
            exact_rank_rational(build_hankel(&dyadic, n)?.entries())
        ));
    }
    Ok(Report {
        notes: vec![
            format!("policy: {policy}"),
            "oracle_signal: (1/2)^n exact rational".into(),
        ],
        sections: vec![
            ("hokalman_sweep".into(), sweep_text(&sweep)?),
            ("exact_oracle".into(), oracle),
        ],
        headline: estimate.order.to_string(),
        status: order_status(estimate.order),
    })
}

/// For ranks indexed by ascending `q`: the first `q` where the rank is not
/// 2, and the first `q` from which it stays at 1.
fn pole_boundaries(ranks: &[(i32, usize)]) -> (Option<i32>, Option<i32>) {
    let q0 = ranks.iter().find(|(_, r)| *r != 2).map(|(q, _)| *q);
    let tail = ranks.iter().rev().take_while(|(_, r)| *r == 1).count();
    let q1 = (tail > 0).then(|| ranks[ranks.len() - tail].0);
    (q0, q1)
}

fn fig3_pole_proximity<T: Real>(p: &Params, seed: u64) -> Result<Report> {
    let pole: T = p.real("p")?;
    let (q_min, q_max) = (p.i32("q_min")?, p.i32("q_max")?);
    let (n_min, n_max) = (p.positive("n_min", 1)?, p.positive("n_max", 1)?);
    if q_min > q_max || n_min > n_max {
        return Err(Error::invalid("q_min", "ranges must be non-empty"));
    }
    let policy = p.policy("policy")?;
    let noisy_policy = p.policy("noisy_policy")?;
    let levels = [
        (0.0, policy),
        (p.f64("noise_low")?, noisy_policy),
        (p.f64("noise_high")?, noisy_policy),
    ];
    let count = 2 * n_max - 1;
    let mut grid = String::from("noise,q,n,rank,gap,condition\n");
    let mut boundaries = String::from("noise,n,q0,q1\n");
    let mut headline = None;
    for (level, level_policy) in levels {
        let mut at_n_max = Vec::new();
        for q in q_min..=q_max {
            let clean = gen_pole_proximity(pole, q, count)?;
            // one noise realization per seed, scaled per level
            let signal = if level > 0.0 {
                let amplitude = T::of(level) * clean.peak();
                add_noise(&clean, &NoiseSpec::new(amplitude, seed)?)?
            } else {
                clean
            };
            let sweep = rank_sweep(&signal, n_min..=n_max, level_policy)?;
            for point in sweep.points() {
                grid.push_str(&format!(
                    "{level:e},{q},{},{},{},{}\n",
                    point.n,
                    point.rank,
                    point.decision_gap.to_decimal(),
                    point.condition.to_decimal()
                ));
            }
            at_n_max.push((q, sweep.points().last().map_or(0, |pt| pt.rank)));
        }
        let (q0, q1) = pole_boundaries(&at_n_max);
        let show = |q: Option<i32>| q.map_or_else(|| "none".to_owned(), |v| v.to_string());
        boundaries.push_str(&format!("{level:e},{n_max},{},{}\n", show(q0), show(q1)));
        if level == 0.0 {
            headline = Some(q0);
        }
    }
    let q0 = headline.flatten();
    Ok(Report {
        notes: vec![
            format!("policy: {policy}"),
            format!("noisy_policy: {noisy_policy}"),
            "noise: uniform, amplitude = level * peak, one realization per seed".into(),
        ],
        sections: vec![("grid".into(), grid), ("boundaries".into(), boundaries)],
        headline: format!(
            "q0={}",
            q0.map_or_else(|| "none".to_owned(), |v| v.to_string())
        ),
        status: if q0.is_some() {
            Status::Ok
        } else {
            Status::Inconclusive
        },
    })
}

fn fig1_table1_y5<T: Real>(p: &Params, _seed: u64) -> Result<Report> {
    let count = p.usize("count")?;
    let n_max = p.positive("n_max", 2)?;
    let p_max = p.positive("p_max", 1)?;
    let (m_min, m_max) = (p.usize("m_min")?, p.usize("m_max")?);
    let policy = p.policy("policy")?;
    let y5: Signal<T> = gen_y5(count)?;
    let (hokalman, sweep) =
        hokalman_order_with_plateau(&y5, n_max, policy, p.positive("plateau_len", 1)?)?;
    let (aic, aic_report) = aic_order(&y5, p_max)?;
    let covdet = covariance_determinants(&y5, m_min..=m_max)?;
    let collapse = covdet.collapse_order(DEFAULT_COLLAPSE_RATIO);
    let estimates = format!(
        "method,order\n{},{}\n{},{}\n{},{}\n",
        hokalman.method, hokalman.order, aic.method, aic.order, collapse.method, collapse.order
    );
    Ok(Report {
        notes: vec![
            format!("policy: {policy}"),
            format!("covdet_collapse_ratio: {DEFAULT_COLLAPSE_RATIO:e}"),
        ],
        sections: vec![
            ("hokalman_sweep".into(), sweep_text(&sweep)?),
            ("aic".into(), to_text(|out| aic_report.write_csv(out))?),
            ("covdet".into(), to_text(|out| covdet.write_csv(out))?),
            ("estimates".into(), estimates),
        ],
        headline: hokalman.order.to_string(),
        status: order_status(hokalman.order),
    })
}

fn high_order<T: Real>(p: &Params, base: BaseFunction) -> Result<Report> {
    let n_max = p.positive("n_max", 2)?;
    let spec =
        HighOrderSpec::<T>::with_linear_schedule(base, p.positive("n0", 1)?, p.positive("m", 1)?);
    let signal = gen_high_order(&spec, 2 * n_max - 1)?;
    let policy = p.policy("policy")?;
    let (estimate, sweep) =
        hokalman_order_with_plateau(&signal, n_max, policy, p.positive("plateau_len", 1)?)?;
    let true_order = signal
        .true_order()
        .map_or_else(|| "unknown".to_owned(), |k| k.to_string());
    Ok(Report {
        notes: vec![
            format!("policy: {policy}"),
            format!("true_order: {true_order}"),
            "schedule: s_k = k".into(),
        ],
        sections: vec![("hokalman_sweep".into(), sweep_text(&sweep)?)],
        headline: estimate.order.to_string(),
        status: order_status(estimate.order),
    })
}

fn fig4_high_order_sin<T: Real>(p: &Params, _seed: u64) -> Result<Report> {
    high_order::<T>(p, BaseFunction::Sinusoid)
}

fn fig5_high_order_exp<T: Real>(p: &Params, _seed: u64) -> Result<Report> {
    high_order::<T>(p, BaseFunction::Exponential)
}

fn sec33_nonhomogeneous<T: Real>(p: &Params, _seed: u64) -> Result<Report> {
    let n = p.positive("n", 1)?;
    let (y, u) = gen_nonhomogeneous::<T>(p.usize("count")?, p.real("T")?)?;
    let policy = p.policy("policy")?;
    let hankel = build_hankel(&y, n)?.into_entries();
    let bottom = build_augmented(&y, &u, n, AugmentationSide::BottomRowOfInputs)?;
    let right = build_augmented(&y, &u, n, AugmentationSide::RightColumnOfInputs)?;
    let mut table = String::from("matrix,rows,cols,rank,gap,condition\n");
    let mut ranks = Vec::new();
    for (name, matrix) in [
        ("hankel", &hankel),
        ("augmented_bottom", bottom.entries()),
        ("augmented_right", right.entries()),
    ] {
        let spectrum = singular_values::<T>(matrix)?;
        let result = numerical_rank(&spectrum, policy);
        let (rows, cols) = matrix.shape();
        table.push_str(&format!(
            "{name},{rows},{cols},{},{},{}\n",
            result.rank,
            result.decision_gap.to_decimal(),
            condition_number(&spectrum).to_decimal()
        ));
        ranks.push(result.rank);
    }
    let agree = ranks.iter().all(|&r| r == ranks[0]);
    Ok(Report {
        notes: vec![
            format!("policy: {policy}"),
            "system: y' + 0.9y = exp(-t/8), y(0) = 0, u = exp(-t/8)".into(),
        ],
        sections: vec![("ranks".into(), table)],
        headline: if agree {
            ranks[0].to_string()
        } else {
            format!("hankel={};bottom={};right={}", ranks[0], ranks[1], ranks[2])
        },
        status: if agree {
            Status::Ok
        } else {
            Status::Inconclusive
        },
    })
}

fn offset_effect<T: Real>(p: &Params, seed: u64) -> Result<Report> {
    let n_max = p.positive("n_max", 2)?;
    let plateau_len = p.positive("plateau_len", 1)?;
    let trials = p.positive("trials", 1)?;
    let offset: T = p.real("offset")?;
    let tol = p.noise_tolerance()?;
    let noisy_policy = RankPolicy::relative(tol)?;
    let clean: Signal<T> = first_order_signal(p, 2 * n_max - 1)?;

    let default_policy = RankPolicy::default();
    let plain_order = hokalman_order_with_plateau(&clean, n_max, default_policy, plateau_len)?
        .0
        .order;
    let shifted_order = hokalman_order_with_plateau(
        &add_offset(&clean, offset),
        n_max,
        default_policy,
        plateau_len,
    )?
    .0
    .order;
    let noise_free = format!("signal,order\nplain,{plain_order}\noffset,{shifted_order}\n");

    let amplitude = uniform_amplitude_for_snr(&clean, p.real("snr_db")?);
    let mut rows = String::from("seed,onset_plain,onset_offset\n");
    let (mut earlier, mut tie, mut later) = (0, 0, 0);
    for trial in 0..trials as u64 {
        let trial_seed = seed.wrapping_add(trial);
        let noisy = add_noise(&clean, &NoiseSpec::new(amplitude, trial_seed)?)?;
        let shifted = add_offset(&noisy, offset);
        let onset = |s: &Signal<T>| -> Result<Option<usize>> {
            Ok(rank_sweep(s, 2..=n_max, noisy_policy)?.plateau_onset(plateau_len))
        };
        let (a, b) = (onset(&noisy)?, onset(&shifted)?);
        // no plateau counts as never converging
        let key = |o: Option<usize>| o.unwrap_or(usize::MAX);
        match key(b).cmp(&key(a)) {
            std::cmp::Ordering::Less => earlier += 1,
            std::cmp::Ordering::Equal => tie += 1,
            std::cmp::Ordering::Greater => later += 1,
        }
        rows.push_str(&format!(
            "{trial_seed},{},{}\n",
            onset_text(a),
            onset_text(b)
        ));
    }
    let tally = format!("offset_earlier,tie,offset_later\n{earlier},{tie},{later}\n");
    let no_later = earlier + tie;
    Ok(Report {
        notes: vec![
            format!("noise_free_policy: {default_policy}"),
            format!("noisy_policy: {noisy_policy}"),
            "noise: uniform at snr_db relative to the plain signal; the offset is added after the noise".into(),
        ],
        sections: vec![
            ("noise_free".into(), noise_free),
            ("trials".into(), rows),
            ("tally".into(), tally),
        ],
        headline: format!("offset_no_later={no_later}/{trials}"),
        status: if 2 * no_later > trials { Status::Ok } else { Status::Inconclusive },
    })
}

fn echelon_effect<T: Real>(p: &Params, seed: u64) -> Result<Report> {
    let n_max = p.positive("n_max", 2)?;
    let plateau_len = p.positive("plateau_len", 1)?;
    let tol = p.noise_tolerance()?;
    let policy = RankPolicy::relative(tol)?;
    let clean: Signal<T> = first_order_signal(p, 2 * n_max - 1)?;
    let amplitude = uniform_amplitude_for_snr(&clean, p.real("snr_db")?);
    let noisy = add_noise(&clean, &NoiseSpec::new(amplitude, seed)?)?;
    let svd_sweep = rank_sweep(&noisy, 2..=n_max, policy)?;
    let mut table = String::from("n,svd_rank,echelon_rank\n");
    let mut echelon_points = Vec::new();
    for point in svd_sweep.points() {
        let h: Matrix<T> = build_hankel(&noisy, point.n)?.into_entries();
        let (_, pivots) = row_echelon(&h, T::of(tol));
        table.push_str(&format!("{},{},{pivots}\n", point.n, point.rank));
        echelon_points.push(crate::estimators::SweepPoint {
            n: point.n,
            rank: pivots,
            decision_gap: T::nan(),
            condition: T::nan(),
        });
    }
    let echelon_sweep = RankSweep::new(echelon_points)?;
    let svd_onset = svd_sweep.plateau_onset(plateau_len);
    let echelon_onset = echelon_sweep.plateau_onset(plateau_len);
    let onsets = format!(
        "method,onset,final_rank\nsvd,{},{}\nechelon,{},{}\n",
        onset_text(svd_onset),
        svd_sweep.points().last().map_or(0, |pt| pt.rank),
        onset_text(echelon_onset),
        echelon_sweep.points().last().map_or(0, |pt| pt.rank)
    );
    Ok(Report {
        notes: vec![
            format!("svd_policy: {policy}"),
            format!("echelon_pivot_tolerance: {tol:e} of the largest entry"),
        ],
        sections: vec![("sweep".into(), table), ("onsets".into(), onsets)],
        headline: format!(
            "svd_onset={};echelon_onset={}",
            onset_text(svd_onset),
            onset_text(echelon_onset)
        ),
        status: if svd_onset.is_some() && echelon_onset.is_some() {
            Status::Ok
        } else {
            Status::Inconclusive
        },
    })
}
