//! Validation errors, the two a-priori error bounds, and convergence-rate
//! experiments.

use crate::domain::{derive_seed, BoxDomain, Stream};
use crate::error::{Error, Result};
use crate::network::{build_network, BuildOptions, NetworkParams};
use crate::oracle::{estimate_cell_moment, estimate_max_diameter, McEstimate};
use crate::samples::SampleSet;
use crate::testfns::Target;

/// Pointwise errors of a network over `m` uniform validation points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub m: usize,
    /// `max |y - f|`.
    pub eps_inf: f64,
    /// `(Σ |y - f|²)^½`, the raw vector norm; grows like `√m`.
    pub eps_2: f64,
    /// `eps_2 / √m`, the Monte-Carlo estimate of the L² error.
    pub rms: f64,
    /// Delta-method standard error of `rms`.
    pub rms_std_error: f64,
    pub seed: u64,
}

pub fn validate<F>(
    params: &NetworkParams,
    target: F,
    domain: &BoxDomain,
    m: usize,
    seed: u64,
) -> Result<ValidationReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if m == 0 {
        return Err(Error::InvalidArgument(
            "validation set size must be at least 1".into(),
        ));
    }
    if domain.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: domain.dim(),
            index: None,
        });
    }
    let d = params.dim();
    let pts = domain.sample(m, seed, Stream::Validation, 0);
    let y = params.eval_flat(&pts)?;
    let err: Vec<f64> = pts
        .chunks_exact(d)
        .zip(&y)
        .map(|(x, &y)| (y - target(x)).abs())
        .collect();
    let eps_inf = err.iter().fold(0.0_f64, |a, &e| a.max(e));
    let err2: Vec<f64> = err.iter().map(|e| e * e).collect();
    let mse = McEstimate::from_samples(&err2);
    let eps_2 = err2.iter().sum::<f64>().sqrt();
    let rms = eps_2 / (m as f64).sqrt();
    Ok(ValidationReport {
        m,
        eps_inf,
        eps_2,
        rms,
        rms_std_error: if rms > 0.0 {
            mse.std_error / (2.0 * rms)
        } else {
            0.0
        },
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    pub value: f64,
    pub std_error: f64,
}

fn check_grad_sup(grad_sup: f64) -> Result<()> {
    if grad_sup.is_finite() && grad_sup >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "gradient bound must be finite and nonnegative, got {grad_sup}"
        )))
    }
}

/// `sup‖∇f‖ · (Σ_i ∫_{V_i} ‖x_i - x‖² dμ)^½` under uniform `μ` on the box.
pub fn theorem_bound(
    samples: &SampleSet,
    grad_sup: f64,
    domain: &BoxDomain,
    mc_points: usize,
    seed: u64,
) -> Result<BoundEstimate> {
    check_grad_sup(grad_sup)?;
    let moment = estimate_cell_moment(samples, domain, mc_points, seed)?;
    let root = moment.value.sqrt();
    Ok(BoundEstimate {
        value: grad_sup * root,
        std_error: if root > 0.0 {
            grad_sup * moment.std_error / (2.0 * root)
        } else {
            0.0
        },
    })
}

/// `sup‖∇f‖ · δ` with `δ` the (Monte-Carlo lower-bound) largest cell diameter.
pub fn corollary_bound(
    samples: &SampleSet,
    grad_sup: f64,
    domain: &BoxDomain,
    mc_points: usize,
    seed: u64,
) -> Result<f64> {
    check_grad_sup(grad_sup)?;
    Ok(grad_sup * estimate_max_diameter(samples, domain, mc_points, seed)?)
}

/// Least-squares slope of `ln(error)` against `ln(n)`.
pub fn fit_rate(series: &[(usize, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::TooFewEntries(series.len()));
    }
    for (i, w) in series.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(Error::NotIncreasing { index: i + 1 });
        }
    }
    if let Some((index, &(n, error))) = series
        .iter()
        .enumerate()
        .find(|(_, (_, e))| !(*e > 0.0 && e.is_finite()))
    {
        return Err(Error::NonPositiveError { index, n, error });
    }
    let k = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = series.iter().map(|&(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// How training locations are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Cell midpoints `lo + (hi - lo)(i - ½)/n`; one-dimensional only.
    UniformGrid1D,
    /// Independent uniform points in the box.
    Random,
}

/// Training locations for one experiment cell, labelled by `target`.
pub fn training_samples<F>(
    target: F,
    domain: &BoxDomain,
    n: usize,
    sampling: Sampling,
    seed: u64,
) -> Result<SampleSet>
where
    F: Fn(&[f64]) -> f64,
{
    let d = domain.dim();
    let points = match sampling {
        Sampling::UniformGrid1D => {
            if d != 1 {
                return Err(Error::InvalidArgument(format!(
                    "uniform grid sampling is one-dimensional, domain has d = {d}"
                )));
            }
            let (lo, hi) = (domain.lo()[0], domain.hi()[0]);
            (1..=n)
                .map(|i| lo + (hi - lo) * (i as f64 - 0.5) / n as f64)
                .collect()
        }
        Sampling::Random => domain.sample(n, seed, Stream::Training, n as u64),
    };
    let values = points.chunks_exact(d).map(&target).collect();
    SampleSet::new(d, points, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub n_list: Vec<usize>,
    pub sampling: Sampling,
    /// Validation points per repetition.
    pub m: usize,
    pub seed: u64,
    /// Independent repetitions averaged per `n`.
    pub repetitions: usize,
    /// Monte-Carlo points for the bounds; 0 skips them.
    pub mc_points: usize,
    pub build: BuildOptions,
}

impl ConvergenceConfig {
    /// 200 validation points in one dimension, 10 000 otherwise.
    pub fn default_m(dim: usize) -> usize {
        if dim == 1 {
            200
        } else {
            10_000
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub reports: Vec<ValidationReport>,
    pub eps_inf: f64,
    pub eps_2: f64,
    pub rms: f64,
    pub theorem_bound: Option<BoundEstimate>,
    pub corollary_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSeries {
    pub entries: Vec<ConvergenceEntry>,
    pub fitted_slope: f64,
    /// `-1/d`.
    pub reference_slope: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    sum / count as f64
}

/// Runs the experiment for every `n` without fitting a rate.
///
/// Repetition `r` uses one validation set for the whole `n` ladder (keyed by
/// the repetition seed only), and training data keyed by `(r, n)`.
pub fn measure_convergence<F>(
    target: F,
    domain: &BoxDomain,
    grad_sup: Option<f64>,
    config: &ConvergenceConfig,
) -> Result<Vec<ConvergenceEntry>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if config.repetitions == 0 {
        return Err(Error::InvalidArgument(
            "need at least one repetition".into(),
        ));
    }
    for (i, &n) in config.n_list.iter().enumerate() {
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        if i > 0 && n <= config.n_list[i - 1] {
            return Err(Error::NotIncreasing { index: i });
        }
    }
    let rep_seeds: Vec<u64> = (0..config.repetitions as u64)
        .map(|r| derive_seed(config.seed, Stream::Repetition, r))
        .collect();
    config
        .n_list
        .iter()
        .map(|&n| {
            let mut reports = Vec::with_capacity(rep_seeds.len());
            let mut bounds = Vec::new();
            for &rep in &rep_seeds {
                let train_seed = derive_seed(rep, Stream::Training, n as u64);
                let samples = training_samples(&target, domain, n, config.sampling, train_seed)?;
                let params = build_network(&samples, &config.build)?;
                reports.push(validate(&params, &target, domain, config.m, rep)?);
                if let (Some(g), true) = (grad_sup, config.mc_points > 0) {
                    let mc_seed = derive_seed(rep, Stream::CellMoment, n as u64);
                    let thm = theorem_bound(&samples, g, domain, config.mc_points, mc_seed)?;
                    let cor = corollary_bound(&samples, g, domain, config.mc_points, mc_seed)?;
                    bounds.push((thm, cor));
                }
            }
            let reps = reports.len() as f64;
            let theorem_bound = (!bounds.is_empty()).then(|| BoundEstimate {
                value: mean(bounds.iter().map(|b| b.0.value)),
                std_error: bounds
                    .iter()
                    .map(|b| b.0.std_error.powi(2))
                    .sum::<f64>()
                    .sqrt()
                    / reps,
            });
            Ok(ConvergenceEntry {
                n,
                eps_inf: mean(reports.iter().map(|r| r.eps_inf)),
                eps_2: mean(reports.iter().map(|r| r.eps_2)),
                rms: mean(reports.iter().map(|r| r.rms)),
                corollary_bound: (!bounds.is_empty()).then(|| mean(bounds.iter().map(|b| b.1))),
                theorem_bound,
                reports,
            })
        })
        .collect()
}

/// Measures every `n` and fits the log-log slope of the mean rms error.
pub fn run_convergence<F>(
    target: F,
    domain: &BoxDomain,
    grad_sup: Option<f64>,
    config: &ConvergenceConfig,
) -> Result<ConvergenceSeries>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let entries = measure_convergence(target, domain, grad_sup, config)?;
    let points: Vec<(usize, f64)> = entries.iter().map(|e| (e.n, e.rms)).collect();
    Ok(ConvergenceSeries {
        fitted_slope: fit_rate(&points)?,
        reference_slope: -1.0 / domain.dim() as f64,
        entries,
    })
}

/// [`run_convergence`] on a library target over its own domain.
pub fn run_target_convergence(
    target: &Target,
    config: &ConvergenceConfig,
) -> Result<ConvergenceSeries> {
    run_convergence(
        |x| target.eval(x),
        &target.domain(),
        target.grad_sup(),
        config,
    )
}
