//! Ensemble benchmarks of the propagator approximants.
//!
//! All approximants are polynomials in `H`, so the `l2` distance between any
//! two of them (or to the exact propagator) depends only on the eigenvalues.
//! Each sample is diagonalized once and everything else is scalar work.

use rayon::prelude::*;

use crate::ensemble::gue;
use crate::ode::OdeSolverConfig;
use crate::propagator::{
    closed_form_coefficients, kpm_coefficients, residual_action_coefficients, taylor_coefficients,
    variational_coefficients, KpmConvention,
};
use crate::spectral::{eigenvalues, l2_distance_spectral, scalar_polynomial, spectral_radius};
use crate::{Error, Method, MomentTable, Result, C64};

/// Polynomial order used by every benchmarked approximant.
pub const N_STAR: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// What distances are measured against; normally [`Method::Exact`].
    pub reference: Method,
    /// Normalized times `t‖H‖`.
    pub t_grid: Vec<f64>,
    pub ode: OdeSolverConfig,
    pub kpm: KpmConvention,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![5],
            samples: 100,
            seed: 42,
            methods: Method::APPROXIMANTS.to_vec(),
            reference: Method::Exact,
            t_grid: time_grid(2.0, 100),
            ode: OdeSolverConfig::default(),
            kpm: KpmConvention::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("at least one sample is required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods selected".into()));
        }
        if self.t_grid.is_empty()
            || self.t_grid.iter().any(|t| !t.is_finite() || *t < 0.0)
            || self.t_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidTimeGrid);
        }
        self.ode.validate()
    }
}

/// `n` evenly spaced points on `[0, t_max]`, both ends included.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Aggregated distance of one method at one normalized time.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub dim: usize,
    pub t_norm: f64,
    pub l2_mean: f64,
    /// Sample standard deviation (zero for a single sample).
    pub l2_std: f64,
    pub n: usize,
}

/// Either `exp(−iμτ)` or monomial coefficients for every grid time.
enum Evaluator {
    Exact,
    Polynomial(Vec<Vec<C64>>),
}

impl Evaluator {
    fn eval(&self, k: usize, tau: f64, mu: f64) -> C64 {
        match self {
            Evaluator::Exact => C64::new(0.0, -mu * tau).exp(),
            Evaluator::Polynomial(rows) => scalar_polynomial(mu, &rows[k]),
        }
    }
}

fn evaluator(method: Method, m: &MomentTable, cfg: &BenchConfig) -> Result<Evaluator> {
    let grid = &cfg.t_grid;
    let rows = match method {
        Method::Exact => return Ok(Evaluator::Exact),
        Method::Taylor => grid.iter().map(|&t| taylor_coefficients(t, N_STAR)).collect(),
        Method::Kpm => grid.iter().map(|&t| kpm_coefficients(1.0, t, cfg.kpm)).collect(),
        Method::Variational => variational_coefficients(m, N_STAR, grid, &cfg.ode)?.coeffs,
        Method::VariationalClosedForm => {
            grid.iter().map(|&t| closed_form_coefficients(m, t).map(Vec::from)).collect::<Result<_>>()?
        }
        Method::ResidualAction => residual_action_coefficients(m, N_STAR, grid, &cfg.ode)?.trajectory.coeffs,
    };
    Ok(Evaluator::Polynomial(rows))
}

/// Distances `[method][time]` for one matrix given by its eigenvalues.
/// The spectrum is rescaled to unit operator norm so that grid times are
/// normalized times.
pub fn spectrum_distances(eigs: &[f64], cfg: &BenchConfig) -> Result<Vec<Vec<f64>>> {
    let radius = spectral_radius(eigs);
    if radius == 0.0 {
        return Err(Error::DegenerateMoments(0.0));
    }
    let mu: Vec<f64> = eigs.iter().map(|l| l / radius).collect();
    let m = MomentTable::from_eigenvalues(&mu, 2 * N_STAR + 2);
    let reference = evaluator(cfg.reference, &m, cfg)?;
    cfg.methods
        .iter()
        .map(|&method| {
            let ev = evaluator(method, &m, cfg)?;
            Ok(cfg
                .t_grid
                .iter()
                .enumerate()
                .map(|(k, &tau)| l2_distance_spectral(&mu, |x| reference.eval(k, tau, x), |x| ev.eval(k, tau, x)))
                .collect())
        })
        .collect()
}

/// Runs every `(dim, sample)` pair and aggregates per `(dim, method, time)`.
/// Samples are drawn from independent streams of one seed, so results do not
/// depend on how rayon schedules them.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for &dim in &cfg.dims {
        let per_sample = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|s| spectrum_distances(&eigenvalues(&gue(dim, cfg.seed, s)), cfg))
            .collect::<Result<Vec<_>>>()?;
        let n = per_sample.len();
        for (mi, &method) in cfg.methods.iter().enumerate() {
            for (k, &t_norm) in cfg.t_grid.iter().enumerate() {
                let vals = per_sample.iter().map(|d| d[mi][k]);
                let mean = vals.clone().sum::<f64>() / n as f64;
                let var = if n > 1 { vals.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
                records.push(BenchRecord { method, dim, t_norm, l2_mean: mean, l2_std: var.sqrt(), n });
            }
        }
    }
    Ok(records)
}

/// Mean curve of one method at one dimension, in grid order.
pub fn mean_curve(records: &[BenchRecord], method: Method, dim: usize) -> Vec<(f64, f64)> {
    records.iter().filter(|r| r.method == method && r.dim == dim).map(|r| (r.t_norm, r.l2_mean)).collect()
}
