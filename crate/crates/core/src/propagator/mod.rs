//! Short-time approximants of `exp(-iHt)` that are polynomials in `H`.
//!
//! Every approximant here produces coefficients `c_j(t)` of the monomial
//! expansion `U ≈ Σ_j c_j(t) Hʲ`. Matrices are assembled only on request, so
//! ensemble benchmarks can evaluate distances on eigenvalues alone.

mod closed_form;
mod kpm;
mod residual;
mod taylor;
mod variational;

pub use crate::ode::OdeSolverConfig;
pub use closed_form::{closed_form_coefficients, closed_form_propagator, ClosedFormTerms};
pub use kpm::{kpm_coefficients, kpm_propagator, kpm_propagator_with, KpmConvention};
pub use residual::{
    residual_action_coefficients, residual_action_propagator, ResidualActionSolution,
    COLLOCATION_POINTS_PER_UNIT_TIME,
};
pub use taylor::{taylor_coefficients, taylor_propagator};
pub use variational::{variational_coefficients, variational_propagator};

use crate::spectral::{matrix_polynomial, operator_norm, scalar_polynomial};
use crate::{Error, HermitianOperator, Method, PropagatorMatrix, Result, C64};

/// Time-sampled coefficients of the polynomial ansatz `U = Σ_j c_j(t) Hʲ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTrajectory {
    pub n_star: usize,
    pub times: Vec<f64>,
    /// One row per time, `n_star + 1` entries each.
    pub coeffs: Vec<Vec<C64>>,
    pub method: Method,
}

impl CoefficientTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn at(&self, i: usize) -> &[C64] {
        &self.coeffs[i]
    }

    /// Endpoint coefficients.
    pub fn last(&self) -> Option<&[C64]> {
        self.coeffs.last().map(Vec::as_slice)
    }

    /// Coefficients for `H` when `self` was computed for `H / scale` on the
    /// time axis `t · scale`.
    pub(crate) fn unscaled(mut self, scale: f64, times: &[f64]) -> Self {
        for row in &mut self.coeffs {
            let mut f = 1.0;
            for c in row.iter_mut() {
                *c *= f;
                f /= scale;
            }
        }
        self.times = times.to_vec();
        self
    }

    /// Assembles `Σ_j c_j(t) Hʲ` at every sampled time.
    pub fn propagators(&self, h: &HermitianOperator) -> Vec<PropagatorMatrix> {
        self.times
            .iter()
            .zip(&self.coeffs)
            .map(|(&time, c)| PropagatorMatrix {
                entries: matrix_polynomial(h.matrix(), c),
                time,
                method: self.method,
            })
            .collect()
    }

    /// The scalar polynomial `Σ_j c_j(t) xʲ` at sample `i`.
    pub fn eval(&self, i: usize, x: f64) -> C64 {
        scalar_polynomial(x, &self.coeffs[i])
    }
}

/// Grid must start at 0 and increase strictly.
pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    let starts_at_zero = t_grid.first() == Some(&0.0);
    if !starts_at_zero || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidTimeGrid);
    }
    Ok(())
}

pub(crate) fn unit_vector(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[0] = C64::new(1.0, 0.0);
    v
}

/// Identity trajectory used when `‖H‖ = 0`.
pub(crate) fn constant_identity(n_star: usize, t_grid: &[f64], method: Method) -> CoefficientTrajectory {
    CoefficientTrajectory {
        n_star,
        times: t_grid.to_vec(),
        coeffs: vec![unit_vector(n_star + 1); t_grid.len()],
        method,
    }
}

/// Runs a moment-based solver on `H/‖H‖` (normalized time) and maps the
/// coefficients back to `H`.
pub(crate) fn solve_normalized<F>(
    h: &HermitianOperator,
    t_grid: &[f64],
    n_star: usize,
    method: Method,
    solve: F,
) -> Result<Vec<PropagatorMatrix>>
where
    F: FnOnce(&crate::MomentTable, &[f64]) -> Result<CoefficientTrajectory>,
{
    check_grid(t_grid)?;
    let norm = operator_norm(h);
    let traj = if norm == 0.0 {
        constant_identity(n_star, t_grid, method)
    } else {
        let m = crate::spectral::moments(&h.scaled(1.0 / norm), 2 * n_star + 2);
        let tau: Vec<f64> = t_grid.iter().map(|t| t * norm).collect();
        solve(&m, &tau)?.unscaled(norm, t_grid)
    };
    Ok(traj.propagators(h))
}
