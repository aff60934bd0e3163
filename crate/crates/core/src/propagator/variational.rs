use nalgebra::DMatrix;

use super::{check_grid, constant_identity, solve_normalized, unit_vector, CoefficientTrajectory};
use crate::ode::{integrate, OdeSolverConfig};
use crate::spectral::{gram_tensor, pseudo_inverse};
use crate::{HermitianOperator, Method, MomentTable, PropagatorMatrix, Result, C64};

/// Solves the coefficient equations of the polynomial ansatz,
///
/// `Σ_k [ i ċ_k h[k+l] − c_k h[k+l+1] ] = 0`,  `l = 0..=n_star`,
///
/// i.e. `G ċ = −i A c` with the Gram tensor `G[l][k] = h[l+k]` and
/// `A[l][k] = h[l+k+1]`, from `c(0) = (1, 0, …, 0)`.
///
/// `G` is singular exactly when the spectrum has at most `n_star` distinct
/// eigenvalues; the right-hand side always lies in its range, so the
/// minimum-norm solution `ċ = −i G⁺ A c` is exact there.
pub fn variational_coefficients(
    m: &MomentTable,
    n_star: usize,
    t_grid: &[f64],
    cfg: &OdeSolverConfig,
) -> Result<CoefficientTrajectory> {
    m.require(2 * n_star + 1)?;
    check_grid(t_grid)?;
    cfg.validate()?;
    // Work at unit variance: moments of H/s on the time axis s·t.
    let var = m.get(2);
    if var == 0.0 {
        return Ok(constant_identity(n_star, t_grid, Method::Variational));
    }
    let s = var.sqrt();
    let scaled = m.rescaled(s);
    let tau: Vec<f64> = t_grid.iter().map(|t| t * s).collect();

    let g = gram_tensor(&scaled, n_star)?;
    let a = DMatrix::from_fn(n_star + 1, n_star + 1, |l, k| scaled.get(l + k + 1));
    let rate = pseudo_inverse(&g, cfg.pseudoinverse_cutoff)? * a;
    let n = n_star + 1;
    let rhs = |_: f64, c: &[C64], dc: &mut [C64]| {
        for l in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += c[k] * rate[(l, k)];
            }
            dc[l] = C64::new(acc.im, -acc.re);
        }
    };
    let coeffs = integrate(rhs, &unit_vector(n), &tau, cfg)?;
    let traj = CoefficientTrajectory { n_star, times: tau, coeffs, method: Method::Variational };
    Ok(traj.unscaled(s, t_grid))
}

/// `Σ_j c_j(t) Hʲ` with coefficients from [`variational_coefficients`].
pub fn variational_propagator(
    h: &HermitianOperator,
    t_grid: &[f64],
    n_star: usize,
    cfg: &OdeSolverConfig,
) -> Result<Vec<PropagatorMatrix>> {
    solve_normalized(h, t_grid, n_star, Method::Variational, |m, tau| {
        variational_coefficients(m, n_star, tau, cfg)
    })
}
