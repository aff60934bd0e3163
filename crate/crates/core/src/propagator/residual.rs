//! The residual action `∫ tr[(i∂ₜU − HU)(i∂ₜU − HU)†] dt`, minimized over the
//! polynomial ansatz by collocation least squares.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{check_grid, constant_identity, solve_normalized, CoefficientTrajectory};
use crate::ode::OdeSolverConfig;
use crate::{CMatrix, Error, HermitianOperator, Method, MomentTable, PropagatorMatrix, Result, C64};

/// Uniform collocation density on the horizon `[0, t_max]`.
pub const COLLOCATION_POINTS_PER_UNIT_TIME: f64 = 64.0;

#[derive(Clone, Debug)]
pub struct ResidualActionSolution {
    pub trajectory: CoefficientTrajectory,
    /// Trapezoid estimate of the minimized action, `∫ tr(RR†)/D dt`.
    pub residual: f64,
}

/// Minimizes the integrated squared Schrödinger residual on `[0, t_grid.last()]`
/// with `c(0) = (1, 0, …, 0)` fixed and the end point free.
///
/// Each `c_k(t) − c_k(0)` is expanded in shifted Chebyshev polynomials that
/// vanish at `t = 0`. With `R = Σ_p r_p Hᵖ`, the trace reduces to
/// `tr(RR†)/D = r† W r` where `W[p][q] = h[p+q]`, so only the moment table
/// enters. The stacked weighted residuals at the collocation nodes form a
/// linear least-squares problem solved by SVD (minimum norm).
pub fn residual_action_coefficients(
    m: &MomentTable,
    n_star: usize,
    t_grid: &[f64],
    cfg: &OdeSolverConfig,
) -> Result<ResidualActionSolution> {
    m.require(2 * n_star + 2)?;
    check_grid(t_grid)?;
    cfg.validate()?;
    let horizon = *t_grid.last().expect("grid is non-empty");
    if horizon == 0.0 {
        return Ok(ResidualActionSolution {
            trajectory: constant_identity(n_star, t_grid, Method::ResidualAction),
            residual: 0.0,
        });
    }

    let n_coef = n_star + 1;
    let n_res = n_star + 2;
    let intervals = (COLLOCATION_POINTS_PER_UNIT_TIME * horizon).ceil().max(8.0) as usize;
    let degree = ((16.0 + 12.0 * horizon).ceil() as usize).min(intervals);
    let dt = horizon / intervals as f64;

    // W = Q diag(w) Qᵀ; rows of the least-squares system are √w_q (Qᵀ r)_q.
    let w = DMatrix::from_fn(n_res, n_res, |p, q| m.get(p + q));
    let eig = SymmetricEigen::new(w);
    let wmax = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let modes: Vec<(usize, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-15 * wmax)
        .map(|(q, &l)| (q, l.sqrt()))
        .collect();

    let cols = n_coef * degree;
    let rows = (intervals + 1) * modes.len();
    let mut lhs = CMatrix::zeros(rows, cols);
    let mut rhs = DVector::<C64>::zeros(rows);
    let i = C64::new(0.0, 1.0);
    let mut phi = vec![0.0; degree + 1];
    let mut dphi = vec![0.0; degree + 1];

    for j in 0..=intervals {
        let t = j as f64 * dt;
        let weight = if j == 0 || j == intervals { 0.5 * dt } else { dt };
        chebyshev_basis(2.0 * t / horizon - 1.0, 2.0 / horizon, &mut phi, &mut dphi);
        for (slot, &(q, sqrt_w)) in modes.iter().enumerate() {
            let row = j * modes.len() + slot;
            let scale = weight.sqrt() * sqrt_w;
            // r_p = i ċ_p [p ≤ n*] − c_{p−1} [p ≥ 1]
            for p in 0..n_res {
                let proj = eig.eigenvectors[(p, q)] * scale;
                if proj == 0.0 {
                    continue;
                }
                if p < n_coef {
                    for mdeg in 1..=degree {
                        lhs[(row, p * degree + mdeg - 1)] += i * (dphi[mdeg] * proj);
                    }
                }
                if p >= 1 {
                    for mdeg in 1..=degree {
                        lhs[(row, (p - 1) * degree + mdeg - 1)] -= C64::new(phi[mdeg] * proj, 0.0);
                    }
                }
            }
            // Constant part of r from c₀(0) = 1 sits in r₁ = ... − c₀.
            rhs[row] = C64::new(eig.eigenvectors[(1, q)] * scale, 0.0);
        }
    }

    let svd = lhs.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let amp = svd
        .solve(&rhs, cfg.pseudoinverse_cutoff * smax)
        .map_err(|e| Error::LeastSquares(e.to_string()))?;
    let residual = (&lhs * &amp - &rhs).norm_squared();
    if !residual.is_finite() {
        return Err(Error::LeastSquares("non-finite residual".into()));
    }

    let coeffs = t_grid
        .iter()
        .map(|&t| {
            chebyshev_basis(2.0 * t / horizon - 1.0, 2.0 / horizon, &mut phi, &mut dphi);
            (0..n_coef)
                .map(|k| {
                    let base = if k == 0 { 1.0 } else { 0.0 };
                    (1..=degree).fold(C64::new(base, 0.0), |acc, mdeg| acc + amp[k * degree + mdeg - 1] * phi[mdeg])
                })
                .collect()
        })
        .collect();

    Ok(ResidualActionSolution {
        trajectory: CoefficientTrajectory {
            n_star,
            times: t_grid.to_vec(),
            coeffs,
            method: Method::ResidualAction,
        },
        residual,
    })
}

/// `φ_m(s) = T_m(s) − T_m(−1)` and `dφ_m/dt` (`ds/dt = jac`), `m = 0..=degree`.
fn chebyshev_basis(s: f64, jac: f64, phi: &mut [f64], dphi: &mut [f64]) {
    let n = phi.len();
    let (mut t_prev, mut t_cur) = (1.0, s);
    let (mut d_prev, mut d_cur) = (0.0, 1.0);
    phi[0] = 0.0;
    dphi[0] = 0.0;
    for m in 1..n {
        let at_minus_one = if m % 2 == 0 { 1.0 } else { -1.0 };
        phi[m] = t_cur - at_minus_one;
        dphi[m] = d_cur * jac;
        let t_next = 2.0 * s * t_cur - t_prev;
        let d_next = 2.0 * t_cur + 2.0 * s * d_cur - d_prev;
        t_prev = t_cur;
        t_cur = t_next;
        d_prev = d_cur;
        d_cur = d_next;
    }
}

/// Residual-action propagators; collocation runs in normalized time `t‖H‖`.
pub fn residual_action_propagator(
    h: &HermitianOperator,
    t_grid: &[f64],
    n_star: usize,
    cfg: &OdeSolverConfig,
) -> Result<Vec<PropagatorMatrix>> {
    solve_normalized(h, t_grid, n_star, Method::ResidualAction, |m, tau| {
        residual_action_coefficients(m, n_star, tau, cfg).map(|s| s.trajectory)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::gue;
    use crate::spectral::{exact_propagator, l2_distance, moments};

    #[test]
    fn chebyshev_basis_matches_closed_form() {
        let mut phi = vec![0.0; 6];
        let mut dphi = vec![0.0; 6];
        let s: f64 = 0.3;
        chebyshev_basis(s, 1.0, &mut phi, &mut dphi);
        let theta = s.acos();
        for m in 1..6 {
            let tm = (m as f64 * theta).cos();
            let dtm = m as f64 * (m as f64 * theta).sin() / theta.sin();
            assert!((phi[m] - (tm - (-1f64).powi(m as i32))).abs() < 1e-14);
            assert!((dphi[m] - dtm).abs() < 1e-12);
        }
    }

    #[test]
    fn single_point_grid_is_identity() {
        let us = residual_action_propagator(&gue(3, 1, 0), &[0.0], 2, &Default::default()).unwrap();
        assert_eq!(us[0].entries, CMatrix::identity(3, 3));
    }

    #[test]
    fn sigma1_is_representable() {
        let s1 = HermitianOperator::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let sol = residual_action_coefficients(&moments(&s1, 6), 2, &grid, &Default::default()).unwrap();
        assert!(sol.residual <= 1e-8, "{}", sol.residual);
        for (k, u) in sol.trajectory.propagators(&s1).iter().enumerate() {
            let d = l2_distance(u, &exact_propagator(&s1, grid[k]).unwrap()).unwrap();
            assert!(d <= 1e-6, "t = {}: {d}", grid[k]);
        }
    }

    #[test]
    fn generic_case_starts_at_identity_and_stays_bounded() {
        let h = gue(5, 9, 2);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let us = residual_action_propagator(&h, &grid, 2, &Default::default()).unwrap();
        assert!((us[0].entries.clone() - CMatrix::identity(5, 5)).norm() < 1e-10);
        let norm = crate::spectral::operator_norm(&h);
        for u in &us {
            let d = l2_distance(u, &exact_propagator(&h, u.time).unwrap()).unwrap();
            assert!(d.is_finite() && d < 0.5, "t‖H‖ = {}: {d}", u.time * norm);
        }
    }
}
