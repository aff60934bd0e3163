use super::{check_grid, CoefficientTrajectory};
use crate::spectral::{moments, operator_norm};
use crate::{Error, HermitianOperator, Method, MomentTable, PropagatorMatrix, Result, C64};

/// Cubic and quartic corrections of the closed-form `n* = 2` solution,
///
/// `c₀ = 1`, `c₁ = −it + c₁₃t³ + c₁₄t⁴`, `c₂ = −t²/2 + c₂₃t³ + c₂₄t⁴`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormTerms {
    pub c13: C64,
    pub c14: C64,
    pub c23: C64,
    pub c24: C64,
}

impl ClosedFormTerms {
    pub fn from_moments(m: &MomentTable) -> Result<Self> {
        m.require(4)?;
        let (h1, h2, h3, h4) = (m.get(1), m.get(2), m.get(3), m.get(4));
        let den = h1 * h3 - h2 * h2;
        if den.abs() < 1e-12 * (h2 * h2).max(1.0) {
            return Err(Error::DegenerateMoments(den));
        }
        let i6 = C64::new(0.0, 1.0 / 6.0);
        Ok(Self {
            c13: i6 * ((h3 * h3 - h2 * h4) / den),
            c14: C64::new(h3 * h4 / (24.0 * den), 0.0),
            c23: i6 * ((h1 * h4 - h2 * h3) / den),
            c24: C64::new(-h2 * h4 / (24.0 * den), 0.0),
        })
    }

    pub fn at(&self, t: f64) -> [C64; 3] {
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        [
            C64::new(1.0, 0.0),
            C64::new(0.0, -t) + self.c13 * t3 + self.c14 * t4,
            C64::new(-0.5 * t2, 0.0) + self.c23 * t3 + self.c24 * t4,
        ]
    }
}

/// `(c₀, c₁, c₂)` at time `t`. Fails with [`Error::DegenerateMoments`] when
/// `h₁h₃ − h₂²` vanishes (e.g. `H ∝ 1`).
pub fn closed_form_coefficients(m: &MomentTable, t: f64) -> Result<[C64; 3]> {
    Ok(ClosedFormTerms::from_moments(m)?.at(t))
}

/// Closed-form propagators, evaluated in normalized time `t‖H‖`.
pub fn closed_form_propagator(h: &HermitianOperator, t_grid: &[f64]) -> Result<Vec<PropagatorMatrix>> {
    check_grid(t_grid)?;
    let norm = operator_norm(h);
    if norm == 0.0 {
        return Err(Error::DegenerateMoments(0.0));
    }
    let terms = ClosedFormTerms::from_moments(&moments(&h.scaled(1.0 / norm), 4))?;
    let traj = CoefficientTrajectory {
        n_star: 2,
        times: t_grid.iter().map(|t| t * norm).collect(),
        coeffs: t_grid.iter().map(|t| terms.at(t * norm).to_vec()).collect(),
        method: Method::VariationalClosedForm,
    };
    Ok(traj.unscaled(norm, t_grid).propagators(h))
}
