//! Four-band `k·p` model of AB-stacked bilayer graphene.
//!
//! Basis index `2·layer + sublattice`; `τ` acts on the layer, `σ` on the
//! sublattice. The interlayer dimer couples indices 0 and 3, leaving the
//! low-energy doublet `(0,1,0,0)`, `(0,0,1,0)` at zero energy.

use super::relative_error;
use crate::downfold::{sinc, PerturbationSplit};
use crate::spectral::{eigenvalues, max_abs};
use crate::{CMatrix, Error, HermitianOperator, Result, C64};

/// How `p_±` is formed from the in-plane momentum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PmConvention {
    /// `p_± = p₁ ± p₂`.
    #[default]
    AsPrinted,
    /// `p_± = p₁ ± i p₂`.
    Complex,
}

impl PmConvention {
    pub fn tag(self) -> &'static str {
        match self {
            PmConvention::AsPrinted => "as_printed",
            PmConvention::Complex => "complex",
        }
    }
}

impl std::str::FromStr for PmConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_printed" | "as-printed" | "printed" => Ok(PmConvention::AsPrinted),
            "complex" => Ok(PmConvention::Complex),
            _ => Err(Error::InvalidParameter(format!("unknown p± convention '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrapheneParams {
    pub gamma: f64,
    pub p1: f64,
    pub p2: f64,
    pub pm_convention: PmConvention,
}

impl GrapheneParams {
    pub fn new(gamma: f64, p1: f64, p2: f64, pm_convention: PmConvention) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(p1.is_finite() && p2.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { gamma, p1, p2, pm_convention })
    }

    pub fn momentum(&self) -> f64 {
        self.p1.hypot(self.p2)
    }

    pub fn p_pm(&self) -> (C64, C64) {
        match self.pm_convention {
            PmConvention::AsPrinted => (C64::new(self.p1 + self.p2, 0.0), C64::new(self.p1 - self.p2, 0.0)),
            PmConvention::Complex => (C64::new(self.p1, self.p2), C64::new(self.p1, -self.p2)),
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat2(a: [[C64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, k| a[r][k])
}

fn identity2() -> CMatrix {
    CMatrix::identity(2, 2)
}

fn pauli_x() -> CMatrix {
    mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

fn pauli_y() -> CMatrix {
    mat2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

fn pauli_z() -> CMatrix {
    mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}

/// `(σ¹ + iσ²)/2`, the unit raising operator.
fn raising() -> CMatrix {
    mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]])
}

fn lowering() -> CMatrix {
    raising().adjoint()
}

/// `H₀ = γ(τ⁺⊗σ⁺ + τ⁻⊗σ⁻)` and `V = 𝟙⊗(p₁σ¹ + p₂σ²)`.
///
/// `τ^±`, `σ^±` are unit raising and lowering operators; with `τ¹ ± iτ²`
/// taken literally every energy would carry an extra factor of 4.
pub fn graphene_hamiltonians(params: &GrapheneParams) -> PerturbationSplit {
    let h0 = (raising().kronecker(&raising()) + lowering().kronecker(&lowering())) * c(params.gamma, 0.0);
    let v = identity2().kronecker(&(pauli_x() * c(params.p1, 0.0) + pauli_y() * c(params.p2, 0.0)));
    PerturbationSplit::new(
        HermitianOperator::new(h0).expect("dimer term is Hermitian"),
        HermitianOperator::new(v).expect("momentum term is Hermitian"),
    )
    .expect("both 4x4")
}

/// Columns `(0,1,0,0)` and `(0,0,1,0)`.
pub fn low_energy_basis() -> CMatrix {
    let mut b = CMatrix::zeros(4, 2);
    b[(1, 0)] = c(1.0, 0.0);
    b[(2, 1)] = c(1.0, 0.0);
    b
}

/// `O = −(p₁τ² + p₂τ¹)/γ ⊗ σ³`.
pub fn printed_generator(params: &GrapheneParams) -> HermitianOperator {
    let tau = (pauli_y() * c(params.p1, 0.0) + pauli_x() * c(params.p2, 0.0)) * c(-1.0 / params.gamma, 0.0);
    HermitianOperator::new(tau.kronecker(&pauli_z())).expect("product of Hermitian factors")
}

/// `p₊²σ⁺ + p₋²σ⁻` in the low-energy basis.
fn pm_structure(params: &GrapheneParams) -> CMatrix {
    let (pp, pm) = params.p_pm();
    raising() * (pp * pp) + lowering() * (pm * pm)
}

/// `H^(2) = −γ⁻¹(p₊²σ⁺ + p₋²σ⁻)`. Not Hermitian off the axes under
/// [`PmConvention::AsPrinted`].
pub fn printed_h2(params: &GrapheneParams) -> CMatrix {
    pm_structure(params) * c(-1.0 / params.gamma, 0.0)
}

/// `[sinc²(p/γ) − 2 sinc(2p/γ)]/γ · (p₊²σ⁺ + p₋²σ⁻)`.
pub fn printed_h2_var(params: &GrapheneParams) -> CMatrix {
    let x = params.momentum() / params.gamma;
    let s = sinc(x);
    pm_structure(params) * c((s * s - 2.0 * sinc(2.0 * x)) / params.gamma, 0.0)
}

/// Closed-form `(c₀, c₁, c₂)` of `e^{−iÕ}` for this model: `Õ` has the
/// three eigenvalues `{0, ±2p/γ}`, so the quadratic interpolant is exact.
pub fn printed_coefficients(p_over_gamma: f64) -> [C64; 3] {
    let s = sinc(p_over_gamma);
    [c(1.0, 0.0), c(0.0, -sinc(2.0 * p_over_gamma)), c(-0.5 * s * s, 0.0)]
}

/// Raw `tr(Õⁿ)`: 16 at n = 0, `2^{n+3}(p/γ)ⁿ` for even n ≥ 2, zero for odd n.
pub fn super_trace(p_over_gamma: f64, order: usize) -> f64 {
    if order % 2 == 1 {
        return 0.0;
    }
    if order == 0 {
        return 16.0;
    }
    2f64.powi(order as i32 + 3) * p_over_gamma.powi(order as i32)
}

/// Direction of the momentum sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MomentumAxis {
    P1,
    #[default]
    P2,
}

impl MomentumAxis {
    pub fn tag(self) -> &'static str {
        match self {
            MomentumAxis::P1 => "p1",
            MomentumAxis::P2 => "p2",
        }
    }
}

impl std::str::FromStr for MomentumAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p1" => Ok(MomentumAxis::P1),
            "p2" => Ok(MomentumAxis::P2),
            _ => Err(Error::InvalidParameter(format!("unknown momentum axis '{s}'"))),
        }
    }
}

/// One matched level at one momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct GrapheneLevel {
    pub p: f64,
    pub level: usize,
    pub e_exact: f64,
    pub e_std: f64,
    pub e_var: f64,
    pub delta_std: f64,
    pub delta_var: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrapheneSweep {
    pub gamma: f64,
    pub convention: PmConvention,
    pub axis: MomentumAxis,
    pub rows: Vec<GrapheneLevel>,
    /// Momenta dropped because the exact low-energy level vanishes.
    pub skipped: Vec<f64>,
}

impl GrapheneSweep {
    /// `(p, Δ_std, Δ_var)` per momentum, taking the worse of the two levels.
    pub fn per_momentum(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r.p => {
                    last.1 = last.1.max(r.delta_std);
                    last.2 = last.2.max(r.delta_var);
                }
                _ => out.push((r.p, r.delta_std, r.delta_var)),
            }
        }
        out
    }
}

/// Compares the two mid-spectrum exact levels with the eigenvalues of the
/// printed `H^(2)` and `H^(2,var)` along one momentum axis.
pub fn graphene_sweep(
    gamma: f64,
    p_grid: &[f64],
    convention: PmConvention,
    axis: MomentumAxis,
) -> Result<GrapheneSweep> {
    let mut rows = Vec::with_capacity(2 * p_grid.len());
    let mut skipped = Vec::new();
    for &p in p_grid {
        let (p1, p2) = match axis {
            MomentumAxis::P1 => (p, 0.0),
            MomentumAxis::P2 => (0.0, p),
        };
        let params = GrapheneParams::new(gamma, p1, p2, convention)?;
        let exact = eigenvalues(&graphene_hamiltonians(&params).total());
        let mid = [exact[1], exact[2]];
        let scale = exact.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if mid.iter().any(|e| e.abs() <= 1e-14 * scale.max(1.0)) {
            skipped.push(p);
            continue;
        }
        let std = eigenvalues(&HermitianOperator::new(printed_h2(&params))?);
        let var = eigenvalues(&HermitianOperator::new(printed_h2_var(&params))?);
        for level in 0..2 {
            rows.push(GrapheneLevel {
                p,
                level,
                e_exact: mid[level],
                e_std: std[level],
                e_var: var[level],
                delta_std: relative_error(mid[level], std[level]),
                delta_var: relative_error(mid[level], var[level]),
            });
        }
    }
    Ok(GrapheneSweep { gamma, convention, axis, rows, skipped })
}

/// Eigenvalues of a general 2×2 matrix, ordered by real part.
fn eig2(m: &CMatrix) -> [C64; 2] {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let half_diff = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let root = (half_diff * half_diff + m[(0, 1)] * m[(1, 0)]).sqrt();
    let (a, b) = (half_tr - root, half_tr + root);
    if a.re <= b.re {
        [a, b]
    } else {
        [b, a]
    }
}

/// How well one `p_±` convention's printed `H^(2)` reproduces the exact
/// low-energy doublet at a momentum off the symmetry axes.
#[derive(Clone, Debug, PartialEq)]
pub struct ConventionCheck {
    pub convention: PmConvention,
    /// Worst `‖H − H†‖_max` over the probed momenta.
    pub hermiticity_defect: f64,
    /// Worst relative eigenvalue mismatch against the exact doublet.
    pub max_relative_mismatch: f64,
}

/// Probes `n_angles` momenta of magnitude `p` spread over a quarter turn
/// (excluding the axes, where both conventions coincide).
pub fn convention_check(gamma: f64, p: f64, n_angles: usize, convention: PmConvention) -> Result<ConventionCheck> {
    let mut hermiticity_defect = 0.0f64;
    let mut max_relative_mismatch = 0.0f64;
    for k in 1..=n_angles {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (n_angles + 1) as f64;
        let params = GrapheneParams::new(gamma, p * theta.cos(), p * theta.sin(), convention)?;
        let h2 = printed_h2(&params);
        hermiticity_defect = hermiticity_defect.max(max_abs(&(&h2 - h2.adjoint())));
        let exact = eigenvalues(&graphene_hamiltonians(&params).total());
        for (e, a) in [exact[1], exact[2]].into_iter().zip(eig2(&h2)) {
            max_relative_mismatch = max_relative_mismatch.max((C64::new(e, 0.0) - a).norm() / e.abs());
        }
    }
    Ok(ConventionCheck { convention, hermiticity_defect, max_relative_mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::downfold::{effective_hamiltonian, solve_generator, standard_second_order, super_moments};

    fn params(p1: f64, p2: f64, conv: PmConvention) -> GrapheneParams {
        GrapheneParams::new(1.0, p1, p2, conv).unwrap()
    }

    #[test]
    fn low_energy_vectors_are_null() {
        let split = graphene_hamiltonians(&params(0.3, 0.2, PmConvention::Complex));
        let b = low_energy_basis();
        assert_eq!(max_abs(&(split.h0.matrix() * b)), 0.0);
        let e = eigenvalues(&split.h0);
        assert_eq!(e, vec![-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_momentum_has_no_perturbation() {
        let split = graphene_hamiltonians(&params(0.0, 0.0, PmConvention::AsPrinted));
        assert_eq!(split.v.max_abs(), 0.0);
    }

    #[test]
    fn spectrum_is_symmetric() {
        for (p1, p2) in [(0.3, 0.1), (1.2, -0.7), (0.0, 2.0)] {
            let e = eigenvalues(&graphene_hamiltonians(&params(p1, p2, PmConvention::Complex)).total());
            for k in 0..4 {
                assert!((e[k] + e[3 - k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pseudoinverse_generator_matches_printed() {
        let p = params(0.2, 0.1, PmConvention::AsPrinted);
        let gen = solve_generator(&graphene_hamiltonians(&p)).unwrap();
        assert!(max_abs(&(gen.o.matrix() - printed_generator(&p).matrix())) < 1e-10);
    }

    #[test]
    fn super_traces_match_eigenvalue_differences() {
        let p = params(0.0, 0.37, PmConvention::AsPrinted);
        let sm = super_moments(&printed_generator(&p), 6);
        for n in 0..=6 {
            assert!((16.0 * sm.moments.get(n) - super_trace(0.37, n)).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_second_order_matches_printed_with_complex_momenta() {
        let p = params(0.3, -0.45, PmConvention::Complex);
        let split = graphene_hamiltonians(&p);
        let gen = solve_generator(&split).unwrap();
        let h2 = standard_second_order(&split, &gen, &low_energy_basis()).unwrap();
        assert!(max_abs(&(h2.matrix() - printed_h2(&p))) < 1e-12);
    }

    #[test]
    fn improved_result_is_rescaled_standard_result() {
        let p = params(0.0, 0.6, PmConvention::Complex);
        let split = graphene_hamiltonians(&p);
        let gen = solve_generator(&split).unwrap();
        let cf = printed_coefficients(0.6);
        let res = effective_hamiltonian(&split, &gen, cf, &low_energy_basis()).unwrap();
        let factor = C64::new(0.0, 2.0) * (cf[1] - C64::new(0.0, 1.0) * cf[2]);
        assert!(max_abs(&(res.h_effective.matrix() - printed_h2(&p) * factor)) < 1e-12);
        assert!(max_abs(&(res.h_effective.matrix() - printed_h2_var(&p))) < 1e-12);
    }

    #[test]
    fn conventions_agree_on_the_axes() {
        for (p1, p2) in [(0.0, 0.8), (0.8, 0.0)] {
            let a = eigenvalues(&HermitianOperator::new(printed_h2(&params(p1, p2, PmConvention::AsPrinted))).unwrap());
            let b = eigenvalues(&HermitianOperator::new(printed_h2(&params(p1, p2, PmConvention::Complex))).unwrap());
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_convention_tracks_exact_spectrum_off_axis() {
        let printed = convention_check(1.0, 0.05, 7, PmConvention::AsPrinted).unwrap();
        let complex = convention_check(1.0, 0.05, 7, PmConvention::Complex).unwrap();
        assert!(printed.hermiticity_defect > 1e-4);
        assert!(complex.hermiticity_defect < 1e-15);
        assert!(complex.max_relative_mismatch < 0.01);
        assert!(printed.max_relative_mismatch > 0.1);
    }

    #[test]
    fn small_momentum_limit() {
        let s = graphene_sweep(1.0, &[1e-4], PmConvention::AsPrinted, MomentumAxis::P2).unwrap();
        for r in &s.rows {
            assert!((r.delta_std - r.delta_var).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_momentum_is_skipped() {
        let s = graphene_sweep(1.0, &[0.0, 0.5], PmConvention::AsPrinted, MomentumAxis::P2).unwrap();
        assert_eq!(s.skipped, vec![0.0]);
        assert_eq!(s.rows.len(), 2);
    }
}
