//! Worked examples for the improved downfolding: the AB bilayer graphene
//! `k·p` model and the one-dimensional Hubbard chain.

pub mod graphene;
pub mod hubbard;

pub use graphene::{
    graphene_hamiltonians, graphene_sweep, GrapheneParams, GrapheneSweep, MomentumAxis, PmConvention,
};
pub use hubbard::{
    heisenberg_models, hubbard_coefficients, hubbard_generator, hubbard_hamiltonian, hubbard_sweep, Boundary,
    CoefficientSource, FockBasis, HubbardParams, HubbardSweep, HubbardSweepConfig,
};

/// Relative error `|(exact − approx) / exact|`.
pub(crate) fn relative_error(exact: f64, approx: f64) -> f64 {
    ((exact - approx) / exact).abs()
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// `n` evenly spaced points in `(0, hi]`.
pub fn open_linear_grid(hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| hi * k as f64 / n as f64).collect()
}
