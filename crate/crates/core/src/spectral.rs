//! Dense Hermitian linear algebra shared by every other module.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CMatrix, Error, Result, C64};

/// Above this relative asymmetry a matrix is rejected instead of symmetrized.
const HERMITICITY_REJECT: f64 = 1e-8;

/// Dense complex square matrix certified Hermitian at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Symmetrizes `(A + A†)/2`. Matrices whose asymmetry exceeds
    /// `1e-8 · ‖A‖_max` are rejected rather than repaired.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows == 0 || rows != cols {
            return Err(Error::Shape { rows, cols });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let amax = max_abs(&entries);
        let adjoint = entries.adjoint();
        let asymmetry = max_abs(&(&entries - &adjoint));
        let threshold = HERMITICITY_REJECT * amax;
        if asymmetry > threshold {
            return Err(Error::NotHermitian { asymmetry, threshold });
        }
        let mut sym = (entries + adjoint).unscale(2.0);
        for i in 0..rows {
            sym[(i, i)].im = 0.0;
        }
        Ok(Self { entries: sym })
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|x| C64::new(x, 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Self { entries: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { entries: self.entries.scale(factor) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Self { entries: &self.entries + &other.entries })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// `true` when every off-diagonal entry vanishes exactly.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.entries[(i, j)] == C64::new(0.0, 0.0)))
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigen-decomposition `H = V Λ V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * v.adjoint()
    }
}

pub fn eigendecompose(h: &HermitianOperator) -> Result<Spectrum> {
    let n = h.dim();
    if h.is_diagonal() {
        // Sorting a diagonal is exact; no iteration needed.
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| h.entries[(i, i)].re).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let mut vecs = CMatrix::zeros(n, n);
        for (col, &row) in order.iter().enumerate() {
            vecs[(row, col)] = C64::new(1.0, 0.0);
        }
        return Ok(Spectrum { eigenvalues: order.iter().map(|&i| diag[i]).collect(), eigenvectors: vecs });
    }
    let eig = SymmetricEigen::try_new(h.entries.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::Eigensolver(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Ascending eigenvalues without eigenvectors.
pub fn eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    let mut vals: Vec<f64> = if h.is_diagonal() {
        (0..h.dim()).map(|i| h.entries[(i, i)].re).collect()
    } else {
        h.entries.symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    vals
}

/// Spectral norm, `max |λ|`.
pub fn operator_norm(h: &HermitianOperator) -> f64 {
    spectral_radius(&eigenvalues(h))
}

pub fn spectral_radius(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs()))
}

/// Normalized traces `h[n] = tr(Hⁿ)/D`, `n = 0..=max_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    h: Vec<f64>,
}

impl MomentTable {
    /// Validates `h[0] = 1` and non-negative even moments.
    pub fn from_values(h: Vec<f64>) -> Result<Self> {
        if h.first() != Some(&1.0) {
            return Err(Error::InvalidParameter("moment table must start with h[0] = 1".into()));
        }
        if h.iter().step_by(2).any(|&x| x < 0.0 || !x.is_finite()) || h.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("even moments must be finite and non-negative".into()));
        }
        Ok(Self { h })
    }

    /// Moments of the spectral measure placing weight `1/D` on each eigenvalue.
    pub fn from_eigenvalues(eigenvalues: &[f64], max_order: usize) -> Self {
        let d = eigenvalues.len() as f64;
        let mut h = vec![0.0; max_order + 1];
        for &l in eigenvalues {
            let mut p = 1.0;
            for hn in h.iter_mut() {
                *hn += p;
                p *= l;
            }
        }
        for hn in h.iter_mut() {
            *hn /= d;
        }
        h[0] = 1.0;
        Self { h }
    }

    pub fn max_order(&self) -> usize {
        self.h.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn get(&self, n: usize) -> f64 {
        self.h[n]
    }

    /// Moments of `H / scale`.
    pub fn rescaled(&self, scale: f64) -> Self {
        let mut f = 1.0;
        let h = self
            .h
            .iter()
            .map(|&x| {
                let v = x * f;
                f /= scale;
                v
            })
            .collect();
        Self { h }
    }

    pub(crate) fn require(&self, order: usize) -> Result<()> {
        if self.max_order() < order {
            return Err(Error::InsufficientMoments { have: self.max_order(), need: order });
        }
        Ok(())
    }
}

pub fn moments(h: &HermitianOperator, max_order: usize) -> MomentTable {
    MomentTable::from_eigenvalues(&eigenvalues(h), max_order)
}

/// Which approximation produced a propagator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Taylor,
    Kpm,
    Variational,
    VariationalClosedForm,
    ResidualAction,
}

impl Method {
    pub const APPROXIMANTS: [Method; 5] = [
        Method::Taylor,
        Method::Kpm,
        Method::Variational,
        Method::VariationalClosedForm,
        Method::ResidualAction,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Taylor => "taylor",
            Method::Kpm => "kpm",
            Method::Variational => "variational",
            Method::VariationalClosedForm => "closed_form",
            Method::ResidualAction => "residual_action",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "exact" => Method::Exact,
            "taylor" => Method::Taylor,
            "kpm" => Method::Kpm,
            "variational" => Method::Variational,
            "closed_form" => Method::VariationalClosedForm,
            "residual_action" => Method::ResidualAction,
            other => return Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        };
        Ok(m)
    }
}

/// An (approximate) time-evolution operator at a fixed time.
#[derive(Clone, Debug)]
pub struct PropagatorMatrix {
    pub entries: CMatrix,
    pub time: f64,
    pub method: Method,
}

impl PropagatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `‖U U† − 1‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(&self.entries * self.entries.adjoint() - CMatrix::identity(n, n)))
    }
}

pub fn exact_propagator(h: &HermitianOperator, t: f64) -> Result<PropagatorMatrix> {
    Ok(exact_propagator_from(&eigendecompose(h)?, t))
}

/// `V e^{-iΛt} V†` from an existing decomposition.
pub fn exact_propagator_from(spectrum: &Spectrum, t: f64) -> PropagatorMatrix {
    PropagatorMatrix {
        entries: spectrum.apply(|l| C64::new(0.0, -l * t).exp()),
        time: t,
        method: Method::Exact,
    }
}

/// `‖Ua − Ub‖_F / (2√D)`. Not clamped: truncated approximants may exceed 1.
pub fn l2_distance(a: &PropagatorMatrix, b: &PropagatorMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok((&a.entries - &b.entries).norm() / (2.0 * (a.dim() as f64).sqrt()))
}

/// The same distance for two functions of one Hermitian matrix, evaluated on
/// its eigenvalues. The Frobenius norm is unitarily invariant, so this equals
/// [`l2_distance`] on the assembled matrices.
pub fn l2_distance_spectral(
    eigenvalues: &[f64],
    f: impl Fn(f64) -> C64,
    g: impl Fn(f64) -> C64,
) -> f64 {
    let sq: f64 = eigenvalues.iter().map(|&l| (f(l) - g(l)).norm_sqr()).sum();
    sq.sqrt() / (2.0 * (eigenvalues.len() as f64).sqrt())
}

/// Metric of the polynomial ansatz: `G[j][k] = tr((∂_j U)† ∂_k U)/D = h[j+k]`.
pub fn gram_tensor(m: &MomentTable, n_star: usize) -> Result<DMatrix<f64>> {
    m.require(2 * n_star)?;
    Ok(DMatrix::from_fn(n_star + 1, n_star + 1, |j, k| m.get(j + k)))
}

/// Moore–Penrose pseudoinverse dropping singular values below
/// `rel_cutoff · σ_max`.
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_cutoff: f64) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return Ok(DMatrix::zeros(m.ncols(), m.nrows()));
    }
    svd.pseudo_inverse(rel_cutoff * smax).map_err(|e| Error::LeastSquares(e.to_string()))
}

/// `[A, B]`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `Σ_j coeffs[j] H^j` by Horner's rule.
pub fn matrix_polynomial(h: &CMatrix, coeffs: &[C64]) -> CMatrix {
    let n = h.nrows();
    let mut acc = CMatrix::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = h * acc;
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

/// `Σ_j coeffs[j] xʲ`.
pub fn scalar_polynomial(x: f64, coeffs: &[C64]) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::gue;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma1() -> HermitianOperator {
        HermitianOperator::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    fn sigma3() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0])
    }

    #[test]
    fn construction_rejects_and_repairs() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(bad), Err(Error::NotHermitian { .. })));
        let nearly =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 1e-14), c(1.0, 1e-13), c(1.0, 0.0), c(0.0, 0.0)]);
        let h = HermitianOperator::new(nearly).unwrap();
        let m = h.matrix();
        assert!(max_abs(&(m - m.adjoint())) <= 1e-12);
        assert!(matches!(HermitianOperator::new(CMatrix::zeros(2, 3)), Err(Error::Shape { .. })));
        assert!(matches!(HermitianOperator::new(CMatrix::zeros(0, 0)), Err(Error::Shape { .. })));
    }

    #[test]
    fn eigendecompose_small_cases() {
        let s = eigendecompose(&HermitianOperator::from_real_diagonal(&[2.0, -1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 2.0]);
        assert_eq!(s.eigenvectors[(1, 0)], c(1.0, 0.0));
        assert_eq!(s.eigenvectors[(0, 1)], c(1.0, 0.0));
        let s = eigendecompose(&sigma1()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigendecompose_random_residual() {
        let h = gue(5, 7, 0);
        let s = eigendecompose(&h).unwrap();
        let lambda = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            5,
            s.eigenvalues.iter().map(|&l| c(l, 0.0)),
        ));
        let v = &s.eigenvectors;
        assert!((h.matrix() * v - v * lambda).norm() <= 1e-9 * h.frobenius_norm());
        assert!((v.adjoint() * v - CMatrix::identity(5, 5)).norm() <= 1e-10);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn operator_norm_cases() {
        assert_eq!(operator_norm(&sigma3()), 1.0);
        assert_eq!(operator_norm(&HermitianOperator::from_real_diagonal(&[-3.0, 2.0])), 3.0);
        assert_eq!(operator_norm(&HermitianOperator::zeros(3)), 0.0);
    }

    #[test]
    fn moments_cases() {
        let id = moments(&HermitianOperator::identity(4), 6);
        assert!(id.values().iter().all(|&x| x == 1.0));
        assert_eq!(moments(&sigma3(), 5).values(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let m = moments(&gue(6, 3, 1), 4);
        assert!(m.get(2) - m.get(1).powi(2) >= 0.0);
    }

    #[test]
    fn exact_propagator_cases() {
        let u = exact_propagator(&sigma1(), 0.0).unwrap();
        assert!((u.entries - CMatrix::identity(2, 2)).norm() < 1e-15);
        let u = exact_propagator(&sigma3(), PI).unwrap();
        assert!((u.entries + CMatrix::identity(2, 2)).norm() < 1e-14);
        let u = exact_propagator(&gue(6, 2, 9), 0.7).unwrap();
        assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn l2_distance_cases() {
        let u = exact_propagator(&gue(4, 11, 0), 0.3).unwrap();
        assert_eq!(l2_distance(&u, &u).unwrap(), 0.0);
        let neg = PropagatorMatrix { entries: -u.entries.clone(), ..u.clone() };
        assert_abs_diff_eq!(l2_distance(&u, &neg).unwrap(), 1.0, epsilon = 1e-12);
        let small = exact_propagator(&sigma1(), 0.1).unwrap();
        assert!(matches!(l2_distance(&u, &small), Err(Error::DimensionMismatch(4, 2))));
    }

    #[test]
    fn l2_taylor_error_is_cubic_near_zero() {
        // Leading error of the second-order Taylor polynomial is (Ht)³/6.
        let h = gue(5, 4, 2);
        let norm = operator_norm(&h);
        let hn = h.scaled(1.0 / norm);
        let lam = eigenvalues(&hn);
        let taylor = |t: f64| move |l: f64| c(1.0, -l * t) - c(0.5 * (l * t).powi(2), 0.0);
        let d1 = l2_distance_spectral(&lam, |l| c(0.0, -l).exp(), taylor(1.0));
        assert!(d1 > 0.0 && d1 < 1.0);
        let t = 1e-2;
        let d = l2_distance_spectral(&lam, |l| c(0.0, -l * t).exp(), taylor(t));
        let m6 = moments(&hn, 6).get(6);
        let leading = t.powi(3) / 6.0 * m6.sqrt() / 2.0;
        assert!((d / leading - 1.0).abs() < 1e-2, "{d} vs {leading}");
    }

    #[test]
    fn gram_tensor_cases() {
        let g = gram_tensor(&moments(&sigma3(), 4), 2).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]));
        let g = gram_tensor(&moments(&HermitianOperator::identity(3), 2), 1).unwrap();
        assert_eq!(g, DMatrix::from_element(2, 2, 1.0));
        assert!(matches!(
            gram_tensor(&moments(&sigma3(), 3), 2),
            Err(Error::InsufficientMoments { have: 3, need: 4 })
        ));
    }

    #[test]
    fn matrix_polynomial_matches_scalar() {
        let h = HermitianOperator::from_real_diagonal(&[0.5, -2.0]);
        let coeffs = [c(1.0, 0.0), c(0.0, -1.0), c(-0.5, 0.25)];
        let p = matrix_polynomial(h.matrix(), &coeffs);
        assert!((p[(0, 0)] - scalar_polynomial(0.5, &coeffs)).norm() < 1e-15);
        assert!((p[(1, 1)] - scalar_polynomial(-2.0, &coeffs)).norm() < 1e-15);
    }
}
