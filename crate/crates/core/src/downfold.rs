//! Non-perturbative downfolding through the adjoint superoperator.
//!
//! A unitary transform `H' = e^{−i[O,·]} H` is second-order degenerate
//! perturbation theory when truncated. Writing the adjoint action as the
//! superoperator `Õ = O⊗1 − 1⊗Oᵀ` turns it into an ordinary exponential
//! `e^{−iÕ}`, which the variational polynomial ansatz approximates as
//! `c₀ + c₁Õ + c₂Õ²`, i.e.
//!
//! `H' ≈ c₀H + c₁[O,H] + c₂[O,[O,H]]`.
//!
//! The coefficients come from the moments of `Õ`, which are sums over
//! eigenvalue differences of `O`; the `D² × D²` superoperator is never built.

use crate::ode::OdeSolverConfig;
use crate::propagator::variational_coefficients;
use crate::spectral::{commutator, eigendecompose, eigenvalues, max_abs, operator_norm};
use crate::{CMatrix, Error, HermitianOperator, MomentTable, Result, C64};

/// Relative tolerance under which two unperturbed energies count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// `H = H₀ + V`.
#[derive(Clone, Debug)]
pub struct PerturbationSplit {
    pub h0: HermitianOperator,
    pub v: HermitianOperator,
}

impl PerturbationSplit {
    pub fn new(h0: HermitianOperator, v: HermitianOperator) -> Result<Self> {
        if h0.dim() != v.dim() {
            return Err(Error::DimensionMismatch(h0.dim(), v.dim()));
        }
        Ok(Self { h0, v })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn total(&self) -> HermitianOperator {
        self.h0.add(&self.v).expect("dimensions checked at construction")
    }
}

/// First-order generator `O` with the part of `V` it could not remove.
#[derive(Clone, Debug)]
pub struct Generator {
    pub o: HermitianOperator,
    /// `‖V − i[O, H₀]‖_F` restricted to blocks between distinct `H₀` levels.
    pub first_order_residual: f64,
}

/// Solves `V − i[O, H₀] = 0` between distinct `H₀` eigenspaces by the
/// commutator pseudoinverse: `O_ab = i V_ab / (E_a − E_b)` in the `H₀`
/// eigenbasis, zero inside degenerate blocks.
pub fn solve_generator(split: &PerturbationSplit) -> Result<Generator> {
    let frame = Frame::new(split)?;
    let n = split.dim();
    let mut ot = CMatrix::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            if frame.distinct(a, b) {
                ot[(a, b)] = C64::new(0.0, 1.0) * frame.vt[(a, b)] / (frame.e[a] - frame.e[b]);
            }
        }
    }
    let first_order_residual = frame.residual(&ot);
    let o = HermitianOperator::new(&frame.w * ot * frame.w.adjoint())?;
    Ok(Generator { o, first_order_residual })
}

/// Wraps an externally constructed generator (e.g. a closed-form one) with
/// the same residual bookkeeping as [`solve_generator`].
pub fn generator_from(split: &PerturbationSplit, o: HermitianOperator) -> Result<Generator> {
    if o.dim() != split.dim() {
        return Err(Error::DimensionMismatch(o.dim(), split.dim()));
    }
    let frame = Frame::new(split)?;
    let ot = frame.w.adjoint() * o.matrix() * &frame.w;
    let first_order_residual = frame.residual(&ot);
    Ok(Generator { o, first_order_residual })
}

/// `H₀` eigenbasis with `V` expressed in it.
struct Frame {
    w: CMatrix,
    e: Vec<f64>,
    vt: CMatrix,
    tol: f64,
}

impl Frame {
    fn new(split: &PerturbationSplit) -> Result<Self> {
        let spec = eigendecompose(&split.h0)?;
        let w = spec.eigenvectors;
        let vt = w.adjoint() * split.v.matrix() * &w;
        let tol = DEGENERACY_TOL * operator_norm_of(&spec.eigenvalues).max(1.0);
        Ok(Self { w, e: spec.eigenvalues, vt, tol })
    }

    fn distinct(&self, a: usize, b: usize) -> bool {
        (self.e[a] - self.e[b]).abs() > self.tol
    }

    /// Off-block Frobenius norm of `V − i[O, H₀]`, using
    /// `(V − i[O,H₀])_ab = V_ab + i O_ab (E_a − E_b)`.
    fn residual(&self, ot: &CMatrix) -> f64 {
        let n = self.e.len();
        let mut sq = 0.0;
        for b in 0..n {
            for a in 0..n {
                if self.distinct(a, b) {
                    let r = self.vt[(a, b)] + C64::new(0.0, 1.0) * ot[(a, b)] * (self.e[a] - self.e[b]);
                    sq += r.norm_sqr();
                }
            }
        }
        sq.sqrt()
    }
}

fn operator_norm_of(e: &[f64]) -> f64 {
    e.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `‖P M (1 − P)‖_F` with `P = B B†` for an orthonormal column set `B`.
pub fn block_coupling(m: &CMatrix, basis: &CMatrix) -> f64 {
    let p = basis * basis.adjoint();
    let q = CMatrix::identity(m.nrows(), m.ncols()) - &p;
    (p * m * q).norm()
}

/// `V − i[O, H₀]`.
pub fn first_order_remainder(split: &PerturbationSplit, gen: &Generator) -> CMatrix {
    let c = commutator(gen.o.matrix(), split.h0.matrix());
    split.v.matrix() - c * C64::new(0.0, 1.0)
}

/// Moments `h[n] = tr(Õⁿ)/D²` of the adjoint superoperator.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMomentTable {
    pub moments: MomentTable,
    /// Dimension `D` of the underlying operator space.
    pub dim: usize,
}

pub fn super_moments(o: &HermitianOperator, max_order: usize) -> SuperMomentTable {
    super_moments_from_eigenvalues(&eigenvalues(o), max_order)
}

/// `(1/D²) Σ_ij (λ_i − λ_j)ⁿ`. Odd orders vanish identically by antisymmetry.
pub fn super_moments_from_eigenvalues(lambda: &[f64], max_order: usize) -> SuperMomentTable {
    let d = lambda.len();
    let mut h = vec![0.0; max_order + 1];
    for i in 0..d {
        for j in (i + 1)..d {
            let diff = lambda[i] - lambda[j];
            let sq = diff * diff;
            let mut p = sq;
            for n in (2..=max_order).step_by(2) {
                h[n] += 2.0 * p;
                p *= sq;
            }
        }
    }
    let norm = (d * d) as f64;
    for x in h.iter_mut() {
        *x /= norm;
    }
    h[0] = 1.0;
    let moments = MomentTable::from_values(h).expect("even super moments are non-negative");
    SuperMomentTable { moments, dim: d }
}

/// `(c₀, c₁, c₂)` of `e^{−iÕt}` at superoperator time `t = 1`.
pub fn downfold_coefficients(sm: &SuperMomentTable, cfg: &OdeSolverConfig) -> Result<[C64; 3]> {
    let traj = variational_coefficients(&sm.moments, 2, &[0.0, 1.0], cfg)?;
    let c = traj.last().expect("two grid points");
    Ok([c[0], c[1], c[2]])
}

/// Second-order Taylor coefficients of `e^{−i[O,·]}`.
pub const TAYLOR_COEFFICIENTS: [C64; 3] =
    [C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: -1.0 }, C64 { re: -0.5, im: 0.0 }];

#[derive(Clone, Debug)]
pub struct DownfoldResult {
    pub coefficients: [C64; 3],
    pub h_effective: HermitianOperator,
    /// Orthonormal columns spanning the low-energy subspace.
    pub basis: CMatrix,
    /// `‖B†H'B − (B†H'B)†‖_max` before symmetrization.
    pub asymmetry: f64,
}

fn check_orthonormal(basis: &CMatrix, dim: usize) -> Result<()> {
    if basis.nrows() != dim {
        return Err(Error::DimensionMismatch(basis.nrows(), dim));
    }
    let k = basis.ncols();
    let dev = max_abs(&(basis.adjoint() * basis - CMatrix::identity(k, k)));
    if dev > 1e-10 {
        return Err(Error::NonOrthonormalBasis(dev));
    }
    Ok(())
}

/// `B† [c₀H + c₁[O,H] + c₂[O,[O,H]]] B` with `H = H₀ + V`.
pub fn effective_hamiltonian(
    split: &PerturbationSplit,
    gen: &Generator,
    c: [C64; 3],
    basis: &CMatrix,
) -> Result<DownfoldResult> {
    check_orthonormal(basis, split.dim())?;
    let h = split.total();
    let o = gen.o.matrix();
    let first = commutator(o, h.matrix());
    let second = commutator(o, &first);
    let full = h.matrix() * c[0] + first * c[1] + second * c[2];
    let proj = basis.adjoint() * full * basis;
    let asymmetry = max_abs(&(&proj - proj.adjoint()));
    let h_effective = HermitianOperator::new(proj)?;
    Ok(DownfoldResult { coefficients: c, h_effective, basis: basis.clone(), asymmetry })
}

/// Ordinary second-order result `B† (H₀ − (i/2)[O, V]) B`.
pub fn standard_second_order(
    split: &PerturbationSplit,
    gen: &Generator,
    basis: &CMatrix,
) -> Result<HermitianOperator> {
    check_orthonormal(basis, split.dim())?;
    let c = commutator(gen.o.matrix(), split.v.matrix());
    let full = split.h0.matrix() - c * C64::new(0.0, 0.5);
    HermitianOperator::new(basis.adjoint() * full * basis)
}

/// Unnormalized cardinal sine `sin(x)/x`, `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Spectral norm of the generator (sets the perturbation scale).
pub fn generator_norm(gen: &Generator) -> f64 {
    operator_norm(&gen.o)
}
