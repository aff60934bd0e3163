//! One-dimensional Hubbard chain and its downfolding onto a Heisenberg model.
//!
//! Fermionic modes are numbered `2·site + spin` (↑ = 0, ↓ = 1) and a Fock
//! state is the bit word of occupied modes. Operator signs follow the
//! Jordan–Wigner string over lower-numbered modes.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{log_grid, relative_error};
use crate::downfold::{
    downfold_coefficients, generator_from, sinc, super_moments_from_eigenvalues, Generator, PerturbationSplit,
    SuperMomentTable,
};
use crate::ode::OdeSolverConfig;
use crate::spectral::{eigendecompose, eigenvalues};
use crate::{CMatrix, Error, HermitianOperator, Result, C64};

pub const UP: usize = 0;
pub const DOWN: usize = 1;

/// Largest chain handled without an explicit opt-in.
pub const DEFAULT_MAX_SITES: usize = 6;
/// Hard limit: beyond this the dense Fock space no longer fits in memory.
pub const MAX_SITES: usize = 7;

pub fn mode(site: usize, spin: usize) -> usize {
    2 * site + spin
}

pub fn is_occupied(word: u32, mode: usize) -> bool {
    word >> mode & 1 == 1
}

/// `(−1)^{number of occupied modes below m}`.
fn string_sign(word: u32, m: usize) -> f64 {
    if (word & ((1u32 << m) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c_m |word⟩`.
pub fn annihilate(word: u32, m: usize) -> Option<(u32, f64)> {
    is_occupied(word, m).then(|| (word ^ (1 << m), string_sign(word, m)))
}

/// `c†_m |word⟩`.
pub fn create(word: u32, m: usize) -> Option<(u32, f64)> {
    (!is_occupied(word, m)).then(|| (word | (1 << m), string_sign(word, m)))
}

/// `c†_a c_b |word⟩`.
pub fn hop(word: u32, a: usize, b: usize) -> Option<(u32, f64)> {
    let (w, s1) = annihilate(word, b)?;
    let (w, s2) = create(w, a)?;
    Some((w, s1 * s2))
}

fn count_spin(word: u32, n_sites: usize, spin: usize) -> u32 {
    (0..n_sites).filter(|&i| is_occupied(word, mode(i, spin))).count() as u32
}

fn doublons(word: u32, n_sites: usize) -> u32 {
    (0..n_sites).filter(|&i| is_occupied(word, mode(i, UP)) && is_occupied(word, mode(i, DOWN))).count() as u32
}

fn singly_occupied(word: u32, n_sites: usize) -> bool {
    (0..n_sites).all(|i| is_occupied(word, mode(i, UP)) != is_occupied(word, mode(i, DOWN)))
}

/// Ordered subset of Fock states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    n_sites: usize,
    states: Vec<u32>,
    /// Position of each word in `states`, `u32::MAX` if absent.
    index: Vec<u32>,
}

impl FockBasis {
    fn filtered(n_sites: usize, keep: impl Fn(u32) -> bool) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&n_sites) {
            return Err(Error::InvalidParameter(format!("n_sites must lie in 2..={MAX_SITES}, got {n_sites}")));
        }
        let size = 1usize << (2 * n_sites);
        let mut index = vec![u32::MAX; size];
        let mut states = Vec::new();
        for w in 0..size as u32 {
            if keep(w) {
                index[w as usize] = states.len() as u32;
                states.push(w);
            }
        }
        Ok(Self { n_sites, states, index })
    }

    /// All `4^N` states.
    pub fn full(n_sites: usize) -> Result<Self> {
        Self::filtered(n_sites, |_| true)
    }

    pub fn with_particles(n_sites: usize, particles: u32) -> Result<Self> {
        Self::filtered(n_sites, |w| w.count_ones() == particles)
    }

    pub fn with_spins(n_sites: usize, n_up: u32, n_down: u32) -> Result<Self> {
        Self::filtered(n_sites, |w| count_spin(w, n_sites, UP) == n_up && count_spin(w, n_sites, DOWN) == n_down)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, word: u32) -> Option<usize> {
        match self.index.get(word as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }

    /// Basis positions keyed by `(particle number, 2·S_z)`.
    pub fn sectors(&self) -> BTreeMap<(u32, i32), Vec<usize>> {
        let mut map: BTreeMap<(u32, i32), Vec<usize>> = BTreeMap::new();
        for (k, &w) in self.states.iter().enumerate() {
            let up = count_spin(w, self.n_sites, UP) as i32;
            let down = count_spin(w, self.n_sites, DOWN) as i32;
            map.entry(((up + down) as u32, up - down)).or_default().push(k);
        }
        map
    }

    /// Dense matrix of `Σ coeff · c†_a c_b` over the given terms.
    fn one_body(&self, terms: &[(usize, usize, f64)]) -> Result<CMatrix> {
        let n = self.len();
        let mut m = CMatrix::zeros(n, n);
        for (col, &w) in self.states.iter().enumerate() {
            for &(a, b, coeff) in terms {
                if let Some((w2, sign)) = hop(w, a, b) {
                    let row = self.index_of(w2).ok_or_else(not_closed)?;
                    m[(row, col)] += C64::new(coeff * sign, 0.0);
                }
            }
        }
        Ok(m)
    }
}

fn not_closed() -> Error {
    Error::InvalidParameter("Fock basis is not closed under hopping".into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl Boundary {
    pub fn tag(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            _ => Err(Error::InvalidParameter(format!("unknown boundary '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HubbardParams {
    pub n_sites: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub boundary: Boundary,
}

impl HubbardParams {
    pub fn new(n_sites: usize, hopping: f64, interaction: f64, boundary: Boundary) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&n_sites) {
            return Err(Error::InvalidParameter(format!("n_sites must lie in 2..={MAX_SITES}, got {n_sites}")));
        }
        if !(interaction > 0.0 && interaction.is_finite()) {
            return Err(Error::InvalidParameter(format!("U must be positive, got {interaction}")));
        }
        if !(hopping >= 0.0 && hopping.is_finite()) {
            return Err(Error::InvalidParameter(format!("t must be non-negative, got {hopping}")));
        }
        Ok(Self { n_sites, hopping, interaction, boundary })
    }

    pub fn ratio(&self) -> f64 {
        self.hopping / self.interaction
    }

    /// Nearest-neighbour bonds, each listed once. A periodic two-site chain
    /// has a single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        bonds(self.n_sites, self.boundary)
    }
}

fn bonds(n: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut b: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic && n > 2 {
        b.push((n - 1, 0));
    }
    b
}

/// `−Σ_{⟨ij⟩σ} (c†_iσ c_jσ + h.c.)`, unit hopping.
fn hopping_terms(n: usize, boundary: Boundary) -> Vec<(usize, usize, f64)> {
    let mut terms = Vec::new();
    for (i, j) in bonds(n, boundary) {
        for s in [UP, DOWN] {
            terms.push((mode(i, s), mode(j, s), -1.0));
            terms.push((mode(j, s), mode(i, s), -1.0));
        }
    }
    terms
}

/// `H₀ = U Σ n↑n↓` and `V = −t Σ (c†c + h.c.)`.
pub fn hubbard_hamiltonian(basis: &FockBasis, params: &HubbardParams) -> Result<PerturbationSplit> {
    let diag: Vec<f64> =
        basis.states().iter().map(|&w| params.interaction * doublons(w, basis.n_sites()) as f64).collect();
    let v = basis.one_body(&hopping_terms(basis.n_sites(), params.boundary))? * C64::new(params.hopping, 0.0);
    PerturbationSplit::new(HermitianOperator::from_real_diagonal(&diag), HermitianOperator::new(v)?)
}

/// Second-quantized generator
/// `O = −i(t/U) Σ_{⟨ij⟩σ} (n_{iσ̄} c†_iσ c_jσ h_{jσ̄} − h_{iσ̄} c†_iσ c_jσ n_{jσ̄})`,
/// with the bond sum over both hopping directions.
pub fn printed_generator(basis: &FockBasis, params: &HubbardParams) -> Result<HermitianOperator> {
    let n = basis.len();
    let mut o = CMatrix::zeros(n, n);
    let pref = C64::new(0.0, -params.ratio());
    for (col, &w) in basis.states().iter().enumerate() {
        for (i, j) in params.bonds() {
            for (a, b) in [(i, j), (j, i)] {
                for s in [UP, DOWN] {
                    let sb = 1 - s;
                    // Number operators on the other spin commute with the hop.
                    let na = is_occupied(w, mode(a, sb));
                    let nb = is_occupied(w, mode(b, sb));
                    let weight = match (na, nb) {
                        (true, false) => 1.0,
                        (false, true) => -1.0,
                        _ => continue,
                    };
                    if let Some((w2, sign)) = hop(w, mode(a, s), mode(b, s)) {
                        let row = basis.index_of(w2).ok_or_else(not_closed)?;
                        o[(row, col)] += pref * (weight * sign);
                    }
                }
            }
        }
    }
    HermitianOperator::new(o)
}

/// The printed generator together with how much of `V` it leaves coupled.
pub fn hubbard_generator(basis: &FockBasis, params: &HubbardParams) -> Result<Generator> {
    let split = hubbard_hamiltonian(basis, params)?;
    generator_from(&split, printed_generator(basis, params)?)
}

/// Fock word of spin configuration `s`: bit `N−1−i` of `s` set means site
/// `i` holds a ↓ electron, otherwise ↑ (site 0 is the most significant).
pub fn spin_to_fock(n_sites: usize, s: usize) -> u32 {
    (0..n_sites).fold(0u32, |w, i| {
        let spin = s >> (n_sites - 1 - i) & 1;
        w | 1 << mode(i, spin)
    })
}

/// Columns embedding the `2^N` spin states as singly-occupied Fock states.
pub fn singly_occupied_basis(basis: &FockBasis) -> Result<CMatrix> {
    let n = basis.n_sites();
    let dim = 1usize << n;
    let mut p = CMatrix::zeros(basis.len(), dim);
    for s in 0..dim {
        let row = basis
            .index_of(spin_to_fock(n, s))
            .ok_or_else(|| Error::InvalidParameter("basis lacks singly-occupied states".into()))?;
        p[(row, s)] = C64::new(1.0, 0.0);
    }
    Ok(p)
}

/// Which coefficients feed the improved Heisenberg model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CoefficientSource {
    /// `c₁ = −i sinc(√(3/2)·√(2N+1)·t/U)`, `c₂ = −½ sinc²(√(3/2)·√(2N+1)·t/(2U))`.
    #[default]
    Printed,
    /// Variational endpoint from the super-moments of the Fock-space generator.
    Ode,
}

impl CoefficientSource {
    pub fn tag(self) -> &'static str {
        match self {
            CoefficientSource::Printed => "printed",
            CoefficientSource::Ode => "ode",
        }
    }
}

impl std::str::FromStr for CoefficientSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(CoefficientSource::Printed),
            "ode" => Ok(CoefficientSource::Ode),
            _ => Err(Error::InvalidParameter(format!("unknown coefficient source '{s}'"))),
        }
    }
}

/// `(c₁, c₂)` from the closed-form sinc expressions (stated for `N ≥ 3`).
pub fn printed_coefficients(params: &HubbardParams) -> (C64, C64) {
    let x = (1.5f64).sqrt() * params.ratio() * ((2 * params.n_sites + 1) as f64).sqrt();
    let s = sinc(x / 2.0);
    (C64::new(0.0, -sinc(x)), C64::new(-0.5 * s * s, 0.0))
}

/// Super-moments of the full Fock-space generator at `t/U = 1`; other
/// ratios follow by scaling `h[n] → (t/U)ⁿ h[n]`.
#[derive(Clone, Debug)]
pub struct GeneratorMoments {
    unit: SuperMomentTable,
}

impl GeneratorMoments {
    /// The generator conserves `(N↑, N↓)`, so its spectrum is assembled
    /// from the sector blocks.
    pub fn new(n_sites: usize, boundary: Boundary) -> Result<Self> {
        let params = HubbardParams::new(n_sites, 1.0, 1.0, boundary)?;
        let mut lambda = Vec::with_capacity(1 << (2 * n_sites));
        for up in 0..=n_sites as u32 {
            for down in 0..=n_sites as u32 {
                let basis = FockBasis::with_spins(n_sites, up, down)?;
                lambda.extend(eigenvalues(&printed_generator(&basis, &params)?));
            }
        }
        Ok(Self { unit: super_moments_from_eigenvalues(&lambda, 6) })
    }

    pub fn at(&self, ratio: f64) -> SuperMomentTable {
        SuperMomentTable { moments: self.unit.moments.rescaled(1.0 / ratio), dim: self.unit.dim }
    }

    /// Endpoint `(c₁, c₂)`.
    pub fn coefficients(&self, ratio: f64, cfg: &OdeSolverConfig) -> Result<(C64, C64)> {
        let c = downfold_coefficients(&self.at(ratio), cfg)?;
        Ok((c[1], c[2]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HubbardCoefficients {
    pub printed: (C64, C64),
    pub ode: (C64, C64),
}

impl HubbardCoefficients {
    pub fn get(&self, source: CoefficientSource) -> (C64, C64) {
        match source {
            CoefficientSource::Printed => self.printed,
            CoefficientSource::Ode => self.ode,
        }
    }
}

pub fn hubbard_coefficients(params: &HubbardParams, cfg: &OdeSolverConfig) -> Result<HubbardCoefficients> {
    let ode = GeneratorMoments::new(params.n_sites, params.boundary)?.coefficients(params.ratio(), cfg)?;
    Ok(HubbardCoefficients { printed: printed_coefficients(params), ode })
}

/// `Σ (𝟙 − σᵢ·σⱼ)` over ordered neighbour pairs, with Pauli matrices.
pub fn exchange_sum(n_sites: usize, boundary: Boundary) -> HermitianOperator {
    let dim = 1usize << n_sites;
    let mut m = CMatrix::zeros(dim, dim);
    for (i, j) in bonds(n_sites, boundary) {
        let (mi, mj) = (1usize << (n_sites - 1 - i), 1usize << (n_sites - 1 - j));
        for s in 0..dim {
            if (s & mi == 0) != (s & mj == 0) {
                // Antiparallel pair: 1 − σ·σ = 2 − 2·swap, counted once per direction.
                m[(s, s)] += C64::new(4.0, 0.0);
                m[(s ^ mi ^ mj, s)] -= C64::new(4.0, 0.0);
            }
        }
    }
    HermitianOperator::new(m).expect("exchange operator is real symmetric")
}

/// `iс₁ + c₂`, the factor that rescales the exchange coupling. Real for
/// coefficients from a symmetric super-moment table.
pub fn improvement_factor(c1: C64, c2: C64) -> f64 {
    (C64::new(0.0, 1.0) * c1 + c2).re
}

/// `H^(2) = −t²/(2U) Σ(𝟙 − σ·σ)` and `H_var = −(t²/U)(ic₁ + c₂) Σ(𝟙 − σ·σ)`.
pub fn heisenberg_models(params: &HubbardParams, c1: C64, c2: C64) -> (HermitianOperator, HermitianOperator) {
    let s = exchange_sum(params.n_sites, params.boundary);
    let j = params.hopping * params.hopping / params.interaction;
    (s.scaled(-0.5 * j), s.scaled(-j * improvement_factor(c1, c2)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HubbardSweepConfig {
    pub n_sites: usize,
    pub interaction: f64,
    pub boundary: Boundary,
    pub t_over_u: Vec<f64>,
    pub coefficients: CoefficientSource,
    /// Required for `N = 7`.
    pub allow_large: bool,
    pub ode: OdeSolverConfig,
}

impl Default for HubbardSweepConfig {
    fn default() -> Self {
        Self {
            n_sites: 5,
            interaction: 1.0,
            boundary: Boundary::Periodic,
            t_over_u: log_grid(0.01, 0.5, 50),
            coefficients: CoefficientSource::Printed,
            allow_large: false,
            ode: OdeSolverConfig::default(),
        }
    }
}

impl HubbardSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites > DEFAULT_MAX_SITES && !self.allow_large {
            return Err(Error::InvalidParameter(format!(
                "N = {} exceeds {DEFAULT_MAX_SITES} sites; opt in explicitly for large chains",
                self.n_sites
            )));
        }
        HubbardParams::new(self.n_sites, 0.0, self.interaction, self.boundary)?;
        if self.t_over_u.is_empty() || self.t_over_u.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParameter("t/U grid must be non-empty and positive".into()));
        }
        self.ode.validate()
    }
}

/// One non-zero level at one `t/U`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelError {
    /// Position among the non-zero levels, ascending in energy.
    pub level_index: usize,
    pub e_exact: f64,
    pub e_std: f64,
    pub e_var: f64,
    pub err_std: f64,
    pub err_var: f64,
    /// Weight of the exact eigenvector in the singly-occupied subspace.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HubbardPoint {
    pub t_over_u: f64,
    pub c1: C64,
    pub c2: C64,
    pub levels: Vec<LevelError>,
    pub first_half_std: f64,
    pub first_half_var: f64,
    pub upper_half_std: f64,
    pub upper_half_var: f64,
    pub min_weight: f64,
    /// Some selected eigenvector has singly-occupied weight ≤ 1/2.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HubbardSweep {
    pub config: HubbardSweepConfig,
    pub points: Vec<HubbardPoint>,
}

/// One `(N↑, N↓)` block of the half-filled sector.
struct Block {
    doublons: Vec<f64>,
    hopping: CMatrix,
    single: Vec<bool>,
}

/// Exact energies of the half-filled sector compared with both Heisenberg
/// models, level by level.
pub fn hubbard_sweep(cfg: &HubbardSweepConfig) -> Result<HubbardSweep> {
    cfg.validate()?;
    let n = cfg.n_sites;
    let unit = HubbardParams::new(n, 1.0, 1.0, cfg.boundary)?;
    let mut blocks = Vec::new();
    for up in 0..=n as u32 {
        let basis = FockBasis::with_spins(n, up, n as u32 - up)?;
        let split = hubbard_hamiltonian(&basis, &unit)?;
        blocks.push(Block {
            doublons: basis.states().iter().map(|&w| doublons(w, n) as f64).collect(),
            hopping: split.v.into_matrix(),
            single: basis.states().iter().map(|&w| singly_occupied(w, n)).collect(),
        });
    }
    let exchange = eigenvalues(&exchange_sum(n, cfg.boundary));
    let moments = match cfg.coefficients {
        CoefficientSource::Ode => Some(GeneratorMoments::new(n, cfg.boundary)?),
        CoefficientSource::Printed => None,
    };
    let points = cfg
        .t_over_u
        .par_iter()
        .map(|&ratio| {
            let params = HubbardParams::new(n, ratio * cfg.interaction, cfg.interaction, cfg.boundary)?;
            let (c1, c2) = match &moments {
                Some(m) => m.coefficients(ratio, &cfg.ode)?,
                None => printed_coefficients(&params),
            };
            sweep_point(&params, &blocks, &exchange, c1, c2)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HubbardSweep { config: cfg.clone(), points })
}

fn sweep_point(params: &HubbardParams, blocks: &[Block], exchange: &[f64], c1: C64, c2: C64) -> Result<HubbardPoint> {
    let (t, u) = (params.hopping, params.interaction);
    let mut states: Vec<(f64, f64)> = Vec::new();
    for b in blocks {
        let mut h = &b.hopping * C64::new(t, 0.0);
        for (k, d) in b.doublons.iter().enumerate() {
            h[(k, k)] += C64::new(u * d, 0.0);
        }
        let spec = eigendecompose(&HermitianOperator::new(h)?)?;
        for (k, &e) in spec.eigenvalues.iter().enumerate() {
            let v = spec.eigenvectors.column(k);
            let w: f64 = b.single.iter().zip(v.iter()).filter(|(s, _)| **s).map(|(_, x)| x.norm_sqr()).sum();
            states.push((e, w));
        }
    }
    let norm = states.iter().fold(0.0f64, |a, s| a.max(s.0.abs()));
    // Keep the 2^N states that live most in the spin subspace.
    states.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    states.truncate(exchange.len());
    let min_weight = states.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    states.sort_by(|a, b| a.0.total_cmp(&b.0));

    let j = t * t / u;
    let f = improvement_factor(c1, c2);
    let mut e_std: Vec<f64> = exchange.iter().map(|x| -0.5 * j * x).collect();
    let mut e_var: Vec<f64> = exchange.iter().map(|x| -j * f * x).collect();
    e_std.sort_by(f64::total_cmp);
    e_var.sort_by(f64::total_cmp);

    let levels: Vec<LevelError> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0.abs() >= 1e-12 * norm)
        .enumerate()
        .map(|(level_index, (k, &(e, w)))| LevelError {
            level_index,
            e_exact: e,
            e_std: e_std[k],
            e_var: e_var[k],
            err_std: relative_error(e, e_std[k]),
            err_var: relative_error(e, e_var[k]),
            weight: w,
        })
        .collect();
    let half = levels.len() / 2;
    let mean = |ls: &[LevelError], pick: fn(&LevelError) -> f64| {
        if ls.is_empty() {
            f64::NAN
        } else {
            ls.iter().map(pick).sum::<f64>() / ls.len() as f64
        }
    };
    let (lo, hi) = levels.split_at(half);
    Ok(HubbardPoint {
        t_over_u: params.ratio(),
        c1,
        c2,
        first_half_std: mean(lo, |l| l.err_std),
        first_half_var: mean(lo, |l| l.err_var),
        upper_half_std: mean(hi, |l| l.err_std),
        upper_half_var: mean(hi, |l| l.err_var),
        min_weight,
        flagged: min_weight <= 0.5,
        levels,
    })
}
