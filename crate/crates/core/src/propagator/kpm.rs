use crate::bessel::bessel_j012;
use crate::spectral::{matrix_polynomial, operator_norm};
use crate::{HermitianOperator, Method, PropagatorMatrix, C64};

/// Constant term of the order-2 Chebyshev–Bessel expansion.
///
/// Truncating `e^{-ixτ} = J₀(τ) + 2 Σₖ (−i)ᵏ Jₖ(τ) Tₖ(x)` after `T₂` gives
/// `J₀ + 2J₂` in the monomial basis; `J₀ − 2J₂` is the sign variant that is
/// sometimes quoted. Only the former reproduces `U(0) = 1` to second order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KpmConvention {
    #[default]
    JacobiAnger,
    MinusTwoJ2,
}

impl KpmConvention {
    pub fn tag(self) -> &'static str {
        match self {
            KpmConvention::JacobiAnger => "jacobi-anger",
            KpmConvention::MinusTwoJ2 => "minus-two-j2",
        }
    }
}

impl std::str::FromStr for KpmConvention {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "jacobi-anger" => Ok(KpmConvention::JacobiAnger),
            "minus-two-j2" => Ok(KpmConvention::MinusTwoJ2),
            _ => Err(crate::Error::InvalidParameter(format!("unknown KPM convention '{s}'"))),
        }
    }
}

/// Monomial coefficients `[a₀, a₁, a₂]` of `U ≈ a₀ + a₁H + a₂H²` for an
/// operator of spectral norm `norm`.
pub fn kpm_coefficients(norm: f64, t: f64, convention: KpmConvention) -> Vec<C64> {
    if norm == 0.0 {
        return vec![C64::new(1.0, 0.0)];
    }
    let [j0, j1, j2] = bessel_j012(t * norm);
    let a0 = match convention {
        KpmConvention::JacobiAnger => j0 + 2.0 * j2,
        KpmConvention::MinusTwoJ2 => j0 - 2.0 * j2,
    };
    vec![
        C64::new(a0, 0.0),
        C64::new(0.0, -2.0 * j1 / norm),
        C64::new(-4.0 * j2 / (norm * norm), 0.0),
    ]
}

pub fn kpm_propagator(h: &HermitianOperator, t: f64) -> PropagatorMatrix {
    kpm_propagator_with(h, t, KpmConvention::default())
}

pub fn kpm_propagator_with(h: &HermitianOperator, t: f64, convention: KpmConvention) -> PropagatorMatrix {
    let norm = operator_norm(h);
    PropagatorMatrix {
        entries: matrix_polynomial(h.matrix(), &kpm_coefficients(norm, t, convention)),
        time: t,
        method: Method::Kpm,
    }
}
