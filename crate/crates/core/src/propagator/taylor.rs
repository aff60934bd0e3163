use crate::spectral::matrix_polynomial;
use crate::{HermitianOperator, Method, PropagatorMatrix, C64};

/// `c_j = (−it)ʲ / j!` for `j ≤ order`.
pub fn taylor_coefficients(t: f64, order: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut c = C64::new(1.0, 0.0);
    for j in 0..=order {
        out.push(c);
        c *= C64::new(0.0, -t) / (j + 1) as f64;
    }
    out
}

pub fn taylor_propagator(h: &HermitianOperator, t: f64, order: usize) -> PropagatorMatrix {
    PropagatorMatrix {
        entries: matrix_polynomial(h.matrix(), &taylor_coefficients(t, order)),
        time: t,
        method: Method::Taylor,
    }
}
