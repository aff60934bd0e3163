//! Adaptive Dormand–Prince 5(4) integrator for complex systems.

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeSolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Singular values below `cutoff · σ_max` are treated as zero.
    pub pseudoinverse_cutoff: f64,
    pub max_steps: usize,
}

impl Default for OdeSolverConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, pseudoinverse_cutoff: 1e-10, max_steps: 1_000_000 }
    }
}

impl OdeSolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.pseudoinverse_cutoff > 0.0
            && self.max_steps > 0;
        if !ok {
            return Err(Error::InvalidParameter("solver tolerances and step limit must be positive".into()));
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `times[0]` and returns the state at every
/// entry of `times` (which must be strictly increasing).
pub fn integrate<F>(f: F, y0: &[C64], times: &[f64], cfg: &OdeSolverConfig) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    cfg.validate()?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid);
    }
    let n = y0.len();
    let mut out = Vec::with_capacity(times.len());
    let Some(&t0) = times.first() else {
        return Ok(out);
    };
    out.push(y0.to_vec());

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = vec![vec![C64::default(); n]; 7];
    let mut stage = vec![C64::default(); n];
    let mut y_new = vec![C64::default(); n];
    f(t, &y, &mut k[0]);

    let span = times.last().copied().unwrap_or(t0) - t0;
    let mut h = initial_step(&y, &k[0], span, cfg);
    let mut steps = 0usize;

    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::Integrator { time: t, reason: "step limit exceeded".into() });
            }
            let last = target - t <= h * (1.0 + 1e-12);
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        if A[s][j] != 0.0 {
                            acc += kj[i] * (step * A[s][j]);
                        }
                    }
                    stage[i] = acc;
                }
                let (_, rest) = k.split_at_mut(s);
                f(t + C[s] * step, &stage, &mut rest[0]);
            }
            // Stage 7 is evaluated at the fifth-order solution (FSAL).
            y_new.copy_from_slice(&stage);
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = C64::default();
                for (s, ks) in k.iter().enumerate() {
                    if E[s] != 0.0 {
                        e += ks[i] * (step * E[s]);
                    }
                }
                let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / scale).powi(2);
            }
            let err = (err_sq / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integrator { time: t, reason: "non-finite error estimate".into() });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y_new);
                let fsal = std::mem::take(&mut k[6]);
                k[0] = fsal;
                k[6] = vec![C64::default(); n];
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            h = if last && err <= 1.0 { h.max(proposed) } else { proposed };
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::Integrator { time: t, reason: "step size underflow".into() });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[C64], dy: &[C64], span: f64, cfg: &OdeSolverConfig) -> f64 {
    let n = y.len().max(1) as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, di) in y.iter().zip(dy) {
        let sc = cfg.abs_tol + cfg.rel_tol * yi.norm();
        d0 += (yi.norm() / sc).powi(2);
        d1 += (di.norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = -i y  ⇒  y = e^{-it}
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let ys = integrate(
            |_, y, dy| dy[0] = C64::new(0.0, -1.0) * y[0],
            &[C64::new(1.0, 0.0)],
            &times,
            &OdeSolverConfig::default(),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - C64::new(0.0, -t).exp()).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn coupled_rotation_is_accurate() {
        // y1' = y2, y2' = -y1
        let times = [0.0, 1.0, 3.0, 7.0];
        let ys = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            &times,
            &OdeSolverConfig::default(),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0].re - t.cos()).abs() < 1e-9);
            assert!((y[1].re + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_grid_and_step_limit() {
        let f = |_: f64, y: &[C64], dy: &mut [C64]| dy[0] = y[0];
        let y0 = [C64::new(1.0, 0.0)];
        assert!(matches!(
            integrate(f, &y0, &[0.0, 1.0, 1.0], &OdeSolverConfig::default()),
            Err(Error::InvalidTimeGrid)
        ));
        let cfg = OdeSolverConfig { max_steps: 2, ..Default::default() };
        assert!(matches!(integrate(f, &y0, &[0.0, 50.0], &cfg), Err(Error::Integrator { .. })));
    }
}
