//! Bessel functions of the first kind `J₀, J₁, J₂`.

/// `[J₀(x), J₁(x), J₂(x)]` by Miller's backward recurrence, normalized with
/// `J₀ + 2 Σₖ J₂ₖ = 1`.
pub fn bessel_j012(x: f64) -> [f64; 3] {
    if x == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    if x < 0.0 {
        let [j0, j1, j2] = bessel_j012(-x);
        return [j0, -j1, j2];
    }
    if x < 1e-4 {
        // Three terms of the power series are exact to double precision here.
        let q = 0.25 * x * x;
        return [
            1.0 - q + q * q / 4.0,
            0.5 * x * (1.0 - q / 2.0 + q * q / 12.0),
            q / 2.0 * (1.0 - q / 3.0 + q * q / 24.0),
        ];
    }
    // Start well above x so the minimal solution dominates.
    let mut start = (x + 36.0 + 6.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0_f64; // j_{k+1}
    let mut cur = 1e-30_f64; // j_k
    let mut norm = 0.0_f64;
    let mut low = [0.0_f64; 3];
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev; // now j_{k-1}
        let idx = k - 1;
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if idx <= 2 {
            low[idx] = cur;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in low.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += low[0];
    [low[0] / norm, low[1] / norm, low[2] / norm]
}
