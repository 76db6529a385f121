//! Adaptive Dormand–Prince 5(4) integration of an autonomous matrix ODE.

use crate::error::{Error, Result};
use crate::fock::CMatrix;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin(y: &CMatrix, terms: &[(f64, &CMatrix)], h: f64) -> CMatrix {
    let mut out = y.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            out.zip_apply(k, |o, kv| *o += kv * (c * h));
        }
    }
    out
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrates `dy/dt = f(y)` from `t = 0`, returning `y` at each of the
/// non-decreasing `times`. `after_step` runs on every accepted step and
/// reports whether it modified the state.
pub fn integrate<F, G>(
    f: F,
    y0: CMatrix,
    times: &[f64],
    tol: f64,
    h_init: f64,
    mut after_step: G,
) -> Result<Vec<CMatrix>>
where
    F: Fn(&CMatrix) -> CMatrix,
    G: FnMut(&mut CMatrix) -> Result<bool>,
{
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Domain("sample times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("sample times must be non-decreasing".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    let mut t = 0.0;
    let mut h = h_init.max(f64::MIN_POSITIVE);
    let mut k1 = f(&y);
    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 4.0 * f64::EPSILON * t.max(target) {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }
            let k2 = f(&lin(&y, &[(A21, &k1)], step));
            let k3 = f(&lin(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = f(&lin(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
            let k5 = f(&lin(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step));
            let k6 = f(&lin(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                step,
            ));
            let y_new = lin(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
            let k7 = f(&y_new);
            let err_vec = lin(
                &CMatrix::zeros(y.nrows(), y.ncols()),
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                step,
            );
            let scale = tol * max_abs(&y).max(max_abs(&y_new)).max(1.0);
            let err = max_abs(&err_vec) / scale;
            let err = if err.is_nan() { f64::INFINITY } else { err };
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                if after_step(&mut y)? {
                    k1 = f(&y);
                } else {
                    k1 = k7;
                }
                if !last {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
                if h <= 4.0 * f64::EPSILON * t.max(target) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
