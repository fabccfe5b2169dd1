//! Adaptive Dormand–Prince 5(4) integrator with exact stops at requested
//! output abscissae.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            h_init: 1e-9,
            h_min: 1e-18,
            max_steps: 200_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(x, y)` from `x0` to the last entry of `outputs`
/// (ascending, all `> x0`) and returns the state at every output point.
///
/// `rhs` returns `false` when the state left its domain; the step is then
/// rejected and retried with a smaller size.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    x0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]) -> bool,
{
    let mut out = Vec::with_capacity(outputs.len());
    let mut x = x0;
    let mut y = y0;
    let mut h = opts.h_init;
    let mut k1 = [0.0; N];
    if !rhs(x, &y, &mut k1) {
        return Err(Error::NumericalFailure(format!("ode: initial state invalid at x = {x0}")));
    }
    let mut steps = 0usize;
    for &target in outputs {
        if target < x {
            return Err(Error::InvalidInput("ode: outputs must be ascending".into()));
        }
        while x < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NumericalFailure(format!("ode: step budget exhausted at x = {x}")));
            }
            let last = x + h >= target;
            let hs = if last { target - x } else { h };
            let mut k = [[0.0; N]; 6];
            let mut tmp = [0.0; N];
            let mut ok = true;
            macro_rules! stage {
                ($idx:expr, $c:expr, $($a:expr => $kk:expr),+) => {
                    if ok {
                        for j in 0..N {
                            tmp[j] = y[j] + hs * (0.0 $(+ $a * $kk[j])+);
                        }
                        ok = rhs(x + $c * hs, &tmp, &mut k[$idx]);
                    }
                };
            }
            stage!(0, C2, A21 => k1);
            stage!(1, C3, A31 => k1, A32 => k[0]);
            stage!(2, C4, A41 => k1, A42 => k[0], A43 => k[1]);
            stage!(3, C5, A51 => k1, A52 => k[0], A53 => k[1], A54 => k[2]);
            stage!(4, 1.0, A61 => k1, A62 => k[0], A63 => k[1], A64 => k[2], A65 => k[3]);
            let mut ynew = [0.0; N];
            if ok {
                for j in 0..N {
                    ynew[j] = y[j] + hs * (B1 * k1[j] + B3 * k[1][j] + B4 * k[2][j] + B5 * k[3][j] + B6 * k[4][j]);
                }
                ok = rhs(x + hs, &ynew, &mut k[5]);
            }
            let err = if ok {
                let mut acc = 0.0f64;
                for j in 0..N {
                    let e = hs
                        * (E1 * k1[j] + E3 * k[1][j] + E4 * k[2][j] + E5 * k[3][j] + E6 * k[4][j] + E7 * k[5][j]);
                    let sc = opts.atol + opts.rtol * y[j].abs().max(ynew[j].abs());
                    acc = acc.max((e / sc).abs());
                }
                acc
            } else {
                f64::INFINITY
            };
            if err.is_finite() && err <= 1.0 {
                x = if last { target } else { x + hs };
                y = ynew;
                k1 = k[5];
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = hs * fac;
                }
            } else {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.25)).clamp(0.1, 0.9) } else { 0.25 };
                h = hs * fac;
                if h < opts.h_min {
                    return Err(Error::NumericalFailure(format!("ode: step size underflow at x = {x}")));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
