//! Dormand–Prince 5(4) stepping for the second-order model ODE written as a
//! first-order system in `(v, v')`.

use crate::error::{Error, Result};

pub(crate) type State = [f64; 2];

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

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
        }
    }
}

/// One Dormand–Prince step. Returns the 5th-order solution and the embedded
/// error vector.
pub(crate) fn dp5_step<F>(f: &F, t: f64, y: &State, h: f64) -> (State, State)
where
    F: Fn(f64, &State) -> State,
{
    let k1 = f(t, y);
    let y2 = [y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1]];
    let k2 = f(t + C2 * h, &y2);
    let y3 = lin(y, h, &[(A31, &k1), (A32, &k2)]);
    let k3 = f(t + C3 * h, &y3);
    let y4 = lin(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
    let k4 = f(t + C4 * h, &y4);
    let y5 = lin(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
    let k5 = f(t + C5 * h, &y5);
    let y6 = lin(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    );
    let k6 = f(t + h, &y6);
    let y_new = lin(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err)
}

fn lin(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct Outcome {
    pub t: f64,
    pub y: State,
    pub stopped: bool,
}

/// Adaptive integration from `t0` to `t_end` (`t_end > t0`). `on_step` sees
/// every accepted step as `(t_prev, y_prev, t, y)` and may stop early.
pub(crate) fn integrate<F, S>(
    f: &F,
    t0: f64,
    y0: State,
    t_end: f64,
    h_max: f64,
    tol: Tolerances,
    mut on_step: S,
) -> Result<Outcome>
where
    F: Fn(f64, &State) -> State,
    S: FnMut(f64, &State, f64, &State) -> Control,
{
    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut h = (span * 1e-3).min(h_max);
    let h_min = span.abs().max(t0.abs()) * 1e-15;
    let mut steps = 0usize;
    while t < t_end {
        if steps > 5_000_000 {
            return Err(Error::Integration {
                t,
                reason: "step budget exhausted".into(),
            });
        }
        steps += 1;
        let last = t + h >= t_end;
        let h_try = if last { t_end - t } else { h };
        let (y_new, err) = dp5_step(f, t, &y, h_try);
        if !(y_new[0].is_finite() && y_new[1].is_finite()) {
            h *= 0.25;
            if h < h_min {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite state".into(),
                });
            }
            continue;
        }
        let mut e2 = 0.0;
        for i in 0..2 {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            e2 += (err[i] / sc).powi(2);
        }
        let e = (e2 / 2.0).sqrt();
        if e <= 1.0 {
            let t_new = if last { t_end } else { t + h_try };
            let ctl = on_step(t, &y, t_new, &y_new);
            t = t_new;
            y = y_new;
            if let Control::Stop = ctl {
                return Ok(Outcome { t, y, stopped: true });
            }
        }
        let factor = if e == 0.0 {
            5.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h_try * factor).min(h_max);
        if h < h_min {
            return Err(Error::Integration {
                t,
                reason: "step size underflow".into(),
            });
        }
    }
    Ok(Outcome {
        t,
        y,
        stopped: false,
    })
}
