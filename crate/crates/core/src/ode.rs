//! Adaptive Dormand-Prince 5(4) integrator for complex linear and nonlinear
//! ODE systems. Used to integrate master equations that serve as references
//! for the closed-form solutions.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::C64;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 1_000_000 }
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

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (`t1 >= t0`).
pub fn integrate<F>(mut f: F, t0: f64, y0: &DVector<C64>, t1: f64, tol: Tolerances) -> Result<DVector<C64>>
where
    F: FnMut(f64, &DVector<C64>) -> DVector<C64>,
{
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!("integration interval [{t0}, {t1}] is reversed")));
    }
    let mut y = y0.clone();
    if t1 == t0 {
        return Ok(y);
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut h = initial_step(&mut f, t0, &y, span, tol);
    let mut k1 = f(t, &y);
    let mut steps = 0;

    while t < t1 {
        if steps >= tol.max_steps {
            return Err(Error::NoConvergence(format!("step budget exhausted at t = {t}")));
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    ys.axpy(C64::new(h * A[s][j], 0.0), kj, C64::new(1.0, 0.0));
                }
            }
            k.push(f(t + C[s] * h, &ys));
        }
        // Seventh stage is evaluated at the fifth-order solution (FSAL).
        let mut y_new = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            if A[6][j] != 0.0 {
                y_new.axpy(C64::new(h * A[6][j], 0.0), kj, C64::new(1.0, 0.0));
            }
        }
        let mut err_sq = 0.0;
        for i in 0..y.len() {
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                e += kj[i] * E[j];
            }
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() * h / sc).powi(2);
        }
        let err = (err_sq / y.len() as f64).sqrt();

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k.pop().expect("seven stages");
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        if h < 1e-14 * span {
            return Err(Error::NoConvergence(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

/// Integrates through an ascending list of output times starting from `t0`.
pub fn integrate_to_times<F>(
    mut f: F,
    t0: f64,
    y0: &DVector<C64>,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<DVector<C64>>>
where
    F: FnMut(f64, &DVector<C64>) -> DVector<C64>,
{
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0.clone();
    for &target in times {
        y = integrate(&mut f, t, &y, target, tol)?;
        t = target;
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &DVector<C64>, span: f64, tol: Tolerances) -> f64
where
    F: FnMut(f64, &DVector<C64>) -> DVector<C64>,
{
    let d0 = y0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d1 = f(t0, y0).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 * span } else { 0.01 * (d0 + tol.atol) / d1 };
    h.min(span).max(1e-12 * span)
}
