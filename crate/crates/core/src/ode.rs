//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size real systems.
//!
//! Output times are hit exactly by clipping the step, so sampled values carry
//! the full local accuracy of the method instead of an interpolant's.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Hard cap on accepted + rejected steps per call.
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-12,
            rtol: 1e-10,
            max_steps: 5_000_000,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince integrator for `dy/dt = f(t, y)` with `y ∈ ℝᴺ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dopri5 {
    pub tol: Tolerances,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Dopri5 { tol }
    }

    /// Integrates from `(t0, y0)` and returns the state at every time in
    /// `grid`, which must be non-decreasing and start at or after `t0`.
    pub fn integrate<const N: usize, F>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; N],
        grid: &[f64],
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = Vec::with_capacity(grid.len());
        let mut t = t0;
        let mut y = y0;
        let mut h = 0.0;
        let mut steps = 0usize;
        for &target in grid {
            if !(target >= t) {
                return Err(Error::Numerical(format!(
                    "output time {target} precedes current time {t}"
                )));
            }
            (t, y, h) = self.advance_inner(&rhs, t, y, target, h, &mut steps)?;
            out.push(y);
        }
        Ok(out)
    }

    /// Integrates from `(t0, y0)` to `t1` and returns the final state.
    pub fn advance<const N: usize, F>(&self, rhs: F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut steps = 0;
        Ok(self.advance_inner(&rhs, t0, y0, t1, 0.0, &mut steps)?.1)
    }

    fn error_norm<const N: usize>(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
            let r = err[i] / scale;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<const N: usize, F>(&self, rhs: &F, t: f64, y: &[f64; N], span: f64) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let f0 = rhs(t, y);
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let scale = self.tol.atol + self.tol.rtol * y[i].abs();
            d0 += (y[i] / scale).powi(2);
            d1 += (f0[i] / scale).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span.abs()).max(span.abs() * 1e-12)
    }

    fn advance_inner<const N: usize, F>(
        &self,
        rhs: &F,
        mut t: f64,
        mut y: [f64; N],
        t1: f64,
        mut h: f64,
        steps: &mut usize,
    ) -> Result<(f64, [f64; N], f64)>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        if t1 == t {
            return Ok((t, y, h));
        }
        if h <= 0.0 {
            h = self.initial_step(rhs, t, &y, t1 - t);
        }
        let mut k1 = rhs(t, &y);
        loop {
            let remaining = t1 - t;
            // Land exactly on the target; absorb tiny leftovers.
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };

            let k2 = rhs(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(
                t + C4 * step,
                &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = rhs(
                t + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + step,
                &axpy(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { t1 } else { t + step };
            let k7 = rhs(t_new, &y_new);
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let norm = self.error_norm(&y, &y_new, &err);
            if !norm.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite error estimate at t = {t} (step {step:e})"
                )));
            }
            *steps += 1;
            if *steps > self.tol.max_steps {
                return Err(Error::Numerical(format!(
                    "step budget of {} exhausted at t = {t}, step {step:e}",
                    self.tol.max_steps
                )));
            }
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if norm <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                // Keep the proposed size; a clipped final step says nothing
                // about the scale of the dynamics.
                h = if last { h.max(step * factor) } else { step * factor };
                if last {
                    return Ok((t, y, h));
                }
            } else {
                h = step * factor.min(1.0);
                if h < (t.abs() + remaining.abs()) * f64::EPSILON {
                    return Err(Error::Numerical(format!(
                        "step size underflow at t = {t} (error norm {norm:e})"
                    )));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let solver = Dopri5::default();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let ys = solver.integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], &grid).unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let solver = Dopri5::default();
        let y = solver
            .advance(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 100.0)
            .unwrap();
        assert!((y[0] - 100f64.cos()).abs() < 1e-8);
        assert!((y[1] + 100f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn repeated_grid_points_are_allowed() {
        let solver = Dopri5::default();
        let ys = solver
            .integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[0.0, 0.0, 1.0, 1.0])
            .unwrap();
        assert_eq!(ys[0][0], 1.0);
        assert!((ys[3][0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let solver = Dopri5::default();
        assert!(solver
            .integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[1.0, 0.5])
            .is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let solver = Dopri5::new(Tolerances {
            max_steps: 10_000,
            ..Tolerances::default()
        });
        let res = solver.advance(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0);
        assert!(matches!(res, Err(Error::Numerical(_))));
    }
}
