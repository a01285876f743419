//! Independent reference solutions shared by the integration tests.
#![allow(dead_code)]

use chiral_qed::scattering::ScatteringEigenstate;
use chiral_qed::System;
use num_complex::Complex64 as C;

/// Coefficients of the retarded amplitude equations in the frame rotating at
/// `centre`:
///
/// ```text
/// ċ₁ = -(iδ₁ + w₁) c₁ - b' c₂(t - τ)
/// ċ₂ = -(iδ₂ + w₂) c₂ - a' c₁(t - τ)
/// ```
///
/// with `δ_j = Ω_j - centre`, `w_j = γ_j + Γ_j/2`, `a' = √(γ₁Rγ₂R)·e^{i·centre·τ}`
/// and `b' = √(γ₁Lγ₂L)·e^{i·centre·τ}`.
#[derive(Debug, Clone, Copy)]
pub struct DelayEquations {
    pub k: [C; 2],
    pub a: C,
    pub b: C,
    pub tau: f64,
}

impl DelayEquations {
    pub fn new(system: &System) -> Self {
        let q = [system.qubit(0), system.qubit(1)];
        let centre = (q[0].omega + q[1].omega) / 2.0;
        let tau = system.delay();
        let rot = C::from_polar(1.0, centre * tau);
        DelayEquations {
            k: q.map(|q| C::new(q.amplitude_decay(), q.omega - centre)),
            a: (q[0].gamma_r * q[1].gamma_r).sqrt() * rot,
            b: (q[0].gamma_l * q[1].gamma_l).sqrt() * rot,
            tau,
        }
    }

    /// Closed-form series, valid for identical qubits (`k₁ = k₂`).
    pub fn series(&self, t: f64) -> [C; 2] {
        assert!((self.k[0] - self.k[1]).norm() < 1e-15, "series needs identical qubits");
        let w = self.k[0];
        let ab = self.a * self.b;
        let mut c1 = C::new(0.0, 0.0);
        let mut c2 = C::new(0.0, 0.0);
        let mut n = 0usize;
        loop {
            let s1 = t - 2.0 * n as f64 * self.tau;
            let s2 = t - (2 * n + 1) as f64 * self.tau;
            if s1 < 0.0 {
                break;
            }
            let p = ab.powu(n as u32);
            c1 += p * C::new(s1.powi(2 * n as i32) / factorial(2 * n), 0.0) * (-w * s1).exp();
            if s2 >= 0.0 {
                c2 -= self.a * p * C::new(s2.powi(2 * n as i32 + 1) / factorial(2 * n + 1), 0.0) * (-w * s2).exp();
            }
            n += 1;
        }
        [c1, c2]
    }

    /// Fixed-step RK4 method of steps; the delayed values at stage times come
    /// from cubic Hermite interpolation of the stored history. `steps_per_delay`
    /// steps span one delay.
    pub fn integrate(&self, t_end: f64, steps_per_delay: usize) -> (f64, Vec<[C; 2]>) {
        let h = self.tau / steps_per_delay as f64;
        let n = (t_end / h).ceil() as usize;
        let mut y: Vec<[C; 2]> = vec![[C::new(1.0, 0.0), C::new(0.0, 0.0)]];
        let mut dy: Vec<[C; 2]> = Vec::with_capacity(n + 1);
        let f = |state: [C; 2], delayed: [C; 2]| -> [C; 2] {
            [
                -self.k[0] * state[0] - self.b * delayed[1],
                -self.k[1] * state[1] - self.a * delayed[0],
            ]
        };
        let m = steps_per_delay;
        // History value at step index i + θ (θ ∈ [0, 1]) shifted back by one delay.
        let delayed = |y: &Vec<[C; 2]>, dy: &Vec<[C; 2]>, i: usize, theta: f64| -> [C; 2] {
            if i < m {
                return [C::new(0.0, 0.0); 2];
            }
            let j = i - m;
            if theta == 0.0 {
                return y[j];
            }
            // The derivative at t = τ jumps too; interpolate with its left limit.
            let d1 = if j + 1 == m { f(y[m], [C::new(0.0, 0.0); 2]) } else { dy[j + 1] };
            let (y0, y1, d0) = (y[j], y[j + 1], dy[j]);
            let th = theta;
            let h00 = 2.0 * th.powi(3) - 3.0 * th * th + 1.0;
            let h10 = th.powi(3) - 2.0 * th * th + th;
            let h01 = -2.0 * th.powi(3) + 3.0 * th * th;
            let h11 = th.powi(3) - th * th;
            [0, 1].map(|k| y0[k] * h00 + d0[k] * (h10 * h) + y1[k] * h01 + d1[k] * (h11 * h))
        };
        for i in 0..n {
            let yi = y[i];
            let k1 = f(yi, delayed(&y, &dy, i, 0.0));
            dy.push(k1);
            let add = |s: [C; 2], k: [C; 2], c: f64| [s[0] + k[0] * (c * h), s[1] + k[1] * (c * h)];
            let mid = delayed(&y, &dy, i, 0.5);
            let k2 = f(add(yi, k1, 0.5), mid);
            let k3 = f(add(yi, k2, 0.5), mid);
            // Left limit: the history jumps at t = 0.
            let end = if i + 1 <= m {
                [C::new(0.0, 0.0); 2]
            } else {
                y[i + 1 - m]
            };
            let k4 = f(add(yi, k3, 1.0), end);
            let next = [0, 1].map(|k| yi[k] + (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) * (h / 6.0));
            y.push(next);
        }
        (h, y)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Brute-force `⟨ε_i|ε_j⟩ / L` over the box `[-L/2, L/2]` with the trapezoid
/// rule: the guided fields of both eigenstates plus their qubit amplitudes.
pub fn box_overlap(system: &System, a: &ScatteringEigenstate, b: &ScatteringEigenstate, length: f64, samples: usize) -> C {
    let half = system.derived().separation / 2.0;
    let v = system.config().v_g;
    let field = |s: &ScatteringEigenstate, x: f64| -> (C, C) {
        let k = s.energy / v;
        let (r, l) = if x < -half {
            (s.coeff_a, s.coeff_d)
        } else if x < half {
            (s.coeff_b, s.coeff_e)
        } else {
            (s.coeff_c, s.coeff_f)
        };
        (r * C::from_polar(1.0, k * x), l * C::from_polar(1.0, -k * x))
    };
    let h = length / samples as f64;
    let mut acc = C::new(0.0, 0.0);
    for i in 0..=samples {
        let x = -length / 2.0 + i as f64 * h;
        let (ra, la) = field(a, x);
        let (rb, lb) = field(b, x);
        let w = if i == 0 || i == samples { 0.5 } else { 1.0 };
        acc += w * (ra.conj() * rb + la.conj() * lb);
    }
    acc *= h;
    acc += a.alpha1.conj() * b.alpha1 + a.alpha2.conj() * b.alpha2;
    acc / length
}
