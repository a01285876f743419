//! Spectral quadrature of the single-excitation propagator.
//!
//! The qubit amplitudes after exciting qubit 1 are
//!
//! ```text
//! α_j(t) = ∫ dε e^{-iεt} r_j(ε),   r_j = (1/2πv_g) Σ α_j^{(c)} (S⁻¹)_{cc'} conj(α_1^{(c')})
//! ```
//!
//! summed over the incoming channels `c` at energy `ε`. Before quadrature the
//! leading large-`ε` behaviour of `r_j` is subtracted and its Fourier
//! transform added back in closed form: a Lorentzian for `r_1` and the
//! single-hop term for `r_2`. The remainder is small and smooth, so a
//! truncated Simpson rule converges quickly.
//!
//! Amplitudes are reported in the frame rotating at the mean qubit frequency.

use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::eigenstate::{Geometry, Incoming};
use super::overlap::{gram, hermitian_condition, Channel};
use crate::error::{Error, Result};
use crate::params::System;
use crate::peak::{refine_maximum, Peak};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Largest node count the quadrature will raise itself to.
const MAX_NODES: usize = 1 << 22;

/// How external loss enters the eigenstate expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossModel {
    /// Each lossy qubit gets its own reservoir continuum, which supplies the
    /// extra incoming channels needed for a complete, orthonormal basis.
    #[default]
    ReservoirChannels,
    /// Loss only through the complex qubit frequency; the two waveguide
    /// branches are inverted through their overlap matrix.
    WaveguideOverlap,
}

/// Window, resolution and acceptance threshold of the energy quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Minimum number of Simpson intervals on the base window. Raised to a
    /// power of two fine enough for the longest requested time, and doubled
    /// while the refinement estimate exceeds `tolerance`.
    pub nodes: usize,
    /// Initial half-width of the base window around the mean qubit
    /// frequency; `None` uses `max(200·γ_tot, 20·|δ| + 50·γ_tot)`. Doubled
    /// while the window change exceeds `tolerance`.
    pub window: Option<f64>,
    /// Largest accepted change of `α_j(t)` under refinement.
    pub tolerance: f64,
    /// Fail when the refinement estimate exceeds `tolerance`.
    pub verify: bool,
    pub loss_model: LossModel,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 1 << 14,
            window: None,
            tolerance: 1e-4,
            verify: true,
            loss_model: LossModel::default(),
        }
    }
}

/// Diagnostics of one quadrature run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    /// Simpson intervals on the base window.
    pub nodes: usize,
    /// Base half-width `W`.
    pub window: f64,
    pub spacing: f64,
    /// Largest change of any amplitude when the window is doubled at fixed
    /// spacing.
    pub window_change: f64,
    /// Richardson estimate of the spacing error on the base window.
    pub spacing_error: f64,
    /// Largest overlap-matrix condition number over the nodes.
    pub max_condition: f64,
}

impl QuadratureReport {
    pub fn error_estimate(&self) -> f64 {
        self.window_change.max(self.spacing_error)
    }
}

/// Qubit amplitudes over time after exciting qubit 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub alpha1: Vec<C>,
    pub alpha2: Vec<C>,
    /// `|α₁|² + |α₂|²`.
    pub survival: Vec<f64>,
    pub report: QuadratureReport,
}

impl AmplitudeTrace {
    /// `2|α₁||α₂|` at each sample.
    pub fn concurrence(&self) -> Vec<f64> {
        self.alpha1
            .iter()
            .zip(&self.alpha2)
            .map(|(a, b)| (2.0 * a.norm() * b.norm()).min(1.0))
            .collect()
    }
}

/// Closed-form pieces subtracted from the spectral densities.
#[derive(Debug, Clone, Copy)]
struct Asymptote {
    /// Complex poles `Ω_j - iκ_j/2`, `κ_j = 2γ_j + Γ_j`.
    pole: [C; 2],
    /// `√(γ₁R γ₂R)` and `√(γ₁L γ₂L)`.
    hop_right: f64,
    hop_left: f64,
    delay: f64,
    active: [bool; 2],
}

impl Asymptote {
    fn new(system: &System) -> Self {
        let q = [system.qubit(0), system.qubit(1)];
        let pole = q.map(|q| C::new(q.omega, -(q.gamma_r + q.gamma_l + q.gamma_loss) / 2.0));
        let active = [0, 1].map(|j| -pole[j].im > 0.0);
        Asymptote {
            pole,
            hop_right: (q[0].gamma_r * q[1].gamma_r).sqrt(),
            hop_left: (q[0].gamma_l * q[1].gamma_l).sqrt(),
            delay: system.delay(),
            active,
        }
    }

    fn density(&self, energy: f64) -> [C; 2] {
        let e = C::new(energy, 0.0);
        let g1 = 1.0 / (e - self.pole[0]);
        let r1 = if self.active[0] {
            C::new(-g1.im / std::f64::consts::PI, 0.0)
        } else {
            C::new(0.0, 0.0)
        };
        let r2 = if self.active[0] && self.active[1] {
            let g2 = 1.0 / (e - self.pole[1]);
            let ph = C::from_polar(1.0, energy * self.delay);
            let fwd = g2 * (-I * self.hop_right * ph) * g1;
            let back = g1 * (-I * self.hop_left * ph) * g2;
            I / (2.0 * std::f64::consts::PI) * (fwd - back.conj())
        } else {
            C::new(0.0, 0.0)
        };
        [r1, r2]
    }

    /// Fourier transforms of [`density`](Self::density) for `t ≥ 0`, in the
    /// lab frame.
    fn transform(&self, t: f64) -> [C; 2] {
        let f1 = if self.active[0] {
            (-I * self.pole[0] * t).exp()
        } else {
            C::new(0.0, 0.0)
        };
        let s = t - self.delay;
        let f2 = if self.active[0] && self.active[1] && s > 0.0 {
            let x = -I * (self.pole[1] - self.pole[0]) * s;
            -self.hop_right * s * (-I * self.pole[0] * s).exp() * phi1(x)
        } else {
            C::new(0.0, 0.0)
        };
        [f1, f2]
    }
}

/// `(eˣ - 1) / x`.
fn phi1(x: C) -> C {
    if x.norm() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        (x.exp() - 1.0) / x
    }
}

/// Spectral densities `r_j(ε)` and the overlap condition number.
fn spectral_density(geom: &Geometry, channels: &[Channel], model: LossModel, energy: f64, v_g: f64) -> Result<([C; 2], f64)> {
    let incoming: Vec<Incoming> = channels.iter().map(|c| c.incoming()).collect();
    let sols = geom.solve_channels(energy, &incoming)?;
    let g = gram(&sols, model == LossModel::ReservoirChannels);
    let cond = hermitian_condition(&g);
    if !(cond <= 1e8) {
        return Err(Error::Numerical(format!(
            "overlap matrix condition number {cond:e} exceeds 1e8 at ε = {energy}"
        )));
    }
    let n = sols.len();
    let inv: DMatrix<C> = if n == 2 {
        // Direct 2×2 inverse.
        let (a, b, c, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
        let det = a * d - b * c;
        DMatrix::from_row_slice(2, 2, &[d / det, -b / det, -c / det, a / det])
    } else {
        g.try_inverse()
            .ok_or_else(|| Error::Numerical(format!("overlap matrix singular at ε = {energy}")))?
    };
    let mut r = [C::new(0.0, 0.0); 2];
    for (j, rj) in r.iter_mut().enumerate() {
        for c in 0..n {
            for cp in 0..n {
                *rj += sols[c].alpha[j] * inv[(c, cp)] * sols[cp].alpha[0].conj();
            }
        }
        *rj /= 2.0 * std::f64::consts::PI * v_g;
    }
    Ok((r, cond))
}

/// Mean qubit frequency and default half-width of the energy window.
fn default_window(system: &System) -> (f64, f64) {
    let q = [system.qubit(0), system.qubit(1)];
    let centre = (q[0].omega + q[1].omega) / 2.0;
    let gamma_tot = q
        .iter()
        .map(|q| q.gamma_r + q.gamma_l + q.gamma_loss)
        .fold(0.0, f64::max);
    let detuning = system.detuning().abs();
    (centre, (200.0 * gamma_tot).max(20.0 * detuning + 50.0 * gamma_tot))
}

/// Default propagation horizon: the inter-qubit delay plus twenty lifetimes
/// of the slower qubit.
pub fn scattering_horizon(system: &System) -> f64 {
    system.delay() + 20.0 / system.slowest_decay()
}

/// Precomputed quadrature for one system, valid for `0 ≤ t ≤ t_max`.
#[derive(Debug, Clone)]
pub struct Propagator {
    centre: f64,
    spacing: f64,
    /// Intervals on the base window; the stored grid spans twice the width.
    base_intervals: usize,
    /// Subtracted densities on `[centre - 2W, centre + 2W]`.
    residual: Vec<[C; 2]>,
    asym: Asymptote,
    t_max: f64,
    report: QuadratureReport,
    tolerance: f64,
}

impl Propagator {
    pub fn new(system: &System, quad: &QuadratureSpec, t_max: f64) -> Result<Self> {
        let check = super::localized_state_exists(system);
        if check.near {
            return Err(Error::LocalizedState(format!(
                "{}; the scattering basis is incomplete, use the markovian engine",
                check.diagnostic
            )));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::Precondition(format!("invalid propagation horizon {t_max}")));
        }
        if !(quad.tolerance > 0.0) || quad.nodes < 2 {
            return Err(Error::Precondition("quadrature needs nodes ≥ 2 and tolerance > 0".into()));
        }
        let (centre, auto_w) = default_window(system);
        let window = quad.window.unwrap_or(auto_w);
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::Precondition(format!("invalid quadrature window {window}")));
        }
        // Resolve the oscillation e^{-iεt} at the longest time: h·t_max ≤ 0.5.
        let needed = (2.0 * window * t_max / 0.5).ceil() as usize;
        let intervals = quad.nodes.max(needed).max(4).next_power_of_two();
        if intervals > MAX_NODES {
            return Err(Error::Numerical(format!(
                "quadrature would need {intervals} nodes for t_max = {t_max} on window {window}; \
                 shorten the horizon or narrow the window"
            )));
        }
        let geom = Geometry::new(system);
        let channels = match quad.loss_model {
            LossModel::ReservoirChannels => Channel::all(&geom),
            LossModel::WaveguideOverlap => Channel::all(&geom).into_iter().take(2).collect(),
        };
        let asym = Asymptote::new(system);
        let build = |intervals: usize, window: f64| -> Result<Propagator> {
            let spacing = 2.0 * window / intervals as f64;
            let v_g = system.config().v_g;
            let start = centre - 2.0 * window;
            let samples: Vec<([C; 2], f64)> = (0..=2 * intervals)
                .into_par_iter()
                .map(|k| {
                    let e = start + k as f64 * spacing;
                    let (r, cond) = spectral_density(&geom, &channels, quad.loss_model, e, v_g)?;
                    let sub = asym.density(e);
                    Ok(([r[0] - sub[0], r[1] - sub[1]], cond))
                })
                .collect::<Result<_>>()?;
            let max_condition = samples.iter().map(|s| s.1).fold(1.0, f64::max);
            let prop = Propagator {
                centre,
                spacing,
                base_intervals: intervals,
                residual: samples.into_iter().map(|s| s.0).collect(),
                asym,
                t_max,
                report: QuadratureReport {
                    nodes: intervals,
                    window,
                    spacing,
                    window_change: 0.0,
                    spacing_error: 0.0,
                    max_condition,
                },
                tolerance: quad.tolerance,
            };
            debug!(
                "scattering quadrature: {intervals} intervals, W = {window:e}, h = {spacing:e}, cond ≤ {max_condition:e}"
            );
            Ok(prop.with_default_report())
        };
        // Narrow spectral features (long-lived collective states) need finer
        // spacing; slowly decaying tails need a wider window. Refine whichever
        // estimate is over tolerance while the node budget allows.
        let (mut intervals, mut window) = (intervals, window);
        loop {
            let prop = build(intervals, window)?;
            let r = prop.report;
            if r.error_estimate() <= quad.tolerance || 2 * intervals > MAX_NODES {
                return Ok(prop);
            }
            if r.spacing_error > quad.tolerance {
                intervals *= 2;
            } else {
                window *= 2.0;
                intervals *= 2;
            }
        }
    }

    fn with_default_report(mut self) -> Self {
        // Refinement check at a handful of representative times.
        let probes: Vec<f64> = (0..=16).map(|k| self.t_max * k as f64 / 16.0).collect();
        let (w, s) = probes
            .iter()
            .map(|&t| self.refinement(t))
            .fold((0.0f64, 0.0f64), |acc, x| (acc.0.max(x.0), acc.1.max(x.1)));
        self.report.window_change = w;
        self.report.spacing_error = s;
        self
    }

    pub fn report(&self) -> &QuadratureReport {
        &self.report
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Simpson sums of `e^{-iut} R_j` with `u = ε - centre`, over nodes
    /// `lo..=hi` of the stored grid taking every `stride`-th node.
    fn simpson(&self, t: f64, lo: usize, hi: usize, stride: usize) -> [C; 2] {
        let n = (hi - lo) / stride;
        debug_assert!(n % 2 == 0);
        let h = self.spacing * stride as f64;
        let u0 = (lo as f64 - self.base_intervals as f64) * self.spacing;
        // Rotate the phase incrementally, re-anchoring periodically to keep
        // rounding drift negligible.
        let step = C::from_polar(1.0, -h * t);
        let mut acc = [C::new(0.0, 0.0); 2];
        let mut ph = C::new(1.0, 0.0);
        for i in 0..=n {
            if i % 64 == 0 {
                ph = C::from_polar(1.0, -(u0 + i as f64 * h) * t);
            }
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let r = self.residual[lo + i * stride];
            acc[0] += w * ph * r[0];
            acc[1] += w * ph * r[1];
            ph *= step;
        }
        acc.map(|a| a * h / 3.0)
    }

    /// Simpson sums like [`simpson`](Self::simpson), for every time
    /// `t_k = 2πk / (m·h)` at once, `h` the base spacing and `m` a power of
    /// two at least the stored node count.
    fn simpson_fft(&self, lo: usize, hi: usize, stride: usize, m: usize) -> [Vec<C>; 2] {
        let n = (hi - lo) / stride;
        let len = m / stride;
        let h = self.spacing * stride as f64;
        let u0 = (lo as f64 - self.base_intervals as f64) * self.spacing;
        let fft = FftPlanner::new().plan_fft_forward(len);
        [0, 1].map(|j| {
            let mut buf = vec![C::new(0.0, 0.0); len];
            for i in 0..=n {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                buf[i] = w * h / 3.0 * self.residual[lo + i * stride][j];
            }
            fft.process(&mut buf);
            buf.iter()
                .enumerate()
                .map(|(k, x)| x * C::from_polar(1.0, -u0 * self.time_step(m) * k as f64))
                .collect()
        })
    }

    fn time_step(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI / (m as f64 * self.spacing)
    }

    /// Amplitudes on the uniform time grid natural to the energy grid,
    /// covering `[0, t_max]`. Much cheaper than [`trace`](Self::trace) for
    /// dense sampling.
    pub fn uniform_trace(&self, verify: bool) -> Result<AmplitudeTrace> {
        let n = self.base_intervals;
        let m = 4 * n;
        let dt = self.time_step(m);
        let count = ((self.t_max / dt).floor() as usize + 1).min(m / 2);
        let wide = self.simpson_fft(0, 2 * n, 1, m);
        let base = self.simpson_fft(n / 2, n / 2 + n, 1, m);
        let coarse = self.simpson_fft(n / 2, n / 2 + n, 2, m);
        let mut report = self.report;
        let mut times = Vec::with_capacity(count);
        let (mut alpha1, mut alpha2) = (Vec::with_capacity(count), Vec::with_capacity(count));
        for k in 0..count {
            let t = k as f64 * dt;
            let f = self.closed_form(t);
            for j in 0..2 {
                report.window_change = report.window_change.max((wide[j][k] - base[j][k]).norm());
                report.spacing_error = report.spacing_error.max((base[j][k] - coarse[j][k]).norm() / 15.0);
            }
            times.push(t);
            alpha1.push(wide[0][k] + f[0]);
            alpha2.push(wide[1][k] + f[1]);
        }
        if verify {
            self.check(&report)?;
        }
        let survival = alpha1
            .iter()
            .zip(&alpha2)
            .map(|(a, b): (&C, &C)| a.norm_sqr() + b.norm_sqr())
            .collect();
        Ok(AmplitudeTrace {
            times,
            alpha1,
            alpha2,
            survival,
            report,
        })
    }

    fn closed_form(&self, t: f64) -> [C; 2] {
        let rot = C::from_polar(1.0, self.centre * t);
        self.asym.transform(t).map(|f| f * rot)
    }

    /// `(window change, spacing error)` at time `t`.
    fn refinement(&self, t: f64) -> (f64, f64) {
        let n = self.base_intervals;
        let (lo, hi) = (n / 2, n / 2 + n);
        let base = self.simpson(t, lo, hi, 1);
        let coarse = self.simpson(t, lo, hi, 2);
        let wide = self.simpson(t, 0, 2 * n, 1);
        let w = (0..2).map(|j| (wide[j] - base[j]).norm()).fold(0.0, f64::max);
        let s = (0..2).map(|j| (base[j] - coarse[j]).norm() / 15.0).fold(0.0, f64::max);
        (w, s)
    }

    /// `[α₁(t), α₂(t)]` in the frame rotating at the mean qubit frequency,
    /// from the doubled window.
    pub fn amplitudes(&self, t: f64) -> Result<[C; 2]> {
        if !(t >= 0.0 && t <= self.t_max * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!(
                "time {t} outside the propagator range [0, {}]",
                self.t_max
            )));
        }
        let q = self.simpson(t, 0, 2 * self.base_intervals, 1);
        let f = self.closed_form(t);
        Ok([q[0] + f[0], q[1] + f[1]])
    }

    pub fn concurrence(&self, t: f64) -> Result<f64> {
        let [a1, a2] = self.amplitudes(t)?;
        Ok((2.0 * a1.norm() * a2.norm()).min(1.0))
    }

    fn check(&self, report: &QuadratureReport) -> Result<()> {
        if report.error_estimate() > self.tolerance {
            return Err(Error::Numerical(format!(
                "scattering quadrature did not converge: window change {:.3e}, spacing error {:.3e} \
                 (tolerance {:.1e}; {} intervals, W = {:.4e}, h = {:.3e})",
                report.window_change,
                report.spacing_error,
                self.tolerance,
                report.nodes,
                report.window,
                report.spacing
            )));
        }
        Ok(())
    }
}

/// Evolves `σ₁⁺|0⟩` to every time in `t_grid` (non-negative, ordered).
pub fn propagate(system: &System, t_grid: &[f64], quad: &QuadratureSpec) -> Result<AmplitudeTrace> {
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Precondition("time grid must be non-decreasing".into()));
    }
    if t_grid.first().is_some_and(|&t| !(t >= 0.0)) {
        return Err(Error::Precondition("time grid must be non-negative".into()));
    }
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    let prop = Propagator::new(system, quad, t_max)?;
    prop.trace(t_grid, quad.verify)
}

impl Propagator {
    /// Amplitudes on `t_grid`, with the refinement estimate taken over every
    /// sample.
    pub fn trace(&self, t_grid: &[f64], verify: bool) -> Result<AmplitudeTrace> {
        let values: Vec<([C; 2], (f64, f64))> = t_grid
            .par_iter()
            .map(|&t| Ok((self.amplitudes(t)?, self.refinement(t))))
            .collect::<Result<_>>()?;
        let mut report = self.report;
        for (_, (w, s)) in &values {
            report.window_change = report.window_change.max(*w);
            report.spacing_error = report.spacing_error.max(*s);
        }
        if verify {
            self.check(&report)?;
        }
        let alpha1: Vec<C> = values.iter().map(|v| v.0[0]).collect();
        let alpha2: Vec<C> = values.iter().map(|v| v.0[1]).collect();
        let survival = alpha1
            .iter()
            .zip(&alpha2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect();
        Ok(AmplitudeTrace {
            times: t_grid.to_vec(),
            alpha1,
            alpha2,
            survival,
            report,
        })
    }
}

/// Maximum concurrence over `[0, horizon]` (default
/// [`scattering_horizon`]) with the peak time, plus the quadrature report.
pub fn cmax(system: &System, horizon: Option<f64>, quad: &QuadratureSpec) -> Result<(Peak, QuadratureReport)> {
    let horizon = horizon.unwrap_or_else(|| scattering_horizon(system));
    let prop = Propagator::new(system, quad, horizon)?;
    let trace = prop.uniform_trace(quad.verify)?;
    let peak = refine_maximum(&trace.times, &trace.concurrence(), |t| prop.concurrence(t))?;
    Ok((peak, trace.report))
}
