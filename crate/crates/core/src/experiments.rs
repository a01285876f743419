//! Parameter sweeps of the maximum concurrence and engine cross-checks.
//!
//! A sweep starts from a base [`SystemConfig`] and walks the Cartesian
//! product of its axes (first axis slowest). Each grid point is evaluated
//! independently on the rayon pool and gathered back in index order, so the
//! result does not depend on scheduling. Failures are recorded per point.

use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::markovian;
use crate::ode::Tolerances;
use crate::params::{System, SystemConfig};
use crate::scattering::{self, QuadratureSpec};

/// Dynamical model used to evaluate a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Markovian,
    Scattering,
    /// [`select_engine`] per point.
    Auto,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Markovian => "markovian",
            Engine::Scattering => "scattering",
            Engine::Auto => "auto",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markovian" => Ok(Engine::Markovian),
            "scattering" => Ok(Engine::Scattering),
            "auto" => Ok(Engine::Auto),
            _ => Err(Error::Config(format!(
                "unknown engine `{s}` (expected markovian, scattering or auto)"
            ))),
        }
    }
}

/// Retardation parameter `γ·d/v_g` above which `auto` picks the scattering
/// engine.
pub const RETARDATION_THRESHOLD: f64 = 1e-3;

/// Engine `auto` resolves to: scattering when retardation matters
/// (`γ·d/v_g > 1e-3`) or when lossy qubits are detuned, markovian otherwise
/// and always near a localized resonance, which the scattering basis cannot
/// represent.
pub fn select_engine(system: &System) -> Engine {
    if scattering::localized_state_exists(system).near {
        return Engine::Markovian;
    }
    let retardation = system.max_gamma() * system.delay();
    if retardation > RETARDATION_THRESHOLD || (!system.is_lossless() && system.detuning() != 0.0) {
        Engine::Scattering
    } else {
        Engine::Markovian
    }
}

/// A sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Directionality of qubit 1; its guided total and loss are kept.
    Delta1,
    Delta2,
    /// Both directionalities at once.
    Delta,
    /// Separation in emission wavelengths; qubit 2 is moved.
    DTilde,
    /// Guided rate `γ_R + γ_L` of both qubits, keeping `Δ_j` and `β_j`.
    GammaTotal,
    /// `ω₁ - ω₂`, applied symmetrically about `omega0`.
    Detuning,
    /// Beta factor of both qubits, adjusting the loss rates.
    Beta,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::Delta1,
        Axis::Delta2,
        Axis::Delta,
        Axis::DTilde,
        Axis::GammaTotal,
        Axis::Detuning,
        Axis::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Delta1 => "delta1",
            Axis::Delta2 => "delta2",
            Axis::Delta => "delta",
            Axis::DTilde => "d_tilde",
            Axis::GammaTotal => "gamma_total",
            Axis::Detuning => "detuning",
            Axis::Beta => "beta",
        }
    }

    /// Writes `value` into `config`.
    pub fn apply(self, config: &mut SystemConfig, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Domain(format!("{} = {value} is not finite", self.name())));
        }
        let set_delta = |q: &mut crate::params::QubitParams| -> Result<()> {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::Domain(format!("directionality {value} outside [-1, 1]")));
            }
            let guided = q.gamma_r + q.gamma_l;
            q.gamma_r = guided * (1.0 + value) / 2.0;
            q.gamma_l = guided * (1.0 - value) / 2.0;
            Ok(())
        };
        match self {
            Axis::Delta1 => set_delta(&mut config.qubit1)?,
            Axis::Delta2 => set_delta(&mut config.qubit2)?,
            Axis::Delta => {
                set_delta(&mut config.qubit1)?;
                set_delta(&mut config.qubit2)?;
            }
            Axis::DTilde => {
                if !(value > 0.0) {
                    return Err(Error::Domain(format!("separation d_tilde = {value} must be positive")));
                }
                let lambda0 = 2.0 * std::f64::consts::PI * config.v_g / config.omega0;
                config.qubit2.position = config.qubit1.position + value * lambda0;
            }
            Axis::GammaTotal => {
                if !(value > 0.0) {
                    return Err(Error::Domain(format!("gamma_total = {value} must be positive")));
                }
                for q in [&mut config.qubit1, &mut config.qubit2] {
                    let guided = q.gamma_r + q.gamma_l;
                    if guided > 0.0 {
                        let s = value / guided;
                        q.gamma_r *= s;
                        q.gamma_l *= s;
                        q.gamma_loss *= s;
                    }
                }
            }
            Axis::Detuning => *config = config.with_detuning(value),
            Axis::Beta => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::Domain(format!("beta factor {value} outside (0, 1]")));
                }
                for q in [&mut config.qubit1, &mut config.qubit2] {
                    q.gamma_loss = (q.gamma_r + q.gamma_l) * (1.0 - value) / value;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Axis::ALL.iter().map(|a| a.name()).collect();
                Error::Config(format!("unknown sweep axis `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// One axis of a sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl AxisGrid {
    pub fn linear(axis: Axis, start: f64, stop: f64, n: usize) -> Self {
        AxisGrid {
            axis,
            values: linspace(start, stop, n),
        }
    }

    pub fn log(axis: Axis, start: f64, stop: f64, n: usize) -> Self {
        AxisGrid {
            axis,
            values: linspace(start.ln(), stop.ln(), n).into_iter().map(f64::exp).collect(),
        }
    }
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3,
    Fig4a,
    Fig4b,
    Fig4c,
    Custom,
}

impl Preset {
    pub const FIGURES: [Preset; 7] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig3,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::Fig4c,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig3 => "fig3",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig4c => "fig4c",
            Preset::Custom => "custom",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::FIGURES
            .into_iter()
            .chain([Preset::Custom])
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}

/// Guided rate `γ_R + γ_L` used for the ideal (Markovian) presets. Only
/// `γt` matters there; the value keeps `γ·d/v_g` far below the retardation
/// threshold.
pub const MARKOV_GAMMA_TOTAL: f64 = 2e-5;

/// Guided rate of the detuning and separation-free presets of Fig. 4
/// (`γ = 1e-3·ω₀`).
pub const FIG4_GAMMA_TOTAL: f64 = 2e-3;

/// Full description of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: Preset,
    pub base: SystemConfig,
    pub axes: Vec<AxisGrid>,
    pub engine: Engine,
    pub tolerances: Tolerances,
    pub quadrature: QuadratureSpec,
}

impl SweepSpec {
    pub fn custom(base: SystemConfig, axes: Vec<AxisGrid>, engine: Engine) -> Self {
        SweepSpec {
            preset: Preset::Custom,
            base,
            axes,
            engine,
            tolerances: Tolerances::default(),
            quadrature: QuadratureSpec::default(),
        }
    }

    /// The parameter grids behind each figure.
    pub fn preset(preset: Preset) -> Self {
        let sym = |delta, beta, gamma_total, d_tilde| {
            SystemConfig::symmetric(delta, beta, gamma_total, d_tilde).expect("preset parameters are valid")
        };
        let d_values = vec![0.1, 0.2, 0.25, 0.4, 0.5];
        let (base, axes, engine) = match preset {
            Preset::Fig2a => (
                sym(0.0, 1.0, MARKOV_GAMMA_TOTAL, 1.0),
                vec![AxisGrid { axis: Axis::DTilde, values: d_values }],
                Engine::Markovian,
            ),
            Preset::Fig2b => (
                sym(0.9, 1.0, MARKOV_GAMMA_TOTAL, 1.0),
                vec![AxisGrid { axis: Axis::DTilde, values: d_values }],
                Engine::Markovian,
            ),
            Preset::Fig2c => (
                sym(0.0, 1.0, MARKOV_GAMMA_TOTAL, 1.0),
                vec![
                    AxisGrid {
                        axis: Axis::Delta,
                        values: vec![0.0, 0.3, 0.6, 0.9, 1.0],
                    },
                    AxisGrid {
                        axis: Axis::DTilde,
                        values: (1..=100).map(|k| k as f64 / 100.0).collect(),
                    },
                ],
                Engine::Markovian,
            ),
            Preset::Fig3 => (
                sym(0.0, 1.0, MARKOV_GAMMA_TOTAL, 1.0),
                vec![
                    AxisGrid::linear(Axis::Delta1, -1.0, 1.0, 81),
                    AxisGrid::linear(Axis::Delta2, -1.0, 1.0, 81),
                ],
                Engine::Markovian,
            ),
            Preset::Fig4a => {
                let gamma = FIG4_GAMMA_TOTAL / 2.0;
                let mut grid = AxisGrid::log(Axis::Detuning, 1e-2, 1e2, 61);
                grid.values.iter_mut().for_each(|v| *v *= gamma);
                (sym(0.9, 0.98, FIG4_GAMMA_TOTAL, 1.0), vec![grid], Engine::Auto)
            }
            Preset::Fig4b => {
                let mut grid = AxisGrid::log(Axis::GammaTotal, 1e-5, 0.2, 41);
                grid.values.iter_mut().for_each(|v| *v *= 2.0);
                (sym(0.9, 0.98, FIG4_GAMMA_TOTAL, 1.0), vec![grid], Engine::Auto)
            }
            Preset::Fig4c => (
                sym(0.9, 0.98, FIG4_GAMMA_TOTAL, 1.0),
                vec![
                    AxisGrid {
                        axis: Axis::GammaTotal,
                        values: vec![2e-5, 2e-4, 2e-3, 2e-2],
                    },
                    AxisGrid::linear(Axis::DTilde, 0.5, 200.0, 61),
                ],
                Engine::Auto,
            ),
            Preset::Custom => (sym(0.9, 1.0, MARKOV_GAMMA_TOTAL, 1.0), vec![], Engine::Auto),
        };
        SweepSpec {
            preset,
            base,
            axes,
            engine,
            tolerances: Tolerances::default(),
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of grid point `index` (first axis slowest).
    pub fn coordinates(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[k] = axis.values[rem % n];
            rem /= n;
        }
        out
    }

    /// Configuration at grid point `index`, before validation.
    pub fn config_at(&self, index: usize) -> Result<SystemConfig> {
        let mut cfg = self.base;
        for (axis, value) in self.axes.iter().zip(self.coordinates(index)) {
            axis.axis.apply(&mut cfg, value)?;
        }
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form of the spec.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("sweep spec serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = Vec::new();
        for a in &self.axes {
            if seen.contains(&a.axis) {
                return Err(Error::Config(format!("axis `{}` given twice", a.axis.name())));
            }
            if a.values.is_empty() {
                return Err(Error::Config(format!("axis `{}` has no values", a.axis.name())));
            }
            seen.push(a.axis);
        }
        Ok(())
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub coords: Vec<f64>,
    pub c_max: Option<f64>,
    pub t_star: Option<f64>,
    /// Engine actually used (never `auto`).
    pub engine: Engine,
    /// `"ok"` or the error kind.
    pub status: String,
    pub message: Option<String>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Evaluated sweep with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub config_hash: String,
    pub version: String,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn axis_names(&self) -> Vec<&'static str> {
        self.spec.axes.iter().map(|a| a.axis.name()).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| !r.is_ok())
    }

    /// The record whose coordinates equal `coords` (exact match).
    pub fn find(&self, coords: &[f64]) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.coords == coords)
    }
}

/// Maximum concurrence and its time for one configuration.
pub fn evaluate_point(config: &SystemConfig, engine: Engine, tolerances: Tolerances, quad: &QuadratureSpec) -> (Engine, Result<(f64, f64)>) {
    let system = match config.validate() {
        Ok(s) => s,
        Err(e) => {
            let engine = if engine == Engine::Auto { Engine::Markovian } else { engine };
            return (engine, Err(e));
        }
    };
    let engine = match engine {
        Engine::Auto => select_engine(&system),
        e => e,
    };
    let result = match engine {
        Engine::Markovian => markovian::cmax_numeric_with(&system, None, tolerances).map(|p| (p.value, p.time)),
        Engine::Scattering => scattering::cmax(&system, None, quad).map(|(p, _)| (p.value, p.time)),
        Engine::Auto => unreachable!(),
    };
    (engine, result)
}

fn record(spec: &SweepSpec, index: usize) -> SweepRecord {
    let coords = spec.coordinates(index);
    let (engine, result) = match spec.config_at(index) {
        Ok(cfg) => evaluate_point(&cfg, spec.engine, spec.tolerances, &spec.quadrature),
        Err(e) => (spec.engine, Err(e)),
    };
    let engine = if engine == Engine::Auto { Engine::Markovian } else { engine };
    match result {
        Ok((c, t)) => SweepRecord {
            index,
            coords,
            c_max: Some(c.clamp(0.0, 1.0)),
            t_star: Some(t),
            engine,
            status: "ok".into(),
            message: None,
        },
        Err(e) => SweepRecord {
            index,
            coords,
            c_max: None,
            t_star: None,
            engine,
            status: e.kind().into(),
            message: Some(e.to_string()),
        },
    }
}

/// Evaluates every grid point.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.check()?;
    let records: Vec<SweepRecord> = (0..spec.len()).into_par_iter().map(|i| record(spec, i)).collect();
    Ok(finish(spec, records))
}

fn finish(spec: &SweepSpec, records: Vec<SweepRecord>) -> SweepResult {
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        warn!("{failed} of {} sweep points failed", records.len());
    }
    SweepResult {
        spec: spec.clone(),
        config_hash: spec.config_hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        records,
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    config_hash: String,
    points: usize,
}

/// Like [`run_sweep`], but appends finished points to a JSON-lines
/// checkpoint after every chunk and skips points already recorded there.
/// A checkpoint written for a different spec is an error.
pub fn run_sweep_resumable(spec: &SweepSpec, checkpoint: &Path, chunk: usize) -> Result<SweepResult> {
    spec.check()?;
    let hash = spec.config_hash();
    let n = spec.len();
    let mut done: Vec<Option<SweepRecord>> = vec![None; n];
    let text = match std::fs::read_to_string(checkpoint) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    let mut lines = text.lines();
    if let Some(first) = lines.next() {
        let header: CheckpointHeader = serde_json::from_str(first)
            .map_err(|e| Error::Config(format!("unreadable checkpoint header: {e}")))?;
        if header.config_hash != hash || header.points != n {
            return Err(Error::Config(format!(
                "checkpoint {} belongs to a different sweep (hash {})",
                checkpoint.display(),
                header.config_hash
            )));
        }
    }
    for line in lines {
        // A torn final line from an interrupted write is dropped.
        if let Ok(rec) = serde_json::from_str::<SweepRecord>(line) {
            if rec.index < n {
                let i = rec.index;
                done[i] = Some(rec);
            }
        }
    }
    let mut file = OpenOptions::new().create(true).append(true).open(checkpoint)?;
    if text.is_empty() {
        let header = CheckpointHeader { config_hash: hash, points: n };
        writeln!(file, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    } else if !text.ends_with('\n') {
        writeln!(file)?;
    }
    let todo: Vec<usize> = (0..n).filter(|&i| done[i].is_none()).collect();
    info!("sweep: {} of {n} points already done", n - todo.len());
    for part in todo.chunks(chunk.max(1)) {
        let recs: Vec<SweepRecord> = part.par_iter().map(|&i| record(spec, i)).collect();
        for r in recs {
            writeln!(file, "{}", serde_json::to_string(&r).expect("record serializes"))?;
            let i = r.index;
            done[i] = Some(r);
        }
        file.flush()?;
    }
    let records = done.into_iter().map(|r| r.expect("every point evaluated")).collect();
    Ok(finish(spec, records))
}

/// Pointwise comparison of two concurrence traces on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub times: Vec<f64>,
    pub markovian: Vec<f64>,
    pub scattering: Vec<f64>,
    /// `|C_markovian - C_scattering|` per sample.
    pub pointwise: Vec<f64>,
    pub sup_norm: f64,
}

impl DivergenceReport {
    pub fn between(times: &[f64], markovian: Vec<f64>, scattering: Vec<f64>) -> Self {
        let pointwise: Vec<f64> = markovian.iter().zip(&scattering).map(|(a, b)| (a - b).abs()).collect();
        let sup_norm = pointwise.iter().cloned().fold(0.0, f64::max);
        DivergenceReport {
            times: times.to_vec(),
            markovian,
            scattering,
            pointwise,
            sup_norm,
        }
    }
}

/// Runs both engines on `t_grid` and reports their concurrence difference.
pub fn compare_engines(system: &System, t_grid: &[f64], quad: &QuadratureSpec) -> Result<DivergenceReport> {
    let markov: Vec<f64> = markovian::evolve(system, t_grid)?.iter().map(markovian::concurrence).collect();
    let scat = scattering::propagate(system, t_grid, quad)?.concurrence();
    Ok(DivergenceReport::between(t_grid, markov, scat))
}

/// Concurrence traces of the time-domain presets (`fig2a`, `fig2b`) on a
/// `γt` grid: one column per separation.
pub fn preset_traces(spec: &SweepSpec, gamma_t: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
    let axis = spec
        .axes
        .iter()
        .find(|a| a.axis == Axis::DTilde)
        .ok_or_else(|| Error::Precondition("trace presets need a d_tilde axis".into()))?;
    axis.values
        .par_iter()
        .map(|&d| {
            let mut cfg = spec.base;
            Axis::DTilde.apply(&mut cfg, d)?;
            let sys = cfg.validate()?;
            let gamma = sys.max_gamma();
            let times: Vec<f64> = gamma_t.iter().map(|x| x / gamma).collect();
            let states = markovian::evolve_with(&sys, markovian::Excitation::Qubit1, &times, spec.tolerances)?;
            Ok((d, states.iter().map(markovian::concurrence).collect()))
        })
        .collect()
}
