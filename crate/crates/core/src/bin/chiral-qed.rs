use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chiral_qed::config;
use chiral_qed::experiments::{self, Axis, AxisGrid, Engine, Preset, SweepSpec};
use chiral_qed::markovian;
use chiral_qed::output::{self, Header};
use chiral_qed::scattering::{self, Branch, LossModel, QuadratureSpec};
use chiral_qed::{Error, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "chiral-qed", version, about = "Two-qubit entanglement in chiral waveguide QED")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML system configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config field or target (`qubit1.gamma_r=0.5`, `delta=0.9`)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// markovian, scattering or auto
    #[arg(long, global = true)]
    engine: Option<String>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Quadrature refinement tolerance of the scattering engine
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Loss treatment of the scattering engine: reservoir-channels or waveguide-overlap
    #[arg(long, global = true)]
    loss_model: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence trace after exciting qubit 1
    Simulate {
        /// Final time (default: twenty lifetimes, plus the delay for scattering)
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Transmission and reflection amplitudes
    Spectrum {
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: Option<f64>,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        /// plus (incident from the left) or minus
        #[arg(long, default_value = "plus")]
        branch: String,
    },
    /// Maximum concurrence over a parameter grid
    Sweep {
        /// Start from a figure preset instead of the config
        #[arg(long)]
        preset: Option<String>,
        /// `name=start:stop:n` or `name=start:stop:n:log`, repeatable
        #[arg(long = "axis", value_name = "AXIS")]
        axes: Vec<String>,
        /// Keep a checkpoint in the output directory and resume from it
        #[arg(long)]
        resume: bool,
    },
    /// Regenerate figure data (fig2a ... fig4c, or all)
    Figures { name: String },
    /// Check a configuration and print derived quantities
    Validate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            if e.is_input_error() || matches!(e, Error::Io(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let engine = c.engine.as_deref().map(str::parse::<Engine>).transpose()?;
    let mut quad = QuadratureSpec::default();
    if let Some(t) = c.quad_tol {
        if !(t > 0.0) {
            return Err(Error::Config(format!("quadrature tolerance {t} must be positive")));
        }
        quad.tolerance = t;
    }
    if let Some(m) = &c.loss_model {
        quad.loss_model = match m.as_str() {
            "reservoir-channels" => LossModel::ReservoirChannels,
            "waveguide-overlap" => LossModel::WaveguideOverlap,
            _ => return Err(Error::Config(format!("unknown loss model `{m}`"))),
        };
    }
    match &cli.command {
        Command::Validate => validate(c),
        Command::Simulate { t_max, points } => simulate(c, engine, &quad, *t_max, *points),
        Command::Spectrum { emin, emax, points, branch } => spectrum(c, *emin, *emax, *points, branch),
        Command::Sweep { preset, axes, resume } => {
            let mut spec = match preset {
                Some(p) => {
                    let mut s = SweepSpec::preset(p.parse()?);
                    config::apply_overrides(&mut s.base, &c.overrides)?;
                    s
                }
                None => SweepSpec::custom(system_config(c)?, vec![], Engine::Auto),
            };
            if !axes.is_empty() {
                spec.axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<_>>()?;
            }
            if spec.axes.is_empty() {
                return Err(Error::Config("sweep needs --preset or at least one --axis".into()));
            }
            if let Some(e) = engine {
                spec.engine = e;
            }
            spec.quadrature = quad;
            sweep(c, &spec, "sweep", *resume)
        }
        Command::Figures { name } => {
            let presets: Vec<Preset> = if name == "all" {
                Preset::FIGURES.to_vec()
            } else {
                let p: Preset = name.parse()?;
                if p == Preset::Custom {
                    return Err(Error::Config("`custom` is not a figure".into()));
                }
                vec![p]
            };
            for p in presets {
                let mut spec = SweepSpec::preset(p);
                config::apply_overrides(&mut spec.base, &c.overrides)?;
                if let Some(e) = engine {
                    spec.engine = e;
                }
                spec.quadrature = quad;
                sweep(c, &spec, p.name(), false)?;
                if matches!(p, Preset::Fig2a | Preset::Fig2b) {
                    traces(c, &spec, p.name())?;
                }
            }
            Ok(())
        }
    }
}

fn system_config(c: &Common) -> Result<SystemConfig> {
    let mut cfg = match &c.config {
        Some(path) => config::load(path)?,
        None => SystemConfig::symmetric(0.9, 1.0, experiments::MARKOV_GAMMA_TOTAL, 1.0)?,
    };
    config::apply_overrides(&mut cfg, &c.overrides)?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn validate(c: &Common) -> Result<()> {
    let cfg = system_config(c)?;
    let sys = cfg.validate()?;
    let d = sys.derived();
    for (j, q) in d.qubits.iter().enumerate() {
        println!(
            "qubit{}: gamma = {:.6e}  Delta = {:.4}  beta = {:.4}",
            j + 1,
            q.gamma,
            q.delta,
            q.beta
        );
    }
    println!("d_tilde = {:.6}", d.d_tilde);
    println!("q = {:.6}", d.q);
    println!("lambda0 = {:.6}", d.lambda0);
    println!("gamma*d/v_g = {:.3e}", sys.max_gamma() * sys.delay());
    let loc = scattering::localized_state_exists(&sys);
    println!("localized state: {} ({})", loc.exists, loc.diagnostic);
    println!("auto engine: {}", experiments::select_engine(&sys));
    Ok(())
}

fn simulate(c: &Common, engine: Option<Engine>, quad: &QuadratureSpec, t_max: Option<f64>, points: usize) -> Result<()> {
    let cfg = system_config(c)?;
    let sys = cfg.validate()?;
    let engine = match engine.unwrap_or(Engine::Auto) {
        Engine::Auto => experiments::select_engine(&sys),
        e => e,
    };
    let t_max = t_max.unwrap_or_else(|| match engine {
        Engine::Scattering => scattering::scattering_horizon(&sys),
        _ => markovian::default_horizon(&sys),
    });
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::Config(format!("t_max = {t_max} must be non-negative")));
    }
    let grid: Vec<f64> = if t_max == 0.0 || points < 2 {
        vec![0.0]
    } else {
        (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect()
    };
    let header = Header::new("trace").config(&cfg).entry("engine", engine.to_string());
    let (path, mut w) = create(&c.out, "trace.csv")?;
    match engine {
        Engine::Scattering => {
            let trace = scattering::propagate(&sys, &grid, quad)?;
            let header = header.entry("quadrature", trace.report);
            output::write_amplitude_trace(&mut w, &header, &trace)?;
        }
        _ => {
            let states = markovian::evolve(&sys, &grid)?;
            output::write_markov_trace(&mut w, &header, &states)?;
        }
    }
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}

fn spectrum(c: &Common, emin: Option<f64>, emax: Option<f64>, points: usize, branch: &str) -> Result<()> {
    let cfg = system_config(c)?;
    let sys = cfg.validate()?;
    let branch = match branch {
        "plus" => Branch::Plus,
        "minus" => Branch::Minus,
        _ => return Err(Error::Config(format!("unknown branch `{branch}` (plus or minus)"))),
    };
    let centre = (cfg.qubit1.omega + cfg.qubit2.omega) / 2.0;
    let width = 20.0 * (2.0 * sys.max_gamma()).max(sys.detuning().abs());
    let (lo, hi) = (emin.unwrap_or(centre - width), emax.unwrap_or(centre + width));
    if !(hi > lo) || points < 2 {
        return Err(Error::Config("spectrum needs emax > emin and at least two points".into()));
    }
    let energies: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let spec = scattering::transmission_spectrum(&sys, &energies, branch)?;
    let header = Header::new("spectrum")
        .config(&cfg)
        .entry("branch", if branch == Branch::Plus { "plus" } else { "minus" });
    let (path, mut w) = create(&c.out, "spectrum.csv")?;
    output::write_spectrum(&mut w, &header, &spec)?;
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}

fn parse_axis(text: &str) -> Result<AxisGrid> {
    let bad = || Error::Config(format!("axis `{text}` is not of the form name=start:stop:n[:log]"));
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let axis: Axis = name.trim().parse()?;
    let parts: Vec<&str> = range.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match parts.get(3).map(|s| s.trim()) {
        None | Some("lin") => Ok(AxisGrid::linear(axis, start, stop, n)),
        Some("log") if start > 0.0 && stop > 0.0 => Ok(AxisGrid::log(axis, start, stop, n)),
        _ => Err(bad()),
    }
}

fn sweep(c: &Common, spec: &SweepSpec, stem: &str, resume: bool) -> Result<()> {
    let result = if resume {
        fs::create_dir_all(&c.out)?;
        experiments::run_sweep_resumable(spec, &c.out.join(format!("{stem}.checkpoint.jsonl")), 64)?
    } else {
        experiments::run_sweep(spec)?
    };
    let header = Header::new("sweep")
        .entry("preset", spec.preset.name())
        .config(&spec.base)
        .entry("engine", spec.engine.to_string())
        .entry("config_hash", &result.config_hash);
    let (path, mut w) = create(&c.out, &format!("{stem}.csv"))?;
    output::write_sweep_csv(&mut w, &header, &result)?;
    w.flush()?;
    let (meta_path, mut m) = create(&c.out, &format!("{stem}.json"))?;
    output::write_sweep_metadata(&mut m, &result)?;
    m.flush()?;
    let failed = result.failures().count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} points failed; see the status column", result.records.len());
    }
    println!("{}", path.display());
    println!("{}", meta_path.display());
    Ok(())
}

fn traces(c: &Common, spec: &SweepSpec, stem: &str) -> Result<()> {
    let gamma_t: Vec<f64> = (0..=400).map(|k| k as f64 * 0.025).collect();
    let columns = experiments::preset_traces(spec, &gamma_t)?;
    let header = Header::new("concurrence traces").entry("preset", stem).config(&spec.base);
    let (path, mut w) = create(&c.out, &format!("{stem}_traces.csv"))?;
    output::write_trace_table(&mut w, &header, &gamma_t, &columns)?;
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}
