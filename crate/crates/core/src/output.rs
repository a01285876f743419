//! Deterministic CSV / JSON writers.
//!
//! Every file starts with `#` comment lines naming the tool version and the
//! resolved configuration. Floats are written with 17 significant digits so
//! that they parse back to the same bits.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::experiments::{DivergenceReport, SweepResult};
use crate::markovian::{concurrence, ReducedState};
use crate::params::SystemConfig;
use crate::scattering::{AmplitudeTrace, SpectrumPoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trip float formatting.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment header lines.
#[derive(Debug, Clone, Default)]
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(kind: &str) -> Self {
        Header {
            lines: vec![format!("chiral-qed {VERSION}"), format!("output: {kind}")],
        }
    }

    pub fn config(self, config: &SystemConfig) -> Self {
        let json = serde_json::to_string(config).expect("config serializes");
        self.line(format!("config: {json}"))
    }

    pub fn entry(self, key: &str, value: impl Serialize) -> Self {
        let json = serde_json::to_string(&value).expect("header value serializes");
        self.line(format!("{key}: {json}"))
    }

    pub fn line(mut self, line: impl Into<String>) -> Self {
        self.lines.push(line.into());
        self
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        for l in &self.lines {
            writeln!(w, "# {l}")?;
        }
        Ok(())
    }
}

fn row(w: &mut impl Write, cells: &[String]) -> Result<()> {
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}

fn complex(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

/// `t, rho00, rho11, rho22, re_rho12, im_rho12, concurrence`.
pub fn write_markov_trace(w: &mut impl Write, header: &Header, states: &[ReducedState]) -> Result<()> {
    header.write(w)?;
    writeln!(w, "t,rho00,rho11,rho22,re_rho12,im_rho12,concurrence")?;
    for s in states {
        let [re, im] = complex(s.rho12);
        row(w, &[num(s.t), num(s.rho00), num(s.rho11), num(s.rho22), re, im, num(concurrence(s))])?;
    }
    Ok(())
}

/// `t, re_alpha1, im_alpha1, re_alpha2, im_alpha2, concurrence`.
pub fn write_amplitude_trace(w: &mut impl Write, header: &Header, trace: &AmplitudeTrace) -> Result<()> {
    header.write(w)?;
    writeln!(w, "t,re_alpha1,im_alpha1,re_alpha2,im_alpha2,concurrence")?;
    for (i, c) in trace.concurrence().into_iter().enumerate() {
        let [r1, i1] = complex(trace.alpha1[i]);
        let [r2, i2] = complex(trace.alpha2[i]);
        row(w, &[num(trace.times[i]), r1, i1, r2, i2, num(c)])?;
    }
    Ok(())
}

/// `epsilon, re_t, im_t, re_r, im_r, flux_deficit`.
pub fn write_spectrum(w: &mut impl Write, header: &Header, points: &[SpectrumPoint]) -> Result<()> {
    header.write(w)?;
    writeln!(w, "epsilon,re_t,im_t,re_r,im_r,flux_deficit")?;
    for p in points {
        let [tr, ti] = complex(p.t);
        let [rr, ri] = complex(p.r);
        row(w, &[num(p.energy), tr, ti, rr, ri, num(p.flux_deficit)])?;
    }
    Ok(())
}

/// One row per grid point: axis values, `c_max, t_star, engine, status,
/// message`.
pub fn write_sweep_csv(w: &mut impl Write, header: &Header, result: &SweepResult) -> Result<()> {
    header.write(w)?;
    let mut cols: Vec<String> = result.axis_names().iter().map(|s| s.to_string()).collect();
    cols.extend(["c_max", "t_star", "engine", "status", "message"].map(String::from));
    writeln!(w, "{}", cols.join(","))?;
    for r in &result.records {
        let mut cells: Vec<String> = r.coords.iter().map(|&x| num(x)).collect();
        cells.push(r.c_max.map(num).unwrap_or_default());
        cells.push(r.t_star.map(num).unwrap_or_default());
        cells.push(r.engine.to_string());
        cells.push(r.status.clone());
        cells.push(r.message.as_deref().map(quote).unwrap_or_default());
        row(w, &cells)?;
    }
    Ok(())
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
}

/// Metadata sidecar of a sweep: spec, grids, tolerances, config hash.
pub fn write_sweep_metadata(w: &mut impl Write, result: &SweepResult) -> Result<()> {
    #[derive(Serialize)]
    struct Meta<'a> {
        tool: &'a str,
        version: &'a str,
        config_hash: &'a str,
        points: usize,
        failed: usize,
        spec: &'a crate::experiments::SweepSpec,
    }
    let meta = Meta {
        tool: "chiral-qed",
        version: VERSION,
        config_hash: &result.config_hash,
        points: result.records.len(),
        failed: result.failures().count(),
        spec: &result.spec,
    };
    serde_json::to_writer_pretty(&mut *w, &meta).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

/// `t, c_markovian, c_scattering, abs_difference`.
pub fn write_divergence(w: &mut impl Write, header: &Header, report: &DivergenceReport) -> Result<()> {
    header.write(w)?;
    writeln!(w, "t,c_markovian,c_scattering,abs_difference")?;
    for i in 0..report.times.len() {
        row(
            w,
            &[
                num(report.times[i]),
                num(report.markovian[i]),
                num(report.scattering[i]),
                num(report.pointwise[i]),
            ],
        )?;
    }
    Ok(())
}

/// Time-domain figure data: `gamma_t` then one concurrence column per
/// separation.
pub fn write_trace_table(w: &mut impl Write, header: &Header, gamma_t: &[f64], columns: &[(f64, Vec<f64>)]) -> Result<()> {
    header.write(w)?;
    let mut names = vec!["gamma_t".to_string()];
    names.extend(columns.iter().map(|(d, _)| format!("c_d{d}")));
    writeln!(w, "{}", names.join(","))?;
    for (i, gt) in gamma_t.iter().enumerate() {
        let mut cells = vec![num(*gt)];
        cells.extend(columns.iter().map(|(_, c)| num(c[i])));
        row(w, &cells)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_roundtrip() {
        for x in [0.1, 1.0 / 3.0, 2.0 / std::f64::consts::E, 1e-300, -123456.789] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits: String = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn header_embeds_config_and_version() {
        let cfg = SystemConfig::symmetric(0.9, 1.0, 1e-3, 1.0).unwrap();
        let mut buf = Vec::new();
        Header::new("test").config(&cfg).write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("# chiral-qed {VERSION}\n")));
        assert!(text.contains("# config: {\"qubit1\""));
    }

    #[test]
    fn messages_are_quoted() {
        assert_eq!(quote("a, \"b\"\nc"), "\"a, \"\"b\"\" c\"");
    }
}
