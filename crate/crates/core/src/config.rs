//! TOML configuration files and `key=value` overrides.
//!
//! A file holds exactly the [`SystemConfig`] fields:
//!
//! ```toml
//! v_g = 1.0
//! omega0 = 1.0
//!
//! [qubit1]
//! omega = 1.0
//! gamma_r = 0.95e-3
//! gamma_l = 0.05e-3
//! gamma_loss = 0.0
//! position = 0.0
//!
//! [qubit2]
//! # ...
//! ```
//!
//! Overrides address fields with dotted keys (`qubit1.gamma_r=0.5`). The
//! sweep axis names (`delta`, `beta`, `d_tilde`, ...) are accepted too and
//! applied after the field overrides, in the order given.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::Axis;
use crate::params::SystemConfig;

const QUBIT_FIELDS: [&str; 5] = ["omega", "gamma_r", "gamma_l", "gamma_loss", "position"];

/// Parses TOML text into a configuration (unvalidated).
pub fn parse(text: &str) -> Result<SystemConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn to_toml(config: &SystemConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

/// Splits `key=value` and parses the value as a number.
pub fn parse_override(spec: &str) -> Result<(String, f64)> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("override `{key}`: `{}` is not a number", value.trim())))?;
    Ok((key.to_string(), value))
}

/// Applies overrides to `config`. Unknown keys are errors.
pub fn apply_overrides(config: &mut SystemConfig, overrides: &[String]) -> Result<()> {
    let parsed: Vec<(String, f64)> = overrides.iter().map(|s| parse_override(s)).collect::<Result<_>>()?;
    let mut derived = Vec::new();
    for (key, value) in parsed {
        if let Some(slot) = field_mut(config, &key) {
            *slot = value;
        } else if let Ok(axis) = key.parse::<Axis>() {
            derived.push((axis, value));
        } else {
            return Err(Error::Config(format!("unknown override key `{key}`")));
        }
    }
    for (axis, value) in derived {
        axis.apply(config, value)?;
    }
    Ok(())
}

fn field_mut<'a>(config: &'a mut SystemConfig, key: &str) -> Option<&'a mut f64> {
    match key {
        "v_g" => return Some(&mut config.v_g),
        "omega0" => return Some(&mut config.omega0),
        _ => {}
    }
    let (qubit, field) = key.split_once('.')?;
    let q = match qubit {
        "qubit1" => &mut config.qubit1,
        "qubit2" => &mut config.qubit2,
        _ => return None,
    };
    if !QUBIT_FIELDS.contains(&field) {
        return None;
    }
    Some(match field {
        "omega" => &mut q.omega,
        "gamma_r" => &mut q.gamma_r,
        "gamma_l" => &mut q.gamma_l,
        "gamma_loss" => &mut q.gamma_loss,
        _ => &mut q.position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let cfg = SystemConfig::symmetric(0.9, 0.98, 2e-3, 1.0).unwrap();
        assert_eq!(parse(&to_toml(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn unknown_field_in_file_is_rejected() {
        let mut text = to_toml(&SystemConfig::symmetric(0.0, 1.0, 1.0, 1.0).unwrap());
        text = text.replace("gamma_loss", "gamma_lost");
        assert!(matches!(parse(&text), Err(Error::Config(_))));
    }

    #[test]
    fn overrides() {
        let mut cfg = SystemConfig::symmetric(0.0, 1.0, 1.0, 1.0).unwrap();
        apply_overrides(&mut cfg, &["qubit1.gamma_r=0.95".into(), "omega0 = 1".into()]).unwrap();
        assert_eq!(cfg.qubit1.gamma_r, 0.95);
        apply_overrides(&mut cfg, &["delta=0.9".into()]).unwrap();
        let s = cfg.validate().unwrap();
        assert!((s.derived().qubits[1].delta - 0.9).abs() < 1e-12);
    }

    #[test]
    fn bad_overrides() {
        let mut cfg = SystemConfig::symmetric(0.0, 1.0, 1.0, 1.0).unwrap();
        for bad in ["qubit3.omega=1", "qubit1.gamma=1", "nonsense=2", "qubit1.omega", "v_g=fast"] {
            assert!(matches!(apply_overrides(&mut cfg, &[bad.into()]), Err(Error::Config(_))), "{bad}");
        }
    }
}
