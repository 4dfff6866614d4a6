//! JSON run configuration and the `--state` mini-grammar.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gkp_magic::{GaussianState, LatticeKind, MagicFamily};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Keys accepted in a `--config` file. Command-line flags take precedence.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: Option<String>,
    pub t: Option<[f64; 2]>,
    pub lattice: Option<String>,
    pub family: Option<String>,
    pub resolution: Option<usize>,
    pub out: Option<PathBuf>,
    pub bloch_out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub nbar: Option<Vec<f64>>,
    pub f_grid: Option<Vec<f64>>,
    pub f: Option<f64>,
    pub quadrature_tol: Option<f64>,
    pub nbar_tol: Option<f64>,
    pub seed: Option<u64>,
    pub n_cases: Option<usize>,
    pub beta: Option<f64>,
    pub cutoff: Option<usize>,
    pub comb_halfwidth: Option<usize>,
    pub dual_tol: Option<f64>,
    pub oracle_tol: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))
    }
}

/// `vacuum`, `thermal:<nbar>` or `gauss:<q>,<p>,<a>,<b>,<c>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpec(pub GaussianState);

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let numbers = || -> Result<Vec<f64>, String> {
            args.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
                .collect()
        };
        let state = match kind {
            "vacuum" if args.is_empty() => Ok(GaussianState::vacuum()),
            "thermal" => match numbers()?.as_slice() {
                [nbar] => GaussianState::thermal(*nbar),
                _ => return Err("thermal takes one occupation, e.g. thermal:0.3".into()),
            },
            "gauss" => match numbers()?.as_slice() {
                [q, p, a, b, c] => GaussianState::new([*q, *p], [[*a, *b], [*b, *c]]),
                _ => return Err("gauss takes five numbers q,p,a,b,c".into()),
            },
            _ => return Err(format!("unrecognised state {s:?} (expected vacuum, thermal:<nbar> or gauss:<q>,<p>,<a>,<b>,<c>)")),
        };
        state.map(StateSpec).map_err(|e| e.to_string())
    }
}

pub fn parse_field<T: FromStr>(field: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| CliError::validation(field, e.to_string()))
}

pub fn state(value: Option<&str>) -> CliResult<GaussianState> {
    let value = value.ok_or_else(|| CliError::validation("state", "missing (use --state)"))?;
    Ok(parse_field::<StateSpec>("state", value)?.0)
}

pub fn lattice(value: Option<&str>) -> CliResult<LatticeKind> {
    value.map_or(Ok(LatticeKind::Square), |v| parse_field("lattice", v))
}

pub fn family(value: Option<&str>) -> CliResult<MagicFamily> {
    value.map_or(Ok(MagicFamily::H), |v| parse_field("family", v))
}

pub fn positive(field: &str, value: f64) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::validation(field, format!("must be positive and finite, got {value}")))
    }
}

pub fn fidelity_grid(values: &[f64]) -> CliResult<Vec<f64>> {
    if values.is_empty() {
        return Err(CliError::validation("f_grid", "empty"));
    }
    if let Some(f) = values.iter().find(|f| !(0.5..=1.0).contains(*f)) {
        return Err(CliError::validation("f_grid", format!("{f} outside [0.5, 1]")));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::validation("f_grid", "must be strictly ascending"));
    }
    Ok(values.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_grammar() {
        assert_eq!("vacuum".parse::<StateSpec>().unwrap().0, GaussianState::vacuum());
        assert_eq!("thermal:0.5".parse::<StateSpec>().unwrap().0, GaussianState::thermal(0.5).unwrap());
        let g = "gauss:0.1,-0.2,0.6,0.05,0.5".parse::<StateSpec>().unwrap().0;
        assert_eq!(g.mean()[1], -0.2);
        assert_eq!(g.cov()[(0, 1)], 0.05);
        for bad in ["", "thermal", "thermal:x", "gauss:1,2,3", "gauss:0,0,0.1,0,0.1", "squeezed:1", "vacuum:1"] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"state": "vacuum", "resolution": 8}"#).is_ok());
        let err = serde_json::from_str::<RunConfig>(r#"{"resolutoin": 8}"#).unwrap_err();
        assert!(err.to_string().contains("resolutoin"));
    }

    #[test]
    fn fidelity_grid_checks() {
        assert!(fidelity_grid(&[0.5, 0.9]).is_ok());
        assert!(fidelity_grid(&[0.9, 0.5]).is_err());
        assert!(fidelity_grid(&[0.4]).is_err());
        assert!(fidelity_grid(&[]).is_err());
    }
}
