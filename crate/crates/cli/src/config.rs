//! Sweep configuration: which `(lA, lB)` pairs, which grid, which columns.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use su2_intelligent::{Branch, HalfInt};

use crate::error::{CliError, Result};
use crate::output::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Parameter {
    Beta,
    Alpha,
}

/// `points` equally spaced values from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// A number, optionally followed by `pi` (`0.5pi`, `pi`, `-2pi`).
fn parse_scalar(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*');
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().ok()?,
            };
            Some(c * PI)
        }
        None => s.parse().ok(),
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, points] = parts.as_slice() else {
            return Err(format!("grid {s:?} is not start:stop:points"));
        };
        let start = parse_scalar(start).ok_or_else(|| format!("bad grid start {start:?}"))?;
        let stop = parse_scalar(stop).ok_or_else(|| format!("bad grid stop {stop:?}"))?;
        let points: usize = points.trim().parse().map_err(|_| format!("bad point count {points:?}"))?;
        if points < 2 {
            return Err("a grid needs at least 2 points".to_string());
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err("grid bounds must be finite".to_string());
        }
        Ok(Grid { start, stop, points })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|k| {
                if k == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Quantities a sweep can report per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Column {
    ExpLx,
    ExpLy,
    ExpLz,
    VarLx,
    VarLy,
    Product,
    Rhs,
    Anticomm,
    IntelligenceResidual,
    EigenResidual,
    LzFormula,
    Ratio,
}

impl Column {
    pub const DEFAULT: [Column; 9] = [
        Column::ExpLx,
        Column::ExpLy,
        Column::ExpLz,
        Column::VarLx,
        Column::VarLy,
        Column::Product,
        Column::Rhs,
        Column::Anticomm,
        Column::EigenResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::ExpLx => "exp_lx",
            Column::ExpLy => "exp_ly",
            Column::ExpLz => "exp_lz",
            Column::VarLx => "var_lx",
            Column::VarLy => "var_ly",
            Column::Product => "product",
            Column::Rhs => "rhs",
            Column::Anticomm => "anticomm",
            Column::IntelligenceResidual => "intelligence_residual",
            Column::EigenResidual => "eigen_residual",
            Column::LzFormula => "lz_formula",
            Column::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ell_pairs: Vec<(HalfInt, HalfInt)>,
    pub parameter: Parameter,
    pub grid: Grid,
    /// Used for `beta` grids; `alpha` grids pick the branch from `|alpha|`.
    pub branch: Branch,
    pub outputs: Vec<Column>,
    pub format: Format,
    pub out_path: Option<PathBuf>,
    /// Keep grid points at `beta = 0, pi` or `alpha = +-1` as exact basis states.
    pub include_endpoints: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ell_pairs.is_empty() {
            return Err(CliError::Usage("no (lA, lB) pairs given".into()));
        }
        if self.grid.points < 2 {
            return Err(CliError::Usage("a grid needs at least 2 points".into()));
        }
        if self.outputs.is_empty() {
            return Err(CliError::Usage("no output columns selected".into()));
        }
        if !self.include_endpoints {
            for v in self.grid.values() {
                let singular = match self.parameter {
                    Parameter::Beta => {
                        let b = v.rem_euclid(2.0 * PI);
                        b == 0.0 || b == PI
                    }
                    Parameter::Alpha => v.abs() == 1.0,
                };
                if singular {
                    return Err(CliError::Usage(format!(
                        "grid point {v} is a singular endpoint; pass --include-endpoints to keep it"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.1:0.9:5".parse().unwrap();
        assert_eq!(g.values().len(), 5);
        assert_eq!(g.values()[4], 0.9);
        let g: Grid = "0:pi:3".parse().unwrap();
        assert_eq!(g.values(), vec![0.0, PI / 2.0, PI]);
        let g: Grid = "0.25pi:-1.5:2".parse().unwrap();
        assert_eq!(g.start, 0.25 * PI);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("1:2:1".parse::<Grid>().is_err());
        assert!("a:2:3".parse::<Grid>().is_err());
    }

    #[test]
    fn endpoint_validation() {
        let mut cfg = SweepConfig {
            ell_pairs: vec![(HalfInt::ONE, HalfInt::ZERO)],
            parameter: Parameter::Beta,
            grid: "0:pi:5".parse().unwrap(),
            branch: Branch::Y,
            outputs: Column::DEFAULT.to_vec(),
            format: Format::Csv,
            out_path: None,
            include_endpoints: false,
        };
        assert!(cfg.validate().is_err());
        cfg.include_endpoints = true;
        assert!(cfg.validate().is_ok());
        cfg.parameter = Parameter::Alpha;
        cfg.grid = "-0.5:0.5:3".parse().unwrap();
        cfg.include_endpoints = false;
        assert!(cfg.validate().is_ok());
        cfg.ell_pairs.clear();
        assert!(cfg.validate().is_err());
    }
}
