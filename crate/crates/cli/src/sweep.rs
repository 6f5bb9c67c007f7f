//! `sweep`: observables over a one-parameter grid for several `(lA, lB)` pairs.

use rayon::prelude::*;
use su2_intelligent::observables::{avg_lz_formula, lz_ratio, report};
use su2_intelligent::IntelligentSpec;

use crate::config::{Column, Parameter, SweepConfig};
use crate::error::Result;
use crate::output::{Cell, Table};

fn row(cfg: &SweepConfig, spec: &IntelligentSpec, value: f64) -> Result<Vec<Cell>> {
    let r = report(spec)?;
    let (beta, alpha) = match cfg.parameter {
        Parameter::Beta => (value, spec.alpha()),
        Parameter::Alpha => (spec.beta(), value),
    };
    let mut cells: Vec<Cell> = vec![
        spec.ell_a().to_string().into(),
        spec.ell_b().to_string().into(),
        spec.branch().to_string().into(),
        beta.into(),
        (beta / std::f64::consts::PI).into(),
        alpha.into(),
    ];
    for col in &cfg.outputs {
        let v = match col {
            Column::ExpLx => r.exp_lx,
            Column::ExpLy => r.exp_ly,
            Column::ExpLz => r.exp_lz,
            Column::VarLx => r.var_lx,
            Column::VarLy => r.var_ly,
            Column::Product => r.product,
            Column::Rhs => r.rhs,
            Column::Anticomm => r.anticomm,
            Column::IntelligenceResidual => r.intelligence_residual,
            Column::EigenResidual => r.eigen_residual.unwrap_or(f64::NAN),
            Column::LzFormula => avg_lz_formula(spec)?,
            Column::Ratio => lz_ratio(spec)?,
        };
        cells.push(v.into());
    }
    Ok(cells)
}

/// Rows ordered by pair, then by grid index; points are evaluated in parallel.
pub fn sweep_table(cfg: &SweepConfig) -> Result<Table> {
    cfg.validate()?;
    let values = cfg.grid.values();
    let points: Vec<_> = cfg
        .ell_pairs
        .iter()
        .flat_map(|&pair| values.iter().map(move |&v| (pair, v)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&((a, b), v)| {
            let spec = match cfg.parameter {
                Parameter::Beta => IntelligentSpec::new(a, b, v, cfg.branch)?,
                Parameter::Alpha => IntelligentSpec::from_alpha(a, b, v)?,
            };
            row(cfg, &spec, v)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut header = vec!["la", "lb", "branch", "beta", "beta_over_pi", "alpha"];
    header.extend(cfg.outputs.iter().map(|c| c.name()));
    let mut table = Table::new(header);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Format;
    use su2_intelligent::{Branch, HalfInt};

    fn config(parameter: Parameter, grid: &str) -> SweepConfig {
        SweepConfig {
            ell_pairs: vec![(HalfInt::from_twice(3), HalfInt::ONE), (HalfInt::ONE, HalfInt::ONE)],
            parameter,
            grid: grid.parse().unwrap(),
            branch: Branch::Y,
            outputs: vec![Column::Product, Column::Rhs, Column::Ratio],
            format: Format::Csv,
            out_path: None,
            include_endpoints: false,
        }
    }

    #[test]
    fn beta_grid_keeps_exact_values() {
        let t = sweep_table(&config(Parameter::Beta, "0.1:3:7")).unwrap();
        assert_eq!(t.rows().len(), 14);
        assert_eq!(t.header()[6], "product");
        assert_eq!(t.rows()[6][3], Cell::Num(3.0));
        for r in t.rows() {
            let (Cell::Num(p), Cell::Num(q)) = (&r[6], &r[7]) else { panic!() };
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_grid_switches_branch() {
        let t = sweep_table(&config(Parameter::Alpha, "-3:0.5:6")).unwrap();
        let branches: Vec<_> = t.rows().iter().map(|r| r[2].clone()).collect();
        assert_eq!(branches[0], Cell::from("x"));
        assert_eq!(branches[5], Cell::from("y"));
        assert_eq!(t.rows()[0][5], Cell::Num(-3.0));
    }
}
