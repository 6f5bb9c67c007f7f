//! `figure`: the data behind the ratio curves and the population bars.

use std::f64::consts::PI;

use rayon::prelude::*;
use su2_intelligent::construct::splits;
use su2_intelligent::observables::{lz_ratio, lz_root, populations};
use su2_intelligent::{Branch, HalfInt, IntelligentSpec};

use crate::error::Result;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// Ratio curves for every split of l = 5/2.
    Fig1,
    /// Ratio curves for every split of l = 3.
    Fig2,
    /// Populations of (3/2, 1) at the four angles with <L_z> = +-3/2, +-1/2.
    Fig3,
}

pub const FIG3_TARGETS: [f64; 4] = [1.5, 0.5, -0.5, -1.5];

/// `beta/pi = (2k + 1)/200` for `k = 0..100`; avoids `0`, `pi/2` and `pi`.
pub fn ratio_grid() -> Vec<f64> {
    (0..100).map(|k| (2 * k + 1) as f64 / 200.0).collect()
}

/// Columns `la, lb, beta_over_pi, alpha, ratio`, splits from `(l, 0)` to `(0, l)`.
pub fn ratio_table(ell: HalfInt) -> Result<Table> {
    let grid = ratio_grid();
    let points: Vec<_> = splits(ell)
        .into_iter()
        .flat_map(|pair| grid.iter().map(move |&x| (pair, x)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&((a, b), x)| {
            let spec = IntelligentSpec::new(a, b, PI * x, Branch::Y)?;
            Ok(vec![
                Cell::from(a.to_string()),
                Cell::from(b.to_string()),
                x.into(),
                spec.alpha().into(),
                lz_ratio(&spec)?.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["la", "lb", "beta_over_pi", "alpha", "ratio"]);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

/// Columns `lz_target, beta_over_pi, alpha, m, population`.
pub fn population_table() -> Result<Table> {
    let (a, b) = (HalfInt::from_twice(3), HalfInt::ONE);
    let mut table = Table::new(["lz_target", "beta_over_pi", "alpha", "m", "population"]);
    for target in FIG3_TARGETS {
        let beta = lz_root(a, b, target, Branch::Y)?;
        let spec = IntelligentSpec::new(a, b, beta, Branch::Y)?;
        for (m, p) in spec.ell().projections().zip(populations(&spec)?) {
            table.push(vec![
                target.into(),
                (beta / PI).into(),
                spec.alpha().into(),
                m.to_string().into(),
                p.into(),
            ]);
        }
    }
    Ok(table)
}

pub fn figure_table(which: Figure) -> Result<Table> {
    match which {
        Figure::Fig1 => ratio_table(HalfInt::from_twice(5)),
        Figure::Fig2 => ratio_table(HalfInt::from_int(3)),
        Figure::Fig3 => population_table(),
    }
}
