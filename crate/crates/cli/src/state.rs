//! `state`: amplitudes of one intelligent state.

use serde_json::json;
use su2_intelligent::{intelligent_state, Branch, HalfInt, IntelligentSpec};

use crate::error::Result;
use crate::output::{Format, Table};

/// How the state is parameterized on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateParam {
    Alpha(f64),
    Beta(f64, Branch),
}

pub fn build_spec(ell_a: HalfInt, ell_b: HalfInt, param: StateParam) -> Result<IntelligentSpec> {
    Ok(match param {
        StateParam::Alpha(alpha) => IntelligentSpec::from_alpha(ell_a, ell_b, alpha)?,
        StateParam::Beta(beta, branch) => IntelligentSpec::new(ell_a, ell_b, beta, branch)?,
    })
}

/// Columns `m, re, im, prob`, one row per `m = l, ..., -l`.
pub fn state_table(spec: &IntelligentSpec) -> Result<Table> {
    let ket = intelligent_state(spec)?;
    let mut table = Table::new(["m", "re", "im", "prob"]);
    for (m, amp) in ket.components() {
        table.push(vec![m.to_string().into(), amp.re.into(), amp.im.into(), amp.norm_sqr().into()]);
    }
    Ok(table)
}

pub fn render_state(spec: &IntelligentSpec, format: Format) -> Result<String> {
    let table = state_table(spec)?;
    match format {
        Format::Csv => Ok(table.to_csv()),
        Format::Json => {
            let doc = json!({
                "la": spec.ell_a().to_string(),
                "lb": spec.ell_b().to_string(),
                "branch": spec.branch(),
                "beta": spec.beta(),
                "alpha": spec.alpha(),
                "amplitudes": table.to_json_value(),
            });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
    }
}
