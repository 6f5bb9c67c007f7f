//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use su2_intelligent::{Branch, HalfInt};

use crate::config::{Column, Grid, Parameter, SweepConfig};
use crate::error::{CliError, Result};
use crate::figure::Figure;
use crate::output::Format;
use crate::state::StateParam;
use crate::verify::{Fault, VerifyOptions};

fn parse_half(s: &str) -> std::result::Result<HalfInt, String> {
    let x: HalfInt = s.parse().map_err(|e: su2_intelligent::Error| e.to_string())?;
    if x.twice() < 0 {
        return Err(format!("{s} is negative"));
    }
    Ok(x)
}

fn parse_branch(s: &str) -> std::result::Result<Branch, String> {
    s.parse().map_err(|e: su2_intelligent::Error| e.to_string())
}

/// Intelligent states of su(2) built from coupled spin coherent states.
#[derive(Debug, Parser)]
#[command(name = "su2is", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitudes of one state.
    State(StateArgs),
    /// Observables over a grid of beta or alpha.
    Sweep(SweepArgs),
    /// Data for the ratio curves (fig1, fig2) or the population bars (fig3).
    Figure(FigureArgs),
    /// Run every property suite and print a JSON summary.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Angular momentum of the first half, e.g. 3/2 or 1.5.
    #[arg(long, value_parser = parse_half)]
    pub la: HalfInt,
    #[arg(long, value_parser = parse_half)]
    pub lb: HalfInt,
    /// Selects the branch from |alpha|.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["beta", "branch"], required_unless_present = "beta")]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Branch used with --beta.
    #[arg(long, value_parser = parse_branch)]
    pub branch: Option<Branch>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl StateArgs {
    pub fn param(&self) -> Result<StateParam> {
        match (self.alpha, self.beta) {
            (Some(a), None) => Ok(StateParam::Alpha(a)),
            (None, Some(b)) => Ok(StateParam::Beta(b, self.branch.unwrap_or(Branch::Y))),
            _ => Err(CliError::Usage("give exactly one of --alpha and --beta".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// First halves; paired with --lb by position.
    #[arg(long, value_parser = parse_half, num_args = 1.., value_delimiter = ',', required = true)]
    pub la: Vec<HalfInt>,
    #[arg(long, value_parser = parse_half, num_args = 1.., value_delimiter = ',', required = true)]
    pub lb: Vec<HalfInt>,
    #[arg(long, value_enum, default_value = "beta")]
    pub param: Parameter,
    /// start:stop:points, bounds may carry a pi suffix (0.01pi:0.99pi:99).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Grid,
    #[arg(long, value_parser = parse_branch, default_value = "y")]
    pub branch: Branch,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub columns: Vec<Column>,
    /// Keep beta = 0, pi or alpha = +-1 as exact basis states.
    #[arg(long)]
    pub include_endpoints: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SweepArgs {
    pub fn config(&self) -> Result<SweepConfig> {
        if self.la.len() != self.lb.len() {
            return Err(CliError::Usage(format!(
                "--la has {} values but --lb has {}",
                self.la.len(),
                self.lb.len()
            )));
        }
        let outputs = if self.columns.is_empty() { Column::DEFAULT.to_vec() } else { self.columns.clone() };
        let cfg = SweepConfig {
            ell_pairs: self.la.iter().copied().zip(self.lb.iter().copied()).collect(),
            parameter: self.param,
            grid: self.grid,
            branch: self.branch,
            outputs,
            format: self.output.format,
            out_path: self.output.out.clone(),
            include_endpoints: self.include_endpoints,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_half, default_value = "4")]
    pub max_ell: HalfInt,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

impl VerifyArgs {
    pub fn options(&self) -> VerifyOptions {
        VerifyOptions {
            max_ell: self.max_ell,
            seed: self.seed,
            fault: self.inject_fault,
        }
    }
}
