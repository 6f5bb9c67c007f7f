//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use su2_intelligent::construct::{kappa_symmetry_residual, splits, Mirror};
use su2_intelligent::observables::populations;
use su2_intelligent::repcore::shifted_op;
use su2_intelligent::{intelligent_state, Branch, HalfInt, IntelligentSpec};
use su2_intelligent_cli::figure::{figure_table, Figure};
use su2_intelligent_cli::output::Format;
use su2_intelligent_cli::verify::{self, beta_grid, SuiteResult, VerifyOptions};

type Outcome = Result<(bool, String), String>;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn describe(s: &SuiteResult) -> String {
    format!("{} worst {:.2e} (tol {:.0e}, {} cases)", s.name, s.worst_residual, s.tolerance, s.cases)
}

fn suites(results: &[SuiteResult]) -> (bool, String) {
    let pass = results.iter().all(|s| s.pass);
    (pass, results.iter().map(describe).collect::<Vec<_>>().join("; "))
}

fn spin_half() -> Outcome {
    Ok(suites(&[verify::spin_half_closed_forms(0).map_err(err)?]))
}

fn four_routes() -> Outcome {
    Ok(suites(&[verify::four_route_agreement(h(12), None).map_err(err)?]))
}

fn intelligence() -> Outcome {
    Ok(suites(&[verify::intelligence_equality(h(12)).map_err(err)?]))
}

fn eigenvalue_law() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for t in 1..=12 {
        for (a, b) in splits(h(t)) {
            for beta in beta_grid() {
                let spec = IntelligentSpec::new(a, b, beta, Branch::Y).map_err(err)?;
                let ket = intelligent_state(&spec).map_err(err)?;
                let applied = shifted_op(spec.ell(), spec.alpha()).apply(&ket).map_err(err)?;
                let measured = ket.amplitudes().inner(&applied);
                let lambda = (a.value() - b.value()) * beta.sin();
                worst = worst.max((measured.re - lambda).abs()).max(measured.im.abs());
                cases += 1;
            }
        }
    }
    Ok((worst <= 1e-10, format!("worst |measured - (lA - lB) sin beta| {worst:.2e} over {cases} states")))
}

fn appendix() -> Outcome {
    Ok(suites(&[verify::appendix_identities(h(16)).map_err(err)?]))
}

fn symmetries() -> Outcome {
    let max = h(12);
    let mut literal = 0.0f64;
    let mut mirrored = 0.0f64;
    for t in 1..=max.twice() {
        for (a, b) in splits(h(t)) {
            for beta in beta_grid() {
                literal = literal.max(kappa_symmetry_residual(a, b, beta, Mirror::NegBeta).map_err(err)?);
                mirrored = mirrored.max(kappa_symmetry_residual(a, b, beta, Mirror::PiMinusBeta).map_err(err)?);
            }
        }
    }
    let others = [
        verify::parity_vanishing(max).map_err(err)?,
        verify::split_swap_invariance(max).map_err(err)?,
        verify::alpha_inversion(max).map_err(err)?,
    ];
    let (others_pass, others_text) = suites(&others);
    let pass = literal <= 1e-9 && others_pass;
    Ok((
        pass,
        format!(
            "|kappa^m(beta)|^2 vs |kappa^-m(-beta)|^2 worst {literal:.2e} (tol 1e-9); \
             with pi - beta instead: {mirrored:.2e}; {others_text}"
        ),
    ))
}

fn degenerate() -> Outcome {
    let max = h(12);
    Ok(suites(&[
        verify::endpoint_states(max).map_err(err)?,
        verify::nilpotent_limit(max).map_err(err)?,
        verify::max_product(max).map_err(err)?,
    ]))
}

fn completeness() -> Outcome {
    Ok(suites(&[verify::completeness(h(12)).map_err(err)?]))
}

/// Rows of a rendered CSV, header dropped.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> Result<f64, String> {
    s.parse().map_err(|_| format!("bad number {s:?}"))
}

/// Ratio curves keyed by split index `0..=2l`, in file order.
fn ratio_curves(which: Figure) -> Result<Vec<Vec<f64>>, String> {
    let csv = figure_table(which).map_err(err)?.render(Format::Csv).map_err(err)?;
    let mut curves: Vec<Vec<f64>> = Vec::new();
    let mut last = None;
    for row in csv_rows(&csv) {
        let key = (row[0].clone(), row[1].clone());
        if last.as_ref() != Some(&key) {
            curves.push(Vec::new());
            last = Some(key);
        }
        curves.last_mut().unwrap().push(num(&row[4])?);
    }
    Ok(curves)
}

fn figures() -> Outcome {
    let mut at_most_one = true;
    let mut balanced_smallest = true;
    let mut merging = true;
    let mut max_ratio = 0.0f64;
    for which in [Figure::Fig1, Figure::Fig2] {
        let curves = ratio_curves(which)?;
        let n = curves.len();
        let balance = |i: usize| (2 * i as i64 - (n as i64 - 1)).abs();
        for c in &curves {
            max_ratio = c.iter().copied().fold(max_ratio, f64::max);
            at_most_one &= c.iter().all(|&r| r <= 1.0 + 1e-9);
            let tail = &c[c.len() / 2..];
            merging &= tail.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs() + 1e-9);
            merging &= (tail[tail.len() - 1] - 1.0).abs() < 1e-3;
        }
        for i in 0..n {
            for j in 0..n {
                if balance(i) < balance(j) {
                    balanced_smallest &= curves[i].iter().zip(&curves[j]).all(|(x, y)| *x <= y + 1e-9);
                }
            }
        }
    }

    let csv = figure_table(Figure::Fig3).map_err(err)?.render(Format::Csv).map_err(err)?;
    let rows = csv_rows(&csv);
    let mut sums = 0.0f64;
    let mut literal = 0.0f64;
    let (a, b) = (h(3), h(2));
    for block in rows.chunks(6) {
        let beta = PI * num(&block[0][1])?;
        let p: Vec<f64> = block.iter().map(|r| num(&r[4])).collect::<Result<_, _>>()?;
        sums = sums.max((p.iter().sum::<f64>() - 1.0).abs());
        let flipped = populations(&IntelligentSpec::new(a, b, -beta, Branch::Y).map_err(err)?).map_err(err)?;
        for (x, y) in p.iter().zip(flipped.iter().rev()) {
            literal = literal.max((x - y).abs());
        }
    }
    let mirror = verify::figure_properties(h(6)).map_err(err)?;
    let pass = at_most_one && balanced_smallest && merging && sums <= 1e-9 && literal <= 1e-9;
    Ok((
        pass,
        format!(
            "ratio <= 1: {at_most_one} (max {max_ratio:.4}); balanced split smallest: {balanced_smallest}; \
             merging to 1 near pi: {merging}; fig3 sums worst {sums:.1e}; \
             p_m(beta) vs p_-m(-beta) worst {literal:.2e}; measured direction: {}",
            describe(&mirror)
        ),
    ))
}

fn discrepancy_notes() -> Outcome {
    let summary = verify::run_verify(&VerifyOptions::default()).map_err(err)?;
    let notes = &summary.notes;
    let factor = notes["coherent_lz"]["factor_max"].as_f64();
    let lx = notes["mean_lx"]["factor_max"].as_f64();
    let signs = notes["mean_lx"]["sign_agrees"].as_bool();
    let pass = summary.pass && factor.is_some() && lx.is_some() && signs.is_some();
    Ok((
        pass,
        format!(
            "verify pass {}; coherent <L_z> factor {:?}; <L_x> factor {:?}, sign agrees {:?}",
            summary.pass, factor, lx, signs
        ),
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "spin-1/2 closed forms", budget: Some(Duration::from_secs(1)), run: spin_half },
        Criterion { id: 2, name: "four-route agreement", budget: Some(Duration::from_secs(30)), run: four_routes },
        Criterion { id: 3, name: "intelligence equality", budget: None, run: intelligence },
        Criterion { id: 4, name: "eigenvalue law", budget: None, run: eigenvalue_law },
        Criterion { id: 5, name: "d-function and coupling identities", budget: Some(Duration::from_secs(10)), run: appendix },
        Criterion { id: 6, name: "symmetries", budget: None, run: symmetries },
        Criterion { id: 7, name: "degenerate limits", budget: None, run: degenerate },
        Criterion { id: 8, name: "completeness", budget: None, run: completeness },
        Criterion { id: 9, name: "figure properties", budget: Some(Duration::from_secs(10)), run: figures },
        Criterion { id: 10, name: "discrepancy notes", budget: None, run: discrepancy_notes },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = c.budget.is_none_or(|b| elapsed <= b);
        let ok = pass && in_time;
        if !ok {
            failures += 1;
        }
        let budget = c.budget.map_or(String::new(), |b| format!(" of {:.0} s", b.as_secs_f64()));
        println!(
            "{} {:>2} {}: {} [{:.2} s{}]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            budget
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
