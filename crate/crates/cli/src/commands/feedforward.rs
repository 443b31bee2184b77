//! `feedforward`: the continuous measurement + feedforward protocol. Checks
//! the superoperator of its unconditional generator against the equivalent
//! directional Lindblad model (λ = √(kγ_ff)/2, η = √(k/4γ_ff)), then runs a
//! trajectory ensemble and compares its means with the deterministic
//! evolution at a handful of sample times.

use nonrecip::feedforward::{
    equivalence_model, equivalence_parameters, run_ensemble, unconditional_generator,
    FeedforwardSpec,
};
use nonrecip::fock::{mode_number, FockOperator, FockSpace};
use nonrecip::lindblad::{propagate, superoperator_matrix, DensityMatrix};
use serde::Serialize;

use crate::artifact::{Cell, Ctx, Table};
use crate::config::FeedforwardConfig;
use crate::error::CliError;
use crate::opexpr::parse_operator;

#[derive(Serialize)]
struct Comparison {
    time: f64,
    observable: String,
    ensemble_mean: f64,
    stderr: f64,
    exact: f64,
    /// |mean − exact| in units of the standard error.
    sigma: f64,
}

#[derive(Serialize)]
struct FeedforwardReport {
    k: f64,
    gamma_ff: f64,
    /// Coherent strength of the equivalent directional model.
    lambda: f64,
    /// Local-dissipation asymmetry of the equivalent directional model.
    eta: f64,
    /// Largest entrywise |generator − directional model| superoperator gap.
    superop_max_abs_diff: f64,
    trajectories: usize,
    dt: f64,
    max_sigma: f64,
    comparisons: Vec<Comparison>,
}

pub fn run(ctx: &mut Ctx, cfg: &FeedforwardConfig) -> Result<(), CliError> {
    let space = FockSpace::new(&cfg.cutoffs)?;
    let a1 = parse_operator(&cfg.a1, &space)?;
    let f2 = parse_operator(&cfg.f2, &space)?;
    let spec = FeedforwardSpec::new(&a1, &f2, cfg.k, cfg.gamma_ff, cfg.dt, ctx.seed)?;
    let generator = unconditional_generator(&spec);
    let equivalent = equivalence_model(&spec)?;
    let (lambda, eta) = equivalence_parameters(cfg.k, cfg.gamma_ff)?;

    let sup_gap = {
        let g = generator.superoperator_matrix()?;
        let l = superoperator_matrix(equivalent.model())?;
        (&g - &l).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };

    let mut observables: Vec<(String, FockOperator)> = Vec::new();
    for j in 1..=space.num_modes() {
        observables.push((format!("n{j}"), mode_number(&space, j)?));
    }
    observables.push(("A1".into(), a1));
    observables.push(("F2".into(), f2));
    let refs: Vec<(&str, &FockOperator)> = observables
        .iter()
        .map(|(name, op)| (name.as_str(), op))
        .collect();

    let rho0 = DensityMatrix::fock_state(&space, &cfg.initial)?;
    let ensemble = run_ensemble(&spec, &rho0, cfg.t_final, cfg.trajectories, &refs)?;

    let times = &ensemble.observables[0].times;
    let mut columns: Vec<String> = vec!["time".into()];
    for series in &ensemble.observables {
        columns.push(format!("mean_{}", series.name));
        columns.push(format!("stderr_{}", series.name));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&column_refs);
    for (k, &time) in times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![time.into()];
        for series in &ensemble.observables {
            row.push(series.mean[k].into());
            row.push(series.stderr[k].into());
        }
        table.push(row);
    }
    ctx.write_table("feedforward_ensemble", &table)?;
    ctx.write_gnuplot(
        "feedforward_ensemble",
        "ensemble means of the conditional trajectories",
        &table,
        1,
        &(0..ensemble.observables.len())
            .map(|i| 2 + 2 * i)
            .collect::<Vec<_>>(),
    )?;

    let picks = pick_indices(times.len(), cfg.comparison_points);
    let mut comparisons = Vec::new();
    let mut max_sigma: f64 = 0.0;
    for &idx in &picks {
        let time = times[idx];
        let exact_state = if time == 0.0 {
            rho0.clone()
        } else {
            propagate(equivalent.model(), &rho0, time)?
        };
        for ((_, op), series) in refs.iter().zip(&ensemble.observables) {
            let exact = exact_state.expectation(op)?.re;
            let mean = series.mean[idx];
            let stderr = series.stderr[idx];
            let diff = (mean - exact).abs();
            let sigma = if stderr > 0.0 {
                diff / stderr
            } else if diff < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            max_sigma = max_sigma.max(sigma);
            comparisons.push(Comparison {
                time,
                observable: series.name.clone(),
                ensemble_mean: mean,
                stderr,
                exact,
                sigma,
            });
        }
    }

    ctx.write_report(
        "feedforward_report",
        &FeedforwardReport {
            k: cfg.k,
            gamma_ff: cfg.gamma_ff,
            lambda,
            eta,
            superop_max_abs_diff: sup_gap,
            trajectories: ensemble.n,
            dt: ensemble.dt,
            max_sigma,
            comparisons,
        },
    )
}

/// Up to `want` indices spread evenly over `0..len`, always including the
/// first and last sample.
fn pick_indices(len: usize, want: usize) -> Vec<usize> {
    if len == 0 || want == 0 {
        return Vec::new();
    }
    if want == 1 || len == 1 {
        return vec![len - 1];
    }
    let mut picks: Vec<usize> = (0..want)
        .map(|k| (k * (len - 1)) / (want - 1))
        .collect();
    picks.dedup();
    picks
}
