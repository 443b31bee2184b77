//! `scatter`: frequency sweep of the dissipative ring's s-matrix and
//! Green's function, the all-orders trajectory split, plus two randomized
//! checks — the resummation identity Q₁_tot + Q₂_tot = G^R[2,1] over random
//! parameter draws, and reciprocity G^R[2,1] = G^R[1,2] at trivial flux.

use std::f64::consts::{PI, TAU};

use nonrecip::scattering::{
    all_orders_decomposition, dissipative_ring, greens_function, sweep, FrequencyGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::artifact::{complex_cells, Cell, Ctx, Table};
use crate::config::ScatterConfig;
use crate::error::CliError;

#[derive(Serialize)]
struct ScatterChecks {
    identity_draws: usize,
    /// Largest |Q₁_tot + Q₂_tot − G^R[2,1]| over the random draws.
    max_identity_residual: f64,
    reciprocity_draws_per_flux: usize,
    /// Largest |G^R[2,1] − G^R[1,2]| over random ω at Φ ∈ {0, π}.
    max_reciprocity_deviation: f64,
}

pub fn run(ctx: &mut Ctx, cfg: &ScatterConfig) -> Result<(), CliError> {
    let model = dissipative_ring(cfg.t, cfg.flux, cfg.kappa)?;
    let grid = FrequencyGrid::new(cfg.omega_start, cfg.omega_stop, cfg.count)?;
    let results = sweep(&model, &grid)?;

    let mut columns: Vec<String> = vec!["omega".into()];
    for i in 1..=3 {
        for j in 1..=3 {
            columns.push(format!("re_s{i}{j}"));
            columns.push(format!("im_s{i}{j}"));
        }
    }
    for name in [
        "re_g21",
        "im_g21",
        "re_g12",
        "im_g12",
        "re_q1_tot",
        "im_q1_tot",
        "re_q2_tot",
        "im_q2_tot",
        "identity_residual",
        "abs_s21",
        "abs_s12",
    ] {
        columns.push(name.into());
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&column_refs);
    for r in &results {
        let split = all_orders_decomposition(&model, r.frequency)?;
        let mut row: Vec<Cell> = vec![r.frequency.into()];
        for i in 0..3 {
            for j in 0..3 {
                row.extend(complex_cells(r.s[[i, j]]));
            }
        }
        row.extend(complex_cells(r.greens[[1, 0]]));
        row.extend(complex_cells(r.greens[[0, 1]]));
        row.extend(complex_cells(split.q1_tot));
        row.extend(complex_cells(split.q2_tot));
        row.push(split.residual.into());
        row.push(r.s[[1, 0]].norm().into());
        row.push(r.s[[0, 1]].norm().into());
        table.push(row);
    }
    ctx.write_table("scatter_sweep", &table)?;
    let abs_s21_col = columns.len() - 1;
    ctx.write_gnuplot(
        "scatter_sweep",
        "ring transmission |s21| and |s12| vs drive frequency",
        &table,
        1,
        &[abs_s21_col, abs_s21_col + 1],
    )?;

    let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
    let mut max_identity: f64 = 0.0;
    for _ in 0..cfg.identity_draws {
        let t = rng.gen_range(0.5..2.0);
        let flux = rng.gen_range(0.0..TAU);
        let kappa = rng.gen_range(0.1..3.0);
        let omega = rng.gen_range(-2.0..2.0);
        let draw = dissipative_ring(t, flux, kappa)?;
        max_identity = max_identity.max(all_orders_decomposition(&draw, omega)?.residual);
    }
    let mut max_reciprocity: f64 = 0.0;
    for flux in [0.0, PI] {
        let trivial = dissipative_ring(cfg.t, flux, cfg.kappa)?;
        for _ in 0..cfg.reciprocity_draws {
            let omega = rng.gen_range(-3.0..3.0);
            let g = greens_function(&trivial, omega)?;
            max_reciprocity = max_reciprocity.max((g[[1, 0]] - g[[0, 1]]).norm());
        }
    }
    ctx.write_report(
        "scatter_checks",
        &ScatterChecks {
            identity_draws: cfg.identity_draws,
            max_identity_residual: max_identity,
            reciprocity_draws_per_flux: cfg.reciprocity_draws,
            max_reciprocity_deviation: max_reciprocity,
        },
    )
}
