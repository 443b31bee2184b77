//! `entangle`: the negativity dichotomy. Random Hermitian-coupling models
//! (all measurement-equivalent) must show zero negativity; the driven
//! cascaded pair builds up genuine steady-state entanglement. Also emits
//! the transient negativity of the cascaded scenario from vacuum.

use nonrecip::entanglement::{
    cascaded_entanglement_scenario, locc_suite, negativity, LOCC_NEGATIVITY_LIMIT,
};
use nonrecip::fock::Bipartition;
use nonrecip::lindblad::{evolve, DensityMatrix};
use serde::Serialize;

use crate::artifact::{Ctx, Table};
use crate::config::{Cx, EntangleConfig};
use crate::error::CliError;
use crate::commands::meq::auto_dt;

#[derive(Serialize)]
struct ScenarioReport {
    lambda: f64,
    drive1: Cx,
    drive2: Cx,
    cutoff: usize,
    /// Partial-transpose negativity of the steady state across the 1|2 cut.
    negativity: f64,
    /// The LOCC bound every measurement-equivalent model stays under.
    locc_threshold: f64,
}

pub fn run(ctx: &mut Ctx, cfg: &EntangleConfig) -> Result<(), CliError> {
    let locc = locc_suite(cfg.cases, ctx.seed)?;
    ctx.write_report("entangle_locc", &locc)?;

    let scenario =
        cascaded_entanglement_scenario(cfg.lambda, cfg.drive1.into(), cfg.drive2.into(), cfg.cutoff)?;
    ctx.write_report(
        "entangle_scenario",
        &ScenarioReport {
            lambda: cfg.lambda,
            drive1: cfg.drive1,
            drive2: cfg.drive2,
            cutoff: cfg.cutoff,
            negativity: scenario.negativity,
            locc_threshold: LOCC_NEGATIVITY_LIMIT,
        },
    )?;

    if cfg.transient_t_final > 0.0 {
        let model = &scenario.model;
        let space = model.space();
        let dt = auto_dt(cfg.transient_dt, cfg.transient_t_final, model)?;
        let rho0 = DensityMatrix::vacuum(space);
        let traj = evolve(model, &rho0, cfg.transient_t_final, dt)?;
        let cut = Bipartition::two_modes(space)?;
        let mut table = Table::new(&["time", "negativity"]);
        for (state, &time) in traj.states().iter().zip(traj.times()) {
            table.push(vec![time.into(), negativity(state, &cut)?.into()]);
        }
        ctx.write_table("entangle_transient", &table)?;
        ctx.write_gnuplot(
            "entangle_transient",
            "negativity build-up of the driven cascaded pair",
            &table,
            1,
            &[2],
        )?;
    }
    Ok(())
}
