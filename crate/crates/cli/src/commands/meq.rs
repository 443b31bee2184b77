//! `meq`: build a non-reciprocal generator from operator expressions —
//! coherent coupling H = (λ/2)(O₁O₂ + h.c.) plus the variant's correlated
//! jump — optionally add local Hamiltonians, and evolve a Fock state,
//! reporting the effective coupling each side sees.

use nonrecip::fock::{mode_annihilation, mode_number, FockSpace};
use nonrecip::lindblad::{
    build_nonreciprocal, evolve, DensityMatrix, LindbladModel, NonreciprocalVariant,
    STABILITY_LIMIT,
};
use serde::Serialize;

use crate::artifact::{complex_cells, Cell, Ctx, Table};
use crate::config::{Cx, DirectionCfg, MeqConfig, VariantCfg};
use crate::error::CliError;
use crate::opexpr::parse_operator;

#[derive(Serialize)]
struct MeqReport {
    lambda: f64,
    variant: VariantCfg,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<DirectionCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    /// Coupling seen by system 1 (how strongly system 2 back-acts on it).
    lambda12: Cx,
    /// Coupling seen by system 2.
    lambda21: Cx,
    abs_lambda12: f64,
    abs_lambda21: f64,
    is_directional: bool,
    /// 1-based modes inferred as subsystem 1 (the support of O₁).
    system1: Vec<usize>,
    system2: Vec<usize>,
    dt: f64,
}

pub fn run(ctx: &mut Ctx, cfg: &MeqConfig) -> Result<(), CliError> {
    let space = FockSpace::new(&cfg.cutoffs)?;
    let o1 = parse_operator(&cfg.o1, &space)?;
    let o2 = parse_operator(&cfg.o2, &space)?;
    let variant = match cfg.variant {
        VariantCfg::Pretuned => {
            let gamma = cfg
                .gamma
                .ok_or_else(|| CliError::config("the pretuned variant needs \"gamma\""))?;
            let theta = cfg
                .theta
                .ok_or_else(|| CliError::config("the pretuned variant needs \"theta\""))?;
            NonreciprocalVariant::Pretuned { gamma, theta }
        }
        VariantCfg::Directional | VariantCfg::Conjugated => {
            if cfg.gamma.is_some() || cfg.theta.is_some() {
                return Err(CliError::config(
                    "\"gamma\"/\"theta\" apply only to the pretuned variant",
                ));
            }
            let direction = cfg.direction.into();
            match cfg.variant {
                VariantCfg::Directional => NonreciprocalVariant::Directional {
                    eta: cfg.eta,
                    direction,
                },
                _ => NonreciprocalVariant::Conjugated {
                    eta: cfg.eta,
                    direction,
                },
            }
        }
    };
    let nr = build_nonreciprocal(&o1, &o2, cfg.lambda, variant)?;
    let couplings = nr.effective_couplings();
    let part = nr.bipartition().clone();

    let mut model = nr.model().clone();
    for (label, expr, modes) in [
        ("h1", &cfg.h1, &part.system1),
        ("h2", &cfg.h2, &part.system2),
    ] {
        if let Some(expr) = expr {
            let h = parse_operator(expr, &space)?;
            if !h.is_local_to(modes)? {
                return Err(CliError::config(format!(
                    "{label} = {expr:?} acts outside its subsystem (modes {modes:?})"
                )));
            }
            model = model.with_added_hamiltonian(&h)?;
        }
    }

    let dt = auto_dt(cfg.dt, cfg.t_final, &model)?;
    let rho0 = DensityMatrix::fock_state(&space, &cfg.initial)?;
    let traj = evolve(&model, &rho0, cfg.t_final, dt)?;

    let modes = space.num_modes();
    let mut columns: Vec<String> = vec!["time".into()];
    for j in 1..=modes {
        columns.push(format!("n{j}"));
    }
    for j in 1..=modes {
        columns.push(format!("re_a{j}"));
        columns.push(format!("im_a{j}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&column_refs);
    let mut numbers = Vec::with_capacity(modes);
    let mut amplitudes = Vec::with_capacity(modes);
    for j in 1..=modes {
        numbers.push(traj.expectations(&mode_number(&space, j)?)?);
        amplitudes.push(traj.expectations(&mode_annihilation(&space, j)?)?);
    }
    for (k, &time) in traj.times().iter().enumerate() {
        let mut row: Vec<Cell> = vec![time.into()];
        for n in &numbers {
            row.push(n[k].re.into());
        }
        for a in &amplitudes {
            row.extend(complex_cells(a[k]));
        }
        table.push(row);
    }
    ctx.write_table("meq_trajectory", &table)?;
    ctx.write_gnuplot(
        "meq_trajectory",
        "mode occupations under the non-reciprocal generator",
        &table,
        1,
        &(2..2 + modes).collect::<Vec<_>>(),
    )?;
    ctx.write_report(
        "meq_report",
        &MeqReport {
            lambda: cfg.lambda,
            variant: cfg.variant,
            eta: match cfg.variant {
                VariantCfg::Pretuned => None,
                _ => Some(cfg.eta),
            },
            direction: match cfg.variant {
                VariantCfg::Pretuned => None,
                _ => Some(cfg.direction),
            },
            gamma: cfg.gamma,
            theta: cfg.theta,
            lambda12: couplings.lambda12.into(),
            lambda21: couplings.lambda21.into(),
            abs_lambda12: couplings.lambda12.norm(),
            abs_lambda21: couplings.lambda21.norm(),
            is_directional: couplings.is_directional(),
            system1: part.system1.clone(),
            system2: part.system2.clone(),
            dt,
        },
    )
}

/// Choose a step: the configured one, else small enough for the stability
/// guard with a 2× margin and fine enough to resolve the window.
pub fn auto_dt(
    configured: Option<f64>,
    t_final: f64,
    model: &LindbladModel,
) -> Result<f64, CliError> {
    if let Some(dt) = configured {
        return Ok(dt);
    }
    let bound = model.norm_bound()?;
    let stable = 0.5 * STABILITY_LIMIT / bound.max(f64::MIN_POSITIVE);
    Ok(stable.min(t_final / 200.0))
}
