//! `tune`: solve the directionality condition at each probe frequency, then
//! verify at that point that the lowest-order path amplitudes cancel, the
//! blocked Green's-function element vanishes, and the open direction stays
//! live.

use nonrecip::scattering::{dissipative_ring, directionality_tuning, greens_function,
    trajectory_amplitudes};
use serde::Serialize;

use crate::artifact::Ctx;
use crate::config::{Cx, DirectionCfg, TuneConfig};
use crate::error::CliError;

#[derive(Serialize)]
struct ProbeResult {
    omega: f64,
    /// Tuned loop flux Φ.
    flux: f64,
    /// Tuned uniform port rate κ.
    kappa: f64,
    /// Lowest-order blocked-direction pair sum Q₁ + Q₂ (vanishes when tuned).
    q_sum: Cx,
    abs_q_sum: f64,
    /// Green's-function element of the blocked direction.
    g_blocked: Cx,
    abs_g_blocked: f64,
    /// Green's-function element of the open direction.
    g_open: Cx,
    abs_g_open: f64,
}

#[derive(Serialize)]
struct TuneReport {
    t: f64,
    blocked: DirectionCfg,
    max_abs_q_sum: f64,
    max_abs_g_blocked: f64,
    min_abs_g_open: f64,
    probes: Vec<ProbeResult>,
}

pub fn run(ctx: &mut Ctx, cfg: &TuneConfig) -> Result<(), CliError> {
    if cfg.probes.is_empty() {
        return Err(CliError::config("tune needs at least one probe frequency"));
    }
    let mut probes = Vec::with_capacity(cfg.probes.len());
    let mut max_q: f64 = 0.0;
    let mut max_blocked: f64 = 0.0;
    let mut min_open = f64::INFINITY;
    for &omega in &cfg.probes {
        let (flux, kappa) = directionality_tuning(cfg.t, omega, cfg.blocked.into())?;
        let model = dissipative_ring(cfg.t, flux, kappa)?;
        let g = greens_function(&model, omega)?;
        let paths = trajectory_amplitudes(cfg.t, flux / 3.0, kappa, omega)?;
        let (q_sum, g_blocked, g_open) = match cfg.blocked {
            DirectionCfg::OneToTwo => (paths.q1 + paths.q2, g[[1, 0]], g[[0, 1]]),
            DirectionCfg::TwoToOne => (
                paths.q1_reverse + paths.q2_reverse,
                g[[0, 1]],
                g[[1, 0]],
            ),
        };
        max_q = max_q.max(q_sum.norm());
        max_blocked = max_blocked.max(g_blocked.norm());
        min_open = min_open.min(g_open.norm());
        probes.push(ProbeResult {
            omega,
            flux,
            kappa,
            q_sum: q_sum.into(),
            abs_q_sum: q_sum.norm(),
            g_blocked: g_blocked.into(),
            abs_g_blocked: g_blocked.norm(),
            g_open: g_open.into(),
            abs_g_open: g_open.norm(),
        });
    }
    ctx.write_report(
        "tune",
        &TuneReport {
            t: cfg.t,
            blocked: cfg.blocked,
            max_abs_q_sum: max_q,
            max_abs_g_blocked: max_blocked,
            min_abs_g_open: min_open,
            probes,
        },
    )
}
