//! `spectrum`: band energies of the flux-threaded three-site ring over an
//! inclusive flux grid.

use nonrecip::lattice::ring_spectrum;

use crate::artifact::{Ctx, Table};
use crate::config::SpectrumConfig;
use crate::error::CliError;

pub fn run(ctx: &mut Ctx, cfg: &SpectrumConfig) -> Result<(), CliError> {
    if cfg.count == 0 {
        return Err(CliError::config("spectrum grid needs at least one point"));
    }
    let mut table = Table::new(&["flux", "energy_m_minus1", "energy_m_0", "energy_m_plus1"]);
    for i in 0..cfg.count {
        // Fraction first, so e.g. Φ = 2π·(24/96) lands exactly on π/2.
        let frac = if cfg.count == 1 {
            0.0
        } else {
            i as f64 / (cfg.count - 1) as f64
        };
        let flux = cfg.flux_start + (cfg.flux_stop - cfg.flux_start) * frac;
        let spectrum = ring_spectrum(cfg.t, flux)?;
        let energy = |m: i32| -> Result<f64, CliError> {
            spectrum
                .energy_for_m(m)
                .ok_or_else(|| CliError::config(format!("internal: missing band m = {m}")))
        };
        table.push(vec![
            flux.into(),
            energy(-1)?.into(),
            energy(0)?.into(),
            energy(1)?.into(),
        ]);
    }
    ctx.write_table("spectrum", &table)?;
    ctx.write_gnuplot(
        "spectrum",
        "three-site ring band energies vs loop flux",
        &table,
        1,
        &[2, 3, 4],
    )
}
