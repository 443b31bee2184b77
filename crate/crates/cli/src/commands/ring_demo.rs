//! `ring-demo`: the tuned three-port circulator. With κ = 2t, Φ = π/2 and
//! drive at ω = 0, the s-matrix is the perfect cyclic permutation
//! [[0,1,0],[0,0,1],[1,0,0]] — port 2 feeds port 1, port 3 feeds port 2,
//! port 1 feeds port 3.

use std::f64::consts::FRAC_PI_2;

use nonrecip::scattering::{dissipative_ring, smatrix};
use serde::Serialize;

use crate::artifact::Ctx;
use crate::config::{Cx, RingDemoConfig};
use crate::error::CliError;

const TARGET: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
const TOLERANCE: f64 = 1e-12;

#[derive(Serialize)]
struct RingDemoReport {
    t: f64,
    kappa: f64,
    flux: f64,
    omega: f64,
    s_re: [[f64; 3]; 3],
    s_im: [[f64; 3]; 3],
    target: [[f64; 3]; 3],
    /// Largest entrywise |s − target|.
    max_abs_error: f64,
    tolerance: f64,
    pass: bool,
    /// The blocked backward element (should be 0).
    abs_s21: f64,
    /// The forward element (should be exactly 1).
    s12: Cx,
}

pub fn run(ctx: &mut Ctx, cfg: &RingDemoConfig) -> Result<(), CliError> {
    let kappa = 2.0 * cfg.t;
    let flux = FRAC_PI_2;
    let omega = 0.0;
    let model = dissipative_ring(cfg.t, flux, kappa)?;
    let result = smatrix(&model, omega)?;
    let mut s_re = [[0.0; 3]; 3];
    let mut s_im = [[0.0; 3]; 3];
    let mut max_err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let z = result.s[[i, j]];
            s_re[i][j] = z.re;
            s_im[i][j] = z.im;
            max_err = max_err.max((z - TARGET[i][j]).norm());
        }
    }
    ctx.write_report(
        "ring_demo",
        &RingDemoReport {
            t: cfg.t,
            kappa,
            flux,
            omega,
            s_re,
            s_im,
            target: TARGET,
            max_abs_error: max_err,
            tolerance: TOLERANCE,
            pass: max_err < TOLERANCE,
            abs_s21: result.s[[1, 0]].norm(),
            s12: result.s[[0, 1]].into(),
        },
    )
}
