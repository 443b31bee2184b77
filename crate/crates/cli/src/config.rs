//! Command configuration: JSON only, unknown keys rejected, every field
//! defaulted so each command runs without a config file. The common fields
//! `command` (validated against the invoked subcommand), `out` and `seed`
//! may appear in any config; `--out` / `--seed` take precedence.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use nonrecip::drives::{CouplingModSpec, ModulationSpec};
use nonrecip::entanglement::{SCENARIO_CUTOFF, SCENARIO_DRIVE, SCENARIO_LAMBDA};
use nonrecip::lindblad::InfluenceDirection;
use nonrecip::scattering::BlockedPath;
use nonrecip::C64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::CliError;

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

/// Complex number in configs and reports: `{"re": …, "im": …}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cx {
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Cx> for C64 {
    fn from(c: Cx) -> Self {
        C64::new(c.re, c.im)
    }
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

/// Direction of influence in directional models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionCfg {
    OneToTwo,
    TwoToOne,
}

impl From<DirectionCfg> for InfluenceDirection {
    fn from(d: DirectionCfg) -> Self {
        match d {
            DirectionCfg::OneToTwo => InfluenceDirection::OneToTwo,
            DirectionCfg::TwoToOne => InfluenceDirection::TwoToOne,
        }
    }
}

impl From<DirectionCfg> for BlockedPath {
    fn from(d: DirectionCfg) -> Self {
        match d {
            DirectionCfg::OneToTwo => BlockedPath::OneToTwo,
            DirectionCfg::TwoToOne => BlockedPath::TwoToOne,
        }
    }
}

/// Access to the fields shared by every command config.
pub trait CommonCfg {
    fn command(&self) -> Option<&str>;
    fn out(&self) -> Option<&Path>;
    fn seed(&self) -> Option<u64>;
}

macro_rules! impl_common {
    ($ty:ty) => {
        impl CommonCfg for $ty {
            fn command(&self) -> Option<&str> {
                self.command.as_deref()
            }
            fn out(&self) -> Option<&Path> {
                self.out.as_deref()
            }
            fn seed(&self) -> Option<u64> {
                self.seed
            }
        }
    };
}

/// Load a command config: default when no path is given, otherwise strict
/// JSON. A `command` field naming a different subcommand is rejected.
pub fn load<T>(path: Option<&Path>, expected: &str) -> Result<T, CliError>
where
    T: DeserializeOwned + Default + CommonCfg,
{
    let cfg: T = match path {
        None => T::default(),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("reading config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("parsing config {}: {e}", p.display())))?
        }
    };
    if let Some(named) = cfg.command() {
        if named != expected {
            return Err(CliError::config(format!(
                "config names command {named:?} but {expected:?} was invoked"
            )));
        }
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// Per-command configs
// ---------------------------------------------------------------------------

/// `spectrum`: ring band energies over an inclusive flux grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Ring hopping rate.
    pub t: f64,
    /// First flux of the grid.
    pub flux_start: f64,
    /// Last flux of the grid (inclusive).
    pub flux_stop: f64,
    /// Number of grid points (≥ 1). The default grid puts Φ = π/2, π and 2π
    /// exactly on grid points.
    pub count: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            t: 1.0,
            flux_start: 0.0,
            flux_stop: TAU,
            count: 97,
        }
    }
}
impl_common!(SpectrumConfig);

/// `scatter`: s-matrix / Green's-function sweep plus randomized identity
/// and reciprocity checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Ring hopping rate.
    pub t: f64,
    /// Loop flux of the swept ring.
    pub flux: f64,
    /// Uniform port rate of the swept ring.
    pub kappa: f64,
    /// Sweep start frequency.
    pub omega_start: f64,
    /// Sweep stop frequency (excluded; the grid is half-open).
    pub omega_stop: f64,
    /// Number of sweep points.
    pub count: usize,
    /// Random parameter draws for the trajectory-resummation identity check.
    pub identity_draws: usize,
    /// Random frequency draws per trivial flux for the reciprocity check.
    pub reciprocity_draws: usize,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            t: 1.0,
            flux: FRAC_PI_2,
            kappa: 2.0,
            omega_start: -3.0,
            omega_stop: 3.0,
            count: 240,
            identity_draws: 100,
            reciprocity_draws: 50,
        }
    }
}
impl_common!(ScatterConfig);

/// `tune`: solve the directionality condition at each probe frequency and
/// verify the blocked/open responses there.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Ring hopping rate.
    pub t: f64,
    /// Which transmission direction the tuning suppresses.
    pub blocked: DirectionCfg,
    /// Probe frequencies (each is tuned for and then evaluated).
    pub probes: Vec<f64>,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            t: 1.0,
            blocked: DirectionCfg::OneToTwo,
            probes: vec![0.0, 0.3, 0.9],
        }
    }
}
impl_common!(TuneConfig);

/// `ring-demo`: the tuned three-port circulator at ω = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingDemoConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Ring hopping rate; the demo uses the tuned κ = 2t, Φ = π/2, ω = 0.
    pub t: f64,
}

impl Default for RingDemoConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            t: 1.0,
        }
    }
}
impl_common!(RingDemoConfig);

/// `rwa`: validate a drive scheme against its rotating-wave description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RwaConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// The drive scheme, tagged by `"scheme": "coupling" | "frequency"`.
    pub drive: ModulationSpec,
    /// Integrator step; omitted → the scheme's default (resolves the
    /// fastest frequency in the problem).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl Default for RwaConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            drive: ModulationSpec::Coupling(
                CouplingModSpec::new(0.0, 1.0, 0.01, 1.0, 0.0)
                    .expect("static default drive is valid"),
            ),
            dt: None,
        }
    }
}
impl_common!(RwaConfig);

/// `eliminate`: compare the three-mode ring against the reduced two-mode
/// model obtained by eliminating the lossy auxiliary mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EliminateConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Direct hopping between the retained modes.
    pub t: f64,
    /// Damping rate of the auxiliary mode.
    pub kappa3: f64,
    /// Hopping to the auxiliary mode; omitted → matched √(κ₃·t/2) so the
    /// induced and direct couplings interfere fully.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<f64>,
    /// Per-bond flux phase (loop flux Φ = 3φ).
    pub phi: f64,
    /// Local damping of mode 1.
    pub kappa1: f64,
    /// Local damping of mode 2.
    pub kappa2: f64,
    /// Comparison window.
    pub t_final: f64,
    /// Integrator step.
    pub dt: f64,
}

impl Default for EliminateConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            t: 1.0,
            kappa3: 100.0,
            t_prime: None,
            phi: FRAC_PI_6,
            kappa1: 0.0,
            kappa2: 0.0,
            t_final: 5.0,
            dt: 4.0e-4,
        }
    }
}
impl_common!(EliminateConfig);

/// Which jump layout `meq` builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantCfg {
    Directional,
    Conjugated,
    Pretuned,
}

/// `meq`: evolve a directional master equation built from operator
/// expressions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeqConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Fock cutoff per mode.
    pub cutoffs: Vec<usize>,
    /// Coherent coupling rate λ ≥ 0.
    pub lambda: f64,
    /// Jump layout.
    pub variant: VariantCfg,
    /// Local-dissipation asymmetry (directional/conjugated variants).
    pub eta: f64,
    /// Influence direction (directional/conjugated variants).
    pub direction: DirectionCfg,
    /// Dissipative strength Γ (pretuned variant only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Jump phase θ (pretuned variant only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// System-1 coupling operator expression.
    pub o1: String,
    /// System-2 coupling operator expression.
    pub o2: String,
    /// Optional extra local Hamiltonian (system 1), e.g. `"0.5*n1"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<String>,
    /// Optional extra local Hamiltonian (system 2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2: Option<String>,
    /// Initial Fock occupations.
    pub initial: Vec<usize>,
    /// Evolution window.
    pub t_final: f64,
    /// Integrator step; omitted → auto from the model's norm bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl Default for MeqConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            cutoffs: vec![3, 3],
            lambda: 1.0,
            variant: VariantCfg::Directional,
            eta: 1.0,
            direction: DirectionCfg::OneToTwo,
            gamma: None,
            theta: None,
            o1: "a1".into(),
            o2: "a2".into(),
            h1: None,
            h2: None,
            initial: vec![1, 0],
            t_final: 4.0,
            dt: None,
        }
    }
}
impl_common!(MeqConfig);

/// `feedforward`: measurement + feedforward protocol, its unconditional
/// generator, the equivalent directional model, and a trajectory ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedforwardConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Fock cutoff per mode.
    pub cutoffs: Vec<usize>,
    /// Measurement strength k > 0.
    pub k: f64,
    /// Feedforward strength γ_ff > 0.
    pub gamma_ff: f64,
    /// Measured observable (Hermitian, system 1), operator expression.
    pub a1: String,
    /// Feedforward force (Hermitian, system 2), operator expression.
    pub f2: String,
    /// Initial Fock occupations.
    pub initial: Vec<usize>,
    /// Trajectory step.
    pub dt: f64,
    /// Evolution window.
    pub t_final: f64,
    /// Ensemble size.
    pub trajectories: usize,
    /// Sample times compared between ensemble and deterministic evolution.
    pub comparison_points: usize,
}

impl Default for FeedforwardConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            cutoffs: vec![1, 1],
            k: 1.0,
            gamma_ff: 0.5,
            a1: "x1".into(),
            f2: "x2".into(),
            initial: vec![1, 0],
            dt: 0.004,
            t_final: 1.2,
            trajectories: 2000,
            comparison_points: 7,
        }
    }
}
impl_common!(FeedforwardConfig);

/// `entangle`: LOCC suite over random Hermitian-coupling cases plus the
/// driven cascaded scenario (steady state and transient).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntangleConfig {
    #[serde(skip_serializing)]
    pub command: Option<String>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub seed: Option<u64>,
    /// Number of random Hermitian-coupling cases.
    pub cases: usize,
    /// Cascaded coupling rate λ > 0.
    pub lambda: f64,
    /// Two-photon drive on mode 1.
    pub drive1: Cx,
    /// Two-photon drive on mode 2.
    pub drive2: Cx,
    /// Fock cutoff of the cascaded scenario (both modes).
    pub cutoff: usize,
    /// Transient window for the negativity time series (0 skips it).
    pub transient_t_final: f64,
    /// Transient integrator step; omitted → auto from the norm bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient_dt: Option<f64>,
}

impl Default for EntangleConfig {
    fn default() -> Self {
        Self {
            command: None,
            out: None,
            seed: None,
            cases: 20,
            lambda: SCENARIO_LAMBDA,
            drive1: SCENARIO_DRIVE.into(),
            drive2: SCENARIO_DRIVE.into(),
            cutoff: SCENARIO_CUTOFF,
            transient_t_final: 6.0,
            transient_dt: None,
        }
    }
}
impl_common!(EntangleConfig);
