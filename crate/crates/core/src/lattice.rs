// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Tight-binding bosonic networks with complex hopping phases.
//!
//! A [`LatticeModel`] describes a photon-number-conserving network of
//! resonator modes,
//!
//! ```text
//! H = Σ_j ω_j a†_j a_j − Σ_{j>j′} ( t_{jj′} a†_j a_{j′} + h.c. ),
//! ```
//!
//! together with per-site waveguide coupling rates κ_j used by the
//! scattering layer. Complex hopping amplitudes act as Peierls phases: the
//! gauge-invariant content of the phases is the flux accumulated around
//! closed loops, computed by [`loop_flux`]. Local gauge transformations
//! a_j → e^{iθ_j} a_j ([`apply_gauge`]) move phases between bonds but leave
//! every loop flux and the energy spectrum unchanged.
//!
//! For the three-site ring the spectrum is known in closed form,
//! Ω_m = −2t·cos(k_m + Φ/3) with k_m = 2πm/3 ([`ring_spectrum`]); near a
//! band minimum the dispersion −2t·cos(ka) defines an effective mass
//! m* = 1/(2ta²) which [`band_curvature`] recovers numerically from a
//! large-ring diagonalization.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{C64, Error, Result};

/// Number of lattice momenta used for the effective-mass fit.
const CURVATURE_RING_SITES: usize = 256;

/// One stored hopping bond. The amplitude is `t_{to,from}`, the coefficient
/// multiplying `a†_to a_from` in the (negated) hopping sum; the reverse
/// amplitude is its complex conjugate. Bonds are stored once per unordered
/// pair with `to > from` (1-based site indices).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hopping {
    pub from: usize,
    pub to: usize,
    pub amplitude: C64,
}

/// Local gauge transformation a_j → e^{iθ_j} a_j, one phase per site.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    phases: Vec<f64>,
}

impl GaugeTransform {
    /// Phases are reduced modulo 2π; only their differences ever enter.
    pub fn new(phases: Vec<f64>) -> Self {
        let phases = phases
            .into_iter()
            .map(|p| p.rem_euclid(2.0 * std::f64::consts::PI))
            .collect();
        Self { phases }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Wire format for one bond: amplitude t_{to,from} split into re/im.
#[derive(Serialize, Deserialize)]
struct HoppingWire {
    from: usize,
    to: usize,
    re: f64,
    im: f64,
}

/// Wire format matching the documented JSON schema:
/// `{"sites": N, "omega": [...], "hoppings": [{"from","to","re","im"}], "kappa": [...]}`.
#[derive(Serialize, Deserialize)]
struct LatticeModelWire {
    sites: usize,
    omega: Vec<f64>,
    hoppings: Vec<HoppingWire>,
    kappa: Vec<f64>,
}

/// A validated tight-binding network: on-site frequencies ω_j, complex
/// hoppings t_{jj′} stored once per unordered pair, and non-negative port
/// rates κ_j. Site indices are 1-based in every interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeModelWire", into = "LatticeModelWire")]
pub struct LatticeModel {
    num_sites: usize,
    onsite_freq: Vec<f64>,
    hoppings: Vec<Hopping>,
    port_rates: Vec<f64>,
}

impl LatticeModel {
    /// Builds and validates a model. Hoppings may be given in either index
    /// order; they are normalized to `to > from` (conjugating as needed).
    pub fn new(
        num_sites: usize,
        onsite_freq: Vec<f64>,
        hoppings: Vec<Hopping>,
        port_rates: Vec<f64>,
    ) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::InvalidModel("a model needs at least one site".into()));
        }
        if onsite_freq.len() != num_sites {
            return Err(Error::InvalidModel(format!(
                "expected {} on-site frequencies, got {}",
                num_sites,
                onsite_freq.len()
            )));
        }
        if port_rates.len() != num_sites {
            return Err(Error::InvalidModel(format!(
                "expected {} port rates, got {}",
                num_sites,
                port_rates.len()
            )));
        }
        if let Some(w) = onsite_freq.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite on-site frequency {w}")));
        }
        if let Some(k) = port_rates.iter().find(|k| !k.is_finite() || **k < 0.0) {
            return Err(Error::InvalidModel(format!("port rate {k} is not a finite κ ≥ 0")));
        }
        let mut normalized = Vec::with_capacity(hoppings.len());
        let mut seen = std::collections::HashSet::new();
        for h in hoppings {
            if h.from == 0 || h.to == 0 || h.from > num_sites || h.to > num_sites {
                return Err(Error::InvalidModel(format!(
                    "hopping ({}, {}) is outside sites 1..={}",
                    h.to, h.from, num_sites
                )));
            }
            if h.from == h.to {
                return Err(Error::InvalidModel(format!("self-hopping on site {}", h.from)));
            }
            if !h.amplitude.re.is_finite() || !h.amplitude.im.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "non-finite hopping amplitude on bond ({}, {})",
                    h.to, h.from
                )));
            }
            let canon = if h.to > h.from {
                h
            } else {
                Hopping { from: h.to, to: h.from, amplitude: h.amplitude.conj() }
            };
            if !seen.insert((canon.from, canon.to)) {
                return Err(Error::InvalidModel(format!(
                    "duplicate hopping between sites {} and {}",
                    canon.from, canon.to
                )));
            }
            normalized.push(canon);
        }
        Ok(Self { num_sites, onsite_freq, hoppings: normalized, port_rates })
    }

    /// Three-site ring with every ascending bond carrying the same Peierls
    /// phase: t_{21} = t_{32} = t·e^{iφ} and t_{13} = t·e^{iφ} (stored as
    /// t_{31} = t·e^{−iφ}). The loop flux along 1→2→3→1 is exactly 3φ. Port
    /// rates and on-site frequencies start at zero.
    pub fn uniform_ring(t: f64, bond_phase: f64) -> Result<Self> {
        let amp = C64::from_polar(t, bond_phase);
        Self::new(
            3,
            vec![0.0; 3],
            vec![
                Hopping { from: 1, to: 2, amplitude: amp },
                Hopping { from: 2, to: 3, amplitude: amp },
                Hopping { from: 1, to: 3, amplitude: amp.conj() },
            ],
            vec![0.0; 3],
        )
    }

    /// Replaces the port rates, revalidating.
    pub fn with_port_rates(mut self, port_rates: Vec<f64>) -> Result<Self> {
        if port_rates.len() != self.num_sites {
            return Err(Error::InvalidModel(format!(
                "expected {} port rates, got {}",
                self.num_sites,
                port_rates.len()
            )));
        }
        if let Some(k) = port_rates.iter().find(|k| !k.is_finite() || **k < 0.0) {
            return Err(Error::InvalidModel(format!("port rate {k} is not a finite κ ≥ 0")));
        }
        self.port_rates = port_rates;
        Ok(self)
    }

    /// Replaces the on-site frequencies, revalidating.
    pub fn with_onsite_freq(mut self, onsite_freq: Vec<f64>) -> Result<Self> {
        if onsite_freq.len() != self.num_sites {
            return Err(Error::InvalidModel(format!(
                "expected {} on-site frequencies, got {}",
                self.num_sites,
                onsite_freq.len()
            )));
        }
        if let Some(w) = onsite_freq.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite on-site frequency {w}")));
        }
        self.onsite_freq = onsite_freq;
        Ok(self)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn onsite_freq(&self) -> &[f64] {
        &self.onsite_freq
    }

    pub fn hoppings(&self) -> &[Hopping] {
        &self.hoppings
    }

    pub fn port_rates(&self) -> &[f64] {
        &self.port_rates
    }

    /// Hopping amplitude t_{j,j′} for any index order (conjugating the
    /// stored bond when needed), or `None` when the sites are not bonded.
    pub fn hopping_between(&self, j: usize, j_prime: usize) -> Option<C64> {
        self.hoppings.iter().find_map(|h| {
            if (h.to, h.from) == (j, j_prime) {
                Some(h.amplitude)
            } else if (h.to, h.from) == (j_prime, j) {
                Some(h.amplitude.conj())
            } else {
                None
            }
        })
    }
}

impl TryFrom<LatticeModelWire> for LatticeModel {
    type Error = Error;

    fn try_from(w: LatticeModelWire) -> Result<Self> {
        let hoppings = w
            .hoppings
            .into_iter()
            .map(|h| Hopping { from: h.from, to: h.to, amplitude: C64::new(h.re, h.im) })
            .collect();
        LatticeModel::new(w.sites, w.omega, hoppings, w.kappa)
    }
}

impl From<LatticeModel> for LatticeModelWire {
    fn from(m: LatticeModel) -> Self {
        LatticeModelWire {
            sites: m.num_sites,
            omega: m.onsite_freq,
            hoppings: m
                .hoppings
                .into_iter()
                .map(|h| HoppingWire {
                    from: h.from,
                    to: h.to,
                    re: h.amplitude.re,
                    im: h.amplitude.im,
                })
                .collect(),
            kappa: m.port_rates,
        }
    }
}

/// Dense Hermitian Hamiltonian of the network: diagonal ω_j, off-diagonal
/// (j, j′) entry −t_{jj′}. Hermiticity is exact by construction (the two
/// mirror entries are written from the same stored amplitude).
pub fn build_hamiltonian(model: &LatticeModel) -> Array2<C64> {
    let n = model.num_sites();
    let mut h = Array2::zeros((n, n));
    for (j, w) in model.onsite_freq().iter().enumerate() {
        h[(j, j)] = C64::new(*w, 0.0);
    }
    for hop in model.hoppings() {
        let (row, col) = (hop.to - 1, hop.from - 1);
        h[(row, col)] = -hop.amplitude;
        h[(col, row)] = -hop.amplitude.conj();
    }
    h
}

/// Applies a_j → e^{iθ_j} a_j: every bond picks up t̃_{jj′} = t_{jj′}·e^{i(θ_{j′}−θ_j)};
/// on-site frequencies and port rates are untouched.
pub fn apply_gauge(model: &LatticeModel, gauge: &GaugeTransform) -> Result<LatticeModel> {
    if gauge.len() != model.num_sites() {
        return Err(Error::InvalidArgument(format!(
            "gauge transform has {} phases for {} sites",
            gauge.len(),
            model.num_sites()
        )));
    }
    let theta = gauge.phases();
    let hoppings = model
        .hoppings()
        .iter()
        .map(|h| Hopping {
            from: h.from,
            to: h.to,
            amplitude: h.amplitude * C64::from_polar(1.0, theta[h.from - 1] - theta[h.to - 1]),
        })
        .collect();
    LatticeModel::new(
        model.num_sites(),
        model.onsite_freq().to_vec(),
        hoppings,
        model.port_rates().to_vec(),
    )
}

/// Gauge-invariant flux of a closed walk, in (−π, π].
///
/// The walk is given as a 1-based site list whose first and last entries
/// coincide, e.g. `[1, 2, 3, 1]`. Each step u→v contributes the amplitude
/// t_{v,u} (the coefficient of a†_v a_u), so the result is the phase of the
/// quantum amplitude for hopping around the loop in the given order.
pub fn loop_flux(model: &LatticeModel, cycle: &[usize]) -> Result<f64> {
    if cycle.len() < 3 || cycle.first() != cycle.last() {
        return Err(Error::InvalidArgument(
            "cycle must be a closed walk listed as [s₁, s₂, …, s₁]".into(),
        ));
    }
    let mut product = C64::new(1.0, 0.0);
    for step in cycle.windows(2) {
        let (u, v) = (step[0], step[1]);
        let amp = model.hopping_between(v, u).ok_or_else(|| {
            Error::InvalidArgument(format!("cycle uses missing bond between sites {u} and {v}"))
        })?;
        if amp.norm() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bond between sites {u} and {v} has zero amplitude; its phase is undefined"
            )));
        }
        product *= amp;
    }
    // atan2 returns [−π, π]; fold the −π edge onto the canonical +π branch.
    let arg = product.arg();
    Ok(if arg <= -std::f64::consts::PI { std::f64::consts::PI } else { arg })
}

/// Spectrum of the uniform three-site ring at flux Φ: plane waves with
/// k_m = 2πm/3 and energies Ω_m = −2t·cos(k_m + Φ/3).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpectrum {
    /// Angular-momentum labels, fixed order [−1, 0, 1].
    pub m_values: [i32; 3],
    /// Wavevectors k_m = 2πm/3 in the same order.
    pub wavevectors: [f64; 3],
    /// Energies Ω_m in the same order.
    pub energies: [f64; 3],
    /// The flux the spectrum was evaluated at (radians).
    pub flux: f64,
}

impl RingSpectrum {
    /// Energy of the angular-momentum-m eigenstate.
    pub fn energy_for_m(&self, m: i32) -> Option<f64> {
        self.m_values.iter().position(|&v| v == m).map(|i| self.energies[i])
    }

    /// Normalized plane-wave eigenvector (1/√3)·e^{i k_m j}, j = 1, 2, 3.
    pub fn eigenvector_for_m(&self, m: i32) -> Option<[C64; 3]> {
        let i = self.m_values.iter().position(|&v| v == m)?;
        let k = self.wavevectors[i];
        let norm = 1.0 / 3f64.sqrt();
        Some([
            C64::from_polar(norm, k),
            C64::from_polar(norm, 2.0 * k),
            C64::from_polar(norm, 3.0 * k),
        ])
    }
}

/// Closed-form spectrum of the uniform 3-ring: Ω_m = −2t·cos(k_m + Φ/3).
/// The flux wraps modulo 2π; t must be positive.
pub fn ring_spectrum(t: f64, flux: f64) -> Result<RingSpectrum> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("ring hopping t must be positive, got {t}")));
    }
    if !flux.is_finite() {
        return Err(Error::InvalidArgument("ring flux must be finite".into()));
    }
    let m_values = [-1i32, 0, 1];
    let mut wavevectors = [0.0; 3];
    let mut energies = [0.0; 3];
    for (i, m) in m_values.iter().enumerate() {
        let k = 2.0 * std::f64::consts::PI * f64::from(*m) / 3.0;
        wavevectors[i] = k;
        energies[i] = -2.0 * t * (k + flux / 3.0).cos();
    }
    Ok(RingSpectrum { m_values, wavevectors, energies, flux })
}

/// Effective mass at the bottom of the band −2t·cos(ka), recovered by
/// diagonalizing a flux-free ring of 256 sites and fitting E against k²
/// over the five momenta nearest the minimum. Returns m* ≈ 1/(2ta²).
pub fn band_curvature(t: f64, lattice_const: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("hopping t must be positive, got {t}")));
    }
    if !(lattice_const > 0.0) || !lattice_const.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lattice constant must be positive, got {lattice_const}"
        )));
    }
    let n = CURVATURE_RING_SITES;
    let mut hoppings: Vec<Hopping> = (1..n)
        .map(|j| Hopping { from: j, to: j + 1, amplitude: C64::new(t, 0.0) })
        .collect();
    hoppings.push(Hopping { from: 1, to: n, amplitude: C64::new(t, 0.0) });
    let ring = LatticeModel::new(n, vec![0.0; n], hoppings, vec![0.0; n])?;
    let mut energies = linalg::eigvalsh(&build_hamiltonian(&ring))?.to_vec();
    energies.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));

    // The five lowest levels sit at k ∈ {0, ±Δk, ±2Δk}; fit E = c + u/(2m*)
    // with u = k², which is a two-parameter linear least-squares problem.
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * lattice_const);
    let u = [0.0, dk * dk, dk * dk, 4.0 * dk * dk, 4.0 * dk * dk];
    let e = &energies[..5];
    let u_mean = u.iter().sum::<f64>() / 5.0;
    let e_mean = e.iter().sum::<f64>() / 5.0;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (ui, ei) in u.iter().zip(e) {
        cov += (ui - u_mean) * (ei - e_mean);
        var += (ui - u_mean) * (ui - u_mean);
    }
    let slope = cov / var;
    Ok(1.0 / (2.0 * slope))
}
