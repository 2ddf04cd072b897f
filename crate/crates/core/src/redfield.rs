//! Redfield master equation, non-Markovian and Markovian.
//!
//! For this model both equations are diagonal in the global basis with
//!
//! ```text
//! Y_a(t)   = Y_a(inf) (1 - exp(-(gamma/2 - i dE_a) t))
//! Y_a(inf) = J(E_a) (gamma/2 + i dE_a) / gamma
//! ```
//!
//! and `d psi_a / dt = -Y_a(t) psi_a`. The Markovian form replaces `Y_a(t)`
//! with `Y_a(inf)` and is already of GKSL (secular) form.

use nalgebra::DVector;

use crate::error::{check_time_grid, Error, Result};
use crate::exact::expm1;
use crate::model::{GlobalBasis, InitialState, ReservoirSpec, C64};
use crate::rates::{Method, RateTable};
use crate::state::{Basis, Picture, ReducedState, Trajectory};

/// Per-level time-dependent Redfield generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RedfieldGenerator {
    /// `Y_a(inf)`.
    pub asymptote: Vec<C64>,
    /// `gamma/2 - i dE_a`, the relaxation exponent of `Y_a(t)`.
    pub kappa: Vec<C64>,
}

impl RedfieldGenerator {
    pub fn new(basis: &GlobalBasis, reservoir: &ReservoirSpec) -> Self {
        let hg = 0.5 * reservoir.gamma;
        let asymptote = basis
            .energies
            .iter()
            .zip(&basis.detunings)
            .map(|(&e, &d)| C64::new(hg, d) * (reservoir.spectral_density(e) / reservoir.gamma))
            .collect();
        let kappa = basis.detunings.iter().map(|&d| C64::new(hg, -d)).collect();
        Self { asymptote, kappa }
    }

    pub fn n(&self) -> usize {
        self.kappa.len()
    }

    /// `Y_a(t)`.
    pub fn at(&self, a: usize, t: f64) -> C64 {
        -self.asymptote[a] * expm1(-self.kappa[a] * t)
    }

    /// `int_0^t Y_a(s) ds = Y_a(inf) (t - (1 - exp(-kappa t)) / kappa)`.
    pub fn integral(&self, a: usize, t: f64) -> C64 {
        let k = self.kappa[a];
        self.asymptote[a] * (t + expm1(-k * t) / k)
    }
}

pub fn redfield_rates(basis: &GlobalBasis, reservoir: &ReservoirSpec, t: f64) -> Result<RateTable> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let gen = RedfieldGenerator::new(basis, reservoir);
    let ground = (0..gen.n()).map(|a| gen.at(a, t).re).collect();
    Ok(RateTable::from_ground_rates(Method::Redfield { t }, ground))
}

/// Excited-ground Redfield rate in the expanded form
/// `J(E)/gamma [gamma/2 (1 - e^{-gamma t/2} cos(dE t)) + dE e^{-gamma t/2} sin(dE t)]`.
pub fn redfield_ground_rate(detuning: f64, reservoir: &ReservoirSpec, t: f64) -> f64 {
    let j = reservoir.spectral_density(detuning + reservoir.eps);
    let decay = (-0.5 * reservoir.gamma * t).exp();
    let (s, c) = (detuning * t).sin_cos();
    j / reservoir.gamma * (0.5 * reservoir.gamma * (1.0 - decay * c) + detuning * decay * s)
}

/// `eta_a0 = J(E_a)/2 = (gamma/2) g^2 / ((gamma/2)^2 + dE_a^2)`.
pub fn gksl_rates(basis: &GlobalBasis, reservoir: &ReservoirSpec) -> RateTable {
    let ground = basis.energies.iter().map(|&e| 0.5 * reservoir.spectral_density(e)).collect();
    RateTable::from_ground_rates(Method::Gksl, ground)
}

/// Closed-form Redfield (`markovian = false`) or GKSL (`markovian = true`)
/// evolution. The excited block is `|psi_I><psi_I|` at all times.
pub fn evolve_redfield(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    times: &[f64],
    markovian: bool,
) -> Result<Trajectory> {
    check_time_grid(times)?;
    let gen = RedfieldGenerator::new(basis, reservoir);
    let psi_g0 = basis.to_global(&state.psi);
    let n = basis.n();
    let mut psi_out = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let psi = DVector::from_fn(n, |a, _| {
            let exponent = if markovian { gen.asymptote[a] * t } else { gen.integral(a, t) };
            psi_g0[a] * (-exponent).exp()
        });
        states.push(ReducedState::pure_excited(state.psi0, &psi, Basis::Global, Picture::Interaction));
        psi_out.push(psi);
    }
    let method = if markovian { Method::Gksl } else { Method::Redfield { t: times.last().copied().unwrap_or(0.0) } };
    Ok(Trajectory { method, times: times.to_vec(), psi: psi_out, states })
}
