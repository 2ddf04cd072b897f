//! Brute-force references that share no algebra with the pseudomode
//! solution: a discretized continuum integrated in the one-excitation
//! sector, and direct quadrature of the memory-kernel equations.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_time_grid, Error, Result};
use crate::exact::dilated_amplitudes;
use crate::model::{diagonalize, GlobalBasis, InitialState, ReservoirSpec, SystemSpec, C64};

/// Largest `K * N` accepted by [`evolve_friedrichs`].
pub const MODE_BUDGET: usize = 1_000_000;
/// Default sup-norm tolerance of [`run_friedrichs_oracle`].
pub const FRIEDRICHS_TOL: f64 = 1e-2;
/// Split-step size in units of the inverse largest frequency.
const PHASE_PER_STEP: f64 = 0.05;

/// Uniform midpoint sampling of `J` on `[eps - W, eps + W]` with
/// `|g_k|^2 = J(w_k) dw / (2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedReservoir {
    pub reservoir: ReservoirSpec,
    pub omega: Vec<f64>,
    pub coupling: Vec<f64>,
    pub half_width: f64,
}

impl DiscretizedReservoir {
    pub fn new(reservoir: &ReservoirSpec, modes: usize, half_width: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("need at least one bath mode".into()));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("bath half-width must be > 0, got {half_width}")));
        }
        let dw = 2.0 * half_width / modes as f64;
        let omega: Vec<f64> = (0..modes).map(|k| reservoir.eps - half_width + (k as f64 + 0.5) * dw).collect();
        let coupling = omega
            .iter()
            .map(|&w| (reservoir.spectral_density(w) * dw / (2.0 * std::f64::consts::PI)).sqrt())
            .collect();
        Ok(Self { reservoir: *reservoir, omega, coupling, half_width })
    }

    /// `K = 2000` modes over `W = 40 gamma`.
    pub fn with_defaults(reservoir: &ReservoirSpec) -> Self {
        Self::new(reservoir, 2000, 40.0 * reservoir.gamma).expect("valid defaults")
    }

    pub fn modes(&self) -> usize {
        self.omega.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.modes() as f64
    }

    /// `sum_k |g_k|^2`, which tends to `g^2`.
    pub fn coupling_norm_sq(&self) -> f64 {
        self.coupling.iter().map(|c| c * c).sum()
    }

    /// `2 pi / dw`, after which the discrete bath rephases.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.spacing()
    }

    /// `0.5 K / (2W)`: latest time at which comparisons are trusted.
    pub fn comparison_horizon(&self) -> f64 {
        0.5 * self.modes() as f64 / (2.0 * self.half_width)
    }
}

/// Composition of the split step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitOrder {
    /// Strang splitting.
    #[default]
    Second,
    /// Triple-jump composition of Strang steps.
    Fourth,
}

/// System block of the Friedrichs state, local basis, Schroedinger picture.
#[derive(Debug, Clone, PartialEq)]
pub struct FriedrichsRun {
    pub times: Vec<f64>,
    pub system: Vec<DVector<C64>>,
    /// Largest `| ||state|| - 1 |` over the output times.
    pub max_norm_defect: f64,
}

/// One-excitation amplitudes: `N` system levels and `N` independent baths.
struct Sector<'a> {
    basis: &'a GlobalBasis,
    disc: &'a DiscretizedReservoir,
    coupling_norm: f64,
    system: DVector<C64>,
    bath: Vec<C64>,
}

impl Sector<'_> {
    /// `exp(-i (H_0 - eps) h)`: exact in the global basis for the system
    /// and mode by mode for the baths.
    fn free(&mut self, h: f64) {
        let mut g = self.basis.to_global(&self.system);
        for (a, d) in self.basis.detunings.iter().enumerate() {
            g[a] *= C64::from_polar(1.0, -d * h);
        }
        self.system = self.basis.to_local(&g);
        let k = self.disc.modes();
        let phases: Vec<C64> = self.disc.omega.iter().map(|w| C64::from_polar(1.0, -(w - self.disc.reservoir.eps) * h)).collect();
        for block in self.bath.chunks_mut(k) {
            for (b, p) in block.iter_mut().zip(&phases) {
                *b *= p;
            }
        }
    }

    /// `exp(-i H_I h)`: a rotation in `span{|i>, |G_i>}` per level, with
    /// `|G_i> = sum_k g_k |i,k> / ||g||`.
    fn couple(&mut self, h: f64) {
        if self.coupling_norm == 0.0 {
            return;
        }
        let k = self.disc.modes();
        let (s, c) = (self.coupling_norm * h).sin_cos();
        let unit: Vec<f64> = self.disc.coupling.iter().map(|g| g / self.coupling_norm).collect();
        for (i, block) in self.bath.chunks_mut(k).enumerate() {
            let overlap: C64 = block.iter().zip(&unit).map(|(b, u)| b * u).sum();
            let a = self.system[i];
            self.system[i] = a * c - C64::new(0.0, s) * overlap;
            let shift = overlap * (c - 1.0) - C64::new(0.0, s) * a;
            for (b, u) in block.iter_mut().zip(&unit) {
                *b += shift * u;
            }
        }
    }

    fn strang(&mut self, h: f64) {
        self.free(0.5 * h);
        self.couple(h);
        self.free(0.5 * h);
    }

    fn step(&mut self, h: f64, order: SplitOrder) {
        match order {
            SplitOrder::Second => self.strang(h),
            SplitOrder::Fourth => {
                let cbrt2 = 2.0f64.cbrt();
                let w1 = 1.0 / (2.0 - cbrt2);
                let w0 = -cbrt2 / (2.0 - cbrt2);
                self.strang(w1 * h);
                self.strang(w0 * h);
                self.strang(w1 * h);
            }
        }
    }

    fn norm_sq(&self) -> f64 {
        self.system.norm_squared() + self.bath.iter().map(|b| b.norm_sqr()).sum::<f64>()
    }
}

/// Integrates the discretized Friedrichs model from `psi(0) (+) 0` with
/// exactly unitary split steps and returns the system block.
pub fn evolve_friedrichs(
    state: &InitialState,
    spec: &SystemSpec,
    disc: &DiscretizedReservoir,
    times: &[f64],
    order: SplitOrder,
) -> Result<FriedrichsRun> {
    check_time_grid(times)?;
    let n = spec.n();
    if state.n() != n {
        return Err(Error::Dimension(format!("state has {} levels, system has {n}", state.n())));
    }
    let k = disc.modes();
    if k.saturating_mul(n) > MODE_BUDGET {
        return Err(Error::Budget(format!("K * N = {} exceeds {MODE_BUDGET}", k * n)));
    }
    let basis = diagonalize(spec, &disc.reservoir);
    let coupling_norm = disc.coupling_norm_sq().sqrt();
    let fastest = disc
        .half_width
        .max(coupling_norm)
        .max(basis.detunings.iter().fold(0.0f64, |m, d| m.max(d.abs())));
    let max_step = PHASE_PER_STEP / fastest;

    // The free step omits eps; the phase is restored on output.
    let initial_norm = state.psi.norm_squared();
    let mut sector = Sector { basis: &basis, disc, coupling_norm, system: state.psi.clone(), bath: vec![C64::new(0.0, 0.0); n * k] };
    let mut now = 0.0;
    let mut system = Vec::with_capacity(times.len());
    let mut max_norm_defect = 0.0f64;
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / max_step).ceil() as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                sector.step(h, order);
            }
            now = t;
        }
        let defect = if initial_norm > 0.0 { (sector.norm_sq() / initial_norm).sqrt() - 1.0 } else { 0.0 };
        max_norm_defect = max_norm_defect.max(defect.abs());
        system.push(&sector.system * C64::from_polar(1.0, -disc.reservoir.eps * t));
    }
    Ok(FriedrichsRun { times: times.to_vec(), system, max_norm_defect })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "W")]
    pub half_width: f64,
    pub t_max: f64,
    pub sup_error: f64,
    pub recurrence_time: f64,
    pub pass: bool,
}

/// Sup-norm distance between the Friedrichs system block and the pseudomode
/// amplitudes on `samples + 1` uniform times in `[0, t_max]`.
pub fn run_friedrichs_oracle(
    state: &InitialState,
    spec: &SystemSpec,
    disc: &DiscretizedReservoir,
    t_max: f64,
    samples: usize,
) -> Result<OracleReport> {
    if !(t_max >= 0.0) {
        return Err(Error::NegativeTime(t_max));
    }
    if t_max > disc.comparison_horizon() {
        return Err(Error::InvalidArgument(format!(
            "t_max = {t_max} exceeds the recurrence guard {}",
            disc.comparison_horizon()
        )));
    }
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|i| t_max * i as f64 / samples as f64).collect();
    let run = evolve_friedrichs(state, spec, disc, &times, SplitOrder::default())?;
    let basis = diagonalize(spec, &disc.reservoir);
    let n = spec.n();
    let sup_error = times
        .iter()
        .zip(&run.system)
        .map(|(&t, psi)| {
            let reference = dilated_amplitudes(state, &basis, &disc.reservoir, t).rows(0, n).into_owned();
            (psi - reference).norm()
        })
        .fold(0.0, f64::max);
    Ok(OracleReport {
        modes: disc.modes(),
        half_width: disc.half_width,
        t_max,
        sup_error,
        recurrence_time: disc.recurrence_time(),
        pass: sup_error <= FRIEDRICHS_TOL,
    })
}

/// Time grid `0, dt, ..., n dt` with `n dt` the first multiple reaching `t_max`.
fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::NegativeTime(t_max));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

/// Solves `y' = -int_0^t k(t - s) y(s) ds` on a uniform grid by implicit
/// trapezoidal stepping with trapezoidal quadrature of the memory term.
/// `kernel[m] = k(m h)`.
fn volterra_scalar(kernel: &[C64], y0: C64, h: f64) -> Vec<C64> {
    let steps = kernel.len() - 1;
    let mut y = Vec::with_capacity(steps + 1);
    y.push(y0);
    // f_prev = -int_0^{t_n} k(t_n - s) y(s) ds by the trapezoidal rule.
    let mut f_prev = C64::new(0.0, 0.0);
    let implicit = 1.0 + 0.25 * h * h * kernel[0];
    for n in 0..steps {
        // F_{n+1} = partial - (h/2) k(0) y_{n+1}
        let mut partial = kernel[n + 1] * y[0] * 0.5;
        for j in 1..=n {
            partial += kernel[n + 1 - j] * y[j];
        }
        let partial = -partial * h;
        let next = (y[n] + 0.5 * h * (f_prev + partial)) / implicit;
        y.push(next);
        f_prev = partial - 0.5 * h * kernel[0] * next;
    }
    y
}

/// Global-basis interaction-picture trajectories on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraPsi {
    pub times: Vec<f64>,
    pub psi: Vec<DVector<C64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSigma {
    pub times: Vec<f64>,
    pub sigma: Vec<DMatrix<C64>>,
}

/// `psi_I' = -int_0^t G(t - s) e^{i H_S (t - s)} psi_I(s) ds`, solved level by
/// level in the global basis where the kernel is `g^2 e^{(-gamma/2 + i dE) tau}`.
pub fn volterra_psi(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    t_max: f64,
    dt: f64,
) -> Result<VolterraPsi> {
    let times = uniform_grid(t_max, dt)?;
    let psi_g0 = basis.to_global(&state.psi);
    let n = basis.n();
    let columns: Vec<Vec<C64>> = (0..n)
        .map(|a| {
            let kernel: Vec<C64> = times
                .iter()
                .map(|&tau| reservoir.correlation(tau) * C64::from_polar(1.0, basis.energies[a] * tau))
                .collect();
            volterra_scalar(&kernel, psi_g0[a], dt)
        })
        .collect();
    let psi = (0..times.len()).map(|i| DVector::from_fn(n, |a, _| columns[a][i])).collect();
    Ok(VolterraPsi { times, psi })
}

/// Excited block of the Born equation,
/// `sigma' = -int_0^t [G(t-s) e^{i H_S (t-s)} sigma(s) + G*(t-s) sigma(s) e^{-i H_S (t-s)}] ds`,
/// solved entry by entry in the global basis from `sigma(0) = psi psi^dagger`.
pub fn volterra_sigma(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    t_max: f64,
    dt: f64,
) -> Result<VolterraSigma> {
    let times = uniform_grid(t_max, dt)?;
    let psi_g0 = basis.to_global(&state.psi);
    let n = basis.n();
    let mut entries = vec![Vec::new(); n * n];
    for a in 0..n {
        for b in 0..n {
            let kernel: Vec<C64> = times
                .iter()
                .map(|&tau| {
                    let left = reservoir.correlation(tau) * C64::from_polar(1.0, basis.energies[a] * tau);
                    let right = reservoir.correlation(tau).conj() * C64::from_polar(1.0, -basis.energies[b] * tau);
                    left + right
                })
                .collect();
            entries[a + n * b] = volterra_scalar(&kernel, psi_g0[a] * psi_g0[b].conj(), dt);
        }
    }
    let sigma = (0..times.len()).map(|i| DMatrix::from_fn(n, n, |a, b| entries[a + n * b][i])).collect();
    Ok(VolterraSigma { times, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::evolve_born;
    use crate::exact::evolve_exact;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn discretization_layout() {
        let r = ReservoirSpec::new(1.0, 2.0, 0.7).unwrap();
        let d = DiscretizedReservoir::with_defaults(&r);
        assert_eq!(d.modes(), 2000);
        assert_relative_eq!(d.spacing(), 0.08, epsilon = 1e-15);
        for k in 0..1000 {
            assert_relative_eq!(d.omega[k] - 0.7, 0.7 - d.omega[1999 - k], epsilon = 1e-12);
            assert_relative_eq!(d.coupling[k], d.coupling[1999 - k], max_relative = 1e-12);
        }
        let sum = d.coupling_norm_sq();
        assert!((sum - 1.0).abs() < 0.02, "{sum}");
        assert!(sum < 1.0);
        assert_relative_eq!(d.comparison_horizon(), 6.25, epsilon = 1e-12);
        assert!(DiscretizedReservoir::new(&r, 0, 1.0).is_err());
    }

    #[test]
    fn friedrichs_initial_and_uncoupled() {
        let spec = SystemSpec::new(DMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(-0.4, 0.0)])).unwrap();
        let psi = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let state = InitialState::new(c(0.0, 0.0), psi.clone()).unwrap();

        let r = ReservoirSpec::new(1.0, 1.0, 0.2).unwrap();
        let d = DiscretizedReservoir::new(&r, 200, 10.0).unwrap();
        let run = evolve_friedrichs(&state, &spec, &d, &[0.0, 1.0, 3.0], SplitOrder::Second).unwrap();
        assert_eq!(run.system[0], psi);
        assert!(run.max_norm_defect < 1e-12);

        let free = ReservoirSpec::new(0.0, 1.0, 0.2).unwrap();
        let d = DiscretizedReservoir::new(&free, 200, 10.0).unwrap();
        let run = evolve_friedrichs(&state, &spec, &d, &[2.0], SplitOrder::Fourth).unwrap();
        let basis = diagonalize(&spec, &free);
        let mut g = basis.to_global(&psi);
        for a in 0..2 {
            g[a] *= C64::from_polar(1.0, -basis.energies[a] * 2.0);
        }
        assert!((&run.system[0] - basis.to_local(&g)).norm() < 1e-12);
    }

    #[test]
    fn friedrichs_budget_and_grid() {
        let spec = SystemSpec::diagonal(&[0.0]).unwrap();
        let state = InitialState::new(c(0.0, 0.0), DVector::from_element(1, c(1.0, 0.0))).unwrap();
        let r = ReservoirSpec::new(1.0, 1.0, 0.0).unwrap();
        let d = DiscretizedReservoir::new(&r, MODE_BUDGET + 1, 10.0).unwrap();
        assert!(matches!(evolve_friedrichs(&state, &spec, &d, &[0.0], SplitOrder::Second), Err(Error::Budget(_))));
        let d = DiscretizedReservoir::new(&r, 10, 10.0).unwrap();
        assert!(evolve_friedrichs(&state, &spec, &d, &[1.0, 0.5], SplitOrder::Second).is_err());
    }

    #[test]
    fn friedrichs_matches_pseudomode_single_level() {
        let spec = SystemSpec::diagonal(&[1.0]).unwrap();
        let state = InitialState::new(c(0.0, 0.0), DVector::from_element(1, c(1.0, 0.0))).unwrap();
        let r = ReservoirSpec::new(1.0, 2.0, 0.0).unwrap();
        let d = DiscretizedReservoir::with_defaults(&r);
        let report = run_friedrichs_oracle(&state, &spec, &d, 5.0 / r.gamma, 100).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(run_friedrichs_oracle(&state, &spec, &d, 100.0, 10).is_err());
    }

    #[test]
    fn volterra_grid() {
        assert_eq!(uniform_grid(1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(0.0, 0.1).unwrap(), vec![0.0]);
        assert!(uniform_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn volterra_psi_matches_closed_form() {
        let spec = SystemSpec::new(DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.7, 0.0)])).unwrap();
        let r = ReservoirSpec::new(1.0, 1.0, 0.1).unwrap();
        let basis = diagonalize(&spec, &r);
        let state = InitialState::normalized(c(0.3, 0.0), DVector::from_vec(vec![c(0.6, 0.1), c(-0.2, 0.7)])).unwrap();
        let sol = volterra_psi(&state, &basis, &r, 5.0, 1e-3).unwrap();
        let exact = evolve_exact(&state, &basis, &r, &sol.times).unwrap();
        let err = sol.psi.iter().zip(&exact.psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn volterra_psi_uncoupled_is_stationary() {
        let r = ReservoirSpec::new(0.0, 1.0, 0.0).unwrap();
        let basis = GlobalBasis::from_detunings(&[0.4, -1.0], &r);
        let state = InitialState::new(c(0.0, 0.0), DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        let sol = volterra_psi(&state, &basis, &r, 2.0, 0.01).unwrap();
        assert!(sol.psi.iter().all(|p| (p - &state.psi).norm() < 1e-15));
    }

    #[test]
    fn volterra_sigma_matches_born() {
        let spec = SystemSpec::new(DMatrix::from_row_slice(2, 2, &[c(0.2, 0.0), c(0.4, 0.1), c(0.4, -0.1), c(-0.5, 0.0)])).unwrap();
        let r = ReservoirSpec::new(1.0, 1.0, -0.2).unwrap();
        let basis = diagonalize(&spec, &r);
        let state = InitialState::normalized(c(0.0, 0.0), DVector::from_vec(vec![c(0.5, 0.2), c(0.1, -0.8)])).unwrap();
        let sol = volterra_sigma(&state, &basis, &r, 4.0, 1e-3).unwrap();
        let born = evolve_born(&state, &basis, &r, &sol.times).unwrap();
        let mut err = 0.0f64;
        for (s, st) in sol.sigma.iter().zip(&born.states) {
            err = err.max((s - st.sigma()).norm());
            assert!((s - s.adjoint()).norm() < 1e-10);
        }
        assert!(err < 1e-6, "{err:e}");
        let s0 = &sol.sigma[0];
        let p = basis.to_global(&state.psi);
        assert_eq!(*s0, &p * p.adjoint());
    }
}
