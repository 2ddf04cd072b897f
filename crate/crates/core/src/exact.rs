//! Exact reduced dynamics via a pseudomode per excited level.
//!
//! The excited amplitudes `psi` and the pseudomode amplitudes `phi` evolve
//! under the non-Hermitian Hamiltonian
//!
//! ```text
//! H_eff = [[H_S, g I], [g I, (eps - i gamma/2) I]]
//! ```
//!
//! In the global interaction picture this splits into independent 2x2 blocks
//! `d/dt (psi_a, phi_a) = [[0, -i g], [-i g, i dE_a - gamma/2]] (psi_a, phi_a)`
//! whose eigenvalues `lambda_{a,+-}` fix all exact rates.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_time_grid, Result};
use crate::model::{GlobalBasis, InitialState, ReservoirSpec, SystemSpec, C64};
use crate::ode::{self, Tolerances};
use crate::rates::{Method, RateTable};
use crate::state::{Basis, Picture, ReducedState, Trajectory};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    /// Schroedinger-picture `H_eff` on `C^N (+) C^N` (system, pseudomodes).
    pub matrix: DMatrix<C64>,
    /// Interaction-picture `H_{I,eff}`.
    pub interaction_matrix: DMatrix<C64>,
}

impl EffectiveHamiltonian {
    /// `(H_eff - H_eff^dagger) / (-2i)`; equals `(gamma/2) (0 (+) I)`.
    pub fn dissipator(&self) -> DMatrix<C64> {
        (&self.matrix - self.matrix.adjoint()) / C64::new(0.0, -2.0)
    }
}

pub fn build_effective(spec: &SystemSpec, reservoir: &ReservoirSpec) -> EffectiveHamiltonian {
    let n = spec.n();
    let g = C64::new(reservoir.g, 0.0);
    let pseudo = C64::new(reservoir.eps, -0.5 * reservoir.gamma);
    let eye = DMatrix::<C64>::identity(n, n);

    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    matrix.view_mut((0, 0), (n, n)).copy_from(spec.h_s());
    matrix.view_mut((0, n), (n, n)).copy_from(&(&eye * g));
    matrix.view_mut((n, 0), (n, n)).copy_from(&(&eye * g));
    matrix.view_mut((n, n), (n, n)).copy_from(&(&eye * pseudo));

    let mut interaction_matrix = DMatrix::zeros(2 * n, 2 * n);
    interaction_matrix.view_mut((0, n), (n, n)).copy_from(&(&eye * g));
    interaction_matrix.view_mut((n, 0), (n, n)).copy_from(&(&eye * g));
    interaction_matrix.view_mut((n, n), (n, n)).copy_from(&(&eye * pseudo - spec.h_s()));

    EffectiveHamiltonian { matrix, interaction_matrix }
}

/// Eigenvalues of one 2x2 block; `plus` is the slow (rate-defining) root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEigenvalues {
    pub plus: C64,
    pub minus: C64,
}

/// Roots of `lambda^2 - (i dE - gamma/2) lambda + g^2 = 0`.
///
/// The larger-magnitude root comes from the quadratic formula, the other
/// from the product `g^2 / lambda`, which stays accurate for `gamma >> g`.
pub fn block_eigenvalues(detuning: f64, reservoir: &ReservoirSpec) -> BlockEigenvalues {
    let b = C64::new(-0.5 * reservoir.gamma, detuning);
    let g2 = reservoir.g * reservoir.g;
    let sq = (b * b - 4.0 * g2).sqrt();
    let sum = if (b.conj() * sq).re >= 0.0 { b + sq } else { b - sq };
    let big = sum * 0.5;
    let small = if big.norm() > 0.0 { C64::new(g2, 0.0) / big } else { C64::new(0.0, 0.0) };

    // Real parts equal up to rounding are a tie, broken by the imaginary part.
    let tie = 1e-13 * (big.norm() + small.norm());
    let first_is_plus = if (big.re - small.re).abs() <= tie { big.im >= small.im } else { big.re > small.re };
    if first_is_plus {
        BlockEigenvalues { plus: big, minus: small }
    } else {
        BlockEigenvalues { plus: small, minus: big }
    }
}

/// Closed-form real part of `lambda_{a,+}`:
///
/// ```text
/// -gamma/4 + sqrt(2)/4 * sqrt((gamma/2)^2 - 4g^2 - dE^2
///     + sqrt(((gamma/2 + 2g)^2 + dE^2) ((gamma/2 - 2g)^2 + dE^2)))
/// ```
pub fn re_lambda_plus_closed_form(detuning: f64, reservoir: &ReservoirSpec) -> f64 {
    let hg = 0.5 * reservoir.gamma;
    let g = reservoir.g;
    let d2 = detuning * detuning;
    let outer = ((hg + 2.0 * g).powi(2) + d2) * ((hg - 2.0 * g).powi(2) + d2);
    let inner = (hg * hg - 4.0 * g * g - d2 + outer.sqrt()).max(0.0);
    -0.25 * reservoir.gamma + std::f64::consts::SQRT_2 / 4.0 * inner.sqrt()
}

/// `eta_alpha = -2 Re lambda_+`, `eta_alpha0 = -Re lambda_+`,
/// `eta_alphabeta = eta_alpha0 + eta_beta0`.
pub fn exact_rates(basis: &GlobalBasis, reservoir: &ReservoirSpec) -> RateTable {
    let ground: Vec<f64> = basis
        .detunings
        .iter()
        .map(|&d| {
            let re = block_eigenvalues(d, reservoir).plus.re;
            let closed = re_lambda_plus_closed_form(d, reservoir);
            if (re - closed).abs() > 1e-10 * (1.0 + re.abs()) {
                log::warn!("Re lambda_+ mismatch at dE = {d}: quadratic {re:e}, closed form {closed:e}");
            }
            // Clamp the -0.0 / +tiny produced at g = 0.
            (-re).max(0.0)
        })
        .collect();
    RateTable::from_ground_rates(Method::Exact, ground)
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub(crate) fn expm1(z: C64) -> C64 {
    let (s, c) = (0.5 * z.im).sin_cos();
    let em1 = z.re.exp_m1();
    // cos(y) - 1 = -2 sin^2(y/2)
    let cos_m1 = -2.0 * s * s;
    C64::new(em1 * (2.0 * c * c - 1.0) + cos_m1, z.re.exp() * z.im.sin())
}

/// `(exp(z) - 1) / z`, continuous at `z = 0`.
pub(crate) fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-5 {
        ONE + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        expm1(z) / z
    }
}

/// `exp(M t)` for one block, in Putzer form
/// `e^{l+ t} [I + (M - l+ I) t phi1((l- - l+) t)]`.
///
/// Expanding around the slow root keeps every factor bounded; the
/// coincident-root (critically damped) case needs no special branch because
/// `phi1` is continuous at zero.
pub fn block_propagator(detuning: f64, reservoir: &ReservoirSpec, t: f64) -> [[C64; 2]; 2] {
    let ev = block_eigenvalues(detuning, reservoir);
    let mig = C64::new(0.0, -reservoir.g);
    let b = C64::new(-0.5 * reservoir.gamma, detuning);
    let lead = (ev.plus * t).exp();
    let w = phi1((ev.minus - ev.plus) * t) * t;
    [
        [lead * (ONE - ev.plus * w), lead * mig * w],
        [lead * mig * w, lead * (ONE + (b - ev.plus) * w)],
    ]
}

/// Global interaction-picture `(psi, phi)` at time `t` from `psi(0)` given in
/// the global basis and `phi(0) = 0`.
pub(crate) fn propagate(psi_global: &DVector<C64>, basis: &GlobalBasis, reservoir: &ReservoirSpec, t: f64)
    -> (DVector<C64>, DVector<C64>)
{
    let n = basis.n();
    let mut psi = DVector::zeros(n);
    let mut phi = DVector::zeros(n);
    for a in 0..n {
        let p = block_propagator(basis.detunings[a], reservoir, t);
        psi[a] = p[0][0] * psi_global[a];
        phi[a] = p[1][0] * psi_global[a];
    }
    (psi, phi)
}

/// Exact `rho_SI(t)` in the global basis on each requested time.
pub fn evolve_exact(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    times: &[f64],
) -> Result<Trajectory> {
    check_time_grid(times)?;
    let psi_g0 = basis.to_global(&state.psi);
    let mut psi_out = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let (psi, _) = propagate(&psi_g0, basis, reservoir, t);
        states.push(ReducedState::pure_excited(state.psi0, &psi, Basis::Global, Picture::Interaction));
        psi_out.push(psi);
    }
    Ok(Trajectory { method: Method::Exact, times: times.to_vec(), psi: psi_out, states })
}

/// Schroedinger-picture local-basis amplitudes `psi(t) (+) phi(t)`.
pub fn dilated_amplitudes(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    t: f64,
) -> DVector<C64> {
    let n = basis.n();
    let (psi, phi) = propagate(&basis.to_global(&state.psi), basis, reservoir, t);
    let rot = DVector::from_iterator(n, basis.energies.iter().map(|&e| (-I * e * t).exp()));
    let psi_l = basis.to_local(&psi.component_mul(&rot));
    let phi_l = basis.to_local(&phi.component_mul(&rot));
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&psi_l);
    out.rows_mut(n, n).copy_from(&phi_l);
    out
}

/// `(2N+1)`-dimensional density matrix built from the dilated amplitudes:
/// `0 (+) |v><v| + psi0 |0><v| + conj(psi0) |v><0| + (1 - |v|^2) |0><0|`.
pub fn dilated_state(psi0: C64, amplitudes: &DVector<C64>) -> DMatrix<C64> {
    ReducedState::pure_excited(psi0, amplitudes, Basis::Local, Picture::Schroedinger).matrix
}

/// Integrates the `(2N+1)`-level GKSL equation with
/// `H = 0 (+) (H_eff + H_eff^dagger)/2` and jump operators
/// `L_l = sqrt(gamma) |0><l~|` from the dilated initial state, and returns
/// the Frobenius distance to the state built from the closed-form amplitudes
/// at time `t`.
pub fn dilation_check(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(crate::error::Error::NegativeTime(t));
    }
    let n = basis.n();
    let dim = 2 * n + 1;
    let spec = SystemSpec::new(basis.reconstruct())?;
    let heff = build_effective(&spec, reservoir).matrix;
    let herm = (&heff + heff.adjoint()).scale(0.5);
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    h.view_mut((1, 1), (2 * n, 2 * n)).copy_from(&herm);
    let gamma = reservoir.gamma;

    let rhs = |_t: f64, y: &DVector<C64>| -> DVector<C64> {
        let rho = DMatrix::from_column_slice(dim, dim, y.as_slice());
        let mut d = (&h * &rho - &rho * &h) * (-I);
        for l in 0..n {
            let p = n + 1 + l;
            // L rho L^dagger = gamma rho[p][p] |0><0|
            d[(0, 0)] += rho[(p, p)] * gamma;
            // -1/2 {L^dagger L, rho}: L^dagger L = gamma |p><p|
            for j in 0..dim {
                d[(p, j)] -= rho[(p, j)] * (0.5 * gamma);
                d[(j, p)] -= rho[(j, p)] * (0.5 * gamma);
            }
        }
        DVector::from_column_slice(d.as_slice())
    };

    let rho0 = dilated_state(state.psi0, &dilated_amplitudes(state, basis, reservoir, 0.0));
    let y0 = DVector::from_column_slice(rho0.as_slice());
    let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
    let y = ode::integrate(rhs, 0.0, &y0, t, tol)?;
    let integrated = DMatrix::from_column_slice(dim, dim, y.as_slice());
    let closed = dilated_state(state.psi0, &dilated_amplitudes(state, basis, reservoir, t));
    Ok((integrated - closed).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::diagonalize;
    use approx::assert_relative_eq;

    fn res(g: f64, gamma: f64) -> ReservoirSpec {
        ReservoirSpec::new(g, gamma, 0.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn effective_single_level() {
        let spec = SystemSpec::diagonal(&[2.0]).unwrap();
        let h = build_effective(&spec, &res(1.0, 2.0));
        let expected = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(h.matrix, expected);
        let expected_i = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-2.0, -1.0)]);
        assert_eq!(h.interaction_matrix, expected_i);
    }

    #[test]
    fn effective_block_pattern_and_dissipator() {
        let spec = SystemSpec::diagonal(&[1.0, 3.0]).unwrap();
        let r = ReservoirSpec::new(0.7, 1.3, 0.2).unwrap();
        let h = build_effective(&spec, &r);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { c(0.7, 0.0) } else { c(0.0, 0.0) };
                assert_eq!(h.matrix[(i, j + 2)], want);
                assert_eq!(h.matrix[(i + 2, j)], want);
            }
        }
        let d = h.dissipator();
        for k in 0..4 {
            let want = if k >= 2 { 0.65 } else { 0.0 };
            assert_relative_eq!(d[(k, k)].re, want, epsilon = 1e-15);
        }
        assert!((d.clone() - DMatrix::from_diagonal(&d.diagonal())).norm() < 1e-15);
    }

    #[test]
    fn zero_coupling_decouples() {
        let spec = SystemSpec::diagonal(&[1.0, 3.0]).unwrap();
        let h = build_effective(&spec, &res(0.0, 1.0));
        assert_eq!(h.matrix.view((0, 2), (2, 2)).norm(), 0.0);
        assert_eq!(h.matrix.view((2, 0), (2, 2)).norm(), 0.0);
    }

    #[test]
    fn critical_damping_double_root() {
        let ev = block_eigenvalues(0.0, &res(1.0, 4.0));
        assert!((ev.plus - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((ev.minus - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn underdamped_resonant_roots() {
        let ev = block_eigenvalues(0.0, &res(1.0, 2.0));
        let s3 = 3.0f64.sqrt() / 2.0;
        assert!((ev.plus - c(-0.5, s3)).norm() < 1e-14);
        assert!((ev.minus - c(-0.5, -s3)).norm() < 1e-14);
    }

    #[test]
    fn decoupled_roots() {
        let ev = block_eigenvalues(1.3, &res(0.0, 0.8));
        assert!(ev.plus.norm() < 1e-15);
        assert!((ev.minus - c(-0.4, 1.3)).norm() < 1e-15);
    }

    #[test]
    fn rates_resonant() {
        let basis = GlobalBasis::from_detunings(&[0.0], &res(1.0, 2.0));
        let r = exact_rates(&basis, &res(1.0, 2.0));
        assert_relative_eq!(r.eta_alpha[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.eta_alpha0[0], 0.5, epsilon = 1e-15);

        let r = exact_rates(&basis, &res(1.0, 6.0));
        assert_relative_eq!(r.eta_alpha[0], 3.0 - 5.0f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r.eta_alpha[0], 0.76393, epsilon = 1e-5);

        let r = exact_rates(&basis, &res(0.0, 6.0));
        assert_eq!(r.eta_alpha[0], 0.0);
        assert_eq!(r.eta_alpha0[0], 0.0);
    }

    #[test]
    fn resonant_rate_is_half_width_when_underdamped() {
        for &gamma in &[0.1, 1.0, 2.5, 3.999, 4.0] {
            let r = exact_rates(&GlobalBasis::from_detunings(&[0.0], &res(1.0, gamma)), &res(1.0, gamma));
            assert_relative_eq!(r.eta_alpha[0], gamma / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn rate_table_consistency() {
        let r = ReservoirSpec::new(0.8, 1.7, 0.3).unwrap();
        let basis = GlobalBasis::from_detunings(&[-1.2, 0.1, 2.0], &r);
        let t = exact_rates(&basis, &r);
        for a in 0..3 {
            assert_relative_eq!(t.eta_alphabeta[(a, a)], t.eta_alpha[a], epsilon = 1e-12);
            for b in 0..3 {
                assert_relative_eq!(t.eta_alphabeta[(a, b)], t.eta_alpha0[a] + t.eta_alpha0[b], epsilon = 1e-12);
                assert!(t.eta_alphabeta[(a, b)] >= 0.0);
            }
        }
    }

    #[test]
    fn propagator_matches_pade_exponential() {
        for &(d, g, gamma, t) in &[(0.0, 1.0, 4.0, 1.3), (0.7, 1.1, 0.5, 2.0), (-2.0, 0.3, 9.0, 0.4), (0.0, 1.0, 2.0, 30.0)] {
            let r = res(g, gamma);
            let m = nalgebra::Matrix2::new(c(0.0, 0.0), c(0.0, -g), c(0.0, -g), c(-gamma / 2.0, d));
            let e = (m * c(t, 0.0)).exp();
            let p = block_propagator(d, &r, t);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p[i][j] - e[(i, j)]).norm() < 1e-12, "{d} {g} {gamma} {t}: {:?} vs {}", p, e);
                }
            }
        }
    }

    #[test]
    fn near_critical_propagator_is_continuous() {
        let r_crit = res(1.0, 4.0);
        let r_near = res(1.0, 4.0 + 1e-11);
        let a = block_propagator(0.0, &r_crit, 2.0);
        let b = block_propagator(0.0, &r_near, 2.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn initial_state_reproduced() {
        let spec = SystemSpec::diagonal(&[0.5, -0.2]).unwrap();
        let r = res(1.0, 1.0);
        let basis = diagonalize(&spec, &r);
        let psi = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.6)]);
        let state = InitialState::normalized(c(0.3, 0.2), psi).unwrap();
        let tr = evolve_exact(&state, &basis, &r, &[0.0]).unwrap();
        let expected = ReducedState::pure_excited(state.psi0, &basis.to_global(&state.psi), Basis::Global, Picture::Interaction);
        assert!((&tr.states[0].matrix - &expected.matrix).norm() < 1e-15);
    }

    #[test]
    fn full_decay_at_long_times() {
        let spec = SystemSpec::diagonal(&[0.5, -1.2, 2.0]).unwrap();
        let r = ReservoirSpec::new(1.0, 2.0, 0.1).unwrap();
        let basis = diagonalize(&spec, &r);
        let psi = DVector::from_element(3, c(0.5, 0.0));
        let state = InitialState::normalized(c(0.5, 0.0), psi).unwrap();
        let tr = evolve_exact(&state, &basis, &r, &[150.0]).unwrap();
        let mut ground = DMatrix::zeros(4, 4);
        ground[(0, 0)] = c(1.0, 0.0);
        assert!((&tr.states[0].matrix - ground).norm() < 1e-6);
    }

    #[test]
    fn unitary_without_coupling() {
        let spec = SystemSpec::diagonal(&[0.5, -1.2]).unwrap();
        let r = res(0.0, 1.0);
        let basis = diagonalize(&spec, &r);
        let state = InitialState::new(c(0.0, 0.0), DVector::from_vec(vec![c(0.8, 0.0), c(0.0, 0.6)])).unwrap();
        let tr = evolve_exact(&state, &basis, &r, &[0.0, 1.0, 10.0, 100.0]).unwrap();
        for psi in &tr.psi {
            assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let r = res(1.0, 1.0);
        let basis = GlobalBasis::from_detunings(&[0.0], &r);
        let state = InitialState::new(c(0.0, 0.0), DVector::from_element(1, c(1.0, 0.0))).unwrap();
        assert!(evolve_exact(&state, &basis, &r, &[0.0, 2.0, 1.0]).is_err());
        assert!(evolve_exact(&state, &basis, &r, &[-1.0]).is_err());
    }

    #[test]
    fn dilation_zero_time_and_single_level() {
        let r = ReservoirSpec::new(1.0, 2.0, 0.0).unwrap();
        let basis = GlobalBasis::from_detunings(&[1.0], &r);
        let state = InitialState::new(c(0.6, 0.0), DVector::from_element(1, c(0.0, 0.8))).unwrap();
        assert_eq!(dilation_check(&state, &basis, &r, 0.0).unwrap(), 0.0);
        assert!(dilation_check(&state, &basis, &r, 1.0).unwrap() <= 1e-8);
    }

    #[test]
    fn dilation_without_coupling() {
        let r = ReservoirSpec::new(0.0, 2.0, 0.0).unwrap();
        let basis = GlobalBasis::from_detunings(&[1.0, -0.5], &r);
        let state = InitialState::normalized(c(0.6, 0.0), DVector::from_vec(vec![c(0.0, 0.8), c(0.3, 0.1)])).unwrap();
        for &t in &[0.5, 3.0, 10.0] {
            assert!(dilation_check(&state, &basis, &r, t).unwrap() <= 1e-8);
        }
    }
}
