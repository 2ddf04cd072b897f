//! Nakajima-Zwanzig equation in the Born approximation.
//!
//! The ground-excited coherences follow the same Cauchy problem as the exact
//! solution; here they are integrated from their own 2x2 generator. The
//! excited block `sigma` couples to an auxiliary matrix `X`;
//! in the global basis each entry evolves under a 3x3 constant matrix
//! acting on `(sigma_ab, X_ab, -conj(X_ba))`, with
//! `sigma_ab = <a|sigma|b>`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};

use crate::cubic::{solve_cubic, CubicCoefficients};
use crate::error::{check_time_grid, Result};
use crate::exact::block_eigenvalues;
use crate::model::{GlobalBasis, InitialState, ReservoirSpec, C64};
use crate::rates::{Method, RateTable};
use crate::state::{Basis, Picture, ReducedState, Trajectory};

/// Root real parts above this trigger a diagnostic.
const POSITIVE_ROOT_TOL: f64 = 1e-10;

/// Generator of `(sigma_ab, X_ab, -conj(X_ba))`:
///
/// ```text
/// [[0,    -i g,              -i g            ],
///  [-i g, -gamma/2 + i dE_a,  0              ],
///  [-i g,  0,                -gamma/2 - i dE_b]]
/// ```
///
/// Its characteristic polynomial `det(l I - M)` is [`char_poly`].
pub fn block_matrix(de_a: f64, de_b: f64, reservoir: &ReservoirSpec) -> Matrix3<C64> {
    let mig = C64::new(0.0, -reservoir.g);
    let zero = C64::new(0.0, 0.0);
    let hg = -0.5 * reservoir.gamma;
    Matrix3::new(
        zero, mig, mig,
        mig, C64::new(hg, de_a), zero,
        mig, zero, C64::new(hg, -de_b),
    )
}

/// Generator of `(psi_a, chi_a)` for the ground-excited coherence equation
/// `psi_a' = -int_0^t G(t - s) e^{i E_a (t - s)} psi_a(s) ds`.
pub fn coherence_matrix(de_a: f64, reservoir: &ReservoirSpec) -> Matrix2<C64> {
    let mig = C64::new(0.0, -reservoir.g);
    Matrix2::new(C64::new(0.0, 0.0), mig, mig, C64::new(-0.5 * reservoir.gamma, de_a))
}

/// Coefficients of
/// `f_ab(l) = l^3 + (gamma + i(dE_b - dE_a)) l^2
///   + ((gamma/2)^2 + i gamma/2 (dE_b - dE_a) + 2g^2 + dE_a dE_b) l
///   + g^2 (gamma + i(dE_b - dE_a))`.
pub fn char_poly(de_a: f64, de_b: f64, reservoir: &ReservoirSpec) -> CubicCoefficients {
    let gamma = reservoir.gamma;
    let g2 = reservoir.g * reservoir.g;
    let diff = de_b - de_a;
    let a1 = C64::new(gamma, diff);
    let a2 = C64::new(0.25 * gamma * gamma + 2.0 * g2 + de_a * de_b, 0.5 * gamma * diff);
    let a3 = a1 * g2;
    CubicCoefficients::new(a1, a2, a3)
}

/// `min |Re l|` over the roots of `f_ab`.
pub fn born_block_rate(de_a: f64, de_b: f64, reservoir: &ReservoirSpec) -> f64 {
    let roots = solve_cubic(&char_poly(de_a, de_b, reservoir));
    if let Some(r) = roots.iter().find(|r| r.re > POSITIVE_ROOT_TOL) {
        log::warn!("Born root with positive real part {r} at dE = ({de_a}, {de_b})");
    }
    roots.iter().map(|r| r.re.abs()).fold(f64::INFINITY, f64::min)
}

/// Born population and decoherence rates. The excited-ground rates are the
/// exact ones, since both solve the same equation for `psi_I`.
pub fn born_rates(basis: &GlobalBasis, reservoir: &ReservoirSpec) -> RateTable {
    let n = basis.n();
    let d = &basis.detunings;
    let mut eta_alphabeta = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let r = born_block_rate(d[a], d[b], reservoir);
            eta_alphabeta[(a, b)] = r;
            eta_alphabeta[(b, a)] = r;
        }
    }
    let eta_alpha = (0..n).map(|a| eta_alphabeta[(a, a)]).collect();
    let eta_alpha0 = d.iter().map(|&x| (-block_eigenvalues(x, reservoir).plus.re).max(0.0)).collect();
    RateTable { method: Method::Born, eta_alpha, eta_alpha0, eta_alphabeta }
}

/// Born-approximation `rho_SI(t)` in the global basis.
///
/// `psi_I` comes from the exact propagator; each `sigma_ab` with `a <= b` is
/// the first component of `exp(M_ab t) (sigma_ab(0), 0, 0)` and the lower
/// triangle is filled by conjugation, so the output is Hermitian by
/// construction. Positivity is not guaranteed.
pub fn evolve_born(
    state: &InitialState,
    basis: &GlobalBasis,
    reservoir: &ReservoirSpec,
    times: &[f64],
) -> Result<Trajectory> {
    check_time_grid(times)?;
    let n = basis.n();
    let psi_g0 = basis.to_global(&state.psi);
    let sigma0 = &psi_g0 * psi_g0.adjoint();
    let blocks: Vec<(usize, usize, Matrix3<C64>)> = (0..n)
        .flat_map(|a| (a..n).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, block_matrix(basis.detunings[a], basis.detunings[b], reservoir)))
        .collect();

    let coherence: Vec<Matrix2<C64>> = basis.detunings.iter().map(|&d| coherence_matrix(d, reservoir)).collect();

    let mut psi_out = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let psi = DVector::from_fn(n, |a, _| {
            ((coherence[a] * C64::new(t, 0.0)).exp() * Vector2::new(psi_g0[a], C64::new(0.0, 0.0)))[0]
        });
        let mut sigma = DMatrix::zeros(n, n);
        for (a, b, m) in &blocks {
            let v = (m * C64::new(t, 0.0)).exp() * Vector3::new(sigma0[(*a, *b)], C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            sigma[(*a, *b)] = v[0];
            sigma[(*b, *a)] = v[0].conj();
        }
        for a in 0..n {
            sigma[(a, a)].im = 0.0;
        }
        let rho00 = 1.0 - (0..n).map(|a| sigma[(a, a)].re).sum::<f64>();
        states.push(ReducedState::assemble(state.psi0, &psi, &sigma, rho00, Basis::Global, Picture::Interaction));
        psi_out.push(psi);
    }
    Ok(Trajectory { method: Method::Born, times: times.to_vec(), psi: psi_out, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::root_set_distance;
    use crate::model::{diagonalize, SystemSpec};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn res(g: f64, gamma: f64) -> ReservoirSpec {
        ReservoirSpec::new(g, gamma, 0.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// det(l I - M) expanded by cofactors, independent of `char_poly`.
    fn char_poly_from_matrix(m: &Matrix3<C64>) -> CubicCoefficients {
        let tr = m.trace();
        let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
            + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
            + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
        CubicCoefficients::new(-tr, minors, -m.determinant())
    }

    #[test]
    fn resonant_polynomials() {
        let cc = char_poly(0.0, 0.0, &res(1.0, 2.0));
        assert_eq!(cc, CubicCoefficients::real(2.0, 3.0, 2.0));
        let cc = char_poly(0.0, 0.0, &res(1.0, 6.0));
        assert_eq!(cc, CubicCoefficients::real(6.0, 11.0, 6.0));
        let cc = char_poly(0.4, 0.4, &res(0.0, 6.0));
        assert_eq!(cc.a3, c(0.0, 0.0));
        assert!(solve_cubic(&cc).iter().any(|r| r.norm() < 1e-14));
    }

    #[test]
    fn diagonal_coefficients_are_real() {
        let cc = char_poly(1.3, 1.3, &res(0.7, 2.2));
        assert!(cc.is_real());
        assert_relative_eq!(cc.a1.re, 2.2);
        assert_relative_eq!(cc.a2.re, 1.1 * 1.1 + 2.0 * 0.49 + 1.69, epsilon = 1e-14);
        assert_relative_eq!(cc.a3.re, 0.49 * 2.2, epsilon = 1e-14);
    }

    #[test]
    fn rates_from_cubic() {
        let b = GlobalBasis::from_detunings(&[0.0], &res(1.0, 2.0));
        assert_relative_eq!(born_rates(&b, &res(1.0, 2.0)).eta_alpha[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(born_rates(&b, &res(1.0, 6.0)).eta_alpha[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(born_rates(&b, &res(0.0, 6.0)).eta_alpha[0], 0.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn char_poly_matches_matrix(de_a in -4.0..4.0f64, de_b in -4.0..4.0f64, g in 0.0..3.0f64, gamma in 0.01..8.0f64) {
            let r = res(g, gamma);
            let want = char_poly_from_matrix(&block_matrix(de_a, de_b, &r));
            let got = char_poly(de_a, de_b, &r);
            let scale = 1.0 + got.a2.norm() + got.a3.norm();
            prop_assert!((got.a1 - want.a1).norm() <= 1e-12 * scale);
            prop_assert!((got.a2 - want.a2).norm() <= 1e-12 * scale);
            prop_assert!((got.a3 - want.a3).norm() <= 1e-12 * scale);
        }

        #[test]
        fn population_roots_are_stable(de in -4.0..4.0f64, g in 0.01..3.0f64, gamma in 0.01..8.0f64) {
            let cc = char_poly(de, de, &res(g, gamma));
            let (a1, a2, a3) = (cc.a1.re, cc.a2.re, cc.a3.re);
            prop_assert!(a1 * a2 > a3 && a3 > 0.0);
            for root in solve_cubic(&cc) {
                prop_assert!(root.re < 0.0);
            }
        }

        #[test]
        fn transposed_block_has_conjugate_roots(de_a in -4.0..4.0f64, de_b in -4.0..4.0f64, g in 0.01..3.0f64, gamma in 0.01..8.0f64) {
            let r = res(g, gamma);
            let ab = solve_cubic(&char_poly(de_a, de_b, &r));
            let ba = solve_cubic(&char_poly(de_b, de_a, &r));
            let conj = [ba[0].conj(), ba[1].conj(), ba[2].conj()];
            prop_assert!(root_set_distance(&ab, &conj) < 1e-9);
            prop_assert!((born_block_rate(de_a, de_b, &r) - born_block_rate(de_b, de_a, &r)).abs() < 1e-9);
        }
    }

    fn sample_state() -> (InitialState, GlobalBasis, ReservoirSpec) {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(-0.8, 0.0)]);
        let spec = SystemSpec::new(h).unwrap();
        let r = ReservoirSpec::new(0.9, 1.4, 0.1).unwrap();
        let basis = diagonalize(&spec, &r);
        let psi = DVector::from_vec(vec![c(0.5, 0.2), c(-0.3, 0.6)]);
        (InitialState::normalized(c(0.4, -0.1), psi).unwrap(), basis, r)
    }

    #[test]
    fn initial_projector_and_invariants() {
        let (state, basis, r) = sample_state();
        let times: Vec<f64> = (0..30).map(|k| 0.25 * k as f64).collect();
        let tr = evolve_born(&state, &basis, &r, &times).unwrap();
        let psi_g = basis.to_global(&state.psi);
        let p0 = ReducedState::pure_excited(state.psi0, &psi_g, Basis::Global, Picture::Interaction);
        assert!((&tr.states[0].matrix - &p0.matrix).norm() < 1e-15);
        for s in &tr.states {
            assert!(s.hermiticity_defect() < 1e-15);
            assert!((s.trace() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn shares_coherences_with_exact() {
        let (state, basis, r) = sample_state();
        let times = [0.0, 0.3, 1.0, 4.0];
        let b = evolve_born(&state, &basis, &r, &times).unwrap();
        let e = crate::exact::evolve_exact(&state, &basis, &r, &times).unwrap();
        for (x, y) in b.psi.iter().zip(&e.psi) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn decays_to_ground() {
        let (state, basis, r) = sample_state();
        let slow = born_rates(&basis, &r).eta_alphabeta.iter().copied().fold(f64::INFINITY, f64::min);
        let tr = evolve_born(&state, &basis, &r, &[80.0 / slow]).unwrap();
        let s = &tr.states[0];
        assert!(s.sigma().norm() < 1e-5);
        assert!((s.rho00() - 1.0).abs() < 1e-5);
    }
}
