//! Reduced density matrices and time series of them.

use nalgebra::{DMatrix, DVector};

use crate::model::{GlobalBasis, C64};
use crate::rates::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Interaction,
    Schroedinger,
}

/// `(N+1) x (N+1)` reduced density matrix. Index 0 is the ground state,
/// indices `1..=N` are excited levels in the tagged basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub matrix: DMatrix<C64>,
    pub basis: Basis,
    pub picture: Picture,
}

impl ReducedState {
    /// Assembles `rho00 |0><0| + psi0 |0><psi| + conj(psi0) |psi><0| + 0 (+) sigma`.
    pub fn assemble(
        psi0: C64,
        psi: &DVector<C64>,
        sigma: &DMatrix<C64>,
        rho00: f64,
        basis: Basis,
        picture: Picture,
    ) -> Self {
        let n = psi.len();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m[(0, 0)] = C64::new(rho00, 0.0);
        for a in 0..n {
            m[(0, a + 1)] = psi0 * psi[a].conj();
            m[(a + 1, 0)] = psi0.conj() * psi[a];
        }
        m.view_mut((1, 1), (n, n)).copy_from(sigma);
        Self { matrix: m, basis, picture }
    }

    /// State whose excited block is the projector `|psi><psi|`.
    pub fn pure_excited(psi0: C64, psi: &DVector<C64>, basis: Basis, picture: Picture) -> Self {
        let sigma = psi * psi.adjoint();
        Self::assemble(psi0, psi, &sigma, 1.0 - psi.norm_squared(), basis, picture)
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn rho00(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    /// Excited block `sigma`.
    pub fn sigma(&self) -> DMatrix<C64> {
        let n = self.n();
        self.matrix.view((1, 1), (n, n)).into_owned()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Distance of the excited block from the nearest rank-one matrix,
    /// measured as `|sigma - s s^dagger|` with `s` the dominant eigenvector.
    pub fn excited_rank_one_defect(&self) -> f64 {
        let sigma = self.sigma();
        let h = (&sigma + sigma.adjoint()).scale(0.5);
        let eig = h.symmetric_eigen();
        let k = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(k).into_owned();
        let lead = v.clone() * v.adjoint() * C64::new(eig.eigenvalues[k], 0.0);
        (sigma - lead).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Rotates a global interaction-picture state at time `t` into the
    /// Schroedinger picture, keeping the global basis.
    pub fn to_schroedinger(&self, basis: &GlobalBasis, t: f64) -> Self {
        assert_eq!(self.picture, Picture::Interaction);
        assert_eq!(self.basis, Basis::Global);
        let n = self.n();
        let mut phases = DVector::from_element(n + 1, C64::new(1.0, 0.0));
        for a in 0..n {
            phases[a + 1] = C64::new(0.0, -basis.energies[a] * t).exp();
        }
        let mut m = self.matrix.clone();
        for i in 0..=n {
            for j in 0..=n {
                m[(i, j)] *= phases[i] * phases[j].conj();
            }
        }
        Self { matrix: m, basis: Basis::Global, picture: Picture::Schroedinger }
    }

    /// Re-expresses a global-basis state in the local basis.
    pub fn to_local(&self, basis: &GlobalBasis) -> Self {
        assert_eq!(self.basis, Basis::Global);
        let n = self.n();
        let mut w = DMatrix::zeros(n + 1, n + 1);
        w[(0, 0)] = C64::new(1.0, 0.0);
        w.view_mut((1, 1), (n, n)).copy_from(&basis.unitary);
        Self { matrix: &w * &self.matrix * w.adjoint(), basis: Basis::Local, picture: self.picture }
    }
}

/// Output of an evolution routine: times, global interaction-picture
/// amplitudes `psi_alpha(t)`, and the assembled reduced states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub method: Method,
    pub times: Vec<f64>,
    pub psi: Vec<DVector<C64>>,
    pub states: Vec<ReducedState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
