//! Parameter records for the system, its reservoirs and the initial state.
//!
//! The excited-subspace Hamiltonian `h_s` is given in the local basis. Every
//! excited level couples to its own reservoir; all reservoirs share the same
//! Lorentzian correlation function
//!
//! ```text
//! G(t) = g^2 exp(-gamma t / 2 - i eps t),    J(w) = gamma g^2 / ((gamma/2)^2 + (w - eps)^2)
//! ```
//!
//! Energies are plain floats with hbar = 1; only ratios such as `dE / g` and
//! `gamma / g` matter for the classification layer.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

/// Excited-subspace Hamiltonian `H_S` in the local basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    h_s: DMatrix<C64>,
}

impl SystemSpec {
    pub fn new(h_s: DMatrix<C64>) -> Result<Self> {
        let n = h_s.nrows();
        if n == 0 {
            return Err(Error::Dimension("h_s must have at least one level".into()));
        }
        if h_s.ncols() != n {
            return Err(Error::Dimension(format!("h_s is {}x{}, expected square", n, h_s.ncols())));
        }
        if h_s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("h_s contains non-finite entries".into()));
        }
        let scale = h_s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = (0, 0, 0.0);
        for i in 0..n {
            for j in i..n {
                let d = (h_s[(i, j)] - h_s[(j, i)].conj()).norm();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        if worst.2 > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { row: worst.0, col: worst.1, defect: worst.2 });
        }
        // Symmetrize away the sub-tolerance round-off.
        let h_s = (&h_s + h_s.adjoint()).scale(0.5);
        Ok(Self { h_s })
    }

    /// Diagonal (already global) Hamiltonian with the given level energies.
    pub fn diagonal(energies: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(energies.len(), energies.iter().map(|&e| C64::new(e, 0.0)));
        Self::new(DMatrix::from_diagonal(&v))
    }

    pub fn n(&self) -> usize {
        self.h_s.nrows()
    }

    pub fn h_s(&self) -> &DMatrix<C64> {
        &self.h_s
    }
}

/// Lorentzian reservoir: coupling `g`, width `gamma`, peak center `eps`.
///
/// `g = 0` is accepted so the decoupled limit can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirSpec {
    pub g: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl ReservoirSpec {
    pub fn new(g: f64, gamma: f64, eps: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::Reservoir(format!("coupling g must be finite and >= 0, got {g}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Reservoir(format!("width gamma must be finite and > 0, got {gamma}")));
        }
        if !eps.is_finite() {
            return Err(Error::Reservoir(format!("peak center eps must be finite, got {eps}")));
        }
        Ok(Self { g, gamma, eps })
    }

    /// Reservoir correlation function `G(t)` for `t >= 0`.
    pub fn correlation(&self, t: f64) -> C64 {
        let g2 = self.g * self.g;
        C64::new(-0.5 * self.gamma * t, -self.eps * t).exp() * g2
    }

    /// Lorentzian spectral density `J(omega)`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let hw = 0.5 * self.gamma;
        let d = omega - self.eps;
        self.gamma * self.g * self.g / (hw * hw + d * d)
    }
}

/// Initial amplitudes: ground `psi0` and excited vector `psi` (local basis).
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub psi0: C64,
    pub psi: DVector<C64>,
}

impl InitialState {
    pub fn new(psi0: C64, psi: DVector<C64>) -> Result<Self> {
        let norm2 = psi0.norm_sqr() + psi.norm_squared();
        if !((norm2 - 1.0).abs() <= NORM_TOL) {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { psi0, psi })
    }

    /// Normalizes arbitrary amplitudes; fails only on the zero vector.
    pub fn normalized(psi0: C64, psi: DVector<C64>) -> Result<Self> {
        let norm = (psi0.norm_sqr() + psi.norm_squared()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(psi0 / norm, psi.unscale(norm))
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }
}

/// Eigendecomposition of `H_S` (the global basis) plus detunings from the
/// Lorentzian peak. Columns of `unitary` are the eigenvectors, so
/// `|i> = sum_alpha U[i][alpha] |alpha>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBasis {
    pub energies: Vec<f64>,
    pub unitary: DMatrix<C64>,
    pub detunings: Vec<f64>,
}

impl GlobalBasis {
    pub fn n(&self) -> usize {
        self.energies.len()
    }

    /// Basis whose eigenvectors are the local levels; used when only the
    /// detunings matter.
    pub fn from_detunings(detunings: &[f64], reservoir: &ReservoirSpec) -> Self {
        let n = detunings.len();
        Self {
            energies: detunings.iter().map(|d| d + reservoir.eps).collect(),
            unitary: DMatrix::identity(n, n),
            detunings: detunings.to_vec(),
        }
    }

    /// Components of a local-basis vector in the global basis (`U^dagger v`).
    pub fn to_global(&self, v: &DVector<C64>) -> DVector<C64> {
        self.unitary.ad_mul(v)
    }

    pub fn to_local(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.unitary * v
    }

    /// `U diag(E) U^dagger`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let d = DVector::from_iterator(self.n(), self.energies.iter().map(|&e| C64::new(e, 0.0)));
        &self.unitary * DMatrix::from_diagonal(&d) * self.unitary.adjoint()
    }
}

/// Diagonalizes `H_S`. Eigenvalues ascend; inside a degenerate cluster the
/// vectors are ordered by the index of their largest-magnitude component.
/// Each eigenvector is phased so that this component is real and positive.
pub fn diagonalize(spec: &SystemSpec, reservoir: &ReservoirSpec) -> GlobalBasis {
    let n = spec.n();
    let eig = spec.h_s().clone().symmetric_eigen();
    let scale = spec.h_s().iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut columns: Vec<(f64, usize, DVector<C64>)> = (0..n)
        .map(|k| {
            let mut v: DVector<C64> = eig.eigenvectors.column(k).into_owned();
            let pivot = pivot_index(&v);
            let phase = v[pivot].conj() / v[pivot].norm();
            v *= phase;
            v[pivot] = C64::new(v[pivot].re, 0.0);
            (eig.eigenvalues[k], pivot, v)
        })
        .collect();
    columns.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Re-sort each cluster of degenerate eigenvalues by pivot index.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (columns[end].0 - columns[end - 1].0).abs() < DEGENERACY_TOL * scale {
            end += 1;
        }
        columns[start..end].sort_by_key(|c| c.1);
        start = end;
    }

    let energies: Vec<f64> = columns.iter().map(|c| c.0).collect();
    let mut unitary = DMatrix::zeros(n, n);
    for (k, c) in columns.iter().enumerate() {
        unitary.set_column(k, &c.2);
    }
    let detunings = energies.iter().map(|e| e - reservoir.eps).collect();
    GlobalBasis { energies, unitary, detunings }
}

/// First index whose magnitude is maximal up to round-off.
fn pivot_index(v: &DVector<C64>) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter().position(|z| z.norm() >= max * (1.0 - 1e-8)).unwrap_or(0)
}
