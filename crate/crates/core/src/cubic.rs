//! Roots of monic cubics `l^3 + a1 l^2 + a2 l + a3` with complex coefficients.
//!
//! The closed form (trigonometric for real coefficients with three real
//! roots, Cardano otherwise) is refined by Weierstrass iterations; the
//! companion-matrix eigenvalues give an independent second route.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::model::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub a1: C64,
    pub a2: C64,
    pub a3: C64,
}

impl CubicCoefficients {
    pub fn new(a1: C64, a2: C64, a3: C64) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn real(a1: f64, a2: f64, a3: f64) -> Self {
        Self::new(C64::new(a1, 0.0), C64::new(a2, 0.0), C64::new(a3, 0.0))
    }

    pub fn is_real(&self) -> bool {
        self.a1.im == 0.0 && self.a2.im == 0.0 && self.a3.im == 0.0
    }

    pub fn eval(&self, l: C64) -> C64 {
        ((l + self.a1) * l + self.a2) * l + self.a3
    }

    /// Companion matrix whose characteristic polynomial is this cubic.
    pub fn companion(&self) -> Matrix3<C64> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        Matrix3::new(-self.a1, -self.a2, -self.a3, one, zero, zero, zero, one, zero)
    }
}

/// Closed-form roots, sorted by descending real part (then imaginary part).
pub fn solve_cubic(c: &CubicCoefficients) -> [C64; 3] {
    let mut roots = if c.is_real() {
        real_closed_form(c.a1.re, c.a2.re, c.a3.re)
    } else {
        complex_closed_form(c)
    };
    polish(c, &mut roots);
    sort_roots(&mut roots);
    roots
}

/// Roots from the eigenvalues of the companion matrix, sorted like
/// [`solve_cubic`].
pub fn companion_roots(c: &CubicCoefficients) -> [C64; 3] {
    let ev = c
        .companion()
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    let mut roots = [ev[0], ev[1], ev[2]];
    sort_roots(&mut roots);
    roots
}

/// Largest distance between two root sets under the best pairing.
pub fn root_set_distance(a: &[C64; 3], b: &[C64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn sort_roots(roots: &mut [C64; 3]) {
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
}

fn real_closed_form(a1: f64, a2: f64, a3: f64) -> [C64; 3] {
    let shift = -a1 / 3.0;
    let p = a2 - a1 * a1 / 3.0;
    let q = 2.0 * a1.powi(3) / 27.0 - a1 * a2 / 3.0 + a3;
    if p == 0.0 && q == 0.0 {
        return [C64::new(shift, 0.0); 3];
    }
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc < 0.0 {
        // Three distinct real roots; p < 0 here.
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut out = [C64::new(0.0, 0.0); 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = C64::new(r * (theta - 2.0 * PI * k as f64 / 3.0).cos() + shift, 0.0);
        }
        out
    } else {
        let big = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        let re = -(big + small) / 2.0 + shift;
        let im = 3.0f64.sqrt() / 2.0 * (big - small);
        [C64::new(big + small + shift, 0.0), C64::new(re, im), C64::new(re, -im)]
    }
}

fn complex_closed_form(c: &CubicCoefficients) -> [C64; 3] {
    let shift = -c.a1 / 3.0;
    let p = c.a2 - c.a1 * c.a1 / 3.0;
    let q = c.a1 * c.a1 * c.a1 * (2.0 / 27.0) - c.a1 * c.a2 / 3.0 + c.a3;
    let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let w1 = -q / 2.0 + s;
    let w2 = -q / 2.0 - s;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    if w.norm() == 0.0 {
        return [shift; 3];
    }
    let u = C64::from_polar(w.norm().cbrt(), w.arg() / 3.0);
    let v = -p / (3.0 * u);
    let omega = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let omega2 = omega * omega;
    [u + v + shift, omega * u + omega2 * v + shift, omega2 * u + omega * v + shift]
}

/// Simultaneous Weierstrass refinement; a sweep is kept only if it lowers
/// the total residual.
fn polish(c: &CubicCoefficients, roots: &mut [C64; 3]) {
    let residual = |r: &[C64; 3]| r.iter().map(|&l| c.eval(l).norm()).sum::<f64>();
    let mut best = residual(roots);
    for _ in 0..4 {
        if best == 0.0 {
            return;
        }
        let mut next = *roots;
        for i in 0..3 {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() > 0.0 {
                next[i] = roots[i] - c.eval(roots[i]) / denom;
            }
        }
        let r = residual(&next);
        if r.is_finite() && r < best {
            best = r;
            *roots = next;
        } else {
            return;
        }
    }
}
