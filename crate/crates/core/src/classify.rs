//! Where in the `(dE/g, gamma/g)` plane each approximation over- or
//! underestimates the exact decay rates.
//!
//! The ordering of the population rates `(exact, Born, GKSL)` is computed
//! directly from the rate formulas and labelled with the six regions I-VI.
//! The closed-form polynomial criteria `F1..F4` are evaluated alongside and
//! cross-tabulated against the direct labels; they are reported, not trusted.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::born::born_block_rate;
use crate::error::{Error, Result};
use crate::exact::block_eigenvalues;
use crate::model::ReservoirSpec;

/// Relative tolerance below which two rates count as equal.
pub const TIE_TOL: f64 = 1e-9;

/// `sqrt(8)`: resonant crossover of the exact and GKSL rates, in units of `g`.
pub const RESONANT_CROSSOVER: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Scale-free coordinates `u = dE^2/g^2`, `v = gamma^2/g^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub u: f64,
    pub v: f64,
}

impl ReducedParams {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::InvalidArgument(format!("u must be finite and >= 0, got {u}")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("v must be finite and > 0, got {v}")));
        }
        Ok(Self { u, v })
    }

    pub fn from_physical(detuning: f64, reservoir: &ReservoirSpec) -> Result<Self> {
        if reservoir.g <= 0.0 {
            return Err(Error::InvalidArgument("reduced parameters need g > 0".into()));
        }
        let g2 = reservoir.g * reservoir.g;
        Self::new(detuning * detuning / g2, reservoir.gamma * reservoir.gamma / g2)
    }
}

/// Strict orderings of `(exact, Born, GKSL)` population rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    /// exact > GKSL > Born
    I,
    /// exact > Born > GKSL
    II,
    /// GKSL > exact > Born
    III,
    /// Born > exact > GKSL
    IV,
    /// GKSL > Born > exact
    V,
    /// Born > GKSL > exact
    VI,
    /// At least one pair of rates is tied.
    Boundary,
    /// The pairwise relations form a cycle (possible only for predicates).
    Inconsistent,
}

impl Label {
    pub const REGIONS: [Label; 6] = [Label::I, Label::II, Label::III, Label::IV, Label::V, Label::VI];

    /// Label from the three pairwise comparisons `exact ? born`,
    /// `exact ? gksl` and `born ? gksl`.
    pub fn from_pairs(eb: Ordering, ek: Ordering, bk: Ordering) -> Self {
        use Ordering::*;
        match (eb, ek, bk) {
            (Equal, _, _) | (_, Equal, _) | (_, _, Equal) => Label::Boundary,
            (Greater, Greater, Less) => Label::I,
            (Greater, Greater, Greater) => Label::II,
            (Greater, Less, Less) => Label::III,
            (Less, Greater, Greater) => Label::IV,
            (Less, Less, Less) => Label::V,
            (Less, Less, Greater) => Label::VI,
            _ => Label::Inconsistent,
        }
    }

    pub fn is_region(self) -> bool {
        !matches!(self, Label::Boundary | Label::Inconsistent)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::I => "I",
            Label::II => "II",
            Label::III => "III",
            Label::IV => "IV",
            Label::V => "V",
            Label::VI => "VI",
            Label::Boundary => "boundary",
            Label::Inconsistent => "inconsistent",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Neumaier-compensated sum; also returns the sum of magnitudes, which
/// bounds the rounding error of the result.
fn compensated_sum(terms: &[f64]) -> (f64, f64) {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut magnitude = 0.0f64;
    for &x in terms {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
        magnitude += x.abs();
    }
    (sum + comp, magnitude)
}

/// `(coefficient, power of u, power of v)`.
type Monomials = &'static [(f64, i32, i32)];

const F1: Monomials = &[
    (-24576.0, 3, 1),
    (-10240.0, 2, 2),
    (32768.0, 2, 1),
    (-512.0, 1, 3),
    (128.0, 0, 4),
    (-2048.0, 0, 3),
    (8192.0, 0, 2),
];

const F2: Monomials = &[
    (2304.0, 5, 0),
    (6400.0, 4, 1),
    (30720.0, 4, 0),
    (2912.0, 3, 2),
    (40448.0, 3, 1),
    (143104.0, 3, 0),
    (400.0, 2, 3),
    (-10112.0, 2, 2),
    (35264.0, 2, 1),
    (256000.0, 2, 0),
    (9.0, 1, 4),
    (-480.0, 1, 3),
    (9232.0, 1, 2),
    (-67584.0, 1, 1),
    (64512.0, 1, 0),
    (36.0, 0, 3),
    (-1920.0, 0, 2),
    (33984.0, 0, 1),
    (-200704.0, 0, 0),
];

const F3: Monomials = &[
    (256.0, 4, 0),
    (256.0, 3, 1),
    (-256.0, 3, 0),
    (96.0, 2, 2),
    (-704.0, 2, 1),
    (-1024.0, 2, 0),
    (16.0, 1, 3),
    (-304.0, 1, 2),
    (1536.0, 1, 1),
    (1.0, 0, 4),
    (-36.0, 0, 3),
    (448.0, 0, 2),
    (-2048.0, 0, 1),
];

const F4: Monomials = &[(-16.0, 2, 0), (-8.0, 0, 1), (1.0, 0, 2)];

fn monomials(k: u8) -> Result<Monomials> {
    match k {
        1 => Ok(F1),
        2 => Ok(F2),
        3 => Ok(F3),
        4 => Ok(F4),
        _ => Err(Error::InvalidArgument(format!("polynomial index must be 1..=4, got {k}"))),
    }
}

fn eval_with_bound(k: u8, u: f64, v: f64) -> Result<(f64, f64)> {
    let terms: Vec<f64> = monomials(k)?.iter().map(|&(c, i, j)| c * u.powi(i) * v.powi(j)).collect();
    Ok(compensated_sum(&terms))
}

/// Value of `F_k(u, v)`, `k` in `1..=4`.
pub fn poly_f(k: u8, u: f64, v: f64) -> Result<f64> {
    eval_with_bound(k, u, v).map(|(value, _)| value)
}

/// Sign of `F_k(u, v)`, with values inside the rounding bound treated as zero.
pub fn poly_f_sign(k: u8, u: f64, v: f64) -> Result<Ordering> {
    let (value, magnitude) = eval_with_bound(k, u, v)?;
    Ok(if value.abs() <= 1e-12 * magnitude { Ordering::Equal } else { value.total_cmp(&0.0) })
}

/// True iff every root of `l^3 + a1 l^2 + a2 l + a3` has `Re l < x`.
pub fn routh_hurwitz_shifted(a1: f64, a2: f64, a3: f64, x: f64) -> bool {
    let b1 = a1 + 3.0 * x;
    let b2 = a2 + 2.0 * a1 * x + 3.0 * x * x;
    let b3 = a3 + a2 * x + a1 * x * x + x * x * x;
    b1 > 0.0 && b1 * b2 > b3 && b3 > 0.0
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= TIE_TOL * scale {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Rates at one detuning and the orderings derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub eta_exact: f64,
    pub eta_born: f64,
    pub eta_gksl: f64,
    pub eta0_exact: f64,
    pub eta0_gksl: f64,
    pub label: Label,
    /// `(exact ? Born, exact ? GKSL, Born ? GKSL)` for the population rates.
    #[serde(skip)]
    pub pairs: (Ordering, Ordering, Ordering),
    /// `eta0_exact ? eta0_gksl`; Born equals exact here.
    #[serde(skip)]
    pub ground_order: Ordering,
}

pub fn exact_population_rate(detuning: f64, reservoir: &ReservoirSpec) -> f64 {
    (-2.0 * block_eigenvalues(detuning, reservoir).plus.re).max(0.0)
}

pub fn gksl_population_rate(detuning: f64, reservoir: &ReservoirSpec) -> f64 {
    reservoir.spectral_density(detuning + reservoir.eps)
}

pub fn compare_direct(detuning: f64, reservoir: &ReservoirSpec) -> Comparison {
    let eta_exact = exact_population_rate(detuning, reservoir);
    let eta_born = born_block_rate(detuning, detuning, reservoir);
    let eta_gksl = gksl_population_rate(detuning, reservoir);
    let pairs = (cmp_tol(eta_exact, eta_born), cmp_tol(eta_exact, eta_gksl), cmp_tol(eta_born, eta_gksl));
    let label = Label::from_pairs(pairs.0, pairs.1, pairs.2);
    Comparison {
        eta_exact,
        eta_born,
        eta_gksl,
        eta0_exact: 0.5 * eta_exact,
        eta0_gksl: 0.5 * eta_gksl,
        label,
        pairs,
        ground_order: cmp_tol(0.5 * eta_exact, 0.5 * eta_gksl),
    }
}

/// Pairwise relations `(exact ? Born, exact ? GKSL, Born ? GKSL)` read off
/// the closed-form sign conditions on `F1..F4`, taken literally.
pub fn predicate_pairs(p: ReducedParams) -> (Ordering, Ordering, Ordering) {
    use Ordering::*;
    let sign = |k| poly_f_sign(k, p.u, p.v).expect("index in range");
    let (f1, f2, f3, f4) = (sign(1), sign(2), sign(3), sign(4));

    // F2 > 0 means exact < Born.
    let eb = f2.reverse();
    let ek = if f1 == Greater || p.v < 8.0 {
        Less
    } else if f1 == Less && p.v > 8.0 {
        Greater
    } else {
        Equal
    };
    let bk = if f3 == Greater && f4 == Greater {
        Less
    } else if f3 == Less || f4 == Less {
        Greater
    } else {
        Equal
    };
    (eb, ek, bk)
}

pub fn predicate_label(p: ReducedParams) -> Label {
    let (eb, ek, bk) = predicate_pairs(p);
    Label::from_pairs(eb, ek, bk)
}

/// Relations from the same polynomials with the GKSL conditions sign-swapped:
/// `exact > GKSL` iff `F1 > 0` and `gamma > sqrt(8) g`, and `Born > GKSL` iff
/// `F3 > 0` and `F4 > 0`. A diagnostic reading, reported next to the
/// printed one.
pub fn swapped_predicate_pairs(p: ReducedParams) -> (Ordering, Ordering, Ordering) {
    use Ordering::*;
    let (eb, _, bk) = predicate_pairs(p);
    let f1 = poly_f_sign(1, p.u, p.v).expect("index in range");
    let ek = if f1 == Greater && p.v > 8.0 {
        Greater
    } else if f1 == Less || p.v < 8.0 {
        Less
    } else {
        Equal
    };
    (eb, ek, bk.reverse())
}

pub fn swapped_predicate_label(p: ReducedParams) -> Label {
    let (eb, ek, bk) = swapped_predicate_pairs(p);
    Label::from_pairs(eb, ek, bk)
}

/// Axes of a `(dE/g, gamma/g)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub de_over_g: Vec<f64>,
    pub gamma_over_g: Vec<f64>,
}

impl Grid {
    /// `n_de` points spanning `[de.0, de.1]` inclusive and `n_gamma` points
    /// spanning `(gamma.0, gamma.1]`, excluding the left end.
    pub fn new(de: (f64, f64), n_de: usize, gamma: (f64, f64), n_gamma: usize) -> Result<Self> {
        if n_de < 2 || n_gamma < 2 {
            return Err(Error::InvalidArgument(format!("grid needs >= 2 points per axis, got {n_de}x{n_gamma}")));
        }
        if !(de.0 < de.1) || !(gamma.0 < gamma.1) || !(gamma.0 >= 0.0) || !de.0.is_finite() || !de.1.is_finite() || !gamma.1.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid grid ranges dE {de:?}, gamma {gamma:?}")));
        }
        let de_over_g = (0..n_de).map(|i| de.0 + (de.1 - de.0) * i as f64 / (n_de - 1) as f64).collect();
        let gamma_over_g = (1..=n_gamma).map(|k| gamma.0 + (gamma.1 - gamma.0) * k as f64 / n_gamma as f64).collect();
        Ok(Self { de_over_g, gamma_over_g })
    }

    pub fn len(&self) -> usize {
        self.de_over_g.len() * self.gamma_over_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell coordinates in row-major order: one row per `gamma/g`, `dE/g`
    /// varying fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.gamma_over_g
            .iter()
            .flat_map(|&y| self.de_over_g.iter().map(move |&x| (x, y)))
            .collect()
    }
}

impl Default for Grid {
    /// `dE/g` in `[-3, 3]` with step 0.1, `gamma/g` in `(0, 8]` with step 0.1.
    fn default() -> Self {
        Self::new((-3.0, 3.0), 61, (0.0, 8.0), 80).expect("valid default grid")
    }
}

fn unit_reservoir(gamma_over_g: f64) -> ReservoirSpec {
    ReservoirSpec { g: 1.0, gamma: gamma_over_g, eps: 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCell {
    pub de_over_g: f64,
    pub gamma_over_g: f64,
    pub eta_exact: f64,
    pub eta_born: f64,
    pub eta_gksl: f64,
    pub direct: Label,
    pub predicate: Label,
    pub agree: bool,
    /// Pairwise relations `(exact ? Born, exact ? GKSL, Born ? GKSL)`, direct.
    #[serde(skip)]
    pub direct_pairs: (Ordering, Ordering, Ordering),
    /// Same relations from the printed predicates.
    #[serde(skip)]
    pub predicate_pairs: (Ordering, Ordering, Ordering),
    /// [`swapped_predicate_label`] for this cell.
    pub swapped_predicate: Label,
}

pub fn classify_cell(de_over_g: f64, gamma_over_g: f64) -> RegionCell {
    let c = compare_direct(de_over_g, &unit_reservoir(gamma_over_g));
    let params = ReducedParams { u: de_over_g * de_over_g, v: gamma_over_g * gamma_over_g };
    let predicate = predicate_label(params);
    RegionCell {
        de_over_g,
        gamma_over_g,
        eta_exact: c.eta_exact,
        eta_born: c.eta_born,
        eta_gksl: c.eta_gksl,
        direct: c.label,
        predicate,
        agree: c.label == predicate,
        direct_pairs: c.pairs,
        predicate_pairs: predicate_pairs(params),
        swapped_predicate: swapped_predicate_label(params),
    }
}

/// Classifies every cell of `grid`, in parallel, in row-major order.
pub fn region_map(grid: &Grid) -> Vec<RegionCell> {
    grid.points().into_par_iter().map(|(x, y)| classify_cell(x, y)).collect()
}

/// Cross-tabulation of predicate labels against direct labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub cells: usize,
    /// Cells whose direct label is a region (boundaries excluded).
    pub classified: usize,
    pub agree: usize,
    pub disagree: usize,
    pub predicate_boundary: usize,
    pub predicate_inconsistent: usize,
    /// Cells where each printed relation (`exact ? Born`, `exact ? GKSL`,
    /// `Born ? GKSL`) matches the direct one, boundaries included.
    pub relation_agree: [usize; 3],
    /// Classified cells whose [`swapped_predicate_label`] matches `direct`.
    pub swapped_agree: usize,
    /// `(direct, predicate, count)` for every disagreeing combination.
    pub confusion: Vec<(Label, Label, usize)>,
}

impl DiscrepancyReport {
    pub fn from_cells(cells: &[RegionCell]) -> Self {
        let mut confusion = std::collections::BTreeMap::new();
        let mut report = Self {
            cells: cells.len(),
            classified: 0,
            agree: 0,
            disagree: 0,
            predicate_boundary: 0,
            predicate_inconsistent: 0,
            relation_agree: [0; 3],
            swapped_agree: 0,
            confusion: Vec::new(),
        };
        for c in cells {
            let (d, p) = (c.direct_pairs, c.predicate_pairs);
            for (k, same) in [d.0 == p.0, d.1 == p.1, d.2 == p.2].into_iter().enumerate() {
                report.relation_agree[k] += usize::from(same);
            }
            match c.predicate {
                Label::Boundary => report.predicate_boundary += 1,
                Label::Inconsistent => report.predicate_inconsistent += 1,
                _ => {}
            }
            if !c.direct.is_region() {
                continue;
            }
            report.classified += 1;
            report.swapped_agree += usize::from(c.swapped_predicate == c.direct);
            if c.agree {
                report.agree += 1;
            } else {
                report.disagree += 1;
                *confusion.entry((c.direct, c.predicate)).or_insert(0) += 1;
            }
        }
        report.confusion = confusion.into_iter().map(|((d, p), n)| (d, p, n)).collect();
        report
    }
}

/// Rate pair compared by [`closeness_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessPair {
    ExactBorn,
    ExactGksl,
}

impl ClosenessPair {
    pub fn as_str(self) -> &'static str {
        match self {
            ClosenessPair::ExactBorn => "exact-vs-born",
            ClosenessPair::ExactGksl => "exact-vs-gksl",
        }
    }
}

/// `|eta_exact - eta_other| < tolerance * eta_exact` per cell, row-major.
pub fn closeness_map(grid: &Grid, tolerance: f64, pair: ClosenessPair) -> Result<Vec<bool>> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tolerance}")));
    }
    Ok(grid
        .points()
        .into_par_iter()
        .map(|(x, y)| {
            let r = unit_reservoir(y);
            let exact = exact_population_rate(x, &r);
            let other = match pair {
                ClosenessPair::ExactBorn => born_block_rate(x, x, &r),
                ClosenessPair::ExactGksl => gksl_population_rate(x, &r),
            };
            (exact - other).abs() < tolerance * exact
        })
        .collect())
}

/// A point where all three population rates coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriplePoint {
    pub de_over_g: f64,
    pub gamma_over_g: f64,
    pub eta_exact: f64,
    pub eta_born: f64,
    pub eta_gksl: f64,
}

fn triple_residual(x: f64, y: f64) -> [f64; 2] {
    let r = unit_reservoir(y);
    let e = exact_population_rate(x, &r);
    let b = born_block_rate(x, x, &r);
    let k = gksl_population_rate(x, &r);
    [(e - b) / e, (e - k) / e]
}

/// The two mirror points `(+-dE/g, gamma/g)` where exact, Born and GKSL
/// population rates agree, by damped Newton iteration from `(0.55, 3.55)`.
/// The returned rates are for coupling `g`.
pub fn triple_point(g: f64) -> Result<[TriplePoint; 2]> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidArgument(format!("g must be > 0, got {g}")));
    }
    const H: f64 = 1e-6;
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let (mut x, mut y) = (0.55, 3.55);
    let mut r = triple_residual(x, y);
    for _ in 0..100 {
        if norm(r) < 1e-14 {
            break;
        }
        let rx = triple_residual(x + H, y);
        let ry = triple_residual(x, y + H);
        let j = [[(rx[0] - r[0]) / H, (ry[0] - r[0]) / H], [(rx[1] - r[1]) / H, (ry[1] - r[1]) / H]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence(format!("singular Jacobian at ({x}, {y})")));
        }
        let dx = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dy = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut step = 1.0;
        loop {
            let (nx, ny) = (x - step * dx, y - step * dy);
            let nr = if ny > 0.0 { triple_residual(nx, ny) } else { [f64::INFINITY; 2] };
            if norm(nr) < norm(r) {
                (x, y, r) = (nx, ny, nr);
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                break;
            }
        }
        if step < 1e-10 {
            break;
        }
    }
    if !(norm(r) < 1e-10) {
        return Err(Error::NoConvergence(format!("triple point residual {:e} at ({x}, {y})", norm(r))));
    }
    let r = ReservoirSpec { g, gamma: y * g, eps: 0.0 };
    let de = x.abs() * g;
    let point = |sign: f64| TriplePoint {
        de_over_g: sign * x.abs(),
        gamma_over_g: y,
        eta_exact: exact_population_rate(de, &r),
        eta_born: born_block_rate(de, de, &r),
        eta_gksl: gksl_population_rate(de, &r),
    };
    Ok([point(1.0), point(-1.0)])
}

/// Outcome of the simple sufficient criteria for `exact ? Born`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ExactBelowBorn,
    ExactAboveBorn,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExactBelowBorn => "exact < born",
            Verdict::ExactAboveBorn => "exact > born",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// `sqrt((-4 + cbrt(44 - 3 sqrt(177)) + cbrt(44 + 3 sqrt(177))) / 3)`,
/// about 0.81: beyond this `|dE|/g` the exact population rate is below Born.
pub fn detuning_threshold() -> f64 {
    let s = 3.0 * 177.0f64.sqrt();
    ((-4.0 + (44.0 - s).cbrt() + (44.0 + s).cbrt()) / 3.0).sqrt()
}

pub fn sufficient_conditions(detuning: f64, reservoir: &ReservoirSpec) -> Verdict {
    let g = reservoir.g;
    let gamma = reservoir.gamma;
    if gamma > (64.0f64 / 3.0).sqrt() * g || detuning.abs() > detuning_threshold() * g {
        return Verdict::ExactBelowBorn;
    }
    let radicand = 2.0 * g * g - 4.0 * detuning * detuning;
    if radicand >= 0.0 && gamma <= 3.0 * radicand.sqrt() {
        Verdict::ExactAboveBorn
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::{solve_cubic, CubicCoefficients};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn res(g: f64, gamma: f64) -> ReservoirSpec {
        ReservoirSpec::new(g, gamma, 0.0).unwrap()
    }

    #[test]
    fn polynomial_values() {
        assert_eq!(poly_f(1, 0.0, 8.0).unwrap(), 0.0);
        assert_eq!(poly_f(4, 0.0, 4.0).unwrap(), -16.0);
        assert_eq!(poly_f(2, 0.0, 36.0).unwrap(), 214016.0);
        assert!(poly_f(0, 1.0, 1.0).is_err());
        assert!(poly_f(5, 1.0, 1.0).is_err());
        assert_eq!(poly_f_sign(1, 0.0, 8.0).unwrap(), Ordering::Equal);
    }

    #[test]
    fn resonant_factorizations() {
        for &v in &[0.5, 3.0, 8.0, 21.0, 22.0, 50.0] {
            assert_relative_eq!(poly_f(1, 0.0, v).unwrap(), 128.0 * v * v * (v - 8.0).powi(2), max_relative = 1e-14);
            let f2 = 4.0 * (3.0 * v - 64.0) * (3.0 * v * v - 96.0 * v + 784.0);
            assert_relative_eq!(poly_f(2, 0.0, v).unwrap(), f2, max_relative = 1e-12);
        }
        assert_eq!(poly_f_sign(2, 0.0, 21.3).unwrap(), Ordering::Less);
        assert_eq!(poly_f_sign(2, 0.0, 21.4).unwrap(), Ordering::Greater);
    }

    #[test]
    fn shifted_routh_hurwitz_examples() {
        assert!(routh_hurwitz_shifted(3.0, 3.0, 1.0, -0.5));
        assert!(!routh_hurwitz_shifted(3.0, 3.0, 1.0, -1.0));
        assert!(!routh_hurwitz_shifted(3.0, 3.0, 1.0, -1.5));
    }

    #[test]
    fn shifted_routh_hurwitz_matches_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 10_000 {
            let (a1, a2, a3, x) = (
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
                rng.random_range(-3.0..3.0),
            );
            let roots = solve_cubic(&CubicCoefficients::real(a1, a2, a3));
            if roots.iter().any(|r| (r.re - x).abs() <= 1e-8) {
                continue;
            }
            let inside = roots.iter().all(|r| r.re < x);
            assert_eq!(routh_hurwitz_shifted(a1, a2, a3, x), inside, "{a1} {a2} {a3} {x}: {roots:?}");
            checked += 1;
        }
    }

    #[test]
    fn label_table() {
        use Ordering::*;
        assert_eq!(Label::from_pairs(Greater, Greater, Less), Label::I);
        assert_eq!(Label::from_pairs(Less, Less, Greater), Label::VI);
        assert_eq!(Label::from_pairs(Greater, Less, Greater), Label::Inconsistent);
        assert_eq!(Label::from_pairs(Equal, Less, Greater), Label::Boundary);
    }

    #[test]
    fn direct_examples() {
        let c = compare_direct(0.0, &res(1.0, 1.0));
        assert_relative_eq!(c.eta_gksl, 4.0, epsilon = 1e-14);
        assert_relative_eq!(c.eta_exact, 0.5, epsilon = 1e-14);
        assert_relative_eq!(c.eta_born, 0.25, epsilon = 1e-12);
        assert_eq!(c.label, Label::III);

        let c = compare_direct(0.0, &res(1.0, 6.0));
        assert_relative_eq!(c.eta_born, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.eta_exact, 3.0 - 5.0f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(c.eta_gksl, 2.0 / 3.0, epsilon = 1e-14);
        assert_eq!(c.label, Label::IV);

        let c = compare_direct(2.0, &res(1.0, 1.0));
        assert_relative_eq!(c.eta_gksl, 4.0 / 17.0, epsilon = 1e-14);
        assert_relative_eq!(c.eta_born, 0.163581045, epsilon = 1e-9);
        assert_relative_eq!(c.eta_exact, 0.1437, epsilon = 1e-4);
        assert_eq!(c.label, Label::V);
    }

    #[test]
    fn resonant_crossover() {
        let c = compare_direct(0.0, &res(1.0, RESONANT_CROSSOVER));
        assert!((c.eta0_exact - c.eta0_gksl).abs() < 1e-9 * c.eta0_exact);
        assert_eq!(c.ground_order, Ordering::Equal);
        for k in 1..400 {
            let gamma = 0.02 * k as f64;
            let c = compare_direct(0.0, &res(1.0, gamma));
            let want = cmp_tol(gamma, RESONANT_CROSSOVER);
            assert_eq!(c.ground_order, want, "gamma = {gamma}");
        }
    }

    #[test]
    fn default_grid_axes() {
        let grid = Grid::default();
        assert_eq!(grid.de_over_g.len(), 61);
        assert_eq!(grid.gamma_over_g.len(), 80);
        assert!(grid.de_over_g.contains(&0.0));
        assert!(grid.de_over_g.contains(&2.0));
        assert!(grid.gamma_over_g.contains(&1.0));
        assert!(grid.gamma_over_g.contains(&6.0));
        assert_eq!(grid.gamma_over_g[79], 8.0);
        assert!(Grid::new((-1.0, 1.0), 1, (0.0, 1.0), 4).is_err());
    }

    #[test]
    fn region_map_is_row_major() {
        let grid = Grid::new((-1.0, 1.0), 3, (0.0, 2.0), 2).unwrap();
        let cells = region_map(&grid);
        let coords: Vec<_> = cells.iter().map(|c| (c.de_over_g, c.gamma_over_g)).collect();
        assert_eq!(coords, vec![(-1.0, 1.0), (0.0, 1.0), (1.0, 1.0), (-1.0, 2.0), (0.0, 2.0), (1.0, 2.0)]);
    }

    #[test]
    fn discrepancy_report_counts() {
        let cells = region_map(&Grid::default());
        let report = DiscrepancyReport::from_cells(&cells);
        assert_eq!(report.cells, cells.len());
        assert_eq!(report.agree + report.disagree, report.classified);
        assert_eq!(report.confusion.iter().map(|c| c.2).sum::<usize>(), report.disagree);
        assert!(report.swapped_agree <= report.classified);
        assert!(report.relation_agree.iter().all(|&n| n <= report.cells));
    }

    #[test]
    fn swapped_reading_reproduces_direct_labels() {
        let cells = region_map(&Grid::new((-3.0, 3.0), 121, (0.0, 8.0), 160).unwrap());
        let report = DiscrepancyReport::from_cells(&cells);
        assert_eq!(report.swapped_agree, report.classified);
        assert_eq!(report.relation_agree[0], report.cells);
    }

    #[test]
    fn triple_point_location() {
        let [p, m] = triple_point(1.0).unwrap();
        assert!((p.de_over_g - 0.55).abs() < 0.02 && (p.gamma_over_g - 3.55).abs() < 0.02, "{p:?}");
        assert_eq!(m.de_over_g, -p.de_over_g);
        assert_eq!(m.gamma_over_g, p.gamma_over_g);
        for q in [p, m] {
            assert_relative_eq!(q.eta_exact, q.eta_born, max_relative = 1e-8);
            assert_relative_eq!(q.eta_exact, q.eta_gksl, max_relative = 1e-8);
        }
        let [s, _] = triple_point(2.5).unwrap();
        assert_relative_eq!(s.de_over_g, p.de_over_g, max_relative = 1e-8);
        assert_relative_eq!(s.eta_exact, 2.5 * p.eta_exact, max_relative = 1e-8);
    }

    #[test]
    fn detuning_threshold_value() {
        let c = detuning_threshold();
        assert_relative_eq!(c, 0.81, epsilon = 5e-3);
    }

    #[test]
    fn sufficient_condition_examples() {
        assert_eq!(sufficient_conditions(0.0, &res(1.0, 5.0)), Verdict::ExactBelowBorn);
        assert_eq!(sufficient_conditions(0.0, &res(1.0, 2.0)), Verdict::ExactAboveBorn);
        assert_eq!(sufficient_conditions(1.0, &res(1.0, 4.0)), Verdict::ExactBelowBorn);
        assert_eq!(sufficient_conditions(0.0, &res(1.0, 4.5)), Verdict::Inconclusive);
    }

    #[test]
    fn sufficient_conditions_agree_with_direct() {
        let grid = Grid::new((-3.0, 3.0), 121, (0.0, 8.0), 160).unwrap();
        for (x, y) in grid.points() {
            let r = res(1.0, y);
            let c = compare_direct(x, &r);
            let order = cmp_tol(c.eta_exact, c.eta_born);
            match sufficient_conditions(x, &r) {
                Verdict::ExactBelowBorn => assert_eq!(order, Ordering::Less, "({x}, {y})"),
                Verdict::ExactAboveBorn => assert_eq!(order, Ordering::Greater, "({x}, {y})"),
                Verdict::Inconclusive => {}
            }
        }
    }

    #[test]
    fn closeness_limits() {
        let grid = Grid::default();
        for pair in [ClosenessPair::ExactBorn, ClosenessPair::ExactGksl] {
            let map = closeness_map(&grid, 0.15, pair).unwrap();
            assert!(map.iter().any(|&b| b));
            assert!(closeness_map(&grid, 0.0, pair).unwrap().iter().all(|&b| !b));
        }
        assert!(closeness_map(&grid, -1.0, ClosenessPair::ExactBorn).is_err());
    }

    proptest! {
        #[test]
        fn ordering_is_scale_free(de in -3.0f64..3.0, gamma in 0.05f64..8.0, s in 0.01f64..100.0) {
            let a = compare_direct(de, &res(1.0, gamma));
            let b = compare_direct(s * de, &res(s, s * gamma));
            prop_assert_eq!(a.label, b.label);
            prop_assert!((b.eta_exact - s * a.eta_exact).abs() <= 1e-9 * s * a.eta_exact.max(1e-300));
        }

        #[test]
        fn born_coherence_rate_equals_exact(de in -3.0f64..3.0, gamma in 0.05f64..8.0) {
            let r = res(1.0, gamma);
            let basis = crate::model::GlobalBasis::from_detunings(&[de], &r);
            let born = crate::born::born_rates(&basis, &r);
            let exact = crate::exact::exact_rates(&basis, &r);
            prop_assert_eq!(born.eta_alpha0[0], exact.eta_alpha0[0]);
        }

        #[test]
        fn rates_depend_on_detuning_squared(de in 0.0f64..3.0, gamma in 0.05f64..8.0) {
            let a = compare_direct(de, &res(1.0, gamma));
            let b = compare_direct(-de, &res(1.0, gamma));
            prop_assert_eq!(a.label, b.label);
            prop_assert!((a.eta_born - b.eta_born).abs() <= 1e-12 * a.eta_born);
        }
    }
}
