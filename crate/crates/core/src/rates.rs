use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Exact,
    Born,
    /// Non-Markovian Redfield; the rate table carries the evaluation time.
    Redfield { t: f64 },
    /// Markovian Redfield, which for this model already has GKSL form.
    Gksl,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Born => "born",
            Method::Redfield { .. } => "redfield",
            Method::Gksl => "gksl",
        }
    }
}

/// Population decay rates `eta_alpha`, excited-ground decoherence rates
/// `eta_alpha0` and excited-excited decoherence rates `eta_alphabeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub method: Method,
    pub eta_alpha: Vec<f64>,
    pub eta_alpha0: Vec<f64>,
    pub eta_alphabeta: DMatrix<f64>,
}

impl RateTable {
    /// Table where every rate derives from per-level excited-ground rates:
    /// `eta_alpha = 2 eta_alpha0`, `eta_alphabeta = eta_alpha0 + eta_beta0`.
    pub fn from_ground_rates(method: Method, eta_alpha0: Vec<f64>) -> Self {
        let n = eta_alpha0.len();
        let eta_alpha = eta_alpha0.iter().map(|r| 2.0 * r).collect();
        let eta_alphabeta = DMatrix::from_fn(n, n, |a, b| eta_alpha0[a] + eta_alpha0[b]);
        Self { method, eta_alpha, eta_alpha0, eta_alphabeta }
    }

    pub fn n(&self) -> usize {
        self.eta_alpha.len()
    }
}
