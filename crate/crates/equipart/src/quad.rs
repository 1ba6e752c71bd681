//! Adaptive one-dimensional quadrature.
//!
//! Fixed-order Gauss-Legendre rule per panel with recursive interval
//! bisection. The error indicator for a panel is the difference between
//! the whole-panel estimate and the sum over its two halves.

use std::sync::OnceLock;

/// Order of the per-panel Gauss-Legendre rule.
const GAUSS_ORDER: usize = 15;

/// Maximum bisection depth before a panel is accepted as-is.
const MAX_DEPTH: u32 = 48;

/// Default combined absolute/relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of per-panel error indicators; an estimate, not a bound.
    pub error_estimate: f64,
    pub n_evals: u64,
}

struct GaussRule {
    nodes: [f64; GAUSS_ORDER],
    weights: [f64; GAUSS_ORDER],
}

/// Legendre polynomial P_n and its derivative at x, by recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights on [-1, 1] by Newton iteration from the Chebyshev guess.
fn compute_gauss_rule() -> GaussRule {
    let n = GAUSS_ORDER;
    let mut nodes = [0.0; GAUSS_ORDER];
    let mut weights = [0.0; GAUSS_ORDER];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    GaussRule { nodes, weights }
}

fn gauss_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(compute_gauss_rule)
}

fn gauss_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, evals: &mut u64) -> f64 {
    let rule = gauss_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..GAUSS_ORDER {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    *evals += GAUSS_ORDER as u64;
    half * sum
}

struct Adaptive<'f, F> {
    f: &'f F,
    threshold: f64,
    evals: u64,
    err_sum: f64,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    fn recurse(&mut self, a: f64, b: f64, whole: f64, local_tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gauss_panel(self.f, a, mid, &mut self.evals);
        let right = gauss_panel(self.f, mid, b, &mut self.evals);
        let refined = left + right;
        let err = (refined - whole).abs();
        if err <= local_tol || depth >= MAX_DEPTH {
            self.err_sum += err;
            return refined;
        }
        self.recurse(a, mid, left, 0.5 * local_tol, depth + 1)
            + self.recurse(mid, b, right, 0.5 * local_tol, depth + 1)
    }
}

/// Integrate `f` over `[a, b]` to a combined absolute/relative tolerance.
///
/// The acceptance threshold per unit length is `tol * max(1, |I|)` with `I`
/// a first-pass estimate of the integral, so `tol` acts as an absolute
/// tolerance for small integrals and a relative one for large integrals.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> QuadResult {
    assert!(tol > 0.0, "quadrature tolerance must be positive");
    if a == b {
        return QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            n_evals: 0,
        };
    }
    let mut evals = 0;
    // First pass over four panels to set the absolute scale.
    let mut rough = 0.0;
    let quarter = 0.25 * (b - a);
    for i in 0..4 {
        let lo = a + quarter * i as f64;
        rough += gauss_panel(f, lo, lo + quarter, &mut evals);
    }
    let threshold = tol * rough.abs().max(1.0);

    let mut state = Adaptive {
        f,
        threshold,
        evals,
        err_sum: 0.0,
    };
    let mut value = 0.0;
    for i in 0..4 {
        let lo = a + quarter * i as f64;
        let hi = lo + quarter;
        let whole = gauss_panel(f, lo, hi, &mut state.evals);
        value += state.recurse(lo, hi, whole, 0.25 * state.threshold, 0);
    }
    QuadResult {
        value,
        error_estimate: state.err_sum,
        n_evals: state.evals,
    }
}

/// Convenience wrapper using [`DEFAULT_TOL`].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    adaptive_quad(f, a, b, DEFAULT_TOL).value
}
