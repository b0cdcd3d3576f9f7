//! Quadrature rules: Gauss–Legendre nodes/weights on arbitrary intervals and
//! end-corrected (Gregory) weights for uniformly spaced samples.

use super::legendre::legendre_pair;
use super::MathError;

/// Nodes and positive weights for numerical integration over `[lo, hi]`.
///
/// Nodes are strictly increasing and interior to the interval for
/// Gauss–Legendre rules; uniform rules include the endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    /// Weighted sum of `f` over the nodes.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n`-node Gauss–Legendre rule on `[lo, hi]`.
///
/// Exact for polynomials of degree `2n - 1`. Nodes are found by Newton
/// iteration on `P_n` from the Chebyshev-like initial guess
/// `cos(pi (i + 3/4) / (n + 1/2))`, then mapped affinely onto the interval.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule, MathError> {
    if n == 0 {
        return Err(MathError::InvalidQuadrature("need at least one node".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(MathError::InvalidQuadrature(format!(
            "invalid interval [{lo}, {hi}]"
        )));
    }

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Symmetric rule: solve for the non-negative half and mirror.
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th root of P_n (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    // Map [-1, 1] onto [lo, hi].
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for i in 0..n {
        nodes[i] = mid + half * nodes[i];
        weights[i] *= half;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (lo, hi),
    })
}

/// Uniform-grid rule on `[lo, hi]` with Gregory end corrections.
///
/// The nodes are the `n` equally spaced samples including both endpoints.
/// The weights are the trapezoid weights with boundary corrections that
/// cancel the `h^2` and `h^4` Euler–Maclaurin terms, so for integrands whose
/// derivatives vanish at both endpoints the rule converges like the
/// periodic trapezoid rule. Falls back to lower-order corrections for short
/// grids.
pub fn uniform_gregory(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule, MathError> {
    if n < 2 {
        return Err(MathError::InvalidQuadrature(
            "uniform rule needs at least two nodes".into(),
        ));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(MathError::InvalidQuadrature(format!(
            "invalid interval [{lo}, {hi}]"
        )));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    let mut weights = vec![1.0; n];
    weights[0] = 0.5;
    weights[n - 1] = 0.5;
    // Gregory corrections; each order needs the end stencils to not overlap.
    let ends: &[f64] = if n >= 10 {
        // order-6 end weights
        &[
            475.0 / 1440.0,
            317.0 / 240.0,
            23.0 / 30.0,
            793.0 / 720.0,
            157.0 / 160.0,
        ]
    } else if n >= 6 {
        // order-4 end weights
        &[3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0]
    } else {
        &[]
    };
    for (i, &w) in ends.iter().enumerate() {
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    for w in &mut weights {
        *w *= h;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (lo, hi),
    })
}
