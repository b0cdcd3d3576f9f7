//! Legendre polynomials and fully normalized associated Legendre functions.

use super::MathError;

/// Legendre polynomial `P_l(x)` by the stable three-term recurrence
/// `n P_n = (2n - 1) x P_{n-1} - (n - 1) P_{n-2}`.
///
/// Arguments slightly outside `[-1, 1]` from floating-point noise are
/// accepted up to `1e-12`; anything beyond is a domain error.
pub fn legendre(l: usize, x: f64) -> Result<f64, MathError> {
    if x.abs() > 1.0 + 1e-12 {
        return Err(MathError::Domain(format!(
            "legendre argument {x} outside [-1, 1]"
        )));
    }
    let mut p_prev = 1.0;
    if l == 0 {
        return Ok(p_prev);
    }
    let mut p = x;
    for n in 2..=l {
        let nf = n as f64;
        let p_next = ((2.0 * nf - 1.0) * x * p - (nf - 1.0) * p_prev) / nf;
        p_prev = p;
        p = p_next;
    }
    Ok(p)
}

/// `P_n(x)` together with its derivative, used by the Gauss–Legendre
/// Newton iteration. No domain check: callers stay inside (-1, 1).
pub(crate) fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Fully normalized associated Legendre functions
/// `Pbar_l^m(x) = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(x)` for all
/// `l <= l_max`, `0 <= m <= l`, without the Condon–Shortley phase.
///
/// The normalization is folded into the recurrence (sectoral seed
/// `Pbar_m^m`, then upward in `l`) so no factorials are formed; values stay
/// bounded for any practical degree.
///
/// Returns a flat vector indexed by `l (l + 1) / 2 + m`.
pub fn normalized_assoc_legendre(l_max: usize, x: f64) -> Vec<f64> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    p[0] = (4.0 * std::f64::consts::PI).recip().sqrt();

    // Sectoral band: Pbar_m^m = sin(theta) sqrt((2m+1)/(2m)) Pbar_{m-1}^{m-1}.
    for m in 1..=l_max {
        p[idx(m, m)] =
            p[idx(m - 1, m - 1)] * sin_theta * ((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt();
    }
    // First off-sectoral: Pbar_{m+1}^m = x sqrt(2m+3) Pbar_m^m.
    for m in 0..l_max {
        p[idx(m + 1, m)] = x * (2.0 * m as f64 + 3.0).sqrt() * p[idx(m, m)];
    }
    // Upward in l: Pbar_l^m = a (x Pbar_{l-1}^m - b Pbar_{l-2}^m).
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}
