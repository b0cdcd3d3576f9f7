//! Bessel functions: spherical `j_l`, exponentially scaled modified
//! `Ihat_{l+1/2}`, and cylindrical `J_m` sequences.
//!
//! All evaluators are total on their domains and switch between ascending
//! series, stable recurrences, and asymptotics so no intermediate overflows
//! for arguments up to 1e6.

/// Spherical Bessel function of the first kind `j_l(x)`, `x >= 0`.
pub fn spherical_bessel_j(l: usize, x: f64) -> f64 {
    spherical_j_sequence(l, x)[l]
}

/// `j_0(x) .. j_{l_max}(x)` in one pass.
///
/// Small arguments use the ascending series; `x > l_max` uses the upward
/// recurrence (stable above the turning point); otherwise Miller's downward
/// recurrence normalized against `j_0` (or `j_1` near zeros of `sin`).
pub fn spherical_j_sequence(l_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "spherical Bessel argument must be nonnegative");
    if x < 1e-3 {
        return (0..=l_max).map(|l| spherical_j_series(l, x)).collect();
    }
    let j0 = x.sin() / x;
    if l_max == 0 {
        return vec![j0];
    }
    let j1 = j0 / x - x.cos() / x;
    if x > l_max as f64 + 1.0 {
        // Upward recurrence: j_{l+1} = (2l+1)/x j_l - j_{l-1}.
        let mut out = Vec::with_capacity(l_max + 1);
        out.push(j0);
        out.push(j1);
        for l in 1..l_max {
            let next = (2.0 * l as f64 + 1.0) / x * out[l] - out[l - 1];
            out.push(next);
        }
        return out;
    }
    // Downward recurrence from a buffered start order.
    let start = l_max + 25 + (40.0 + x).sqrt() as usize;
    let mut out = vec![0.0; l_max + 1];
    let mut f_next = 0.0_f64;
    let mut f = 1e-30_f64;
    for k in (0..=start).rev() {
        let f_prev = (2.0 * k as f64 + 3.0) / x * f - f_next;
        if k <= l_max {
            out[k] = f_prev;
        }
        f_next = f;
        f = f_prev;
        if f.abs() > 1e250 {
            f_next /= 1e250;
            f /= 1e250;
            for v in &mut out {
                *v /= 1e250;
            }
        }
    }
    // Normalize against whichever reference value is better conditioned.
    let scale = if j0.abs() >= j1.abs() {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for v in &mut out {
        *v *= scale;
    }
    out
}

fn spherical_j_series(l: usize, x: f64) -> f64 {
    // j_l(x) = x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+1+2k))
    let mut lead = 1.0;
    for k in 0..l {
        lead *= x / (2.0 * k as f64 + 3.0);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let half_x2 = 0.5 * x * x;
    for k in 1..=20 {
        term *= -half_x2 / (k as f64 * (2.0 * (l + k) as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Exponentially scaled modified Bessel function of half-integer order,
/// `Ihat_{l+1/2}(x) = exp(-x) I_{l+1/2}(x)`, finite for all `x >= 0`.
pub fn scaled_bessel_i_half(l: usize, x: f64) -> f64 {
    scaled_i_half_sequence(l, x)[l]
}

/// `Ihat_{1/2}(x) .. Ihat_{l_max+1/2}(x)`.
///
/// Ascending series below 1e-3; a Lentz continued fraction for the top
/// ratio followed by the downward three-term recurrence and normalization
/// at `Ihat_{1/2}` up to moderate arguments; the uniform asymptotic
/// expansion per order for large arguments.
pub fn scaled_i_half_sequence(l_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "modified Bessel argument must be nonnegative");
    if x < 1e-3 {
        return (0..=l_max).map(|l| scaled_i_series(l as f64 + 0.5, x)).collect();
    }
    let nu_top = l_max as f64 + 0.5;
    if x >= 500.0 && x >= 3.0 * nu_top * nu_top {
        return (0..=l_max)
            .map(|l| scaled_i_asymptotic(l as f64 + 0.5, x))
            .collect();
    }
    // Ihat_{1/2}(x) = sqrt(2/(pi x)) (1 - exp(-2x)) / 2, via expm1 for accuracy.
    let ihat_half = (2.0 / (std::f64::consts::PI * x)).sqrt() * (-(-2.0 * x).exp_m1()) / 2.0;
    if l_max == 0 {
        return vec![ihat_half];
    }
    let ratio = bessel_i_ratio_cf(nu_top, x);
    let mut t = vec![0.0; l_max + 2];
    t[l_max] = 1.0;
    t[l_max + 1] = ratio;
    for k in (1..=l_max).rev() {
        // I_{nu-1} = I_{nu+1} + (2 nu / x) I_nu with nu = k + 1/2.
        t[k - 1] = t[k + 1] + (2.0 * (k as f64 + 0.5) / x) * t[k];
    }
    let scale = ihat_half / t[0];
    t.truncate(l_max + 1);
    for v in &mut t {
        *v *= scale;
    }
    t
}

/// Continued fraction for `I_{nu+1}(x) / I_nu(x)` by modified Lentz.
fn bessel_i_ratio_cf(nu: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..100_000 {
        let b = 2.0 * (nu + k as f64) / x;
        d = b + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

fn scaled_i_series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // Gamma(nu + 1) for half-integer nu by recurrence from Gamma(1/2) = sqrt(pi).
    let mut gamma = std::f64::consts::PI.sqrt();
    let mut a = 0.5;
    while a < nu + 0.5 {
        gamma *= a;
        a += 1.0;
    }
    let lead = (0.5 * x).powf(nu) / gamma;
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=400 {
        term *= q / (k as f64 * (nu + k as f64));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    (-x).exp() * lead * sum
}

/// Uniform asymptotic expansion of `exp(-x) I_nu(x)` for large `x`,
/// truncated at the smallest term.
fn scaled_i_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..=30 {
        let kf = k as f64;
        let factor = -(mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * x * kf);
        term *= factor;
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Cylindrical Bessel functions `J_0(x) .. J_{m_max}(x)` for `x >= 0` by
/// Miller's downward recurrence with the normalization
/// `J_0 + 2 (J_2 + J_4 + ...) = 1`.
pub fn bessel_j_sequence(m_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0);
    if x < 1e-8 {
        let mut out = vec![0.0; m_max + 1];
        out[0] = 1.0;
        if m_max >= 1 {
            out[1] = 0.5 * x;
        }
        return out;
    }
    let start = m_max.max(x.ceil() as usize) + 25 + (40.0 + x).sqrt() as usize;
    let start = start + start % 2; // even start keeps the even-sum normalization simple
    let mut out = vec![0.0; m_max + 1];
    let mut f_next = 0.0_f64;
    let mut f = 1e-30_f64;
    let mut norm = 0.0_f64;
    for k in (0..=start).rev() {
        let f_prev = 2.0 * (k as f64 + 1.0) / x * f - f_next;
        if k <= m_max {
            out[k] = f_prev;
        }
        if k % 2 == 0 {
            norm += if k == 0 { f_prev } else { 2.0 * f_prev };
        }
        f_next = f;
        f = f_prev;
        if f.abs() > 1e250 {
            f_next /= 1e250;
            f /= 1e250;
            norm /= 1e250;
            for v in &mut out {
                *v /= 1e250;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    out
}
