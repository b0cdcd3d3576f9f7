//! Real spherical harmonics, orthonormal over the unit sphere.

use super::legendre::normalized_assoc_legendre;
use super::MathError;

/// Real spherical harmonic `Y_lm(theta, phi)` with the orthonormal
/// convention `int Y_lm Y_l'm' dOmega = delta_ll' delta_mm'`.
///
/// Convention: `Y_l0 = Pbar_l^0(cos theta)`,
/// `Y_lm = sqrt(2) Pbar_l^m(cos theta) cos(m phi)` for `m > 0`, and
/// `Y_l,-m = sqrt(2) Pbar_l^m(cos theta) sin(m phi)` for `m > 0`, where
/// `Pbar` carries no Condon–Shortley phase. Any self-consistent sign
/// convention yields the same m-summed autocorrelation features; this one is
/// fixed here and used everywhere in the crate.
pub fn real_sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> Result<f64, MathError> {
    if m.unsigned_abs() as usize > l {
        return Err(MathError::Domain(format!(
            "spherical harmonic order {m} out of range for degree {l}"
        )));
    }
    let table = real_sph_harm_all(l, theta, phi);
    let offset = l * l + (m + l as i64) as usize;
    Ok(table[offset])
}

/// All real spherical harmonics up to degree `l_max` at one direction,
/// indexed by `l^2 + (m + l)` (m ascending from -l to l).
pub fn real_sph_harm_all(l_max: usize, theta: f64, phi: f64) -> Vec<f64> {
    let pbar = normalized_assoc_legendre(l_max, theta.cos());
    let pidx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = vec![0.0; (l_max + 1) * (l_max + 1)];
    for l in 0..=l_max {
        out[l * l + l] = pbar[pidx(l, 0)];
        for m in 1..=l {
            let (s, c) = (m as f64 * phi).sin_cos();
            let v = sqrt2 * pbar[pidx(l, m)];
            out[l * l + l + m] = v * c;
            out[l * l + l - m] = v * s;
        }
    }
    out
}

/// Spherical harmonics of a Cartesian direction; `v` need not be normalized
/// but must be nonzero.
pub fn real_sph_harm_all_dir(l_max: usize, v: [f64; 3]) -> Vec<f64> {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    real_sph_harm_all(l_max, theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::{gauss_legendre, legendre};
    use approx::assert_relative_eq;

    const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

    #[test]
    fn y00_is_constant() {
        for &(theta, phi) in &[(0.1, 0.3), (1.2, -2.0), (3.0, 6.0)] {
            assert_relative_eq!(
                real_sph_harm(0, 0, theta, phi).unwrap(),
                (1.0 / FOUR_PI).sqrt(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn y10_at_pole() {
        assert_relative_eq!(
            real_sph_harm(1, 0, 0.0, 1.234).unwrap(),
            (3.0 / FOUR_PI).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn order_out_of_range_is_error() {
        assert!(real_sph_harm(2, 3, 0.5, 0.5).is_err());
        assert!(real_sph_harm(2, -3, 0.5, 0.5).is_err());
        assert!(real_sph_harm(2, 2, 0.5, 0.5).is_ok());
    }

    /// Sphere-quadrature oracle: every harmonic up to l = 10 has unit norm
    /// under a GLQ(theta) x uniform(phi) product grid.
    #[test]
    fn unit_norm_under_product_quadrature() {
        let l_max = 10;
        let theta_rule = gauss_legendre(48, -1.0, 1.0).unwrap(); // in cos(theta)
        let n_phi = 64;
        let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut norms = vec![0.0; (l_max + 1) * (l_max + 1)];
        for (&ct, &wt) in theta_rule.nodes.iter().zip(&theta_rule.weights) {
            let theta = ct.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                let phi = w_phi * j as f64;
                let y = real_sph_harm_all(l_max, theta, phi);
                for (n, &v) in norms.iter_mut().zip(&y) {
                    *n += wt * w_phi * v * v;
                }
            }
        }
        for (i, n) in norms.iter().enumerate() {
            assert!((n - 1.0).abs() < 1e-8, "harmonic {i}: norm^2 = {n}");
        }
    }

    /// Addition theorem: sum_m Y_lm(a) Y_lm(b) = (2l+1)/(4 pi) P_l(cos angle).
    #[test]
    fn addition_theorem_for_random_directions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..32 {
            let mut dir = || {
                let v: [f64; 3] = [
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                ];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            };
            let a = dir();
            let b = dir();
            let cos_ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            let ya = real_sph_harm_all_dir(10, a);
            let yb = real_sph_harm_all_dir(10, b);
            for l in 0..=10usize {
                let sum: f64 = (0..2 * l + 1)
                    .map(|k| ya[l * l + k] * yb[l * l + k])
                    .sum();
                let expect =
                    (2.0 * l as f64 + 1.0) / FOUR_PI * legendre(l, cos_ab.clamp(-1.0, 1.0)).unwrap();
                assert!(
                    (sum - expect).abs() < 1e-8,
                    "l={l}: got {sum}, expected {expect}"
                );
            }
        }
    }
}
