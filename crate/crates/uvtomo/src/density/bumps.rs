//! Closed-form spherical-harmonic expansions of the Gaussian bump model and
//! the linear operators they induce on the weight vector.
//!
//! A unit bump at center `mu` expands as
//! `h(r - mu) = sum_lm g_lm(r, mu) Y_lm(theta_r, phi_r)` with
//! `g_lm(r, mu) = tau^-2 exp(-(r - |mu|)^2 / (2 tau^2)) (r |mu|)^-1/2
//!  Ihat_{l+1/2}(r |mu| / tau^2) Y_lm(dir mu)`
//! (Funk–Hecke; the scaled Bessel keeps everything finite). Special cases at
//! `mu = 0` and `r = 0` reduce to the isotropic forms below.

use super::grid::GridSpec;
use crate::mathcore::{real_sph_harm_all_dir, scaled_i_half_sequence};
use ndarray::{Array1, Array2};
use std::collections::HashMap;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Normalized 3D Gaussian profile `(2 pi)^{-3/2} tau^{-3} exp(-r^2 / (2 tau^2))`.
pub fn gaussian3(r: f64, tau: f64) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).powf(1.5) * tau.powi(3);
    (-0.5 * (r / tau).powi(2)).exp() / norm
}

/// Radial factors of the bump expansion for all degrees at once:
/// `g_lm(r, mu) = radial[l] * Y_lm(dir mu)` for `mu != 0`.
fn bump_radial_parts(l_max: usize, r: f64, mu_norm: f64, tau: f64) -> Vec<f64> {
    debug_assert!(mu_norm > 0.0);
    let t2 = tau * tau;
    let x = r * mu_norm / t2;
    let envelope = (-0.5 * (r - mu_norm).powi(2) / t2).exp() / t2;
    if x < 1e-12 {
        // r -> 0 limit: Ihat_{1/2}(x) ~ sqrt(2 x / pi), higher orders vanish.
        let mut out = vec![0.0; l_max + 1];
        out[0] = envelope * (2.0 / std::f64::consts::PI).sqrt() / tau;
        return out;
    }
    let ihat = scaled_i_half_sequence(l_max, x);
    let scale = envelope / (r * mu_norm).sqrt();
    ihat.into_iter().map(|v| v * scale).collect()
}

/// Spherical-harmonic expansion coefficient `g_lm(r, mu)` of a unit bump.
pub fn bump_sh_coeff(l: usize, m: i64, r: f64, mu: [f64; 3], tau: f64) -> f64 {
    let mu_norm = (mu[0] * mu[0] + mu[1] * mu[1] + mu[2] * mu[2]).sqrt();
    if mu_norm == 0.0 {
        // Isotropic bump at the origin carries only degree zero.
        if l == 0 && m == 0 {
            return FOUR_PI.sqrt() * gaussian3(r, tau);
        }
        return 0.0;
    }
    let radial = bump_radial_parts(l, r, mu_norm, tau);
    let y = real_sph_harm_all_dir(l, mu);
    radial[l] * y[l * l + (m + l as i64) as usize]
}

/// Surface-integral measurement vector `g(r)`: entry `d` is the integral of
/// a unit bump at `mu_d` over the sphere of radius `r`.
pub fn radial_vector(r: f64, grid: &GridSpec) -> Vec<f64> {
    let tau = grid.tau();
    let t2 = tau * tau;
    grid.centers()
        .iter()
        .map(|c| {
            let mu = ((c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) as f64).sqrt();
            if r == 0.0 {
                gaussian3(mu, tau)
            } else if mu == 0.0 {
                FOUR_PI * r * r * gaussian3(r, tau)
            } else {
                let x = r * mu / t2;
                let envelope = (-0.5 * (r - mu).powi(2) / t2).exp();
                if x < 1e-12 {
                    envelope * (2.0 / std::f64::consts::PI).sqrt() * r * r / (t2 * tau)
                } else {
                    let ihat = scaled_i_half_sequence(0, x)[0];
                    envelope * r * r / t2 * ihat / (r * mu).sqrt()
                }
            }
        })
        .collect()
}

/// Dense evaluation of the linear map `w -> {B_l(w)}` and its adjoint.
///
/// Row layout of the internal matrix: degree-major, then order, then radius,
/// i.e. row `V (l^2 + mi) + i` holds `g_{l,m}(v_i, mu_d)` with
/// `mi = m + l`. One matrix-vector product evaluates every `B_l` at once.
#[derive(Debug, Clone)]
pub struct BumpBasis {
    l_max: usize,
    radii: Vec<f64>,
    phi: Array2<f64>,
}

impl BumpBasis {
    pub fn new(grid: &GridSpec, radii: &[f64], l_max: usize) -> Self {
        let v = radii.len();
        let rows = v * (l_max + 1) * (l_max + 1);
        let d = grid.len();
        let tau = grid.tau();
        let mut phi = Array2::zeros((rows, d));

        // Radial parts depend on |mu| only; centers share squared norms.
        let mut radial_cache: HashMap<i64, Vec<f64>> = HashMap::new();
        for (di, c) in grid.centers().iter().enumerate() {
            let n2 = c.iter().map(|&q| (q as i64) * (q as i64)).sum::<i64>();
            if n2 == 0 {
                for (i, &r) in radii.iter().enumerate() {
                    phi[(i, di)] = FOUR_PI.sqrt() * gaussian3(r, tau);
                }
                continue;
            }
            let radial = radial_cache.entry(n2).or_insert_with(|| {
                let mu_norm = (n2 as f64).sqrt();
                let mut table = Vec::with_capacity(v * (l_max + 1));
                for &r in radii {
                    table.extend(bump_radial_parts(l_max, r, mu_norm, tau));
                }
                table
            });
            let y = real_sph_harm_all_dir(l_max, [c[0] as f64, c[1] as f64, c[2] as f64]);
            for l in 0..=l_max {
                for mi in 0..2 * l + 1 {
                    let ylm = y[l * l + mi];
                    let row0 = v * (l * l + mi);
                    for i in 0..v {
                        phi[(row0 + i, di)] = radial[i * (l_max + 1) + l] * ylm;
                    }
                }
            }
        }
        BumpBasis {
            l_max,
            radii: radii.to_vec(),
            phi,
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn num_centers(&self) -> usize {
        self.phi.ncols()
    }

    /// Flat forward product `phi w`; rows follow the documented layout.
    pub fn apply_flat(&self, w: &[f64]) -> Array1<f64> {
        self.phi.dot(&ndarray::aview1(w))
    }

    /// `B_l(w)` for every degree: `V x (2l + 1)` matrices.
    pub fn apply(&self, w: &[f64]) -> Vec<Array2<f64>> {
        let flat = self.apply_flat(w);
        self.split_flat(&flat)
    }

    /// Reshape a flat row vector into the per-degree matrices.
    pub fn split_flat(&self, flat: &Array1<f64>) -> Vec<Array2<f64>> {
        let v = self.radii.len();
        (0..=self.l_max)
            .map(|l| {
                let mut b = Array2::zeros((v, 2 * l + 1));
                for mi in 0..2 * l + 1 {
                    let row0 = v * (l * l + mi);
                    for i in 0..v {
                        b[(i, mi)] = flat[row0 + i];
                    }
                }
                b
            })
            .collect()
    }

    /// Flatten per-degree matrices back into the row layout.
    pub fn flatten(&self, mats: &[Array2<f64>]) -> Array1<f64> {
        let v = self.radii.len();
        let rows = v * (self.l_max + 1) * (self.l_max + 1);
        let mut flat = Array1::zeros(rows);
        for (l, mat) in mats.iter().enumerate() {
            for mi in 0..2 * l + 1 {
                let row0 = v * (l * l + mi);
                for i in 0..v {
                    flat[row0 + i] = mat[(i, mi)];
                }
            }
        }
        flat
    }

    /// Adjoint `phi^T y` of the flat forward map.
    pub fn adjoint_flat(&self, y: &Array1<f64>) -> Array1<f64> {
        self.phi.t().dot(y)
    }

    /// Adjoint applied to per-degree matrices: `sum_lmi g_lm(v_i) Y_l[i, mi]`.
    pub fn adjoint(&self, mats: &[Array2<f64>]) -> Array1<f64> {
        self.adjoint_flat(&self.flatten(mats))
    }
}

/// `B_l` matrices of a weighted density: `B_l[i, mi] = g_lm(v_i)^T w`.
pub fn eval_b(basis: &BumpBasis, weights: &[f64]) -> Vec<Array2<f64>> {
    basis.apply(weights)
}

/// Spatial autocorrelation matrices `E_l = B_l B_l^T`, each `V x V`.
pub fn analytic_e(basis: &BumpBasis, weights: &[f64]) -> Vec<Array2<f64>> {
    basis
        .apply(weights)
        .into_iter()
        .map(|b| b.dot(&b.t()))
        .collect()
}
