//! Parametric density maps: nonnegative weighted isotropic Gaussian bumps on
//! a pruned Cartesian grid, with closed-form feature evaluation and analytic
//! projection rendering.

mod bumps;
mod grid;
mod project;

pub use bumps::{analytic_e, bump_sh_coeff, eval_b, gaussian3, radial_vector, BumpBasis};
pub use grid::{prune_grid, GridSpec, DEFAULT_TAU};
pub use project::{
    downsample_image, downsample_volume, rasterize, render_projection, upsample_density, Volume,
};

use crate::mathcore::{uniform_rotation, QuadratureRule};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DensityError {
    #[error("no grid center survives pruning")]
    EmptyGrid,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("incompatible sizes: {0}")]
    IncompatibleSize(String),
}

/// Weighted bump mixture: the unknown of the reconstruction problem.
///
/// Invariants: all weights in `[0, total_mass]` and their sum equals
/// `total_mass` within machine-level relative tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMap {
    grid: GridSpec,
    weights: Vec<f64>,
    total_mass: f64,
}

impl DensityMap {
    pub fn new(grid: GridSpec, weights: Vec<f64>, total_mass: f64) -> Result<Self, DensityError> {
        if weights.len() != grid.len() {
            return Err(DensityError::IncompatibleSize(format!(
                "{} weights for {} centers",
                weights.len(),
                grid.len()
            )));
        }
        if !(total_mass > 0.0) {
            return Err(DensityError::InvalidParam(format!(
                "total mass must be positive, got {total_mass}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if weights
            .iter()
            .any(|&w| !(-1e-12..=total_mass * (1.0 + 1e-9)).contains(&w))
        {
            return Err(DensityError::InvalidParam(
                "weights must lie in [0, total_mass]".into(),
            ));
        }
        if (sum - total_mass).abs() > 1e-9 * total_mass {
            return Err(DensityError::InvalidParam(format!(
                "weights sum to {sum}, expected {total_mass}"
            )));
        }
        Ok(DensityMap {
            grid,
            weights,
            total_mass,
        })
    }

    /// Phantom from a unit-step 3D random walk: recentered to put the mass
    /// center at the origin, scaled to fit inside the inscribed ball with a
    /// `3 tau` margin, snapped to the grid (colliding steps merge their
    /// weights), and normalized to `mass`.
    pub fn random_walk(steps: usize, g: usize, mass: f64, seed: u64) -> Result<Self, DensityError> {
        if steps == 0 {
            return Err(DensityError::InvalidParam(
                "walk needs at least one step".into(),
            ));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(steps);
        let mut p = [0.0_f64; 3];
        points.push(p);
        for _ in 1..steps {
            let dir = uniform_rotation(&mut rng).apply([0.0, 0.0, 1.0]);
            p = [p[0] + dir[0], p[1] + dir[1], p[2] + dir[2]];
            points.push(p);
        }
        let mut mean = [0.0; 3];
        for q in &points {
            for a in 0..3 {
                mean[a] += q[a];
            }
        }
        for a in 0..3 {
            mean[a] /= points.len() as f64;
        }
        for q in &mut points {
            for a in 0..3 {
                q[a] -= mean[a];
            }
        }
        // Scale into the ball, leaving room for the bump tails.
        let tau = DEFAULT_TAU;
        let target = ((g as f64 - 1.0) / 2.0 - 3.0 * tau).max(1.0);
        let max_norm = points
            .iter()
            .map(|q| (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt())
            .fold(0.0, f64::max);
        if max_norm > 0.0 {
            let s = target / max_norm;
            for q in &mut points {
                for a in 0..3 {
                    q[a] *= s;
                }
            }
        }
        let mut merged: std::collections::BTreeMap<[i32; 3], f64> =
            std::collections::BTreeMap::new();
        for q in &points {
            let c = [
                q[0].round() as i32,
                q[1].round() as i32,
                q[2].round() as i32,
            ];
            *merged.entry(c).or_insert(0.0) += 1.0;
        }
        let (centers, mut weights): (Vec<[i32; 3]>, Vec<f64>) = merged.into_iter().unzip();
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w *= mass / sum;
        }
        let grid = GridSpec::new(g, tau, centers)?;
        DensityMap::new(grid, weights, mass)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Mass center in voxel coordinates.
    pub fn mass_center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for (center, &w) in self.grid.centers().iter().zip(&self.weights) {
            for a in 0..3 {
                c[a] += w * center[a] as f64;
            }
        }
        for a in 0..3 {
            c[a] /= self.total_mass;
        }
        c
    }

    /// Radial features `W(r) = g(r)^T w` at the given radii.
    pub fn analytic_radial(&self, radii: &[f64]) -> Vec<f64> {
        radii
            .iter()
            .map(|&r| {
                radial_vector(r, &self.grid)
                    .iter()
                    .zip(&self.weights)
                    .map(|(g, w)| g * w)
                    .sum()
            })
            .collect()
    }

    /// Integral of `W(r)` over a radial quadrature rule; equals the total
    /// mass up to the Gaussian tail outside the ball.
    pub fn radial_mass(&self, rule: &QuadratureRule) -> f64 {
        let w = self.analytic_radial(&rule.nodes);
        w.iter().zip(&rule.weights).map(|(a, b)| a * b).sum()
    }
}
