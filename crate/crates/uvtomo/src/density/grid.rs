//! Cartesian sampling grids for the parametric density model.

use super::DensityError;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Integer grid centers inside the inscribed ball of an odd `G^3` cube,
/// together with the Gaussian bump width `tau` (in voxels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    g: usize,
    tau: f64,
    centers: Vec<[i32; 3]>,
}

/// Default bump width; empirically near-optimal for unit grids.
pub const DEFAULT_TAU: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2

impl GridSpec {
    /// Build a grid from explicit centers, validating the invariants:
    /// odd `G`, unique centers inside the inscribed ball, positive `tau`.
    pub fn new(g: usize, tau: f64, centers: Vec<[i32; 3]>) -> Result<Self, DensityError> {
        if g % 2 == 0 || g == 0 {
            return Err(DensityError::InvalidParam(format!(
                "grid side must be odd and positive, got {g}"
            )));
        }
        if !(tau > 0.0) {
            return Err(DensityError::InvalidParam(format!(
                "bump width must be positive, got {tau}"
            )));
        }
        let radius = (g as i64 - 1) / 2;
        let mut seen = std::collections::HashSet::with_capacity(centers.len());
        for c in &centers {
            let n2 = c.iter().map(|&v| (v as i64) * (v as i64)).sum::<i64>();
            if n2 > radius * radius {
                return Err(DensityError::InvalidParam(format!(
                    "center {c:?} outside the inscribed ball of G = {g}"
                )));
            }
            if !seen.insert(*c) {
                return Err(DensityError::InvalidParam(format!("duplicate center {c:?}")));
            }
        }
        Ok(GridSpec { g, tau, centers })
    }

    /// Every lattice point inside the inscribed ball.
    pub fn full_ball(g: usize, tau: f64) -> Result<Self, DensityError> {
        let r = (g as i32 - 1) / 2;
        let mut centers = Vec::new();
        for z in -r..=r {
            for y in -r..=r {
                for x in -r..=r {
                    if x * x + y * y + z * z <= r * r {
                        centers.push([x, y, z]);
                    }
                }
            }
        }
        GridSpec::new(g, tau, centers)
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn centers(&self) -> &[[i32; 3]] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Half-extent of the grid, `(G - 1) / 2`.
    pub fn radius(&self) -> f64 {
        (self.g as f64 - 1.0) / 2.0
    }
}

/// Keep the lattice points whose `(x, y)` column in `reference` exceeds
/// `threshold`, alongside the inscribed-ball constraint. The reference image
/// is `G x G`, indexed `[(y + R, x + R)]`.
pub fn prune_grid(
    reference: &Array2<f64>,
    threshold: f64,
    g: usize,
    tau: f64,
) -> Result<GridSpec, DensityError> {
    if reference.nrows() != g || reference.ncols() != g {
        return Err(DensityError::InvalidParam(format!(
            "reference image is {}x{}, expected {g}x{g}",
            reference.nrows(),
            reference.ncols()
        )));
    }
    let r = (g as i32 - 1) / 2;
    let mut centers = Vec::new();
    for z in -r..=r {
        for y in -r..=r {
            for x in -r..=r {
                if x * x + y * y + z * z > r * r {
                    continue;
                }
                let pixel = reference[((y + r) as usize, (x + r) as usize)];
                if pixel > threshold {
                    centers.push([x, y, z]);
                }
            }
        }
    }
    if centers.is_empty() {
        return Err(DensityError::EmptyGrid);
    }
    GridSpec::new(g, tau, centers)
}
