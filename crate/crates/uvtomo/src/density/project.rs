//! Analytic projection rendering, rasterization, and the grid resizing used
//! by the ab initio protocol.
//!
//! Image and volume conventions: arrays are indexed `[(y + R, x + R)]` and
//! `[(z + R, y + R, x + R)]` with `R = (G - 1) / 2`, so the x coordinate is
//! fastest in memory. Pixels are point samples at integer coordinates.

use super::{DensityError, DensityMap, GridSpec};
use crate::mathcore::Rotation;
use ndarray::{Array2, Array3};

/// Sampled volume on the full cubic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub g: usize,
    pub voxel_size: f64,
    pub total_mass: f64,
    pub data: Array3<f64>,
}

/// Half-width of the truncated Gaussian support in units of `tau`; the
/// discarded tail mass is below 1e-8.
const SUPPORT_RADIUS: f64 = 6.0;

/// Line integral of the rotated bump mixture along z, evaluated per pixel.
///
/// Each rotated isotropic bump projects to a closed-form 2D Gaussian of
/// width `tau` centered at the rotated center's `(x, y)`; no volume
/// resampling is involved, so the image is linear in the weights exactly.
pub fn render_projection(density: &DensityMap, rotation: &Rotation) -> Array2<f64> {
    let g = density.grid().g();
    let tau = density.grid().tau();
    let r = (g as i64 - 1) / 2;
    let mut image = Array2::zeros((g, g));
    let amp = 1.0 / (2.0 * std::f64::consts::PI * tau * tau);
    let support = SUPPORT_RADIUS * tau;
    for (center, &w) in density.grid().centers().iter().zip(density.weights()) {
        let c = rotation.apply([center[0] as f64, center[1] as f64, center[2] as f64]);
        let (cx, cy) = (c[0], c[1]);
        let x_lo = ((cx - support).ceil() as i64).max(-r);
        let x_hi = ((cx + support).floor() as i64).min(r);
        let y_lo = ((cy - support).ceil() as i64).max(-r);
        let y_hi = ((cy + support).floor() as i64).min(r);
        for y in y_lo..=y_hi {
            let dy = y as f64 - cy;
            for x in x_lo..=x_hi {
                let dx = x as f64 - cx;
                let q = (dx * dx + dy * dy) / (2.0 * tau * tau);
                if q <= 0.5 * SUPPORT_RADIUS * SUPPORT_RADIUS {
                    image[((y + r) as usize, (x + r) as usize)] += w * amp * (-q).exp();
                }
            }
        }
    }
    image
}

/// Sample the bump mixture at the voxel centers of the full cube.
pub fn rasterize(density: &DensityMap) -> Volume {
    let g = density.grid().g();
    let tau = density.grid().tau();
    let r = (g as i64 - 1) / 2;
    let mut data = Array3::zeros((g, g, g));
    let norm = (2.0 * std::f64::consts::PI).powf(1.5) * tau.powi(3);
    let support = SUPPORT_RADIUS * tau;
    for (center, &w) in density.grid().centers().iter().zip(density.weights()) {
        let c = [center[0] as f64, center[1] as f64, center[2] as f64];
        let lo = |v: f64| ((v - support).ceil() as i64).max(-r);
        let hi = |v: f64| ((v + support).floor() as i64).min(r);
        for z in lo(c[2])..=hi(c[2]) {
            let dz = z as f64 - c[2];
            for y in lo(c[1])..=hi(c[1]) {
                let dy = y as f64 - c[1];
                for x in lo(c[0])..=hi(c[0]) {
                    let dx = x as f64 - c[0];
                    let q = (dx * dx + dy * dy + dz * dz) / (2.0 * tau * tau);
                    if q <= 0.5 * SUPPORT_RADIUS * SUPPORT_RADIUS {
                        data[((z + r) as usize, (y + r) as usize, (x + r) as usize)] +=
                            w * (-q).exp() / norm;
                    }
                }
            }
        }
    }
    Volume {
        g,
        voxel_size: 1.0,
        total_mass: density.total_mass(),
        data,
    }
}

fn coarse_side(g: usize, factor: usize) -> Result<usize, DensityError> {
    if factor == 0 || (g - 1) % factor != 0 {
        return Err(DensityError::IncompatibleSize(format!(
            "factor {factor} does not divide the usable extent of G = {g}"
        )));
    }
    Ok((g - 1) / factor + 1)
}

/// Per-axis coarse taps of a fine coordinate under the tent kernel of
/// half-width `factor`, normalized to unit total. Interior coordinates hit
/// at most two taps whose raw weights already sum to one (linear B-spline
/// partition of unity); near the boundary the surviving taps are rescaled so
/// no mass is lost.
fn tent_taps(v: i64, factor: usize, r_coarse: i64) -> Vec<(i64, f64)> {
    let f = factor as i64;
    let lo = (v - f + 1).div_euclid(f);
    let hi = (v + f - 1).div_euclid(f);
    let mut taps = Vec::with_capacity(3);
    for x in lo.max(-r_coarse)..=hi.min(r_coarse) {
        let w = 1.0 - (v - f * x).abs() as f64 / factor as f64;
        if w > 0.0 {
            taps.push((x, w));
        }
    }
    let sum: f64 = taps.iter().map(|t| t.1).sum();
    for t in &mut taps {
        t.1 /= sum;
    }
    taps
}

/// Resample a `G x G` image onto the coarse grid `G' = (G - 1) / factor + 1`
/// by scattering each fine pixel across its tent-weighted coarse neighbors.
///
/// The total image sum is preserved exactly and interior mass keeps its
/// center of gravity (the tent has linear precision), so structures do not
/// drift when coarsened.
pub fn downsample_image(image: &Array2<f64>, factor: usize) -> Result<Array2<f64>, DensityError> {
    let g = image.nrows();
    if image.ncols() != g || g % 2 == 0 {
        return Err(DensityError::IncompatibleSize(format!(
            "image must be odd square, got {}x{}",
            image.nrows(),
            image.ncols()
        )));
    }
    let gc = coarse_side(g, factor)?;
    let r = (g as i64 - 1) / 2;
    let rc = (gc as i64 - 1) / 2;
    let mut out = Array2::zeros((gc, gc));
    for y in -r..=r {
        let ty = tent_taps(y, factor, rc);
        for x in -r..=r {
            let val = image[((y + r) as usize, (x + r) as usize)];
            if val == 0.0 {
                continue;
            }
            for &(by, wy) in &ty {
                for &(bx, wx) in &tent_taps(x, factor, rc) {
                    out[((by + rc) as usize, (bx + rc) as usize)] += val * wy * wx;
                }
            }
        }
    }
    Ok(out)
}

/// 3D analogue of [`downsample_image`], for comparing volumes across scales.
pub fn downsample_volume(vol: &Volume, factor: usize) -> Result<Volume, DensityError> {
    let g = vol.g;
    let gc = coarse_side(g, factor)?;
    let r = (g as i64 - 1) / 2;
    let rc = (gc as i64 - 1) / 2;
    let mut data = Array3::zeros((gc, gc, gc));
    for z in -r..=r {
        let tz = tent_taps(z, factor, rc);
        for y in -r..=r {
            let ty = tent_taps(y, factor, rc);
            for x in -r..=r {
                let val = vol.data[((z + r) as usize, (y + r) as usize, (x + r) as usize)];
                if val == 0.0 {
                    continue;
                }
                for &(bz, wz) in &tz {
                    for &(by, wy) in &ty {
                        for &(bx, wx) in &tent_taps(x, factor, rc) {
                            data[(
                                (bz + rc) as usize,
                                (by + rc) as usize,
                                (bx + rc) as usize,
                            )] += val * wz * wy * wx;
                        }
                    }
                }
            }
        }
    }
    Ok(Volume {
        g: gc,
        voxel_size: vol.voxel_size * factor as f64,
        total_mass: vol.total_mass,
        data,
    })
}

/// Map a coarse density onto a fine grid by trilinear weight splatting,
/// preserving the total mass.
///
/// Coarse centers scale by `(G_f - 1) / (G_c - 1)`; the splatted lattice
/// weights are gathered at the fine grid's centers and renormalized, so mass
/// that lands on pruned-away fine centers is redistributed proportionally.
pub fn upsample_density(
    coarse: &DensityMap,
    fine_grid: GridSpec,
) -> Result<DensityMap, DensityError> {
    let gc = coarse.grid().g();
    let gf = fine_grid.g();
    if gf < gc {
        return Err(DensityError::IncompatibleSize(format!(
            "fine grid {gf} smaller than coarse grid {gc}"
        )));
    }
    let scale = (gf as f64 - 1.0) / (gc as f64 - 1.0);
    let rf = (gf as i64 - 1) / 2;
    // Separable tent kernel matched to the scale factor: half-width `scale`
    // on the fine lattice, unit total weight per axis.
    let tent = |d: f64| (1.0 - d.abs() / scale).max(0.0) / scale;
    let reach = scale.ceil() as i64;
    let mut lattice: std::collections::HashMap<[i32; 3], f64> = std::collections::HashMap::new();
    for (center, &w) in coarse.grid().centers().iter().zip(coarse.weights()) {
        let p = [
            center[0] as f64 * scale,
            center[1] as f64 * scale,
            center[2] as f64 * scale,
        ];
        for dz in -reach..=reach {
            let z = p[2].round() as i64 + dz;
            let wz = tent(z as f64 - p[2]);
            if wz == 0.0 || z.abs() > rf {
                continue;
            }
            for dy in -reach..=reach {
                let y = p[1].round() as i64 + dy;
                let wy = tent(y as f64 - p[1]);
                if wy == 0.0 || y.abs() > rf {
                    continue;
                }
                for dx in -reach..=reach {
                    let x = p[0].round() as i64 + dx;
                    let wx = tent(x as f64 - p[0]);
                    if wx == 0.0 || x.abs() > rf {
                        continue;
                    }
                    *lattice
                        .entry([x as i32, y as i32, z as i32])
                        .or_insert(0.0) += w * wx * wy * wz;
                }
            }
        }
    }
    let mut weights: Vec<f64> = fine_grid
        .centers()
        .iter()
        .map(|c| lattice.get(c).copied().unwrap_or(0.0))
        .collect();
    let sum: f64 = weights.iter().sum();
    let mass = coarse.total_mass();
    if sum <= 0.0 {
        // Nothing landed on the fine grid: fall back to uniform weights.
        let d = weights.len() as f64;
        for w in &mut weights {
            *w = mass / d;
        }
    } else {
        for w in &mut weights {
            *w *= mass / sum;
        }
    }
    DensityMap::new(fine_grid, weights, mass)
}
