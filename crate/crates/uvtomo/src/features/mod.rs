//! Rotation-invariant moments of projection stacks: first-order radial
//! features and second-order autocorrelation matrices, with the spherical
//! Bessel transforms connecting their Fourier and spatial forms.
//!
//! All matrices live in the `i^l`-normalized real representation: the
//! coefficient matrix of degree `l` is `A_l = (i^l)* Atilde_l` with
//! `Atilde_l` real, so autocorrelations, factors, and transforms are real
//! for every degree and the odd-degree imaginary phase never appears
//! explicitly.

mod bessel_op;
mod extract;
mod polar;

pub use bessel_op::BesselOperator;
pub use extract::{
    degree_project, noise_bias_tensor, radial_from_moment, Extractor, FeatureAccumulator,
};
pub use polar::{polar_fourier_direct, PolarFourierSlice, PolarPlan};

use crate::mathcore::{gauss_legendre, uniform_gregory, QuadratureRule};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("invalid feature parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Sampling counts and cutoffs for feature extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    /// Image side length (odd).
    pub g: usize,
    /// Frequency cutoff; integrals over `k` run on `[0, k_max]`.
    pub k_max: f64,
    /// Angular samples for `phi` on `[0, 2 pi]`.
    pub n_phi: usize,
    /// Radial samples for `r` on `[0, (G - 1) / 2]`.
    pub n_r: usize,
    /// Frequency samples for `k` (uniform grid).
    pub n_k: usize,
    /// Samples for the slice angle `psi` on `[0, pi]`.
    pub n_psi: usize,
    /// Spherical harmonic cutoff degree.
    pub l_max: usize,
}

impl FeatureParams {
    /// Desk-scale defaults for a given image size.
    pub fn desk(g: usize) -> Self {
        FeatureParams {
            g,
            k_max: std::f64::consts::FRAC_PI_2,
            n_phi: 129,
            n_r: 41,
            n_k: 21,
            n_psi: 41,
            l_max: 6,
        }
    }

    /// Full-scale defaults matching the reference experimental setup
    /// (G = 101, N on the order of 10^4).
    pub fn paper(g: usize) -> Self {
        FeatureParams {
            g,
            k_max: std::f64::consts::FRAC_PI_2,
            n_phi: 401,
            n_r: 101,
            n_k: 51,
            n_psi: 101,
            l_max: 10,
        }
    }
}

/// Quadrature grids realizing a parameter set.
#[derive(Debug, Clone)]
pub struct FeatureGrids {
    pub params: FeatureParams,
    /// Uniform frequency samples on `[0, k_max]` with end-corrected weights.
    pub k: QuadratureRule,
    /// Gauss–Legendre radii on `[0, (G - 1) / 2]`.
    pub r: QuadratureRule,
    /// Gauss–Legendre nodes for `psi` on `[0, pi]`.
    pub psi: QuadratureRule,
    /// Gauss–Legendre nodes for `phi` on `[0, 2 pi]`.
    pub phi: QuadratureRule,
}

impl FeatureGrids {
    pub fn new(params: &FeatureParams) -> Result<Self, FeatureError> {
        if params.g % 2 == 0 || params.g < 3 {
            return Err(FeatureError::InvalidParams(format!(
                "image side must be odd and at least 3, got {}",
                params.g
            )));
        }
        let bad = |e: crate::mathcore::MathError| FeatureError::InvalidParams(e.to_string());
        let r_max = (params.g as f64 - 1.0) / 2.0;
        Ok(FeatureGrids {
            params: params.clone(),
            k: uniform_gregory(params.n_k, 0.0, params.k_max).map_err(bad)?,
            r: gauss_legendre(params.n_r, 0.0, r_max).map_err(bad)?,
            psi: gauss_legendre(params.n_psi, 0.0, std::f64::consts::PI).map_err(bad)?,
            phi: gauss_legendre(params.n_phi, 0.0, 2.0 * std::f64::consts::PI).map_err(bad)?,
        })
    }

    pub fn l_max(&self) -> usize {
        self.params.l_max
    }
}

/// First moments: `M(k)` on the frequency grid, `W(r)` on the radial grid,
/// and the total mass.
#[derive(Debug, Clone)]
pub struct RadialFeatures {
    pub m: Vec<Complex64>,
    pub w: Vec<f64>,
    pub total_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureDomain {
    Fourier,
    Spatial,
}

impl std::fmt::Display for FeatureDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureDomain::Fourier => write!(f, "fourier"),
            FeatureDomain::Spatial => write!(f, "spatial"),
        }
    }
}

/// Per-degree autocorrelation matrices in the normalized real
/// representation: Fourier `C_l` (`U x U`) or spatial `E_l` (`V x V`).
#[derive(Debug, Clone)]
pub struct AutocorrSet {
    pub domain: FeatureDomain,
    pub mats: Vec<Array2<f64>>,
}

impl AutocorrSet {
    pub fn l_max(&self) -> usize {
        self.mats.len().saturating_sub(1)
    }
}

/// Everything the reconstruction consumes, plus the grids it was computed on.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub grids: FeatureGrids,
    pub radial: RadialFeatures,
    pub autocorr: AutocorrSet,
    /// Noise standard deviation used for debiasing (0 for clean data).
    pub sigma_used: f64,
}

/// Extract Fourier-domain features from a stack of images in one streaming
/// pass.
///
/// Images are processed in fixed-size chunks in parallel and the partial
/// sums merged in chunk order, so results are identical for any thread
/// count. `sigma` is the per-pixel noise standard deviation used to debias
/// the second moments (pass 0 for clean data).
pub fn extract_features(
    images: &[Array2<f64>],
    params: &FeatureParams,
    sigma: f64,
) -> Result<FeatureSet, FeatureError> {
    let grids = FeatureGrids::new(params)?;
    if images.is_empty() {
        return Err(FeatureError::InvalidParams(
            "no images to extract from".into(),
        ));
    }
    let extractor = Extractor::new(&grids);
    let accs: Vec<FeatureAccumulator> = images
        .par_chunks(32)
        .map(|chunk| {
            let mut acc = extractor.accumulator();
            for image in chunk {
                extractor.push(&mut acc, image);
            }
            acc
        })
        .collect();
    let mut total = extractor.accumulator();
    for acc in accs {
        total.merge(acc);
    }
    Ok(extractor.finalize(&total, sigma))
}

/// Transform a Fourier feature set into the spatial domain
/// (`E_l = R_l C_l R_l^T` per degree).
pub fn to_spatial(features: &FeatureSet) -> Result<FeatureSet, FeatureError> {
    if features.autocorr.domain != FeatureDomain::Fourier {
        return Err(FeatureError::InvalidParams(
            "features are already spatial".into(),
        ));
    }
    let op = BesselOperator::new(&features.grids.r, &features.grids.k, features.grids.l_max());
    let mats = features
        .autocorr
        .mats
        .iter()
        .enumerate()
        .map(|(l, c)| op.fourier_to_spatial(c, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureSet {
        grids: features.grids.clone(),
        radial: features.radial.clone(),
        autocorr: AutocorrSet {
            domain: FeatureDomain::Spatial,
            mats,
        },
        sigma_used: features.sigma_used,
    })
}
