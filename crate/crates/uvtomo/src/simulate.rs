//! Projection dataset synthesis: hidden uniform rotations, analytic
//! rendering, and SNR-controlled additive white Gaussian noise.

use crate::density::{render_projection, DensityMap};
use crate::mathcore::{uniform_rotation, Rotation};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// A stack of projection images with the parameters that generated it.
///
/// `hidden_rotations` are retained for diagnostics only; reconstruction
/// never reads them, and they are not written to dataset files.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Vec<Array2<f64>>,
    /// Noise standard deviation per pixel (0 for clean stacks).
    pub sigma: f64,
    /// Requested signal-to-noise ratio, if noise was added.
    pub snr: Option<f64>,
    pub seed: u64,
    /// Index of the image whose hidden rotation is the identity.
    pub reference_index: usize,
    pub hidden_rotations: Option<Vec<Rotation>>,
}

impl Dataset {
    pub fn g(&self) -> usize {
        self.images.first().map_or(0, |im| im.nrows())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Render `n` noiseless projections at Haar-uniform rotations.
///
/// The first rotation is forced to the identity so image 0 can serve as the
/// reference projection; the remaining rotations are drawn from the seeded
/// generator. Rendering is parallel over images.
pub fn generate(density: &DensityMap, n: usize, seed: u64) -> Dataset {
    assert!(n >= 1, "need at least one projection");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rotations = Vec::with_capacity(n);
    rotations.push(Rotation::identity());
    for _ in 1..n {
        rotations.push(uniform_rotation(&mut rng));
    }
    let images: Vec<Array2<f64>> = rotations
        .par_iter()
        .map(|rot| render_projection(density, rot))
        .collect();
    Dataset {
        images,
        sigma: 0.0,
        snr: None,
        seed,
        reference_index: 0,
        hidden_rotations: Some(rotations),
    }
}

/// Corrupt a clean dataset with white Gaussian noise at the requested SNR.
///
/// `sigma` is chosen from the empirical clean-signal power averaged over the
/// dataset: `snr = E[sum S^2] / E[sum eps^2]` with `E[sum eps^2] = G^2
/// sigma^2`. Each image gets its own counter-derived substream, so the
/// result does not depend on thread count or image order.
pub fn add_noise(dataset: &Dataset, snr: f64, seed: u64) -> Dataset {
    assert!(snr > 0.0, "snr must be positive");
    let g = dataset.g();
    let n = dataset.len();
    let mean_power: f64 = dataset
        .images
        .iter()
        .map(|im| im.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    let sigma = (mean_power / (snr * (g * g) as f64)).sqrt();
    let images: Vec<Array2<f64>> = dataset
        .images
        .par_iter()
        .enumerate()
        .map(|(i, im)| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let mut noisy = im.clone();
            for v in noisy.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                *v += sigma * e;
            }
            noisy
        })
        .collect();
    Dataset {
        images,
        sigma,
        snr: Some(snr),
        seed,
        reference_index: dataset.reference_index,
        hidden_rotations: dataset.hidden_rotations.clone(),
    }
}

/// Isotropic Gaussian low-pass filter, the denoiser stand-in used on noisy
/// reference projections before pruning and the projection-matching term.
pub fn lowpass_filter(image: &Array2<f64>, width: f64) -> Array2<f64> {
    let g = image.nrows() as i64;
    let reach = (3.0 * width).ceil() as i64;
    let kernel: Vec<f64> = (-reach..=reach)
        .map(|d| (-0.5 * (d as f64 / width).powi(2)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.into_iter().map(|k| k / ksum).collect();
    // Separable convolution with edge clamping.
    let mut tmp = Array2::zeros(image.raw_dim());
    for y in 0..g {
        for x in 0..g {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                let xx = (x + ki as i64 - reach).clamp(0, g - 1);
                acc += k * image[(y as usize, xx as usize)];
            }
            tmp[(y as usize, x as usize)] = acc;
        }
    }
    let mut out = Array2::zeros(image.raw_dim());
    for y in 0..g {
        for x in 0..g {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                let yy = (y + ki as i64 - reach).clamp(0, g - 1);
                acc += k * tmp[(yy as usize, x as usize)];
            }
            out[(y as usize, x as usize)] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn phantom(seed: u64) -> DensityMap {
        DensityMap::random_walk(50, 21, 50.0, seed).unwrap()
    }

    #[test]
    fn first_image_is_identity_render() {
        let d = phantom(1);
        let ds = generate(&d, 3, 7);
        let direct = render_projection(&d, &Rotation::identity());
        assert_eq!(ds.images[0], direct);
        assert_eq!(ds.reference_index, 0);
    }

    #[test]
    fn every_image_conserves_mass() {
        let d = phantom(2);
        let ds = generate(&d, 16, 3);
        for im in &ds.images {
            assert!((im.sum() - 50.0).abs() < 0.005 * 50.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let d = phantom(3);
        let a = generate(&d, 8, five());
        let b = generate(&d, 8, five());
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x, y);
        }
    }

    fn five() -> u64 {
        5
    }

    #[test]
    fn noise_is_seed_exact_and_sigma_recorded() {
        let d = phantom(4);
        let clean = generate(&d, 4, 1);
        let n1 = add_noise(&clean, 0.5, 99);
        let n2 = add_noise(&clean, 0.5, 99);
        assert!(n1.sigma > 0.0);
        for (x, y) in n1.images.iter().zip(&n2.images) {
            assert_eq!(x, y);
        }
        let n3 = add_noise(&clean, 0.5, 100);
        assert_ne!(n1.images[0], n3.images[0]);
    }

    #[test]
    fn huge_snr_barely_perturbs() {
        let d = phantom(5);
        let clean = generate(&d, 2, 1);
        let noisy = add_noise(&clean, 1e12, 3);
        for (c, n) in clean.images.iter().zip(&noisy.images) {
            let max_diff = (c - n).iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
            assert!(max_diff < 1e-4);
        }
    }

    #[test]
    fn empirical_snr_close_to_requested() {
        let d = phantom(6);
        let n = 1000;
        let clean = generate(&d, n, 2);
        let noisy = add_noise(&clean, 0.1, 11);
        let signal_power: f64 = clean
            .images
            .iter()
            .map(|im| im.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n as f64;
        let noise_power: f64 = clean
            .images
            .iter()
            .zip(&noisy.images)
            .map(|(c, s)| (c - s).iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n as f64;
        let snr = signal_power / noise_power;
        assert!(
            (0.095..=0.105).contains(&snr),
            "empirical snr {snr} outside [0.095, 0.105]"
        );
    }

    /// As N grows, the mean image approaches the rotational average of the
    /// density's projections, which is exactly rotationally symmetric. Pixels
    /// at identical radii therefore share their expectation; we check a few
    /// equal-radius pixel groups against 3-sigma bootstrap bounds.
    #[test]
    fn mean_image_is_statistically_symmetric() {
        let d = phantom(7);
        let n = 5000;
        let ds = generate(&d, n, 8);
        let g = ds.g() as i64;
        let r = (g - 1) / 2;
        // Pixel groups sharing an exact radius (same x^2 + y^2).
        let mut groups: std::collections::BTreeMap<i64, Vec<(usize, usize)>> =
            std::collections::BTreeMap::new();
        for y in -r..=r {
            for x in -r..=r {
                let q = x * x + y * y;
                if (1..=64).contains(&q) {
                    groups
                        .entry(q)
                        .or_default()
                        .push(((y + r) as usize, (x + r) as usize));
                }
            }
        }
        let mean = {
            let mut acc = Array2::<f64>::zeros((g as usize, g as usize));
            for im in &ds.images {
                acc += im;
            }
            acc / n as f64
        };
        // Bootstrap the mean image over image resamples.
        use rand::Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        let b = 64;
        let mut boot_means: Vec<Array2<f64>> = Vec::with_capacity(b);
        for _ in 0..b {
            let mut acc = Array2::<f64>::zeros((g as usize, g as usize));
            for _ in 0..n {
                acc += &ds.images[rng.gen_range(0..n)];
            }
            boot_means.push(acc / n as f64);
        }
        let mut checked = 0;
        let mut violations = 0;
        for pixels in groups.values() {
            if pixels.len() < 4 {
                continue;
            }
            let (p, q) = (pixels[0], pixels[1]);
            let observed = mean[p] - mean[q];
            let boot: Vec<f64> = boot_means.iter().map(|m| m[p] - m[q]).collect();
            let bm = boot.iter().sum::<f64>() / b as f64;
            let sd = (boot.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>() / (b - 1) as f64)
                .sqrt();
            checked += 1;
            if observed.abs() > 3.0 * sd.max(1e-12) {
                violations += 1;
            }
        }
        assert!(checked >= 20, "too few equal-radius groups: {checked}");
        // 3-sigma per pair; allow the expected rare excursions.
        assert!(
            violations as f64 <= 0.1 * checked as f64,
            "{violations} of {checked} pairs outside 3-sigma bootstrap bounds"
        );
    }
}
