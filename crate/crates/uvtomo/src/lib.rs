//! Unknown-view tomography by the method of moments.
//!
//! The library reconstructs a 3D density from 2D projection images taken at
//! unknown, uniformly distributed orientations. It never estimates the
//! per-image orientations; instead it extracts rotation-invariant moments
//! (a radial profile and per-degree spherical-harmonic autocorrelation
//! matrices) from the projection ensemble and fits a nonnegative
//! Gaussian-mixture density to them by alternating orthogonal-Procrustes
//! updates with simplex-constrained projected gradient descent (OMR-SC).
//!
//! Pipeline stages, each also exposed as a CLI subcommand:
//!
//! 1. [`density`] — parametric density maps (weighted isotropic Gaussian
//!    bumps on a pruned grid) with closed-form feature evaluation.
//! 2. [`simulate`] — projection datasets with hidden uniform rotations and
//!    SNR-controlled white Gaussian noise.
//! 3. [`features`] — polar Fourier slices, first moments, debiased
//!    autocorrelations, and the spherical Bessel transforms between the
//!    Fourier and spatial feature domains.
//! 4. [`solver`] — the OMR-SC engine (factorization, Procrustes, projected
//!    gradient descent, multi-start, ab-initio-then-refine).
//! 5. [`evaluate`] — Fourier shell correlation, resolution, correlation
//!    coefficient, handedness check.

pub mod cli;
pub mod density;
pub mod evaluate;
pub mod features;
pub mod io;
pub mod mathcore;
pub mod simulate;
pub mod solver;
