//! Discretized spherical Bessel transforms between spatial and Fourier
//! feature domains.
//!
//! In the normalized real representation the forward kernel is
//! `Q_l(v_i, u_j) = 4 pi j_l(v_i u_j) v_i^2 q_i` (radial quadrature weights
//! `q_i`), giving `A_l = Q_l^T B_l` and `C_l = Q_l^T E_l Q_l`; the backward
//! kernel is `R_l(v_i, u_j) = j_l(v_i u_j) u_j^2 t_j / (2 pi^2)` (frequency
//! weights `t_j`), giving `B_l = R_l A_l` and `E_l = R_l C_l R_l^T`. The
//! pair inverts on inputs band-limited inside the frequency grid.

use super::FeatureError;
use crate::mathcore::{spherical_j_sequence, QuadratureRule};
use ndarray::Array2;

#[derive(Debug, Clone)]
pub struct BesselOperator {
    l_max: usize,
    /// Forward kernels, one `V x U` matrix per degree.
    forward: Vec<Array2<f64>>,
    /// Backward kernels, one `V x U` matrix per degree.
    backward: Vec<Array2<f64>>,
}

impl BesselOperator {
    pub fn new(r: &QuadratureRule, k: &QuadratureRule, l_max: usize) -> Self {
        let v = r.len();
        let u = k.len();
        let four_pi = 4.0 * std::f64::consts::PI;
        let inv_two_pi2 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
        let mut forward = vec![Array2::zeros((v, u)); l_max + 1];
        let mut backward = vec![Array2::zeros((v, u)); l_max + 1];
        for (i, (&rv, &qw)) in r.nodes.iter().zip(&r.weights).enumerate() {
            for (j, (&kv, &tw)) in k.nodes.iter().zip(&k.weights).enumerate() {
                let js = spherical_j_sequence(l_max, rv * kv);
                for (l, &jl) in js.iter().enumerate() {
                    forward[l][(i, j)] = four_pi * jl * rv * rv * qw;
                    backward[l][(i, j)] = inv_two_pi2 * jl * kv * kv * tw;
                }
            }
        }
        BesselOperator {
            l_max,
            forward,
            backward,
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Forward kernel `Q_l` (`V x U`).
    pub fn forward_kernel(&self, l: usize) -> &Array2<f64> {
        &self.forward[l]
    }

    fn kernel(&self, l: usize) -> Result<&Array2<f64>, FeatureError> {
        self.forward.get(l).ok_or_else(|| {
            FeatureError::DimensionMismatch(format!(
                "degree {l} beyond operator cutoff {}",
                self.l_max
            ))
        })
    }

    fn expect_rows(rows: usize, expect: usize, what: &str) -> Result<(), FeatureError> {
        if rows != expect {
            return Err(FeatureError::DimensionMismatch(format!(
                "{what} has {rows} rows, expected {expect}"
            )));
        }
        Ok(())
    }

    /// `A_l = Q_l^T B_l`: spatial coefficients to Fourier coefficients,
    /// `V x (2l+1)` to `U x (2l+1)`.
    pub fn coeff_to_fourier(&self, b_l: &Array2<f64>, l: usize) -> Result<Array2<f64>, FeatureError> {
        let q = self.kernel(l)?;
        Self::expect_rows(b_l.nrows(), q.nrows(), "B_l")?;
        Ok(q.t().dot(b_l))
    }

    /// `B_l = R_l A_l`: Fourier coefficients to spatial coefficients.
    pub fn coeff_to_spatial(&self, a_l: &Array2<f64>, l: usize) -> Result<Array2<f64>, FeatureError> {
        self.kernel(l)?;
        let r = &self.backward[l];
        Self::expect_rows(a_l.nrows(), r.ncols(), "A_l")?;
        Ok(r.dot(a_l))
    }

    /// `C_l = Q_l^T E_l Q_l`.
    pub fn spatial_to_fourier(&self, e_l: &Array2<f64>, l: usize) -> Result<Array2<f64>, FeatureError> {
        let q = self.kernel(l)?;
        Self::expect_rows(e_l.nrows(), q.nrows(), "E_l")?;
        if e_l.ncols() != e_l.nrows() {
            return Err(FeatureError::DimensionMismatch("E_l must be square".into()));
        }
        Ok(q.t().dot(&e_l.dot(q)))
    }

    /// `E_l = R_l C_l R_l^T`, applied column- then row-wise.
    pub fn fourier_to_spatial(&self, c_l: &Array2<f64>, l: usize) -> Result<Array2<f64>, FeatureError> {
        self.kernel(l)?;
        let r = &self.backward[l];
        Self::expect_rows(c_l.nrows(), r.ncols(), "C_l")?;
        if c_l.ncols() != c_l.nrows() {
            return Err(FeatureError::DimensionMismatch("C_l must be square".into()));
        }
        Ok(r.dot(&c_l.dot(&r.t())))
    }
}
