//! Analytic 2x2 covariance calculus for Gaussian probes and measurements.
//!
//! Pure Gaussian Wigner functions have covariance determinant 1/4; the
//! outcome likelihood then has covariance Sigma_rho + Sigma_E, and the
//! posterior covariance is the harmonic mean of that with the isotropic
//! prior (v/2) I. Everything here is exact arithmetic on 2x2 matrices.

use crate::error::{Error, Result};

/// Symmetric positive-definite 2x2 matrix in quadrature-variance units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance2 {
    xx: f64,
    xy: f64,
    yy: f64,
}

impl Covariance2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Result<Self> {
        let m = Self { xx, xy, yy };
        if !(xx.is_finite() && xy.is_finite() && yy.is_finite()) {
            return Err(Error::InvalidInput("covariance entries must be finite".into()));
        }
        let (lo, _) = m.eigenvalues();
        if lo <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "min eigenvalue {lo:.3e} for [[{xx}, {xy}], [{xy}, {yy}]]"
            )));
        }
        Ok(m)
    }

    /// Validates a full 2x2 matrix, requiring symmetry within 1e-12.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        let asym = (m[0][1] - m[1][0]).abs();
        let scale = m[0][1].abs().max(m[1][0].abs()).max(1.0);
        if asym > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "covariance not symmetric: off-diagonal mismatch {asym:.3e}"
            )));
        }
        Self::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }

    pub fn isotropic(var: f64) -> Result<Self> {
        Self::new(var, 0.0, var)
    }

    pub fn diagonal(xx: f64, yy: f64) -> Result<Self> {
        Self::new(xx, 0.0, yy)
    }

    /// Wigner covariance of a pure Gaussian state squeezed along the axes:
    /// eigenvalues a/2 and 1/(2a), so the determinant is 1/4.
    pub fn squeezed(a: f64) -> Result<Self> {
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::InvalidInput(format!(
                "squeeze parameter must be positive, got {a}"
            )));
        }
        Self::diagonal(0.5 * a, 0.5 / a)
    }

    pub fn xx(&self) -> f64 {
        self.xx
    }

    pub fn xy(&self) -> f64 {
        self.xy
    }

    pub fn yy(&self) -> f64 {
        self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let disc = half_diff.hypot(self.xy);
        (half_tr - disc, half_tr + disc)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            xx: self.xx + other.xx,
            xy: self.xy + other.xy,
            yy: self.yy + other.yy,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() < 1e-300 {
            return Err(Error::NotPositiveDefinite(
                "singular covariance cannot be inverted".into(),
            ));
        }
        Ok(Self {
            xx: self.yy / det,
            xy: -self.xy / det,
            yy: self.xx / det,
        })
    }

    /// Quadratic form q^T Sigma^{-1} q.
    pub fn mahalanobis_sq(&self, qx: f64, qy: f64) -> f64 {
        let det = self.det();
        (self.yy * qx * qx - 2.0 * self.xy * qx * qy + self.xx * qy * qy) / det
    }
}

/// Lower bound on the post-selected error when probe and measurement are
/// restricted to classical (coherent) states: 2v/(v + 2).
pub fn classical_bound(v: f64) -> Result<f64> {
    check_prior_variance(v)?;
    Ok(2.0 * v / (v + 2.0))
}

/// Lower bound on the post-selected error over all Gaussian states and
/// operations: v/2 below v = 2, the classical bound above. Continuous at 2.
pub fn gaussian_bound(v: f64) -> Result<f64> {
    check_prior_variance(v)?;
    if v < 2.0 {
        Ok(0.5 * v)
    } else {
        Ok(2.0 * v / (v + 2.0))
    }
}

fn check_prior_variance(v: f64) -> Result<()> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidInput(format!(
            "prior variance must be positive, got {v}"
        )));
    }
    Ok(())
}

/// Posterior covariance for Gaussian probe/measurement covariances and the
/// isotropic prior: Sigma_post^{-1} = (Sigma_rho + Sigma_E)^{-1} + (2/v) I.
pub fn gaussian_posterior_cov(
    sigma_rho: &Covariance2,
    sigma_e: &Covariance2,
    v: f64,
) -> Result<Covariance2> {
    check_prior_variance(v)?;
    let likelihood = sigma_rho.add(sigma_e);
    let mut prec = likelihood.inverse()?;
    prec.xx += 2.0 / v;
    prec.yy += 2.0 / v;
    prec.inverse()
}

/// Post-selected error for axis-squeezed probe and measurement whose summed
/// likelihood covariance has eigenvalues a and 1/a:
/// v' = 1/(2/v + a) + 1/(2/v + 1/a).
pub fn squeeze_scan_vp(a: f64, v: f64) -> f64 {
    debug_assert!(a > 0.0 && v > 0.0);
    let two_over_v = 2.0 / v;
    1.0 / (two_over_v + a) + 1.0 / (two_over_v + 1.0 / a)
}

/// One point of the squeezing scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeScanPoint {
    pub a: f64,
    pub v: f64,
    pub v_prime: f64,
}

impl SqueezeScanPoint {
    pub fn compute(a: f64, v: f64) -> Result<Self> {
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
        }
        check_prior_variance(v)?;
        Ok(Self {
            a,
            v,
            v_prime: squeeze_scan_vp(a, v),
        })
    }
}

/// det(A + B) >= det A + det B + 2 sqrt(det A det B) for positive-definite
/// 2x2 matrices. Returns whether the slack clears -1e-12, and the slack.
pub fn det_inequality_holds(a: &Covariance2, b: &Covariance2) -> (bool, f64) {
    let lhs = a.add(b).det();
    let rhs = a.det() + b.det() + 2.0 * (a.det() * b.det()).sqrt();
    let slack = lhs - rhs;
    (slack >= -1e-12, slack)
}
