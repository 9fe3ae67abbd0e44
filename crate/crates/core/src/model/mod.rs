//! Scale mixtures of skew-normal vectors: `X = xi + omega S Z` with
//! `Z ~ SN_p(0, corr, alpha)` and an independent mixing scalar `S`.

mod density;
pub mod json;
mod sampler;

pub use sampler::SmsnSampler;

use crate::error::{Error, Result};
use crate::mixing::MixingDistribution;
use crate::numerics::{cholesky, cholesky_solve, spd_inverse, spd_solve, Matrix, Vector};
use crate::scalar::Real;

const SYMMETRY_TOL: f64 = 1e-10;

/// Parameters `(xi, Omega, alpha, H)` of an SMSN distribution.
///
/// Construction validates the parameters and caches the moment-free derived
/// quantities (`omega`, the correlation matrix, `eta`, `delta` and `gamma`).
#[derive(Clone, Debug, PartialEq)]
pub struct SmsnParams<T> {
    location: Vector<T>,
    scale: Matrix<T>,
    shape: Vector<T>,
    mixing: MixingDistribution<T>,
    scale_chol: Matrix<T>,
    scale_diag: Vector<T>,
    correlation: Matrix<T>,
    eta: Vector<T>,
    delta: Vector<T>,
    gamma: Vector<T>,
}

/// Quantities that also depend on the first two mixing moments.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedParams<T> {
    /// Diagonal of `omega = (Omega ⊙ I)^{1/2}`.
    pub scale_diag: Vector<T>,
    /// `omega^{-1} Omega omega^{-1}`.
    pub correlation: Matrix<T>,
    /// `omega^{-1} alpha`.
    pub eta: Vector<T>,
    /// `corr alpha / sqrt(1 + alpha' corr alpha)`.
    pub delta: Vector<T>,
    /// `omega delta = Omega eta / sqrt(1 + eta' Omega eta)`.
    pub gamma: Vector<T>,
    /// `E(X) = xi + E(S) sqrt(2/pi) gamma`.
    pub mean: Vector<T>,
    /// `Cov(X) = E(S^2) Omega - (2/pi) E(S)^2 gamma gamma'`.
    pub covariance: Matrix<T>,
    /// `E(S)`.
    pub c1: T,
    /// `E(S^2)`.
    pub c2: T,
}

/// Parameters of the scalar projection `d'(X - xi) = S Z_0`, `Z_0 ~ SN_1(0, omega_d, alpha_d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionParams<T> {
    /// `d' Omega d`.
    pub omega_d: T,
    /// `d'gamma / sqrt(omega_d - (d'gamma)^2)`.
    pub alpha_d: T,
    /// `(d'gamma)^2 / omega_d`, in `[0, 1]`.
    pub delta0_sq: T,
    /// `(d'gamma)^2`.
    pub t: T,
}

impl<T: Real> SmsnParams<T> {
    pub fn new(location: Vector<T>, scale: Matrix<T>, shape: Vector<T>, mixing: MixingDistribution<T>) -> Result<Self> {
        let p = location.dim();
        if p == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if scale.rows() != p || scale.cols() != p {
            return Err(Error::DimMismatch { expected: p, got: scale.rows().max(scale.cols()) });
        }
        if shape.dim() != p {
            return Err(Error::DimMismatch { expected: p, got: shape.dim() });
        }
        if !scale.is_symmetric(T::of(SYMMETRY_TOL)) {
            return Err(Error::InvalidParameter("scale matrix must be symmetric".into()));
        }
        if let MixingDistribution::SqrtGamma { dim } = mixing {
            if dim != p {
                return Err(Error::InvalidParameter(format!(
                    "double exponential mixing law is tied to dimension {dim}, model has dimension {p}"
                )));
            }
        }
        let scale_chol = cholesky(&scale)?;
        let scale_diag = Vector::from_fn(p, |i| scale[(i, i)].sqrt());
        let correlation = Matrix::from_fn(p, p, |i, j| {
            if i == j {
                T::one()
            } else {
                scale[(i, j)] / (scale_diag[i] * scale_diag[j])
            }
        });
        let eta = Vector::from_fn(p, |i| shape[i] / scale_diag[i]);
        let corr_alpha = correlation.mul_vec(&shape);
        let denom = (T::one() + shape.dot(&corr_alpha)).sqrt();
        let delta = corr_alpha.scale(denom.recip());
        let gamma = Vector::from_fn(p, |i| scale_diag[i] * delta[i]);
        Ok(Self { location, scale, shape, mixing, scale_chol, scale_diag, correlation, eta, delta, gamma })
    }

    /// Builds `Omega = omega corr omega` from a diagonal scale and a correlation matrix.
    pub fn from_correlation(
        location: Vector<T>,
        scale_diag: &Vector<T>,
        correlation: &Matrix<T>,
        shape: Vector<T>,
        mixing: MixingDistribution<T>,
    ) -> Result<Self> {
        let p = scale_diag.dim();
        if correlation.rows() != p || correlation.cols() != p {
            return Err(Error::DimMismatch { expected: p, got: correlation.rows() });
        }
        if scale_diag.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidParameter("scale entries must be positive".into()));
        }
        let scale = Matrix::from_fn(p, p, |i, j| scale_diag[i] * correlation[(i, j)] * scale_diag[j]);
        Self::new(location, scale, shape, mixing)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.location.dim()
    }

    pub fn location(&self) -> &Vector<T> {
        &self.location
    }

    /// The scale matrix `Omega`.
    pub fn scale(&self) -> &Matrix<T> {
        &self.scale
    }

    /// The shape vector `alpha`.
    pub fn shape(&self) -> &Vector<T> {
        &self.shape
    }

    pub fn mixing(&self) -> &MixingDistribution<T> {
        &self.mixing
    }

    pub fn scale_diag(&self) -> &Vector<T> {
        &self.scale_diag
    }

    pub fn correlation(&self) -> &Matrix<T> {
        &self.correlation
    }

    /// `eta = omega^{-1} alpha`.
    pub fn eta(&self) -> &Vector<T> {
        &self.eta
    }

    pub fn delta(&self) -> &Vector<T> {
        &self.delta
    }

    /// `gamma = omega delta`.
    pub fn gamma(&self) -> &Vector<T> {
        &self.gamma
    }

    pub(crate) fn scale_chol(&self) -> &Matrix<T> {
        &self.scale_chol
    }

    /// Same location, scale and shape with a different mixing law.
    pub fn with_mixing(&self, mixing: MixingDistribution<T>) -> Result<Self> {
        Self::new(self.location.clone(), self.scale.clone(), self.shape.clone(), mixing)
    }

    /// Mean, covariance and the remaining derived parameters.
    pub fn derive(&self) -> Result<DerivedParams<T>> {
        let c1 = self.mixing.moment(1)?;
        let c2 = self.mixing.moment(2)?;
        let two_over_pi = T::of(2.0) / T::PI();
        let mean = self.location.add(&self.gamma.scale(c1 * two_over_pi.sqrt()));
        let covariance = self
            .scale
            .scale(c2)
            .sub(&Matrix::outer(&self.gamma, &self.gamma).scale(two_over_pi * c1 * c1));
        cholesky(&covariance)?;
        Ok(DerivedParams {
            scale_diag: self.scale_diag.clone(),
            correlation: self.correlation.clone(),
            eta: self.eta.clone(),
            delta: self.delta.clone(),
            gamma: self.gamma.clone(),
            mean,
            covariance,
            c1,
            c2,
        })
    }

    /// `Omega^{-1} v`.
    pub fn solve_scale(&self, v: &Vector<T>) -> Result<Vector<T>> {
        cholesky_solve(&self.scale_chol, v)
    }

    /// Parameters of the scalar projection along `d`.
    pub fn projection_params(&self, d: &Vector<T>) -> Result<ProjectionParams<T>> {
        if d.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: d.dim() });
        }
        if d.is_zero() {
            return Err(Error::InvalidParameter("projection direction must be non-zero".into()));
        }
        let omega_d = self.scale.quad_form(d);
        let dg = d.dot(&self.gamma);
        let t = dg * dg;
        let slack = omega_d - t;
        if !(slack > T::of(1e-12) * omega_d) {
            return Err(Error::DegenerateDirection);
        }
        Ok(ProjectionParams {
            omega_d,
            alpha_d: dg / slack.sqrt(),
            delta0_sq: (t / omega_d).min(T::one()),
            t,
        })
    }
}

impl<T: Real> DerivedParams<T> {
    /// `Sigma^{-1} gamma` by the closed form `Omega^{-1} gamma / (c2 - (2/pi) c1^2 gamma' Omega^{-1} gamma)`.
    pub fn sigma_inv_gamma_closed_form(&self, params: &SmsnParams<T>) -> Result<Vector<T>> {
        let omega_inv_gamma = params.solve_scale(&self.gamma)?;
        let q = self.gamma.dot(&omega_inv_gamma);
        let denom = self.c2 - T::of(2.0) / T::PI() * self.c1 * self.c1 * q;
        if !(denom > T::zero()) {
            return Err(Error::NotSpd);
        }
        Ok(omega_inv_gamma.scale(denom.recip()))
    }

    /// `Sigma^{-1}` assembled from `Omega^{-1}` by the Sherman–Morrison rank-one update.
    pub fn sigma_inverse_sherman_morrison(&self, params: &SmsnParams<T>) -> Result<Matrix<T>> {
        let omega_inv = spd_inverse(params.scale())?;
        let u = omega_inv.mul_vec(&self.gamma);
        let q = self.gamma.dot(&u);
        let denom = T::PI() / T::of(2.0) * self.c2 / (self.c1 * self.c1) - q;
        if !(denom > T::zero()) {
            return Err(Error::NotSpd);
        }
        Ok(omega_inv.add(&Matrix::outer(&u, &u).scale(denom.recip())).scale(self.c2.recip()))
    }

    /// `Sigma^{-1} gamma` by a direct SPD solve.
    pub fn sigma_inv_gamma(&self) -> Result<Vector<T>> {
        spd_solve(&self.covariance, &self.gamma)
    }
}
