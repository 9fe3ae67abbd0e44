//! Directional skewness: the population index of a projection, its maximum
//! over directions, and the empirical maximal-skewness estimator.

mod estimator;

pub use estimator::{
    estimate_max_direction, sample_mean_cov, standardize, third_moment_matrix, EstimatorOptions, MaxSkewResult,
    ThirdMomentMatrix,
};

use crate::error::{Error, Result};
use crate::mixing::SkewCoefficients;
use crate::model::SmsnParams;
use crate::numerics::Vector;
use crate::scalar::Real;

/// Squared standardized third moment `(m3 / m2^{3/2})^2` with biased central moments.
pub fn gamma1_univariate<T: Real>(y: &[T]) -> Result<T> {
    if y.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 observations, got {}", y.len())));
    }
    let n = T::of_usize(y.len());
    let mean = y.iter().copied().sum::<T>() / n;
    let (mut m2, mut m3) = (T::zero(), T::zero());
    for &v in y {
        let r = v - mean;
        let r2 = r * r;
        m2 += r2;
        m3 += r2 * r;
    }
    m2 /= n;
    m3 /= n;
    if !(m2 > T::epsilon() * mean * mean) || m2 == T::zero() {
        return Err(Error::DegenerateSample("zero sample variance".into()));
    }
    Ok(m3 * m3 / (m2 * m2 * m2))
}

/// `h(t) = (2/pi) t (a t - 3 b omega_d)^2`, the squared skewness of a unit-variance projection
/// in terms of `t = (d'gamma)^2`.
pub fn h_objective<T: Real>(t: T, omega_d: T, coef: &SkewCoefficients<T>) -> Result<T> {
    if !(omega_d > T::zero()) {
        return Err(Error::InvalidParameter(format!("omega_d must be positive, got {omega_d}")));
    }
    // allow rounding at the upper end
    if !(t >= T::zero()) || t > omega_d * (T::one() + T::of(1e-12)) {
        return Err(Error::InvalidParameter(format!("t = {t} outside [0, {omega_d}]")));
    }
    let inner = coef.a * t - T::of(3.0) * coef.b * omega_d;
    Ok(T::of(2.0) / T::PI() * t * inner * inner)
}

/// Signed factor `d'gamma (a t - 3 b omega_d)` of the projection's third central moment.
fn third_moment_sign<T: Real>(dg: T, omega_d: T, coef: &SkewCoefficients<T>) -> T {
    let t = dg * dg;
    dg * (coef.a * t - T::of(3.0) * coef.b * omega_d)
}

/// Unit direction of maximal skewness and whether the moment condition
/// that guarantees the maximum holds for the mixing law.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticDirection<T> {
    pub direction: Vector<T>,
    pub condition_holds: bool,
}

/// `eta / ||eta||`, signed so that the projection has nonnegative third central moment.
pub fn analytic_max_direction<T: Real>(params: &SmsnParams<T>) -> Result<AnalyticDirection<T>> {
    let mut direction = params.eta().normalized().ok_or(Error::NoUniqueDirection)?;
    let condition_holds = match params.mixing().check_moment_condition() {
        Ok(c) => c.holds,
        Err(_) => false,
    };
    let dg = direction.dot(params.gamma());
    let sign = match params.mixing().coefficients() {
        Ok(coef) => third_moment_sign(dg, params.scale().quad_form(&direction), &coef),
        Err(_) => dg,
    };
    if sign < T::zero() {
        direction = direction.scale(-T::one());
    }
    Ok(AnalyticDirection { direction, condition_holds })
}

/// Maximal squared skewness `h(t*)` with `t* = gamma' Sigma^{-1} gamma` and
/// `d* = Sigma^{-1} gamma / sqrt(t*)`. Zero when `alpha = 0`.
pub fn analytic_max_skewness<T: Real>(params: &SmsnParams<T>) -> Result<T> {
    let coef = params.mixing().coefficients()?;
    if params.shape().is_zero() {
        return Ok(T::zero());
    }
    let derived = params.derive()?;
    let sig_inv_gamma = derived.sigma_inv_gamma()?;
    let t_star = params.gamma().dot(&sig_inv_gamma);
    if !(t_star > T::zero()) {
        return Ok(T::zero());
    }
    let d_star = sig_inv_gamma.scale(t_star.sqrt().recip());
    let omega_d = params.scale().quad_form(&d_star);
    h_objective(t_star.min(omega_d), omega_d, &coef)
}

/// Population squared skewness of `d'X`, for any non-zero `d`.
pub fn gamma1_population<T: Real>(params: &SmsnParams<T>, d: &Vector<T>) -> Result<T> {
    PopulationSkewness::new(params)?.gamma1(d)
}

/// Squared skewness of projections of one model, with the moment-dependent
/// quantities computed once.
#[derive(Clone, Debug)]
pub struct PopulationSkewness<'a, T> {
    params: &'a SmsnParams<T>,
    covariance: crate::numerics::Matrix<T>,
    coef: SkewCoefficients<T>,
}

impl<'a, T: Real> PopulationSkewness<'a, T> {
    pub fn new(params: &'a SmsnParams<T>) -> Result<Self> {
        let coef = params.mixing().coefficients()?;
        let covariance = params.derive()?.covariance;
        Ok(Self { params, covariance, coef })
    }

    pub fn gamma1(&self, d: &Vector<T>) -> Result<T> {
        if d.dim() != self.params.dim() {
            return Err(Error::DimMismatch { expected: self.params.dim(), got: d.dim() });
        }
        let var = self.covariance.quad_form(d);
        if !(var > T::zero()) {
            return Err(Error::InvalidParameter("projection direction must be non-zero".into()));
        }
        let unit = d.scale(var.sqrt().recip());
        let pp = self.params.projection_params(&unit)?;
        h_objective(pp.t, pp.omega_d, &self.coef)
    }
}
