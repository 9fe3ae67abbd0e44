use super::SmsnParams;
use crate::error::{Error, Result};
use crate::mixing::MixingDistribution;
use crate::numerics::special::{log_gamma, t_cdf};
use crate::numerics::{cholesky_solve, integrate_with, normal_cdf, Domain, QuadratureOptions, Vector};
use crate::scalar::Real;

/// Default absolute tolerance of the mixture integral.
pub const DEFAULT_DENSITY_TOL: f64 = 1e-10;

struct Kernel<T> {
    /// `(x - xi)' Omega^{-1} (x - xi)`
    q: T,
    /// `eta'(x - xi)`
    w: T,
    /// `-p/2 ln(2 pi) - 1/2 ln|Omega|`
    log_norm: T,
}

impl<T: Real> SmsnParams<T> {
    fn kernel(&self, x: &Vector<T>) -> Result<Kernel<T>> {
        let p = self.dim();
        if x.dim() != p {
            return Err(Error::DimMismatch { expected: p, got: x.dim() });
        }
        let r = x.sub(self.location());
        let q = r.dot(&cholesky_solve(self.scale_chol(), &r)?);
        let log_det: T = (0..p).map(|i| self.scale_chol()[(i, i)].ln()).sum::<T>() * T::of(2.0);
        let log_norm = -T::of_usize(p) * T::of(0.5) * (T::of(2.0) * T::PI()).ln() - T::of(0.5) * log_det;
        Ok(Kernel { q, w: self.eta().dot(&r), log_norm })
    }

    /// Skew-normal density `2 phi_p(x - xi; Omega) Phi(alpha' omega^{-1} (x - xi))`.
    pub fn density_sn(&self, x: &Vector<T>) -> Result<T> {
        if !matches!(self.mixing(), MixingDistribution::Degenerate) {
            return Err(Error::InvalidParameter("skew-normal density needs degenerate mixing".into()));
        }
        let k = self.kernel(x)?;
        Ok(T::of(2.0) * (k.log_norm - T::of(0.5) * k.q).exp() * normal_cdf(k.w))
    }

    /// Closed-form skew-t density `2 t_p(x; nu) T_1(w sqrt((nu + p)/(Q + nu)); nu + p)`.
    pub fn density_st(&self, x: &Vector<T>) -> Result<T> {
        let nu = match *self.mixing() {
            MixingDistribution::InvSqrtChiSq { nu } => nu,
            _ => return Err(Error::InvalidParameter("skew-t density needs chi-square mixing".into())),
        };
        let k = self.kernel(x)?;
        let p = T::of_usize(self.dim());
        let half = T::of(0.5);
        let log_t = log_gamma((nu + p) * half)? - log_gamma(nu * half)? + k.log_norm
            + p * half * (T::of(2.0) / nu).ln()
            - (nu + p) * half * (k.q / nu).ln_1p();
        let arg = k.w * ((nu + p) / (k.q + nu)).sqrt();
        Ok(T::of(2.0) * log_t.exp() * t_cdf(arg, nu + p)?)
    }

    /// Density by integrating the skew-normal kernel against the mixing law.
    pub fn density_smsn(&self, x: &Vector<T>, tol: T) -> Result<T> {
        let k = self.kernel(x)?;
        let p = T::of_usize(self.dim());
        let two = T::of(2.0);
        let half = T::of(0.5);
        let mixing = *self.mixing();
        // conditional density given S = s, without the mixing weight
        let conditional = |s: T| -> T {
            if !(s > T::zero()) || !s.is_finite() {
                return T::zero();
            }
            let lk = k.log_norm - p * s.ln() - half * k.q / (s * s);
            (two * lk.exp()) * normal_cdf(k.w / s)
        };
        // peak of s^{-p} exp(-q / 2 s^2)
        let kernel_peak = if k.q > T::zero() { Some((k.q / p).sqrt()) } else { None };
        match mixing {
            MixingDistribution::Degenerate => Ok(conditional(T::one())),
            _ => {
                let lower = match mixing {
                    MixingDistribution::InvPowUniform { .. } => T::one(),
                    _ => T::zero(),
                };
                let mut opts = QuadratureOptions::new(tol);
                opts.breakpoints = mixing_breakpoints(&mixing);
                if let Some(s) = kernel_peak {
                    opts.breakpoints.extend([half * s, s, two * s, T::of(8.0) * s]);
                }
                opts.breakpoints.retain(|&b| b > lower);
                let f = |s: T| match mixing.log_density(s) {
                    Some(ls) if s > T::zero() => conditional(s) * ls.exp(),
                    _ => T::zero(),
                };
                Ok(integrate_with(f, Domain::UpperHalfLine(lower), &opts)?.value)
            }
        }
    }

    /// Density by the closed form where one exists, the mixture integral otherwise.
    pub fn density(&self, x: &Vector<T>) -> Result<T> {
        match self.mixing() {
            MixingDistribution::Degenerate => self.density_sn(x),
            MixingDistribution::InvSqrtChiSq { .. } => self.density_st(x),
            _ => self.density_smsn(x, T::of(DEFAULT_DENSITY_TOL)),
        }
    }
}

/// Points around the bulk of the mixing law where the integrand bends.
fn mixing_breakpoints<T: Real>(mixing: &MixingDistribution<T>) -> Vec<T> {
    let (m1, m2) = match (mixing.moment(1), mixing.moment(2)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return [0.25, 0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|&s| T::of(s)).collect(),
    };
    let sd = (m2 - m1 * m1).max(T::zero()).sqrt();
    let mut points = vec![m1];
    for k in [0.5, 1.0, 2.0, 3.0, 6.0, 10.0] {
        let off = T::of(k) * sd;
        if m1 - off > T::zero() {
            points.push(m1 - off);
        }
        points.push(m1 + off);
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{quadrature_2d, toeplitz_corr, Matrix};
    use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::new(x.to_vec()).unwrap()
    }

    fn params2(alpha: [f64; 2], mixing: MixingDistribution<f64>) -> SmsnParams<f64> {
        SmsnParams::from_correlation(
            v(&[0.5, -0.3]),
            &v(&[1.5, 0.8]),
            &toeplitz_corr(0.4, 2).unwrap(),
            v(&alpha),
            mixing,
        )
        .unwrap()
    }

    #[test]
    fn univariate_skew_normal_matches_statrs() {
        let p = SmsnParams::new(v(&[0.0]), Matrix::identity(1), v(&[3.0]), MixingDistribution::Degenerate).unwrap();
        let n = Normal::new(0.0, 1.0).unwrap();
        for &x in &[-2.0, -0.3, 0.0, 0.7, 2.5] {
            let expected = 2.0 * n.pdf(x) * n.cdf(3.0 * x);
            let got = p.density_sn(&v(&[x])).unwrap();
            assert!((got - expected).abs() < 1e-10 * expected.max(1e-300), "{x}: {got} vs {expected}");
        }
        assert!((p.density_sn(&v(&[0.0])).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn univariate_skew_t_symmetric_matches_statrs() {
        let p = SmsnParams::new(v(&[0.0]), Matrix::identity(1), v(&[0.0]), MixingDistribution::skew_t(5.0).unwrap())
            .unwrap();
        let t = StudentsT::new(0.0, 1.0, 5.0).unwrap();
        for &x in &[-4.0, -1.0, 0.0, 0.5, 3.0] {
            let got = p.density_st(&v(&[x])).unwrap();
            assert!((got - t.pdf(x)).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn univariate_skew_t_oracle() {
        // 2 t(x; nu) T(alpha x sqrt((nu+1)/(x^2+nu)); nu+1)
        let nu = 4.0;
        let p = SmsnParams::new(v(&[0.0]), Matrix::identity(1), v(&[2.0]), MixingDistribution::skew_t(nu).unwrap())
            .unwrap();
        let t = StudentsT::new(0.0, 1.0, nu).unwrap();
        let t1 = StudentsT::new(0.0, 1.0, nu + 1.0).unwrap();
        for &x in &[-2.0, -0.5, 0.3, 1.0, 4.0] {
            let expected = 2.0 * t.pdf(x) * t1.cdf(2.0 * x * ((nu + 1.0) / (x * x + nu)).sqrt());
            let got = p.density_st(&v(&[x])).unwrap();
            assert!((got - expected).abs() < 1e-9 * expected, "{x}: {got} vs {expected}");
        }
    }

    #[test]
    fn mixture_integral_matches_closed_forms() {
        let st = params2([3.0, -1.0], MixingDistribution::skew_t(4.0).unwrap());
        let sn = params2([3.0, -1.0], MixingDistribution::Degenerate);
        for x in [[0.0, 0.0], [0.5, -0.3], [2.0, 1.0], [-1.0, 0.5], [4.0, -2.0]] {
            let x = v(&x);
            let closed = st.density_st(&x).unwrap();
            let integral = st.density_smsn(&x, 1e-12).unwrap();
            assert!((closed - integral).abs() <= 1e-8 * closed.max(1e-12), "{x:?}: {closed} vs {integral}");
            let a = sn.density_sn(&x).unwrap();
            assert_eq!(a, sn.density_smsn(&x, 1e-12).unwrap());
        }
    }

    #[test]
    fn large_nu_approaches_skew_normal() {
        let st = params2([2.0, 1.0], MixingDistribution::skew_t(1e6).unwrap());
        let sn = params2([2.0, 1.0], MixingDistribution::Degenerate);
        for x in [[0.0, 0.0], [1.0, -0.5], [2.5, 0.5]] {
            let x = v(&x);
            let a = st.density_st(&x).unwrap();
            let b = sn.density_sn(&x).unwrap();
            assert!((a - b).abs() < 1e-5 * b.max(1e-3));
        }
    }

    #[test]
    fn symmetric_is_twice_half() {
        // alpha = 0 reduces each density to its symmetric parent
        let sn = params2([0.0, 0.0], MixingDistribution::Degenerate);
        let x = v(&[1.0, 0.0]);
        let k = sn.kernel(&x).unwrap();
        let sym = (k.log_norm - 0.5 * k.q).exp();
        assert!((sn.density_sn(&x).unwrap() - sym).abs() < 1e-16);
    }

    fn integrates_to_one(params: &SmsnParams<f64>, tol: f64) {
        let f = |a: f64, b: f64| params.density(&v(&[a, b])).unwrap();
        let total = quadrature_2d(f, Domain::Line, Domain::Line, 1e-8).unwrap().value;
        assert!((total - 1.0).abs() < tol, "{}: {total}", params.mixing().label());
    }

    #[test]
    fn bivariate_densities_integrate_to_one() {
        integrates_to_one(&params2([3.0, -1.0], MixingDistribution::Degenerate), 1e-6);
        integrates_to_one(&params2([3.0, -1.0], MixingDistribution::skew_t(4.0).unwrap()), 1e-5);
        integrates_to_one(&params2([3.0, 3.0], MixingDistribution::skew_t(4.0).unwrap()), 1e-5);
    }

    #[test]
    #[ignore = "slow: nested quadrature over a mixture integral"]
    fn bivariate_mixture_densities_integrate_to_one() {
        integrates_to_one(&params2([1.0, 2.0], MixingDistribution::skew_double_exponential(2).unwrap()), 1e-5);
        integrates_to_one(&params2([1.0, 2.0], MixingDistribution::skew_slash(3.0).unwrap()), 1e-5);
    }

    #[test]
    fn univariate_mixture_densities_integrate_to_one() {
        for mixing in [
            MixingDistribution::skew_double_exponential(1).unwrap(),
            MixingDistribution::skew_slash(2.0).unwrap(),
            MixingDistribution::skew_slash(1.5).unwrap(),
            MixingDistribution::skew_t(1.0).unwrap(),
        ] {
            let p = SmsnParams::new(v(&[0.3]), Matrix::from_rows(&[vec![2.0]]).unwrap(), v(&[-2.0]), mixing).unwrap();
            let f = |x: f64| p.density_smsn(&v(&[x]), 1e-12).unwrap();
            let mut opts = QuadratureOptions::new(1e-9);
            opts.breakpoints = vec![-5.0, -1.0, 0.3, 1.0];
            let total = integrate_with(f, Domain::Line, &opts).unwrap().value;
            assert!((total - 1.0).abs() < 1e-6, "{}: {total}", p.mixing().label());
        }
    }

    #[test]
    fn skew_slash_reference_values() {
        // independent adaptive quadrature over s in [1, inf)
        let p = SmsnParams::new(v(&[0.3]), Matrix::from_rows(&[vec![2.0]]).unwrap(), v(&[-2.0]), MixingDistribution::skew_slash(2.0).unwrap())
            .unwrap();
        for (x, expected) in [
            (-1000.0, 3.915436397261256e-9),
            (-100.0, 3.883901265701511e-6),
            (-10.0, 3.5864047902363543e-3),
            (0.0, 0.2316606294243464),
            (1.0, 0.08207274136706313),
            (10.0, 8.879264830631353e-5),
        ] {
            let got = p.density_smsn(&v(&[x]), 1e-14).unwrap();
            assert!((got - expected).abs() < 1e-7 * expected, "{x}: {got} vs {expected}");
        }
    }

    #[test]
    fn density_at_location_is_finite() {
        for mixing in [
            MixingDistribution::skew_double_exponential(2).unwrap(),
            MixingDistribution::skew_slash(2.0).unwrap(),
            MixingDistribution::skew_t(3.0).unwrap(),
        ] {
            let p = params2([1.0, 1.0], mixing);
            let d = p.density_smsn(p.location(), 1e-10).unwrap();
            assert!(d.is_finite() && d > 0.0);
        }
    }

    #[test]
    fn wrong_family_and_dimension() {
        let sn = params2([1.0, 0.0], MixingDistribution::Degenerate);
        assert!(sn.density_st(&v(&[0.0, 0.0])).is_err());
        assert!(matches!(sn.density_sn(&v(&[0.0])), Err(Error::DimMismatch { .. })));
        let st = params2([1.0, 0.0], MixingDistribution::skew_t(3.0).unwrap());
        assert!(st.density_sn(&v(&[0.0, 0.0])).is_err());
    }
}
