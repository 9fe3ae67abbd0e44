//! The scalar mixing variable `S` of a scale mixture of skew-normals, its raw
//! moments and the moment functionals that govern the skewness objective.

use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::numerics::special::log_gamma;
use crate::numerics::{RngStream, Vector};
use crate::scalar::Real;

/// Slack used when comparing the two sides of the moment condition.
pub const MOMENT_CONDITION_SLACK: f64 = 1e-12;

/// Distribution `H` of the non-negative mixing scalar `S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MixingDistribution<T> {
    /// `S = 1` almost surely (skew-normal).
    Degenerate,
    /// `S = V^{-1/2}` with `V ~ chi^2_nu / nu` (skew-t).
    InvSqrtChiSq { nu: T },
    /// `S = W^{1/2}` with `W ~ Gamma(shape = (dim + 1) / 2, scale = 8)`
    /// (skew double exponential in dimension `dim`).
    SqrtGamma { dim: usize },
    /// `S = U^{-1/q}` with `U ~ Uniform(0, 1)` (skew-slash).
    InvPowUniform { q: T },
}

/// Coefficients `a`, `b`, `c` of the projected skewness objective.
///
/// `a = (4/pi) E(S)^3 - E(S^3)`, `b = E(S) E(S^2) - E(S^3)`,
/// `c = (2/pi) E(S)^2 / E(S^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

/// Outcome of checking `(4/pi) E(S)^2 >= E(S^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentCondition<T> {
    pub holds: bool,
    /// `(4/pi) E(S)^2`
    pub lhs: T,
    /// `E(S^2)`
    pub rhs: T,
}

impl<T: Real> MixingDistribution<T> {
    pub fn degenerate() -> Self {
        Self::Degenerate
    }

    pub fn skew_t(nu: T) -> Result<Self> {
        if !(nu > T::zero()) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("skew-t needs nu > 0, got {nu}")));
        }
        Ok(Self::InvSqrtChiSq { nu })
    }

    pub fn skew_double_exponential(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("skew double exponential needs dim >= 1".into()));
        }
        Ok(Self::SqrtGamma { dim })
    }

    pub fn skew_slash(q: T) -> Result<Self> {
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("skew-slash needs q > 0, got {q}")));
        }
        Ok(Self::InvPowUniform { q })
    }

    /// Short human-readable label, e.g. `skew-t(nu=4)`.
    pub fn label(&self) -> String {
        match self {
            Self::Degenerate => "skew-normal".to_string(),
            Self::InvSqrtChiSq { nu } => format!("skew-t(nu={nu})"),
            Self::SqrtGamma { dim } => format!("skew-double-exponential(p={dim})"),
            Self::InvPowUniform { q } => format!("skew-slash(q={q})"),
        }
    }

    /// Whether `E(S^k)` is finite.
    pub fn moment_exists(&self, k: u32) -> bool {
        match *self {
            Self::Degenerate | Self::SqrtGamma { .. } => true,
            Self::InvSqrtChiSq { nu } => nu > T::of(k as f64),
            Self::InvPowUniform { q } => q > T::of(k as f64),
        }
    }

    /// Raw moment `E(S^k)`; gamma ratios are evaluated in log space.
    pub fn moment(&self, k: u32) -> Result<T> {
        if !self.moment_exists(k) {
            return Err(Error::MomentUndefined { order: k, law: self.label() });
        }
        let kf = T::of(k as f64);
        let half = T::of(0.5);
        Ok(match *self {
            Self::Degenerate => T::one(),
            Self::InvSqrtChiSq { nu } => {
                let log_ratio = log_gamma((nu - kf) * half)? - log_gamma(nu * half)?;
                (kf * half * (nu * half).ln() + log_ratio).exp()
            }
            Self::SqrtGamma { dim } => {
                let shape = T::of_usize(dim + 1) * half;
                let log_ratio = log_gamma(shape + kf * half)? - log_gamma(shape)?;
                (kf * half * T::of(8.0).ln() + log_ratio).exp()
            }
            Self::InvPowUniform { q } => q / (q - kf),
        })
    }

    pub fn coefficients(&self) -> Result<SkewCoefficients<T>> {
        let m1 = self.moment(1)?;
        let m2 = self.moment(2)?;
        let m3 = self.moment(3)?;
        let four_over_pi = T::of(4.0) / T::PI();
        Ok(SkewCoefficients {
            a: four_over_pi * m1 * m1 * m1 - m3,
            b: m1 * m2 - m3,
            c: T::of(2.0) / T::PI() * m1 * m1 / m2,
        })
    }

    /// Evaluates the moment condition `(4/pi) E(S)^2 >= E(S^2)`.
    pub fn check_moment_condition(&self) -> Result<MomentCondition<T>> {
        let m1 = self.moment(1)?;
        let m2 = self.moment(2)?;
        let lhs = T::of(4.0) / T::PI() * m1 * m1;
        Ok(MomentCondition { holds: lhs - m2 >= -T::of(MOMENT_CONDITION_SLACK), lhs, rhs: m2 })
    }

    /// One draw of `S`.
    pub fn draw(&self, rng: &mut RngStream) -> T {
        let s = match *self {
            Self::Degenerate => 1.0,
            Self::InvSqrtChiSq { nu } => {
                let nu = nu.as_f64();
                let v = Gamma::new(0.5 * nu, 2.0 / nu).expect("validated nu").sample(rng);
                v.sqrt().recip()
            }
            Self::SqrtGamma { dim } => {
                let w = Gamma::new(0.5 * (dim as f64 + 1.0), 8.0).expect("validated dim").sample(rng);
                w.sqrt()
            }
            Self::InvPowUniform { q } => rng.open01().powf(-1.0 / q.as_f64()),
        };
        T::of(s)
    }

    /// `n` independent draws of `S`.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vector<T> {
        Vector::from_fn(n, |_| self.draw(rng))
    }

    /// Log density of `S` at `s > 0` for the laws with a density on `(0, inf)`.
    pub(crate) fn log_density(&self, s: T) -> Option<T> {
        let half = T::of(0.5);
        let two = T::of(2.0);
        match *self {
            Self::InvSqrtChiSq { nu } => {
                // V = S^{-2} ~ Gamma(nu/2, rate nu/2); |dv/ds| = 2 s^{-3}
                let a = nu * half;
                let v = s.powi(-2);
                let log_fv = a * a.ln() + (a - T::one()) * v.ln() - a * v - log_gamma(a).ok()?;
                Some(log_fv + two.ln() - T::of(3.0) * s.ln())
            }
            Self::SqrtGamma { dim } => {
                // W = S^2 ~ Gamma((dim+1)/2, scale 8); |dw/ds| = 2 s
                let k = T::of_usize(dim + 1) * half;
                let w = s * s;
                let log_fw = (k - T::one()) * w.ln() - w / T::of(8.0) - log_gamma(k).ok()? - k * T::of(8.0).ln();
                Some(log_fw + two.ln() + s.ln())
            }
            Self::InvPowUniform { q } => {
                if s < T::one() {
                    None
                } else {
                    Some(q.ln() - (q + T::one()) * s.ln())
                }
            }
            Self::Degenerate => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `E(S^k)` for the double-exponential law in the form
    /// `2^{k/2} Γ(p/2) Γ(p+k) / (Γ(p) Γ((p+k)/2))`.
    fn sde_moment_gamma_form(p: usize, k: u32) -> f64 {
        let (p, k) = (p as f64, k as f64);
        let lg = |x: f64| log_gamma(x).unwrap();
        (0.5 * k * 2f64.ln() + lg(p / 2.0) + lg(p + k) - lg(p) - lg((p + k) / 2.0)).exp()
    }

    fn mc_mean(law: &MixingDistribution<f64>, k: i32, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed, 0);
        let xs: Vec<f64> = (0..n).map(|_| law.draw(&mut rng).powi(k)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn degenerate_moments() {
        let d = MixingDistribution::<f64>::Degenerate;
        assert_eq!(d.moment(3).unwrap(), 1.0);
        let c = d.coefficients().unwrap();
        assert!((c.a - (4.0 / PI - 1.0)).abs() < 1e-15);
        assert_eq!(c.b, 0.0);
        assert!((c.c - 2.0 / PI).abs() < 1e-15);
        assert!(d.check_moment_condition().unwrap().holds);
        assert_eq!(d.sample(5, &mut RngStream::new(0, 0)).as_slice(), &[1.0; 5]);
    }

    #[test]
    fn skew_t_second_moment() {
        let st = MixingDistribution::skew_t(4.0_f64).unwrap();
        assert!((st.moment(2).unwrap() - 2.0).abs() < 1e-13);
        let (mean, se) = mc_mean(&MixingDistribution::skew_t(20.0).unwrap(), 2, 1_000_000, 1);
        assert!((mean - 20.0 / 18.0).abs() < 3.0 * se, "mean={mean} se={se}");
        assert!(matches!(st.moment(4), Err(Error::MomentUndefined { order: 4, .. })));
        assert!(st.moment(3).is_ok());
    }

    #[test]
    fn skew_slash_first_moment() {
        let ssl = MixingDistribution::skew_slash(5.0_f64).unwrap();
        assert!((ssl.moment(1).unwrap() - 1.25).abs() < 1e-15);
        let (mean, se) = mc_mean(&ssl, 1, 1_000_000, 2);
        assert!((mean - 1.25).abs() < 3.0 * se);
        assert!(ssl.moment(5).is_err());
    }

    #[test]
    fn double_exponential_closed_forms_agree() {
        // p = 1, k = 2: 2 Γ(1/2) Γ(3) / (Γ(1) Γ(3/2)) = 8
        let sde = MixingDistribution::<f64>::skew_double_exponential(1).unwrap();
        assert!((sde.moment(2).unwrap() - 8.0).abs() < 1e-12);
        assert!((sde_moment_gamma_form(1, 2) - 8.0).abs() < 1e-12);
        for p in 1..=20 {
            let law = MixingDistribution::<f64>::skew_double_exponential(p).unwrap();
            for k in 1..=4 {
                let ours = law.moment(k).unwrap();
                let other = sde_moment_gamma_form(p, k);
                assert!(((ours - other) / other).abs() < 1e-11, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn double_exponential_second_moment_monte_carlo() {
        let sde = MixingDistribution::<f64>::skew_double_exponential(1).unwrap();
        let (mean, se) = mc_mean(&sde, 2, 1_000_000, 3);
        assert!((mean - 8.0).abs() < 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn sign_of_a() {
        let a = |nu: f64| MixingDistribution::skew_t(nu).unwrap().coefficients().unwrap().a;
        assert!(a(8.0) < 0.0);
        assert!(a(9.0) >= 0.0);
        let a = |p| MixingDistribution::<f64>::skew_double_exponential(p).unwrap().coefficients().unwrap().a;
        assert!(a(4) < 0.0);
        assert!(a(5) >= 0.0);
    }

    #[test]
    fn moment_condition_examples() {
        let st = MixingDistribution::skew_t(4.0_f64).unwrap().check_moment_condition().unwrap();
        assert!(st.holds);
        assert!((st.lhs - 2.0).abs() < 1e-12 && (st.rhs - 2.0).abs() < 1e-12);
        assert!(st.lhs - st.rhs >= -1e-12);

        let q: f64 = 4.0;
        let ssl = MixingDistribution::skew_slash(q).unwrap().check_moment_condition().unwrap();
        assert!(ssl.holds);
        let g = (q - 1.0) * (q - 1.0) / (q * (q - 2.0));
        assert!((g - 9.0 / 8.0).abs() < 1e-15);
        assert!((ssl.rhs / (ssl.lhs * PI / 4.0) - g).abs() < 1e-14);

        // q = 3 violates the condition
        assert!(!MixingDistribution::skew_slash(3.0).unwrap().check_moment_condition().unwrap().holds);
        assert!(MixingDistribution::skew_t(2.0).unwrap().check_moment_condition().is_err());
    }

    #[test]
    fn log_convexity_and_b_nonpositive() {
        let mut laws = vec![MixingDistribution::<f64>::Degenerate];
        laws.extend((4..=100).map(|nu| MixingDistribution::skew_t(nu as f64).unwrap()));
        laws.extend((1..=20).map(|p| MixingDistribution::skew_double_exponential(p).unwrap()));
        laws.extend((4..=50).map(|q| MixingDistribution::skew_slash(q as f64).unwrap()));
        for law in &laws {
            for k in 1..=6u32 {
                if !law.moment_exists(k + 1) {
                    break;
                }
                let prev = if k == 1 { 1.0 } else { law.moment(k - 1).unwrap() };
                let cur = law.moment(k).unwrap();
                let next = law.moment(k + 1).unwrap();
                assert!(next * prev >= cur * cur * (1.0 - 1e-12), "{} k={k}", law.label());
            }
            let c = law.coefficients().unwrap();
            assert!(c.b <= 0.0);
            assert!(c.c > 0.0 && c.c <= 4.0 / PI);
            assert!(law.check_moment_condition().unwrap().holds, "{}", law.label());
        }
    }

    #[test]
    fn sampled_moments_match() {
        let laws = [
            MixingDistribution::skew_t(8.0).unwrap(),
            MixingDistribution::skew_double_exponential(3).unwrap(),
            MixingDistribution::skew_slash(10.0).unwrap(),
        ];
        for (i, law) in laws.iter().enumerate() {
            for k in 1..=3 {
                let (mean, se) = mc_mean(law, k, 1_000_000, 10 + i as u64);
                let exact = law.moment(k as u32).unwrap();
                assert!((mean - exact).abs() < 4.0 * se, "{} k={k}: {mean} vs {exact}", law.label());
            }
        }
    }

    #[test]
    fn draws_are_positive() {
        let mut rng = RngStream::new(5, 5);
        for law in [
            MixingDistribution::skew_t(4.0).unwrap(),
            MixingDistribution::skew_double_exponential(2).unwrap(),
            MixingDistribution::skew_slash(4.0).unwrap(),
        ] {
            assert!(law.sample(1000, &mut rng).iter().all(|&s: &f64| s > 0.0));
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(MixingDistribution::skew_t(0.0).is_err());
        assert!(MixingDistribution::skew_t(f64::NAN).is_err());
        assert!(MixingDistribution::<f64>::skew_double_exponential(0).is_err());
        assert!(MixingDistribution::skew_slash(-1.0).is_err());
    }

    #[test]
    fn scale_densities_integrate_to_one() {
        use crate::numerics::{quadrature, Domain};
        for law in [
            MixingDistribution::skew_t(6.0).unwrap(),
            MixingDistribution::skew_double_exponential(2).unwrap(),
        ] {
            let r = quadrature(|s: f64| if s > 0.0 { law.log_density(s).unwrap().exp() } else { 0.0 }, Domain::UpperHalfLine(0.0), 1e-10)
                .unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "{}", law.label());
        }
        let ssl = MixingDistribution::skew_slash(5.0).unwrap();
        let r = quadrature(|s: f64| ssl.log_density(s).map_or(0.0, f64::exp), Domain::UpperHalfLine(1.0), 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }
}
