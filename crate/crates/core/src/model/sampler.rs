use super::SmsnParams;
use crate::error::Result;
use crate::numerics::{cholesky, Matrix, RngStream, Vector};
use crate::scalar::Real;

/// Draws from an SMSN law through the selection representation:
/// `(U0, U) ~ N_{p+1}(0, [[1, delta'], [delta, corr]])`, `Z = U` if `U0 > 0` else `-U`.
#[derive(Clone, Debug)]
pub struct SmsnSampler<T> {
    params: SmsnParams<T>,
    /// Lower Cholesky factor of the `(p+1) x (p+1)` augmented correlation.
    chol: Matrix<T>,
}

impl<T: Real> SmsnSampler<T> {
    pub fn new(params: &SmsnParams<T>) -> Result<Self> {
        let p = params.dim();
        let delta = params.delta();
        let corr = params.correlation();
        let augmented = Matrix::from_fn(p + 1, p + 1, |i, j| match (i, j) {
            (0, 0) => T::one(),
            (0, j) => delta[j - 1],
            (i, 0) => delta[i - 1],
            (i, j) => corr[(i - 1, j - 1)],
        });
        Ok(Self { params: params.clone(), chol: cholesky(&augmented)? })
    }

    pub fn params(&self) -> &SmsnParams<T> {
        &self.params
    }

    /// Writes one draw into `out` (length `p`), using `normals` (length `p + 1`) as scratch.
    pub fn draw_into(&self, rng: &mut RngStream, normals: &mut [T], out: &mut [T]) {
        let p = self.params.dim();
        debug_assert!(normals.len() == p + 1 && out.len() == p);
        for z in normals.iter_mut() {
            *z = T::of(rng.standard_normal());
        }
        let mut u0 = T::zero();
        for (k, &z) in normals.iter().enumerate() {
            u0 += self.chol[(0, k)] * z;
        }
        let sign = if u0 > T::zero() { T::one() } else { -T::one() };
        let s = self.params.mixing().draw(rng);
        let loc = self.params.location();
        let omega = self.params.scale_diag();
        for i in 0..p {
            let row = self.chol.row(i + 1);
            let mut ui = T::zero();
            for k in 0..=i + 1 {
                ui += row[k] * normals[k];
            }
            out[i] = loc[i] + omega[i] * s * sign * ui;
        }
    }

    pub fn draw(&self, rng: &mut RngStream) -> Vector<T> {
        let p = self.params.dim();
        let mut normals = vec![T::zero(); p + 1];
        let mut out = Vector::zeros(p);
        self.draw_into(rng, &mut normals, out.as_mut_slice());
        out
    }

    /// `n` draws as the rows of an `n x p` matrix.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Matrix<T> {
        let p = self.params.dim();
        let mut data = Matrix::zeros(n, p);
        let mut normals = vec![T::zero(); p + 1];
        for r in 0..n {
            self.draw_into(rng, &mut normals, data.row_mut(r));
        }
        data
    }
}

impl<T: Real> SmsnParams<T> {
    pub fn sampler(&self) -> Result<SmsnSampler<T>> {
        SmsnSampler::new(self)
    }

    /// `n` draws as the rows of an `n x p` matrix.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Matrix<T>> {
        Ok(self.sampler()?.sample(n, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::MixingDistribution;
    use crate::numerics::{integrate_with, toeplitz_corr, Domain, QuadratureOptions};

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::new(x.to_vec()).unwrap()
    }

    fn params(mixing: MixingDistribution<f64>) -> SmsnParams<f64> {
        SmsnParams::from_correlation(
            v(&[1.0, -2.0, 0.5]),
            &v(&[2.0, 1.0, 3.0]),
            &toeplitz_corr(0.5, 3).unwrap(),
            v(&[3.0, -1.0, 2.0]),
            mixing,
        )
        .unwrap()
    }

    fn sample_moments(x: &Matrix<f64>) -> (Vector<f64>, Matrix<f64>) {
        let (n, p) = (x.rows(), x.cols());
        let mean = Vector::from_fn(p, |j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64);
        let cov = Matrix::from_fn(p, p, |a, b| {
            (0..n).map(|i| (x[(i, a)] - mean[a]) * (x[(i, b)] - mean[b])).sum::<f64>() / n as f64
        });
        (mean, cov)
    }

    #[test]
    fn moments_match_theory() {
        let n = 200_000;
        for mixing in [
            MixingDistribution::Degenerate,
            MixingDistribution::skew_t(10.0).unwrap(),
            MixingDistribution::skew_double_exponential(3).unwrap(),
            MixingDistribution::skew_slash(6.0).unwrap(),
        ] {
            let params = params(mixing);
            let d = params.derive().unwrap();
            let x = params.sample(n, &mut RngStream::new(17, 3)).unwrap();
            let (mean, cov) = sample_moments(&x);
            for j in 0..3 {
                let se = (d.covariance[(j, j)] / n as f64).sqrt();
                assert!((mean[j] - d.mean[j]).abs() < 5.0 * se, "{} mean {j}", mixing.label());
            }
            let rel = cov.sub(&d.covariance).max_abs() / d.covariance.max_abs();
            assert!(rel < 0.03, "{} covariance rel error {rel}", mixing.label());
        }
    }

    #[test]
    fn reproducible_by_seed() {
        let p = params(MixingDistribution::skew_t(5.0).unwrap());
        let a = p.sample(50, &mut RngStream::new(1, 0)).unwrap();
        let b = p.sample(50, &mut RngStream::new(1, 0)).unwrap();
        let c = p.sample(50, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    fn ks_critical(n: usize, m: usize) -> f64 {
        // alpha = 0.001
        1.949 * ((n + m) as f64 / (n * m) as f64).sqrt()
    }

    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    /// Inverse-CDF draws from a univariate density by tabulating its CDF.
    fn inverse_cdf_draws(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, rng: &mut RngStream) -> Vec<f64> {
        let grid = 4000;
        let h = (hi - lo) / grid as f64;
        let mut cdf = vec![0.0];
        for k in 0..grid {
            let a = lo + k as f64 * h;
            let mut opts = QuadratureOptions::new(1e-12);
            opts.max_intervals = 50;
            let m = integrate_with(&pdf, Domain::Finite(a, a + h), &opts).unwrap().value;
            cdf.push(cdf[k] + m);
        }
        let total = cdf[grid];
        (0..n)
            .map(|_| {
                let u = rng.open01() * total;
                let k = cdf.partition_point(|&c| c < u).clamp(1, grid);
                let frac = (u - cdf[k - 1]) / (cdf[k] - cdf[k - 1]).max(1e-300);
                lo + (k as f64 - 1.0 + frac) * h
            })
            .collect()
    }

    #[test]
    fn projections_match_univariate_density() {
        let n = 20_000;
        let dir = v(&[0.6, -0.3, 0.74]);
        for mixing in [
            MixingDistribution::Degenerate,
            MixingDistribution::skew_t(6.0).unwrap(),
            MixingDistribution::skew_slash(4.0).unwrap(),
        ] {
            let params = params(mixing);
            let x = params.sample(n, &mut RngStream::new(5, 0)).unwrap();
            let proj: Vec<f64> = (0..n).map(|i| dir.dot(&Vector::new(x.row(i).to_vec()).unwrap())).collect();
            let pp = params.projection_params(&dir).unwrap();
            let uni = SmsnParams::new(
                v(&[dir.dot(params.location())]),
                Matrix::from_rows(&[vec![pp.omega_d]]).unwrap(),
                v(&[pp.alpha_d]),
                mixing,
            )
            .unwrap();
            let sd = pp.omega_d.sqrt();
            let centre = uni.location()[0];
            let reference = inverse_cdf_draws(
                |y| uni.density_smsn(&v(&[y]), 1e-12).unwrap(),
                centre - 40.0 * sd,
                centre + 40.0 * sd,
                n,
                &mut RngStream::new(6, 0),
            );
            let d = ks_two_sample(proj, reference);
            assert!(d < ks_critical(n, n), "{}: KS {d}", mixing.label());
        }
    }
}
