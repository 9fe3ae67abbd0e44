use serde::{Deserialize, Serialize};

use super::gamma1_univariate;
use crate::error::{Error, Result};
use crate::numerics::{dominant_left_singular_vector, inv_sqrt_spd, Matrix, RngStream, Vector};
use crate::scalar::Real;

/// Flattened third moment of standardized data: a `p x p^2` matrix whose
/// entry `(a, j p + b)` is `(1/n) sum_i u_ia u_ib u_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThirdMomentMatrix<T> {
    pub data: Matrix<T>,
}

impl<T: Real> ThirdMomentMatrix<T> {
    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    /// Tensor entry `E(u_i u_j u_k)`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i, j * self.dim() + k)]
    }

    /// `g_i = sum_jk T_ijk c_j c_k`.
    pub fn contract(&self, c: &Vector<T>) -> Vector<T> {
        let p = self.dim();
        let cc: Vec<T> = (0..p * p).map(|jk| c[jk / p] * c[jk % p]).collect();
        Vector::from_fn(p, |i| self.data.row(i).iter().zip(&cc).map(|(&m, &w)| m * w).sum())
    }

    /// Third moment of the projection `c'u`.
    pub fn cubic_form(&self, c: &Vector<T>) -> T {
        self.contract(c).dot(c)
    }
}

/// Builds the third-moment matrix of already standardized rows.
pub fn third_moment_matrix<T: Real>(u: &Matrix<T>) -> Result<ThirdMomentMatrix<T>> {
    let (n, p) = (u.rows(), u.cols());
    if p == 0 {
        return Err(Error::DimMismatch { expected: 1, got: 0 });
    }
    if n < p + 1 {
        return Err(Error::InvalidParameter(format!("need at least {} rows, got {n}", p + 1)));
    }
    // accumulate the i <= j <= k entries, then fill by symmetry
    let mut acc = vec![T::zero(); p * p * p];
    for r in 0..n {
        let row = u.row(r);
        for i in 0..p {
            for j in i..p {
                let uij = row[i] * row[j];
                let base = (i * p + j) * p;
                for k in j..p {
                    acc[base + k] += uij * row[k];
                }
            }
        }
    }
    let inv_n = T::of_usize(n).recip();
    let mut data = Matrix::zeros(p, p * p);
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                let mut s = [i, j, k];
                s.sort_unstable();
                data[(i, j * p + k)] = acc[(s[0] * p + s[1]) * p + s[2]] * inv_n;
            }
        }
    }
    Ok(ThirdMomentMatrix { data })
}

/// Sample mean and biased (divide by `n`) covariance of the rows.
pub fn sample_mean_cov<T: Real>(x: &Matrix<T>) -> (Vector<T>, Matrix<T>) {
    let (n, p) = (x.rows(), x.cols());
    let inv_n = T::of_usize(n).recip();
    let mut mean = Vector::zeros(p);
    for r in 0..n {
        for (m, &v) in mean.as_mut_slice().iter_mut().zip(x.row(r)) {
            *m += v;
        }
    }
    let mean = mean.scale(inv_n);
    let mut cov = Matrix::zeros(p, p);
    let mut centred = vec![T::zero(); p];
    for r in 0..n {
        for (c, (&v, &m)) in centred.iter_mut().zip(x.row(r).iter().zip(mean.iter())) {
            *c = v - m;
        }
        for a in 0..p {
            for b in a..p {
                cov[(a, b)] += centred[a] * centred[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[(a, b)] * inv_n;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// Standardizes rows as `(x - mean) S^{-1/2}` and returns them with `S^{-1/2}`.
pub fn standardize<T: Real>(x: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (mean, cov) = sample_mean_cov(x);
    let w = inv_sqrt_spd(&cov).map_err(|_| Error::RankDeficient)?;
    let (n, p) = (x.rows(), x.cols());
    let mut u = Matrix::zeros(n, p);
    for r in 0..n {
        let src = x.row(r);
        let dst = u.row_mut(r);
        for (b, out) in dst.iter_mut().enumerate() {
            *out = (0..p).map(|a| (src[a] - mean[a]) * w[(a, b)]).sum();
        }
    }
    Ok((u, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    /// Random unit starts in addition to the singular-vector start.
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the objective changes by at most `tol (1 + f)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iter: 500, tol: 1e-10, seed: 0 }
    }
}

/// Empirical maximal-skewness direction.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxSkewResult<T> {
    /// Unit direction in the original coordinates.
    pub direction: Vector<T>,
    /// Squared standardized third moment along `direction`.
    pub gamma1: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
struct Ascent<T> {
    c: Vector<T>,
    m3: T,
    iterations: usize,
    converged: bool,
    #[cfg_attr(not(test), allow(dead_code))]
    trace: Vec<T>,
}

/// Maximizes the projected third moment `m3(c)` on the unit sphere (equivalently `m3^2`,
/// with `c` kept on the side where `m3 >= 0`).
fn ascend<T: Real>(tm: &ThirdMomentMatrix<T>, start: &Vector<T>, opts: &EstimatorOptions) -> Ascent<T> {
    let tol = T::of(opts.tol);
    let tiny = T::epsilon() * T::of(64.0) * (T::one() + tm.data.max_abs());
    let oriented = |c: Vector<T>| -> (Vector<T>, Vector<T>, T) {
        let g = tm.contract(&c);
        let m = g.dot(&c);
        if m < T::zero() {
            (c.scale(-T::one()), g, -m)
        } else {
            (c, g, m)
        }
    };
    let (mut c, mut g, mut m) = oriented(start.normalized().unwrap_or_else(|| Vector::basis(start.dim(), 0)));
    let mut trace = vec![m * m];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let g_norm = g.norm();
        if g_norm <= tiny {
            converged = true;
            break;
        }
        let (mut cand, mut g_cand, mut m_cand) = oriented(g.scale(g_norm.recip()));
        if m_cand < m {
            // Armijo search along the tangent gradient
            let r = g.sub(&c.scale(m));
            let r2 = r.dot(&r);
            if r2.sqrt() <= tiny {
                converged = true;
                break;
            }
            let mut step = T::one();
            let mut accepted = false;
            for _ in 0..60 {
                if let Some(trial) = c.add(&r.scale(step)).normalized() {
                    let (tc, tg, tm3) = oriented(trial);
                    if tm3 >= m + T::of(3e-4) * step * r2 {
                        cand = tc;
                        g_cand = tg;
                        m_cand = tm3;
                        accepted = true;
                        break;
                    }
                }
                step = step * T::of(0.5);
            }
            if !accepted {
                converged = true;
                break;
            }
        }
        let change = m_cand * m_cand - m * m;
        c = cand;
        g = g_cand;
        m = m_cand;
        trace.push(m * m);
        if change <= tol * (T::one() + m * m) {
            converged = true;
            break;
        }
    }
    Ascent { c, m3: m, iterations, converged, trace }
}

fn random_unit<T: Real>(p: usize, rng: &mut RngStream) -> Vector<T> {
    loop {
        let v = Vector::from_fn(p, |_| T::of(rng.standard_normal()));
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Runs the ascent from the singular-vector start and `restarts` random starts; keeps the best.
fn best_ascent<T: Real>(tm: &ThirdMomentMatrix<T>, opts: &EstimatorOptions) -> Result<(Ascent<T>, usize)> {
    let p = tm.dim();
    let (_, svd_start) = dominant_left_singular_vector(&tm.data)?;
    let mut best = ascend(tm, &svd_start, opts);
    let mut total = best.iterations;
    for r in 0..opts.restarts {
        let mut rng = RngStream::new(opts.seed, 1 + r as u64);
        let run = ascend(tm, &random_unit(p, &mut rng), opts);
        total += run.iterations;
        if run.m3 > best.m3 {
            best = run;
        }
    }
    Ok((best, total))
}

/// Estimates the direction of maximal skewness from the rows of `x`.
pub fn estimate_max_direction<T: Real>(x: &Matrix<T>, opts: &EstimatorOptions) -> Result<MaxSkewResult<T>> {
    let (n, p) = (x.rows(), x.cols());
    if p == 0 {
        return Err(Error::DimMismatch { expected: 1, got: 0 });
    }
    if n < p + 2 {
        return Err(Error::InvalidParameter(format!("need at least {} observations, got {n}", p + 2)));
    }
    if p == 1 {
        let y: Vec<T> = (0..n).map(|r| x[(r, 0)]).collect();
        let gamma1 = gamma1_univariate(&y).map_err(|_| Error::RankDeficient)?;
        let mean = y.iter().copied().sum::<T>() / T::of_usize(n);
        let m3: T = y.iter().map(|&v| (v - mean).powi(3)).sum();
        let sign = if m3 < T::zero() { -T::one() } else { T::one() };
        return Ok(MaxSkewResult { direction: Vector::from_fn(1, |_| sign), gamma1, iterations: 0, converged: true });
    }
    let (u, w) = standardize(x)?;
    let tm = third_moment_matrix(&u)?;
    let (best, iterations) = best_ascent(&tm, opts)?;
    let direction = w.mul_vec(&best.c).normalized().ok_or(Error::RankDeficient)?;
    Ok(MaxSkewResult { direction, gamma1: best.m3 * best.m3, iterations, converged: best.converged })
}
