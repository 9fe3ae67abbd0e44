//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite, half-infinite
//! and doubly infinite intervals.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integration domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain<T> {
    /// `[a, b]` with finite endpoints.
    Finite(T, T),
    /// `[a, +inf)`.
    UpperHalfLine(T),
    /// `(-inf, +inf)`.
    Line,
}

/// Integral estimate with its error estimate and cost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Options for [`integrate_with`].
#[derive(Clone, Debug)]
pub struct QuadratureOptions<T> {
    /// Target absolute error (also accepted as relative error for large integrals).
    pub tol: T,
    /// Maximum number of subintervals.
    pub max_intervals: usize,
    /// Interior points, in the original coordinates, where the
    /// integrand is known to change rapidly.
    pub breakpoints: Vec<T>,
}

impl<T: Real> QuadratureOptions<T> {
    pub fn new(tol: T) -> Self {
        Self { tol, max_intervals: 2000, breakpoints: Vec::new() }
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::of(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let mut fv = [T::zero(); 15];
    let mut wv = [T::zero(); 15];
    fv[0] = f(center);
    wv[0] = T::of(WGK[7]);
    let mut res_g = fv[0] * T::of(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::of(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[1 + 2 * j] = f1;
        fv[2 + 2 * j] = f2;
        wv[1 + 2 * j] = T::of(WGK[j]);
        wv[2 + 2 * j] = T::of(WGK[j]);
        if j % 2 == 1 {
            res_g += T::of(WG[j / 2]) * (f1 + f2);
        }
    }
    let res_k: T = fv.iter().zip(&wv).map(|(&v, &w)| v * w).sum();
    let res_abs: T = fv.iter().zip(&wv).map(|(&v, &w)| v.abs() * w).sum();
    let mean = res_k * half;
    let res_asc: T = fv.iter().zip(&wv).map(|(&v, &w)| (v - mean).abs() * w).sum();
    let h = half_len.abs();
    let value = res_k * half_len;
    let mut err = ((res_k - res_g) * half_len).abs();
    // QUADPACK error scaling
    let asc = res_asc * h;
    if asc > T::zero() && err > T::zero() {
        err = asc * (T::of(200.0) * err / asc).powf(T::of(1.5)).min(T::one());
    }
    let roundoff = T::of(50.0) * T::epsilon() * res_abs * h;
    (value, err.max(roundoff))
}

/// Integrates `f` on a finite interval with the default options.
pub fn quadrature<T: Real, F: FnMut(T) -> T>(f: F, domain: Domain<T>, tol: T) -> Result<Integral<T>> {
    integrate_with(f, domain, &QuadratureOptions::new(tol))
}

/// Integrates `f` over `domain`, mapping infinite domains onto finite ones.
pub fn integrate_with<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    domain: Domain<T>,
    opts: &QuadratureOptions<T>,
) -> Result<Integral<T>> {
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidParameter("quadrature tolerance must be positive".into()));
    }
    let one = T::one();
    match domain {
        Domain::Finite(a, b) => {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter("finite domain needs finite endpoints".into()));
            }
            if a == b {
                return Ok(Integral { value: T::zero(), error: T::zero(), evaluations: 0 });
            }
            if a > b {
                let r = integrate_core(&mut f, b, a, &opts.breakpoints, opts)?;
                return Ok(Integral { value: -r.value, ..r });
            }
            integrate_core(&mut f, a, b, &opts.breakpoints, opts)
        }
        Domain::UpperHalfLine(a) => {
            // x = a + u / (1 - u)
            let mut g = |u: T| {
                let w = one - u;
                let x = a + u / w;
                let v = f(x);
                if v.is_zero() {
                    v
                } else {
                    v / (w * w)
                }
            };
            let bps: Vec<T> = opts
                .breakpoints
                .iter()
                .filter(|&&x| x > a)
                .map(|&x| (x - a) / (one + x - a))
                .collect();
            integrate_core(&mut g, T::zero(), one, &bps, opts)
        }
        Domain::Line => {
            // x = t / (1 - t^2)
            let mut g = |t: T| {
                let w = one - t * t;
                let x = t / w;
                let v = f(x);
                if v.is_zero() {
                    v
                } else {
                    v * (one + t * t) / (w * w)
                }
            };
            let two = T::of(2.0);
            let bps: Vec<T> = opts
                .breakpoints
                .iter()
                .map(|&x| {
                    if x.is_zero() {
                        T::zero()
                    } else {
                        // inverse of x = t / (1 - t^2)
                        (two * x) / (one + (one + T::of(4.0) * x * x).sqrt())
                    }
                })
                .collect();
            integrate_core(&mut g, -one, one, &bps, opts)
        }
    }
}

fn integrate_core<T: Real, F: FnMut(T) -> T>(
    f: &mut F,
    a: T,
    b: T,
    breakpoints: &[T],
    opts: &QuadratureOptions<T>,
) -> Result<Integral<T>> {
    let mut cuts: Vec<T> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut evaluations = 0usize;
    let mut segments: Vec<Segment<T>> = Vec::new();
    for w in edges.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        evaluations += 15;
        segments.push(Segment { a: w[0], b: w[1], value, error });
    }

    let half = T::of(0.5);
    loop {
        let total: T = segments.iter().map(|s| s.value).sum();
        let err: T = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureNonConvergence { estimate: total.as_f64(), error: err.as_f64() });
        }
        let target = opts.tol.max(opts.tol * total.abs());
        if err <= target {
            return Ok(Integral { value: total, error: err, evaluations });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence { estimate: total.as_f64(), error: err.as_f64() });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| if s.error > be { (i, s.error) } else { (bi, be) });
        let seg = segments.swap_remove(worst);
        let mid = half * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::QuadratureNonConvergence { estimate: total.as_f64(), error: err.as_f64() });
        }
        let (v1, e1) = gk15(f, seg.a, mid);
        let (v2, e2) = gk15(f, mid, seg.b);
        evaluations += 30;
        segments.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
}

/// Iterated integral `∫∫ f(x, y) dy dx` over a product of domains.
///
/// The inner integrals are computed to a tenth of `tol`.
pub fn quadrature_2d<T: Real, F: FnMut(T, T) -> T>(
    mut f: F,
    outer: Domain<T>,
    inner: Domain<T>,
    tol: T,
) -> Result<Integral<T>> {
    let inner_opts = QuadratureOptions::new(tol / T::of(10.0));
    let mut failure: Option<Error> = None;
    let mut evaluations = 0usize;
    let result = integrate_with(
        |x| {
            if failure.is_some() {
                return T::zero();
            }
            match integrate_with(|y| f(x, y), inner, &inner_opts) {
                Ok(r) => {
                    evaluations += r.evaluations;
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    T::zero()
                }
            }
        },
        outer,
        &QuadratureOptions::new(tol),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Integral { evaluations, ..result })
}
