//! Linear algebra, special functions, quadrature and random streams.

pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use linalg::{
    cholesky, cholesky_solve, dominant_left_singular_vector, inv_sqrt_spd, spd_inverse, spd_solve, symmetric_eigen,
    toeplitz_corr, Matrix, SymmetricEigen, Vector,
};
pub use quadrature::{integrate_with, quadrature, quadrature_2d, Domain, Integral, QuadratureOptions};
pub use rng::RngStream;
pub use special::{log_gamma, normal_cdf, normal_pdf, t_cdf};
