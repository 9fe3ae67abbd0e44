//! Scale mixtures of skew-normal vectors: densities, sampling, and the
//! projection of maximal skewness, analytic and estimated from data.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`.

pub mod cli;
pub mod error;
pub mod mixing;
pub mod model;
pub mod numerics;
pub mod scalar;
pub mod simulation;
pub mod skewness;

pub use error::{Error, Result};
pub use mixing::{MomentCondition, SkewCoefficients};
pub use model::{DerivedParams, ProjectionParams, SmsnSampler};
pub use scalar::Real;
pub use skewness::{
    analytic_max_direction, analytic_max_skewness, estimate_max_direction, gamma1_population, gamma1_univariate,
    h_objective, third_moment_matrix, AnalyticDirection, PopulationSkewness, EstimatorOptions, MaxSkewResult, ThirdMomentMatrix,
};

pub type Vector = numerics::Vector<f64>;
pub type Matrix = numerics::Matrix<f64>;
pub type MixingDistribution = mixing::MixingDistribution<f64>;
pub type SmsnParams = model::SmsnParams<f64>;
pub type Derived = model::DerivedParams<f64>;
pub type Projection = model::ProjectionParams<f64>;
pub type Coefficients = mixing::SkewCoefficients<f64>;
pub type MaxSkew = skewness::MaxSkewResult<f64>;
