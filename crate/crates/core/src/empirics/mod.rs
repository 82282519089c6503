//! Numeric kernels: the normal law, quadrature, empirical distribution
//! distances and `N_n` estimation.

pub mod nn;
pub mod normal;
pub mod quadrature;
pub mod sample;

pub use nn::{estimate_nn, estimate_nn_plug_in, NnEstimate, NnMethod};
pub use normal::{erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use sample::{dkw_band, kolmogorov_distance, moment_abs, Cdf, EmpiricalSample, Provenance};
