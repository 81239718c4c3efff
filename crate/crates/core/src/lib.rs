//! Goodness-of-fit testing for parametric distribution families with
//! estimated parameters, via the multiplier (weighted) bootstrap and the
//! classical parametric bootstrap.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod mvcdf;
pub mod mvt_analytic;
pub mod rng;
pub mod sklar;
mod smallmat;

pub use dataset::Dataset;
pub use distributions::{Family, FamilySpec, ParamVector};
pub use error::{Error, Result};
pub use estimation::{FitConfig, FitResult};
pub use gof::{GofResult, Method, MultiplierKind, Statistic};
pub use rng::RngStream;
