//! Cross-check of the analytic multivariate-t gradients against Richardson
//! finite differences, over random parameter configurations.

use gofmult_core::estimation;
use gofmult_core::mvt_analytic::{mvt_cdf_grad, mvt_logpdf_grad, MvtParams};
use gofmult_core::{Error, Family, Result, RngStream};
use rand::Rng;
use serde::Serialize;

pub const GRAD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub family: String,
    pub dim: usize,
    pub nu: f64,
    pub trials: usize,
    pub max_rel_error_cdf: f64,
    pub max_rel_error_logpdf: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn random_config(rng: &mut impl Rng, d: usize, nu: f64) -> (MvtParams, Vec<f64>) {
    let corr = loop {
        let c: Vec<f64> = (0..d * (d - 1) / 2)
            .map(|_| rng.random::<f64>() * 1.6 - 0.8)
            .collect();
        if gofmult_core::mvcdf::corr_pd_check(&c).is_ok() {
            break c;
        }
    };
    let mu: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let lambda2: Vec<f64> = (0..d).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
    let x: Vec<f64> = (0..d)
        .map(|i| mu[i] + lambda2[i].sqrt() * (rng.random::<f64>() * 4.0 - 2.0))
        .collect();
    (MvtParams::new(mu, lambda2, corr, nu).unwrap(), x)
}

fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-10);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1e-3 * scale))
        .fold(0.0, f64::max)
}

/// Compare analytic and Richardson gradients over `trials` random
/// configurations; pass/fail at `GRAD_TOLERANCE`.
pub fn run_gradient_check(family: &Family, trials: usize, seed: u64) -> Result<GradCheckReport> {
    let (d, nu) = match family {
        Family::MvT { dim, nu } => (*dim, *nu),
        _ => {
            return Err(Error::InvalidInput(
                "gradient check applies to multivariate t families".into(),
            ))
        }
    };
    let mut lower = vec![f64::NEG_INFINITY; d];
    lower.extend(vec![0.0; d]);
    lower.extend(vec![-1.0; d * (d - 1) / 2]);
    let mut upper = vec![f64::INFINITY; 2 * d];
    upper.extend(vec![1.0; d * (d - 1) / 2]);

    let mut rng = RngStream::new(seed).child(0).rng();
    let mut worst_cdf = 0.0f64;
    let mut worst_logpdf = 0.0f64;
    for _ in 0..trials {
        let (params, x) = random_config(&mut rng, d, nu);
        let theta = params.to_vec();
        let cdf_a = mvt_cdf_grad(&params, &x)?;
        let cdf_n = estimation::richardson_gradient_bounded(
            |t| family.cdf(t, &x).unwrap_or(f64::NAN),
            &theta,
            &lower,
            &upper,
        )?;
        worst_cdf = worst_cdf.max(max_rel_error(&cdf_a, &cdf_n));
        let lp_a = mvt_logpdf_grad(&params, &x)?;
        let lp_n = estimation::richardson_gradient_bounded(
            |t| family.logpdf(t, &x).unwrap_or(f64::NAN),
            &theta,
            &lower,
            &upper,
        )?;
        worst_logpdf = worst_logpdf.max(max_rel_error(&lp_a, &lp_n));
    }
    Ok(GradCheckReport {
        family: family.name(),
        dim: d,
        nu,
        trials,
        max_rel_error_cdf: worst_cdf,
        max_rel_error_logpdf: worst_logpdf,
        tolerance: GRAD_TOLERANCE,
        pass: worst_cdf <= GRAD_TOLERANCE && worst_logpdf <= GRAD_TOLERANCE,
    })
}
