//! Plain multivariate normal and multivariate t (fixed degrees of freedom)
//! in dimensions two and three, in the natural parametrization
//! `(mu_1..mu_d, lambda2_1..lambda2_d, rho_12[, rho_13, rho_23])`.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mvcdf;
use crate::mvt_analytic;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

pub(crate) struct Split<'a> {
    pub mu: &'a [f64],
    pub lambda2: &'a [f64],
    pub corr: &'a [f64],
}

pub(crate) fn split_theta(theta: &[f64], d: usize) -> Split<'_> {
    Split {
        mu: &theta[..d],
        lambda2: &theta[d..2 * d],
        corr: &theta[2 * d..],
    }
}

pub(crate) fn param_count(d: usize) -> usize {
    2 * d + d * (d - 1) / 2
}

pub(crate) fn validate(theta: &[f64], d: usize) -> Result<()> {
    if theta.len() != param_count(d) {
        return Err(Error::domain(format!(
            "expected {} parameters, got {}",
            param_count(d),
            theta.len()
        )));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite parameter"));
    }
    let s = split_theta(theta, d);
    if s.lambda2.iter().any(|&l| l <= 0.0) {
        return Err(Error::domain("squared dispersions must be positive"));
    }
    mvcdf::corr_pd_check(s.corr)
}

fn standardize(s: &Split<'_>, x: &[f64], d: usize) -> [f64; 3] {
    let mut z = [0.0; 3];
    for j in 0..d {
        z[j] = (x[j] - s.mu[j]) / s.lambda2[j].sqrt();
    }
    z
}

pub(crate) fn cdf(theta: &[f64], d: usize, nu: Option<f64>, x: &[f64]) -> f64 {
    let s = split_theta(theta, d);
    let z = standardize(&s, x, d);
    match nu {
        None => mvt_analytic::std_normal_cdf(&z[..d], s.corr, d),
        Some(nu) => mvt_analytic::std_t_cdf(&z[..d], s.corr, d, nu),
    }
}

pub(crate) fn logpdf(theta: &[f64], d: usize, nu: Option<f64>, x: &[f64]) -> f64 {
    let s = split_theta(theta, d);
    let z = standardize(&s, x, d);
    let log_scale: f64 = s.lambda2.iter().map(|l| 0.5 * l.ln()).sum();
    match nu {
        None => mvt_analytic::std_normal_logpdf(&z[..d], s.corr, d) - log_scale,
        Some(nu) => mvt_analytic::std_t_logpdf(&z[..d], s.corr, d, nu) - log_scale,
    }
}

/// Log-likelihood over a dataset with the per-theta work (determinant,
/// inverse, normalizing constant) hoisted out of the point loop.
pub(crate) fn loglik_sum(theta: &[f64], d: usize, nu: Option<f64>, data: &Dataset) -> f64 {
    let s = split_theta(theta, d);
    let sigma = crate::smallmat::unpack_corr(s.corr, d);
    let (det, inv) = crate::smallmat::det_inv(&sigma, d);
    let df = d as f64;
    let log_scale: f64 = s.lambda2.iter().map(|l| 0.5 * l.ln()).sum();
    let lam: Vec<f64> = s.lambda2.iter().map(|l| l.sqrt()).collect();
    let norm_const = match nu {
        None => -0.5 * df * (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - log_scale,
        Some(v) => {
            libm::lgamma((v + df) / 2.0)
                - libm::lgamma(v / 2.0)
                - 0.5 * df * (std::f64::consts::PI * v).ln()
                - 0.5 * det.ln()
                - log_scale
        }
    };
    let mut total = 0.0;
    let mut z = [0.0f64; 3];
    for row in data.rows() {
        for j in 0..d {
            z[j] = (row[j] - s.mu[j]) / lam[j];
        }
        let qf = crate::smallmat::quad_form(&inv, &z[..d], d);
        total += match nu {
            None => norm_const - 0.5 * qf,
            Some(v) => norm_const - 0.5 * (v + df) * (qf / v).ln_1p(),
        };
    }
    total
}

pub(crate) fn sample_into<R: Rng + ?Sized>(
    theta: &[f64],
    d: usize,
    nu: Option<f64>,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let s = split_theta(theta, d);
    let chol = mvt_analytic::corr_cholesky(s.corr, d)?;
    let chi = nu.map(|v| ChiSquared::new(v).expect("chi2 df"));
    let lam: Vec<f64> = s.lambda2.iter().map(|l| l.sqrt()).collect();
    let mut out = Vec::with_capacity(n * d);
    let mut eps = [0.0f64; 3];
    for _ in 0..n {
        for e in eps.iter_mut().take(d) {
            *e = StandardNormal.sample(rng);
        }
        let scale = match (&chi, nu) {
            (Some(c), Some(v)) => (c.sample(rng) / v).sqrt(),
            _ => 1.0,
        };
        for i in 0..d {
            let mut z = 0.0;
            for (k, e) in eps.iter().enumerate().take(i + 1) {
                z += chol[i][k] * e;
            }
            out.push(s.mu[i] + lam[i] * z / scale);
        }
    }
    Dataset::from_flat(out, d)
}

/// Shrink the sample correlation matrix towards the identity until it passes
/// the Cholesky pivot check.
pub(crate) fn project_corr_pd(corr: &mut [f64]) {
    for _ in 0..200 {
        if mvcdf::corr_pd_check(corr).is_ok() {
            return;
        }
        for r in corr.iter_mut() {
            *r *= 0.95;
        }
    }
}

pub(crate) fn sample_correlations(data: &Dataset) -> Vec<f64> {
    let d = data.dim();
    let n = data.n() as f64;
    let means: Vec<f64> = (0..d).map(|j| data.column_mean(j)).collect();
    let sds: Vec<f64> = (0..d).map(|j| data.column_variance(j).sqrt()).collect();
    let mut corr = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut c = 0.0;
            for row in data.rows() {
                c += (row[i] - means[i]) * (row[j] - means[j]);
            }
            c /= (n - 1.0) * sds[i] * sds[j];
            corr.push(c.clamp(-0.99, 0.99));
        }
    }
    corr
}

pub(crate) fn moment_start(data: &Dataset, nu: Option<f64>) -> Result<Vec<f64>> {
    let d = data.dim();
    let mut theta = Vec::with_capacity(param_count(d));
    for j in 0..d {
        theta.push(data.column_mean(j));
    }
    for j in 0..d {
        let var = data.column_variance(j);
        let m = theta[j];
        if var <= 1e-20 * (1.0 + m * m) {
            return Err(Error::DegenerateData(format!("zero variance in column {j}")));
        }
        let disp2 = match nu {
            Some(v) if v > 2.0 => var * (v - 2.0) / v,
            Some(v) => {
                let mut col: Vec<f64> = data.column(j).collect();
                col.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let q = |p: f64| col[((p * col.len() as f64) as usize).min(col.len() - 1)];
                let lam = (q(0.75) - q(0.25)) / (2.0 * mvcdf::t_quantile(0.75, v));
                (lam * lam).max(1e-8)
            }
            None => var,
        };
        theta.push(disp2);
    }
    let mut corr = sample_correlations(data);
    project_corr_pd(&mut corr);
    theta.extend_from_slice(&corr);
    Ok(theta)
}

/// Closed-form MLE of the multivariate normal: sample mean and (biased)
/// sample covariance, repackaged into the natural parametrization.
pub(crate) fn normal_mle(data: &Dataset) -> Result<Vec<f64>> {
    let d = data.dim();
    let n = data.n() as f64;
    let means: Vec<f64> = (0..d).map(|j| data.column_mean(j)).collect();
    let mut cov = [[0.0f64; 3]; 3];
    for row in data.rows() {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (row[i] - means[i]) * (row[j] - means[j]);
            }
        }
    }
    for r in cov.iter_mut() {
        for v in r.iter_mut() {
            *v /= n;
        }
    }
    let mut theta = means;
    for i in 0..d {
        if cov[i][i] <= 0.0 {
            return Err(Error::DegenerateData(format!("zero variance in column {i}")));
        }
        theta.push(cov[i][i]);
    }
    let mut corr = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            corr.push(cov[i][j] / (cov[i][i] * cov[j][j]).sqrt());
        }
    }
    project_corr_pd(&mut corr);
    theta.extend_from_slice(&corr);
    validate(&theta, d)?;
    Ok(theta)
}

pub(crate) fn as_mvt_params(theta: &[f64], d: usize, nu: f64) -> Result<mvt_analytic::MvtParams> {
    mvt_analytic::MvtParams::from_slice(theta, d, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bivariate_normal_quadrant() {
        // independent components: P(X <= mu, Y <= mu) = 1/4
        let theta = [0.0, 0.0, 1.0, 1.0, 0.0];
        assert_abs_diff_eq!(cdf(&theta, 2, None, &[0.0, 0.0]), 0.25, epsilon = 1e-11);
    }

    #[test]
    fn centered_bivariate_t_density_at_origin() {
        let theta = [0.0, 0.0, 1.0, 1.0, 0.0];
        assert_abs_diff_eq!(
            logpdf(&theta, 2, Some(5.0), &[0.0, 0.0]),
            -(2.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn mvt_sample_kendall_tau_matches_rho() {
        // rho = 0.309 corresponds to Kendall tau 0.2 for elliptical copulas
        let theta = [10.0, 10.0, 0.732736, 0.732736, 0.309];
        let mut rng = RngStream::new(11).child(0).rng();
        let data = sample_into(&theta, 2, Some(5.0), 4000, &mut rng).unwrap();
        let tau = kendall_tau(&data, 0, 1);
        assert!((tau - 0.2).abs() < 0.045, "tau = {tau}");
    }

    #[test]
    fn mvnorm_sample_recovers_moments() {
        let theta = [1.0, -2.0, 0.5, 2.0, 0.6];
        let mut rng = RngStream::new(12).child(0).rng();
        let data = sample_into(&theta, 2, None, 100_000, &mut rng).unwrap();
        let start = moment_start(&data, None).unwrap();
        for (a, b) in start.iter().zip(&theta) {
            assert!((a - b).abs() < 0.05, "start {start:?}");
        }
    }

    #[test]
    fn normal_mle_matches_sample_moments() {
        let theta = [0.0, 1.0, 1.0, 4.0, -0.3];
        let mut rng = RngStream::new(13).child(0).rng();
        let data = sample_into(&theta, 2, None, 500, &mut rng).unwrap();
        let mle = normal_mle(&data).unwrap();
        // spot-check the decomposition against direct column statistics
        let n = data.n() as f64;
        let m0 = data.column_mean(0);
        assert_abs_diff_eq!(mle[0], m0, epsilon = 1e-12);
        let biased_var0 = data.column_variance(0) * (n - 1.0) / n;
        assert_abs_diff_eq!(mle[2], biased_var0, epsilon = 1e-10);
    }

    #[test]
    fn validation_rejects_bad_corr() {
        assert!(validate(&[0.0, 0.0, 1.0, 1.0, 1.2], 2).is_err());
        assert!(validate(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.9, 0.9, -0.5], 3).is_err());
        assert!(validate(&[0.0, 0.0, 1.0, -0.1, 0.2], 2).is_err());
    }

    pub(crate) fn kendall_tau(data: &Dataset, i: usize, j: usize) -> f64 {
        let n = data.n().min(2000);
        let mut concordant = 0i64;
        let mut discordant = 0i64;
        for a in 0..n {
            for b in (a + 1)..n {
                let dx = data.row(a)[i] - data.row(b)[i];
                let dy = data.row(a)[j] - data.row(b)[j];
                let s = dx * dy;
                if s > 0.0 {
                    concordant += 1;
                } else if s < 0.0 {
                    discordant += 1;
                }
            }
        }
        (concordant - discordant) as f64 / (n as f64 * (n as f64 - 1.0) / 2.0)
    }
}
