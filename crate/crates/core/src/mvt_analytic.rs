//! Analytic gradients of the multivariate t CDF and log density with respect
//! to the locations, squared dispersions and correlations (the degrees of
//! freedom stay fixed).
//!
//! The location and dispersion derivatives of the CDF go through the partial
//! `T^(j)(x) = d T_{nu,Sigma}(x) / d x_j`, which conditioning reduces to a
//! univariate t density times a (d-1)-dimensional t CDF with `nu + 1`
//! degrees of freedom and dispersion matrix
//! `Lambda_j = Sigma_{-j,-j} - Sigma_{-j,j} Sigma_{j,-j}`. `Lambda_j` is a
//! dispersion (not correlation) matrix, so the conditional CDF call rescales
//! its arguments by the square roots of its diagonal.
//!
//! The correlation derivatives of the CDF use the Plackett-type identity for
//! the t: writing `q2` for the quadratic form of the standardized pair
//! `(z_i, z_j)` under its own 2x2 correlation block and `alpha = 1 + q2/nu`,
//!
//! `dT/drho_ij = phi2-like factor * alpha^(-nu/2) * T_nu((z_k - b)/(c sqrt(alpha)))`
//!
//! with `b, c^2` the conditional location/dispersion of the remaining
//! coordinate given the pair. In dimension two the trailing factor is empty.
//!
//! The log-density gradient is closed form throughout, via the determinant
//! derivative `d|Sigma|/drho_ij = 2 K_ij` (cofactor) and
//! `d Sigma^{-1}/drho_ij = -r_i r_j^T - r_j r_i^T` with `r_i` the i-th column
//! of `Sigma^{-1}`.

use crate::error::{Error, Result};
use crate::mvcdf::{self, t_cdf, t_pdf};
use crate::smallmat::{cholesky, det_inv, mat_vec, quad_form, unpack_corr, Mat3};
use std::f64::consts::PI;

/// Parameters of a d-dimensional t family with fixed degrees of freedom, in
/// the canonical order `(mu_1..mu_d, lambda2_1..lambda2_d, rho_12[, rho_13, rho_23])`.
#[derive(Debug, Clone)]
pub struct MvtParams {
    pub mu: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub corr: Vec<f64>,
    pub nu: f64,
}

impl MvtParams {
    pub fn new(mu: Vec<f64>, lambda2: Vec<f64>, corr: Vec<f64>, nu: f64) -> Result<Self> {
        let d = mu.len();
        if !(2..=3).contains(&d) {
            return Err(Error::domain(format!(
                "analytic t gradients support d in {{2,3}}, got {d}"
            )));
        }
        if lambda2.len() != d || corr.len() != d * (d - 1) / 2 {
            return Err(Error::domain("parameter block lengths inconsistent"));
        }
        if lambda2.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::domain("squared dispersions must be positive"));
        }
        if !(nu > 0.0) {
            return Err(Error::domain("degrees of freedom must be positive"));
        }
        mvcdf::corr_pd_check(&corr)?;
        Ok(MvtParams { mu, lambda2, corr, nu })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn param_count(&self) -> usize {
        let d = self.dim();
        2 * d + d * (d - 1) / 2
    }

    /// Flatten back to the canonical parameter vector.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.mu.clone();
        v.extend_from_slice(&self.lambda2);
        v.extend_from_slice(&self.corr);
        v
    }

    pub fn from_slice(theta: &[f64], d: usize, nu: f64) -> Result<Self> {
        let pc = 2 * d + d * (d - 1) / 2;
        if theta.len() != pc {
            return Err(Error::domain(format!(
                "expected {pc} parameters for d={d}, got {}",
                theta.len()
            )));
        }
        MvtParams::new(
            theta[..d].to_vec(),
            theta[d..2 * d].to_vec(),
            theta[2 * d..].to_vec(),
            nu,
        )
    }

    fn standardize(&self, x: &[f64]) -> ([f64; 3], [f64; 3]) {
        let d = self.dim();
        let mut z = [0.0; 3];
        let mut lam = [0.0; 3];
        for j in 0..d {
            lam[j] = self.lambda2[j].sqrt();
            z[j] = (x[j] - self.mu[j]) / lam[j];
        }
        (z, lam)
    }
}

// Pairs in the packed correlation order.
fn corr_pairs(d: usize) -> &'static [(usize, usize)] {
    match d {
        2 => &[(0, 1)],
        _ => &[(0, 1), (0, 2), (1, 2)],
    }
}

// T^(j): partial derivative of the standard t CDF in coordinate j, via the
// conditional (nu+1) law.
fn t_partial(z: &[f64; 3], sigma: &Mat3, d: usize, nu: f64, j: usize) -> f64 {
    let others: Vec<usize> = (0..d).filter(|&i| i != j).collect();
    let w = ((nu + 1.0) / (nu + z[j] * z[j])).sqrt();
    // Lambda = Sigma_{-j,-j} - Sigma_{-j,j} Sigma_{j,-j}
    match d {
        2 => {
            let a = others[0];
            let lam = (sigma[a][a] - sigma[a][j] * sigma[a][j]).max(1e-14);
            let arg = w * (z[a] - z[j] * sigma[a][j]) / lam.sqrt();
            t_pdf(z[j], nu) * t_cdf(arg, nu + 1.0)
        }
        _ => {
            let (a, b) = (others[0], others[1]);
            let laa = (sigma[a][a] - sigma[a][j] * sigma[a][j]).max(1e-14);
            let lbb = (sigma[b][b] - sigma[b][j] * sigma[b][j]).max(1e-14);
            let lab = sigma[a][b] - sigma[a][j] * sigma[b][j];
            let rc = (lab / (laa * lbb).sqrt()).clamp(-1.0, 1.0);
            let ua = w * (z[a] - z[j] * sigma[a][j]) / laa.sqrt();
            let ub = w * (z[b] - z[j] * sigma[b][j]) / lbb.sqrt();
            t_pdf(z[j], nu) * mvcdf::bvt_cdf(ua, ub, rc, nu + 1.0)
        }
    }
}

// Plackett-type derivative of the standard t CDF in rho_{ij}.
fn t_corr_partial(z: &[f64; 3], sigma: &Mat3, d: usize, nu: f64, i: usize, j: usize) -> f64 {
    let rij = sigma[i][j];
    let ors = (1.0 - rij * rij).max(1e-14);
    let q2 = (z[i] * z[i] - 2.0 * rij * z[i] * z[j] + z[j] * z[j]) / ors;
    let alpha = 1.0 + q2 / nu;
    let base = alpha.powf(-nu / 2.0) / (2.0 * PI * ors.sqrt());
    if d == 2 {
        return base;
    }
    // conditional law of the remaining coordinate given (z_i, z_j)
    let k = (0..d).find(|&m| m != i && m != j).expect("third coordinate");
    let (si, sj) = (sigma[k][i], sigma[k][j]);
    // inverse of the (i,j) 2x2 correlation block
    let det = ors;
    let bi = (si - rij * sj) / det;
    let bj = (sj - rij * si) / det;
    let b = bi * z[i] + bj * z[j];
    let c2 = (sigma[k][k] - bi * si - bj * sj).max(1e-14);
    let arg = (z[k] - b) / (c2 * alpha).sqrt();
    base * t_cdf(arg, nu)
}

/// Gradient of the t CDF `T_{nu,Sigma,mu,lambda}(x)` in the canonical
/// parameter order.
pub fn mvt_cdf_grad(params: &MvtParams, x: &[f64]) -> Result<Vec<f64>> {
    let d = params.dim();
    if x.len() != d {
        return Err(Error::domain("point dimension mismatch"));
    }
    let sigma = unpack_corr(&params.corr, d);
    let (z, lam) = params.standardize(x);
    let mut grad = Vec::with_capacity(params.param_count());
    let mut partials = [0.0; 3];
    for j in 0..d {
        partials[j] = t_partial(&z, &sigma, d, params.nu, j);
    }
    for j in 0..d {
        grad.push(-partials[j] / lam[j]);
    }
    for j in 0..d {
        grad.push(-(x[j] - params.mu[j]) / (2.0 * lam[j].powi(3)) * partials[j]);
    }
    for &(i, j) in corr_pairs(d) {
        grad.push(t_corr_partial(&z, &sigma, d, params.nu, i, j));
    }
    Ok(grad)
}

/// Gradient of `log t_{nu,Sigma,mu,lambda}(x)` in the canonical parameter
/// order.
pub fn mvt_logpdf_grad(params: &MvtParams, x: &[f64]) -> Result<Vec<f64>> {
    let d = params.dim();
    if x.len() != d {
        return Err(Error::domain("point dimension mismatch"));
    }
    let sigma = unpack_corr(&params.corr, d);
    let (det, inv) = det_inv(&sigma, d);
    if det <= 0.0 {
        return Err(Error::domain("correlation matrix not positive definite"));
    }
    let (z, lam) = params.standardize(x);
    let u = mat_vec(&inv, &z, d);
    let qf: f64 = (0..d).map(|i| z[i] * u[i]).sum();
    let nu = params.nu;
    let ratio_scale = (nu + d as f64) / (nu + qf);
    let mut grad = Vec::with_capacity(params.param_count());
    // t^(j)/t = -(nu+d) z' Sigma^{-1} e_j / (nu + z' Sigma^{-1} z)
    for j in 0..d {
        let tj_over_t = -ratio_scale * u[j];
        grad.push(-tj_over_t / lam[j]);
    }
    for j in 0..d {
        let tj_over_t = -ratio_scale * u[j];
        grad.push(-0.5 / params.lambda2[j] - z[j] / (2.0 * params.lambda2[j]) * tj_over_t);
    }
    for &(i, j) in corr_pairs(d) {
        // d log t / d rho_ij = -K_ij/|Sigma| + (nu+d) u_i u_j / (nu + qf)
        let kij = crate::smallmat::cofactor(&sigma, d, i, j);
        grad.push(-kij / det + ratio_scale * u[i] * u[j]);
    }
    Ok(grad)
}

/// Log density of the standardized d-dimensional t with correlation matrix
/// `corr` (packed) at `z`; shared by the elliptical families.
pub(crate) fn std_t_logpdf(z: &[f64], corr: &[f64], d: usize, nu: f64) -> f64 {
    let sigma = unpack_corr(corr, d);
    let (det, inv) = det_inv(&sigma, d);
    let qf = quad_form(&inv, z, d);
    let df = d as f64;
    libm::lgamma((nu + df) / 2.0) - libm::lgamma(nu / 2.0) - 0.5 * df * (PI * nu).ln()
        - 0.5 * det.ln()
        - 0.5 * (nu + df) * (qf / nu).ln_1p()
}

/// Log density of the standardized d-dimensional normal with packed
/// correlation `corr` at `z`.
pub(crate) fn std_normal_logpdf(z: &[f64], corr: &[f64], d: usize) -> f64 {
    let sigma = unpack_corr(corr, d);
    let (det, inv) = det_inv(&sigma, d);
    let qf = quad_form(&inv, z, d);
    -0.5 * (d as f64) * (2.0 * PI).ln() - 0.5 * det.ln() - 0.5 * qf
}

/// CDF of the standard d-dimensional t (packed correlation), dispatching to
/// the deterministic kernels.
pub(crate) fn std_t_cdf(z: &[f64], corr: &[f64], d: usize, nu: f64) -> f64 {
    match d {
        1 => t_cdf(z[0], nu),
        2 => mvcdf::bvt_cdf(z[0], z[1], corr[0], nu),
        _ => mvcdf::tvt_cdf([z[0], z[1], z[2]], [corr[0], corr[1], corr[2]], nu),
    }
}

pub(crate) fn std_normal_cdf(z: &[f64], corr: &[f64], d: usize) -> f64 {
    match d {
        1 => mvcdf::norm_cdf(z[0]),
        2 => mvcdf::bvn_cdf(z[0], z[1], corr[0]),
        _ => mvcdf::tvn_cdf([z[0], z[1], z[2]], [corr[0], corr[1], corr[2]]),
    }
}

/// Lower Cholesky factor of a packed correlation matrix.
pub(crate) fn corr_cholesky(corr: &[f64], d: usize) -> Result<Mat3> {
    cholesky(&unpack_corr(corr, d), d, 1e-12)
        .ok_or_else(|| Error::domain("correlation matrix not positive definite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params2() -> MvtParams {
        MvtParams::new(vec![1.0, -0.5], vec![0.8, 1.3], vec![0.4], 5.0).unwrap()
    }

    #[test]
    fn logpdf_mu_gradient_vanishes_at_center() {
        let p = params2();
        let g = mvt_logpdf_grad(&p, &[1.0, -0.5]).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn logpdf_lambda2_gradient_at_center_identity_corr() {
        let p = MvtParams::new(vec![0.0, 0.0], vec![0.5, 2.0], vec![0.0], 5.0).unwrap();
        let g = mvt_logpdf_grad(&p, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[2], -0.5 / 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(g[3], -0.5 / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn cdf_rho_gradient_at_center_is_bivariate_density() {
        // by the Plackett identity the rho derivative at the center equals the
        // standard bivariate t density at the origin, 1/(2 pi sqrt(1-rho^2))
        for rho in [-0.6, 0.0, 0.309, 0.588] {
            let p = MvtParams::new(vec![0.3, -1.0], vec![1.0, 1.0], vec![rho], 5.0).unwrap();
            let g = mvt_cdf_grad(&p, &[0.3, -1.0]).unwrap();
            let want = 1.0 / (2.0 * PI * (1.0 - rho * rho).sqrt());
            assert_abs_diff_eq!(g[4], want, epsilon = 1e-12);
        }
    }

    #[test]
    fn cdf_mu_gradient_truncated_conditional_limit() {
        // d=2, rho=0, x = (mu_1, large): conditional CDF term -> 1, so
        // dT/dmu_1 -> -t_nu(0)/lambda_1
        let lam2 = 0.64;
        let p = MvtParams::new(vec![2.0, 0.0], vec![lam2, 1.0], vec![0.0], 5.0).unwrap();
        let g = mvt_cdf_grad(&p, &[2.0, 200.0]).unwrap();
        let want = -t_pdf(0.0, 5.0) / lam2.sqrt();
        assert_abs_diff_eq!(g[0], want, epsilon = 1e-9);
    }

    #[test]
    fn cdf_grad_length_and_order() {
        let p3 = MvtParams::new(
            vec![0.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![0.4, 0.3, 0.5],
            5.0,
        )
        .unwrap();
        assert_eq!(mvt_cdf_grad(&p3, &[0.1, 0.2, 0.3]).unwrap().len(), 9);
        assert_eq!(mvt_logpdf_grad(&p3, &[0.1, 0.2, 0.3]).unwrap().len(), 9);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(MvtParams::new(vec![0.0], vec![1.0], vec![], 5.0).is_err());
        assert!(MvtParams::new(vec![0.0, 0.0], vec![1.0, -1.0], vec![0.0], 5.0).is_err());
        assert!(MvtParams::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![1.01], 5.0).is_err());
    }

    #[test]
    fn std_logpdf_anchor_trivariate() {
        // extended-precision evaluation of the density formula at a fixed
        // point: nu=5, Sigma off-diagonals (0.35, -0.2, 0.1), x=(0.7,-1.3,0.4)
        let lp = std_t_logpdf(&[0.7, -1.3, 0.4], &[0.35, -0.2, 0.1], 3, 5.0);
        assert_abs_diff_eq!(lp, -4.85881903379207866, epsilon = 1e-13);
    }

    #[test]
    fn std_logpdf_center_bivariate() {
        // log density of the centered bivariate t at the origin with
        // Sigma = I is log(1/(2 pi)) for every nu
        let lp = std_t_logpdf(&[0.0, 0.0], &[0.0], 2, 5.0);
        assert_abs_diff_eq!(lp, -(2.0 * PI).ln(), epsilon = 1e-13);
    }
}
