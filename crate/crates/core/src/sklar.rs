//! Composite multivariate families built from a copula and univariate
//! margins: `F(x) = C(F_1(x_1), ..., F_d(x_d))`.
//!
//! Normal and t copulas evaluate through the deterministic orthant kernels
//! at marginal quantiles; the Clayton copula is closed form. Parameter
//! vectors are sliced as margin 1, ..., margin d, copula.

use crate::dataset::Dataset;
use crate::distributions::univariate::{fmt_nu, UnivariateFamily};
use crate::distributions::{elliptical, ParamDomain};
use crate::error::{Error, Result};
use crate::mvcdf;
use crate::mvt_analytic;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma as GammaSampler, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaKind {
    Normal,
    T { nu: f64 },
    Clayton,
}

/// Copula identity and fixed constants; the dependence parameters
/// (correlations or the Clayton parameter) travel in the theta vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSpec {
    pub kind: CopulaKind,
}

impl CopulaSpec {
    pub fn param_count(&self, d: usize) -> usize {
        match self.kind {
            CopulaKind::Clayton => 1,
            _ => d * (d - 1) / 2,
        }
    }

    pub fn param_names(&self, d: usize) -> Vec<String> {
        match self.kind {
            CopulaKind::Clayton => vec!["theta_c".into()],
            _ => {
                let mut names = Vec::new();
                for i in 0..d {
                    for j in (i + 1)..d {
                        names.push(format!("rho{}{}", i + 1, j + 1));
                    }
                }
                names
            }
        }
    }

    pub fn domains(&self, d: usize) -> Vec<ParamDomain> {
        match self.kind {
            CopulaKind::Clayton => vec![ParamDomain::Positive],
            _ => vec![ParamDomain::Correlation; d * (d - 1) / 2],
        }
    }

    pub fn validate(&self, params: &[f64], d: usize) -> Result<()> {
        if params.len() != self.param_count(d) {
            return Err(Error::domain("copula parameter count mismatch"));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite copula parameter"));
        }
        match self.kind {
            CopulaKind::Clayton => {
                if params[0] <= 0.0 {
                    return Err(Error::domain("Clayton dependence parameter must be > 0"));
                }
                Ok(())
            }
            _ => mvcdf::corr_pd_check(params),
        }
    }
}

/// A copula together with d univariate margins.
#[derive(Debug, Clone, PartialEq)]
pub struct SklarFamily {
    pub margins: Vec<UnivariateFamily>,
    pub copula: CopulaSpec,
}

impl SklarFamily {
    pub fn new(margins: Vec<UnivariateFamily>, copula: CopulaSpec) -> Result<Self> {
        if !(2..=3).contains(&margins.len()) {
            return Err(Error::InvalidInput(
                "Sklar families support dimensions 2 and 3".into(),
            ));
        }
        Ok(SklarFamily { margins, copula })
    }

    pub fn dim(&self) -> usize {
        self.margins.len()
    }

    pub fn param_count(&self) -> usize {
        2 * self.dim() + self.copula.param_count(self.dim())
    }

    pub fn name(&self) -> String {
        let d = self.dim();
        let all = |f: &UnivariateFamily| self.margins.iter().all(|m| m == f);
        match self.copula.kind {
            CopulaKind::Clayton if all(&UnivariateFamily::Normal) => "nc".into(),
            CopulaKind::Normal if all(&UnivariateFamily::Gamma) => "gn".into(),
            CopulaKind::Normal => {
                if let UnivariateFamily::ScaledT { nu } = self.margins[0] {
                    if all(&UnivariateFamily::ScaledT { nu }) {
                        return format!("t{}n", fmt_nu(nu));
                    }
                }
                format!("sklar-normal-d{d}")
            }
            _ => format!("sklar-d{d}"),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (i, m) in self.margins.iter().enumerate() {
            for p in m.param_names() {
                names.push(format!("m{}_{}", i + 1, p));
            }
        }
        names.extend(self.copula.param_names(self.dim()));
        names
    }

    pub fn domains(&self) -> Vec<ParamDomain> {
        let mut d = Vec::new();
        for m in &self.margins {
            d.push(if m.location_scale() {
                ParamDomain::Real
            } else {
                ParamDomain::Positive
            });
            d.push(ParamDomain::Positive);
        }
        d.extend(self.copula.domains(self.dim()));
        d
    }

    fn margin_theta<'a>(&self, theta: &'a [f64], i: usize) -> &'a [f64] {
        &theta[2 * i..2 * i + 2]
    }

    fn copula_theta<'a>(&self, theta: &'a [f64]) -> &'a [f64] {
        &theta[2 * self.dim()..]
    }

    pub fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count() {
            return Err(Error::domain(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                theta.len()
            )));
        }
        for (i, m) in self.margins.iter().enumerate() {
            m.validate(self.margin_theta(theta, i))?;
        }
        self.copula.validate(self.copula_theta(theta), self.dim())
    }

    pub fn cdf(&self, theta: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut u = [0.0; 3];
        for i in 0..d {
            u[i] = self.margins[i].cdf(self.margin_theta(theta, i), x[i]);
        }
        let cop = self.copula_theta(theta);
        match self.copula.kind {
            CopulaKind::Normal => {
                let mut z = [0.0; 3];
                for i in 0..d {
                    z[i] = probit(u[i]);
                }
                mvt_analytic::std_normal_cdf(&z[..d], cop, d)
            }
            CopulaKind::T { nu } => {
                let mut z = [0.0; 3];
                for i in 0..d {
                    z[i] = t_probit(u[i], nu);
                }
                mvt_analytic::std_t_cdf(&z[..d], cop, d, nu)
            }
            CopulaKind::Clayton => clayton_cdf(&u[..d], cop[0]),
        }
    }

    pub fn logpdf(&self, theta: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut marg = 0.0;
        let mut u = [0.0; 3];
        for i in 0..d {
            let ti = self.margin_theta(theta, i);
            let lp = self.margins[i].logpdf(ti, x[i]);
            if lp == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            marg += lp;
            u[i] = self.margins[i].cdf(ti, x[i]).clamp(1e-15, 1.0 - 1e-15);
        }
        let cop = self.copula_theta(theta);
        let logc = match self.copula.kind {
            CopulaKind::Normal => {
                let mut z = [0.0; 3];
                for i in 0..d {
                    z[i] = probit(u[i]);
                }
                mvt_analytic::std_normal_logpdf(&z[..d], cop, d)
                    - z[..d].iter().map(|&v| mvcdf::norm_logpdf(v)).sum::<f64>()
            }
            CopulaKind::T { nu } => {
                let mut z = [0.0; 3];
                for i in 0..d {
                    z[i] = t_probit(u[i], nu);
                }
                mvt_analytic::std_t_logpdf(&z[..d], cop, d, nu)
                    - z[..d].iter().map(|&v| mvcdf::t_logpdf(v, nu)).sum::<f64>()
            }
            CopulaKind::Clayton => clayton_logpdf(&u[..d], cop[0]),
        };
        logc + marg
    }

    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        n: usize,
        rng: &mut R,
    ) -> Result<Dataset> {
        let d = self.dim();
        let cop = self.copula_theta(theta);
        let mut out = Vec::with_capacity(n * d);
        let mut u = [0.0f64; 3];
        match self.copula.kind {
            CopulaKind::Normal | CopulaKind::T { .. } => {
                let chol = mvt_analytic::corr_cholesky(cop, d)?;
                let nu = match self.copula.kind {
                    CopulaKind::T { nu } => Some(nu),
                    _ => None,
                };
                let chi = nu.map(|v| ChiSquared::new(v).expect("chi2 df"));
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
                        z /= scale;
                        u[i] = match nu {
                            None => mvcdf::norm_cdf(z),
                            Some(v) => mvcdf::t_cdf(z, v),
                        };
                    }
                    self.push_from_uniforms(theta, &u[..d], &mut out);
                }
            }
            CopulaKind::Clayton => {
                // Marshall-Olkin gamma-frailty construction
                let theta_c = cop[0];
                let frailty = GammaSampler::new(1.0 / theta_c, 1.0).expect("gamma frailty");
                for _ in 0..n {
                    let v: f64 = frailty.sample(rng);
                    for ui in u.iter_mut().take(d) {
                        let e: f64 = Exp1.sample(rng);
                        *ui = (1.0 + e / v).powf(-1.0 / theta_c);
                    }
                    self.push_from_uniforms(theta, &u[..d], &mut out);
                }
            }
        }
        Dataset::from_flat(out, d)
    }

    fn push_from_uniforms(&self, theta: &[f64], u: &[f64], out: &mut Vec<f64>) {
        for (i, &ui) in u.iter().enumerate() {
            let ui = ui.clamp(1e-16, 1.0 - 1e-16);
            out.push(self.margins[i].quantile(self.margin_theta(theta, i), ui));
        }
    }

    pub fn moment_start(&self, data: &Dataset) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut theta = Vec::with_capacity(self.param_count());
        for (i, m) in self.margins.iter().enumerate() {
            let col: Vec<f64> = data.column(i).collect();
            theta.extend(m.moment_start(&col)?);
        }
        match self.copula.kind {
            CopulaKind::Clayton => {
                let mut tau = 0.0;
                let mut pairs = 0.0;
                for i in 0..d {
                    for j in (i + 1)..d {
                        tau += kendall_tau(data, i, j);
                        pairs += 1.0;
                    }
                }
                tau /= pairs;
                let t = tau.clamp(0.02, 0.95);
                theta.push((2.0 * t / (1.0 - t)).clamp(0.05, 100.0));
            }
            _ => {
                let mut corr = elliptical::sample_correlations(data);
                elliptical::project_corr_pd(&mut corr);
                theta.extend_from_slice(&corr);
            }
        }
        Ok(theta)
    }
}

fn probit(u: f64) -> f64 {
    if u <= 0.0 {
        f64::NEG_INFINITY
    } else if u >= 1.0 {
        f64::INFINITY
    } else {
        mvcdf::norm_quantile(u)
    }
}

fn t_probit(u: f64, nu: f64) -> f64 {
    if u <= 0.0 {
        f64::NEG_INFINITY
    } else if u >= 1.0 {
        f64::INFINITY
    } else {
        mvcdf::t_quantile(u, nu)
    }
}

// C(u) = (sum u_i^-theta - d + 1)^(-1/theta), computed through expm1/ln_1p so
// the independence limit theta -> 0+ stays accurate.
fn clayton_cdf(u: &[f64], theta: f64) -> f64 {
    if u.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let s_minus_1: f64 = u
        .iter()
        .map(|&v| (-theta * v.min(1.0).ln()).exp_m1())
        .sum();
    (-(s_minus_1.ln_1p()) / theta).exp().clamp(0.0, 1.0)
}

fn clayton_logpdf(u: &[f64], theta: f64) -> f64 {
    let d = u.len() as f64;
    let log_u_sum: f64 = u.iter().map(|&v| v.ln()).sum();
    let s_minus_1: f64 = u.iter().map(|&v| (-theta * v.ln()).exp_m1()).sum();
    let mut lc = 0.0;
    for k in 1..u.len() {
        lc += (k as f64 * theta).ln_1p();
    }
    lc - (1.0 + theta) * log_u_sum - (1.0 / theta + d) * s_minus_1.ln_1p()
}

/// Kendall's tau of columns (i, j), on at most the first 2000 rows.
pub fn kendall_tau(data: &Dataset, i: usize, j: usize) -> f64 {
    let n = data.n().min(2000);
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for a in 0..n {
        for b in (a + 1)..n {
            let s = (data.row(a)[i] - data.row(b)[i]) * (data.row(a)[j] - data.row(b)[j]);
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    (concordant - discordant) as f64 / (n as f64 * (n as f64 - 1.0) / 2.0)
}
