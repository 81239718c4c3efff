//! The five univariate two-parameter families: normal, t with fixed degrees
//! of freedom, logistic, gamma and Weibull. Parametrizations follow the
//! corresponding R implementations: (mean, variance), (location, squared
//! dispersion), (location, scale), (shape, rate) and (shape, scale).

use crate::error::{Error, Result};
use crate::mvcdf::{norm_cdf, norm_logpdf, norm_quantile, t_cdf, t_logpdf, t_quantile};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma as GammaSampler, StandardNormal};
use statrs::distribution::ContinuousCDF;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnivariateFamily {
    /// (mean, variance)
    Normal,
    /// location-dispersion t with fixed degrees of freedom: (loc, disp^2)
    ScaledT { nu: f64 },
    /// (location, scale)
    Logistic,
    /// (shape, rate)
    Gamma,
    /// (shape, scale)
    Weibull,
}

impl UnivariateFamily {
    pub fn name(&self) -> String {
        match self {
            UnivariateFamily::Normal => "norm".into(),
            UnivariateFamily::ScaledT { nu } => format!("t{}", fmt_nu(*nu)),
            UnivariateFamily::Logistic => "logis".into(),
            UnivariateFamily::Gamma => "gamma".into(),
            UnivariateFamily::Weibull => "weibull".into(),
        }
    }

    pub fn param_names(&self) -> [&'static str; 2] {
        match self {
            UnivariateFamily::Normal => ["mean", "var"],
            UnivariateFamily::ScaledT { .. } => ["loc", "disp2"],
            UnivariateFamily::Logistic => ["loc", "scale"],
            UnivariateFamily::Gamma => ["shape", "rate"],
            UnivariateFamily::Weibull => ["shape", "scale"],
        }
    }

    /// Is the first parameter a free location (true) or a positive shape?
    pub fn location_scale(&self) -> bool {
        matches!(
            self,
            UnivariateFamily::Normal | UnivariateFamily::ScaledT { .. } | UnivariateFamily::Logistic
        )
    }

    pub fn validate(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != 2 {
            return Err(Error::domain(format!(
                "{} expects 2 parameters, got {}",
                self.name(),
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite parameter"));
        }
        let positive_first = !self.location_scale();
        if positive_first && theta[0] <= 0.0 {
            return Err(Error::domain(format!("{}: shape must be > 0", self.name())));
        }
        if theta[1] <= 0.0 {
            return Err(Error::domain(format!(
                "{}: {} must be > 0",
                self.name(),
                self.param_names()[1]
            )));
        }
        Ok(())
    }

    pub fn cdf(&self, theta: &[f64], x: f64) -> f64 {
        match self {
            UnivariateFamily::Normal => norm_cdf((x - theta[0]) / theta[1].sqrt()),
            UnivariateFamily::ScaledT { nu } => t_cdf((x - theta[0]) / theta[1].sqrt(), *nu),
            UnivariateFamily::Logistic => logistic_cdf((x - theta[0]) / theta[1]),
            UnivariateFamily::Gamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    statrs::function::gamma::gamma_lr(theta[0], theta[1] * x)
                }
            }
            UnivariateFamily::Weibull => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / theta[1]).powf(theta[0])).exp_m1()
                }
            }
        }
    }

    pub fn logpdf(&self, theta: &[f64], x: f64) -> f64 {
        match self {
            UnivariateFamily::Normal => {
                let s = theta[1].sqrt();
                norm_logpdf((x - theta[0]) / s) - s.ln()
            }
            UnivariateFamily::ScaledT { nu } => {
                let s = theta[1].sqrt();
                t_logpdf((x - theta[0]) / s, *nu) - s.ln()
            }
            UnivariateFamily::Logistic => {
                let z = (x - theta[0]) / theta[1];
                let a = -z.abs();
                a - 2.0 * a.exp().ln_1p() - theta[1].ln()
            }
            UnivariateFamily::Gamma => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let (shape, rate) = (theta[0], theta[1]);
                    shape * rate.ln() - libm::lgamma(shape) + (shape - 1.0) * x.ln() - rate * x
                }
            }
            UnivariateFamily::Weibull => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let (shape, scale) = (theta[0], theta[1]);
                    shape.ln() - shape * scale.ln() + (shape - 1.0) * x.ln()
                        - (x / scale).powf(shape)
                }
            }
        }
    }

    pub fn quantile(&self, theta: &[f64], p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        match self {
            UnivariateFamily::Normal => theta[0] + theta[1].sqrt() * norm_quantile(p),
            UnivariateFamily::ScaledT { nu } => theta[0] + theta[1].sqrt() * t_quantile(p, *nu),
            UnivariateFamily::Logistic => theta[0] + theta[1] * (p / (1.0 - p)).ln(),
            UnivariateFamily::Gamma => {
                let d = statrs::distribution::Gamma::new(theta[0], theta[1]).expect("gamma params");
                let mut x = d.inverse_cdf(p).max(1e-300);
                // Newton polish on the CDF; the generic inversion is only
                // good to ~1e-8.
                for _ in 0..4 {
                    let pdf = self.logpdf(theta, x).exp();
                    if pdf <= 0.0 {
                        break;
                    }
                    let step = (self.cdf(theta, x) - p) / pdf;
                    x -= step;
                    if x <= 0.0 {
                        x = (x + step) / 2.0;
                    }
                    if step.abs() <= 1e-13 * (1.0 + x.abs()) {
                        break;
                    }
                }
                x
            }
            UnivariateFamily::Weibull => theta[1] * (-(-p).ln_1p()).powf(1.0 / theta[0]),
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> f64 {
        match self {
            UnivariateFamily::Normal => {
                let z: f64 = StandardNormal.sample(rng);
                theta[0] + theta[1].sqrt() * z
            }
            UnivariateFamily::ScaledT { nu } => {
                let z: f64 = StandardNormal.sample(rng);
                let w = ChiSquared::new(*nu).expect("chi2 df").sample(rng);
                theta[0] + theta[1].sqrt() * z / (w / nu).sqrt()
            }
            UnivariateFamily::Logistic => {
                let u: f64 = rng.random();
                // u in [0,1); reflect away from the endpoints
                let u = u.clamp(1e-16, 1.0 - 1e-16);
                theta[0] + theta[1] * (u / (1.0 - u)).ln()
            }
            UnivariateFamily::Gamma => GammaSampler::new(theta[0], 1.0 / theta[1])
                .expect("gamma params")
                .sample(rng),
            UnivariateFamily::Weibull => {
                let u: f64 = rng.random();
                let u = u.clamp(1e-16, 1.0 - 1e-16);
                theta[1] * (-(-u).ln_1p()).powf(1.0 / theta[0])
            }
        }
    }

    /// Method-of-moments starting values from one data column.
    pub fn moment_start(&self, values: &[f64]) -> Result<Vec<f64>> {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        if var <= 1e-20 * (1.0 + mean * mean) {
            return Err(Error::DegenerateData("zero sample variance".into()));
        }
        match self {
            UnivariateFamily::Normal => Ok(vec![mean, var]),
            UnivariateFamily::ScaledT { nu } => {
                let disp2 = if *nu > 2.0 {
                    var * (nu - 2.0) / nu
                } else {
                    // variance does not exist; match the interquartile range
                    let mut sorted = values.to_vec();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let q = |p: f64| sorted[((p * n) as usize).min(sorted.len() - 1)];
                    let iqr = q(0.75) - q(0.25);
                    let lam = iqr / (2.0 * t_quantile(0.75, *nu));
                    (lam * lam).max(1e-8)
                };
                Ok(vec![mean, disp2])
            }
            UnivariateFamily::Logistic => Ok(vec![mean, var.sqrt() * 3f64.sqrt() / std::f64::consts::PI]),
            UnivariateFamily::Gamma => {
                if mean <= 0.0 || values.iter().any(|&v| v <= 0.0) {
                    return Err(Error::domain("gamma requires positive data"));
                }
                Ok(vec![mean * mean / var, mean / var])
            }
            UnivariateFamily::Weibull => {
                if values.iter().any(|&v| v <= 0.0) {
                    return Err(Error::domain("weibull requires positive data"));
                }
                // log-moment matching: Var(log X) = pi^2/(6 k^2),
                // E(log X) = log(scale) - gamma/k
                let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
                let lm = logs.iter().sum::<f64>() / n;
                let lv = logs.iter().map(|v| (v - lm) * (v - lm)).sum::<f64>() / (n - 1.0);
                if lv <= 0.0 {
                    return Err(Error::DegenerateData("zero variance on log scale".into()));
                }
                let shape = std::f64::consts::PI / (6.0 * lv).sqrt();
                let scale = (lm + EULER_GAMMA / shape).exp();
                Ok(vec![shape, scale])
            }
        }
    }
}

fn logistic_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn fmt_nu(nu: f64) -> String {
    if nu.fract() == 0.0 {
        format!("{}", nu as i64)
    } else {
        format!("{nu}")
    }
}
