//! The parametric family abstraction: metadata, parameter-domain
//! descriptions, CDF / log-density / sampling / moment-start dispatch for the
//! univariate families, the plain multivariate normal and t, and the
//! Sklar-composed families.

pub mod elliptical;
pub mod univariate;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mvt_analytic::MvtParams;
use crate::sklar::{CopulaKind, CopulaSpec, SklarFamily};
use rand::Rng;
use serde::{Deserialize, Serialize};
use univariate::UnivariateFamily;

/// Constraint class of one parameter, used to pick optimizer transforms and
/// finite-difference step policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamDomain {
    Real,
    Positive,
    /// An off-diagonal correlation entry in (-1, 1); the correlation block as
    /// a whole must additionally be positive definite.
    Correlation,
}

/// A parameter vector in the family's natural parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        ParamVector { values }
    }
}

/// Static description of a family: dimension, parameter layout and domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    pub dim: usize,
    pub param_count: usize,
    pub param_names: Vec<String>,
    pub domain: Vec<ParamDomain>,
    pub fixed_constants: Vec<(String, f64)>,
}

/// A parametric family of distributions on R^d, d <= 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Univariate(UnivariateFamily),
    MvNormal { dim: usize },
    MvT { dim: usize, nu: f64 },
    Sklar(SklarFamily),
}

impl Family {
    /// Resolve a CLI identifier against a data dimension.
    ///
    /// Univariate: `norm`, `t<nu>`, `logis`, `gamma`, `weibull`.
    /// Multivariate: `mvnorm`, `mvt<nu>`, `nc`, `gn`, `t<nu>n`.
    pub fn from_id(id: &str, dim: usize) -> Result<Family> {
        let univariate_id = matches!(id, "norm" | "logis" | "gamma" | "weibull")
            || (id.starts_with('t') && !id.ends_with('n') && !id.starts_with("mvt"));
        if univariate_id && dim != 1 {
            return Err(Error::InvalidInput(format!(
                "family `{id}` is univariate, data has dimension {dim}"
            )));
        }
        if !univariate_id && !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "family `{id}` needs data of dimension 2 or 3, got {dim}"
            )));
        }
        let fam = match id {
            "norm" => Family::Univariate(UnivariateFamily::Normal),
            "logis" => Family::Univariate(UnivariateFamily::Logistic),
            "gamma" => Family::Univariate(UnivariateFamily::Gamma),
            "weibull" => Family::Univariate(UnivariateFamily::Weibull),
            "mvnorm" => Family::MvNormal { dim },
            "nc" => Family::Sklar(SklarFamily::new(
                vec![UnivariateFamily::Normal; dim.max(2)],
                CopulaSpec { kind: CopulaKind::Clayton },
            )?),
            "gn" => Family::Sklar(SklarFamily::new(
                vec![UnivariateFamily::Gamma; dim.max(2)],
                CopulaSpec { kind: CopulaKind::Normal },
            )?),
            _ => {
                if let Some(rest) = id.strip_prefix("mvt") {
                    Family::MvT { dim, nu: parse_nu(rest, id)? }
                } else if let Some(core) = id.strip_prefix('t') {
                    if let Some(digits) = core.strip_suffix('n') {
                        let nu = parse_nu(digits, id)?;
                        Family::Sklar(SklarFamily::new(
                            vec![UnivariateFamily::ScaledT { nu }; dim.max(2)],
                            CopulaSpec { kind: CopulaKind::Normal },
                        )?)
                    } else {
                        Family::Univariate(UnivariateFamily::ScaledT { nu: parse_nu(core, id)? })
                    }
                } else {
                    return Err(Error::InvalidInput(format!("unknown family id `{id}`")));
                }
            }
        };
        if fam.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "family `{id}` has dimension {}, data has dimension {dim}",
                fam.dim()
            )));
        }
        Ok(fam)
    }

    pub fn name(&self) -> String {
        match self {
            Family::Univariate(u) => u.name(),
            Family::MvNormal { .. } => "mvnorm".into(),
            Family::MvT { nu, .. } => format!("mvt{}", univariate::fmt_nu(*nu)),
            Family::Sklar(s) => s.name(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::Univariate(_) => 1,
            Family::MvNormal { dim } | Family::MvT { dim, .. } => *dim,
            Family::Sklar(s) => s.dim(),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Family::Univariate(_) => 2,
            Family::MvNormal { dim } | Family::MvT { dim, .. } => elliptical::param_count(*dim),
            Family::Sklar(s) => s.param_count(),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            Family::Univariate(u) => u.param_names().iter().map(|s| s.to_string()).collect(),
            Family::MvNormal { dim } | Family::MvT { dim, .. } => {
                let d = *dim;
                let mut names: Vec<String> = (1..=d).map(|i| format!("mu{i}")).collect();
                names.extend((1..=d).map(|i| format!("lam2_{i}")));
                for i in 0..d {
                    for j in (i + 1)..d {
                        names.push(format!("rho{}{}", i + 1, j + 1));
                    }
                }
                names
            }
            Family::Sklar(s) => s.param_names(),
        }
    }

    pub fn domains(&self) -> Vec<ParamDomain> {
        match self {
            Family::Univariate(u) => {
                let first = if u.location_scale() {
                    ParamDomain::Real
                } else {
                    ParamDomain::Positive
                };
                vec![first, ParamDomain::Positive]
            }
            Family::MvNormal { dim } | Family::MvT { dim, .. } => {
                let d = *dim;
                let mut v = vec![ParamDomain::Real; d];
                v.extend(vec![ParamDomain::Positive; d]);
                v.extend(vec![ParamDomain::Correlation; d * (d - 1) / 2]);
                v
            }
            Family::Sklar(s) => s.domains(),
        }
    }

    pub fn spec(&self) -> FamilySpec {
        let fixed = match self {
            Family::Univariate(UnivariateFamily::ScaledT { nu }) | Family::MvT { nu, .. } => {
                vec![("nu".to_string(), *nu)]
            }
            Family::Sklar(s) => {
                let mut f = Vec::new();
                if let UnivariateFamily::ScaledT { nu } = s.margins[0] {
                    f.push(("margin_nu".to_string(), nu));
                }
                if let CopulaKind::T { nu } = s.copula.kind {
                    f.push(("copula_nu".to_string(), nu));
                }
                f
            }
            _ => Vec::new(),
        };
        FamilySpec {
            name: self.name(),
            dim: self.dim(),
            param_count: self.param_count(),
            param_names: self.param_names(),
            domain: self.domains(),
            fixed_constants: fixed,
        }
    }

    pub fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        match self {
            Family::Univariate(u) => u.validate(theta),
            Family::MvNormal { dim } => elliptical::validate(theta, *dim),
            Family::MvT { dim, .. } => elliptical::validate(theta, *dim),
            Family::Sklar(s) => s.validate_theta(theta),
        }
    }

    /// CDF at one point. `theta` is validated.
    pub fn cdf(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        self.validate_theta(theta)?;
        self.check_point(x)?;
        Ok(self.cdf_unchecked(theta, x))
    }

    pub(crate) fn cdf_unchecked(&self, theta: &[f64], x: &[f64]) -> f64 {
        match self {
            Family::Univariate(u) => u.cdf(theta, x[0]),
            Family::MvNormal { dim } => elliptical::cdf(theta, *dim, None, x),
            Family::MvT { dim, nu } => elliptical::cdf(theta, *dim, Some(*nu), x),
            Family::Sklar(s) => s.cdf(theta, x),
        }
    }

    /// Log density at one point; `-inf` outside the support.
    pub fn logpdf(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        self.validate_theta(theta)?;
        self.check_point(x)?;
        Ok(self.logpdf_unchecked(theta, x))
    }

    pub(crate) fn logpdf_unchecked(&self, theta: &[f64], x: &[f64]) -> f64 {
        match self {
            Family::Univariate(u) => u.logpdf(theta, x[0]),
            Family::MvNormal { dim } => elliptical::logpdf(theta, *dim, None, x),
            Family::MvT { dim, nu } => elliptical::logpdf(theta, *dim, Some(*nu), x),
            Family::Sklar(s) => s.logpdf(theta, x),
        }
    }

    /// Sum of log densities over a dataset; validates theta once. The
    /// elliptical families hoist the per-theta work out of the point loop
    /// (this sits inside the optimizer).
    pub fn loglik(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        self.validate_theta(theta)?;
        match self {
            Family::MvNormal { dim } => Ok(elliptical::loglik_sum(theta, *dim, None, data)),
            Family::MvT { dim, nu } => Ok(elliptical::loglik_sum(theta, *dim, Some(*nu), data)),
            _ => Ok(data.rows().map(|r| self.logpdf_unchecked(theta, r)).sum()),
        }
    }

    /// CDF at every row of `points`; validates theta once.
    pub fn cdf_batch(&self, theta: &[f64], points: &Dataset) -> Result<Vec<f64>> {
        self.validate_theta(theta)?;
        Ok(points.rows().map(|r| self.cdf_unchecked(theta, r)).collect())
    }

    /// Marginal quantile; only defined for univariate families.
    pub fn quantile(&self, theta: &[f64], p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) || p == 0.0 {
            return Err(Error::InvalidInput(format!("quantile level {p} outside (0,1)")));
        }
        match self {
            Family::Univariate(u) => {
                u.validate(theta)?;
                Ok(u.quantile(theta, p))
            }
            _ => Err(Error::InvalidInput(
                "quantile grids are only available for univariate families".into(),
            )),
        }
    }

    /// Draw `n` i.i.d. points. Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, theta: &[f64], n: usize, rng: &mut R) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        self.validate_theta(theta)?;
        match self {
            Family::Univariate(u) => {
                let vals: Vec<f64> = (0..n).map(|_| u.sample_one(theta, rng)).collect();
                Dataset::univariate(vals)
            }
            Family::MvNormal { dim } => elliptical::sample_into(theta, *dim, None, n, rng),
            Family::MvT { dim, nu } => elliptical::sample_into(theta, *dim, Some(*nu), n, rng),
            Family::Sklar(s) => s.sample_into(theta, n, rng),
        }
    }

    /// Method-of-moments starting values.
    pub fn moment_start(&self, data: &Dataset) -> Result<ParamVector> {
        if data.dim() != self.dim() {
            return Err(Error::InvalidInput("data dimension mismatch".into()));
        }
        if data.n() < self.dim() + 2 {
            return Err(Error::DegenerateData(format!(
                "need at least {} observations",
                self.dim() + 2
            )));
        }
        let values = match self {
            Family::Univariate(u) => {
                let col: Vec<f64> = data.column(0).collect();
                u.moment_start(&col)?
            }
            Family::MvNormal { .. } => elliptical::moment_start(data, None)?,
            Family::MvT { nu, .. } => elliptical::moment_start(data, Some(*nu))?,
            Family::Sklar(s) => s.moment_start(data)?,
        };
        Ok(ParamVector::new(values))
    }

    /// Exact maximum-likelihood estimate where one exists in closed form
    /// (normal families); used to cut the cost of parametric-bootstrap
    /// refits.
    pub fn closed_form_mle(&self, data: &Dataset) -> Option<Result<ParamVector>> {
        match self {
            Family::Univariate(UnivariateFamily::Normal) => {
                let n = data.n() as f64;
                let mean = data.column_mean(0);
                let var = data.column(0).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                if var <= 0.0 {
                    Some(Err(Error::DegenerateData("zero variance".into())))
                } else {
                    Some(Ok(ParamVector::new(vec![mean, var])))
                }
            }
            Family::MvNormal { .. } => Some(elliptical::normal_mle(data).map(ParamVector::new)),
            _ => None,
        }
    }

    /// Whether the closed-form analytic gradient path applies.
    pub fn supports_analytic_gradients(&self) -> bool {
        matches!(self, Family::MvT { .. })
    }

    /// View the parameter vector as multivariate-t parameters (analytic
    /// gradient path).
    pub fn as_mvt_params(&self, theta: &[f64]) -> Result<MvtParams> {
        match self {
            Family::MvT { dim, nu } => elliptical::as_mvt_params(theta, *dim, *nu),
            _ => Err(Error::InvalidInput(
                "analytic gradients are only available for the multivariate t".into(),
            )),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point dimension {} does not match family dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

fn parse_nu(digits: &str, id: &str) -> Result<f64> {
    let nu: f64 = digits
        .parse()
        .map_err(|_| Error::InvalidInput(format!("unknown family id `{id}`")))?;
    if nu > 0.0 && nu.is_finite() {
        Ok(nu)
    } else {
        Err(Error::InvalidInput(format!(
            "degrees of freedom in `{id}` must be positive"
        )))
    }
}
