//! Maximum-likelihood fitting and the influence-function machinery: a
//! derivative-free simplex optimizer working in rescaled transformed
//! coordinates, Richardson-extrapolated numerical differentiation, the
//! score-covariance estimate of the information matrix, and CDF gradients
//! (numeric, or analytic for the multivariate t).

use crate::dataset::Dataset;
use crate::distributions::{Family, ParamDomain, ParamVector};
use crate::error::{Error, Result};
use crate::mvt_analytic;
use nalgebra::DMatrix;

/// Tuning knobs for [`fit_mle`].
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    /// Simplex iteration cap; `None` means `2000 * p`.
    pub max_iter: Option<usize>,
    /// Relative tolerance on the log-likelihood spread of the simplex.
    pub rel_tol: f64,
    /// Floor for the per-parameter rescaling of the optimization space.
    pub scale_guard: f64,
    /// Use the analytic gradient formulas (multivariate t only) for scores
    /// and CDF gradients.
    pub use_analytic_grads: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: None,
            rel_tol: 1e-8,
            scale_guard: 1e-2,
            use_analytic_grads: false,
        }
    }
}

impl FitConfig {
    pub fn analytic() -> Self {
        FitConfig { use_analytic_grads: true, ..Default::default() }
    }
}

/// Output of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_n: ParamVector,
    pub loglik: f64,
    /// Information matrix estimate (sample covariance of the score rows).
    pub info: DMatrix<f64>,
    pub info_inv: DMatrix<f64>,
    /// Per-observation score rows, n x p.
    pub scores: DMatrix<f64>,
    /// Influence rows `psi(X_i) = scores * info_inv`, n x p.
    pub influence: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// parameter transforms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Xf {
    Id,
    Log,
    Atanh,
}

fn xf_for(d: ParamDomain) -> Xf {
    match d {
        ParamDomain::Real => Xf::Id,
        ParamDomain::Positive => Xf::Log,
        ParamDomain::Correlation => Xf::Atanh,
    }
}

fn to_internal(xf: Xf, v: f64) -> f64 {
    match xf {
        Xf::Id => v,
        Xf::Log => v.ln(),
        Xf::Atanh => v.atanh(),
    }
}

fn to_natural(xf: Xf, y: f64) -> f64 {
    match xf {
        Xf::Id => y,
        Xf::Log => y.exp(),
        Xf::Atanh => y.tanh(),
    }
}

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

const NM_REFLECT: f64 = 1.0;
const NM_EXPAND: f64 = 2.0;
const NM_CONTRACT: f64 = 0.5;
const NM_SHRINK: f64 = 0.5;
const NM_INIT_STEP: f64 = 0.1;

struct NmOutcome {
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    init_step: f64,
    max_iter: usize,
    rel_tol: f64,
) -> NmOutcome {
    let p = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    simplex.push(x0.to_vec());
    for i in 0..p {
        let mut v = x0.to_vec();
        v[i] += init_step;
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=p).collect();
        order.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal));
        let (best, worst, second_worst) = (order[0], order[p], order[p - 1]);

        if (fv[worst] - fv[best]).abs() <= rel_tol * (fv[best].abs() + rel_tol) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; p];
        for &idx in order.iter().take(p) {
            for (c, v) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += v;
            }
        }
        for c in centroid.iter_mut() {
            *c /= p as f64;
        }

        let point = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = point(NM_REFLECT, &simplex[worst]);
        let fr = f(&xr);
        if fr < fv[best] {
            let xe = point(NM_EXPAND, &simplex[worst]);
            let fe = f(&xe);
            if fe < fr {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
        } else if fr < fv[second_worst] {
            simplex[worst] = xr;
            fv[worst] = fr;
        } else {
            // contract towards the better side
            let (xc, fc) = if fr < fv[worst] {
                let xc = point(NM_CONTRACT, &simplex[worst]);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c - NM_CONTRACT * (c - w))
                    .collect();
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < fv[worst].min(fr) {
                simplex[worst] = xc;
                fv[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for (idx, v) in simplex.iter_mut().enumerate() {
                    if idx == best {
                        continue;
                    }
                    for (vi, bi) in v.iter_mut().zip(&best_point) {
                        *vi = bi + NM_SHRINK * (*vi - bi);
                    }
                    fv[idx] = f(v);
                }
            }
        }
    }

    let best = (0..=p)
        .min_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    NmOutcome { x: simplex[best].clone(), iterations, converged }
}

// ---------------------------------------------------------------------------
// Richardson-extrapolated differentiation
// ---------------------------------------------------------------------------

const RICH_LEVELS: usize = 4;
const RICH_FRAC: f64 = 1e-4;

/// Gradient of a scalar field by central differences at four shrinking step
/// sizes with Richardson extrapolation; no domain constraints.
pub fn richardson_gradient<F>(mut f: F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let lower = vec![f64::NEG_INFINITY; theta.len()];
    let upper = vec![f64::INFINITY; theta.len()];
    let mut eval = |t: &[f64]| {
        let v = f(t);
        v.is_finite().then_some(vec![v])
    };
    let jac = richardson_jacobian(&mut eval, theta, &lower, &upper, 1)?;
    Ok(jac.row(0).iter().copied().collect())
}

/// As [`richardson_gradient`], with per-coordinate box constraints. Steps
/// shrink near a boundary and fall back to one-sided differences on it.
pub fn richardson_gradient_bounded<F>(
    mut f: F,
    theta: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut eval = |t: &[f64]| {
        let v = f(t);
        v.is_finite().then_some(vec![v])
    };
    let jac = richardson_jacobian(&mut eval, theta, lower, upper, 1)?;
    Ok(jac.row(0).iter().copied().collect())
}

// Jacobian of an m-vector-valued function of theta (the function value at m
// fixed points), one coordinate at a time. `eval` returns None when theta is
// outside the domain or the evaluation is not finite; the step then shrinks
// and the coordinate is retried.
fn richardson_jacobian<F>(
    eval: &mut F,
    theta: &[f64],
    lower: &[f64],
    upper: &[f64],
    m: usize,
) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let p = theta.len();
    let mut jac = DMatrix::zeros(m, p);
    let mut work = theta.to_vec();
    for i in 0..p {
        let room_lo = theta[i] - lower[i];
        let room_hi = upper[i] - theta[i];
        let room = room_lo.min(room_hi);
        let mut h0 = RICH_FRAC * theta[i].abs() + RICH_FRAC;
        let one_sided = room <= 1e-12 * (1.0 + theta[i].abs());
        if !one_sided && h0 > 0.45 * room {
            h0 = 0.45 * room;
        }
        if one_sided && h0 > 0.45 * room_hi {
            h0 = (0.45 * room_hi).max(1e-12);
        }

        let mut done = false;
        'attempt: for _ in 0..4 {
            // evaluate the stencil
            let mut plus: Vec<Vec<f64>> = Vec::with_capacity(RICH_LEVELS);
            let mut minus: Vec<Vec<f64>> = Vec::with_capacity(RICH_LEVELS);
            let base = if one_sided {
                match eval(theta) {
                    Some(v) if v.iter().all(|x| x.is_finite()) => Some(v),
                    _ => {
                        return Err(Error::NumericalFailure(
                            "objective not finite at the expansion point".into(),
                        ))
                    }
                }
            } else {
                None
            };
            let mut h = h0;
            for _ in 0..RICH_LEVELS {
                work[i] = theta[i] + h;
                let fp = eval(&work);
                let fm = if one_sided {
                    base.clone()
                } else {
                    work[i] = theta[i] - h;
                    eval(&work)
                };
                work[i] = theta[i];
                match (fp, fm) {
                    (Some(a), Some(b))
                        if a.iter().all(|x| x.is_finite()) && b.iter().all(|x| x.is_finite()) =>
                    {
                        plus.push(a);
                        minus.push(b);
                    }
                    _ => {
                        h0 /= 8.0;
                        continue 'attempt;
                    }
                }
                h /= 2.0;
            }
            // Richardson table per output point
            let order_base: f64 = if one_sided { 2.0 } else { 4.0 };
            for j in 0..m {
                let mut a = [0.0; RICH_LEVELS];
                let mut h = h0;
                for (l, al) in a.iter_mut().enumerate() {
                    *al = if one_sided {
                        (plus[l][j] - minus[l][j]) / h
                    } else {
                        (plus[l][j] - minus[l][j]) / (2.0 * h)
                    };
                    h /= 2.0;
                }
                for ord in 1..RICH_LEVELS {
                    let fac = order_base.powi(ord as i32);
                    for l in 0..(RICH_LEVELS - ord) {
                        a[l] = (a[l + 1] * fac - a[l]) / (fac - 1.0);
                    }
                }
                jac[(j, i)] = a[0];
            }
            done = true;
            break;
        }
        if !done {
            return Err(Error::NumericalFailure(format!(
                "could not build a finite difference stencil for coordinate {i}"
            )));
        }
    }
    Ok(jac)
}

fn domain_bounds(family: &Family) -> (Vec<f64>, Vec<f64>) {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for d in family.domains() {
        match d {
            ParamDomain::Real => {
                lower.push(f64::NEG_INFINITY);
                upper.push(f64::INFINITY);
            }
            ParamDomain::Positive => {
                lower.push(0.0);
                upper.push(f64::INFINITY);
            }
            ParamDomain::Correlation => {
                lower.push(-1.0);
                upper.push(1.0);
            }
        }
    }
    (lower, upper)
}

// ---------------------------------------------------------------------------
// information matrix
// ---------------------------------------------------------------------------

const INFO_COND_LIMIT: f64 = 1e12;

/// Information estimate: the sample covariance matrix of the score rows,
/// and its inverse via Cholesky.
pub fn information_estimate(scores: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = scores.nrows();
    let p = scores.ncols();
    if n <= p {
        return Err(Error::DegenerateData("need more observations than parameters".into()));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite score".into()));
    }
    let mut centered = scores.clone();
    for j in 0..p {
        let mean = scores.column(j).sum() / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }
    let info = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = info.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if !(min_ev > 0.0) || max_ev / min_ev > INFO_COND_LIMIT {
        return Err(Error::SingularInformation(format!(
            "eigenvalue range [{min_ev:.3e}, {max_ev:.3e}]"
        )));
    }
    let chol = nalgebra::Cholesky::new(info.clone())
        .ok_or_else(|| Error::SingularInformation("Cholesky failed".into()))?;
    let inv = chol.inverse();
    Ok((info, inv))
}

// ---------------------------------------------------------------------------
// score and CDF gradients
// ---------------------------------------------------------------------------

/// Per-observation score rows (gradient of the log density in theta),
/// analytic for the multivariate t when requested, Richardson otherwise.
pub fn score_matrix(
    family: &Family,
    theta: &[f64],
    data: &Dataset,
    config: &FitConfig,
) -> Result<DMatrix<f64>> {
    let n = data.n();
    let p = family.param_count();
    if config.use_analytic_grads && family.supports_analytic_gradients() {
        let params = family.as_mvt_params(theta)?;
        let mut out = DMatrix::zeros(n, p);
        for (i, row) in data.rows().enumerate() {
            let g = mvt_analytic::mvt_logpdf_grad(&params, row)?;
            for (j, v) in g.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        return Ok(out);
    }
    let (lower, upper) = domain_bounds(family);
    let mut eval = |t: &[f64]| -> Option<Vec<f64>> {
        family.validate_theta(t).ok()?;
        let vals: Vec<f64> = data.rows().map(|r| family.logpdf_unchecked(t, r)).collect();
        vals.iter().all(|v| v.is_finite()).then_some(vals)
    };
    richardson_jacobian(&mut eval, theta, &lower, &upper, n)
}

/// Rows of `dF_theta` at the evaluation points, m x p.
pub fn cdf_gradient(
    family: &Family,
    theta: &[f64],
    points: &Dataset,
    config: &FitConfig,
) -> Result<DMatrix<f64>> {
    let m = points.n();
    let p = family.param_count();
    if config.use_analytic_grads && family.supports_analytic_gradients() {
        let params = family.as_mvt_params(theta)?;
        let mut out = DMatrix::zeros(m, p);
        for (j, row) in points.rows().enumerate() {
            let g = mvt_analytic::mvt_cdf_grad(&params, row)?;
            for (k, v) in g.into_iter().enumerate() {
                out[(j, k)] = v;
            }
        }
        return Ok(out);
    }
    let (lower, upper) = domain_bounds(family);
    let mut eval = |t: &[f64]| -> Option<Vec<f64>> {
        family.validate_theta(t).ok()?;
        let vals: Vec<f64> = points.rows().map(|r| family.cdf_unchecked(t, r)).collect();
        vals.iter().all(|v| v.is_finite()).then_some(vals)
    };
    richardson_jacobian(&mut eval, theta, &lower, &upper, m)
}

// ---------------------------------------------------------------------------
// fitting
// ---------------------------------------------------------------------------

/// Parameter estimate only (no scores or information): closed form where the
/// family has one, otherwise the simplex from moment starts. This is the
/// per-replicate refit path of the parametric bootstrap.
pub fn fit_params_only(family: &Family, data: &Dataset, config: &FitConfig) -> Result<ParamVector> {
    if let Some(res) = family.closed_form_mle(data) {
        return res;
    }
    let (theta, _, _) = maximize_likelihood(family, data, config)?;
    Ok(ParamVector::new(theta))
}

fn maximize_likelihood(
    family: &Family,
    data: &Dataset,
    config: &FitConfig,
) -> Result<(Vec<f64>, f64, usize)> {
    let p = family.param_count();
    if data.n() <= p {
        return Err(Error::DegenerateData(
            "need more observations than parameters".into(),
        ));
    }
    let start = family.moment_start(data)?;
    let xfs: Vec<Xf> = family.domains().into_iter().map(xf_for).collect();
    let internal_start: Vec<f64> = start
        .values
        .iter()
        .zip(&xfs)
        .map(|(&v, &xf)| to_internal(xf, v))
        .collect();
    let scales: Vec<f64> = internal_start
        .iter()
        .map(|v| v.abs().max(config.scale_guard))
        .collect();
    let u0: Vec<f64> = internal_start
        .iter()
        .zip(&scales)
        .map(|(v, s)| v / s)
        .collect();

    let to_theta = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(&scales)
            .zip(&xfs)
            .map(|((ui, si), &xf)| to_natural(xf, ui * si))
            .collect()
    };

    let mut objective = |u: &[f64]| -> f64 {
        let theta = to_theta(u);
        if theta.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        if family.validate_theta(&theta).is_err() {
            return f64::INFINITY;
        }
        match family.loglik(&theta, data) {
            Ok(ll) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    };

    let max_iter = config.max_iter.unwrap_or(2000 * p);
    let outcome = nelder_mead(&mut objective, &u0, NM_INIT_STEP, max_iter, config.rel_tol);
    if !outcome.converged {
        return Err(Error::NonConvergence { iterations: outcome.iterations });
    }
    // restart with a small simplex to localize the vertex well beyond the
    // f-spread criterion (the spread test saturates near n * rounding noise)
    let polish = nelder_mead(&mut objective, &outcome.x, 1e-3, 300 * p, 1e-13);
    let iterations = outcome.iterations + polish.iterations;
    let theta = to_theta(&polish.x);
    family.validate_theta(&theta)?;
    let loglik = family.loglik(&theta, data)?;
    Ok((theta, loglik, iterations))
}

/// Full maximum-likelihood fit: simplex optimization in rescaled transformed
/// coordinates, score rows, information estimate and influence rows.
pub fn fit_mle(family: &Family, data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    let (theta, loglik, iterations) = maximize_likelihood(family, data, config)?;
    let scores = score_matrix(family, &theta, data, config)?;
    let (info, info_inv) = information_estimate(&scores)?;
    let influence = &scores * &info_inv;
    Ok(FitResult {
        theta_n: ParamVector::new(theta),
        loglik,
        info,
        info_inv,
        scores,
        influence,
        converged: true,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn richardson_quadratic_is_exact() {
        let theta = [1.5, -2.0, 0.3];
        let g = richardson_gradient(|t| t.iter().map(|v| v * v).sum(), &theta).unwrap();
        for (gi, ti) in g.iter().zip(&theta) {
            assert_abs_diff_eq!(*gi, 2.0 * ti, epsilon = 1e-9);
        }
    }

    #[test]
    fn richardson_constant_is_zero() {
        let g = richardson_gradient(|_| 42.0, &[1.0, 2.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn richardson_transcendental_accuracy() {
        // relative accuracy target 1e-7 on smooth inputs
        let theta = [0.7, 1.9];
        let g = richardson_gradient(|t| (t[0] * t[1]).sin() + t[0].exp(), &theta).unwrap();
        let want0 = theta[1] * (theta[0] * theta[1]).cos() + theta[0].exp();
        let want1 = theta[0] * (theta[0] * theta[1]).cos();
        assert!((g[0] - want0).abs() / want0.abs() <= 1e-7);
        assert!((g[1] - want1).abs() / want1.abs() <= 1e-7);
    }

    #[test]
    fn richardson_respects_boundary() {
        // f defined only for t[0] > 0
        let theta = [1e-6];
        let g = richardson_gradient_bounded(|t| t[0].ln(), &theta, &[0.0], &[f64::INFINITY])
            .unwrap();
        assert!((g[0] - 1e6).abs() / 1e6 <= 1e-4, "g = {}", g[0]);
    }

    #[test]
    fn richardson_fails_on_nan_everywhere() {
        let r = richardson_gradient(|_| f64::NAN, &[1.0]);
        assert!(matches!(r, Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = nelder_mead(f, &[-1.2, 1.0], NM_INIT_STEP, 4000, 1e-12);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn fit_univariate_normal_matches_closed_form() {
        let fam = Family::from_id("norm", 1).unwrap();
        let mut rng = RngStream::new(3).child(0).rng();
        let data = fam.sample(&[10.0, 1.0], 400, &mut rng).unwrap();
        let fit = fit_mle(&fam, &data, &FitConfig::default()).unwrap();
        let n = data.n() as f64;
        let mean = data.as_flat().iter().sum::<f64>() / n;
        let var = data.as_flat().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert_abs_diff_eq!(fit.theta_n.values[0], mean, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.theta_n.values[1], var, epsilon = 1e-6);
        assert!(fit.converged);

        // Fisher information of the normal: diag(1/sigma^2, 1/(2 sigma^4))
        assert!((fit.info[(0, 0)] - 1.0 / var).abs() / (1.0 / var) < 0.25);
        let i11 = 1.0 / (2.0 * var * var);
        assert!((fit.info[(1, 1)] - i11).abs() / i11 < 0.35);

        // first-order condition: score column means near zero relative to the
        // per-observation score spread
        for j in 0..2 {
            let mean_score = fit.scores.column(j).sum() / n;
            let sd = fit.info[(j, j)].sqrt();
            assert!(mean_score.abs() <= 1e-4 * sd, "score mean {mean_score}");
        }
        // influence = scores * info_inv by construction
        let recomputed = &fit.scores * &fit.info_inv;
        assert_abs_diff_eq!(
            (recomputed - &fit.influence).norm(),
            0.0,
            epsilon = 1e-12
        );
        // influence centering: column means near zero at the optimum
        for j in 0..2 {
            let mean_infl = fit.influence.column(j).sum() / n;
            let sd = fit.info_inv[(j, j)].sqrt();
            assert!(mean_infl.abs() <= 1e-4 * sd, "influence mean {mean_infl}");
        }
    }

    #[test]
    fn fit_multivariate_normal_matches_sample_moments() {
        let fam = Family::from_id("mvnorm", 2).unwrap();
        let truth = [1.0, -2.0, 0.8, 1.5, 0.45];
        let mut rng = RngStream::new(4).child(0).rng();
        let data = fam.sample(&truth, 300, &mut rng).unwrap();
        let fit = fit_mle(&fam, &data, &FitConfig::default()).unwrap();
        let closed = fam.closed_form_mle(&data).unwrap().unwrap();
        for (a, b) in fit.theta_n.values.iter().zip(&closed.values) {
            assert!((a - b).abs() <= 1e-4, "{:?} vs {:?}", fit.theta_n, closed);
        }
    }

    #[test]
    fn fit_gamma_within_sampling_error() {
        let fam = Family::from_id("gamma", 1).unwrap();
        let truth = [98.671, 9.866];
        let mut rng = RngStream::new(5).child(0).rng();
        let data = fam.sample(&truth, 2000, &mut rng).unwrap();
        let fit = fit_mle(&fam, &data, &FitConfig::default()).unwrap();
        for j in 0..2 {
            let se = fit.info_inv[(j, j)].sqrt() / (data.n() as f64).sqrt();
            assert!(
                (fit.theta_n.values[j] - truth[j]).abs() <= 3.0 * se,
                "param {j}: {} vs {} (se {se})",
                fit.theta_n.values[j],
                truth[j]
            );
        }
    }

    #[test]
    fn information_rejects_duplicated_scores() {
        let row = [0.3, -1.0, 2.0];
        let scores = DMatrix::from_fn(50, 3, |_, j| row[j]);
        assert!(matches!(
            information_estimate(&scores),
            Err(Error::SingularInformation(_)) | Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn information_split_sample_stability() {
        // empirical info from two half-samples agrees within 10 percent for a
        // bivariate t at the truth
        let fam = Family::from_id("mvt5", 2).unwrap();
        let theta = [0.0, 0.0, 1.0, 1.0, 0.309];
        let mut rng = RngStream::new(6).child(0).rng();
        let data = fam.sample(&theta, 5000, &mut rng).unwrap();
        let cfg = FitConfig::analytic();
        let scores = score_matrix(&fam, &theta, &data, &cfg).unwrap();
        let half = 2500;
        let (i1, _) = information_estimate(&scores.rows(0, half).into_owned()).unwrap();
        let (i2, _) = information_estimate(&scores.rows(half, half).into_owned()).unwrap();
        for j in 0..5 {
            let rel = (i1[(j, j)] - i2[(j, j)]).abs() / i1[(j, j)];
            assert!(rel < 0.10, "diag {j}: {} vs {}", i1[(j, j)], i2[(j, j)]);
        }
    }

    #[test]
    fn cdf_gradient_normal_closed_form() {
        let fam = Family::from_id("norm", 1).unwrap();
        let theta = [10.0, 1.0];
        let pts = Dataset::univariate(vec![8.5, 10.0, 11.7]).unwrap();
        let grad = cdf_gradient(&fam, &theta, &pts, &FitConfig::default()).unwrap();
        for (j, row) in pts.rows().enumerate() {
            let x = row[0];
            let z = x - 10.0;
            let phi = (-(z * z) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            // dF/dmu = -phi(z)/sigma, dF/dvar = -z phi(z) / (2 var^{3/2})
            assert_abs_diff_eq!(grad[(j, 0)], -phi, epsilon = 1e-6);
            assert_abs_diff_eq!(grad[(j, 1)], -z * phi / 2.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn cdf_gradient_vanishes_in_far_left_tail() {
        let fam = Family::from_id("norm", 1).unwrap();
        let pts = Dataset::univariate(vec![-40.0]).unwrap();
        let grad = cdf_gradient(&fam, &[0.0, 1.0], &pts, &FitConfig::default()).unwrap();
        assert!(grad[(0, 0)].abs() < 1e-12 && grad[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn refit_invariance_parametric_bootstrap_sanity() {
        // data simulated from the fitted distribution recovers theta within
        // 3 standard errors
        let fam = Family::from_id("logis", 1).unwrap();
        let mut rng = RngStream::new(7).child(0).rng();
        let data = fam.sample(&[10.0, 0.572], 1500, &mut rng).unwrap();
        let fit = fit_mle(&fam, &data, &FitConfig::default()).unwrap();
        let mut rng2 = RngStream::new(7).child(1).rng();
        let data2 = fam
            .sample(fit.theta_n.as_slice(), 1500, &mut rng2)
            .unwrap();
        let fit2 = fit_mle(&fam, &data2, &FitConfig::default()).unwrap();
        for j in 0..2 {
            let se = fit.info_inv[(j, j)].sqrt() / (data.n() as f64).sqrt();
            assert!(
                (fit2.theta_n.values[j] - fit.theta_n.values[j]).abs() <= 3.0 * se,
                "param {j}"
            );
        }
    }

    #[test]
    fn nonconvergence_is_reported() {
        let fam = Family::from_id("gamma", 1).unwrap();
        let mut rng = RngStream::new(8).child(0).rng();
        let data = fam.sample(&[98.671, 9.866], 200, &mut rng).unwrap();
        let cfg = FitConfig { max_iter: Some(3), ..Default::default() };
        assert!(matches!(
            fit_mle(&fam, &data, &cfg),
            Err(Error::NonConvergence { .. })
        ));
    }
}
