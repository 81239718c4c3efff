//! Deterministic CDF kernels for the standard normal and Student t in
//! dimensions one to three.
//!
//! These are the building blocks for every multivariate family CDF and for
//! the analytic gradients. All kernels are fixed-node quadratures or closed
//! forms: results depend only on the inputs, never on random number
//! generation, so repeated evaluations are bit-identical.
//!
//! The bivariate normal follows Genz's rewrite of the Drezner--Wesolowsky
//! algorithm. The bivariate t uses the Dunnett--Sobel finite series when the
//! degrees of freedom are a (small) integer and otherwise a single
//! tangent-substituted Gauss--Legendre integral over the conditioned
//! univariate t. The trivariate kernels reduce to an outer one-dimensional
//! quadrature over a conditioned bivariate term.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::sync::OnceLock;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Node count of the outer quadrature in the trivariate reductions.
pub const OUTER_QUAD_NODES: usize = 256;
/// Node count of the generic (non-integer df) bivariate t reduction.
pub const BVT_QUAD_NODES: usize = 96;

/// Degrees of freedom at or above this threshold are treated as the normal
/// limit by the dispatching kernels.
pub const NORMAL_LIMIT_NU: f64 = 1e7;

const CORR_PIVOT_TOL: f64 = 1e-12;
const CORR_CLAMP: f64 = 1.0 - 1e-10;

// ---------------------------------------------------------------------------
// univariate kernels
// ---------------------------------------------------------------------------

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * PI).sqrt()
}

pub fn norm_logpdf(x: f64) -> f64 {
    -(x * x) / 2.0 - 0.5 * (2.0 * PI).ln()
}

fn std_normal() -> &'static Normal {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::new(0.0, 1.0).expect("standard normal"))
}

/// Standard normal quantile, Newton-polished against `norm_cdf`.
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    let mut x = std_normal().inverse_cdf(p);
    if x.abs() < 6.0 {
        for _ in 0..2 {
            let err = norm_cdf(x) - p;
            x -= err / norm_pdf(x);
        }
    }
    x
}

/// Student t density with `nu` degrees of freedom.
pub fn t_pdf(x: f64, nu: f64) -> f64 {
    t_logpdf(x, nu).exp()
}

pub fn t_logpdf(x: f64, nu: f64) -> f64 {
    libm::lgamma((nu + 1.0) / 2.0)
        - libm::lgamma(nu / 2.0)
        - 0.5 * (nu * PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

/// Student t CDF. Integer degrees of freedom up to 100 take the classical
/// closed-form recursion; everything else goes through the regularized
/// incomplete beta.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if nu >= NORMAL_LIMIT_NU {
        return norm_cdf(x);
    }
    if nu.fract() == 0.0 && (1.0..=100.0).contains(&nu) {
        return t_cdf_int(nu as u32, x);
    }
    StudentsT::new(0.0, 1.0, nu).expect("t cdf df").cdf(x)
}

// Closed-form t CDF for integer degrees of freedom (A&S 26.7 recursion).
fn t_cdf_int(nu: u32, t: f64) -> f64 {
    let p = match nu {
        1 => 0.5 + t.atan() / PI,
        2 => 0.5 * (1.0 + t / (2.0 + t * t).sqrt()),
        _ => {
            let nuf = f64::from(nu);
            let tt = t * t;
            let cs = 1.0 / (1.0 + tt / nuf);
            let mut poly = 1.0;
            let mut j = i64::from(nu) - 2;
            while j >= 2 {
                poly = 1.0 + (j - 1) as f64 * cs * poly / j as f64;
                j -= 2;
            }
            if nu % 2 == 1 {
                let ts = t / nuf.sqrt();
                0.5 + (ts.atan() + ts * cs * poly) / PI
            } else {
                let sn = t / (nuf + tt).sqrt();
                0.5 * (1.0 + sn * poly)
            }
        }
    };
    p.clamp(0.0, 1.0)
}

/// Student t quantile, Newton-polished against `t_cdf`.
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    if nu >= NORMAL_LIMIT_NU {
        return norm_quantile(p);
    }
    let mut x = StudentsT::new(0.0, 1.0, nu)
        .expect("t quantile df")
        .inverse_cdf(p);
    for _ in 0..3 {
        let pdf = t_pdf(x, nu);
        if pdf < 1e-290 {
            break;
        }
        let step = (t_cdf(x, nu) - p) / pdf;
        x -= step;
        if step.abs() <= 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes
// ---------------------------------------------------------------------------

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn outer_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static N: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    N.get_or_init(|| gauss_legendre(OUTER_QUAD_NODES))
}

fn bvt_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static N: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    N.get_or_init(|| gauss_legendre(BVT_QUAD_NODES))
}

// ---------------------------------------------------------------------------
// bivariate normal
// ---------------------------------------------------------------------------

// Gauss-Legendre (weight, node) pairs from Genz's BVND; nodes are the
// negative half of the symmetric rule.
const GL_6: [(f64, f64); 3] = [
    (0.1713244923791705, -0.9324695142031522),
    (0.3607615730481384, -0.6612093864662647),
    (0.4679139345726904, -0.2386191860831970),
];
const GL_12: [(f64, f64); 6] = [
    (0.04717533638651177, -0.9815606342467191),
    (0.1069393259953183, -0.9041172563704750),
    (0.1600783285433464, -0.7699026741943050),
    (0.2031674267230659, -0.5873179542866171),
    (0.2334925365383547, -0.3678314989981802),
    (0.2491470458134029, -0.1252334085114692),
];
const GL_20: [(f64, f64); 10] = [
    (0.01761400713915212, -0.9931285991850949),
    (0.04060142980038694, -0.9639719272779138),
    (0.06267204833410906, -0.9122344282513259),
    (0.08327674157670475, -0.8391169718222188),
    (0.1019301198172404, -0.7463319064601508),
    (0.1181945319615184, -0.6360536807265150),
    (0.1316886384491766, -0.5108670019508271),
    (0.1420961093183821, -0.3737060887154196),
    (0.1491729864726037, -0.2277858511416451),
    (0.1527533871307259, -0.07652652113349733),
];

fn bvn_quadrature(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL_6
    } else if rho_abs < 0.75 {
        &GL_12
    } else {
        &GL_20
    }
}

// Genz's BVND: P(X > dh, Y > dk) for standard bivariate normal correlation r.
fn bvnd_upper(dh: f64, dk: f64, r: f64) -> f64 {
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = 0.5 * r.asin();
            for (w, x) in bvn_quadrature(r.abs()) {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (2.0 * PI);
        }
        bvn + norm_cdf(-h) * norm_cdf(-k)
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let mut a = a_s.sqrt();
            let b_s = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(b_s / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0
                    + c * d * a_s * a_s / 5.0);
            }
            if -hk < 100.0 {
                let b = b_s.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * (2.0 * PI).sqrt()
                    * norm_cdf(-b / a)
                    * b
                    * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
            }
            a /= 2.0;
            for (w, x) in &GL_20 {
                for is in [-1.0, 1.0] {
                    let xs = (a * (is * x + 1.0)).powi(2);
                    let rs = (1.0 - xs).sqrt();
                    let asr = -(b_s / xs + hk) / 2.0;
                    if asr > -100.0 {
                        bvn += a
                            * w
                            * asr.exp()
                            * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                                - (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
            }
            bvn = -bvn / (2.0 * PI);
        }
        if r > 0.0 {
            bvn + norm_cdf(-h.max(k))
        } else {
            bvn = -bvn;
            if k > h {
                bvn += norm_cdf(k) - norm_cdf(h);
            }
            bvn
        }
    }
}

/// Standard bivariate normal CDF `P(X <= h, Y <= k)` with correlation `rho`.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return norm_cdf(k);
    }
    if k == f64::INFINITY {
        return norm_cdf(h);
    }
    let rho = clamp_corr(rho);
    if rho >= CORR_CLAMP {
        return norm_cdf(h.min(k));
    }
    if rho <= -CORR_CLAMP {
        return (norm_cdf(h) + norm_cdf(k) - 1.0).max(0.0);
    }
    bvnd_upper(-h, -k, rho).clamp(0.0, 1.0)
}

fn clamp_corr(rho: f64) -> f64 {
    rho.clamp(-1.0, 1.0)
}

// ---------------------------------------------------------------------------
// bivariate t
// ---------------------------------------------------------------------------

/// Standard bivariate t CDF `P(X <= h, Y <= k)` with correlation `rho` and
/// `nu` degrees of freedom.
pub fn bvt_cdf(h: f64, k: f64, rho: f64, nu: f64) -> f64 {
    assert!(nu > 0.0, "bvt_cdf needs nu > 0");
    if nu >= NORMAL_LIMIT_NU {
        return bvn_cdf(h, k, rho);
    }
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return t_cdf(k, nu);
    }
    if k == f64::INFINITY {
        return t_cdf(h, nu);
    }
    let rho = clamp_corr(rho);
    if rho >= CORR_CLAMP {
        return t_cdf(h.min(k), nu);
    }
    if rho <= -CORR_CLAMP {
        return (t_cdf(h, nu) + t_cdf(k, nu) - 1.0).max(0.0);
    }
    let v = if nu.fract() == 0.0 && nu <= 100.0 {
        bvt_dunnett_sobel(nu as u32, h, k, rho)
    } else {
        bvt_quad(h, k, rho, nu)
    };
    v.clamp(0.0, 1.0)
}

// Dunnett-Sobel (1954) finite series for integer degrees of freedom, after
// Genz's BVTL.
fn bvt_dunnett_sobel(nu: u32, dh: f64, dk: f64, r: f64) -> f64 {
    let nuf = f64::from(nu);
    let tpi = 2.0 * PI;
    let ors = 1.0 - r * r;
    let hrk = dh - r * dk;
    let krh = dk - r * dh;
    let (xnhk, xnkh) = if hrk.abs() + ors > 0.0 {
        (
            hrk * hrk / (hrk * hrk + ors * (nuf + dk * dk)),
            krh * krh / (krh * krh + ors * (nuf + dh * dh)),
        )
    } else {
        (0.0, 0.0)
    };
    let hs = (dh - r * dk).signum();
    let ks = (dk - r * dh).signum();
    let mut bvt;
    if nu.is_multiple_of(2) {
        bvt = (ors.sqrt()).atan2(-r) / tpi;
        let mut gmph = dh / (16.0 * (nuf + dh * dh)).sqrt();
        let mut gmpk = dk / (16.0 * (nuf + dk * dk)).sqrt();
        let mut btnckh = 2.0 * (xnkh.sqrt()).atan2((1.0 - xnkh).sqrt()) / PI;
        let mut btpdkh = 2.0 * (xnkh * (1.0 - xnkh)).sqrt() / PI;
        let mut btnchk = 2.0 * (xnhk.sqrt()).atan2((1.0 - xnhk).sqrt()) / PI;
        let mut btpdhk = 2.0 * (xnhk * (1.0 - xnhk)).sqrt() / PI;
        for j in 1..=(nu / 2) {
            let jf = f64::from(j);
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btnckh += btpdkh;
            btpdkh = 2.0 * jf * btpdkh * (1.0 - xnkh) / (2.0 * jf + 1.0);
            btnchk += btpdhk;
            btpdhk = 2.0 * jf * btpdhk * (1.0 - xnhk) / (2.0 * jf + 1.0);
            gmph *= (jf - 0.5) / (jf * (1.0 + dh * dh / nuf));
            gmpk *= (jf - 0.5) / (jf * (1.0 + dk * dk / nuf));
        }
    } else {
        let qhrk = (dh * dh + dk * dk - 2.0 * r * dh * dk + nuf * ors).sqrt();
        let hkrn = dh * dk + r * nuf;
        let hkn = dh * dk - nuf;
        let hpk = dh + dk;
        bvt = (-nuf.sqrt() * (hkn * qhrk + hpk * hkrn))
            .atan2(hkn * hkrn - nuf * hpk * qhrk)
            / tpi;
        if bvt < -1e-15 {
            bvt += 1.0;
        }
        let mut gmph = dh / (tpi * nuf.sqrt() * (1.0 + dh * dh / nuf));
        let mut gmpk = dk / (tpi * nuf.sqrt() * (1.0 + dk * dk / nuf));
        let mut btnckh = xnkh.sqrt();
        let mut btpdkh = btnckh;
        let mut btnchk = xnhk.sqrt();
        let mut btpdhk = btnchk;
        for j in 1..=((nu - 1) / 2) {
            let jf = f64::from(j);
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btpdkh *= (2.0 * jf - 1.0) * (1.0 - xnkh) / (2.0 * jf);
            btnckh += btpdkh;
            btpdhk *= (2.0 * jf - 1.0) * (1.0 - xnhk) / (2.0 * jf);
            btnchk += btpdhk;
            gmph *= jf / ((jf + 0.5) * (1.0 + dh * dh / nuf));
            gmpk *= jf / ((jf + 0.5) * (1.0 + dk * dk / nuf));
        }
    }
    bvt
}

// Single-integral reduction over the conditioned univariate t: given X1 = s,
// sqrt((nu+1)/(nu+s^2)) (X2 - rho s) / sqrt(1-rho^2) is t with nu+1 df.
fn bvt_quad(h: f64, k: f64, rho: f64, nu: f64) -> f64 {
    let (nodes, weights) = bvt_nodes();
    let lo = -FRAC_PI_2;
    let hi = h.atan();
    let c = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let or = (1.0 - rho * rho).sqrt();
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let theta = mid + c * x;
        let s = theta.tan();
        let sec2 = 1.0 + s * s;
        let g = t_pdf(s, nu) * sec2;
        if g == 0.0 {
            continue;
        }
        let arg = (k - rho * s) / or * ((nu + 1.0) / (nu + s * s)).sqrt();
        acc += w * g * t_cdf(arg, nu + 1.0);
    }
    acc * c
}

// ---------------------------------------------------------------------------
// trivariate kernels
// ---------------------------------------------------------------------------

// Conditioned bivariate data for pivoting on coordinate `p` of a trivariate
// correlation matrix given as (r12, r13, r23).
struct Conditioned {
    // correlations of the two free coordinates with the pivot
    ra: f64,
    rb: f64,
    // conditional correlation of the free pair given the pivot
    rc: f64,
    // conditional standard deviations (normal case)
    sa: f64,
    sb: f64,
}

fn condition_on(pivot: usize, rho: &[f64; 3]) -> Conditioned {
    let (r12, r13, r23) = (rho[0], rho[1], rho[2]);
    let (ra, rb, rab) = match pivot {
        0 => (r12, r13, r23),
        1 => (r12, r23, r13),
        _ => (r13, r23, r12),
    };
    let va = (1.0 - ra * ra).max(1e-14);
    let vb = (1.0 - rb * rb).max(1e-14);
    let sa = va.sqrt();
    let sb = vb.sqrt();
    let rc = clamp_corr((rab - ra * rb) / (sa * sb));
    Conditioned { ra, rb, rc, sa, sb }
}

fn split_pivot(pivot: usize, upper: &[f64; 3]) -> (f64, f64, f64) {
    match pivot {
        0 => (upper[0], upper[1], upper[2]),
        1 => (upper[1], upper[0], upper[2]),
        _ => (upper[2], upper[0], upper[1]),
    }
}

fn argmin3(v: &[f64; 3]) -> usize {
    let mut idx = 0;
    for i in 1..3 {
        if v[i] < v[idx] {
            idx = i;
        }
    }
    idx
}

// Marginal pair correlation when coordinate `drop` is integrated out.
fn marginal_pair(drop: usize, upper: &[f64; 3], rho: &[f64; 3]) -> (f64, f64, f64) {
    match drop {
        0 => (upper[1], upper[2], rho[2]),
        1 => (upper[0], upper[2], rho[1]),
        _ => (upper[0], upper[1], rho[0]),
    }
}

/// Standard trivariate normal CDF. `rho` packs the off-diagonal correlations
/// as `(r12, r13, r23)`.
pub fn tvn_cdf(upper: [f64; 3], rho: [f64; 3]) -> f64 {
    if upper.contains(&f64::NEG_INFINITY) {
        return 0.0;
    }
    if let Some(drop) = upper.iter().position(|&u| u == f64::INFINITY) {
        let (a, b, r) = marginal_pair(drop, &upper, &rho);
        return bvn_cdf(a, b, r);
    }
    let pivot = argmin3(&upper);
    let (bp, ba, bb) = split_pivot(pivot, &upper);
    let cond = condition_on(pivot, &rho);
    // Beyond |s| ~ 9 the normal weight is below 4e-19.
    let hi = bp.min(9.0).atan();
    let lo = (-9.0f64).atan();
    if hi <= lo {
        return 0.0;
    }
    let tail = if bp > 9.0 { norm_cdf(bp) - norm_cdf(9.0) } else { 0.0 };
    let (nodes, weights) = outer_nodes();
    let c = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let s = (mid + c * x).tan();
        let sec2 = 1.0 + s * s;
        let g = norm_pdf(s) * sec2;
        if g == 0.0 {
            continue;
        }
        let ua = (ba - cond.ra * s) / cond.sa;
        let ub = (bb - cond.rb * s) / cond.sb;
        acc += w * g * bvnd_upper(-ua, -ub, cond.rc);
    }
    (acc * c + tail).clamp(0.0, 1.0)
}

/// Standard trivariate t CDF with `nu` degrees of freedom; `rho` as in
/// [`tvn_cdf`]. Conditioning on the pivot coordinate gives a bivariate t
/// with `nu + 1` degrees of freedom under the integral.
pub fn tvt_cdf(upper: [f64; 3], rho: [f64; 3], nu: f64) -> f64 {
    assert!(nu > 0.0, "tvt_cdf needs nu > 0");
    if nu >= NORMAL_LIMIT_NU {
        return tvn_cdf(upper, rho);
    }
    if upper.contains(&f64::NEG_INFINITY) {
        return 0.0;
    }
    if let Some(drop) = upper.iter().position(|&u| u == f64::INFINITY) {
        let (a, b, r) = marginal_pair(drop, &upper, &rho);
        return bvt_cdf(a, b, r, nu);
    }
    let pivot = argmin3(&upper);
    let (bp, ba, bb) = split_pivot(pivot, &upper);
    let cond = condition_on(pivot, &rho);
    let (nodes, weights) = outer_nodes();
    let lo = -FRAC_PI_2;
    let hi = bp.atan();
    let c = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let nu1 = nu + 1.0;
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let s = (mid + c * x).tan();
        let sec2 = 1.0 + s * s;
        let g = t_pdf(s, nu) * sec2;
        if g == 0.0 {
            continue;
        }
        let scale = (nu1 / (nu + s * s)).sqrt();
        let ua = scale * (ba - cond.ra * s) / cond.sa;
        let ub = scale * (bb - cond.rb * s) / cond.sb;
        acc += w * g * bvt_cdf(ua, ub, cond.rc, nu1);
    }
    (acc * c).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// orthant query interface
// ---------------------------------------------------------------------------

/// A lower-orthant probability query `P(X_1 <= u_1, ..., X_d <= u_d)` for a
/// standard (zero mean, unit dispersion) normal or t vector.
#[derive(Debug, Clone)]
pub struct OrthantQuery {
    /// Upper integration limits; length is the dimension, at most 3.
    pub upper: Vec<f64>,
    /// Packed off-diagonal correlations: `[]`, `[r12]` or `[r12, r13, r23]`.
    pub corr: Vec<f64>,
    /// Degrees of freedom; `f64::INFINITY` encodes the normal.
    pub nu: f64,
}

impl OrthantQuery {
    pub fn new(upper: Vec<f64>, corr: Vec<f64>, nu: f64) -> Result<Self> {
        let d = upper.len();
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidInput(format!(
                "orthant query dimension must be 1..=3, got {d}"
            )));
        }
        if corr.len() != d * (d - 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "expected {} correlation entries for dimension {d}, got {}",
                d * (d - 1) / 2,
                corr.len()
            )));
        }
        if !(nu > 0.0) {
            return Err(Error::domain("degrees of freedom must be positive"));
        }
        corr_pd_check(&corr)?;
        if upper.iter().any(|u| u.is_nan()) {
            return Err(Error::domain("NaN upper limit"));
        }
        Ok(OrthantQuery { upper, corr, nu })
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }
}

/// Cholesky pivot check (tolerance 1e-12) for a packed correlation vector.
pub fn corr_pd_check(corr: &[f64]) -> Result<()> {
    match corr.len() {
        0 => Ok(()),
        1 => {
            if 1.0 - corr[0] * corr[0] >= CORR_PIVOT_TOL {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "correlation {} is numerically singular",
                    corr[0]
                )))
            }
        }
        3 => {
            let (r12, r13, r23) = (corr[0], corr[1], corr[2]);
            let l22s = 1.0 - r12 * r12;
            if l22s < CORR_PIVOT_TOL {
                return Err(Error::domain("correlation matrix pivot 2 not positive"));
            }
            let l32 = (r23 - r12 * r13) / l22s.sqrt();
            let l33s = 1.0 - r13 * r13 - l32 * l32;
            if l33s < CORR_PIVOT_TOL {
                return Err(Error::domain("correlation matrix pivot 3 not positive"));
            }
            Ok(())
        }
        other => Err(Error::InvalidInput(format!(
            "unsupported packed correlation length {other}"
        ))),
    }
}

/// Evaluate an orthant query with the appropriate deterministic kernel.
pub fn orthant_prob(q: &OrthantQuery) -> f64 {
    let normal = q.nu >= NORMAL_LIMIT_NU || q.nu == f64::INFINITY;
    match q.dim() {
        1 => {
            if normal {
                norm_cdf(q.upper[0])
            } else {
                t_cdf(q.upper[0], q.nu)
            }
        }
        2 => {
            if normal {
                bvn_cdf(q.upper[0], q.upper[1], q.corr[0])
            } else {
                bvt_cdf(q.upper[0], q.upper[1], q.corr[0], q.nu)
            }
        }
        _ => {
            let upper = [q.upper[0], q.upper[1], q.upper[2]];
            let corr = [q.corr[0], q.corr[1], q.corr[2]];
            if normal {
                tvn_cdf(upper, corr)
            } else {
                tvt_cdf(upper, corr, q.nu)
            }
        }
    }
}
