//! Wall-time comparison of the multiplier procedure (numeric and analytic
//! gradient paths) with the parametric bootstrap on one dataset.

use gofmult_core::estimation::FitConfig;
use gofmult_core::gof::{self, Statistic, TestConfig};
use gofmult_core::{Dataset, Family, Result, RngStream};
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub family: String,
    pub n: usize,
    pub dim: usize,
    pub n_rep: usize,
    pub mp_numeric_s: f64,
    pub mp_numeric_pvalue: f64,
    /// Only for families with an analytic gradient path (multivariate t).
    pub mp_analytic_s: Option<f64>,
    pub mp_analytic_pvalue: Option<f64>,
    pub pb_s: f64,
    pub pb_pvalue: f64,
}

impl TimingReport {
    pub fn speedup_pb_over_mp(&self) -> f64 {
        self.pb_s / self.mp_analytic_s.unwrap_or(self.mp_numeric_s)
    }

    pub fn speedup_analytic_over_numeric(&self) -> Option<f64> {
        self.mp_analytic_s.map(|a| self.mp_numeric_s / a)
    }
}

/// Time MP (numeric gradients), MP (analytic gradients, t families only) and
/// PB end to end on the same data, statistic Sn*.
pub fn run_timing(
    family: &Family,
    data: &Dataset,
    n_rep: usize,
    seed: u64,
) -> Result<TimingReport> {
    let stream = RngStream::new(seed);
    let numeric_cfg = TestConfig::default();

    let t0 = Instant::now();
    let mp_numeric = gof::multiplier_test(
        family,
        data,
        Statistic::SnStar,
        n_rep,
        stream.child(1),
        &numeric_cfg,
    )?;
    let mp_numeric_s = t0.elapsed().as_secs_f64();

    let (mp_analytic_s, mp_analytic_pvalue) = if family.supports_analytic_gradients() {
        let analytic_cfg = TestConfig { fit: FitConfig::analytic(), ..TestConfig::default() };
        let t0 = Instant::now();
        let res = gof::multiplier_test(
            family,
            data,
            Statistic::SnStar,
            n_rep,
            stream.child(1),
            &analytic_cfg,
        )?;
        (Some(t0.elapsed().as_secs_f64()), Some(res.pvalue))
    } else {
        (None, None)
    };

    let t0 = Instant::now();
    let pb = gof::parametric_bootstrap_test(
        family,
        data,
        Statistic::SnStar,
        n_rep,
        stream.child(2),
        &numeric_cfg,
    )?;
    let pb_s = t0.elapsed().as_secs_f64();

    Ok(TimingReport {
        family: family.name(),
        n: data.n(),
        dim: data.dim(),
        n_rep,
        mp_numeric_s,
        mp_numeric_pvalue: mp_numeric.pvalue,
        mp_analytic_s,
        mp_analytic_pvalue,
        pb_s,
        pb_pvalue: pb.pvalue,
    })
}
