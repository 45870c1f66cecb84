use std::io::{Read, Write};

use rayon::prelude::*;
use selstbc::feedback::mix_metric;
use selstbc::montecarlo::{estimate_metric, TrialPlan};
use selstbc::performance::{
    asymptotic_error_rate, asymptotic_outage, asymptotic_table, averaged_metric, Metric,
};
use selstbc::snr_model::SchemeConfig;
use serde::{Deserialize, Serialize};

use crate::config::RunSpec;
use crate::{CliError, CliResult};

pub const HEADER: [&str; 13] = [
    "scheme", "n_t", "n_s", "n_r", "m", "code", "metric", "p_e", "snr_db", "analytic", "mc_mean", "mc_stderr",
    "asymptotic",
];

/// One sweep point. Optional columns are empty unless requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub n_t: u32,
    pub n_s: u32,
    pub n_r: u32,
    pub m: String,
    pub code: String,
    /// Modulation name, or `outage:R`.
    pub metric: String,
    pub p_e: f64,
    pub snr_db: f64,
    pub analytic: f64,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub asymptotic: Option<f64>,
}

impl SweepRow {
    /// Everything that identifies a curve except `p_e`.
    pub fn family(&self) -> (String, u32, u32, u32, String, String, String) {
        (self.scheme.clone(), self.n_t, self.n_s, self.n_r, self.m.clone(), self.code.clone(), self.metric.clone())
    }

    pub fn label(&self) -> String {
        format!(
            "{} n_t={} n_s={} n_r={} m={} {} {} p_e={}",
            self.scheme, self.n_t, self.n_s, self.n_r, self.m, self.code, self.metric, self.p_e
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    pub simulate: bool,
    pub asymptote: bool,
}

/// Seed of the `index`-th sweep point.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Feedback-weighted union-bound asymptote.
pub fn asymptotic_value(cfg: &SchemeConfig, metric: &Metric, fm: &selstbc::feedback::FeedbackModel, gamma_bar: f64) -> CliResult<f64> {
    let per_tasc: Vec<f64> = asymptotic_table(cfg)?
        .iter()
        .map(|p| match metric {
            Metric::ErrorRate(md) => asymptotic_error_rate(p, md, gamma_bar),
            Metric::Outage { rate } => asymptotic_outage(p, *rate, gamma_bar),
        })
        .collect::<selstbc::Result<_>>()?;
    Ok(mix_metric(&per_tasc, fm)?)
}

/// Rows ordered by (variant, p_e, snr) whatever the evaluation order.
pub fn run_sweep(spec: &RunSpec, opts: SweepOptions) -> CliResult<Vec<SweepRow>> {
    let snrs = spec.snr.points();
    let mut jobs = Vec::new();
    for cfg in &spec.variants {
        for &p_e in &spec.p_e {
            let fm = spec.feedback_model(cfg, p_e)?;
            for &snr_db in &snrs {
                jobs.push((cfg, fm.clone(), p_e, snr_db));
            }
        }
    }
    jobs.into_par_iter()
        .enumerate()
        .map(|(i, (cfg, fm, p_e, snr_db))| {
            let gamma_bar = cfg.gamma_bar(spec.es_n0(snr_db));
            let context = |e: CliError| match e {
                CliError::Numerical(msg) => CliError::Numerical(format!(
                    "{} n_t={} n_r={} p_e={p_e} snr={snr_db} dB: {msg}",
                    cfg.scheme, cfg.n_t, cfg.n_r
                )),
                other => other,
            };
            let analytic = averaged_metric(cfg, &spec.metric, &fm, gamma_bar).map_err(|e| context(e.into()))?;
            let (mc_mean, mc_stderr) = if opts.simulate {
                let mut plan = TrialPlan::new(cfg.clone(), fm.clone(), spec.metric, gamma_bar, spec.trials, point_seed(spec.seed, i as u64));
                plan.feedback_mode = spec.feedback_mode;
                plan.receive_mode = spec.receive_mode;
                let est = estimate_metric(&plan).map_err(|e| context(e.into()))?;
                (Some(est.mean), Some(est.std_error))
            } else {
                (None, None)
            };
            let asymptotic = if opts.asymptote {
                Some(asymptotic_value(cfg, &spec.metric, &fm, gamma_bar).map_err(context)?)
            } else {
                None
            };
            Ok(SweepRow {
                scheme: cfg.scheme.to_string(),
                n_t: cfg.n_t,
                n_s: cfg.n_s,
                n_r: cfg.n_r,
                m: cfg.m.to_string(),
                code: spec.code.to_string(),
                metric: spec.metric.to_string(),
                p_e,
                snr_db,
                analytic,
                mc_mean,
                mc_stderr,
                asymptotic,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> CliResult<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers()?.clone();
    let missing: Vec<String> = HEADER
        .iter()
        .filter(|h| !headers.iter().any(|x| x == **h))
        .map(|h| format!("missing column '{h}'"))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Config(missing));
    }
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::config(format!(
            "columns must be {} in this order",
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        let row: SweepRow = rec.map_err(|e| CliError::config(format!("row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}
