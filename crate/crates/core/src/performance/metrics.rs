use std::fmt;

use rayon::prelude::*;

use super::modulation::{Identity, ModulationSpec};
use super::unified::{j_expansion, j_hat_expansion};
use crate::feedback::{mix_metric, FeedbackModel};
use crate::snr_model::{output_model, OutputModel, SchemeConfig, Tasc};
use crate::{Error, Result};

/// What a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    ErrorRate(ModulationSpec),
    /// Outage at spectral efficiency R bit/s/Hz.
    Outage { rate: f64 },
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::ErrorRate(m) => write!(f, "{m}"),
            Metric::Outage { rate } => write!(f, "outage:{rate}"),
        }
    }
}

/// E[e^{-sγ}] = J(s, 0, s).
pub fn mgf(cfg: &SchemeConfig, tasc: &Tasc, s: f64, gamma_bar: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain("mgf", format!("s = {s} must be positive")));
    }
    j_expansion(&*output_model(cfg, tasc)?, s, 0.0, s, gamma_bar)
}

/// Error rate of one model through the modulation's identity.
pub fn model_error_rate(model: &OutputModel, modulation: &ModulationSpec, gamma_bar: f64) -> Result<f64> {
    let mut total = 0.0;
    for id in modulation.identities() {
        total += match id {
            Identity::J { theta, eps, phi } => j_expansion(model, theta, eps, phi, gamma_bar)?,
            Identity::JHat { theta, phi } => j_hat_expansion(model, theta, phi, gamma_bar)?,
        };
    }
    Ok(total)
}

/// Average BER (binary kinds) or SER (M-ary kinds) at average branch SNR γ̄.
pub fn error_rate(cfg: &SchemeConfig, tasc: &Tasc, modulation: &ModulationSpec, gamma_bar: f64) -> Result<f64> {
    model_error_rate(&*output_model(cfg, tasc)?, modulation, gamma_bar)
}

/// Pr{log₂(1 + γ) < R}.
pub fn outage(cfg: &SchemeConfig, tasc: &Tasc, rate: f64, gamma_bar: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain("outage", format!("rate = {rate} must be positive")));
    }
    if !(gamma_bar > 0.0) {
        return Err(Error::domain("outage", format!("gamma_bar = {gamma_bar} must be positive")));
    }
    Ok(output_model(cfg, tasc)?.cdf_at(rate.exp2() - 1.0, gamma_bar))
}

pub fn metric_value(cfg: &SchemeConfig, tasc: &Tasc, metric: &Metric, gamma_bar: f64) -> Result<f64> {
    match metric {
        Metric::ErrorRate(m) => error_rate(cfg, tasc, m, gamma_bar),
        Metric::Outage { rate } => outage(cfg, tasc, *rate, gamma_bar),
    }
}

/// The metric for every subset, in the codebook's subset order.
pub fn per_tasc_metric(cfg: &SchemeConfig, metric: &Metric, gamma_bar: f64) -> Result<Vec<f64>> {
    cfg.tascs()
        .par_iter()
        .map(|t| metric_value(cfg, t, metric, gamma_bar))
        .collect()
}

/// Feedback-averaged metric: Σ_k w_k · metric(c_k).
pub fn averaged_metric(cfg: &SchemeConfig, metric: &Metric, fm: &FeedbackModel, gamma_bar: f64) -> Result<f64> {
    if fm.codebook.k != cfg.num_tascs() as usize {
        return Err(Error::Config(format!(
            "feedback codebook has {} subsets but the configuration has {}",
            fm.codebook.k,
            cfg.num_tascs()
        )));
    }
    if fm.p_e == 0.0 {
        return metric_value(cfg, &Tasc::best(cfg), metric, gamma_bar);
    }
    mix_metric(&per_tasc_metric(cfg, metric, gamma_bar)?, fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snr_model::Scheme;
    use num::rational::Rational64;

    fn joint(n_t: u32, n_s: u32, n_r: u32, m: i64) -> SchemeConfig {
        SchemeConfig::new(Scheme::JointTrasStbc, n_t, n_s, n_r, Rational64::from_integer(m)).unwrap()
    }

    #[test]
    fn mgf_of_max_of_two() {
        let c = joint(2, 1, 1, 1);
        let v = mgf(&c, &Tasc::best(&c), 1.0, 1.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dbpsk_is_half_the_mgf() {
        let c = joint(4, 2, 2, 2);
        let dbpsk: ModulationSpec = "dbpsk".parse().unwrap();
        for t in c.tascs() {
            for g in [0.5, 3.0, 40.0] {
                let a = error_rate(&c, &t, &dbpsk, g).unwrap();
                let b = 0.5 * mgf(&c, &t, 1.0, g).unwrap();
                assert!((a - b).abs() <= 1e-15 * b.max(1e-300));
            }
        }
    }

    #[test]
    fn outage_threshold() {
        let c = joint(2, 1, 1, 1);
        let t = Tasc::best(&c);
        let v = outage(&c, &t, 2.0, 1.0).unwrap();
        assert!((v - (1.0 - (-3f64).exp()).powi(2)).abs() < 1e-15);
        assert!(outage(&c, &t, 1e-12, 1.0).unwrap() < 1e-20);
        assert!(outage(&c, &t, 0.0, 1.0).is_err());
    }

    #[test]
    fn averaged_edges() {
        let c = joint(3, 2, 1, 1);
        let bpsk: ModulationSpec = "bpsk".parse().unwrap();
        let metric = Metric::ErrorRate(bpsk);
        let fm0 = FeedbackModel::paper(&c, 0.0).unwrap();
        let ideal = error_rate(&c, &Tasc::best(&c), &bpsk, 5.0).unwrap();
        assert_eq!(averaged_metric(&c, &metric, &fm0, 5.0).unwrap(), ideal);
        let fm = FeedbackModel::paper(&c, 0.1).unwrap();
        assert!(averaged_metric(&c, &metric, &fm, 5.0).unwrap() > ideal);
    }
}
