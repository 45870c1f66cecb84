use std::f64::consts::PI;

use num::ToPrimitive;

use super::modulation::{CepTail, ModulationSpec};
use crate::numeric::binomial;
use crate::snr_model::{SchemeConfig, Tasc};
use crate::{Error, Result};

/// Small-argument behaviour f_H(h) ≈ a h^t of the normalised gain H = γ/γ̄.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticParams {
    pub tasc: Tasc,
    pub a: f64,
    pub t: f64,
    /// Asymptotic diversity order t + 1.
    pub ado: f64,
}

/// Union-bound asymptotics, driven by the weakest selected rank n_min.
///
/// Branch gains have CDF P(mg, m h), so the leading coefficient carries
/// m^{t+1} on top of the unit-rate constant.
pub fn asymptotic_params(cfg: &SchemeConfig, tasc: &Tasc) -> Result<AsymptoticParams> {
    cfg.validate()?;
    let n_t = cfg.n_t;
    let n_min = *tasc.ranks.iter().min().ok_or_else(|| Error::Config("empty subset".into()))?;
    let mg = cfg.mg() as f64;
    let n = cfg.n_branches() as f64;
    let j = n_t - n_min + 1;
    let ln_gamma_mg = libm::lgamma(mg);
    let ln_gamma_mg1 = libm::lgamma(mg + 1.0);
    let ln_a_k = binomial(n_t, j).to_f64().unwrap_or(f64::INFINITY).ln() + (j as f64).ln()
        - ln_gamma_mg
        - (n_t - n_min) as f64 * ln_gamma_mg1;
    let exponent = mg * j as f64;
    let ln_b = ln_a_k - exponent.ln();
    let power = exponent * n;
    let m = cfg.m_f64();
    let ln_a = n * ln_b + power.ln() + power * m.ln();
    Ok(AsymptoticParams {
        tasc: tasc.clone(),
        a: ln_a.exp(),
        t: power - 1.0,
        ado: power,
    })
}

/// Parameters for every subset, c₁ first.
pub fn asymptotic_table(cfg: &SchemeConfig) -> Result<Vec<AsymptoticParams>> {
    cfg.tascs().iter().map(|t| asymptotic_params(cfg, t)).collect()
}

/// 2^t a Γ(t + 3/2) / (√π (t + 1)) (k γ̄)^{-(t+1)}
pub fn asymptotic_error(params: &AsymptoticParams, k: f64, gamma_bar: f64) -> Result<f64> {
    if !(k > 0.0) || !(gamma_bar > 0.0) {
        return Err(Error::domain("asymptotic_error", format!("k = {k}, gamma_bar = {gamma_bar}")));
    }
    let t = params.t;
    let ln = t * 2f64.ln() + params.a.ln() + libm::lgamma(t + 1.5) - 0.5 * PI.ln() - (t + 1.0).ln()
        - (t + 1.0) * (k * gamma_bar).ln();
    Ok(ln.exp())
}

/// High-SNR error rate for a modulation, using its CEP tail.
pub fn asymptotic_error_rate(params: &AsymptoticParams, modulation: &ModulationSpec, gamma_bar: f64) -> Result<f64> {
    match modulation.tail() {
        CepTail::Gaussian { coef, k } => Ok(coef * asymptotic_error(params, k, gamma_bar)?),
        CepTail::Exponential { coef, k } => {
            // E[e^{-kγ}] ≈ a Γ(t+1) (k γ̄)^{-(t+1)}
            let t = params.t;
            let ln = params.a.ln() + libm::lgamma(t + 1.0) - (t + 1.0) * (k * gamma_bar).ln();
            Ok(coef * ln.exp())
        }
    }
}

/// High-SNR outage: F_H(x/γ̄) ≈ a/(t+1) (x/γ̄)^{t+1}.
pub fn asymptotic_outage(params: &AsymptoticParams, rate: f64, gamma_bar: f64) -> Result<f64> {
    if !(rate > 0.0) || !(gamma_bar > 0.0) {
        return Err(Error::domain("asymptotic_outage", format!("rate = {rate}, gamma_bar = {gamma_bar}")));
    }
    let x = (rate.exp2() - 1.0) / gamma_bar;
    let t = params.t;
    Ok((params.a.ln() - (t + 1.0).ln() + (t + 1.0) * x.ln()).exp())
}
