//! Outage probability, MGF, BER/SER through the unified integrals J and Ĵ,
//! feedback-averaged metrics and the high-SNR diversity analysis.

mod asymptotic;
mod metrics;
mod modulation;
mod unified;

pub use asymptotic::{
    asymptotic_error, asymptotic_error_rate, asymptotic_outage, asymptotic_params, asymptotic_table,
    AsymptoticParams,
};
pub use metrics::{
    averaged_metric, error_rate, metric_value, mgf, model_error_rate, outage, per_tasc_metric, Metric,
};
pub use modulation::{CepTail, Identity, ModulationKind, ModulationSpec};
pub use unified::{
    j_closed_form, j_expansion, j_hat_closed_form, j_hat_expansion, unified_j, unified_j_hat,
};
