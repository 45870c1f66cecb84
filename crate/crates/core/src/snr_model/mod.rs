//! Exact distribution of the output SNR for any transmit antenna subset.
//!
//! The joint density of the selected order statistics is expanded into
//! exponential-polynomial terms, collapsed through a Laplace-domain form,
//! decomposed into partial fractions over exactly merged poles and inverted
//! term by term. All coefficients are exact rationals in units of m/γ̄.

mod config;
mod expansion;
mod mixture;
mod model;
mod poles;

pub use config::{default_code_rate, Scheme, SchemeConfig, ShapeKey, Tasc, MAX_ANTENNAS};
pub use expansion::{
    check_term_budget, enumerate_expansion, expansion_size, laplace_form, laplace_total_mass,
    laplace_transform, laplace_tuple_count, ExpansionTable, ExpansionTerm, LaplaceTuple,
    TERM_LIMIT,
};
pub use mixture::{GammaMixture, MixTerm, MixtureKind, PsiTerm};
pub use model::{
    branch_cdf_unified, branch_distribution, output_cdf, output_model, output_pdf, BranchModel,
    OutputModel,
};
pub use poles::{merge_poles, partial_fraction_residues, pole_product, residue_sum, RatePole};
