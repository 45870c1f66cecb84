//! Special-function kernel: gamma family, confluent, Gauss, Appell and
//! Lauricella hypergeometric functions, Gauss-Laguerre rules, multinomial
//! coefficient tables and the Gaussian tail.
//!
//! Everything here is pure; quadrature rules are cached process-wide behind
//! a lock and handed out as `Arc`s.

mod gamma;
mod hypergeometric;
mod multinomial;
mod normal;
mod quadrature;

pub use gamma::{ln_gamma, reg_lower_gamma, reg_upper_gamma};
pub use hypergeometric::{
    appell_f2, gauss_2f1, kummer_1f1, kummer_1f1_scaled, lauricella_fa, lauricella_fa_adaptive,
    lauricella_fa_with_order,
    LAURICELLA_ORDER, LAURICELLA_CHECK_ORDER,
};
pub use multinomial::{multinomial_coeffs, MultinomialTable};
pub use normal::gaussian_q;
pub use quadrature::{
    cached_rule, exp_sinh, gauss_laguerre_rule, generalized_gauss_laguerre_rule, QuadratureRule,
    MAX_RULE_ORDER,
};
