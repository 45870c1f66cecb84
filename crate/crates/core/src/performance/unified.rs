//! The unified integrals
//!
//!   J(θ, ε, φ) = θ ∫₀^∞ x^ε e^{-φx} F(x) dx
//!   Ĵ(θ, φ)    = θ ∫₀^∞ e^{-φx} F(x) ₁F₁(1; 3/2; φx/2) dx
//!
//! over the output-SNR CDF F, by two independent routes. The expansion route
//! integrates F = 1 + Σ w (sx)^p e^{-rsx} term by term in double-double
//! precision; the closed-form route multiplies out F = (Σ c P(n, a s x))^N
//! and sums Lauricella, Gauss or Appell functions.

use num::ToPrimitive;

use crate::numeric::{rational_to_dd, Dd};
use crate::snr_model::{output_model, OutputModel, SchemeConfig, Tasc};
use crate::specfun::{appell_f2, gauss_2f1, lauricella_fa};
use crate::{Error, Result};

const SERIES_MAX_TERMS: usize = 20_000;

fn check_args(func: &'static str, eps: f64, phi: f64, gamma_bar: f64) -> Result<()> {
    if !(eps > -1.0) {
        return Err(Error::domain(func, format!("eps = {eps} must exceed -1")));
    }
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::domain(func, format!("phi = {phi} must be positive")));
    }
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(Error::domain(func, format!("gamma_bar = {gamma_bar} must be positive")));
    }
    Ok(())
}

/// β^{-(ε+1)} with full precision for integer and half-integer ε.
fn pow_neg_shift(beta: Dd, eps: f64) -> Dd {
    let e1 = eps + 1.0;
    let twice = 2.0 * e1;
    if twice.fract() == 0.0 && twice.abs() < 1e6 {
        let k = twice as i32;
        if k % 2 == 0 {
            beta.powi(-(k / 2))
        } else {
            beta.sqrt().recip().powi(k)
        }
    } else {
        Dd::from(beta.to_f64().powf(-e1))
    }
}

/// Π_{i=1}^{p} (ε + i) for p = 0..=max_p.
fn rising_table(eps: f64, max_p: u32) -> Vec<Dd> {
    let mut out = Vec::with_capacity(max_p as usize + 1);
    let mut acc = Dd::ONE;
    out.push(acc);
    for i in 1..=max_p {
        acc = acc * (Dd::from(eps) + Dd::from(i as f64));
        out.push(acc);
    }
    out
}

fn scale(model: &OutputModel, gamma_bar: f64) -> Dd {
    Dd::from(model.m) / Dd::from(gamma_bar)
}

/// Σ_k c_k s^k g(k) over the CDF's expansion about 0, where g(k) is the
/// kernel integral of x^k. `None` unless the series has converged without
/// heavy cancellation, which is the high-SNR regime.
fn series_route(model: &OutputModel, s: Dd, mut g: impl FnMut(usize) -> Result<Dd>) -> Result<Option<Dd>> {
    let Some((first, coeffs)) = model.cdf.series() else {
        return Ok(None);
    };
    let mut sum = Dd::ZERO;
    let mut abs_sum = 0.0;
    let mut last = 0.0;
    let mut sk = s.powi(first as i32);
    for (i, c) in coeffs.iter().enumerate() {
        let term = *c * sk * g(first + i)?;
        sum += term;
        last = term.abs().to_f64();
        abs_sum += last;
        sk = sk * s;
    }
    let v = sum.to_f64();
    if v > 0.0 && last <= 1e-20 * v && abs_sum <= 1e8 * v {
        Ok(Some(sum))
    } else {
        Ok(None)
    }
}

/// J by term-wise integration of the expanded CDF.
pub fn j_expansion(model: &OutputModel, theta: f64, eps: f64, phi: f64, gamma_bar: f64) -> Result<f64> {
    check_args("unified_j", eps, phi, gamma_bar)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    let s = scale(model, gamma_bar);
    let phi_d = Dd::from(phi);
    let max_p = model.cdf.terms.iter().map(|t| t.power).max().unwrap_or(0);
    let base = pow_neg_shift(phi_d, eps);
    let gamma_e1 = libm::tgamma(eps + 1.0);
    let series_len = model.cdf.series().map_or(0, |(f, c)| f + c.len());
    let rising = rising_table(eps, max_p.max(series_len as u32));
    // x^k integrates to Γ(ε+1) (ε+1)_k / φ^{ε+k+1}
    if let Some(v) = series_route(model, s, |k| Ok(rising[k] * base / phi_d.powi(k as i32)))? {
        return Ok(theta * gamma_e1 * v.to_f64());
    }
    // the constant 1 of F
    let mut total = base;
    for t in &model.cdf.terms {
        let beta = phi_d + rational_to_dd(&t.rate) * s;
        let ratio = s / beta;
        total += rational_to_dd(&t.weight) * rising[t.power as usize] * ratio.powi(t.power as i32) * pow_neg_shift(beta, eps);
    }
    Ok(theta * gamma_e1 * total.to_f64())
}

/// ₂F₁(1, p+1; 3/2; z) for 0 ≤ z ≤ 1/2 by direct summation.
fn f21_half(p: u32, z: Dd) -> Result<Dd> {
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term = term * z * Dd::from(p as f64 + 1.0 + nf) / Dd::from(nf + 1.5);
        sum += term;
        if term.abs().hi <= 1e-34 * sum.abs().hi {
            return Ok(sum);
        }
    }
    Err(Error::eval("unified_j_hat", format!("2F1(1, {}; 3/2; {}) did not converge", p + 1, z.to_f64())))
}

/// Ĵ by term-wise integration of the expanded CDF.
pub fn j_hat_expansion(model: &OutputModel, theta: f64, phi: f64, gamma_bar: f64) -> Result<f64> {
    check_args("unified_j_hat", 0.0, phi, gamma_bar)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    let s = scale(model, gamma_bar);
    let phi_d = Dd::from(phi);
    let half_phi = phi_d * Dd::from(0.5);
    let mut fact = vec![Dd::ONE];
    let grow = |fact: &mut Vec<Dd>, k: usize| {
        while fact.len() <= k {
            let n = fact.len() as f64;
            let last = *fact.last().expect("non-empty");
            fact.push(last * Dd::from(n));
        }
    };
    let half = Dd::from(0.5);
    let routed = series_route(model, s, |k| {
        grow(&mut fact, k);
        Ok(fact[k] / phi_d.powi(k as i32 + 1) * f21_half(k as u32, half)?)
    })?;
    if let Some(v) = routed {
        return Ok(theta * v.to_f64());
    }
    let mut total = f21_half(0, half_phi / phi_d)? / phi_d;
    for t in &model.cdf.terms {
        grow(&mut fact, t.power as usize);
        let beta = phi_d + rational_to_dd(&t.rate) * s;
        let ratio = s / beta;
        let f = f21_half(t.power, half_phi / beta)?;
        total += rational_to_dd(&t.weight) * fact[t.power as usize] * ratio.powi(t.power as i32) / beta * f;
    }
    Ok(theta * total.to_f64())
}

/// Visits every size-`n` multiset of `0..len` with its multinomial count.
fn for_each_multiset(len: usize, n: usize, mut f: impl FnMut(&[usize], f64) -> Result<()>) -> Result<()> {
    if len == 0 {
        return Ok(());
    }
    let mut idx = vec![0usize; n];
    let n_fact: f64 = (1..=n).map(|k| k as f64).product();
    loop {
        let mut mult = n_fact;
        let mut run = 1usize;
        for i in 1..=n {
            if i < n && idx[i] == idx[i - 1] {
                run += 1;
            } else {
                mult /= (1..=run).map(|k| k as f64).product::<f64>();
                run = 1;
            }
        }
        f(&idx, mult)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if idx[k] + 1 < len {
                let v = idx[k] + 1;
                for slot in &mut idx[k..] {
                    *slot = v;
                }
                break;
            }
        }
    }
}

struct PsiF64 {
    coeff: f64,
    shape: u32,
    rate: f64,
}

fn psi_f64(model: &OutputModel) -> Vec<PsiF64> {
    model
        .branch
        .pdf
        .psi_terms()
        .into_iter()
        .map(|p| PsiF64 {
            coeff: p.coeff.to_f64().unwrap_or(f64::NAN),
            shape: p.shape,
            rate: p.rate.to_f64().unwrap_or(f64::NAN),
        })
        .collect()
}

fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Closed-form J: Lauricella F_A for N > 1, Gauss ₂F₁ for N = 1.
pub fn j_closed_form(model: &OutputModel, theta: f64, eps: f64, phi: f64, gamma_bar: f64) -> Result<f64> {
    closed_form(model, theta, eps, phi, gamma_bar, false)
}

/// Closed-form Ĵ: Lauricella F_A for N > 1, Appell F₂ for N = 1.
pub fn j_hat_closed_form(model: &OutputModel, theta: f64, phi: f64, gamma_bar: f64) -> Result<f64> {
    closed_form(model, theta, 0.0, phi, gamma_bar, true)
}

fn closed_form(model: &OutputModel, theta: f64, eps: f64, phi: f64, gamma_bar: f64, hat: bool) -> Result<f64> {
    let func = if hat { "unified_j_hat" } else { "unified_j" };
    check_args(func, eps, phi, gamma_bar)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    let s = model.m / gamma_bar;
    let psi = psi_f64(model);
    let n = model.n_branches as usize;
    let mut total = 0.0;
    for_each_multiset(psi.len(), n, |idx, mult| {
        let mut sign = 1.0;
        let mut ln_mag = mult.ln();
        let mut sum_a = 0.0;
        let mut sum_n = 0u32;
        for &i in idx {
            let t = &psi[i];
            if t.coeff < 0.0 {
                sign = -sign;
            }
            let a = t.rate * s;
            ln_mag += t.coeff.abs().ln() + t.shape as f64 * a.ln() - ln_factorial(t.shape);
            sum_a += a;
            sum_n += t.shape;
        }
        let denom = phi + sum_a;
        let big_a = 1.0 + eps + sum_n as f64;
        ln_mag += libm::lgamma(big_a) - big_a * denom.ln();
        let xs: Vec<f64> = idx.iter().map(|&i| psi[i].rate * s / denom).collect();
        let cs: Vec<f64> = idx.iter().map(|&i| psi[i].shape as f64 + 1.0).collect();
        let sum_x: f64 = xs.iter().sum::<f64>() + if hat { 0.5 * phi / denom } else { 0.0 };
        if sum_x >= 1.0 {
            return Err(Error::Internal(format!("Lauricella arguments sum to {sum_x} >= 1")));
        }
        let f = match (n, hat) {
            (1, false) => gauss_2f1(big_a, 1.0, cs[0], xs[0])?,
            (1, true) => appell_f2(big_a, 1.0, 1.0, 1.5, cs[0], 0.5 * phi / denom, xs[0])?,
            (_, false) => lauricella_fa(big_a, &vec![1.0; n], &cs, &xs)?,
            (_, true) => {
                let mut c = vec![1.5];
                c.extend_from_slice(&cs);
                let mut x = vec![0.5 * phi / denom];
                x.extend_from_slice(&xs);
                lauricella_fa(big_a, &vec![1.0; n + 1], &c, &x)?
            }
        };
        total += sign * ln_mag.exp() * f;
        Ok(())
    })?;
    Ok(theta * total)
}

/// J(θ, ε, φ) for the output SNR of `tasc`; expansion route.
pub fn unified_j(cfg: &SchemeConfig, tasc: &Tasc, theta: f64, eps: f64, phi: f64, gamma_bar: f64) -> Result<f64> {
    check_args("unified_j", eps, phi, gamma_bar)?;
    j_expansion(&*output_model(cfg, tasc)?, theta, eps, phi, gamma_bar)
}

/// Ĵ(θ, φ) for the output SNR of `tasc`; expansion route.
pub fn unified_j_hat(cfg: &SchemeConfig, tasc: &Tasc, theta: f64, phi: f64, gamma_bar: f64) -> Result<f64> {
    check_args("unified_j_hat", 0.0, phi, gamma_bar)?;
    j_hat_expansion(&*output_model(cfg, tasc)?, theta, phi, gamma_bar)
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
    fn max_of_two_examples() {
        let c = joint(2, 1, 1, 1);
        let t = Tasc::best(&c);
        let j = unified_j(&c, &t, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((j - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(unified_j(&c, &t, 0.0, 0.0, 1.0, 1.0).unwrap(), 0.0);
        let model = output_model(&c, &t).unwrap();
        let a = j_closed_form(&model, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mgf_normalization() {
        let c = joint(3, 2, 2, 2);
        let t = Tasc::new(vec![1, 3], &c).unwrap();
        let s = 1e-9;
        let m = unified_j(&c, &t, s, 0.0, s, 2.0).unwrap();
        assert!((m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_exponential_j_hat() {
        // F = 1 - e^{-x}: Ĵ(1, 1) = ∫ e^{-x}(1 - e^{-x}) 1F1(1; 3/2; x/2) dx
        let c = SchemeConfig::new(Scheme::TasStbc, 1, 1, 1, Rational64::from_integer(1)).unwrap();
        let t = Tasc::best(&c);
        let model = output_model(&c, &t).unwrap();
        let b = j_hat_expansion(&model, 1.0, 1.0, 1.0).unwrap();
        let a = j_hat_closed_form(&model, 1.0, 1.0, 1.0).unwrap();
        // 2F1(1,1;3/2;1/2) = π/2 and 2F1(1,1;3/2;1/4)/2 = π/(3√3)
        let exact = std::f64::consts::PI / 2.0 - std::f64::consts::PI / (3.0 * 3f64.sqrt());
        assert!((b - exact).abs() < 1e-15, "{b} vs {exact}");
        assert!((a - exact).abs() < 1e-9);
    }

    #[test]
    fn multisets_are_counted_with_multiplicity() {
        let mut seen = 0.0;
        let mut count = 0;
        for_each_multiset(3, 3, |_, mult| {
            seen += mult;
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!((count, seen), (10, 27.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let c = joint(2, 1, 1, 1);
        let t = Tasc::best(&c);
        assert!(unified_j(&c, &t, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(unified_j(&c, &t, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(unified_j_hat(&c, &t, 1.0, 1.0, -1.0).is_err());
    }
}
