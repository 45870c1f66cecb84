use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::numeric::Dd;
use crate::{Error, Result};

pub const MAX_RULE_ORDER: usize = 512;

const NEWTON_TOL: f64 = 1e-15;
const MAX_NEWTON: usize = 200;

/// Gauss-Laguerre rule for weight `x^alpha e^{-x}` on `[0, ∞)`.
///
/// Weights of the largest nodes underflow for orders beyond a few hundred,
/// so the natural logs of the weights are kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl QuadratureRule {
    /// `Σ w_i f(x_i)`, approximating `∫ x^alpha e^{-x} f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

pub fn gauss_laguerre_rule(n: usize) -> Result<QuadratureRule> {
    generalized_gauss_laguerre_rule(n, 0.0)
}

/// Nodes are found one at a time by Newton iteration on the three-term
/// recurrence, deflating the roots already located, starting from the usual
/// asymptotic guesses.
pub fn generalized_gauss_laguerre_rule(n: usize, alpha: f64) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_RULE_ORDER {
        return Err(Error::domain(
            "gauss_laguerre_rule",
            format!("order {n} outside 1..={MAX_RULE_ORDER}"),
        ));
    }
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::domain(
            "gauss_laguerre_rule",
            format!("alpha = {alpha} must exceed -1"),
        ));
    }
    let nf = n as f64;
    let log_norm = libm::lgamma(alpha + nf) - libm::lgamma(nf) - nf.ln();
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut log_weights: Vec<f64> = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        z = initial_guess(i, n, alpha, z, &nodes);
        let mut eval = recurrence(n, alpha, z);
        let mut last_step = f64::INFINITY;
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let deflation: f64 = nodes.iter().map(|&r| 1.0 / (z - r)).sum();
            let step = eval.ratio / (1.0 - eval.ratio * deflation);
            let mut znew = z - step;
            if znew <= 0.0 {
                znew = z / 2.0;
            }
            z = znew;
            eval = recurrence(n, alpha, z);
            if step.abs() <= NEWTON_TOL * z || (step.abs() >= last_step && step.abs() <= 1e-12 * z)
            {
                converged = true;
                break;
            }
            last_step = step.abs();
        }
        if !converged {
            return Err(Error::eval(
                "gauss_laguerre_rule",
                format!("Newton iteration stalled at root {i} of order {n}"),
            ));
        }
        nodes.push(z);
        // w = Γ(n+α) / (Γ(n) n |L_n'(x) L_{n-1}(x)|)
        log_weights.push(log_norm - eval.log_abs_deriv_prev);
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) || !(nodes[0] > 0.0) {
        return Err(Error::eval(
            "gauss_laguerre_rule",
            format!("roots of order {n} not found in increasing order"),
        ));
    }
    let weights = log_weights.iter().map(|lw| lw.exp()).collect();
    Ok(QuadratureRule {
        order: n,
        alpha,
        nodes,
        weights,
        log_weights,
    })
}

fn initial_guess(i: usize, n: usize, alpha: f64, prev: f64, found: &[f64]) -> f64 {
    let nf = n as f64;
    match i {
        0 => (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha),
        1 => prev + (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf),
        2 => {
            let ai = 1.0;
            prev + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                * (prev - found[0])
                / (1.0 + 0.3 * alpha)
        }
        _ => {
            // root spacing grows slowly; extrapolate the last gap ratio
            let gap = prev - found[i - 2];
            let before = found[i - 2] - found[i - 3];
            prev + gap * (gap / before).min(1.5)
        }
    }
}

struct LaguerreEval {
    /// L_n(x) / L_n'(x)
    ratio: f64,
    /// ln |L_n'(x) L_{n-1}(x)|
    log_abs_deriv_prev: f64,
}

// Three-term recurrence in double-double with power-of-two rescaling; the
// common scale cancels in the ratio and is tracked for the weights.
fn recurrence(n: usize, alpha: f64, x: f64) -> LaguerreEval {
    let a = Dd::from(alpha);
    let xd = Dd::from(x);
    let mut p_prev = Dd::ZERO;
    let mut p = Dd::ONE;
    let mut log2_scale = 0i32;
    for k in 0..n {
        let kf = k as f64;
        let c1 = Dd::from(2.0 * kf + 1.0) + a - xd;
        let c2 = Dd::from(kf) + a;
        let next = (c1 * p - c2 * p_prev) / Dd::from(kf + 1.0);
        p_prev = p;
        p = next;
        let mag = p.hi.abs().max(p_prev.hi.abs());
        if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
            let e = mag.log2().floor() as i32;
            let f = Dd::from(2f64.powi(-e));
            p *= f;
            p_prev *= f;
            log2_scale += e;
        }
    }
    let nf = n as f64;
    let deriv = (Dd::from(nf) * p - (Dd::from(nf) + a) * p_prev) / xd;
    let prod = (deriv * p_prev).to_f64().abs();
    LaguerreEval {
        ratio: (p / deriv).to_f64(),
        log_abs_deriv_prev: prod.ln() + 2.0 * log2_scale as f64 * std::f64::consts::LN_2,
    }
}

/// `∫₀^∞ f(x) dx` by the exp-sinh rule x = exp(π/2 sinh t), halving the
/// step until two levels agree to `tol` relative.
pub fn exp_sinh<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> Result<f64> {
    const T_LO: f64 = -5.0;
    const T_HI: f64 = 4.0;
    const MAX_LEVEL: u32 = 10;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut node = |t: f64| -> f64 {
        let x = (half_pi * t.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        let v = f(x) * half_pi * t.cosh() * x;
        if v.is_finite() {
            v
        } else {
            f64::NAN
        }
    };
    let mut h = 0.5;
    let mut sum = 0.0;
    let mut t = T_LO;
    while t <= T_HI {
        sum += node(t);
        t += h;
    }
    let mut prev = sum * h;
    for _ in 0..MAX_LEVEL {
        // add the midpoints of the current level
        let mut t = T_LO + 0.5 * h;
        while t <= T_HI {
            sum += node(t);
            t += h;
        }
        h *= 0.5;
        let cur = sum * h;
        if cur.is_nan() {
            break;
        }
        if (cur - prev).abs() <= tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::eval("exp_sinh", format!("no convergence to {tol:e} (last estimate {prev:e})")))
}

type RuleKey = (usize, u64);

fn rule_cache() -> &'static RwLock<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared, lazily built rule of the given order and exponent.
pub fn cached_rule(n: usize, alpha: f64) -> Result<Arc<QuadratureRule>> {
    let key = (n, alpha.to_bits());
    if let Some(rule) = rule_cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(generalized_gauss_laguerre_rule(n, alpha)?);
    let mut guard = rule_cache().write().expect("rule cache poisoned");
    Ok(guard.entry(key).or_insert(rule).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sinh_examples() {
        let v = exp_sinh(|x| (-x).exp(), 1e-14).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // ∫ x^{-1/2} e^{-x} = √π
        let v = exp_sinh(|x| (-x).exp() / x.sqrt(), 1e-13).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // ∫ 1/(1+x)² = 1, algebraic decay
        let v = exp_sinh(|x| 1.0 / ((1.0 + x) * (1.0 + x)), 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn order_one_and_two_are_analytic() {
        let r1 = gauss_laguerre_rule(1).unwrap();
        assert!((r1.nodes[0] - 1.0).abs() < 1e-14);
        assert!((r1.weights[0] - 1.0).abs() < 1e-14);

        let r2 = gauss_laguerre_rule(2).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert!((r2.nodes[0] - (2.0 - s2)).abs() < 1e-14);
        assert!((r2.nodes[1] - (2.0 + s2)).abs() < 1e-14);
        assert!((r2.weights[0] - (2.0 + s2) / 4.0).abs() < 1e-14);
        assert!((r2.weights[1] - (2.0 - s2) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn moments_are_exact() {
        for n in [1usize, 3, 8, 16, 24] {
            let rule = gauss_laguerre_rule(n).unwrap();
            for k in 0..(2 * n) as i32 {
                let approx = rule.integrate(|x| x.powi(k));
                let exact = libm::tgamma(k as f64 + 1.0);
                assert!(
                    ((approx - exact) / exact).abs() < 1e-10,
                    "n={n} k={k}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn large_orders_keep_their_invariants() {
        for n in [64usize, 128, 256, 512] {
            let rule = gauss_laguerre_rule(n).unwrap();
            assert_eq!(rule.nodes.len(), n);
            assert!(rule.nodes[0] > 0.0);
            assert!(rule.nodes.windows(2).all(|w| w[1] > w[0]));
            assert!(rule.log_weights.iter().all(|w| w.is_finite()));
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: Σw = {total}");
            let first: f64 = rule.integrate(|x| x);
            assert!((first - 1.0).abs() < 1e-12, "n={n}: Σwx = {first}");
        }
    }

    #[test]
    fn generalized_weights_sum_to_gamma() {
        for &alpha in &[-0.5, 0.5, 2.0, 7.5] {
            let rule = generalized_gauss_laguerre_rule(40, alpha).unwrap();
            let total: f64 = rule.weights.iter().sum();
            let g = libm::tgamma(alpha + 1.0);
            assert!(((total - g) / g).abs() < 1e-12, "alpha={alpha}");
            // exact for x^3 against x^alpha e^{-x}
            let m3 = rule.integrate(|x| x * x * x);
            let exact = libm::tgamma(alpha + 4.0);
            assert!(((m3 - exact) / exact).abs() < 1e-11);
        }
    }

    #[test]
    fn order_out_of_range() {
        assert!(gauss_laguerre_rule(0).is_err());
        assert!(gauss_laguerre_rule(513).is_err());
        assert!(generalized_gauss_laguerre_rule(4, -1.0).is_err());
    }
}
