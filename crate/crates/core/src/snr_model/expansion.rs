use num::{BigInt, One, Zero};

use super::config::{SchemeConfig, Tasc};
use super::poles::RatePole;
use crate::numeric::{binomial, factorial, Q};
use crate::specfun::{multinomial_coeffs, MultinomialTable};
use crate::{Error, Result};

/// Refuse expansions with more terms than this.
pub const TERM_LIMIT: u64 = 10_000_000;

/// One (P, T, R) index tuple of the joint order-statistics density, with
/// coefficient Π c_{p,k} c_{tr,k}. Exponents are `y^{mu_k - 1} e^{-(1+t_k) y}`
/// in units y = x·m/γ̄.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub coeff: Q,
    pub p: Vec<u32>,
    pub t: Vec<u32>,
    pub r: Vec<u32>,
    pub mu: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    /// c₀ / Γ(mg)^{n_S}
    pub prefactor: Q,
    pub terms: Vec<ExpansionTerm>,
}

/// One L-tuple of the Laplace-domain form: `coeff · Π (s + a_k)^{-u_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceTuple {
    pub coeff: Q,
    pub poles: Vec<RatePole>,
}

/// Gap sizes n_k − n_{k−1} − 1 for k = 1..=n_S+1.
pub(crate) fn gaps(cfg: &SchemeConfig, tasc: &Tasc) -> Vec<u32> {
    let mut prev = 0u32;
    let mut out = Vec::with_capacity(tasc.ranks.len() + 1);
    for &n in tasc.ranks.iter().chain(std::iter::once(&(cfg.n_t + 1))) {
        out.push(n - prev - 1);
        prev = n;
    }
    out
}

fn for_each_mixed_radix(limits: &[u32], mut f: impl FnMut(&[u32]) -> Result<()>) -> Result<()> {
    let mut idx = vec![0u32; limits.len()];
    loop {
        f(&idx)?;
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(());
            }
            if idx[k] < limits[k] {
                idx[k] += 1;
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Exponents of F(x_k) after the binomial step. The last gap always
/// contributes fully since F(0) = 0.
fn d_vector(gaps: &[u32], p: &[u32]) -> Vec<u32> {
    let s = p.len();
    (0..s)
        .map(|k| {
            let next = if k + 1 < s { p[k + 1] } else { gaps[s] };
            gaps[k] - p[k] + next
        })
        .collect()
}

fn too_many(count: u64, cfg: &SchemeConfig, tasc: &Tasc) -> Error {
    Error::TooManyTerms {
        terms: count,
        limit: TERM_LIMIT,
        params: format!(
            "nt = {}, ns = {}, m·g = {}, subset {}",
            cfg.n_t,
            cfg.n_s,
            cfg.mg(),
            tasc
        ),
    }
}

/// Counts (P, T, R) tuples without building them.
pub fn expansion_size(cfg: &SchemeConfig, tasc: &Tasc) -> u64 {
    let g = gaps(cfg, tasc);
    let s = tasc.ranks.len();
    let mg = cfg.mg() as u64;
    let mut total = 0u64;
    let _ = for_each_mixed_radix(&g[..s], |p| {
        let d = d_vector(&g, p);
        let prod = d.iter().fold(1u64, |acc, &dk| {
            let per: u64 = (0..=dk as u64).map(|t| t * (mg - 1) + 1).sum();
            acc.saturating_mul(per)
        });
        total = total.saturating_add(prod);
        Ok(())
    });
    total
}

/// Number of L-tuples produced by the Laplace step for exponents `mu`.
pub fn laplace_tuple_count(mu: &[u32]) -> u64 {
    // ways[l] = number of partial tuples ending with l_{k-1} = l
    let mut ways: Vec<u64> = vec![1];
    for &m in &mu[..mu.len().saturating_sub(1)] {
        let mut next = vec![0u64; ways.len() + m as usize];
        for (l_prev, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for slot in next.iter_mut().take(m as usize + l_prev) {
                *slot = slot.saturating_add(w);
            }
        }
        ways = next;
    }
    ways.iter().fold(0u64, |a, &w| a.saturating_add(w))
}

/// Total (P, T, R, L) count, or the guardrail error.
pub fn check_term_budget(cfg: &SchemeConfig, tasc: &Tasc) -> Result<u64> {
    let ptr = expansion_size(cfg, tasc);
    if ptr > TERM_LIMIT {
        return Err(too_many(ptr, cfg, tasc));
    }
    let g = gaps(cfg, tasc);
    let s = tasc.ranks.len();
    let mg = cfg.mg();
    let mut total = 0u64;
    for_each_mixed_radix(&g[..s], |p| {
        let d = d_vector(&g, p);
        for_each_mixed_radix(&d, |t| {
            let r_limits: Vec<u32> = t.iter().map(|&tk| tk * (mg - 1)).collect();
            for_each_mixed_radix(&r_limits, |r| {
                let mu: Vec<u32> = r.iter().map(|&rk| mg + rk).collect();
                total = total.saturating_add(laplace_tuple_count(&mu));
                if total > TERM_LIMIT {
                    return Err(too_many(total, cfg, tasc));
                }
                Ok(())
            })
        })
    })?;
    Ok(total)
}

/// Enumerates the multi-index expansion of the joint density of the
/// selected order statistics.
pub fn enumerate_expansion(cfg: &SchemeConfig, tasc: &Tasc) -> Result<ExpansionTable> {
    let count = expansion_size(cfg, tasc);
    if count > TERM_LIMIT {
        return Err(too_many(count, cfg, tasc));
    }
    let g = gaps(cfg, tasc);
    let s = tasc.ranks.len();
    let mg = cfg.mg();

    let c0 = g.iter().fold(Q::from_integer(factorial(cfg.n_t)), |acc, &e| {
        acc / Q::from_integer(factorial(e))
    });
    let gamma_mg = Q::from_integer(factorial(mg - 1));
    let prefactor = (0..s).fold(c0, |acc, _| acc / &gamma_mg);

    let max_t = cfg.n_t;
    let tables: Vec<MultinomialTable> = (0..=max_t).map(|t| multinomial_coeffs(t, mg)).collect();

    let mut terms = Vec::with_capacity(count as usize);
    for_each_mixed_radix(&g[..s], |p| {
        let cp = p.iter().zip(&g).fold(BigInt::one(), |acc, (&pk, &ek)| {
            let c = binomial(ek, pk);
            if (ek - pk) % 2 == 1 {
                -acc * c
            } else {
                acc * c
            }
        });
        let d = d_vector(&g, p);
        for_each_mixed_radix(&d, |t| {
            let r_limits: Vec<u32> = t.iter().map(|&tk| tk * (mg - 1)).collect();
            let ct = t.iter().zip(&d).fold(Q::from_integer(cp.clone()), |acc, (&tk, &dk)| {
                let c = Q::from_integer(binomial(dk, tk));
                if tk % 2 == 1 {
                    -acc * c
                } else {
                    acc * c
                }
            });
            for_each_mixed_radix(&r_limits, |r| {
                let coeff = r
                    .iter()
                    .zip(t)
                    .fold(ct.clone(), |acc, (&rk, &tk)| acc * tables[tk as usize].coeff(rk as usize));
                terms.push(ExpansionTerm {
                    coeff,
                    p: p.to_vec(),
                    t: t.to_vec(),
                    r: r.to_vec(),
                    mu: r.iter().map(|&rk| mg + rk).collect(),
                });
                Ok(())
            })
        })
    })?;
    Ok(ExpansionTable { prefactor, terms })
}

/// Laplace transform of one expansion term over the ordered region
/// y₁ ≥ … ≥ y_{n_S} ≥ 0, obtained by integrating innermost-first.
///
/// Pole k sits at a_k = (1/k) Σ_{j≤k} (1 + t_j) with multiplicity
/// u_k = μ_k + l_{k−1} − l_k and coefficient (μ_k + l_{k−1} − 1)!/l_k! · k^{−u_k}.
pub fn laplace_form(term: &ExpansionTerm) -> Vec<LaplaceTuple> {
    laplace_tuples(&term.t, &term.mu)
}

pub(crate) fn laplace_tuples(t: &[u32], mu: &[u32]) -> Vec<LaplaceTuple> {
    let s = t.len();
    let mut acc = 0u32;
    let locations: Vec<Q> = t
        .iter()
        .enumerate()
        .map(|(k, &tk)| {
            acc += 1 + tk;
            Q::new(BigInt::from(acc), BigInt::from(k as u32 + 1))
        })
        .collect();
    let mut out = Vec::new();
    let mut poles = Vec::with_capacity(s);
    recurse_l(0, 0, Q::one(), mu, &locations, &mut poles, &mut out);
    out
}

fn recurse_l(
    k: usize,
    l_prev: u32,
    coeff: Q,
    mu: &[u32],
    locations: &[Q],
    poles: &mut Vec<RatePole>,
    out: &mut Vec<LaplaceTuple>,
) {
    let s = mu.len();
    let top = mu[k] + l_prev;
    let kk = BigInt::from(k as u32 + 1);
    let fact_top = Q::from_integer(factorial(top - 1));
    if k + 1 == s {
        let u = top;
        let c = &coeff * fact_top / Q::from_integer(num::pow(kk, u as usize));
        poles.push(RatePole::new(locations[k].clone(), u));
        out.push(LaplaceTuple {
            coeff: c,
            poles: poles.clone(),
        });
        poles.pop();
        return;
    }
    for l in 0..top {
        let u = top - l;
        let c = &coeff * &fact_top
            / Q::from_integer(factorial(l) * num::pow(kk.clone(), u as usize));
        poles.push(RatePole::new(locations[k].clone(), u));
        recurse_l(k + 1, l, c, mu, locations, poles, out);
        poles.pop();
    }
}

/// H(s) = E[e^{-sY}] of the branch sum from the Laplace-domain form.
pub fn laplace_transform(table: &ExpansionTable, s: f64) -> f64 {
    use num::ToPrimitive;
    let mut total = 0.0;
    for term in &table.terms {
        let c = term.coeff.to_f64().unwrap_or(f64::NAN);
        for tup in laplace_form(term) {
            total += c
                * tup.coeff.to_f64().unwrap_or(f64::NAN)
                * super::poles::pole_product(&tup.poles, s);
        }
    }
    total * table.prefactor.to_f64().unwrap_or(f64::NAN)
}

/// Exact H(0), which must be 1.
pub fn laplace_total_mass(table: &ExpansionTable) -> Q {
    let mut total = Q::zero();
    for term in &table.terms {
        for tup in laplace_form(term) {
            let mut v = &term.coeff * &tup.coeff;
            for p in &tup.poles {
                for _ in 0..p.u {
                    v /= &p.q;
                }
            }
            total += v;
        }
    }
    total * &table.prefactor
}
