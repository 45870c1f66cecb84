use num::{One, ToPrimitive, Zero};

use crate::numeric::{binomial, Q};
use crate::{Error, Result};

/// Pole of a Laplace-domain factor `(s + q)^{-u}`, location in units of m/γ̄.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatePole {
    pub q: Q,
    pub u: u32,
}

impl RatePole {
    pub fn new(q: Q, u: u32) -> Self {
        RatePole { q, u }
    }
}

/// Merges poles at equal locations (exact comparison), summing their
/// multiplicities. Output is sorted by location.
pub fn merge_poles(poles: &[RatePole]) -> Vec<RatePole> {
    let mut sorted: Vec<RatePole> = poles.to_vec();
    sorted.sort();
    let mut out: Vec<RatePole> = Vec::with_capacity(sorted.len());
    for p in sorted {
        match out.last_mut() {
            Some(last) if last.q == p.q => last.u += p.u,
            _ => out.push(p),
        }
    }
    out
}

/// Residues `R[d][j]` such that Π_d (s+q_d)^{-u_d} = Σ_d Σ_j R[d][j] (s+q_d)^{-(j+1)}.
///
/// Around each pole the co-factor Π_{e≠d}(h+δ_e)^{-u_e}, h = s + q_d, is
/// expanded as a power series in h with exact binomial coefficients.
pub fn partial_fraction_residues(poles: &[RatePole]) -> Result<Vec<Vec<Q>>> {
    for (i, a) in poles.iter().enumerate() {
        if a.u == 0 {
            return Err(Error::Internal(format!("pole at {} has zero multiplicity", a.q)));
        }
        if poles[i + 1..].iter().any(|b| b.q == a.q) {
            return Err(Error::Internal(format!(
                "duplicate pole location {}; merge poles first",
                a.q
            )));
        }
    }
    let mut out = Vec::with_capacity(poles.len());
    for (d, pd) in poles.iter().enumerate() {
        let len = pd.u as usize;
        let mut series = vec![Q::zero(); len];
        series[0] = Q::one();
        for (e, pe) in poles.iter().enumerate() {
            if e == d {
                continue;
            }
            let delta = &pe.q - &pd.q;
            let inv = delta.recip();
            let lead = pow_q(&inv, pe.u);
            // (h + δ)^{-u} = δ^{-u} Σ_j C(u+j-1, j) (-h/δ)^j
            let mut factor = Vec::with_capacity(len);
            let mut pw = Q::one();
            for j in 0..len as u32 {
                let c = Q::from_integer(binomial(pe.u + j - 1, j));
                let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
                factor.push(&lead * c * sign * &pw);
                pw *= &inv;
            }
            series = truncated_product(&series, &factor, len);
        }
        // coefficient of h^{-(j+1)} is series[u - 1 - j]
        let residues: Vec<Q> = (0..len).map(|j| series[len - 1 - j].clone()).collect();
        out.push(residues);
    }
    Ok(out)
}

fn pow_q(x: &Q, n: u32) -> Q {
    let mut acc = Q::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

fn truncated_product(a: &[Q], b: &[Q], len: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); len];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Π (s + q)^{-u} in floating point.
pub fn pole_product(poles: &[RatePole], s: f64) -> f64 {
    poles
        .iter()
        .map(|p| (s + p.q.to_f64().unwrap_or(f64::NAN)).powi(-(p.u as i32)))
        .product()
}

/// Partial-fraction form evaluated in floating point.
pub fn residue_sum(poles: &[RatePole], residues: &[Vec<Q>], s: f64) -> f64 {
    let mut total = 0.0;
    for (p, r) in poles.iter().zip(residues) {
        let base = s + p.q.to_f64().unwrap_or(f64::NAN);
        for (j, c) in r.iter().enumerate() {
            total += c.to_f64().unwrap_or(f64::NAN) * base.powi(-(j as i32 + 1));
        }
    }
    total
}
