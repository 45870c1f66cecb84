use num::{One, ToPrimitive, Zero};

use crate::numeric::{factorial, Q};

/// Exact coefficients of `(Σ_{k<mg} x^k / k!)^t`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialTable {
    pub t: u32,
    pub mg: u32,
    pub coeffs: Vec<Q>,
}

impl MultinomialTable {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, r: usize) -> Q {
        self.coeffs.get(r).cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

/// Builds the table by repeated polynomial self-multiplication.
pub fn multinomial_coeffs(t: u32, mg: u32) -> MultinomialTable {
    let mg = mg.max(1);
    let base: Vec<Q> = (0..mg)
        .map(|k| Q::new(One::one(), factorial(k)))
        .collect();
    let mut acc = vec![Q::one()];
    for _ in 0..t {
        let mut next = vec![Q::zero(); acc.len() + base.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    MultinomialTable { t, mg, coeffs: acc }
}
