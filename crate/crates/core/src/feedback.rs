//! Binary symmetric feedback channel: subset codebook, correct-feedback prior
//! and mixing of per-subset metrics.
//!
//! Codeword k of the codebook labels the k-th antenna subset in lexicographic
//! order. Under i.i.d. fading the best physical subset is uniform, so every
//! proper codeword is sent equally often. When the decoded subset differs
//! from the sent one, its rank vector depends only on how many antennas the
//! two subsets share.

use crate::numeric::binomial;
use crate::snr_model::{SchemeConfig, Tasc};
use crate::{Error, Result};
use num::ToPrimitive;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodewordMapping {
    /// Subset k (0-based, lexicographic) gets the η-bit binary of k.
    NaturalBinary,
    /// Subset k gets codeword `perm[k]`; the words must be distinct and < 2^η.
    ExplicitPermutation(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixingMode {
    /// Wrong subsets weighted uniformly, 1/(K−1) each.
    Paper,
    /// Weights from the full bit-level process.
    BitExact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub k: usize,
    pub eta: u32,
    pub l: usize,
    /// First `k` entries are the proper words in subset order, then the
    /// improper words in increasing order.
    pub codewords: Vec<u32>,
    /// Rank vectors in lexicographic order; entry 0 is c₁.
    pub tasc_order: Vec<Tasc>,
    /// `hamming[i][j]` = d(x_i, x_j) for proper i and any j.
    pub hamming: Vec<Vec<u32>>,
    n_t: u32,
    n_s: u32,
}

impl Codebook {
    pub fn improper(&self) -> &[u32] {
        &self.codewords[self.k..]
    }

    /// Index of the proper subset carrying `word`, if any.
    pub fn subset_of(&self, word: u32) -> Option<usize> {
        self.codewords[..self.k].iter().position(|&w| w == word)
    }
}

pub fn build_codebook(cfg: &SchemeConfig, mapping: &CodewordMapping) -> Result<Codebook> {
    cfg.validate()?;
    let tascs = cfg.tascs();
    let k = tascs.len();
    let eta = cfg.eta();
    let l = 1usize << eta;
    let proper: Vec<u32> = match mapping {
        CodewordMapping::NaturalBinary => (0..k as u32).collect(),
        CodewordMapping::ExplicitPermutation(perm) => {
            if perm.len() != k {
                return Err(Error::Config(format!(
                    "codeword permutation has {} entries, expected K = {k}",
                    perm.len()
                )));
            }
            if let Some(&w) = perm.iter().find(|&&w| w as usize >= l) {
                return Err(Error::Config(format!("codeword {w} does not fit in {eta} bits")));
            }
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("codeword permutation has duplicates".into()));
            }
            perm.clone()
        }
    };
    let mut codewords = proper.clone();
    codewords.extend((0..l as u32).filter(|w| !proper.contains(w)));
    let hamming = proper
        .iter()
        .map(|&a| codewords.iter().map(|&b| (a ^ b).count_ones()).collect())
        .collect();
    Ok(Codebook {
        k,
        eta,
        l,
        codewords,
        tasc_order: tascs,
        hamming,
        n_t: cfg.n_t,
        n_s: cfg.n_s,
    })
}

fn check_pe(func: &'static str, p_e: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::domain(func, format!("p_e = {p_e} outside [0, 1]")));
    }
    Ok(())
}

fn pattern_prob(p_e: f64, eta: u32, d: u32) -> f64 {
    p_e.powi(d as i32) * (1.0 - p_e).powi((eta - d) as i32)
}

/// Prior probability that the transmitter ends up on the correct subset.
pub fn prob_correct_feedback(p_e: f64, cb: &Codebook) -> Result<f64> {
    check_pe("prob_correct_feedback", p_e)?;
    let mut p = (1.0 - p_e).powi(cb.eta as i32);
    if cb.l > cb.k {
        let kk = cb.k as f64;
        let mut failure = 0.0;
        for row in &cb.hamming {
            for &d in &row[cb.k..] {
                failure += pattern_prob(p_e, cb.eta, d);
            }
        }
        p += failure / (kk * kk);
    }
    Ok(p)
}

/// P(decoded subset = j | sent subset = i) for proper i, j.
fn physical_transitions(p_e: f64, cb: &Codebook) -> Vec<Vec<f64>> {
    let kk = cb.k as f64;
    cb.hamming
        .iter()
        .map(|row| {
            let failure: f64 = row[cb.k..].iter().map(|&d| pattern_prob(p_e, cb.eta, d)).sum();
            row[..cb.k]
                .iter()
                .map(|&d| pattern_prob(p_e, cb.eta, d) + failure / kk)
                .collect()
        })
        .collect()
}

/// Probability that the subset finally used has rank vector c_k, for each k,
/// averaged over the sent codeword.
pub fn bit_exact_transition_matrix(p_e: f64, cb: &Codebook) -> Result<Vec<f64>> {
    check_pe("bit_exact_transition_matrix", p_e)?;
    let trans = physical_transitions(p_e, cb);
    let rank_given_overlap = overlap_rank_table(cb);
    let mut out = vec![0.0; cb.k];
    for (i, row) in trans.iter().enumerate() {
        for (j, &pij) in row.iter().enumerate() {
            if i == j {
                out[0] += pij;
                continue;
            }
            let o = overlap(&cb.tasc_order[i], &cb.tasc_order[j]);
            for (k, w) in rank_given_overlap[o].iter().enumerate() {
                out[k] += pij * w;
            }
        }
    }
    let kk = cb.k as f64;
    out.iter_mut().for_each(|v| *v /= kk);
    Ok(out)
}

fn overlap(a: &Tasc, b: &Tasc) -> usize {
    a.ranks.iter().filter(|r| b.ranks.contains(r)).count()
}

/// `table[o][k]`: probability that a subset sharing `o` antennas with the
/// best subset has rank vector c_k.
fn overlap_rank_table(cb: &Codebook) -> Vec<Vec<f64>> {
    let n_s = cb.n_s;
    (0..=n_s as usize)
        .map(|o| {
            let ways = binomial(n_s, o as u32) * binomial(cb.n_t - n_s, n_s - o as u32);
            let ways = ways.to_f64().unwrap_or(f64::INFINITY);
            cb.tasc_order
                .iter()
                .map(|t| {
                    let top = t.ranks.iter().filter(|&&r| r <= n_s).count();
                    if top == o {
                        1.0 / ways
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackModel {
    pub p_e: f64,
    pub codebook: Codebook,
    pub mixing: MixingMode,
    pub p_cf: f64,
    pub p_ef: f64,
    /// Weight of each subset's metric in the total, c₁ first.
    pub weights: Vec<f64>,
}

impl FeedbackModel {
    pub fn new(p_e: f64, codebook: Codebook, mixing: MixingMode) -> Result<Self> {
        let p_cf = prob_correct_feedback(p_e, &codebook)?;
        let p_ef = 1.0 - p_cf;
        let k = codebook.k;
        let weights = match mixing {
            MixingMode::Paper => {
                let mut w = vec![if k > 1 { p_ef / (k - 1) as f64 } else { 0.0 }; k];
                w[0] = if k > 1 { p_cf } else { 1.0 };
                w
            }
            MixingMode::BitExact => bit_exact_transition_matrix(p_e, &codebook)?,
        };
        Ok(FeedbackModel {
            p_e,
            codebook,
            mixing,
            p_cf,
            p_ef,
            weights,
        })
    }

    /// Paper mixing over the natural-binary codebook.
    pub fn paper(cfg: &SchemeConfig, p_e: f64) -> Result<Self> {
        FeedbackModel::new(p_e, build_codebook(cfg, &CodewordMapping::NaturalBinary)?, MixingMode::Paper)
    }

    /// Weights of the wrong subsets c₂…c_K.
    pub fn wrong_weights(&self) -> &[f64] {
        &self.weights[1..]
    }
}

/// Σ_k w_k v(c_k) with the model's weights.
pub fn mix_metric(per_tasc_values: &[f64], fm: &FeedbackModel) -> Result<f64> {
    if per_tasc_values.len() != fm.weights.len() {
        return Err(Error::LengthMismatch {
            expected: fm.weights.len(),
            got: per_tasc_values.len(),
        });
    }
    if fm.p_e == 0.0 {
        return Ok(per_tasc_values[0]);
    }
    Ok(per_tasc_values.iter().zip(&fm.weights).map(|(v, w)| v * w).sum())
}
