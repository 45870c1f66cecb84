use std::fmt;

use num::rational::Rational64;
use num::{One, ToPrimitive, Zero};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Transmit subset selection plus receive antenna selection.
    JointTrasStbc,
    /// Transmit subset selection with combining over all receive antennas.
    TasStbc,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::JointTrasStbc => "joint",
            Scheme::TasStbc => "tas",
        })
    }
}

/// Unified system description.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub n_t: u32,
    pub n_s: u32,
    pub n_r: u32,
    pub m: Rational64,
    pub omega: f64,
    pub code_rate: Rational64,
}

/// Hashable identity of a configuration's distributional shape.
///
/// `omega` and the code rate only rescale the SNR axis, so they are not
/// part of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShapeKey {
    pub scheme: Scheme,
    pub n_t: u32,
    pub n_s: u32,
    pub n_r: u32,
    pub m: Rational64,
}

pub const MAX_ANTENNAS: u32 = 16;

impl SchemeConfig {
    /// Builds and validates a configuration with `omega = 1` and the code
    /// rate defaulted from `n_s` (1 for two antennas, 1/2 otherwise).
    pub fn new(scheme: Scheme, n_t: u32, n_s: u32, n_r: u32, m: Rational64) -> Result<Self> {
        let code_rate = default_code_rate(n_s);
        let cfg = SchemeConfig {
            scheme,
            n_t,
            n_s,
            n_r,
            m,
            omega: 1.0,
            code_rate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_code_rate(mut self, rate: Rational64) -> Result<Self> {
        self.code_rate = rate;
        self.validate()?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        self.omega = omega;
        self.validate()?;
        Ok(self)
    }

    /// Collects every violated invariant into one configuration error.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_t == 0 || self.n_s == 0 || self.n_r == 0 {
            problems.push("antenna counts must be positive".to_string());
        }
        if self.n_s > self.n_t {
            problems.push(format!("ns = {} exceeds nt = {}", self.n_s, self.n_t));
        }
        if self.n_t > MAX_ANTENNAS || self.n_r > MAX_ANTENNAS {
            problems.push(format!("antenna counts above {MAX_ANTENNAS} are not supported"));
        }
        if self.m < Rational64::new(1, 2) {
            problems.push(format!("m = {} must be at least 1/2", self.m));
        }
        match self.scheme {
            Scheme::JointTrasStbc => {
                if !self.m.is_integer() {
                    problems.push(format!("joint scheme requires integer m (got m = {})", self.m));
                }
            }
            Scheme::TasStbc => {
                let mg = self.m * Rational64::from_integer(self.n_r as i64);
                if !mg.is_integer() {
                    problems.push(format!(
                        "m*nr = {} must be an integer (m = {}, nr = {})",
                        mg, self.m, self.n_r
                    ));
                }
            }
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            problems.push(format!("omega = {} must be positive", self.omega));
        }
        if self.code_rate <= Rational64::zero() {
            problems.push(format!("code rate {} must be positive", self.code_rate));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn g(&self) -> u32 {
        match self.scheme {
            Scheme::JointTrasStbc => 1,
            Scheme::TasStbc => self.n_r,
        }
    }

    /// Number of receive branches the output selects from.
    pub fn n_branches(&self) -> u32 {
        match self.scheme {
            Scheme::JointTrasStbc => self.n_r,
            Scheme::TasStbc => 1,
        }
    }

    /// Shape `m·g` of each per-branch gamma variate.
    pub fn mg(&self) -> u32 {
        let mg = self.m * Rational64::from_integer(self.g() as i64);
        mg.to_integer() as u32
    }

    pub fn m_f64(&self) -> f64 {
        self.m.to_f64().unwrap_or(f64::NAN)
    }

    /// Number of transmit antenna subset combinations, C(n_t, n_s).
    pub fn num_tascs(&self) -> u32 {
        let (n, k) = (self.n_t as u64, self.n_s.min(self.n_t - self.n_s) as u64);
        ((0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))) as u32
    }

    /// Feedback word length ⌈log₂ K⌉.
    pub fn eta(&self) -> u32 {
        let k = self.num_tascs();
        if k <= 1 {
            0
        } else {
            32 - (k - 1).leading_zeros()
        }
    }

    /// Number of codewords 2^η.
    pub fn codewords(&self) -> u32 {
        1 << self.eta()
    }

    pub fn shape_key(&self) -> ShapeKey {
        ShapeKey {
            scheme: self.scheme,
            n_t: self.n_t,
            n_s: self.n_s,
            n_r: self.n_r,
            m: self.m,
        }
    }

    /// Average per-branch SNR γ̄ = (E_s/N₀)·Ω/(n_S R_s) for a linear E_s/N₀.
    pub fn gamma_bar(&self, es_n0: f64) -> f64 {
        let rs = self.code_rate.to_f64().unwrap_or(f64::NAN);
        es_n0 * self.omega / (self.n_s as f64 * rs)
    }

    /// Same configuration with no transmit selection (n_T = n_S).
    pub fn without_selection(&self) -> SchemeConfig {
        SchemeConfig {
            n_t: self.n_s,
            ..self.clone()
        }
    }

    /// All subsets in lexicographic rank order; the first is c₁.
    pub fn tascs(&self) -> Vec<Tasc> {
        let mut out = Vec::with_capacity(self.num_tascs() as usize);
        let mut cur: Vec<u32> = (1..=self.n_s).collect();
        loop {
            out.push(Tasc { ranks: cur.clone() });
            let k = self.n_s as usize;
            let mut i = k;
            while i > 0 && cur[i - 1] == self.n_t - (k - i) as u32 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            cur[i - 1] += 1;
            for j in i..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
        out
    }
}

pub fn default_code_rate(n_s: u32) -> Rational64 {
    if n_s <= 2 {
        Rational64::one()
    } else {
        Rational64::new(1, 2)
    }
}

/// Rank vector of the selected order statistics (1 = strongest).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tasc {
    pub ranks: Vec<u32>,
}

impl Tasc {
    pub fn new(ranks: Vec<u32>, cfg: &SchemeConfig) -> Result<Self> {
        if ranks.len() != cfg.n_s as usize {
            return Err(Error::Config(format!(
                "subset {:?} must have {} ranks",
                ranks, cfg.n_s
            )));
        }
        if ranks.first().is_some_and(|&r| r == 0)
            || ranks.windows(2).any(|w| w[1] <= w[0])
            || ranks.last().is_some_and(|&r| r > cfg.n_t)
        {
            return Err(Error::Config(format!(
                "subset {:?} must be strictly increasing within 1..={}",
                ranks, cfg.n_t
            )));
        }
        Ok(Tasc { ranks })
    }

    /// The correct-feedback subset (1, 2, …, n_S).
    pub fn best(cfg: &SchemeConfig) -> Self {
        Tasc {
            ranks: (1..=cfg.n_s).collect(),
        }
    }

    pub fn n_min(&self) -> u32 {
        self.ranks[0]
    }
}

impl fmt::Display for Tasc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranks.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
