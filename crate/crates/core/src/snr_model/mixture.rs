use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::{One, Signed, ToPrimitive, Zero};

use crate::numeric::{factorial, rational_to_dd, Dd, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixtureKind {
    /// f(y) = Σ w y^p e^{-r y}
    Density,
    /// F(y) = 1 + Σ w y^p e^{-r y}
    CdfComplement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixTerm {
    pub weight: Q,
    pub power: u32,
    pub rate: Q,
}

/// Terms sharing one exponential rate, ready for double-double evaluation.
#[derive(Debug, Clone)]
struct RateGroup {
    rate: Dd,
    /// coefficient of y^p at index p
    coeffs: Vec<Dd>,
}

/// Leading coefficients of the expansion about y = 0.
#[derive(Debug, Clone)]
struct Taylor {
    /// index of the first nonzero coefficient
    first: usize,
    coeffs: Vec<Dd>,
}

const TAYLOR_EXTRA: usize = 48;
const TAYLOR_SEARCH: usize = 600;
/// Values below this are re-evaluated from the expansion about 0.
const SMALL_VALUE: f64 = 1e-12;

/// Exponential-polynomial in the canonical variable y = x·m/γ̄.
///
/// Weights are exact; evaluation runs in double-double precision so that the
/// large alternating terms cancel cleanly. Near y = 0, where even that is not
/// enough, an exact power series takes over.
#[derive(Debug, Clone)]
pub struct GammaMixture {
    pub kind: MixtureKind,
    pub terms: Vec<MixTerm>,
    groups: Vec<RateGroup>,
    taylor: OnceLock<Option<Taylor>>,
}

impl PartialEq for GammaMixture {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.terms == other.terms
    }
}

impl GammaMixture {
    /// Combines like terms, drops zeros and orders by (rate, power).
    pub fn new(kind: MixtureKind, terms: impl IntoIterator<Item = MixTerm>) -> Self {
        let mut map: BTreeMap<(Q, u32), Q> = BTreeMap::new();
        for t in terms {
            *map.entry((t.rate, t.power)).or_insert_with(Q::zero) += t.weight;
        }
        let terms: Vec<MixTerm> = map
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|((rate, power), weight)| MixTerm { weight, power, rate })
            .collect();
        let mut groups: Vec<RateGroup> = Vec::new();
        let mut last_rate: Option<&Q> = None;
        for t in &terms {
            if last_rate != Some(&t.rate) {
                groups.push(RateGroup {
                    rate: rational_to_dd(&t.rate),
                    coeffs: Vec::new(),
                });
                last_rate = Some(&t.rate);
            }
            let g = groups.last_mut().expect("group pushed above");
            if g.coeffs.len() <= t.power as usize {
                g.coeffs.resize(t.power as usize + 1, Dd::ZERO);
            }
            g.coeffs[t.power as usize] = rational_to_dd(&t.weight);
        }
        GammaMixture {
            kind,
            terms,
            groups,
            taylor: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ-part only, at canonical `y`, in double-double.
    pub fn eval_terms_dd(&self, y: f64) -> Dd {
        let yd = Dd::from(y);
        let mut total = Dd::ZERO;
        for g in &self.groups {
            let e = (-(g.rate * yd)).exp();
            if e.hi == 0.0 {
                continue;
            }
            let mut poly = Dd::ZERO;
            for c in g.coeffs.iter().rev() {
                poly = poly * yd + *c;
            }
            total += poly * e;
        }
        total
    }

    fn eval_direct_dd(&self, y: f64) -> Dd {
        match self.kind {
            MixtureKind::Density => self.eval_terms_dd(y),
            MixtureKind::CdfComplement => Dd::ONE + self.eval_terms_dd(y),
        }
    }

    /// Value at canonical `y` (density, or CDF for the complement kind).
    pub fn eval_dd(&self, y: f64) -> Dd {
        let direct = self.eval_direct_dd(y);
        if direct.abs().hi < SMALL_VALUE && y > 0.0 {
            if let Some(v) = self.eval_series(y) {
                return v;
            }
        }
        direct
    }

    fn taylor(&self) -> Option<&Taylor> {
        self.taylor.get_or_init(|| self.build_taylor()).as_ref()
    }

    /// Exact coefficients of Σ_k c_k y^k, from the first nonzero one on.
    fn build_taylor(&self) -> Option<Taylor> {
        let mut by_rate: BTreeMap<&Q, Vec<&MixTerm>> = BTreeMap::new();
        for t in &self.terms {
            by_rate.entry(&t.rate).or_default().push(t);
        }
        // per rate: the terms and the running (-r)^j / j! table
        let mut groups: Vec<(&Q, Vec<&MixTerm>, Vec<Q>)> =
            by_rate.into_iter().map(|(r, ts)| (r, ts, vec![Q::one()])).collect();
        let mut first = None;
        let mut coeffs = Vec::with_capacity(TAYLOR_EXTRA);
        for k in 0..TAYLOR_SEARCH + TAYLOR_EXTRA {
            let mut c = if k == 0 && self.kind == MixtureKind::CdfComplement {
                Q::one()
            } else {
                Q::zero()
            };
            for (rate, terms, exp_series) in &mut groups {
                while exp_series.len() <= k {
                    let j = exp_series.len() as i64;
                    let next = -(exp_series[exp_series.len() - 1].clone() * &**rate) / Q::from_integer(j.into());
                    exp_series.push(next);
                }
                for t in terms.iter().filter(|t| t.power as usize <= k) {
                    c += &t.weight * &exp_series[k - t.power as usize];
                }
            }
            if first.is_none() {
                if c.is_zero() {
                    if k + 1 >= TAYLOR_SEARCH {
                        return None;
                    }
                    continue;
                }
                first = Some(k);
            }
            coeffs.push(rational_to_dd(&c));
            if coeffs.len() == TAYLOR_EXTRA {
                break;
            }
        }
        Some(Taylor { first: first?, coeffs })
    }

    /// Coefficients of the expansion about y = 0 and the power of the first
    /// one, when the leading coefficient was found.
    pub fn series(&self) -> Option<(usize, &[Dd])> {
        self.taylor().map(|t| (t.first, t.coeffs.as_slice()))
    }

    /// Power-series value, or `None` when the truncated tail is not negligible.
    fn eval_series(&self, y: f64) -> Option<Dd> {
        let t = self.taylor()?;
        let yd = Dd::from(y);
        let mut sum = Dd::ZERO;
        for c in t.coeffs.iter().rev() {
            sum = sum * yd + *c;
        }
        let last = t.coeffs.last()?.abs().to_f64() * y.powi(t.coeffs.len() as i32 - 1);
        if !(last <= 1e-20 * sum.abs().to_f64()) {
            return None;
        }
        Some(sum * yd.powi(t.first as i32))
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.eval_dd(y).to_f64()
    }

    /// Value at a physical SNR `x` for average SNR `gamma_bar` and fading `m`;
    /// densities pick up the Jacobian m/γ̄.
    pub fn eval_scaled(&self, x: f64, gamma_bar: f64, m: f64) -> f64 {
        let s = m / gamma_bar;
        let v = self.eval(x * s);
        match self.kind {
            MixtureKind::Density => v * s,
            MixtureKind::CdfComplement => v,
        }
    }

    /// Exact ∫₀^∞ of the Σ-part.
    pub fn integral(&self) -> Q {
        self.terms
            .iter()
            .map(|t| &t.weight * Q::from_integer(factorial(t.power)) / pow(&t.rate, t.power + 1))
            .fold(Q::zero(), |a, b| a + b)
    }

    /// CDF of a density: F(y) = 1 − ∫_y^∞ f.
    pub fn density_to_cdf(&self) -> GammaMixture {
        assert_eq!(self.kind, MixtureKind::Density);
        let mut out = Vec::new();
        for t in &self.terms {
            // ∫_y^∞ z^p e^{-rz} dz = p!/r^{p+1} e^{-ry} Σ_{k≤p} (ry)^k/k!
            let base = &t.weight * Q::from_integer(factorial(t.power)) / pow(&t.rate, t.power + 1);
            let mut rk = Q::one();
            for k in 0..=t.power {
                out.push(MixTerm {
                    weight: -(&base * &rk / Q::from_integer(factorial(k))),
                    power: k,
                    rate: t.rate.clone(),
                });
                rk *= &t.rate;
            }
        }
        GammaMixture::new(MixtureKind::CdfComplement, out)
    }

    /// Derivative of a CDF.
    pub fn cdf_to_density(&self) -> GammaMixture {
        assert_eq!(self.kind, MixtureKind::CdfComplement);
        let mut out = Vec::new();
        for t in &self.terms {
            if t.power > 0 {
                out.push(MixTerm {
                    weight: &t.weight * Q::from_integer(t.power.into()),
                    power: t.power - 1,
                    rate: t.rate.clone(),
                });
            }
            out.push(MixTerm {
                weight: -(&t.weight * &t.rate),
                power: t.power,
                rate: t.rate.clone(),
            });
        }
        GammaMixture::new(MixtureKind::Density, out)
    }

    /// F^n for a CDF, expanded exactly.
    pub fn cdf_power(&self, n: u32) -> GammaMixture {
        assert_eq!(self.kind, MixtureKind::CdfComplement);
        let mut acc = GammaMixture::new(MixtureKind::CdfComplement, Vec::new());
        for _ in 0..n {
            acc = acc.cdf_product(self);
        }
        acc
    }

    /// (1 + A)(1 + B) = 1 + A + B + AB
    fn cdf_product(&self, other: &GammaMixture) -> GammaMixture {
        let mut out: Vec<MixTerm> = Vec::with_capacity(self.len() * other.len() + self.len() + other.len());
        out.extend(self.terms.iter().cloned());
        out.extend(other.terms.iter().cloned());
        for a in &self.terms {
            for b in &other.terms {
                out.push(MixTerm {
                    weight: &a.weight * &b.weight,
                    power: a.power + b.power,
                    rate: &a.rate + &b.rate,
                });
            }
        }
        GammaMixture::new(MixtureKind::CdfComplement, out)
    }

    /// Regularized-gamma form of a density's CDF: F(y) = Σ c P(n, a y).
    pub fn psi_terms(&self) -> Vec<PsiTerm> {
        assert_eq!(self.kind, MixtureKind::Density);
        self.terms
            .iter()
            .map(|t| PsiTerm {
                coeff: &t.weight * Q::from_integer(factorial(t.power)) / pow(&t.rate, t.power + 1),
                shape: t.power + 1,
                rate: t.rate.clone(),
            })
            .collect()
    }

    /// Σ|w| y^p e^{-ry} / |Σ w y^p e^{-ry}|, a cancellation measure.
    pub fn condition(&self, y: f64) -> f64 {
        let abs: f64 = self
            .terms
            .iter()
            .map(|t| {
                t.weight.abs().to_f64().unwrap_or(f64::INFINITY)
                    * y.powi(t.power as i32)
                    * (-t.rate.to_f64().unwrap_or(f64::NAN) * y).exp()
            })
            .sum();
        abs / self.eval_terms_dd(y).to_f64().abs()
    }
}

/// c · P(shape, rate·y)
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTerm {
    pub coeff: Q,
    pub shape: u32,
    pub rate: Q,
}

pub(crate) fn pow(x: &Q, n: u32) -> Q {
    let mut acc = Q::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}
