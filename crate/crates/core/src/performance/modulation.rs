use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::specfun::gaussian_q;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationKind {
    Bpsk,
    Cbfsk,
    Ncbfsk,
    Dbpsk,
    Mpsk,
    Qpsk,
    Mpam,
    Mqam,
}

/// One term of an error-rate identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Identity {
    /// θ ∫ x^ε e^{-φx} F(x) dx
    J { theta: f64, eps: f64, phi: f64 },
    /// θ ∫ e^{-φx} F(x) ₁F₁(1; 3/2; φx/2) dx
    JHat { theta: f64, phi: f64 },
}

/// High-SNR form of the conditional error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CepTail {
    /// coef · Q(√(k γ))
    Gaussian { coef: f64, k: f64 },
    /// coef · e^{-k γ}
    Exponential { coef: f64, k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    pub m: u32,
}

impl ModulationSpec {
    pub fn new(kind: ModulationKind, m: u32) -> Result<Self> {
        use ModulationKind::*;
        let ok = match kind {
            Bpsk | Cbfsk | Ncbfsk | Dbpsk => m == 2,
            Qpsk => m == 4,
            Mpsk => m >= 8 && m.is_power_of_two(),
            Mpam => m >= 2 && m.is_power_of_two(),
            Mqam => {
                let r = (m as f64).sqrt().round() as u32;
                m >= 4 && r * r == m && m.is_power_of_two()
            }
        };
        if !ok {
            let hint = match kind {
                Mpsk => " (M-PSK needs M >= 8, a power of two; use bpsk or qpsk below that)",
                Mqam => " (M-QAM needs a square power of two, M >= 4)",
                Mpam => " (M-PAM needs a power of two, M >= 2)",
                _ => "",
            };
            return Err(Error::Config(format!("unsupported constellation size M = {m} for {kind:?}{hint}")));
        }
        Ok(ModulationSpec { kind, m })
    }

    pub fn binary(kind: ModulationKind) -> Self {
        ModulationSpec { kind, m: 2 }
    }

    pub fn qpsk() -> Self {
        ModulationSpec { kind: ModulationKind::Qpsk, m: 4 }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.m.trailing_zeros()
    }

    /// True where the identity is itself an approximation (M-PSK).
    pub fn approx_flag(&self) -> bool {
        self.kind == ModulationKind::Mpsk
    }

    /// (λ₁, λ₂, λ₃) for the binary kinds and M-PSK.
    pub fn lambda_binary(&self) -> Option<(f64, f64, f64)> {
        use ModulationKind::*;
        match self.kind {
            Bpsk => Some((0.5, 1.0, 1.0)),
            Cbfsk => Some((0.5, 0.5, 1.0)),
            Ncbfsk => Some((1.0, 0.5, 1.0)),
            Dbpsk => Some((1.0, 1.0, 1.0)),
            Mpsk => Some((0.5, (PI / self.m as f64).sin().powi(2), 2.0)),
            _ => None,
        }
    }

    /// (λ₄, λ₅, λ₆) for QPSK and M-QAM.
    pub fn lambda_qam(&self) -> Option<(f64, f64, f64)> {
        match self.kind {
            ModulationKind::Qpsk => Some((1.0, 2.0, 1.0)),
            ModulationKind::Mqam => {
                let m = self.m as f64;
                let r = m.sqrt();
                Some((3.0 / (m - 1.0), 4.0 - 4.0 / r, (2.0 - 2.0 / r).powi(2)))
            }
            _ => None,
        }
    }

    /// Error rate as a sum of unified-integral terms.
    pub fn identities(&self) -> Vec<Identity> {
        if let Some((l1, l2, l3)) = self.lambda_binary() {
            let theta = l3 * l2.powf(l1) / (2.0 * libm::tgamma(l1));
            return vec![Identity::J { theta, eps: l1 - 1.0, phi: l2 }];
        }
        if let Some((l4, l5, l6)) = self.lambda_qam() {
            return vec![
                Identity::J {
                    theta: (l4 / (8.0 * PI)).sqrt() * (l5 - l6),
                    eps: -0.5,
                    phi: l4 / 2.0,
                },
                Identity::JHat { theta: l4 * l6 / (2.0 * PI), phi: l4 },
            ];
        }
        let m = self.m as f64;
        vec![Identity::J {
            theta: (3.0 * (m - 1.0) / (PI * m * m * (m + 1.0))).sqrt(),
            eps: -0.5,
            phi: 3.0 / (m * m - 1.0),
        }]
    }

    /// Conditional error probability at instantaneous SNR `gamma`.
    pub fn cep(&self, gamma: f64) -> f64 {
        use ModulationKind::*;
        match self.kind {
            Bpsk => gaussian_q((2.0 * gamma).sqrt()),
            Cbfsk => gaussian_q(gamma.sqrt()),
            Ncbfsk => 0.5 * (-0.5 * gamma).exp(),
            Dbpsk => 0.5 * (-gamma).exp(),
            Mpsk => 2.0 * gaussian_q((2.0 * gamma).sqrt() * (PI / self.m as f64).sin()),
            Qpsk | Mqam => {
                let (l4, l5, l6) = self.lambda_qam().expect("qam kinds");
                let q = gaussian_q((l4 * gamma).sqrt());
                l5 * q - l6 * q * q
            }
            Mpam => {
                let m = self.m as f64;
                2.0 * (m - 1.0) / m * gaussian_q((6.0 * gamma / (m * m - 1.0)).sqrt())
            }
        }
    }

    /// Leading term of the CEP as γ grows.
    pub fn tail(&self) -> CepTail {
        use ModulationKind::*;
        match self.kind {
            Bpsk => CepTail::Gaussian { coef: 1.0, k: 2.0 },
            Cbfsk => CepTail::Gaussian { coef: 1.0, k: 1.0 },
            Ncbfsk => CepTail::Exponential { coef: 0.5, k: 0.5 },
            Dbpsk => CepTail::Exponential { coef: 0.5, k: 1.0 },
            Mpsk => CepTail::Gaussian {
                coef: 2.0,
                k: 2.0 * (PI / self.m as f64).sin().powi(2),
            },
            Qpsk | Mqam => {
                let (l4, l5, _) = self.lambda_qam().expect("qam kinds");
                CepTail::Gaussian { coef: l5, k: l4 }
            }
            Mpam => {
                let m = self.m as f64;
                CepTail::Gaussian {
                    coef: 2.0 * (m - 1.0) / m,
                    k: 6.0 / (m * m - 1.0),
                }
            }
        }
    }

    /// True for kinds reported as symbol error rates.
    pub fn is_symbol_rate(&self) -> bool {
        !matches!(
            self.kind,
            ModulationKind::Bpsk | ModulationKind::Cbfsk | ModulationKind::Ncbfsk | ModulationKind::Dbpsk
        )
    }
}

impl fmt::Display for ModulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ModulationKind::*;
        match self.kind {
            Bpsk => f.write_str("bpsk"),
            Cbfsk => f.write_str("cbfsk"),
            Ncbfsk => f.write_str("ncbfsk"),
            Dbpsk => f.write_str("dbpsk"),
            Qpsk => f.write_str("qpsk"),
            Mpsk => write!(f, "mpsk:{}", self.m),
            Mpam => write!(f, "mpam:{}", self.m),
            Mqam => write!(f, "mqam:{}", self.m),
        }
    }
}

impl FromStr for ModulationSpec {
    type Err = Error;

    /// `bpsk`, `cbfsk`, `ncbfsk`, `dbpsk`, `qpsk`, `mpsk:M`, `mpam:M`, `mqam:M`
    fn from_str(s: &str) -> Result<Self> {
        use ModulationKind::*;
        let lower = s.trim().to_ascii_lowercase();
        let (name, size) = match lower.split_once(':') {
            Some((n, m)) => {
                let m: u32 = m
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad constellation size in modulation '{s}'")))?;
                (n.trim().to_string(), Some(m))
            }
            None => (lower.clone(), None),
        };
        let (kind, default) = match name.as_str() {
            "bpsk" => (Bpsk, Some(2)),
            "cbfsk" => (Cbfsk, Some(2)),
            "ncbfsk" => (Ncbfsk, Some(2)),
            "dbpsk" => (Dbpsk, Some(2)),
            "qpsk" => (Qpsk, Some(4)),
            "mpsk" => (Mpsk, None),
            "mpam" => (Mpam, None),
            "mqam" => (Mqam, None),
            _ => return Err(Error::Config(format!("unknown modulation '{s}'"))),
        };
        let m = match (size, default) {
            (Some(m), _) => m,
            (None, Some(d)) => d,
            (None, None) => return Err(Error::Config(format!("modulation '{s}' needs a size, e.g. {name}:16"))),
        };
        ModulationSpec::new(kind, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_tables() {
        let p = |s: &str| s.parse::<ModulationSpec>().unwrap();
        assert_eq!(p("bpsk").lambda_binary(), Some((0.5, 1.0, 1.0)));
        assert_eq!(p("cbfsk").lambda_binary(), Some((0.5, 0.5, 1.0)));
        assert_eq!(p("ncbfsk").lambda_binary(), Some((1.0, 0.5, 1.0)));
        assert_eq!(p("dbpsk").lambda_binary(), Some((1.0, 1.0, 1.0)));
        assert_eq!(p("qpsk").lambda_qam(), Some((1.0, 2.0, 1.0)));
        let (l4, l5, l6) = p("mqam:16").lambda_qam().unwrap();
        assert_eq!((l4, l5, l6), (0.2, 3.0, 2.25));
        assert_eq!(p("mqam:4").lambda_qam(), p("qpsk").lambda_qam());
        let (_, l2, l3) = p("mpsk:8").lambda_binary().unwrap();
        assert!((l2 - (PI / 8.0).sin().powi(2)).abs() < 1e-16);
        assert_eq!(l3, 2.0);
        assert!(p("mpsk:8").approx_flag() && !p("qpsk").approx_flag());
    }

    #[test]
    fn parsing() {
        for s in ["bpsk", "cbfsk", "ncbfsk", "dbpsk", "qpsk", "mpsk:16", "mpam:4", "mqam:64"] {
            assert_eq!(s.parse::<ModulationSpec>().unwrap().to_string(), s);
        }
        for s in ["mpsk", "mpsk:4", "mqam:8", "mpam:3", "ook", "bpsk:4", "mqam:x"] {
            assert!(s.parse::<ModulationSpec>().is_err(), "{s}");
        }
        assert_eq!("QPSK".parse::<ModulationSpec>().unwrap().bits_per_symbol(), 2);
    }

    #[test]
    fn ceps_match_textbook_forms() {
        let q = |s: &str| s.parse::<ModulationSpec>().unwrap();
        assert_eq!(q("bpsk").cep(0.0), 0.5);
        assert_eq!(q("dbpsk").cep(2.0), 0.5 * (-2f64).exp());
        let g: f64 = 3.0;
        let qq = gaussian_q(g.sqrt());
        assert!((q("qpsk").cep(g) - (2.0 * qq - qq * qq)).abs() < 1e-16);
        assert!((q("mpam:2").cep(g) - q("bpsk").cep(g)).abs() < 1e-16);
    }
}
