//! Parameter bundles for the published figures.
//!
//! The SNR grid is 0:2:30 dB for every preset. Figure 2 does not name its
//! transmit array sizes; the preset uses n_T ∈ {4, 5} as for the other
//! three-stream figures.

use std::fmt;
use std::str::FromStr;

use num::rational::Rational64;
use selstbc::snr_model::Scheme;

use crate::config::{Code, RunSettings, RunSpec};
use crate::grid::SnrGrid;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7];

    pub fn settings(self) -> RunSettings {
        let pe4 = Some(vec![0.0, 0.01, 0.2, 0.5]);
        let base = RunSettings {
            snr: Some(SnrGrid::default()),
            ..Default::default()
        };
        match self {
            Preset::Fig2 => RunSettings {
                scheme: Some(Scheme::JointTrasStbc),
                code: Some(Code::G3),
                n_t: Some(vec![4, 5]),
                n_r: Some(vec![1, 2]),
                m: Some(Rational64::from_integer(2)),
                rate: Some(2.0),
                p_e: Some(vec![0.05, 0.2]),
                ..base
            },
            Preset::Fig3 => RunSettings {
                scheme: Some(Scheme::TasStbc),
                code: Some(Code::G2),
                n_t: Some(vec![3, 4]),
                n_r: Some(vec![3]),
                m: Some(Rational64::from_integer(1)),
                modulation: Some("qpsk".parse().expect("valid")),
                p_e: pe4,
                ..base
            },
            Preset::Fig4 => RunSettings {
                scheme: Some(Scheme::TasStbc),
                code: Some(Code::G3),
                n_t: Some(vec![4, 5]),
                n_r: Some(vec![2]),
                m: Some(Rational64::new(1, 2)),
                modulation: Some("mqam:16".parse().expect("valid")),
                p_e: pe4,
                ..base
            },
            Preset::Fig5 => RunSettings {
                scheme: Some(Scheme::JointTrasStbc),
                code: Some(Code::G2),
                n_t: Some(vec![3, 4]),
                n_r: Some(vec![3]),
                m: Some(Rational64::from_integer(1)),
                modulation: Some("qpsk".parse().expect("valid")),
                p_e: pe4,
                ..base
            },
            Preset::Fig6 => RunSettings {
                scheme: Some(Scheme::JointTrasStbc),
                code: Some(Code::G3),
                n_t: Some(vec![4, 5]),
                n_r: Some(vec![2]),
                m: Some(Rational64::from_integer(2)),
                modulation: Some("cbfsk".parse().expect("valid")),
                p_e: pe4,
                ..base
            },
            Preset::Fig7 => RunSettings {
                scheme: Some(Scheme::JointTrasStbc),
                code: Some(Code::G2),
                n_t: Some(vec![3]),
                n_r: Some(vec![1, 2, 3]),
                m: Some(Rational64::from_integer(1)),
                modulation: Some("bpsk".parse().expect("valid")),
                p_e: Some(vec![0.01, 0.1]),
                ..base
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = Preset::ALL.iter().position(|p| p == self).expect("listed") + 2;
        write!(f, "fig{n}")
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| CliError::config(format!("unknown preset '{s}' (expected fig2 ... fig7)")))
    }
}

pub fn figure_preset(name: &str) -> CliResult<RunSpec> {
    name.parse::<Preset>()?.settings().validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use selstbc::performance::Metric;

    #[test]
    fn captions() {
        let f3 = figure_preset("fig3").unwrap();
        assert_eq!(f3.variants.iter().map(|c| c.n_t).collect::<Vec<_>>(), vec![3, 4]);
        assert!(f3.variants.iter().all(|c| c.scheme == Scheme::TasStbc && c.n_r == 3 && c.n_s == 2));
        assert_eq!(f3.p_e, vec![0.0, 0.01, 0.2, 0.5]);
        let f6 = figure_preset("fig6").unwrap();
        assert_eq!(f6.code, Code::G3);
        assert!(f6.variants.iter().all(|c| c.m == Rational64::from_integer(2) && c.n_r == 2));
        let f2 = figure_preset("fig2").unwrap();
        assert_eq!(f2.metric, Metric::Outage { rate: 2.0 });
        assert_eq!(f2.variants.len(), 4);
        assert_eq!(f2.p_e, vec![0.05, 0.2]);
    }

    #[test]
    fn names() {
        for p in Preset::ALL {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("fig8".parse::<Preset>().is_err());
    }
}
