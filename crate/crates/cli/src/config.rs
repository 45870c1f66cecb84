//! Run descriptions: flat `key = value` text, command-line overrides and
//! validation into engine types.
//!
//! Pairs are separated by newlines or commas. A comma-separated fragment
//! without `=` continues the previous value, so `pe = 0.01, 0.2` and
//! `mapping = perm=3,1,0,2` both read naturally. `#` starts a comment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num::rational::Rational64;
use num::{One, Zero};
use selstbc::feedback::{build_codebook, CodewordMapping, FeedbackModel, MixingMode};
use selstbc::montecarlo::{FeedbackMode, ReceiveMode};
use selstbc::performance::{Metric, ModulationSpec};
use selstbc::snr_model::{default_code_rate, Scheme, SchemeConfig};

use crate::grid::SnrGrid;
use crate::{CliError, CliResult};

/// Orthogonal STBC family; fixes the number of transmitted streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    G2,
    G3,
}

impl Code {
    pub fn n_s(self) -> u32 {
        match self {
            Code::G2 => 2,
            Code::G3 => 3,
        }
    }

    pub fn for_streams(n_s: u32) -> Option<Code> {
        match n_s {
            2 => Some(Code::G2),
            3 => Some(Code::G3),
            _ => None,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Code::G2 => "g2",
            Code::G3 => "g3",
        })
    }
}

impl FromStr for Code {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g2" => Ok(Code::G2),
            "g3" => Ok(Code::G3),
            _ => Err(format!("unknown code '{s}' (expected g2 or g3)")),
        }
    }
}

/// What the `snr_db` column measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrAxis {
    /// E_s/N₀
    #[default]
    Es,
    /// E_b/N₀, with E_s = E_b·log₂M
    Eb,
}

impl FromStr for SnrAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "es" => Ok(SnrAxis::Es),
            "eb" => Ok(SnrAxis::Eb),
            _ => Err(format!("unknown SNR axis '{s}' (expected es or eb)")),
        }
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "joint" => Ok(Scheme::JointTrasStbc),
        "tas" => Ok(Scheme::TasStbc),
        _ => Err(format!("unknown scheme '{s}' (expected joint or tas)")),
    }
}

pub fn parse_feedback_mode(s: &str) -> Result<FeedbackMode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "paper" => Ok(FeedbackMode::PaperModel),
        "bit-exact" | "bitexact" => Ok(FeedbackMode::BitExact),
        _ => Err(format!("unknown feedback mode '{s}' (expected paper or bit-exact)")),
    }
}

pub fn parse_receive_mode(s: &str) -> Result<ReceiveMode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "model" => Ok(ReceiveMode::ModelFaithful),
        "physical" => Ok(ReceiveMode::Physical),
        _ => Err(format!("unknown receive mode '{s}' (expected model or physical)")),
    }
}

pub fn parse_mixing(s: &str) -> Result<MixingMode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "paper" => Ok(MixingMode::Paper),
        "bit-exact" | "bitexact" => Ok(MixingMode::BitExact),
        _ => Err(format!("unknown mixing mode '{s}' (expected paper or bit-exact)")),
    }
}

/// `natural` or `perm=w0,w1,...`
pub fn parse_mapping(s: &str) -> Result<CodewordMapping, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("natural") {
        return Ok(CodewordMapping::NaturalBinary);
    }
    let body = t
        .strip_prefix("perm=")
        .or_else(|| t.strip_prefix("perm:"))
        .ok_or_else(|| format!("unknown mapping '{s}' (expected natural or perm=w0,w1,...)"))?;
    parse_list(body, |w| w.parse::<u32>().map_err(|_| format!("bad codeword '{w}' in mapping")))
        .map(CodewordMapping::ExplicitPermutation)
}

/// Decimal (`0.5`, `1.5`) or ratio (`1/2`) to an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64, String> {
    let t = s.trim();
    let bad = || format!("bad rational number '{s}'");
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if frac.len() > 12 || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let neg = int.starts_with('-');
    let int_val: i64 = match int.trim_start_matches(['-', '+']) {
        "" => 0,
        d if d.bytes().all(|b| b.is_ascii_digit()) && d.len() <= 12 => d.parse().map_err(|_| bad())?,
        _ => return Err(bad()),
    };
    let scale = 10i64.pow(frac.len() as u32);
    let frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let r = Rational64::new(int_val * scale + frac_val, scale);
    Ok(if neg { -r } else { r })
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split([',', ' ', '\t']).map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(format!("empty list '{s}'"));
    }
    parts.into_iter().map(item).collect()
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Integer that may be written in exponent form, e.g. `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.trim().parse::<u64>() {
        return Ok(v);
    }
    let v = parse_f64(s)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as u64)
    } else {
        Err(format!("'{s}' is not a trial count"))
    }
}

/// Unvalidated run settings; every field is optional so that a config file
/// and command-line flags can be layered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSettings {
    pub scheme: Option<Scheme>,
    pub n_t: Option<Vec<u32>>,
    pub n_s: Option<u32>,
    pub n_r: Option<Vec<u32>>,
    pub m: Option<Rational64>,
    pub code: Option<Code>,
    pub code_rate: Option<Rational64>,
    pub modulation: Option<ModulationSpec>,
    pub rate: Option<f64>,
    pub p_e: Option<Vec<f64>>,
    pub snr: Option<SnrGrid>,
    pub snr_axis: Option<SnrAxis>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub feedback_mode: Option<FeedbackMode>,
    pub receive_mode: Option<ReceiveMode>,
    pub mapping: Option<CodewordMapping>,
    pub mixing: Option<MixingMode>,
    pub out: Option<PathBuf>,
}

impl RunSettings {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunSettings) -> RunSettings {
        RunSettings {
            scheme: over.scheme.or(self.scheme),
            n_t: over.n_t.or(self.n_t),
            n_s: over.n_s.or(self.n_s),
            n_r: over.n_r.or(self.n_r),
            m: over.m.or(self.m),
            code: over.code.or(self.code),
            code_rate: over.code_rate.or(self.code_rate),
            modulation: over.modulation.or(self.modulation),
            rate: over.rate.or(self.rate),
            p_e: over.p_e.or(self.p_e),
            snr: over.snr.or(self.snr),
            snr_axis: over.snr_axis.or(self.snr_axis),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            feedback_mode: over.feedback_mode.or(self.feedback_mode),
            receive_mode: over.receive_mode.or(self.receive_mode),
            mapping: over.mapping.or(self.mapping),
            mixing: over.mixing.or(self.mixing),
            out: over.out.or(self.out),
        }
    }

    /// Applies one `key = value` pair. List keys accumulate on repetition.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let k = key.trim().to_ascii_lowercase().replace('_', "-");
        let v = value.trim();
        if v.is_empty() {
            return Err(format!("key '{key}' has no value"));
        }
        let once = |present: bool| {
            if present {
                Err(format!("key '{key}' given more than once"))
            } else {
                Ok(())
            }
        };
        match k.as_str() {
            "scheme" => {
                once(self.scheme.is_some())?;
                self.scheme = Some(parse_scheme(v)?);
            }
            "nt" | "n-t" => self.n_t.get_or_insert_with(Vec::new).extend(parse_list(v, parse_u32)?),
            "ns" | "n-s" => {
                once(self.n_s.is_some())?;
                self.n_s = Some(parse_u32(v)?);
            }
            "nr" | "n-r" => self.n_r.get_or_insert_with(Vec::new).extend(parse_list(v, parse_u32)?),
            "m" => {
                once(self.m.is_some())?;
                self.m = Some(parse_rational(v)?);
            }
            "code" => {
                once(self.code.is_some())?;
                self.code = Some(v.parse()?);
            }
            "code-rate" => {
                once(self.code_rate.is_some())?;
                self.code_rate = Some(parse_rational(v)?);
            }
            "mod" | "modulation" => {
                once(self.modulation.is_some())?;
                self.modulation = Some(v.parse().map_err(|e: selstbc::Error| e.to_string())?);
            }
            "rate" => {
                once(self.rate.is_some())?;
                self.rate = Some(parse_f64(v)?);
            }
            "pe" | "p-e" | "feedback.pe" => self.p_e.get_or_insert_with(Vec::new).extend(parse_list(v, parse_f64)?),
            "snr" => {
                once(self.snr.is_some())?;
                self.snr = Some(v.parse().map_err(|e: CliError| e.to_string())?);
            }
            "snr-axis" => {
                once(self.snr_axis.is_some())?;
                self.snr_axis = Some(v.parse()?);
            }
            "trials" => {
                once(self.trials.is_some())?;
                self.trials = Some(parse_count(v)?);
            }
            "seed" => {
                once(self.seed.is_some())?;
                self.seed = Some(v.parse().map_err(|_| format!("bad seed '{v}'"))?);
            }
            "feedback-mode" => {
                once(self.feedback_mode.is_some())?;
                self.feedback_mode = Some(parse_feedback_mode(v)?);
            }
            "receive-mode" => {
                once(self.receive_mode.is_some())?;
                self.receive_mode = Some(parse_receive_mode(v)?);
            }
            "mapping" | "feedback.mapping" => {
                once(self.mapping.is_some())?;
                self.mapping = Some(parse_mapping(v)?);
            }
            "feedback.permutation" | "permutation" => {
                once(self.mapping.is_some())?;
                self.mapping = Some(parse_mapping(&format!("perm={v}"))?);
            }
            "mixing" | "feedback.mixing" => {
                once(self.mixing.is_some())?;
                self.mixing = Some(parse_mixing(v)?);
            }
            "out" => {
                once(self.out.is_some())?;
                self.out = Some(PathBuf::from(v));
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Resolves defaults and checks every variant, collecting all problems.
    pub fn validate(&self) -> CliResult<RunSpec> {
        let mut errs = Vec::new();
        let scheme = self.scheme.unwrap_or_else(|| {
            errs.push("missing key 'scheme'".to_string());
            Scheme::TasStbc
        });
        let n_t = self.n_t.clone().unwrap_or_else(|| {
            errs.push("missing key 'nt'".to_string());
            Vec::new()
        });
        let n_r = self.n_r.clone().unwrap_or_else(|| vec![1]);
        let m = self.m.unwrap_or_else(Rational64::one);
        let code = match (self.code, self.n_s) {
            (Some(c), Some(ns)) if c.n_s() != ns => {
                errs.push(format!("code {c} carries {} streams but ns = {ns}", c.n_s()));
                c
            }
            (Some(c), _) => c,
            (None, Some(ns)) => Code::for_streams(ns).unwrap_or_else(|| {
                errs.push(format!("ns = {ns} has no orthogonal code (supported: 2 with g2, 3 with g3)"));
                Code::G2
            }),
            (None, None) => Code::G2,
        };
        let n_s = code.n_s();
        let code_rate = self.code_rate.unwrap_or_else(|| default_code_rate(n_s));
        if code_rate <= Rational64::zero() || code_rate > Rational64::one() {
            errs.push(format!("code rate {code_rate} is outside (0, 1]"));
        }
        let metric = match (self.modulation, self.rate) {
            (Some(_), Some(_)) => {
                errs.push("give either 'mod' (error rate) or 'rate' (outage), not both".into());
                None
            }
            (Some(md), None) => Some(Metric::ErrorRate(md)),
            (None, Some(r)) if r > 0.0 => Some(Metric::Outage { rate: r }),
            (None, Some(r)) => {
                errs.push(format!("outage rate must be positive, got {r}"));
                None
            }
            (None, None) => Some(Metric::ErrorRate("bpsk".parse().expect("bpsk parses"))),
        };
        let snr_axis = self.snr_axis.unwrap_or_default();
        if snr_axis == SnrAxis::Eb && matches!(metric, Some(Metric::Outage { .. })) {
            errs.push("snr-axis eb needs a modulation; outage sweeps use es".into());
        }
        let p_e = self.p_e.clone().unwrap_or_else(|| vec![0.0]);
        for &p in &p_e {
            if !(0.0..=0.5).contains(&p) {
                errs.push(format!("p_e = {p} is outside [0, 0.5]"));
            }
        }
        let trials = self.trials.unwrap_or(100_000);
        if trials == 0 {
            errs.push("trials must be positive".into());
        }
        let mapping = self.mapping.clone().unwrap_or(CodewordMapping::NaturalBinary);
        let mixing = self.mixing.unwrap_or(MixingMode::Paper);
        if n_t.is_empty() && self.n_t.is_some() {
            errs.push("'nt' is empty".into());
        }
        let mut variants = Vec::new();
        for &nt in &n_t {
            for &nr in &n_r {
                let built = SchemeConfig::new(scheme, nt, n_s, nr, m)
                    .and_then(|c| c.with_code_rate(code_rate))
                    .and_then(|c| build_codebook(&c, &mapping).map(|_| c));
                match built {
                    Ok(c) => variants.push(c),
                    Err(e) => errs.push(format!("nt = {nt}, nr = {nr}: {}", strip_prefix(&e))),
                }
            }
        }
        if !errs.is_empty() {
            errs.dedup();
            return Err(CliError::Config(errs));
        }
        Ok(RunSpec {
            variants,
            code,
            metric: metric.expect("checked above"),
            p_e,
            snr: self.snr.unwrap_or_default(),
            snr_axis,
            trials,
            seed: self.seed.unwrap_or(1),
            feedback_mode: self.feedback_mode.unwrap_or(FeedbackMode::PaperModel),
            receive_mode: self.receive_mode.unwrap_or(ReceiveMode::ModelFaithful),
            mapping,
            mixing,
            out: self.out.clone(),
        })
    }
}

fn strip_prefix(e: &selstbc::Error) -> String {
    match e {
        selstbc::Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// Reads `key = value` text, reporting every malformed line at once.
pub fn parse_settings(text: &str) -> CliResult<RunSettings> {
    let mut settings = RunSettings::default();
    let mut errs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut pairs: Vec<(String, String)> = Vec::new();
        for frag in line.split(',') {
            match frag.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() && is_key(k) => pairs.push((k.trim().into(), v.trim().into())),
                _ => match pairs.last_mut() {
                    Some((_, v)) => {
                        v.push(',');
                        v.push_str(frag.trim());
                    }
                    None => errs.push(format!("line {}: expected 'key = value', got '{}'", lineno + 1, frag.trim())),
                },
            }
        }
        for (k, v) in pairs {
            if let Err(e) = settings.set(&k, &v) {
                errs.push(format!("line {}: {e}", lineno + 1));
            }
        }
    }
    if errs.is_empty() {
        Ok(settings)
    } else {
        Err(CliError::Config(errs))
    }
}

fn is_key(s: &str) -> bool {
    s.trim().chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
}

/// Parses and validates a complete run description.
pub fn parse_config(text: &str) -> CliResult<RunSpec> {
    parse_settings(text)?.validate()
}

/// A validated run: one [`SchemeConfig`] per (n_T, n_R) variant.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub variants: Vec<SchemeConfig>,
    pub code: Code,
    pub metric: Metric,
    pub p_e: Vec<f64>,
    pub snr: SnrGrid,
    pub snr_axis: SnrAxis,
    pub trials: u64,
    pub seed: u64,
    pub feedback_mode: FeedbackMode,
    pub receive_mode: ReceiveMode,
    pub mapping: CodewordMapping,
    pub mixing: MixingMode,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn feedback_model(&self, cfg: &SchemeConfig, p_e: f64) -> CliResult<FeedbackModel> {
        Ok(FeedbackModel::new(p_e, build_codebook(cfg, &self.mapping)?, self.mixing)?)
    }

    /// Linear E_s/N₀ for a point on the sweep axis.
    pub fn es_n0(&self, snr_db: f64) -> f64 {
        let lin = 10f64.powf(snr_db / 10.0);
        match (self.snr_axis, self.metric) {
            (SnrAxis::Eb, Metric::ErrorRate(md)) => lin * md.bits_per_symbol() as f64,
            _ => lin,
        }
    }
}
