//! Semi-analytic Monte Carlo: sample Nakagami-m power gains, run the
//! selection and feedback process, and average the exact conditional error
//! probability (or the outage indicator) of the resulting output SNR.
//!
//! Trial `i` draws from its own ChaCha stream `(seed, i)`, and trials are
//! accumulated in fixed-size chunks merged in index order, so an estimate
//! does not depend on how many worker threads ran it.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::feedback::FeedbackModel;
use crate::performance::Metric;
use crate::snr_model::{Scheme, SchemeConfig, Tasc};
use crate::{Error, Result};

/// Trials per accumulation chunk.
pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackMode {
    /// Correct with probability p_CF, otherwise a uniformly chosen wrong subset.
    PaperModel,
    /// Each feedback bit flips independently; improper words map to a
    /// uniformly chosen subset.
    BitExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceiveMode {
    /// Best receive branch after applying the used ranks on every branch.
    ModelFaithful,
    /// Receive antenna fixed by the correct-feedback statistic (joint scheme).
    Physical,
}

#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub cfg: SchemeConfig,
    pub fm: FeedbackModel,
    pub metric: Metric,
    pub gamma_bar: f64,
    pub trials: u64,
    pub seed: u64,
    pub feedback_mode: FeedbackMode,
    pub receive_mode: ReceiveMode,
    pub time_limit: Option<Duration>,
}

impl TrialPlan {
    pub fn new(cfg: SchemeConfig, fm: FeedbackModel, metric: Metric, gamma_bar: f64, trials: u64, seed: u64) -> Self {
        TrialPlan {
            cfg,
            fm,
            metric,
            gamma_bar,
            trials,
            seed,
            feedback_mode: FeedbackMode::PaperModel,
            receive_mode: ReceiveMode::ModelFaithful,
            time_limit: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.gamma_bar > 0.0) || !self.gamma_bar.is_finite() {
            return Err(Error::domain("montecarlo", format!("gamma_bar = {} must be positive", self.gamma_bar)));
        }
        if self.fm.codebook.k != self.cfg.num_tascs() as usize {
            return Err(Error::Config(format!(
                "feedback codebook has {} subsets but the configuration has {}",
                self.fm.codebook.k,
                self.cfg.num_tascs()
            )));
        }
        if self.receive_mode == ReceiveMode::Physical && self.cfg.scheme != Scheme::JointTrasStbc {
            return Err(Error::Config("physical receive mode applies to the joint scheme only".into()));
        }
        if let Metric::Outage { rate } = self.metric {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::domain("montecarlo", format!("rate = {rate} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over √trials.
    pub std_error: f64,
    pub trials: u64,
}

/// Channel power gains |h|², row-major n_R × n_T, each Gamma(m, Ω/m).
pub fn sample_channel_powers<R: Rng + ?Sized>(cfg: &SchemeConfig, rng: &mut R) -> Vec<f64> {
    let m = cfg.m_f64();
    let gamma = Gamma::new(m, cfg.omega / m).expect("validated shape and scale");
    (0..cfg.n_r * cfg.n_t).map(|_| gamma.sample(rng)).collect()
}

/// Sum of the entries of `values` holding the given ranks (1 = largest).
fn rank_sum(values: &mut [f64], ranks: &[u32]) -> f64 {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    ranks.iter().map(|&r| values[r as usize - 1]).sum()
}

/// Output SNR for per-entry SNRs `snr` (row-major n_R × n_T) when the
/// transmitter uses the antennas holding `tasc`'s ranks.
pub fn run_selection(snr: &[f64], cfg: &SchemeConfig, tasc: &Tasc, mode: ReceiveMode) -> f64 {
    let (n_r, n_t) = (cfg.n_r as usize, cfg.n_t as usize);
    debug_assert_eq!(snr.len(), n_r * n_t);
    match cfg.scheme {
        Scheme::TasStbc => {
            let mut per_tx: Vec<f64> = (0..n_t).map(|t| (0..n_r).map(|r| snr[r * n_t + t]).sum()).collect();
            rank_sum(&mut per_tx, &tasc.ranks)
        }
        Scheme::JointTrasStbc => {
            let mut row = vec![0.0; n_t];
            let mut at = |r: usize, ranks: &[u32]| {
                row.copy_from_slice(&snr[r * n_t..(r + 1) * n_t]);
                rank_sum(&mut row, ranks)
            };
            match mode {
                ReceiveMode::ModelFaithful => (0..n_r).map(|r| at(r, &tasc.ranks)).fold(0.0, f64::max),
                ReceiveMode::Physical => {
                    let best = Tasc::best(cfg);
                    let mut chosen = 0;
                    let mut top = f64::NEG_INFINITY;
                    for r in 0..n_r {
                        let v = at(r, &best.ranks);
                        if v > top {
                            top = v;
                            chosen = r;
                        }
                    }
                    at(chosen, &tasc.ranks)
                }
            }
        }
    }
}

/// Subset actually used after the feedback link.
pub fn draw_feedback<R: Rng + ?Sized>(cfg: &SchemeConfig, fm: &FeedbackModel, rng: &mut R, mode: FeedbackMode) -> Tasc {
    let cb = &fm.codebook;
    let k = cb.k;
    if k <= 1 || fm.p_e == 0.0 {
        return Tasc::best(cfg);
    }
    match mode {
        FeedbackMode::PaperModel => {
            if rng.random::<f64>() < fm.p_cf {
                Tasc::best(cfg)
            } else {
                cb.tasc_order[rng.random_range(1..k)].clone()
            }
        }
        FeedbackMode::BitExact => {
            // physical subsets in lexicographic antenna order; subset i is best
            let sent = rng.random_range(0..k);
            let mut word = cb.codewords[sent];
            for bit in 0..cb.eta {
                if rng.random::<f64>() < fm.p_e {
                    word ^= 1 << bit;
                }
            }
            let got = cb.subset_of(word).unwrap_or_else(|| rng.random_range(0..k));
            if got == sent {
                return Tasc::best(cfg);
            }
            let n_s = cfg.n_s as usize;
            let best_set = &cb.tasc_order[sent].ranks;
            let used_set = &cb.tasc_order[got].ranks;
            // ranks 1..=n_S go to the antennas of the best set in random order
            let mut top: Vec<u32> = (1..=cfg.n_s).collect();
            let mut rest: Vec<u32> = (cfg.n_s + 1..=cfg.n_t).collect();
            top.shuffle(rng);
            rest.shuffle(rng);
            let mut rank_of = vec![0u32; cfg.n_t as usize + 1];
            let (mut ti, mut ri) = (0, 0);
            for antenna in 1..=cfg.n_t {
                if best_set.contains(&antenna) {
                    rank_of[antenna as usize] = top[ti];
                    ti += 1;
                } else {
                    rank_of[antenna as usize] = rest[ri];
                    ri += 1;
                }
            }
            let mut ranks: Vec<u32> = used_set.iter().map(|&a| rank_of[a as usize]).collect();
            ranks.sort_unstable();
            debug_assert_eq!(ranks.len(), n_s);
            Tasc { ranks }
        }
    }
}

/// RNG for one trial: stream `trial` of the plan's seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Output SNR of one trial.
pub fn trial_output_snr(plan: &TrialPlan, trial: u64) -> f64 {
    let mut rng = trial_rng(plan.seed, trial);
    let gains = sample_channel_powers(&plan.cfg, &mut rng);
    let tasc = draw_feedback(&plan.cfg, &plan.fm, &mut rng, plan.feedback_mode);
    let scale = plan.gamma_bar / plan.cfg.omega;
    let snr: Vec<f64> = gains.iter().map(|g| g * scale).collect();
    run_selection(&snr, &plan.cfg, &tasc, plan.receive_mode)
}

/// Count, mean and centred sum of squares of a run of samples.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64),
        }
    }
}

fn run(plan: &TrialPlan, value: impl Fn(f64) -> f64 + Sync) -> Result<Estimate> {
    plan.validate()?;
    let start = Instant::now();
    let chunks = plan.trials.div_ceil(CHUNK);
    let parts: Vec<Option<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            if plan.time_limit.is_some_and(|limit| start.elapsed() > limit) {
                return None;
            }
            let mut m = Moments::default();
            for trial in c * CHUNK..((c + 1) * CHUNK).min(plan.trials) {
                m.push(value(trial_output_snr(plan, trial)));
            }
            Some(m)
        })
        .collect();
    let total = parts.iter().flatten().fold(Moments::default(), |acc, m| acc.merge(*m));
    if total.n < plan.trials {
        return Err(Error::Partial {
            completed: total.n,
            requested: plan.trials,
        });
    }
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(Estimate {
        mean: total.mean,
        std_error: (var / total.n as f64).sqrt(),
        trials: total.n,
    })
}

/// Average CEP of the plan's modulation over the simulated output SNR.
pub fn estimate_error_rate(plan: &TrialPlan) -> Result<Estimate> {
    let Metric::ErrorRate(modulation) = plan.metric else {
        return Err(Error::Config("plan metric is not an error rate".into()));
    };
    run(plan, |g| modulation.cep(g))
}

/// Fraction of trials with log₂(1 + γ) ≤ R.
pub fn estimate_outage(plan: &TrialPlan, rate: f64) -> Result<Estimate> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain("estimate_outage", format!("rate = {rate} must be positive")));
    }
    let threshold = rate.exp2() - 1.0;
    run(plan, |g| if g <= threshold { 1.0 } else { 0.0 })
}

/// Dispatches on the plan's metric.
pub fn estimate_metric(plan: &TrialPlan) -> Result<Estimate> {
    match plan.metric {
        Metric::ErrorRate(_) => estimate_error_rate(plan),
        Metric::Outage { rate } => estimate_outage(plan, rate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::{build_codebook, CodewordMapping, MixingMode};
    use crate::performance::ModulationSpec;
    use num::rational::Rational64;

    fn joint(n_t: u32, n_s: u32, n_r: u32) -> SchemeConfig {
        SchemeConfig::new(Scheme::JointTrasStbc, n_t, n_s, n_r, Rational64::from_integer(1)).unwrap()
    }

    #[test]
    fn hand_evaluated_selection() {
        let c = joint(2, 1, 2);
        let snr = [1.0, 3.0, 2.0, 1.0];
        let first = Tasc::new(vec![1], &c).unwrap();
        let second = Tasc::new(vec![2], &c).unwrap();
        assert_eq!(run_selection(&snr, &c, &first, ReceiveMode::ModelFaithful), 3.0);
        assert_eq!(run_selection(&snr, &c, &second, ReceiveMode::ModelFaithful), 1.0);
        // physical: antenna 0 wins on the best rank, then its weaker entry
        assert_eq!(run_selection(&snr, &c, &second, ReceiveMode::Physical), 1.0);
        let snr = [1.0, 3.0, 2.5, 2.4];
        assert_eq!(run_selection(&snr, &c, &second, ReceiveMode::ModelFaithful), 2.4);
        assert_eq!(run_selection(&snr, &c, &second, ReceiveMode::Physical), 1.0);
    }

    #[test]
    fn no_selection_sums_everything() {
        let t = SchemeConfig::new(Scheme::TasStbc, 2, 2, 2, Rational64::from_integer(1)).unwrap();
        let snr = [1.0, 3.0, 2.0, 1.0];
        assert_eq!(run_selection(&snr, &t, &Tasc::best(&t), ReceiveMode::ModelFaithful), 7.0);
        let j = joint(2, 2, 2);
        assert_eq!(run_selection(&snr, &j, &Tasc::best(&j), ReceiveMode::ModelFaithful), 4.0);
    }

    #[test]
    fn perfect_feedback_always_uses_the_best() {
        let c = joint(4, 2, 1);
        let fm = FeedbackModel::paper(&c, 0.0).unwrap();
        let mut rng = trial_rng(1, 0);
        for mode in [FeedbackMode::PaperModel, FeedbackMode::BitExact] {
            for _ in 0..200 {
                assert_eq!(draw_feedback(&c, &fm, &mut rng, mode), Tasc::best(&c));
            }
        }
    }

    #[test]
    fn zero_snr_hits_the_cep_ceiling() {
        let c = joint(2, 1, 1);
        let bpsk: ModulationSpec = "bpsk".parse().unwrap();
        let plan = TrialPlan::new(c.clone(), FeedbackModel::paper(&c, 0.0).unwrap(), Metric::ErrorRate(bpsk), 1e-12, 2000, 3);
        let e = estimate_error_rate(&plan).unwrap();
        assert!((e.mean - 0.5).abs() < 1e-5);
        assert_eq!(e.trials, 2000);
        let mut plan = plan;
        plan.gamma_bar = 1.0;
        assert_eq!(estimate_outage(&plan, 1e-12).unwrap().mean, 0.0);
        plan.gamma_bar = 1e12;
        assert_eq!(estimate_outage(&plan, 1.0).unwrap().mean, 0.0);
    }

    #[test]
    fn chunked_moments_match_a_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut one = Moments::default();
        xs.iter().for_each(|&x| one.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.n, one.n);
        assert!((merged.mean - one.mean).abs() < 1e-12);
        assert!((merged.m2 - one.m2).abs() < 1e-9 * one.m2);
    }

    #[test]
    fn rejects_bad_plans() {
        let c = joint(3, 2, 1);
        let bpsk: ModulationSpec = "bpsk".parse().unwrap();
        let fm = FeedbackModel::paper(&c, 0.1).unwrap();
        let mut plan = TrialPlan::new(c.clone(), fm, Metric::ErrorRate(bpsk), 1.0, 0, 1);
        assert!(estimate_error_rate(&plan).is_err());
        plan.trials = 10;
        plan.gamma_bar = -1.0;
        assert!(estimate_error_rate(&plan).is_err());
        plan.gamma_bar = 1.0;
        assert!(estimate_outage(&plan, 1.0).is_ok());
        assert!(estimate_outage(&plan, 0.0).is_err());
        let other = joint(4, 2, 1);
        plan.fm = FeedbackModel::new(0.1, build_codebook(&other, &CodewordMapping::NaturalBinary).unwrap(), MixingMode::Paper).unwrap();
        assert!(matches!(estimate_error_rate(&plan), Err(Error::Config(_))));
    }

    #[test]
    fn time_limit_reports_partial_progress() {
        let c = joint(4, 2, 2);
        let bpsk: ModulationSpec = "bpsk".parse().unwrap();
        let mut plan = TrialPlan::new(c.clone(), FeedbackModel::paper(&c, 0.1).unwrap(), Metric::ErrorRate(bpsk), 2.0, 50 * CHUNK, 9);
        plan.time_limit = Some(Duration::ZERO);
        match estimate_error_rate(&plan) {
            Err(Error::Partial { completed, requested }) => {
                assert!(completed < requested);
                assert_eq!(requested, 50 * CHUNK);
            }
            other => panic!("expected a partial result, got {other:?}"),
        }
    }
}
