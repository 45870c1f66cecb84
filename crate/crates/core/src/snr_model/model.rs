use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num::{One, ToPrimitive, Zero};

use super::config::{SchemeConfig, ShapeKey, Tasc};
use super::expansion::{check_term_budget, enumerate_expansion, laplace_tuples};
use super::mixture::{GammaMixture, MixTerm, MixtureKind};
use super::poles::{merge_poles, partial_fraction_residues, RatePole};
use crate::numeric::{factorial, Q};
use crate::specfun::reg_lower_gamma;
use crate::{Error, Result};

/// Per-branch distribution of the selected-rank sum, canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchModel {
    pub pdf: GammaMixture,
    pub cdf: GammaMixture,
}

/// Output SNR distribution for one (configuration, subset) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputModel {
    pub tasc: Tasc,
    pub n_branches: u32,
    pub m: f64,
    pub branch: BranchModel,
    /// F_out(y) = F_branch(y)^N
    pub cdf: GammaMixture,
    pub pdf: GammaMixture,
}

impl OutputModel {
    pub fn cdf_at(&self, x: f64, gamma_bar: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.cdf.eval_scaled(x, gamma_bar, self.m).clamp(0.0, 1.0)
    }

    pub fn pdf_at(&self, x: f64, gamma_bar: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.pdf.eval_scaled(x, gamma_bar, self.m).max(0.0)
    }
}

/// F_U(x) = P(mg, x m/γ̄) for a single unsorted branch.
pub fn branch_cdf_unified(cfg: &SchemeConfig, x: f64, gamma_bar: f64) -> Result<f64> {
    if !(gamma_bar > 0.0) {
        return Err(Error::domain("branch_cdf_unified", format!("gamma_bar = {gamma_bar}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("branch_cdf_unified", format!("x = {x}")));
    }
    reg_lower_gamma(cfg.mg() as f64, x * cfg.m_f64() / gamma_bar)
}

/// Exact density and CDF of one branch's selected-rank sum.
pub fn branch_distribution(cfg: &SchemeConfig, tasc: &Tasc) -> Result<BranchModel> {
    cfg.validate()?;
    check_term_budget(cfg, tasc)?;
    let table = enumerate_expansion(cfg, tasc)?;

    // terms sharing (t, μ) share their Laplace tuples
    let mut by_tmu: HashMap<(Vec<u32>, Vec<u32>), Q> = HashMap::new();
    for term in table.terms {
        *by_tmu.entry((term.t, term.mu)).or_insert_with(Q::zero) += term.coeff;
    }
    let mut by_poles: HashMap<Vec<RatePole>, Q> = HashMap::new();
    let mut keys: Vec<_> = by_tmu.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    for ((t, mu), c) in keys {
        for tup in laplace_tuples(&t, &mu) {
            let merged = merge_poles(&tup.poles);
            *by_poles.entry(merged).or_insert_with(Q::zero) += &c * tup.coeff;
        }
    }

    let mut terms = Vec::new();
    let mut groups: Vec<_> = by_poles.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    for (poles, c) in groups {
        let residues = partial_fraction_residues(&poles)?;
        for (pole, res) in poles.iter().zip(residues) {
            for (j, r) in res.into_iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                // L^{-1}{(s+a)^{-(j+1)}} = y^j e^{-a y} / j!
                terms.push(MixTerm {
                    weight: &table.prefactor * &c * r / Q::from_integer(factorial(j as u32)),
                    power: j as u32,
                    rate: pole.q.clone(),
                });
            }
        }
    }
    let pdf = GammaMixture::new(MixtureKind::Density, terms);
    let mass = pdf.integral();
    if mass != Q::one() {
        return Err(Error::Internal(format!(
            "branch density for subset {tasc} integrates to {} instead of 1",
            mass.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let cdf = pdf.density_to_cdf();
    Ok(BranchModel { pdf, cdf })
}

fn build_output(cfg: &SchemeConfig, tasc: &Tasc) -> Result<OutputModel> {
    let branch = branch_distribution(cfg, tasc)?;
    let n = cfg.n_branches();
    let (cdf, pdf) = if n == 1 {
        (branch.cdf.clone(), branch.pdf.clone())
    } else {
        let cdf = branch.cdf.cdf_power(n);
        let pdf = cdf.cdf_to_density();
        (cdf, pdf)
    };
    Ok(OutputModel {
        tasc: tasc.clone(),
        n_branches: n,
        m: cfg.m_f64(),
        branch,
        cdf,
        pdf,
    })
}

type ModelCache = RwLock<HashMap<(ShapeKey, Tasc), Arc<OutputModel>>>;

fn cache() -> &'static ModelCache {
    static CACHE: OnceLock<ModelCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached output model. Concurrent readers share one `Arc`; a missing entry
/// is built outside the lock and inserted once.
pub fn output_model(cfg: &SchemeConfig, tasc: &Tasc) -> Result<Arc<OutputModel>> {
    let key = (cfg.shape_key(), tasc.clone());
    if let Some(m) = cache().read().expect("model cache poisoned").get(&key) {
        return Ok(m.clone());
    }
    let model = Arc::new(build_output(cfg, tasc)?);
    let mut guard = cache().write().expect("model cache poisoned");
    Ok(guard.entry(key).or_insert(model).clone())
}

fn check_point(func: &'static str, x: f64, gamma_bar: f64) -> Result<()> {
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(Error::domain(func, format!("gamma_bar = {gamma_bar} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(func, format!("x = {x} must be non-negative")));
    }
    Ok(())
}

/// CDF of the output SNR at `x` for average branch SNR `gamma_bar`.
pub fn output_cdf(cfg: &SchemeConfig, tasc: &Tasc, x: f64, gamma_bar: f64) -> Result<f64> {
    check_point("output_cdf", x, gamma_bar)?;
    Ok(output_model(cfg, tasc)?.cdf_at(x, gamma_bar))
}

/// Density of the output SNR at `x`.
pub fn output_pdf(cfg: &SchemeConfig, tasc: &Tasc, x: f64, gamma_bar: f64) -> Result<f64> {
    check_point("output_pdf", x, gamma_bar)?;
    Ok(output_model(cfg, tasc)?.pdf_at(x, gamma_bar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snr_model::config::Scheme;
    use num::rational::Rational64;

    fn joint(n_t: u32, n_s: u32, n_r: u32, m: i64) -> SchemeConfig {
        SchemeConfig::new(Scheme::JointTrasStbc, n_t, n_s, n_r, Rational64::from_integer(m)).unwrap()
    }

    #[test]
    fn unified_branch_cdf_examples() {
        let c1 = joint(2, 1, 1, 1);
        assert_eq!(branch_cdf_unified(&c1, 0.0, 1.0).unwrap(), 0.0);
        assert!((branch_cdf_unified(&c1, 1.0, 1.0).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-15);
        let c2 = joint(2, 1, 1, 2);
        let expected = 1.0 - 3.0 * (-2f64).exp();
        assert!((branch_cdf_unified(&c2, 1.0, 1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn worst_rank_of_two_is_a_minimum() {
        let c = joint(2, 1, 1, 1);
        let b = branch_distribution(&c, &Tasc::new(vec![2], &c).unwrap()).unwrap();
        assert_eq!(b.pdf.terms.len(), 1);
        assert_eq!(b.pdf.terms[0].power, 0);
        assert_eq!(b.pdf.terms[0].rate, Q::from_integer(2.into()));
        assert_eq!(b.pdf.terms[0].weight, Q::from_integer(2.into()));
    }

    #[test]
    fn best_of_two_cdf() {
        let c = joint(2, 1, 1, 1);
        let b = branch_distribution(&c, &Tasc::best(&c)).unwrap();
        let expected = (1.0 - (-1f64).exp()).powi(2);
        assert!((b.cdf.eval(1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn no_selection_is_a_gamma_sum() {
        for (n, m) in [(2u32, 1i64), (3, 2), (2, 3)] {
            let c = joint(n, n, 1, m);
            let b = branch_distribution(&c, &Tasc::best(&c)).unwrap();
            let shape = (c.mg() * n) as f64;
            for &y in &[0.1, 0.7, 2.0, 5.0, 12.0] {
                let p = reg_lower_gamma(shape, y).unwrap();
                assert!((b.cdf.eval(y) - p).abs() < 1e-13, "n={n} m={m} y={y}");
            }
        }
    }

    #[test]
    fn joint_output_examples() {
        let c = joint(2, 1, 2, 1);
        let t = Tasc::best(&c);
        let e = (-1f64).exp();
        let cdf = output_cdf(&c, &t, 1.0, 1.0).unwrap();
        assert!((cdf - (1.0 - e).powi(4)).abs() < 1e-14);
        let pdf = output_pdf(&c, &t, 1.0, 1.0).unwrap();
        assert!((pdf - 4.0 * e * (1.0 - e).powi(3)).abs() < 1e-14);
        assert_eq!(output_cdf(&c, &t, 0.0, 1.0).unwrap(), 0.0);
        assert!(output_cdf(&c, &t, 1e6, 1.0).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn scale_family() {
        let c = SchemeConfig::new(Scheme::TasStbc, 4, 2, 2, Rational64::new(1, 2)).unwrap();
        for tasc in c.tascs() {
            for &(x, g) in &[(0.5, 2.0), (3.0, 10.0), (40.0, 7.5)] {
                let a = output_cdf(&c, &tasc, x, g).unwrap();
                let b = output_cdf(&c, &tasc, x / g, 1.0).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_points() {
        let c = joint(2, 1, 1, 1);
        let t = Tasc::best(&c);
        assert!(output_cdf(&c, &t, -1.0, 1.0).is_err());
        assert!(output_pdf(&c, &t, 1.0, 0.0).is_err());
    }
}
