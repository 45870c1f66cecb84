//! Agreement report for a sweep CSV: analytic vs Monte Carlo deviations,
//! high-SNR slope against the diversity order, and dB gaps to the ideal
//! feedback curve.

use std::collections::BTreeMap;
use std::fmt;

use selstbc::feedback::FeedbackModel;
use selstbc::performance::{asymptotic_table, averaged_metric, Metric};
use selstbc::snr_model::SchemeConfig;

use crate::config::{parse_rational, parse_scheme, SnrAxis};
use crate::sweep::SweepRow;
use crate::{CliError, CliResult};

pub fn parse_metric(s: &str) -> CliResult<Metric> {
    match s.trim().strip_prefix("outage:") {
        Some(r) => {
            let rate: f64 = r.parse().map_err(|_| CliError::config(format!("bad outage rate in '{s}'")))?;
            Ok(Metric::Outage { rate })
        }
        None => Ok(Metric::ErrorRate(s.parse()?)),
    }
}

/// SNR (dB) where a decreasing curve first falls to `level`, interpolating
/// log₁₀ of the metric linearly between grid points.
pub fn crossing(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    let ll = level.log10();
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if !(y0 >= level && y1 <= level && y0 > 0.0 && y1 > 0.0) {
            return None;
        }
        let (l0, l1) = (y0.log10(), y1.log10());
        if l0 == l1 {
            return Some(x0);
        }
        Some(x0 + (x1 - x0) * (l0 - ll) / (l0 - l1))
    })
}

/// Horizontal distance from `reference` to `curve` at `level`.
pub fn gap_db(reference: &[(f64, f64)], curve: &[(f64, f64)], level: f64) -> Option<f64> {
    Some(crossing(curve, level)? - crossing(reference, level)?)
}

/// −d log₁₀ P / d log₁₀ γ̄ over the last two positive points.
pub fn tail_slope(curve: &[(f64, f64)]) -> Option<f64> {
    let pos: Vec<&(f64, f64)> = curve.iter().filter(|(_, y)| *y > 0.0 && y.is_finite()).collect();
    let [.., a, b] = pos.as_slice() else { return None };
    Some(-(b.1.log10() - a.1.log10()) / ((b.0 - a.0) / 10.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub label: String,
    pub mc_points: usize,
    pub max_rel_dev: Option<f64>,
    pub outside_3se: usize,
    pub slope: Option<f64>,
    pub ado: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEntry {
    pub family: String,
    pub p_e: f64,
    pub level: f64,
    pub gap: Option<f64>,
    /// True when the ideal curve was computed rather than read from the rows.
    pub computed_reference: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub curves: Vec<CurveSummary>,
    pub gaps: Vec<GapEntry>,
}

impl Report {
    pub fn flagged(&self) -> usize {
        self.curves.iter().map(|c| c.outside_3se).sum()
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub levels: Vec<f64>,
    /// Axis of `snr_db`, needed only when the ideal curve must be computed.
    pub snr_axis: SnrAxis,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { levels: vec![1e-5], snr_axis: SnrAxis::Es }
    }
}

fn row_config(r: &SweepRow) -> CliResult<SchemeConfig> {
    let scheme = parse_scheme(&r.scheme).map_err(CliError::config)?;
    let m = parse_rational(&r.m).map_err(CliError::config)?;
    Ok(SchemeConfig::new(scheme, r.n_t, r.n_s, r.n_r, m)?)
}

fn ado_for(r: &SweepRow) -> CliResult<f64> {
    let cfg = row_config(r)?;
    let table = asymptotic_table(&cfg)?;
    Ok(if r.p_e == 0.0 {
        table[0].ado
    } else {
        table.iter().map(|p| p.ado).fold(f64::INFINITY, f64::min)
    })
}

fn ideal_curve(r: &SweepRow, snrs: &[f64], axis: SnrAxis) -> CliResult<Vec<(f64, f64)>> {
    let cfg = row_config(r)?;
    let metric = parse_metric(&r.metric)?;
    let fm = FeedbackModel::paper(&cfg, 0.0)?;
    let scale = match (axis, metric) {
        (SnrAxis::Eb, Metric::ErrorRate(md)) => md.bits_per_symbol() as f64,
        _ => 1.0,
    };
    snrs.iter()
        .map(|&db| {
            let g = cfg.gamma_bar(10f64.powf(db / 10.0) * scale);
            Ok((db, averaged_metric(&cfg, &metric, &fm, g)?))
        })
        .collect()
}

pub fn compare_report(rows: &[SweepRow], opts: &CompareOptions) -> CliResult<Report> {
    if rows.is_empty() {
        return Err(CliError::config("no rows to compare"));
    }
    let mut curves: BTreeMap<(String, u64), Vec<&SweepRow>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let key = (r.label(), r.p_e.to_bits());
        if !curves.contains_key(&key) {
            order.push(key.clone());
        }
        curves.entry(key).or_default().push(r);
    }
    let mut report = Report::default();
    for key in &order {
        let pts = &curves[key];
        let mut max_rel: Option<f64> = None;
        let mut outside = 0;
        let mut mc_points = 0;
        for r in pts {
            let (Some(mc), Some(se)) = (r.mc_mean, r.mc_stderr) else { continue };
            mc_points += 1;
            let diff = (r.analytic - mc).abs();
            let rel = if diff == 0.0 { 0.0 } else { diff / mc };
            max_rel = Some(max_rel.map_or(rel, |m: f64| m.max(rel)));
            if diff > 3.0 * se {
                outside += 1;
            }
        }
        let curve: Vec<(f64, f64)> = pts.iter().map(|r| (r.snr_db, r.analytic)).collect();
        report.curves.push(CurveSummary {
            label: key.0.clone(),
            mc_points,
            max_rel_dev: max_rel,
            outside_3se: outside,
            slope: tail_slope(&curve),
            ado: ado_for(pts[0]).ok(),
        });
    }
    // gaps within each family, against p_e = 0
    let mut families: BTreeMap<_, Vec<&(String, u64)>> = BTreeMap::new();
    let mut fam_order = Vec::new();
    for key in &order {
        let fam = curves[key][0].family();
        if !families.contains_key(&fam) {
            fam_order.push(fam.clone());
        }
        families.entry(fam).or_default().push(key);
    }
    for fam in fam_order {
        let keys = &families[&fam];
        let first = curves[keys[0]][0];
        let as_curve = |k: &(String, u64)| -> Vec<(f64, f64)> { curves[k].iter().map(|r| (r.snr_db, r.analytic)).collect() };
        let (reference, computed) = match keys.iter().find(|k| f64::from_bits(k.1) == 0.0) {
            Some(k) => (as_curve(k), false),
            None => {
                let snrs: Vec<f64> = curves[keys[0]].iter().map(|r| r.snr_db).collect();
                (ideal_curve(first, &snrs, opts.snr_axis)?, true)
            }
        };
        let family = format!(
            "{} n_t={} n_s={} n_r={} m={} {} {}",
            first.scheme, first.n_t, first.n_s, first.n_r, first.m, first.code, first.metric
        );
        for k in keys.iter().filter(|k| f64::from_bits(k.1) != 0.0) {
            for &level in &opts.levels {
                report.gaps.push(GapEntry {
                    family: family.clone(),
                    p_e: f64::from_bits(k.1),
                    level,
                    gap: gap_db(&reference, &as_curve(k), level),
                    computed_reference: computed,
                });
            }
        }
    }
    Ok(report)
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "curves")?;
        for c in &self.curves {
            writeln!(f, "  {}", c.label)?;
            match c.max_rel_dev {
                Some(d) => writeln!(
                    f,
                    "    monte carlo: {} points, max |analytic - mc|/mc = {:.4}, outside 3 se: {}",
                    c.mc_points, d, c.outside_3se
                )?,
                None => writeln!(f, "    monte carlo: none")?,
            }
            let slope = c.slope.map_or("n/a".into(), |s| format!("{s:.3}"));
            let ado = c.ado.map_or("n/a".into(), |s| format!("{s}"));
            writeln!(f, "    high-snr slope {slope} (diversity order {ado})")?;
        }
        if !self.gaps.is_empty() {
            writeln!(f, "gaps to ideal feedback (dB)")?;
            for g in &self.gaps {
                let gap = g.gap.map_or("not reached".into(), |x| format!("{x:.3}"));
                let src = if g.computed_reference { " (ideal computed)" } else { "" };
                writeln!(f, "  {} p_e={} at {:e}: {gap}{src}", g.family, g.p_e, g.level)?;
            }
        }
        writeln!(f, "points outside 3 se: {}", self.flagged())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p_e: f64, snr_db: f64, analytic: f64, mc: Option<(f64, f64)>) -> SweepRow {
        SweepRow {
            scheme: "tas".into(),
            n_t: 3,
            n_s: 2,
            n_r: 3,
            m: "1".into(),
            code: "g2".into(),
            metric: "qpsk".into(),
            p_e,
            snr_db,
            analytic,
            mc_mean: mc.map(|m| m.0),
            mc_stderr: mc.map(|m| m.1),
            asymptotic: None,
        }
    }

    #[test]
    fn crossing_is_log_linear() {
        let c = [(0.0, 1e-2), (10.0, 1e-6)];
        assert!((crossing(&c, 1e-4).unwrap() - 5.0).abs() < 1e-12);
        assert!((crossing(&c, 1e-3).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(crossing(&c, 1e-7), None);
        assert_eq!(crossing(&c, 1e-1), None);
    }

    #[test]
    fn perfect_agreement_flags_nothing() {
        let rows: Vec<SweepRow> = (0..5)
            .map(|i| {
                let p = 10f64.powi(-i - 1);
                row(0.0, 5.0 * i as f64, p, Some((p, p * 0.01)))
            })
            .collect();
        let rep = compare_report(&rows, &CompareOptions::default()).unwrap();
        assert_eq!(rep.curves.len(), 1);
        assert_eq!(rep.curves[0].max_rel_dev, Some(0.0));
        assert_eq!(rep.flagged(), 0);
        assert!((rep.curves[0].slope.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rep.curves[0].ado, Some(9.0));
        assert!(rep.to_string().contains("points outside 3 se: 0"));
    }

    #[test]
    fn deviations_are_counted() {
        let rows = vec![row(0.0, 0.0, 0.1, Some((0.11, 0.001))), row(0.0, 2.0, 0.05, Some((0.0501, 0.001)))];
        let rep = compare_report(&rows, &CompareOptions::default()).unwrap();
        assert_eq!(rep.flagged(), 1);
        assert!((rep.curves[0].max_rel_dev.unwrap() - 0.01 / 0.11).abs() < 1e-12);
    }

    #[test]
    fn gaps_use_the_ideal_rows() {
        let mut rows = Vec::new();
        for i in 0..=6 {
            let db = 5.0 * i as f64;
            rows.push(row(0.0, db, 10f64.powf(-db / 5.0), None));
        }
        for i in 0..=6 {
            let db = 5.0 * i as f64;
            rows.push(row(0.2, db, 10f64.powf(-(db - 1.5) / 5.0), None));
        }
        let rep = compare_report(&rows, &CompareOptions::default()).unwrap();
        assert_eq!(rep.gaps.len(), 1);
        assert!((rep.gaps[0].gap.unwrap() - 1.5).abs() < 1e-9);
        assert!(!rep.gaps[0].computed_reference);
    }
}
