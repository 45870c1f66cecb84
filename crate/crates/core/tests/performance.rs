use num::rational::Rational64;
use proptest::prelude::*;
use selstbc::feedback::{build_codebook, CodewordMapping, FeedbackModel, MixingMode};
use selstbc::performance::*;
use selstbc::snr_model::{output_model, Scheme, SchemeConfig, Tasc};

const MODULATIONS: [&str; 9] = [
    "bpsk", "cbfsk", "ncbfsk", "dbpsk", "qpsk", "mpsk:8", "mpam:4", "mqam:16", "mqam:64",
];

fn joint(n_t: u32, n_s: u32, n_r: u32, m: i64) -> SchemeConfig {
    SchemeConfig::new(Scheme::JointTrasStbc, n_t, n_s, n_r, Rational64::from_integer(m)).unwrap()
}

fn tas(n_t: u32, n_s: u32, n_r: u32, m: Rational64) -> SchemeConfig {
    SchemeConfig::new(Scheme::TasStbc, n_t, n_s, n_r, m).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// ∫₀^∞ f by double-exponential quadrature after x = u/(1-u).
fn semi_infinite(f: impl Fn(f64) -> f64) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let x = u / (1.0 - u);
        let v = f(x) / ((1.0 - u) * (1.0 - u));
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    quadrature::double_exponential::integrate(g, 0.0, 1.0, 1e-15).integral
}

/// e^{-z} ₁F₁(1; 3/2; z) through the error function.
fn scaled_kummer_half(z: f64) -> f64 {
    if z < 1e-12 {
        return (-z).exp() * (1.0 + 2.0 * z / 3.0);
    }
    std::f64::consts::PI.sqrt() * libm::erf(z.sqrt()) / (2.0 * z.sqrt())
}

fn identity_by_quadrature(cfg: &SchemeConfig, tasc: &Tasc, id: Identity, gamma_bar: f64) -> f64 {
    let model = output_model(cfg, tasc).unwrap();
    match id {
        Identity::J { theta, eps, phi } => {
            theta * semi_infinite(|x| x.powf(eps) * (-phi * x).exp() * model.cdf_at(x, gamma_bar))
        }
        Identity::JHat { theta, phi } => {
            // e^{-φx} ₁F₁(1; 3/2; φx/2) = e^{-φx/2} · [e^{-φx/2} ₁F₁(·; φx/2)]
            theta
                * semi_infinite(|x| {
                    (-0.5 * phi * x).exp() * scaled_kummer_half(0.5 * phi * x) * model.cdf_at(x, gamma_bar)
                })
        }
    }
}

#[test]
fn identities_match_quadrature_of_the_cdf() {
    let configs = [joint(3, 2, 2, 1), tas(4, 3, 2, Rational64::new(1, 2))];
    for cfg in &configs {
        for tasc in [Tasc::best(cfg), cfg.tascs().pop().unwrap()] {
            let model = output_model(cfg, &tasc).unwrap();
            for name in MODULATIONS {
                let spec: ModulationSpec = name.parse().unwrap();
                for g in [0.4, 2.0, 8.0] {
                    for id in spec.identities() {
                        let (b, a) = match id {
                            Identity::J { theta, eps, phi } => (
                                j_expansion(&model, theta, eps, phi, g).unwrap(),
                                j_closed_form(&model, theta, eps, phi, g).unwrap(),
                            ),
                            Identity::JHat { theta, phi } => (
                                j_hat_expansion(&model, theta, phi, g).unwrap(),
                                j_hat_closed_form(&model, theta, phi, g).unwrap(),
                            ),
                        };
                        let q = identity_by_quadrature(cfg, &tasc, id, g);
                        assert!(rel(a, b) < 1e-8, "{name} {tasc} g={g}: {a} vs {b}");
                        assert!(rel(b, q) < 1e-6, "{name} {tasc} g={g}: {b} vs quadrature {q}");
                    }
                }
            }
        }
    }
}

#[test]
fn cep_integrated_against_the_density_matches_the_identity() {
    let cfg = joint(3, 1, 2, 1);
    let tasc = Tasc::best(&cfg);
    let model = output_model(&cfg, &tasc).unwrap();
    for name in MODULATIONS {
        let spec: ModulationSpec = name.parse().unwrap();
        for g in [0.5, 3.0, 12.0] {
            let direct = semi_infinite(|x| spec.cep(x) * model.pdf_at(x, g));
            let via_identity = error_rate(&cfg, &tasc, &spec, g).unwrap();
            assert!(rel(via_identity, direct) < 1e-6, "{name} g={g}: {via_identity} vs {direct}");
        }
    }
}

#[test]
fn deep_tail_error_rates_keep_their_digits() {
    let cfg = tas(4, 3, 2, Rational64::from_integer(2));
    let tasc = Tasc::best(&cfg);
    let model = output_model(&cfg, &tasc).unwrap();
    for name in ["cbfsk", "qpsk", "mqam:16"] {
        let spec: ModulationSpec = name.parse().unwrap();
        let mut prev = f64::INFINITY;
        for db in [15.0, 20.0, 22.5, 25.0, 30.0] {
            let g = 10f64.powf(db / 10.0);
            let v = error_rate(&cfg, &tasc, &spec, g).unwrap();
            assert!(v > 0.0 && v < prev, "{name} {db} dB: {v} after {prev}");
            // the quadrature tolerance is absolute, so integrate relative to v
            let ratio = semi_infinite(|x| spec.cep(x) * model.pdf_at(x, g) / v);
            assert!((ratio - 1.0).abs() < 1e-6, "{name} {db} dB: {v} off by {ratio}");
            prev = v;
        }
    }
}

#[test]
fn two_branch_combining_bpsk() {
    // no selection, two Rayleigh branches combined: density x e^{-x}
    let cfg = tas(2, 2, 1, Rational64::from_integer(1));
    let bpsk: ModulationSpec = "bpsk".parse().unwrap();
    for g in [0.3, 1.0, 5.0, 20.0] {
        let want = semi_infinite(|x| {
            let y = x / g;
            selstbc::specfun::gaussian_q((2.0 * x).sqrt()) * y * (-y).exp() / g
        });
        let got = error_rate(&cfg, &Tasc::best(&cfg), &bpsk, g).unwrap();
        assert!(rel(got, want) < 1e-8, "g={g}: {got} vs {want}");
        // textbook closed form with μ = √(γ̄/(1+γ̄))
        let mu = (g / (1.0 + g)).sqrt();
        let closed = ((1.0 - mu) / 2.0).powi(2) * (2.0 + mu);
        assert!(rel(got, closed) < 1e-12);
    }
}

#[test]
fn mgf_matches_quadrature() {
    let cases = [
        (joint(4, 2, 2, 1), vec![2, 4]),
        (tas(3, 2, 2, Rational64::new(3, 2)), vec![1, 3]),
        (joint(3, 1, 3, 2), vec![2]),
    ];
    for (cfg, ranks) in cases {
        let tasc = Tasc::new(ranks, &cfg).unwrap();
        let model = output_model(&cfg, &tasc).unwrap();
        for (s, g) in [(0.1, 1.0), (1.0, 4.0), (3.0, 0.7)] {
            let want = semi_infinite(|x| (-s * x).exp() * model.pdf_at(x, g));
            let got = mgf(&cfg, &tasc, s, g).unwrap();
            assert!(rel(got, want) < 1e-8, "{tasc} s={s}: {got} vs {want}");
            assert!(got > 0.0 && got < 1.0);
        }
        let tiny = mgf(&cfg, &tasc, 1e-10, 1.0).unwrap();
        assert!((tiny - 1.0).abs() < 1e-8);
    }
}

#[test]
fn j_hat_single_exponential_and_saturated_cdf() {
    let cfg = tas(1, 1, 1, Rational64::from_integer(1));
    let t = Tasc::best(&cfg);
    let q = semi_infinite(|x| (-0.5 * x).exp() * scaled_kummer_half(0.5 * x) * (1.0 - (-x).exp()));
    let v = unified_j_hat(&cfg, &t, 1.0, 1.0, 1.0).unwrap();
    assert!(rel(v, q) < 1e-10, "{v} vs {q}");
    assert_eq!(unified_j_hat(&cfg, &t, 0.0, 1.0, 1.0).unwrap(), 0.0);
    // F → 1 as the rate grows: ∫ e^{-φx} ₁F₁(1; 3/2; φx/2) = ₂F₁(1, 1; 3/2; 1/2)/φ = π/(2φ)
    let phi = 0.7;
    let v = unified_j_hat(&cfg, &t, 1.0, phi, 1e-6).unwrap();
    assert!(rel(v, std::f64::consts::PI / (2.0 * phi)) < 1e-5);
}

#[test]
fn asymptote_tracks_the_exact_curve() {
    let cfg = joint(2, 1, 1, 1);
    let t = Tasc::best(&cfg);
    let p = asymptotic_params(&cfg, &t).unwrap();
    let bpsk: ModulationSpec = "bpsk".parse().unwrap();
    let mut prev_gap = f64::INFINITY;
    for db in [10.0, 20.0, 30.0, 40.0, 50.0] {
        let g = 10f64.powf(db / 10.0);
        let exact = error_rate(&cfg, &t, &bpsk, g).unwrap();
        let approx = asymptotic_error_rate(&p, &bpsk, g).unwrap();
        let gap = (exact / approx - 1.0).abs();
        assert!(gap < prev_gap, "ratio does not approach 1 at {db} dB");
        prev_gap = gap;
        if exact <= 1e-8 {
            assert!((0.9..=1.1).contains(&(exact / approx)), "{db} dB: {exact} vs {approx}");
        }
    }
    assert!(prev_gap < 1e-3);
}

#[test]
fn outage_is_the_cdf_at_the_threshold() {
    let cfg = joint(4, 3, 2, 2);
    for t in cfg.tascs().iter().step_by(2) {
        for g in [1.0, 10.0, 100.0] {
            let want = selstbc::snr_model::output_cdf(&cfg, t, 3.0, g).unwrap();
            assert_eq!(outage(&cfg, t, 2.0, g).unwrap(), want);
        }
    }
}

fn small_config() -> impl Strategy<Value = SchemeConfig> {
    (any::<bool>(), 2u32..=4, 1u32..=3, 1u32..=2, 1i64..=2).prop_filter_map("valid", |(j, n_t, n_s, n_r, m)| {
        if n_s > n_t {
            return None;
        }
        let scheme = if j { Scheme::JointTrasStbc } else { Scheme::TasStbc };
        SchemeConfig::new(scheme, n_t, n_s, n_r, Rational64::from_integer(m)).ok()
    })
}

fn modulation() -> impl Strategy<Value = ModulationSpec> {
    prop::sample::select(MODULATIONS.to_vec()).prop_map(|s| s.parse().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metrics_decrease_with_snr(cfg in small_config(), spec in modulation(), db in -5.0f64..25.0) {
        let g = 10f64.powf(db / 10.0);
        let t = Tasc::best(&cfg);
        let a = error_rate(&cfg, &t, &spec, g).unwrap();
        let b = error_rate(&cfg, &t, &spec, g * 1.5).unwrap();
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(b < a, "{a} then {b}");
        let o1 = outage(&cfg, &t, 1.0, g).unwrap();
        let o2 = outage(&cfg, &t, 1.0, g * 1.5).unwrap();
        prop_assert!(o2 < o1);
    }

    #[test]
    fn best_subset_has_the_lowest_error(cfg in small_config(), spec in modulation(), db in 0.0f64..20.0) {
        let g = 10f64.powf(db / 10.0);
        let v = per_tasc_metric(&cfg, &Metric::ErrorRate(spec), g).unwrap();
        for w in &v[1..] {
            prop_assert!(v[0] <= *w * (1.0 + 1e-12));
        }
    }

    #[test]
    fn averaging_degrades_with_feedback_errors(
        cfg in small_config(),
        spec in modulation(),
        db in 0.0f64..20.0,
        p1 in 0.0f64..0.5,
        p2 in 0.0f64..0.5,
        bit_exact in any::<bool>(),
    ) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let g = 10f64.powf(db / 10.0);
        let metric = Metric::ErrorRate(spec);
        let mode = if bit_exact { MixingMode::BitExact } else { MixingMode::Paper };
        let cb = build_codebook(&cfg, &CodewordMapping::NaturalBinary).unwrap();
        let a = averaged_metric(&cfg, &metric, &FeedbackModel::new(lo, cb.clone(), mode).unwrap(), g).unwrap();
        let b = averaged_metric(&cfg, &metric, &FeedbackModel::new(hi, cb, mode).unwrap(), g).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-12), "p_e {lo} -> {a}, {hi} -> {b}");
    }

    #[test]
    fn tas_average_is_bounded_by_no_selection(
        n_t in 2u32..=5,
        n_s in 1u32..=3,
        n_r in 1u32..=3,
        spec in modulation(),
        db in 0.0f64..25.0,
        p in 0.001f64..=0.5,
    ) {
        prop_assume!(n_s < n_t);
        let cfg = tas(n_t, n_s, n_r, Rational64::from_integer(1));
        let g = 10f64.powf(db / 10.0);
        let metric = Metric::ErrorRate(spec);
        let ideal = metric_value(&cfg, &Tasc::best(&cfg), &metric, g).unwrap();
        let plain = cfg.without_selection();
        let stbc = metric_value(&plain, &Tasc::best(&plain), &metric, g).unwrap();
        let avg = averaged_metric(&cfg, &metric, &FeedbackModel::paper(&cfg, p).unwrap(), g).unwrap();
        prop_assert!(ideal <= avg * (1.0 + 1e-12));
        prop_assert!(avg <= stbc * (1.0 + 1e-12), "{avg} above {stbc}");
    }
}
