use super::gamma::reg_lower_gamma;
use super::quadrature::{cached_rule, exp_sinh};
use crate::{Error, Result};

/// Rule order used for Lauricella/Appell quadrature.
pub const LAURICELLA_ORDER: usize = 128;
/// Order of the verification rule.
pub const LAURICELLA_CHECK_ORDER: usize = 256;

const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 2_000_000;
const QUAD_TOL: f64 = 1e-8;
const ADAPTIVE_TOL: f64 = 1e-13;

fn is_nonpositive_int(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}

/// Power series of ₁F₁ for `x >= 0`, returned as `(sum, log_scale)` with
/// ₁F₁ = sum · e^{log_scale}.
fn series_1f1(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut log_scale = 0.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * x / ((b + kf) * (kf + 1.0));
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok((sum, log_scale));
        }
        let r_abs = ratio.abs();
        if r_abs < 1.0 && (term / sum).abs() * r_abs / (1.0 - r_abs) < EPS {
            return Ok((sum, log_scale));
        }
        if sum.abs() > 1e280 {
            term /= sum.abs();
            log_scale += sum.abs().ln();
            sum = sum.signum();
        }
    }
    Err(Error::eval(
        "kummer_1f1",
        format!("series for 1F1({a}; {b}; {x}) did not converge in {MAX_TERMS} terms"),
    ))
}

fn check_kummer_args(a: f64, b: f64, x: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() || x.is_nan() {
        return Err(Error::domain("kummer_1f1", format!("non-finite argument ({a}, {b}, {x})")));
    }
    if is_nonpositive_int(b) {
        return Err(Error::domain("kummer_1f1", format!("b = {b} is a non-positive integer")));
    }
    Ok(())
}

/// Confluent hypergeometric function ₁F₁(a; b; x).
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    check_kummer_args(a, b, x)?;
    if x == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if a == b {
        return Ok(x.exp());
    }
    if x < 0.0 {
        // Kummer transformation
        let (s, ls) = series_1f1(b - a, b, -x)?;
        return Ok(s * (ls + x).exp());
    }
    Ok(kummer_1f1_scaled(a, b, x)? * x.exp())
}

/// `e^{-x} ₁F₁(a; b; x)`, bounded for large positive `x` when `a <= b`.
pub fn kummer_1f1_scaled(a: f64, b: f64, x: f64) -> Result<f64> {
    check_kummer_args(a, b, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if a == b {
        return Ok(1.0);
    }
    if x < 0.0 {
        return kummer_1f1(b - a, b, -x);
    }
    if a == 1.0 && b > 1.0 && x >= b {
        // ₁F₁(1; b; x) = Γ(b) x^{1-b} e^x P(b-1, x)
        let p = reg_lower_gamma(b - 1.0, x)?;
        return Ok((libm::lgamma(b) + (1.0 - b) * x.ln()).exp() * p);
    }
    let (s, ls) = series_1f1(a, b, x)?;
    Ok(s * (ls - x).exp())
}

fn series_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let r_abs = ratio.abs();
        if r_abs < 1.0 && (term / sum).abs() / (1.0 - r_abs) < EPS {
            return Ok(sum);
        }
    }
    Err(Error::eval(
        "gauss_2f1",
        format!("series for 2F1({a}, {b}; {c}; {x}) did not converge in {MAX_TERMS} terms"),
    ))
}

/// Gauss hypergeometric function ₂F₁(a, b; c; x) for |x| < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::domain("gauss_2f1", format!("|x| = {} must be < 1", x.abs())));
    }
    if !a.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(Error::domain("gauss_2f1", format!("non-finite parameter ({a}, {b}, {c})")));
    }
    if is_nonpositive_int(c) {
        return Err(Error::domain("gauss_2f1", format!("c = {c} is a non-positive integer")));
    }
    if x == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_int(a) || is_nonpositive_int(b) {
        return series_2f1(a, b, c, x);
    }
    if is_nonpositive_int(c - a) || is_nonpositive_int(c - b) {
        // Euler transformation to a terminating series
        return Ok((1.0 - x).powf(c - a - b) * series_2f1(c - a, c - b, c, x)?);
    }
    if x < 0.0 {
        // Pfaff transformation onto (0, 1/2)
        let z = x / (x - 1.0);
        return Ok((1.0 - x).powf(-a) * series_2f1(a, c - b, c, z)?);
    }
    series_2f1(a, b, c, x)
}

/// Appell function F₂(a; b1, b2; c1, c2; x, y) for |x| + |y| < 1, summed
/// over the index of the larger argument with the inner sum in closed ₂F₁
/// form.
pub fn appell_f2(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, x: f64, y: f64) -> Result<f64> {
    if !(x.abs() + y.abs() < 1.0) {
        return Err(Error::domain(
            "appell_f2",
            format!("|x| + |y| = {} must be < 1", x.abs() + y.abs()),
        ));
    }
    if is_nonpositive_int(c1) || is_nonpositive_int(c2) {
        return Err(Error::domain("appell_f2", format!("c = ({c1}, {c2}) has a non-positive integer")));
    }
    if y.abs() > x.abs() {
        return appell_f2_outer(a, b2, b1, c2, c1, y, x);
    }
    appell_f2_outer(a, b1, b2, c1, c2, x, y)
}

fn appell_f2_outer(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, x: f64, y: f64) -> Result<f64> {
    let mut coeff = 1.0f64;
    let mut sum = gauss_2f1(a, b2, c2, y)?;
    let mut small_run = 0;
    for m in 0..MAX_TERMS {
        let mf = m as f64;
        coeff *= (a + mf) * (b1 + mf) / ((c1 + mf) * (mf + 1.0)) * x;
        if coeff == 0.0 {
            return Ok(sum);
        }
        let term = coeff * gauss_2f1(a + mf + 1.0, b2, c2, y)?;
        sum += term;
        let rel = (term / sum).abs();
        if rel < EPS {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::eval(
        "appell_f2",
        format!("series did not converge for x = {x}, y = {y}"),
    ))
}

fn check_lauricella(a: f64, b: &[f64], c: &[f64], x: &[f64]) -> Result<()> {
    if b.len() != x.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: b.len() });
    }
    if c.len() != x.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: c.len() });
    }
    let total: f64 = x.iter().map(|v| v.abs()).sum();
    if !(total < 1.0) {
        return Err(Error::domain(
            "lauricella_fa",
            format!("sum |x_i| = {total} must be < 1"),
        ));
    }
    if !(a > 0.0) {
        return Err(Error::domain("lauricella_fa", format!("a = {a} must be positive")));
    }
    if let Some(ci) = c.iter().find(|&&ci| is_nonpositive_int(ci)) {
        return Err(Error::domain("lauricella_fa", format!("c = {ci} is a non-positive integer")));
    }
    Ok(())
}

/// Lauricella F_A by a single Gauss-Laguerre rule of the given order.
///
/// Uses F_A = λ^{-a}/Γ(a) ∫ σ^{a-1} e^{-σ} Π g_i(x_i σ/λ) dσ with
/// λ = 1 - Σ_{x_i>0} x_i, g_i = e^{-z}₁F₁ for positive arguments and plain
/// ₁F₁ otherwise.
pub fn lauricella_fa_with_order(
    a: f64,
    b: &[f64],
    c: &[f64],
    x: &[f64],
    order: usize,
) -> Result<f64> {
    check_lauricella(a, b, c, x)?;
    if x.iter().all(|&v| v == 0.0) {
        return Ok(1.0);
    }
    let lambda = 1.0 - x.iter().filter(|&&v| v > 0.0).sum::<f64>();
    let rule = cached_rule(order, a - 1.0)?;
    let mut total = 0.0f64;
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        if w == 0.0 {
            continue;
        }
        let mut f = 1.0f64;
        for i in 0..x.len() {
            if x[i] == 0.0 {
                continue;
            }
            let z = x[i] * s / lambda;
            f *= if z > 0.0 {
                kummer_1f1_scaled(b[i], c[i], z)?
            } else {
                kummer_1f1(b[i], c[i], z)?
            };
        }
        total += w * f;
    }
    Ok(total * (-a * lambda.ln() - libm::lgamma(a)).exp())
}

/// Same integral as [`lauricella_fa_with_order`] by adaptive exp-sinh
/// quadrature. Slower, but resolves the boundary layer near σ = 0 that
/// appears when Σ x_i approaches 1.
pub fn lauricella_fa_adaptive(a: f64, b: &[f64], c: &[f64], x: &[f64], tol: f64) -> Result<f64> {
    check_lauricella(a, b, c, x)?;
    if x.iter().all(|&v| v == 0.0) {
        return Ok(1.0);
    }
    let lambda = 1.0 - x.iter().filter(|&&v| v > 0.0).sum::<f64>();
    let mut failure = None;
    let integral = exp_sinh(
        |s| {
            let mut f = ((a - 1.0) * s.ln() - s).exp();
            if f == 0.0 {
                return 0.0;
            }
            for i in 0..x.len() {
                if x[i] == 0.0 {
                    continue;
                }
                let z = x[i] * s / lambda;
                let g = if z > 0.0 { kummer_1f1_scaled(b[i], c[i], z) } else { kummer_1f1(b[i], c[i], z) };
                match g {
                    Ok(g) => f *= g,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return f64::NAN;
                    }
                }
            }
            f
        },
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(integral? * (-a * lambda.ln() - libm::lgamma(a)).exp())
}

/// Lauricella function F_A of n variables for Σ|x_i| < 1.
///
/// Evaluated with Gauss-Laguerre rules at two orders. When they disagree
/// beyond 1e-8 relative the adaptive rule takes over; failure there is an
/// evaluation error.
pub fn lauricella_fa(a: f64, b: &[f64], c: &[f64], x: &[f64]) -> Result<f64> {
    let v = lauricella_fa_with_order(a, b, c, x, LAURICELLA_ORDER)?;
    let check = lauricella_fa_with_order(a, b, c, x, LAURICELLA_CHECK_ORDER)?;
    let rel = (v - check).abs() / check.abs().max(f64::MIN_POSITIVE);
    if rel <= QUAD_TOL {
        return Ok(check);
    }
    lauricella_fa_adaptive(a, b, c, x, ADAPTIVE_TOL).map_err(|e| {
        Error::eval(
            "lauricella_fa",
            format!(
                "orders {LAURICELLA_ORDER} and {LAURICELLA_CHECK_ORDER} disagree by {rel:.3e} \
                 and the adaptive rule failed: {e} (a = {a}, b = {b:?}, c = {c:?}, x = {x:?})"
            ),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kummer_examples() {
        assert!(rel(kummer_1f1(1.0, 2.0, 1.0).unwrap(), std::f64::consts::E - 1.0) < 1e-14);
        assert_eq!(kummer_1f1(2.5, 3.5, 0.0).unwrap(), 1.0);
        assert!(rel(kummer_1f1(3.0, 3.0, 2.0).unwrap(), 2f64.exp()) < 1e-15);
        assert!(rel(kummer_1f1(1.0, 2.0, -1.0).unwrap(), 1.0 - (-1f64).exp()) < 1e-14);
        assert!(kummer_1f1(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn kummer_half_integer_matches_erf() {
        for &x in &[0.01f64, 0.5, 2.0, 10.0, 40.0, 300.0] {
            let expected_scaled =
                std::f64::consts::PI.sqrt() * libm::erf(x.sqrt()) / (2.0 * x.sqrt());
            let got = kummer_1f1_scaled(1.0, 1.5, x).unwrap();
            assert!(rel(got, expected_scaled) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn scaled_routes_agree() {
        for &b in &[2.0, 5.0, 12.0, 30.5] {
            for &x in &[0.5, 3.0, 20.0, 60.0, 250.0] {
                let via_gamma = kummer_1f1_scaled(1.0, b, x).unwrap();
                let (s, ls) = series_1f1(1.0, b, x).unwrap();
                let via_series = s * (ls - x).exp();
                assert!(rel(via_gamma, via_series) < 1e-11, "b={b} x={x}");
            }
        }
    }

    #[test]
    fn gauss_examples() {
        assert!(rel(gauss_2f1(2.0, 5.0, 5.0, 0.5).unwrap(), 4.0) < 1e-14);
        assert!(rel(gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap(), 2.0 * 2f64.ln()) < 1e-14);
        assert_eq!(gauss_2f1(0.3, 0.7, 1.1, 0.0).unwrap(), 1.0);
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, -1.5).is_err());
    }

    #[test]
    fn gauss_negative_and_terminating() {
        // ₂F₁(1,1;2;-x) = ln(1+x)/x
        for &x in &[0.1, 0.5, 0.9, 0.999] {
            let v = gauss_2f1(1.0, 1.0, 2.0, -x).unwrap();
            assert!(rel(v, (1.0 + x).ln() / x) < 1e-13, "x={x}");
        }
        // ₂F₁(-2, b; c; x) = 1 - 2bx/c + b(b+1)x²/(c(c+1))
        let (b, c, x) = (1.5, 2.5, 0.7);
        let expected = 1.0 - 2.0 * b * x / c + b * (b + 1.0) * x * x / (c * (c + 1.0));
        assert!(rel(gauss_2f1(-2.0, b, c, x).unwrap(), expected) < 1e-14);
        // c - a = 0 after Euler: ₂F₁(a, b; a; x) = (1-x)^{-b}
        assert!(rel(gauss_2f1(1.5, 2.5, 1.5, 0.95).unwrap(), 0.05f64.powf(-2.5)) < 1e-12);
    }

    #[test]
    fn gauss_near_unit_argument() {
        // ₂F₁(1/2, 1; 3/2; x) = atanh(√x)/√x
        let x = 0.995;
        let v = gauss_2f1(0.5, 1.0, 1.5, x).unwrap();
        let expected = x.sqrt().atanh() / x.sqrt();
        assert!(rel(v, expected) < 1e-12);
    }

    // Σ_{m,n} (a)_{m+n} (b1)_m (b2)_n / ((c1)_m (c2)_n m! n!) x^m y^n
    fn brute_double(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        let mut row = 1.0f64;
        for m in 0..2000 {
            let mf = m as f64;
            let mut t = row;
            let mut row_sum = 0.0f64;
            for n in 0..2000 {
                let nf = n as f64;
                row_sum += t;
                if t.abs() < 1e-20 * row_sum.abs() {
                    break;
                }
                t *= (a + mf + nf) * (b2 + nf) / ((c2 + nf) * (nf + 1.0)) * y;
            }
            sum += row_sum;
            if row_sum.abs() < 1e-20 * sum.abs() {
                break;
            }
            row *= (a + mf) * (b1 + mf) / ((c1 + mf) * (mf + 1.0)) * x;
        }
        sum
    }

    #[test]
    fn appell_examples() {
        let oracle = brute_double(2.0, 1.0, 1.0, 1.5, 3.0, 0.3, 0.4);
        let v = appell_f2(2.0, 1.0, 1.0, 1.5, 3.0, 0.3, 0.4).unwrap();
        assert!(rel(v, oracle) < 1e-11, "{v} vs {oracle}");
        assert_eq!(appell_f2(2.0, 1.0, 1.0, 1.5, 3.0, 0.0, 0.0).unwrap(), 1.0);
        let reduced = appell_f2(1.7, 0.8, 2.0, 2.2, 3.0, 0.6, 0.0).unwrap();
        assert!(rel(reduced, gauss_2f1(1.7, 0.8, 2.2, 0.6).unwrap()) < 1e-13);
        assert!(appell_f2(1.0, 1.0, 1.0, 2.0, 2.0, 0.6, 0.5).is_err());
    }

    #[test]
    fn lauricella_three_variables_vs_triple_series() {
        let (a, b, c, x): (f64, [f64; 3], [f64; 3], [f64; 3]) =
            (4.0, [1.0, 1.0, 1.0], [2.0, 3.0, 2.0], [0.2, 0.1, 0.3]);
        let mut oracle = 0.0;
        let mut ti = 1.0;
        for i in 0..400 {
            let fi = i as f64;
            let mut tj = ti;
            for j in 0..400 {
                let fj = j as f64;
                let mut tk = tj;
                for k in 0..400 {
                    let fk = k as f64;
                    oracle += tk;
                    if tk < 1e-24 {
                        break;
                    }
                    tk *= (a + fi + fj + fk) * (b[2] + fk) / ((c[2] + fk) * (fk + 1.0)) * x[2];
                }
                if tj < 1e-24 {
                    break;
                }
                tj *= (a + fi + fj) * (b[1] + fj) / ((c[1] + fj) * (fj + 1.0)) * x[1];
            }
            if ti < 1e-24 {
                break;
            }
            ti *= (a + fi) * (b[0] + fi) / ((c[0] + fi) * (fi + 1.0)) * x[0];
        }
        let v = lauricella_fa(a, &b, &c, &x).unwrap();
        assert!(rel(v, oracle) < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn lauricella_trivial_and_domain() {
        assert_eq!(lauricella_fa(2.0, &[1.0, 1.0], &[2.0, 2.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(lauricella_fa(2.0, &[1.0, 1.0], &[2.0, 2.0], &[0.6, -0.4]).is_err());
        assert!(matches!(
            lauricella_fa(2.0, &[1.0], &[2.0, 2.0], &[0.1, 0.1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn reduction_chain_on_random_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = rng.random_range(0.5..6.0);
            let b1 = rng.random_range(0.3..3.0);
            let b2 = rng.random_range(0.3..3.0);
            let c1 = rng.random_range(0.5..5.0);
            let c2 = rng.random_range(0.5..5.0);
            let x = rng.random_range(-0.45..0.45);
            let y = rng.random_range(-0.45..0.45);

            let f1 = lauricella_fa(a, &[b1], &[c1], &[x]).unwrap();
            let g = gauss_2f1(a, b1, c1, x).unwrap();
            assert!(rel(f1, g) < 1e-8, "n=1 ({a},{b1},{c1},{x}): {f1} vs {g}");

            let f2 = lauricella_fa(a, &[b1, b2], &[c1, c2], &[x, y]).unwrap();
            let ap = appell_f2(a, b1, b2, c1, c2, x, y).unwrap();
            assert!(rel(f2, ap) < 1e-8, "n=2 ({a},{b1},{b2},{c1},{c2},{x},{y}): {f2} vs {ap}");
        }
    }

    #[test]
    fn near_boundary_uses_the_adaptive_rule() {
        // F_A(a; 1, 1; 2, 2; x, y) against the double series, Σx = 0.98
        let (a, x) = (2.5, 0.49);
        let series = {
            let mut sum = 0.0;
            let mut ti = 1.0f64;
            for i in 0..6000 {
                let fi = i as f64;
                let mut tj = ti;
                let mut row = 0.0;
                for j in 0..6000 {
                    let fj = j as f64;
                    row += tj;
                    if tj < 1e-22 * row {
                        break;
                    }
                    tj *= (a + fi + fj) * (1.0 + fj) / ((2.0 + fj) * (fj + 1.0)) * x;
                }
                sum += row;
                if row < 1e-22 * sum {
                    break;
                }
                ti *= (a + fi) * (1.0 + fi) / ((2.0 + fi) * (fi + 1.0)) * x;
            }
            sum
        };
        let v = lauricella_fa(a, &[1.0, 1.0], &[2.0, 2.0], &[x, x]).unwrap();
        assert!(rel(v, series) < 1e-11, "{v} vs {series}");
        let ap = appell_f2(a, 1.0, 1.0, 2.0, 2.0, x, x).unwrap();
        assert!(rel(ap, series) < 1e-11, "{ap} vs {series}");
    }

    #[test]
    fn appell_with_one_large_argument() {
        let oracle = brute_double(3.0, 1.0, 1.0, 1.5, 4.0, 0.01, 0.95);
        let v = appell_f2(3.0, 1.0, 1.0, 1.5, 4.0, 0.01, 0.95).unwrap();
        assert!(rel(v, oracle) < 1e-11, "{v} vs {oracle}");
        let w = lauricella_fa(3.0, &[1.0, 1.0], &[1.5, 4.0], &[0.01, 0.95]).unwrap();
        assert!(rel(w, oracle) < 1e-10, "{w} vs {oracle}");
    }

    #[test]
    fn quadrature_orders_self_consistent() {
        let cases: [(f64, Vec<f64>, Vec<f64>, Vec<f64>); 3] = [
            (3.5, vec![1.0, 1.0], vec![3.0, 4.0], vec![0.3, 0.25]),
            (7.0, vec![1.0, 1.0, 1.0], vec![2.0, 4.0, 1.5], vec![0.4, 0.2, 0.1]),
            (2.5, vec![1.0], vec![2.0], vec![0.9]),
        ];
        for (a, b, c, x) in cases {
            let lo = lauricella_fa_with_order(a, &b, &c, &x, 128).unwrap();
            let hi = lauricella_fa_with_order(a, &b, &c, &x, 256).unwrap();
            assert!(rel(lo, hi) < 1e-8, "{lo} vs {hi}");
        }
    }
}
