/// Standard normal tail probability `Q(x) = P(Z > x)`.
pub fn gaussian_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_and_limits() {
        assert_eq!(gaussian_q(0.0), 0.5);
        assert_eq!(gaussian_q(f64::INFINITY), 0.0);
        assert_eq!(gaussian_q(f64::NEG_INFINITY), 1.0);
        for &x in &[0.1, 0.7, 1.0, 2.5, 4.0, 7.5] {
            assert!((gaussian_q(-x) - (1.0 - gaussian_q(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_values() {
        // Q(1), Q(3), Q(5) to 20 digits
        assert!((gaussian_q(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((gaussian_q(3.0) - 1.349_898_031_630_094_5e-3).abs() < 1e-17);
        assert!((gaussian_q(5.0) / 2.866_515_718_791_939e-7 - 1.0).abs() < 1e-13);
    }
}
