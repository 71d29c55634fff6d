//! Standard normal distribution helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(x)`, computed directly from `erfc` so it keeps full
/// relative precision for large positive `x`.
pub fn phi_c(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

const QUANTILE_TOL: f64 = 1e-12;

/// `x` such that `phi_c(x) = tail`, by bisection. `tail` must lie in (0, 1).
pub fn inverse_phi_c(tail: f64) -> f64 {
    assert!(
        tail > 0.0 && tail < 1.0,
        "tail probability {tail} outside (0, 1)"
    );
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    while hi - lo > QUANTILE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if phi_c(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal quantile `z_p` with `cdf(z_p) = p`, `p` in (0, 1).
pub fn quantile(p: f64) -> f64 {
    if p < 0.5 {
        -inverse_phi_c(p)
    } else {
        inverse_phi_c(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 40-digit arbitrary-precision erfc.
    const REFERENCE: &[(f64, f64)] = &[
        (1.0, 0.158_655_253_931_457_05),
        (2.0, 0.022_750_131_948_179_21),
        (3.0, 0.001_349_898_031_630_094_5),
        (5.0, 2.866_515_718_791_939e-7),
        (8.0, 6.220_960_574_271_784e-16),
        (-1.5, 0.933_192_798_731_141_9),
    ];

    #[test]
    fn phi_c_matches_reference() {
        for &(x, expected) in REFERENCE {
            assert!((phi_c(x) - expected).abs() <= 1e-12, "x={x}");
        }
        assert_eq!(phi_c(0.0), 0.5);
    }

    #[test]
    fn phi_c_matches_integrated_density() {
        // independent route: composite Simpson on the density over [x, x + 40]
        let simpson_tail = |x: f64| {
            let panels = 40_000;
            let h = 40.0 / panels as f64;
            let mut s = phi(x) + phi(x + 40.0);
            for i in 1..panels {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * phi(x + i as f64 * h);
            }
            s * h / 3.0
        };
        for i in -16..=16 {
            let x = i as f64 * 0.5;
            assert!((phi_c(x) - simpson_tail(x)).abs() <= 1e-12, "x={x}");
        }
    }

    #[test]
    fn complement_symmetry() {
        for i in -80..=80 {
            let x = i as f64 * 0.1;
            assert!((phi_c(x) + phi_c(-x) - 1.0).abs() < 1e-15);
            assert!((cdf(x) + phi_c(x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        assert!((phi_c(1.959964) - 0.025).abs() < 1e-6);
        assert!((quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-10);
        assert!((quantile(0.025) + 1.959_963_984_540_054).abs() < 1e-10);
        assert!(quantile(0.5).abs() < 1e-12);
        for &p in &[1e-9, 1e-4, 0.1, 0.3, 0.7, 0.99, 1.0 - 1e-6] {
            let z = quantile(p);
            assert!((cdf(z) - p).abs() <= 1e-10 * p.max(1e-3), "p={p}");
        }
        assert!((inverse_phi_c(5e-6) - quantile(1.0 - 5e-6)).abs() < 1e-6);
    }
}
