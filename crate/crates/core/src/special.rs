//! Standard normal special functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Φ(z), accurate in both tails (relative accuracy near machine precision).
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// 1 − Φ(z) without cancellation.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

// Acklam's rational approximation, |rel err| < 1.2e-9 before refinement.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_671_070_525_976,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
const P_LOW: f64 = 0.02425;

fn acklam(u: f64) -> f64 {
    if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Φ⁻¹(u) for u in (0, 1). Callers validate the domain.
pub fn std_normal_quantile(u: f64) -> f64 {
    // 1 − u is exact for u >= 0.5, so reflect and work in the lower half only.
    if u > 0.5 {
        return -std_normal_quantile(1.0 - u);
    }
    let x = acklam(u);
    // One Halley step on Φ(x) − u.
    let e = std_normal_cdf(x) - u;
    let t = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - t / (1.0 + 0.5 * x * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((std_normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((std_normal_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((std_normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-13);
        assert_eq!(std_normal_quantile(0.5), 0.0);
    }

    #[test]
    fn quantile_round_trip_including_tails() {
        for &u in &[1e-300, 1e-20, 1e-9, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999_999] {
            let x = std_normal_quantile(u);
            let back = std_normal_cdf(x);
            assert!(((back - u) / u).abs() < 1e-12, "u={u} back={back}");
        }
    }

    #[test]
    fn survival_is_complement() {
        for &z in &[-8.0, -1.0, 0.0, 0.5, 3.0] {
            assert!((std_normal_sf(z) + std_normal_cdf(z) - 1.0).abs() < 1e-15);
        }
        assert!(std_normal_sf(10.0) > 0.0);
    }
}
