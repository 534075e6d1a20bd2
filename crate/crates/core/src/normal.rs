//! Standard normal distribution helpers and the uniform → Gaussian map.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

// Acklam's rational approximation, relative error ~1.15e-9 before refinement.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
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
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

/// Standard normal cumulative distribution function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of the standard normal CDF on the open interval (0, 1).
///
/// Rational approximation followed by one Halley step against an erfc-based
/// CDF. The upper half is evaluated as `-Φ⁻¹(1-u)`, so the result is exactly
/// antisymmetric whenever `1-u` is representable.
pub fn inv_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "inverse normal CDF needs 0 < u < 1, got {u}"
        )));
    }
    Ok(inv_normal_cdf_unchecked(u))
}

/// [`inv_normal_cdf`] without the domain check; `u` must lie in (0, 1).
#[inline]
pub fn inv_normal_cdf_unchecked(u: f64) -> f64 {
    if u > 0.5 {
        -lower_half(1.0 - u)
    } else {
        lower_half(u)
    }
}

#[inline]
fn lower_half(p: f64) -> f64 {
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = norm_cdf(x) - p;
    let t = e * SQRT_2PI * (0.5 * x * x).exp();
    x - t / (1.0 + 0.5 * x * t)
}

/// Element-wise [`inv_normal_cdf`].
pub fn uniforms_to_gaussians(point: &[f64]) -> Result<Vec<f64>> {
    point.iter().map(|&u| inv_normal_cdf(u)).collect()
}

/// In-place variant for hot loops; inputs must already be interior.
#[inline]
pub fn uniforms_to_gaussians_into(point: &[f64], out: &mut [f64]) {
    for (z, &u) in out.iter_mut().zip(point) {
        *z = inv_normal_cdf_unchecked(u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_quantiles() {
        assert_eq!(inv_normal_cdf(0.5).unwrap(), 0.0);
        // 1.959963984540054235... from a 40-digit erfinv evaluation
        assert!((inv_normal_cdf(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((inv_normal_cdf(0.025).unwrap() + 1.959_963_984_540_054).abs() < 1e-12);
        assert!((inv_normal_cdf(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(inv_normal_cdf(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn vector_transform() {
        assert_eq!(uniforms_to_gaussians(&[0.5, 0.5]).unwrap(), vec![0.0, 0.0]);
        assert!(uniforms_to_gaussians(&[]).unwrap().is_empty());
        let z = uniforms_to_gaussians(&[0.975]).unwrap();
        assert!((z[0] - 1.959_964).abs() < 1e-6);
        assert!(uniforms_to_gaussians(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn exact_antisymmetry_on_representable_complements() {
        for k in 1..2000 {
            let u = 0.5 + k as f64 / 4000.0 * 0.999_999;
            assert_eq!(
                inv_normal_cdf(1.0 - u).unwrap(),
                -inv_normal_cdf(u).unwrap()
            );
        }
    }
}
